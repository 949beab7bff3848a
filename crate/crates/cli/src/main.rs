use std::sync::Arc;

use pdgen_core::backends::HttpTransport;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let level = if args.iter().any(|a| a == "-q" || a == "--quiet") {
        "error"
    } else {
        match args.iter().filter(|a| *a == "-v" || *a == "--verbose").count() {
            0 => "warn",
            1 => "info",
            _ => "debug",
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = pdgen_cli::run(
        args,
        Arc::new(HttpTransport::new()),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
