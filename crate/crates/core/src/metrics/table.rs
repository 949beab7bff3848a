use super::MetricsReport;

const HEADERS: [&str; 7] = ["", "R_syntax", "R_plan", "R_part(O)", "R_part(I)", "R_part(G)", "R_all"];

/// Aligned console table, one row per labelled report.
pub fn render_table(rows: &[(&str, &MetricsReport)]) -> String {
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|(label, r)| {
            [
                label.to_string(),
                format!("{:.2}", r.r_syntax),
                format!("{:.2}", r.r_plan),
                format!("{:.2}", r.r_part.o),
                format!("{:.2}", r.r_part.i),
                format!("{:.2}", r.r_part.g),
                format!("{:.2}", r.r_all),
            ]
        })
        .collect();
    let mut widths = HEADERS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: &[String]| {
        let parts: Vec<String> = row
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join(" | ").trim_end().to_string() + "\n"
    };
    let mut out = line(&HEADERS.map(String::from));
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
    }
    out
}
