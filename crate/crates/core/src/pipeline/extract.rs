//! Pulling a PDDL form out of free-form model output.

use super::PipelineError;

/// Heads accepted by [`extract_pddl_block`].
pub const ANY_HEAD: &[&str] = &["define", ":init", ":goal", "and"];

/// First balanced s-expression headed by `define`, `:init`, `:goal` or
/// `and`, looking inside fenced code blocks before the surrounding prose.
/// Comments are dropped and whitespace runs collapse to one space.
pub fn extract_pddl_block(text: &str) -> Result<String, PipelineError> {
    extract_with_heads(text, ANY_HEAD)
}

pub fn extract_with_heads(text: &str, heads: &[&str]) -> Result<String, PipelineError> {
    let text = strip_comments(text);
    fenced_blocks(&text)
        .into_iter()
        .chain(std::iter::once(text.as_str()))
        .find_map(|chunk| first_form(chunk, heads))
        .map(|form| normalize(&form))
        .ok_or_else(|| PipelineError::ExtractionFailure(expected(heads)))
}

fn expected(heads: &[&str]) -> String {
    let forms: Vec<String> = heads.iter().map(|h| format!("`({h}`")).collect();
    format!("no balanced form starting with {}", forms.join(" or "))
}

fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| l.split(';').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut parts = text.split("```");
    parts.next();
    while let (Some(inner), Some(_)) = (parts.next(), parts.next().or(Some(""))) {
        // Drop an info string such as `pddl` on the opening fence line.
        let body = match inner.find('\n') {
            Some(nl) if !inner[..nl].contains('(') => &inner[nl + 1..],
            _ => inner,
        };
        blocks.push(body);
    }
    blocks
}

fn first_form(chunk: &str, heads: &[&str]) -> Option<String> {
    let bytes = chunk.as_bytes();
    for (i, _) in chunk.match_indices('(') {
        let rest = chunk[i + 1..].trim_start();
        let token: String = rest
            .chars()
            .take_while(|c| !c.is_whitespace() && *c != '(' && *c != ')')
            .collect::<String>()
            .to_lowercase();
        if !heads.contains(&token.as_str()) {
            continue;
        }
        let mut depth = 0usize;
        for (j, &b) in bytes.iter().enumerate().skip(i) {
            match b {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(chunk[i..=j].to_string());
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn normalize(form: &str) -> String {
    form.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fenced_define() {
        let t = "Here is the problem:\n```\n(define (problem p)\n  (:domain d))\n```\nDone.";
        assert_eq!(extract_pddl_block(t).unwrap(), "(define (problem p) (:domain d))");
    }

    #[test]
    fn bare_and() {
        assert_eq!(extract_pddl_block("(and (on a b))").unwrap(), "(and (on a b))");
    }

    #[test]
    fn refusal_fails() {
        assert!(matches!(
            extract_pddl_block("I cannot answer."),
            Err(PipelineError::ExtractionFailure(_))
        ));
    }

    #[test]
    fn fence_preferred_over_prose() {
        let t = "You could write (and (on x y)) but better:\n```pddl\n(:goal (and (on a b)))\n```";
        assert_eq!(extract_pddl_block(t).unwrap(), "(:goal (and (on a b)))");
    }

    #[test]
    fn comments_removed_and_unbalanced_skipped() {
        let t = "(:init (on a b) ; stale\n (clear a)";
        assert!(extract_pddl_block(t).is_err());
        let t = "(:init (on a b) ; note (\n (clear a))";
        assert_eq!(extract_pddl_block(t).unwrap(), "(:init (on a b) (clear a))");
    }

    #[test]
    fn heads_restrict_choice() {
        let t = "(and (x)) then (:init (y))";
        assert_eq!(extract_with_heads(t, &[":init"]).unwrap(), "(:init (y))");
        assert_eq!(extract_pddl_block(t).unwrap(), "(and (x))");
    }

    #[test]
    fn unterminated_fence_still_searched() {
        let t = "```pddl\n(:goal (and (on a b)))";
        assert_eq!(extract_pddl_block(t).unwrap(), "(:goal (and (on a b)))");
    }
}
