//! Prompt templates: plain text with `{{name}}` placeholders, compiled in
//! from `templates/` and overridable file by file from a directory.

use std::path::Path;

use super::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub system: String,
    pub caption: String,
    pub init: String,
    pub goal: String,
    pub whole: String,
    pub cot: String,
    pub refine: String,
}

impl Default for Templates {
    fn default() -> Self {
        Templates {
            system: include_str!("../../templates/system.txt").to_string(),
            caption: include_str!("../../templates/caption.txt").to_string(),
            init: include_str!("../../templates/init.txt").to_string(),
            goal: include_str!("../../templates/goal.txt").to_string(),
            whole: include_str!("../../templates/whole.txt").to_string(),
            cot: include_str!("../../templates/cot.txt").to_string(),
            refine: include_str!("../../templates/refine.txt").to_string(),
        }
    }
}

impl Templates {
    /// Built-in templates with any `<name>.txt` found in `dir` swapped in.
    pub fn with_overrides(dir: &Path) -> Result<Self, PipelineError> {
        let mut t = Templates::default();
        let slots: [(&str, &mut String); 7] = [
            ("system", &mut t.system),
            ("caption", &mut t.caption),
            ("init", &mut t.init),
            ("goal", &mut t.goal),
            ("whole", &mut t.whole),
            ("cot", &mut t.cot),
            ("refine", &mut t.refine),
        ];
        for (name, slot) in slots {
            let path = dir.join(format!("{name}.txt"));
            if path.is_file() {
                *slot = std::fs::read_to_string(&path)
                    .map_err(|e| PipelineError::Template(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(t)
    }
}

/// Substitutes `{{key}}` placeholders in one pass; substituted values are
/// never rescanned. Unknown placeholders are an error.
pub fn render(template: &str, vars: &[(&str, &str)]) -> Result<String, PipelineError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after
            .find("}}")
            .ok_or_else(|| PipelineError::Template("unclosed `{{` in template".into()))?;
        let key = after[..end].trim();
        let value = vars
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| PipelineError::Template(format!("no value for placeholder `{key}`")))?;
        out.push_str(value);
        rest = &after[end + 2..];
    }
    out.push_str(rest);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caption_template_is_exact() {
        let t = Templates::default();
        let p = render(&t.caption, &[("object", "carrot")]).unwrap();
        assert_eq!(p, "Q: what does this carrot describe? A: ");
    }

    #[test]
    fn cot_template_asks_the_question() {
        let t = Templates::default();
        assert!(t.cot.contains("What part of the PDDL problem do you think is causing this error?"));
    }

    #[test]
    fn values_are_not_rescanned() {
        let s = render("a {{x}} b {{ y }}", &[("x", "{{y}}"), ("y", "2")]).unwrap();
        assert_eq!(s, "a {{y}} b 2");
    }

    #[test]
    fn missing_value_is_an_error() {
        assert!(render("{{nope}}", &[]).is_err());
        assert!(render("{{open", &[]).is_err());
    }

    #[test]
    fn builtins_render_with_their_keys() {
        let t = Templates::default();
        let all = [
            ("domain", "d"),
            ("examples", ""),
            ("objects", "o"),
            ("boxes", "b"),
            ("instruction", "i"),
            ("init", "n"),
            ("problem", "p"),
            ("error", "e"),
            ("explanation", ""),
            ("object", "x"),
        ];
        for text in [&t.system, &t.caption, &t.init, &t.goal, &t.whole, &t.cot, &t.refine] {
            render(text, &all).unwrap();
        }
    }

    #[test]
    fn directory_overrides_single_files() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("goal.txt"), "custom {{instruction}}").unwrap();
        let t = Templates::with_overrides(dir.path()).unwrap();
        assert_eq!(t.goal, "custom {{instruction}}");
        assert_eq!(t.init, Templates::default().init);
    }
}
