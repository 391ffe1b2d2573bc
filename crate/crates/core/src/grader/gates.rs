//! The checks that run before any comparison with the reference.

use indexmap::IndexMap;
use scriptlang::value::format_number;
use scriptlang::{Program, Value, Workspace};

use super::checks::render;
use super::compare::compare_exact;
use super::report::CheckResult;

pub const BANNED_ID: &str = "banned_functions";
pub const PROTECTED_ID: &str = "protected_inputs";

pub const DEFAULT_BANNED_MESSAGE: &str = "The function {var} may not be used in this task (line {line}).";

/// Fails iff a banned name is used as a call or bare identifier. Each name
/// is reported once, at its first use.
pub fn check_banned(program: &Program, names: &[String], template: Option<&str>) -> CheckResult {
    let mut lines = Vec::new();
    let used = program.referenced_names();
    for name in names {
        if let Some(first) = used.iter().find(|id| &id.name == name) {
            let line = first.pos.line.to_string();
            lines.push(render(
                template.unwrap_or(DEFAULT_BANNED_MESSAGE),
                &[("var", name), ("line", &line)],
            ));
        }
    }
    if lines.is_empty() {
        CheckResult::pass(BANNED_ID, BANNED_ID)
    } else {
        CheckResult::fail(BANNED_ID, BANNED_ID, lines.join("\n"))
    }
}

pub fn missing_message(var: &str) -> String {
    format!("Expected variable '{var}' is missing.")
}

/// How a required value is spelled in feedback: strings quoted, vectors
/// bracketed.
pub fn literal(v: &Value) -> String {
    match v {
        Value::Str(s) => format!("'{s}'"),
        Value::Num(n) => format_number(*n),
        Value::Bool(b) => b.to_string(),
        Value::Vector(xs) => {
            let shown: Vec<String> = xs.iter().take(16).map(|x| format_number(*x)).collect();
            let more = if xs.len() > 16 { " ..." } else { "" };
            format!("[{}{more}]", shown.join(" "))
        }
        Value::List(_) => v.summary(16),
    }
}

/// Existence first: the first missing variable ends the check. Otherwise
/// every changed value is reported.
pub fn check_protected_inputs(ws: &Workspace, required: &IndexMap<String, Value>) -> CheckResult {
    for name in required.keys() {
        if !ws.contains(name) {
            return CheckResult::fail(PROTECTED_ID, PROTECTED_ID, missing_message(name));
        }
    }
    let lines: Vec<String> = required
        .iter()
        .filter(|(name, want)| !compare_exact(ws.get(name).expect("checked above"), want).passed())
        .map(|(name, want)| format!("The variable {name} should be {}. Do not change it.", literal(want)))
        .collect();
    if lines.is_empty() {
        CheckResult::pass(PROTECTED_ID, PROTECTED_ID)
    } else {
        CheckResult::fail(PROTECTED_ID, PROTECTED_ID, lines.join("\n"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use scriptlang::parse_source;

    #[test]
    fn banned_call_cites_its_line() {
        let p = parse_source("% text2bitseq here is fine\nx = 1;\ny = text2bitseq('a');").unwrap();
        let r = check_banned(&p, &["text2bitseq".into()], None);
        assert!(r.failed());
        assert_eq!(
            r.message,
            "The function text2bitseq may not be used in this task (line 3)."
        );
        let p = parse_source("% text2bitseq('a')\nx = 1;").unwrap();
        assert!(check_banned(&p, &["text2bitseq".into()], None).passed());
    }

    #[test]
    fn algorithm_messages() {
        let mut ws = Workspace::new();
        ws.set("SPB", Value::Num(5.0));
        ws.set("tx_msg", Value::from("Finished!"));
        let mut req = IndexMap::new();
        req.insert("tx_msg".to_string(), Value::from("Finished!"));
        req.insert("SPB".to_string(), Value::Num(20.0));
        let r = check_protected_inputs(&ws, &req);
        assert_eq!(r.message, "The variable SPB should be 20. Do not change it.");
        ws.set("tx_msg", Value::from("Hello!"));
        let r = check_protected_inputs(&ws, &req);
        assert!(r
            .message
            .starts_with("The variable tx_msg should be 'Finished!'. Do not change it.\n"));
        ws.remove("tx_msg");
        let r = check_protected_inputs(&ws, &req);
        assert_eq!(r.message, "Expected variable 'tx_msg' is missing.");
    }
}
