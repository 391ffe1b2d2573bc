use serde::{Deserialize, Serialize};

pub const DEFAULT_EPS_MULTIPLE: f64 = 100.0;

fn default_eps() -> f64 {
    DEFAULT_EPS_MULTIPLE
}

/// One assessment rule from a task manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    /// Feedback template with `{var}`, `{expected}`, `{observed}` and `{line}` placeholders.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(flatten)]
    pub rule: CheckRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CheckRule {
    VarExists {
        var: String,
    },
    VarEquals {
        var: String,
    },
    VarClose {
        var: String,
        #[serde(default = "default_eps")]
        eps_multiple: f64,
    },
    VarCloseMse {
        var: String,
        mse_tolerance: f64,
    },
    FigureMatch {
        /// 1-based figure position; all figures when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        figure: Option<usize>,
        #[serde(default = "default_eps")]
        eps_multiple: f64,
        /// Compare curve values by mean squared error instead.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mse_tolerance: Option<f64>,
    },
    ProtocolTrace,
}

impl CheckRule {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckRule::VarExists { .. } => "var_exists",
            CheckRule::VarEquals { .. } => "var_equals",
            CheckRule::VarClose { .. } => "var_close",
            CheckRule::VarCloseMse { .. } => "var_close_mse",
            CheckRule::FigureMatch { .. } => "figure_match",
            CheckRule::ProtocolTrace => "protocol_trace",
        }
    }

    pub fn var(&self) -> Option<&str> {
        match self {
            CheckRule::VarExists { var }
            | CheckRule::VarEquals { var }
            | CheckRule::VarClose { var, .. }
            | CheckRule::VarCloseMse { var, .. } => Some(var),
            _ => None,
        }
    }
}

impl CheckSpec {
    pub fn new(rule: CheckRule) -> Self {
        Self {
            id: None,
            message: None,
            rule,
        }
    }

    pub fn with_message(mut self, template: &str) -> Self {
        self.message = Some(template.to_string());
        self
    }

    /// The explicit id, or `kind:var` / `figure_match:k` / `protocol_trace`.
    pub fn id(&self) -> String {
        if let Some(id) = &self.id {
            return id.clone();
        }
        match &self.rule {
            CheckRule::FigureMatch { figure: Some(k), .. } => format!("figure_match:{k}"),
            rule => match rule.var() {
                Some(v) => format!("{}:{v}", rule.kind()),
                None => rule.kind().to_string(),
            },
        }
    }

    /// Structural problems that make the check unusable.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        match &self.rule {
            CheckRule::VarClose { eps_multiple, .. } | CheckRule::FigureMatch { eps_multiple, .. }
                if !(*eps_multiple > 0.0) =>
            {
                out.push(format!("{}: eps_multiple must be positive", self.id()));
            }
            _ => {}
        }
        match &self.rule {
            CheckRule::VarCloseMse { mse_tolerance, .. }
            | CheckRule::FigureMatch {
                mse_tolerance: Some(mse_tolerance),
                ..
            } if !(*mse_tolerance > 0.0) => {
                out.push(format!("{}: mse_tolerance must be positive", self.id()));
            }
            CheckRule::FigureMatch { figure: Some(0), .. } => {
                out.push(format!("{}: figures are numbered from 1", self.id()))
            }
            _ => {}
        }
        if let Some(var) = self.rule.var() {
            if !scriptlang::is_identifier(var) {
                out.push(format!("{}: '{var}' is not a valid variable name", self.id()));
            }
        }
        if let Some(t) = &self.message {
            out.extend(template_problems(t).into_iter().map(|p| format!("{}: {p}", self.id())));
        }
        out
    }
}

pub const PLACEHOLDERS: [&str; 4] = ["var", "expected", "observed", "line"];

/// Substitutes `{name}` placeholders; unknown names are left untouched.
pub fn render(template: &str, values: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (k, v) in values {
        out = out.replace(&format!("{{{k}}}"), v);
    }
    out
}

/// Unknown `{name}` placeholders in a template.
pub fn template_problems(template: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let after = &rest[open + 1..];
        let Some(close) = after.find('}') else { break };
        let name = &after[..close];
        if !name.is_empty()
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !PLACEHOLDERS.contains(&name)
        {
            out.push(format!("unknown placeholder {{{name}}} in message template"));
        }
        rest = &after[close + 1..];
    }
    out
}
