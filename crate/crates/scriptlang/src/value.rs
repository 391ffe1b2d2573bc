use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::MAX_LIST_DEPTH;

/// A runtime datum. Single-element vectors are always normalised to
/// [`Value::Num`], matching the scalar-is-a-1x1-array convention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Num(f64),
    Vector(Vec<f64>),
    Str(String),
    List(Vec<Value>),
    Bool(bool),
}

impl Value {
    pub fn from_vec(v: Vec<f64>) -> Value {
        if v.len() == 1 {
            Value::Num(v[0])
        } else {
            Value::Vector(v)
        }
    }

    pub fn empty() -> Value {
        Value::Vector(Vec::new())
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Num(_) => "number",
            Value::Vector(_) => "vector",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Bool(_) => "boolean",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Value::Num(_) | Value::Vector(_) | Value::Bool(_))
    }

    /// Element count (characters for strings).
    pub fn len(&self) -> usize {
        match self {
            Value::Num(_) | Value::Bool(_) => 1,
            Value::Vector(v) => v.len(),
            Value::Str(s) => s.chars().count(),
            Value::List(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Numeric view: booleans become 0/1, strings their character codes.
    pub fn to_numbers(&self) -> Option<Vec<f64>> {
        match self {
            Value::Num(n) => Some(vec![*n]),
            Value::Bool(b) => Some(vec![if *b { 1.0 } else { 0.0 }]),
            Value::Vector(v) => Some(v.clone()),
            Value::Str(s) => Some(s.chars().map(|c| c as u32 as f64).collect()),
            Value::List(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Num(n) => Some(*n),
            Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    /// Truth value used by `if`, `while`, `&&` and `||`: every element must
    /// be nonzero and the value nonempty.
    pub fn truthy(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::List(_) => None,
            other => {
                let nums = other.to_numbers()?;
                Some(!nums.is_empty() && nums.iter().all(|&x| x != 0.0))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Value::List(items) => 1 + items.iter().map(Value::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn within_depth_limit(&self) -> bool {
        self.depth() <= MAX_LIST_DEPTH
    }

    /// One-line rendering truncated to the first `max` elements.
    pub fn summary(&self, max: usize) -> String {
        match self {
            Value::Num(n) => format_number(*n),
            Value::Bool(b) => b.to_string(),
            Value::Str(s) => {
                let n = s.chars().count();
                if n > max.saturating_mul(4) {
                    let head: String = s.chars().take(max * 4).collect();
                    format!("'{head}...' (length {n})")
                } else {
                    format!("'{s}'")
                }
            }
            Value::Vector(v) => {
                let shown: Vec<String> = v.iter().take(max).map(|x| format_number(*x)).collect();
                if v.len() > max {
                    format!("[{} ...] (length {})", shown.join(" "), v.len())
                } else {
                    format!("[{}] (length {})", shown.join(" "), v.len())
                }
            }
            Value::List(items) => {
                let shown: Vec<String> = items.iter().take(max).map(|x| x.summary(max)).collect();
                let more = if items.len() > max { ", ..." } else { "" };
                format!("{{{}{more}}} (length {})", shown.join(", "), items.len())
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Num(n) => f.write_str(&format_number(*n)),
            Value::Bool(b) => write!(f, "{}", u8::from(*b)),
            Value::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| format_number(*x)).collect();
                f.write_str(&parts.join(" "))
            }
            Value::List(items) => {
                let parts: Vec<String> = items.iter().map(|x| x.summary(16)).collect();
                write!(f, "{{{}}}", parts.join(", "))
            }
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Num(x)
    }
}

impl From<Vec<f64>> for Value {
    fn from(v: Vec<f64>) -> Self {
        Value::from_vec(v)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Str(s.to_string())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Bool(b)
    }
}

/// Integers print without a fractional part; everything else uses the
/// shortest representation that round-trips, in exponent form below 1e-4 or
/// from 1e15 up.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x.is_finite() && x.fract() == 0.0 && a < 1e15 {
        format!("{}", x as i64)
    } else if x.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Ordered name to value map left behind by a script.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Workspace {
    vars: IndexMap<String, Value>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.vars.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.vars.contains_key(name)
    }

    /// Inserts or replaces; a replaced variable keeps its original slot.
    pub fn set(&mut self, name: impl Into<String>, value: Value) {
        self.vars.insert(name.into(), value);
    }

    pub fn remove(&mut self, name: &str) -> Option<Value> {
        self.vars.shift_remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.vars.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Variables outside the reserved namespace.
    pub fn visible(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.iter().filter(|(k, _)| !crate::is_reserved(k))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.vars.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_vectors_collapse() {
        assert_eq!(Value::from_vec(vec![3.0]), Value::Num(3.0));
        assert_eq!(Value::from_vec(vec![]), Value::empty());
    }

    #[test]
    fn summary_truncates_at_limit() {
        let v = Value::Vector((0..20).map(f64::from).collect());
        let s = v.summary(16);
        assert!(s.starts_with("[0 1 2"));
        assert!(s.contains("15 ...]"));
        assert!(s.ends_with("(length 20)"));
    }

    #[test]
    fn truthiness() {
        assert_eq!(Value::Vector(vec![1.0, 2.0]).truthy(), Some(true));
        assert_eq!(Value::Vector(vec![1.0, 0.0]).truthy(), Some(false));
        assert_eq!(Value::empty().truthy(), Some(false));
        assert_eq!(Value::List(vec![]).truthy(), None);
    }

    #[test]
    fn workspace_preserves_insertion_order() {
        let mut ws = Workspace::new();
        ws.set("b", 1.0.into());
        ws.set("a", 2.0.into());
        ws.set("b", 3.0.into());
        let names: Vec<_> = ws.names().collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(ws.get("b"), Some(&Value::Num(3.0)));
    }

    #[test]
    fn list_depth() {
        let mut v = Value::Num(1.0);
        for _ in 0..9 {
            v = Value::List(vec![v]);
        }
        assert_eq!(v.depth(), 9);
        assert!(!v.within_depth_limit());
    }
}
