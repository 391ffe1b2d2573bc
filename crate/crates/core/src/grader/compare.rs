//! Value comparisons used by the workspace checks.
//!
//! Each comparison returns a [`Comparison`]: a verdict plus a factual
//! description of the first difference found, with summaries of both values.

use scriptlang::value::format_number;
use scriptlang::Value;

/// Elements shown in value summaries.
pub const SUMMARY_ELEMENTS: usize = 16;

/// Machine epsilon for 64-bit floats, 2^-52.
pub const EPS: f64 = f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mismatch {
    Type,
    Length,
    Value,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub mismatch: Option<Mismatch>,
    /// Empty on a pass.
    pub detail: String,
}

impl Comparison {
    fn pass() -> Self {
        Self {
            mismatch: None,
            detail: String::new(),
        }
    }

    fn fail(kind: Mismatch, detail: String) -> Self {
        Self {
            mismatch: Some(kind),
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

pub fn summary(v: &Value) -> String {
    v.summary(SUMMARY_ELEMENTS)
}

fn observed_expected(student: &Value, reference: &Value) -> String {
    format!("Observed: {}\nExpected: {}", summary(student), summary(reference))
}

/// Strings compare as text, lists elementwise, and numbers, vectors and
/// booleans as numeric arrays.
fn numeric(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Num(_) | Value::Vector(_) | Value::Bool(_) => v.to_numbers(),
        _ => None,
    }
}

fn class(v: &Value) -> &'static str {
    match v {
        Value::Num(_) | Value::Vector(_) | Value::Bool(_) => "numeric value",
        Value::Str(_) => "string",
        Value::List(_) => "list",
    }
}

fn type_mismatch(student: &Value, reference: &Value) -> Comparison {
    Comparison::fail(
        Mismatch::Type,
        format!(
            "It is a {} but a {} was expected.\n{}",
            class(student),
            class(reference),
            observed_expected(student, reference)
        ),
    )
}

fn length_mismatch(found: usize, expected: usize, student: &Value, reference: &Value) -> Comparison {
    Comparison::fail(
        Mismatch::Length,
        format!(
            "Its length is {found} but the expected length is {expected}.\n{}",
            observed_expected(student, reference)
        ),
    )
}

/// Exact equality: same kind, same length, identical elements.
pub fn compare_exact(student: &Value, reference: &Value) -> Comparison {
    match (student, reference) {
        (Value::Str(s), Value::Str(r)) => {
            let (sc, rc): (Vec<char>, Vec<char>) = (s.chars().collect(), r.chars().collect());
            if sc.len() != rc.len() {
                return length_mismatch(sc.len(), rc.len(), student, reference);
            }
            match sc.iter().zip(&rc).position(|(a, b)| a != b) {
                None => Comparison::pass(),
                Some(i) => Comparison::fail(
                    Mismatch::Value,
                    format!(
                        "The first difference is at character {}: found '{}', expected '{}'.\n{}",
                        i + 1,
                        sc[i],
                        rc[i],
                        observed_expected(student, reference)
                    ),
                ),
            }
        }
        (Value::List(s), Value::List(r)) => {
            if s.len() != r.len() {
                return length_mismatch(s.len(), r.len(), student, reference);
            }
            match s.iter().zip(r).position(|(a, b)| !compare_exact(a, b).passed()) {
                None => Comparison::pass(),
                Some(i) => Comparison::fail(
                    Mismatch::Value,
                    format!(
                        "The first differing entry is entry {}: found {}, expected {}.",
                        i + 1,
                        summary(&s[i]),
                        summary(&r[i])
                    ),
                ),
            }
        }
        _ => match (numeric(student), numeric(reference)) {
            (Some(s), Some(r)) => {
                if s.len() != r.len() {
                    return length_mismatch(s.len(), r.len(), student, reference);
                }
                match s.iter().zip(&r).position(|(a, b)| a != b) {
                    None => Comparison::pass(),
                    Some(i) => Comparison::fail(
                        Mismatch::Value,
                        format!(
                            "The first difference is at index {}: found {}, expected {}.\n{}",
                            i + 1,
                            format_number(s[i]),
                            format_number(r[i]),
                            observed_expected(student, reference)
                        ),
                    ),
                }
            }
            _ => type_mismatch(student, reference),
        },
    }
}

/// `eps_multiple * EPS * max(1, max|r|)`.
pub fn close_threshold(reference: &[f64], eps_multiple: f64) -> f64 {
    let scale = reference.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    eps_multiple * EPS * scale
}

/// Four significant digits, in scientific notation outside [1e-4, 1e6).
fn sig(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() {
        format!("{x}")
    } else if (1e-4..1e6).contains(&a) {
        let digits = (3 - a.log10().floor() as i32).max(0) as usize;
        let s = format!("{x:.digits$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.3e}")
    }
}

/// Largest absolute elementwise difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// Pass iff equal length and `max|s - r| <= close_threshold(r, eps_multiple)`.
pub fn compare_close(student: &Value, reference: &Value, eps_multiple: f64) -> Comparison {
    let (Some(s), Some(r)) = (numeric(student), numeric(reference)) else {
        return type_mismatch(student, reference);
    };
    close_slices(&s, &r, eps_multiple).map_or_else(Comparison::pass, |c| c.with_values(student, reference))
}

/// Pass iff equal length and the mean squared difference is at most `tolerance`.
pub fn compare_mse(student: &Value, reference: &Value, tolerance: f64) -> Comparison {
    let (Some(s), Some(r)) = (numeric(student), numeric(reference)) else {
        return type_mismatch(student, reference);
    };
    mse_slices(&s, &r, tolerance).map_or_else(Comparison::pass, |c| c.with_values(student, reference))
}

impl Comparison {
    fn with_values(mut self, student: &Value, reference: &Value) -> Self {
        self.detail.push('\n');
        self.detail.push_str(&observed_expected(student, reference));
        self
    }
}

/// Slice form of [`compare_close`]; `None` on a pass.
pub(crate) fn close_slices(s: &[f64], r: &[f64], eps_multiple: f64) -> Option<Comparison> {
    if s.len() != r.len() {
        return Some(Comparison::fail(
            Mismatch::Length,
            format!("Its length is {} but the expected length is {}.", s.len(), r.len()),
        ));
    }
    let dev = max_abs_diff(s, r);
    let thr = close_threshold(r, eps_multiple);
    (dev > thr).then(|| {
        let at = s.iter().zip(r).position(|(a, b)| (a - b).abs() == dev).unwrap_or(0);
        Comparison::fail(
            Mismatch::Value,
            format!(
                "The largest difference from the expected values is {} at index {}, above the tolerance {}.",
                sig(dev),
                at + 1,
                sig(thr)
            ),
        )
    })
}

pub(crate) fn mse_slices(s: &[f64], r: &[f64], tolerance: f64) -> Option<Comparison> {
    if s.len() != r.len() {
        return Some(Comparison::fail(
            Mismatch::Length,
            format!("Its length is {} but the expected length is {}.", s.len(), r.len()),
        ));
    }
    let m = mse(s, r);
    (m > tolerance).then(|| {
        Comparison::fail(
            Mismatch::Value,
            format!(
                "The mean squared difference from the expected values is {}, above the tolerance {}.",
                sig(m),
                sig(tolerance)
            ),
        )
    })
}
