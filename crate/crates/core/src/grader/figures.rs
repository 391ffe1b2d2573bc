//! Staged figure comparison: figure count, curves per figure, points per
//! curve, then the values themselves. The first failing stage is reported.

use scriptlang::FigureData;

use super::compare::{close_slices, mse_slices, Comparison, Mismatch};

/// How curve values are compared in the last stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueRule {
    Close { eps_multiple: f64 },
    Mse { tolerance: f64 },
}

/// `figure` selects one 1-based figure position; `None` checks them all.
pub fn compare_figures(
    student: &[FigureData],
    reference: &[FigureData],
    figure: Option<usize>,
    rule: ValueRule,
) -> Comparison {
    if student.len() != reference.len() {
        return fail(
            Mismatch::Length,
            format!("Expected {} figures, found {}.", reference.len(), student.len()),
        );
    }
    let positions: Vec<usize> = match figure {
        Some(k) => vec![k - 1],
        None => (0..reference.len()).collect(),
    };
    for &p in &positions {
        let Some(r) = reference.get(p) else {
            return fail(
                Mismatch::Length,
                format!("Expected at least {} figures, found {}.", p + 1, reference.len()),
            );
        };
        let s = &student[p];
        if s.curves.len() != r.curves.len() {
            return fail(
                Mismatch::Length,
                format!(
                    "Figure {}: expected {} curves, found {}.",
                    p + 1,
                    r.curves.len(),
                    s.curves.len()
                ),
            );
        }
    }
    for &p in &positions {
        for (c, (sc, rc)) in student[p].curves.iter().zip(&reference[p].curves).enumerate() {
            if sc.len() != rc.len() {
                return fail(
                    Mismatch::Length,
                    format!(
                        "Figure {}, curve {}: expected {} points, found {}.",
                        p + 1,
                        c + 1,
                        rc.len(),
                        sc.len()
                    ),
                );
            }
        }
    }
    for &p in &positions {
        for (c, (sc, rc)) in student[p].curves.iter().zip(&reference[p].curves).enumerate() {
            for (axis, sv, rv) in [("x", &sc.x, &rc.x), ("y", &sc.y, &rc.y)] {
                let bad = match rule {
                    ValueRule::Close { eps_multiple } => close_slices(sv, rv, eps_multiple),
                    ValueRule::Mse { tolerance } => mse_slices(sv, rv, tolerance),
                };
                if let Some(b) = bad {
                    return fail(
                        Mismatch::Value,
                        format!("Figure {}, curve {}, {axis} values: {}", p + 1, c + 1, b.detail),
                    );
                }
            }
        }
    }
    Comparison {
        mismatch: None,
        detail: String::new(),
    }
}

fn fail(kind: Mismatch, detail: String) -> Comparison {
    Comparison {
        mismatch: Some(kind),
        detail,
    }
}
