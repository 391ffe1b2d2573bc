//! How much code a task leaves for the student to write: the number of
//! reference lines that do not appear, in order, in the starter code.

use indexmap::IndexMap;

use super::course::Course;
use super::manifest::TaskKind;

/// Non-blank lines with comments stripped and whitespace collapsed.
fn code_lines(src: &str) -> Vec<String> {
    src.lines()
        .map(|l| l.split('%').next().unwrap_or(""))
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect()
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    for x in a {
        let mut cur = vec![0usize; b.len() + 1];
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Reference lines missing from the starter, after a longest common
/// subsequence alignment.
pub fn missing_lines(starter: &str, reference: &str) -> usize {
    let r = code_lines(reference);
    r.len() - lcs_len(&code_lines(starter), &r)
}

/// Mean missing-line count of each lab's implementation tasks, for labs of
/// the given course part, in course order. Labs without implementation
/// tasks are left out.
pub fn lab_deltas(course: &Course, part: u32) -> IndexMap<String, f64> {
    let mut out = IndexMap::new();
    for lab in course.config.labs.iter().filter(|l| l.part == part) {
        let deltas: Vec<usize> = lab
            .tasks
            .iter()
            .filter_map(|t| course.task(&lab.id, t))
            .filter(|m| m.kind == TaskKind::Implementation)
            .map(|m| missing_lines(&m.starter, &m.reference))
            .collect();
        if !deltas.is_empty() {
            out.insert(
                lab.id.clone(),
                deltas.iter().sum::<usize>() as f64 / deltas.len() as f64,
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_changed_and_added_lines() {
        assert_eq!(missing_lines("a = 1;\nb = 2;", "a = 1;\nb = 2;"), 0);
        assert_eq!(missing_lines("a = 1; % note\n\nb = 2;", "a  =  1;\nb = 3;\nc = 4;"), 2);
        assert_eq!(missing_lines("", "x = 1;\n% only a comment\n"), 1);
    }
}
