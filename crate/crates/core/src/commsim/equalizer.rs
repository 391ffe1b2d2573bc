//! Batch least-squares FIR equalizer.

use super::{precondition, CommError};

/// Causal FIR filtering, output truncated to the input length.
pub fn equalize(w: &[f64], taps: &[f64]) -> Vec<f64> {
    (0..w.len())
        .map(|n| taps.iter().enumerate().take(n + 1).map(|(k, h)| h * w[n - k]).sum())
        .collect()
}

/// Taps minimising `sum_n (tx[n] - (h * rx)[n])^2` over the training
/// window, found from the normal equations `R h = p` with
/// `R[j][k] = sum_n rx[n-j] rx[n-k]` and `p[j] = sum_n tx[n] rx[n-j]`.
#[allow(clippy::needless_range_loop)]
pub fn equalizer_design(rx: &[f64], tx: &[f64], ntaps: usize) -> Result<Vec<f64>, CommError> {
    if rx.len() != tx.len() {
        return Err(precondition(format!(
            "training sequences have different lengths ({} and {})",
            rx.len(),
            tx.len()
        )));
    }
    if ntaps < 1 || ntaps > rx.len() {
        return Err(precondition(format!(
            "number of taps must be between 1 and the training length {}",
            rx.len()
        )));
    }
    let lagged = |n: usize, k: usize| if n >= k { rx[n - k] } else { 0.0 };
    let mut r = vec![vec![0.0; ntaps]; ntaps];
    let mut p = vec![0.0; ntaps];
    for n in 0..rx.len() {
        for j in 0..ntaps {
            let xj = lagged(n, j);
            if xj == 0.0 {
                continue;
            }
            p[j] += tx[n] * xj;
            for k in 0..ntaps {
                r[j][k] += xj * lagged(n, k);
            }
        }
    }
    solve(r, p).ok_or(CommError::IllConditioned)
}

/// Gaussian elimination with partial pivoting. Returns `None` when a pivot
/// is negligible relative to the matrix scale.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flat_map(|row| row.iter()).fold(0.0f64, |m, &x| m.max(x.abs()));
    if scale == 0.0 {
        return None;
    }
    let tol = scale * n as f64 * 1e-12;
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= tol {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_training_input_is_ill_conditioned() {
        assert_eq!(
            equalizer_design(&[0.0; 5], &[1.0; 5], 2),
            Err(CommError::IllConditioned)
        );
    }

    #[test]
    fn too_many_taps() {
        assert!(equalizer_design(&[1.0; 3], &[1.0; 3], 4).is_err());
    }

    #[test]
    fn fir_is_causal() {
        assert_eq!(equalize(&[1.0, 2.0, 3.0], &[1.0, -1.0]), vec![1.0, 1.0, 1.0]);
    }
}
