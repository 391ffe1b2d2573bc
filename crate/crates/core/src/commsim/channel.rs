//! First-order lowpass channel with integer delay and additive Gaussian
//! noise, plus the noise/histogram and eye-diagram helpers.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use scriptlang::Curve;

use super::{precondition, CommError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Smoothing coefficient in [0, 1).
    pub a: f64,
    /// Delay in samples.
    pub d: usize,
    pub sigma: f64,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            a: 0.5,
            d: 0,
            sigma: 0.05,
        }
    }
}

impl ChannelModel {
    pub const IDENTITY: ChannelModel = ChannelModel {
        a: 0.0,
        d: 0,
        sigma: 0.0,
    };

    pub fn new(a: f64, d: usize, sigma: f64) -> Result<Self, CommError> {
        if !(0.0..1.0).contains(&a) {
            return Err(precondition(format!("channel coefficient a = {a} must lie in [0, 1)")));
        }
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(precondition(format!("noise level sigma = {sigma} must be nonnegative")));
        }
        Ok(Self { a, d, sigma })
    }
}

/// `y[n] = a*y[n-1] + (1-a)*x[n-d] + noise`, with `x[k] = 0` for `k < 1`
/// and `y[0] = 0`. The output is `d` samples longer than the input.
/// No random numbers are drawn when `sigma` is zero.
pub fn channel_transmit<R: Rng + ?Sized>(w: &[f64], ch: &ChannelModel, rng: &mut R) -> Vec<f64> {
    if ch.sigma > 0.0 {
        let normal = Normal::new(0.0, ch.sigma).expect("sigma checked");
        lowpass(w, ch, || normal.sample(rng))
    } else {
        lowpass(w, ch, || 0.0)
    }
}

fn lowpass(w: &[f64], ch: &ChannelModel, mut noise: impl FnMut() -> f64) -> Vec<f64> {
    let n = w.len() + ch.d;
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for i in 0..n {
        let x = if i >= ch.d { w[i - ch.d] } else { 0.0 };
        let y = ch.a * prev + (1.0 - ch.a) * x + noise();
        out.push(y);
        prev = y;
    }
    out
}

/// Response to `n` ones with the noise switched off.
pub fn step_response(ch: &ChannelModel, n: usize) -> Result<Vec<f64>, CommError> {
    if n < 1 {
        return Err(precondition("step response length must be at least 1"));
    }
    Ok(lowpass(&vec![1.0; n], ch, || 0.0))
}

pub fn noise<R: Rng + ?Sized>(n: usize, sigma: f64, rng: &mut R) -> Result<Vec<f64>, CommError> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(precondition(format!("sigma = {sigma} must be nonnegative")));
    }
    if sigma == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let normal = Normal::new(0.0, sigma).expect("sigma checked");
    Ok((0..n).map(|_| normal.sample(rng)).collect())
}

/// Equal-width histogram over `[min(x), max(x)]`; returns bin centers and
/// counts. A constant input gets a unit-wide range centred on its value.
pub fn hist(x: &[f64], nbins: usize) -> Result<(Vec<f64>, Vec<f64>), CommError> {
    if nbins < 1 {
        return Err(precondition("number of bins must be at least 1"));
    }
    if x.is_empty() {
        return Err(precondition("cannot build a histogram of no data"));
    }
    let (mut lo, mut hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / nbins as f64;
    let mut counts = vec![0.0; nbins];
    for &v in x {
        let k = (((v - lo) / width).floor() as usize).min(nbins - 1);
        counts[k] += 1.0;
    }
    let centers = (0..nbins).map(|k| lo + (k as f64 + 0.5) * width).collect();
    Ok((centers, counts))
}

/// Non-overlapping windows of `2*spb` samples, each plotted against
/// `1..2*spb`. Trailing samples that do not fill a window are dropped.
pub fn eye_diagram(w: &[f64], spb: usize) -> Result<Vec<Curve>, CommError> {
    if spb < 1 {
        return Err(precondition("SPB must be at least 1"));
    }
    let span = 2 * spb;
    if w.len() < span {
        return Err(precondition(format!(
            "waveform of length {} is shorter than one eye window (2*SPB = {span})",
            w.len()
        )));
    }
    let x: Vec<f64> = (1..=span).map(|k| k as f64).collect();
    Ok(w.chunks_exact(span)
        .map(|seg| Curve::new(x.clone(), seg.to_vec(), None).expect("equal lengths"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn channel_parameters_are_validated() {
        assert!(ChannelModel::new(1.0, 0, 0.0).is_err());
        assert!(ChannelModel::new(-0.1, 0, 0.0).is_err());
        assert!(ChannelModel::new(0.5, 2, -1.0).is_err());
        assert!(ChannelModel::new(0.0, 0, 0.0).is_ok());
    }

    #[test]
    fn noisy_channel_is_seed_deterministic() {
        let ch = ChannelModel::default();
        let w = vec![1.0; 50];
        let a = channel_transmit(&w, &ch, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        let b = channel_transmit(&w, &ch, &mut rand_chacha::ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
    }

    #[test]
    fn constant_histogram() {
        let (c, n) = hist(&[2.0, 2.0], 3).unwrap();
        assert_eq!(n.iter().sum::<f64>(), 2.0);
        assert_eq!(c.len(), 3);
    }
}
