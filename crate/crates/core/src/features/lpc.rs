//! Linear prediction by the autocorrelation method (Levinson–Durbin).
//!
//! Sign convention: the predictor is `x̂[n] = Σ a_i · x[n − i]`, so the
//! returned coefficients are the ones added, not subtracted.

use serde::{Deserialize, Serialize};

use crate::audio_io::Frame;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LpcConfig {
    pub order: usize,
}

impl Default for LpcConfig {
    fn default() -> Self {
        Self { order: 12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpcResult {
    /// `a_1 ..= a_p`.
    pub coefficients: Vec<f64>,
    /// Final prediction-error power.
    pub gain: f64,
}

/// Biased autocorrelation `r[k] = (1/N) Σ x[n] x[n+k]` for `k = 0..=max_lag`.
pub fn autocorrelation(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    (0..=max_lag).map(|k| if k >= n { 0.0 } else { x[..n - k].iter().zip(&x[k..]).map(|(a, b)| a * b).sum::<f64>() / n as f64 }).collect()
}

/// Solves the Toeplitz normal equations for `r[0..=p]`.
pub fn levinson_durbin(r: &[f64]) -> Result<LpcResult> {
    let order = r.len().saturating_sub(1);
    if r.is_empty() {
        return Err(Error::Degenerate("empty autocorrelation".into()));
    }
    if order == 0 {
        return Ok(LpcResult { coefficients: Vec::new(), gain: r[0] });
    }
    if !(r[0] > 0.0) {
        return Err(Error::Degenerate("silent frame has no linear predictor".into()));
    }

    let mut a = vec![0.0; order];
    let mut err = r[0];
    for i in 0..order {
        let acc = r[i + 1] - (0..i).map(|j| a[j] * r[i - j]).sum::<f64>();
        let k = acc / err;
        let prev = a.clone();
        a[i] = k;
        for j in 0..i {
            a[j] = prev[j] - k * prev[i - 1 - j];
        }
        err *= 1.0 - k * k;
        // Perfectly predictable input: higher orders add nothing.
        if err <= r[0] * f64::EPSILON {
            err = err.max(0.0);
            break;
        }
    }
    Ok(LpcResult { coefficients: a, gain: err })
}

pub fn lpc(frame: &Frame, config: &LpcConfig) -> Result<LpcResult> {
    if config.order >= frame.len().max(1) {
        return Err(Error::InvalidConfig(format!("LPC order {} must be below frame length {}", config.order, frame.len())));
    }
    let r = autocorrelation(&frame.samples, config.order);
    levinson_durbin(&r)
}
