//! Mel-frequency cepstral coefficients.
//!
//! Pipeline: pre-emphasis, Hann window, power spectrum, triangular mel
//! filterbank, natural log of (energy + floor), orthonormal DCT-II.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::spectrum::dft;
use crate::audio_io::{Frame, Window};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MfccConfig {
    pub n_filters: usize,
    pub n_coeffs: usize,
    pub pre_emphasis: f64,
    pub fmin: f64,
    /// Upper filterbank edge in Hz; `None` means Nyquist.
    pub fmax: Option<f64>,
    pub log_floor: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self { n_filters: 26, n_coeffs: 13, pre_emphasis: 0.97, fmin: 0.0, fmax: None, log_floor: 1e-10 }
    }
}

impl MfccConfig {
    pub fn validate(&self, sample_rate: u32) -> Result<f64> {
        let nyquist = sample_rate as f64 / 2.0;
        let fmax = self.fmax.unwrap_or(nyquist);
        if self.n_coeffs == 0 || self.n_coeffs > self.n_filters {
            return Err(Error::InvalidConfig(format!("need 0 < n_coeffs ({}) <= n_filters ({})", self.n_coeffs, self.n_filters)));
        }
        if !(self.fmin >= 0.0 && self.fmin < fmax && fmax <= nyquist) {
            return Err(Error::InvalidConfig(format!("need 0 <= fmin < fmax <= {nyquist} Hz")));
        }
        if !(self.log_floor > 0.0) {
            return Err(Error::InvalidConfig("log floor must be positive".into()));
        }
        Ok(fmax)
    }
}

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Filter edge frequencies: `n_filters + 2` points equally spaced on the mel scale.
fn mel_edges(n_filters: usize, fmin: f64, fmax: f64) -> Vec<f64> {
    let (lo, hi) = (hz_to_mel(fmin), hz_to_mel(fmax));
    let step = (hi - lo) / (n_filters + 1) as f64;
    (0..n_filters + 2).map(|i| mel_to_hz(lo + step * i as f64)).collect()
}

fn triangle(f: f64, left: f64, center: f64, right: f64) -> f64 {
    if f <= left || f >= right {
        0.0
    } else if f <= center {
        (f - left) / (center - left)
    } else {
        (right - f) / (right - center)
    }
}

/// Log mel filterbank energies of one frame.
pub fn log_mel_energies(frame: &Frame, config: &MfccConfig) -> Result<Vec<f64>> {
    let n = frame.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("frame of {n} samples")));
    }
    let fmax = config.validate(frame.sample_rate)?;

    let window = Window::Hann.coefficients(n);
    let mut prev = 0.0;
    let emphasized: Vec<f64> = frame
        .samples
        .iter()
        .zip(&window)
        .enumerate()
        .map(|(i, (&x, &w))| {
            let y = if i == 0 { x } else { x - config.pre_emphasis * prev };
            prev = x;
            y * w
        })
        .collect();

    let spectrum = dft(&emphasized);
    let bin_hz = frame.sample_rate as f64 / n as f64;
    let power: Vec<f64> = spectrum[..=n / 2].iter().map(|c| c.norm_sqr()).collect();

    let edges = mel_edges(config.n_filters, config.fmin, fmax);
    let energies = edges
        .windows(3)
        .map(|e| {
            let first = (e[0] / bin_hz).floor() as usize;
            let last = ((e[2] / bin_hz).ceil() as usize).min(power.len() - 1);
            let energy: f64 = (first..=last).map(|k| triangle(k as f64 * bin_hz, e[0], e[1], e[2]) * power[k]).sum();
            (energy + config.log_floor).ln()
        })
        .collect();
    Ok(energies)
}

/// Orthonormal DCT-II, keeping the first `keep` coefficients.
pub fn dct2(input: &[f64], keep: usize) -> Vec<f64> {
    let m = input.len() as f64;
    (0..keep)
        .map(|k| {
            let scale = if k == 0 { (1.0 / m).sqrt() } else { (2.0 / m).sqrt() };
            scale * input.iter().enumerate().map(|(i, &x)| x * (PI * k as f64 * (i as f64 + 0.5) / m).cos()).sum::<f64>()
        })
        .collect()
}

pub fn mfcc(frame: &Frame, config: &MfccConfig) -> Result<Vec<f64>> {
    let logs = log_mel_energies(frame, config)?;
    Ok(dct2(&logs, config.n_coeffs))
}
