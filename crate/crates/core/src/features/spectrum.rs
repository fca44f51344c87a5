//! One-sided magnitude spectra and the five FFT-derived scalar features.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio_io::Frame;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Full complex DFT `X_k = sum_n x_n exp(-i 2 pi k n / N)` of a real sequence.
pub fn dft(samples: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    if buf.is_empty() {
        return buf;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    fft.process(&mut buf);
    buf
}

/// `|X_k|` for `k = 0..=N/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub magnitudes: Vec<f64>,
    /// Frequency resolution, `sample_rate / N`.
    pub bin_hz: f64,
}

impl Spectrum {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }
}

pub fn fft_magnitude(frame: &Frame) -> Result<Spectrum> {
    let n = frame.len();
    if n < 2 {
        return Err(Error::Degenerate(format!("frame of {n} samples has no spectrum")));
    }
    let full = dft(&frame.samples);
    let magnitudes = full[..=n / 2].iter().map(|c| c.norm()).collect();
    Ok(Spectrum { magnitudes, bin_hz: frame.sample_rate as f64 / n as f64 })
}

/// Power and peak summary of the lower and upper halves of a one-sided spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFeatures {
    pub p1: f64,
    pub p2: f64,
    /// Hz of the strongest bin in the lower half.
    pub f1: f64,
    /// Hz of the strongest bin in the upper half.
    pub f2: f64,
    /// Largest magnitude anywhere in the one-sided spectrum.
    pub peak_value: f64,
}

impl SpectralFeatures {
    pub fn to_array(self) -> [f64; 5] {
        [self.p1, self.p2, self.f1, self.f2, self.peak_value]
    }
}

/// Splits the one-sided spectrum at its midpoint bin (half of Nyquist).
/// Bins `[0, mid)` form the first half and `[mid, len)` the second.
pub fn spectral_features(spectrum: &Spectrum) -> Result<SpectralFeatures> {
    let m = spectrum.len();
    if m < 4 {
        return Err(Error::Degenerate(format!("spectrum of {m} bins")));
    }
    let mid = m / 2;
    let (lo, hi) = spectrum.magnitudes.split_at(mid);
    let power = |xs: &[f64]| xs.iter().map(|x| x * x).sum::<f64>();
    let f1 = spectrum.frequency(argmax(lo));
    let f2 = spectrum.frequency(mid + argmax(hi));
    let peak_value = spectrum.magnitudes.iter().copied().fold(0.0, f64::max);
    Ok(SpectralFeatures { p1: power(lo), p2: power(hi), f1, f2, peak_value })
}

/// Index of the first maximum.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}
