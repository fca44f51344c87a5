//! Pass-by decision logic: Doppler arithmetic, per-frame tracking of the
//! dominant frequency and energy, climax (closest-approach) detection,
//! direction inference, and the eight-frame vote.
//!
//! The climax is the frame of peak RMS energy, accepted when the dominant
//! frequency falls across it (mean of the three frames after below the mean
//! of the three before). A peak without that descent is replaced by the
//! steepest three-frame frequency drop. On a flat frequency track (total
//! variation under two bins) the energy peak stands alone.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio_io::Frame;
use crate::class::{break_ties, SoundClass};
use crate::error::{Error, Result};
use crate::features::Spectrum;

pub const SPEED_OF_SOUND: f64 = 343.0;
pub const VOTE_FRAMES: usize = 8;
/// Mean log RMS ratio needed to call a direction.
pub const DIRECTION_MARGIN: f64 = 0.1;
pub const SLOPE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerParams {
    /// Source frequency, Hz.
    pub f0: f64,
    /// Source speed, m/s.
    pub v: f64,
    /// Speed of sound, m/s.
    pub c: f64,
}

impl DopplerParams {
    pub fn new(f0: f64, v: f64) -> Self {
        Self { f0, v, c: SPEED_OF_SOUND }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Approaching,
    Receding,
}

/// Received frequency of a source moving straight toward or away from the listener.
pub fn doppler_observed(params: &DopplerParams, phase: Phase) -> Result<f64> {
    let DopplerParams { f0, v, c } = *params;
    if !(f0 > 0.0 && v >= 0.0 && v < c) {
        return Err(Error::InvalidConfig(format!("need f0 > 0 and 0 <= v < c (f0={f0}, v={v}, c={c})")));
    }
    Ok(match phase {
        Phase::Approaching => f0 * c / (c - v),
        Phase::Receding => f0 * c / (c + v),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Band {
    pub low: f64,
    pub high: f64,
}

impl Default for Band {
    fn default() -> Self {
        Self { low: 50.0, high: 2000.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameTrack {
    pub dominant_freq: Vec<f64>,
    pub rms_energy: Vec<f64>,
    pub labels: Vec<SoundClass>,
    pub bin_hz: f64,
}

impl FrameTrack {
    pub fn len(&self) -> usize {
        self.rms_energy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rms_energy.is_empty()
    }
}

/// Sub-bin peak location by fitting a parabola through the peak bin and its neighbors.
pub fn parabolic_peak(magnitudes: &[f64], bin: usize) -> f64 {
    if bin == 0 || bin + 1 >= magnitudes.len() {
        return bin as f64;
    }
    let (a, b, c) = (magnitudes[bin - 1], magnitudes[bin], magnitudes[bin + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return bin as f64;
    }
    bin as f64 + (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
}

/// Interpolated frequency (Hz) of the strongest spectral peak inside `band`.
///
/// Only local maxima whose interpolated frequency falls inside the band
/// count, so a peak just outside the band does not register at its edge.
/// Falls back to the plain in-band argmax when there is no such peak.
pub fn dominant_frequency(spectrum: &Spectrum, band: Band) -> f64 {
    let m = &spectrum.magnitudes;
    let first = ((band.low / spectrum.bin_hz).ceil() as usize).min(m.len().saturating_sub(1));
    let last = ((band.high / spectrum.bin_hz).floor() as usize).min(m.len().saturating_sub(1)).max(first);
    let is_peak = |k: usize| (k == 0 || m[k] >= m[k - 1]) && (k + 1 >= m.len() || m[k] >= m[k + 1]);
    let mut best: Option<(usize, f64)> = None;
    let mut fallback = first;
    for k in first..=last {
        if m[k] > m[fallback] {
            fallback = k;
        }
    }
    for k in first.saturating_sub(1)..=(last + 1).min(m.len() - 1) {
        if !is_peak(k) {
            continue;
        }
        let f = parabolic_peak(m, k) * spectrum.bin_hz;
        if (band.low..=band.high).contains(&f) && best.is_none_or(|(b, _)| m[k] > m[b]) {
            best = Some((k, f));
        }
    }
    match best {
        Some((_, f)) => f,
        None => (parabolic_peak(m, fallback) * spectrum.bin_hz).clamp(band.low, band.high),
    }
}

/// Three-point median; the first and last values are kept as they are.
pub fn median3(xs: &[f64]) -> Vec<f64> {
    let mut out = xs.to_vec();
    for i in 1..xs.len().saturating_sub(1) {
        let mut w = [xs[i - 1], xs[i], xs[i + 1]];
        w.sort_by(f64::total_cmp);
        out[i] = w[1];
    }
    out
}

pub fn track_frames(frames: &[Frame], spectra: &[Spectrum], labels: &[SoundClass], band: Band) -> Result<FrameTrack> {
    if frames.is_empty() {
        return Err(Error::InsufficientData("no frames to track".into()));
    }
    if spectra.len() != frames.len() || labels.len() != frames.len() {
        return Err(Error::DimensionMismatch { expected: frames.len(), got: spectra.len().min(labels.len()) });
    }
    let raw: Vec<f64> = spectra.iter().map(|s| dominant_frequency(s, band)).collect();
    Ok(FrameTrack {
        dominant_freq: median3(&raw),
        rms_energy: frames.iter().map(Frame::rms).collect(),
        labels: labels.to_vec(),
        bin_hz: spectra[0].bin_hz,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn first_argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

pub fn detect_climax(track: &FrameTrack) -> Result<usize> {
    let n = track.len();
    if n < VOTE_FRAMES {
        return Err(Error::InsufficientData(format!("climax detection needs {VOTE_FRAMES} frames, got {n}")));
    }
    let f = &track.dominant_freq;
    let peak = first_argmax(&track.rms_energy);

    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if hi - lo < 2.0 * track.bin_hz {
        return Ok(peak);
    }

    let before = &f[peak.saturating_sub(3)..peak];
    let after = &f[(peak + 1).min(n)..(peak + 4).min(n)];
    if before.is_empty() || after.is_empty() || mean(after) < mean(before) {
        return Ok(peak);
    }

    let drops: Vec<f64> = (3..n - 3).map(|i| mean(&f[i - 3..i]) - mean(&f[i + 1..i + 4])).collect();
    Ok(3 + first_argmax(&drops))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Approaching,
    Receding,
    Unknown,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Approaching => "approaching",
            Direction::Receding => "receding",
            Direction::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "approaching" => Ok(Direction::Approaching),
            "receding" => Ok(Direction::Receding),
            "unknown" => Ok(Direction::Unknown),
            other => Err(Error::Parse(format!("unknown direction {other:?}"))),
        }
    }
}

/// Least-squares slope of `ys` against their index.
pub fn ls_slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    if ys.len() < 2 {
        return 0.0;
    }
    let mx = (n - 1.0) / 2.0;
    let my = mean(ys);
    let (num, den) = ys.iter().enumerate().fold((0.0, 0.0), |(num, den), (i, &y)| {
        let dx = i as f64 - mx;
        (num + dx * (y - my), den + dx * dx)
    });
    num / den
}

/// Direction from the cardioid's front/back asymmetry around the climax.
///
/// Compares frames mirrored about the climax, `c - k` against `c + k` for
/// `k` in 4..=8, by mean log RMS ratio: a louder lead-in means the source
/// came through the front lobe (approaching), a louder tail means it came
/// through the back (receding), and a ratio inside the margin is unknown.
/// Near the edges the mirrored pairs shrink to 1..=3. With no frame after
/// the climax, the least-squares trend of the eight frames before decides:
/// rising is approaching.
pub fn infer_direction(track: &FrameTrack, climax: usize) -> Direction {
    let e = &track.rms_energy;
    if climax >= e.len() {
        return Direction::Unknown;
    }
    let mirrored = |ks: std::ops::RangeInclusive<usize>| -> Option<f64> {
        let logs: Vec<f64> = ks
            .filter(|&k| k <= climax && climax + k < e.len() && e[climax - k] > 0.0 && e[climax + k] > 0.0)
            .map(|k| (e[climax - k] / e[climax + k]).ln())
            .collect();
        (!logs.is_empty()).then(|| mean(&logs))
    };
    let (score, margin) = match mirrored(4..=VOTE_FRAMES).or_else(|| mirrored(1..=3)) {
        Some(s) => (s, DIRECTION_MARGIN),
        None => (ls_slope(&e[climax.saturating_sub(VOTE_FRAMES)..=climax]), SLOPE_THRESHOLD),
    };
    if score > margin {
        Direction::Approaching
    } else if score < -margin {
        Direction::Receding
    } else {
        Direction::Unknown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub climax_index: usize,
    pub sound_type: SoundClass,
    pub direction: Direction,
}

/// `DET <climax_index> <class> <direction>`.
impl fmt::Display for DetectionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DET {} {} {}", self.climax_index, self.sound_type, self.direction)
    }
}

impl FromStr for DetectionResult {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim_end_matches(['\r', '\n']).split(' ').collect();
        match parts.as_slice() {
            ["DET", idx, class, dir] => Ok(DetectionResult {
                climax_index: idx.parse().map_err(|_| Error::Parse(format!("bad climax index {idx:?}")))?,
                sound_type: class.parse()?,
                direction: dir.parse()?,
            }),
            _ => Err(Error::Parse(format!("malformed detection line {s:?}"))),
        }
    }
}

/// Majority label over `labels`; ties go to the more dangerous class.
pub fn vote(labels: &[SoundClass]) -> Option<SoundClass> {
    let mut counts = [0usize; 4];
    for l in labels {
        counts[l.index()] += 1;
    }
    break_ties(SoundClass::ALL.into_iter().map(|c| (c, counts[c.index()], 0.0)))
}

/// NV at the climax short-circuits to NV; otherwise the eight frames ending
/// at the climax vote.
pub fn finalize_detection(track: &FrameTrack, climax: usize) -> Result<DetectionResult> {
    if climax >= track.len() {
        return Err(Error::InsufficientData(format!("climax {climax} outside track of {}", track.len())));
    }
    let direction = infer_direction(track, climax);
    if track.labels[climax] == SoundClass::NV {
        return Ok(DetectionResult { climax_index: climax, sound_type: SoundClass::NV, direction });
    }
    if climax + 1 < VOTE_FRAMES {
        return Err(Error::InsufficientData(format!("vote needs {VOTE_FRAMES} frames up to the climax, climax is frame {climax}")));
    }
    let window = &track.labels[climax + 1 - VOTE_FRAMES..=climax];
    let sound_type = vote(window).expect("non-empty window");
    Ok(DetectionResult { climax_index: climax, sound_type, direction })
}
