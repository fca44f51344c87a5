//! Synthetic labeled audio: vehicle pass-bys rendered through a moving-source
//! propagation model and a cardioid microphone, plus three kinds of
//! no-vehicle background (birds, airplane, crowd).
//!
//! Geometry: the microphone sits at the origin, `mic_height` above the road
//! plane. The vehicle travels along `x` at lateral offset `closest_distance`.
//! The cardioid axis points at the lane, tilted down onto it and yawed 30°
//! toward oncoming traffic, so an approaching vehicle arrives through the
//! front lobe and leaves through the side.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audio_io::{write_wav, SampleBuffer};
use crate::class::SoundClass;
use crate::classifiers::cv::derive_seed;
use crate::decision::SPEED_OF_SOUND;
use crate::error::{Error, Result};

pub const SAMPLE_RATE: u32 = 16_000;
pub const LL_LH_BOUNDARY_KMH: f64 = 50.0;
pub const MIN_SPEED_KMH: f64 = 20.0;
pub const MAX_SPEED_KMH: f64 = 75.0;
pub const MIC_YAW_DEG: f64 = 30.0;
pub const MANIFEST_FILE: &str = "manifest.csv";
pub const CORPUS_COUNTS: [(SoundClass, usize); 4] = [(SoundClass::LH, 70), (SoundClass::LL, 50), (SoundClass::H, 44), (SoundClass::NV, 46)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleProfile {
    pub class: SoundClass,
    /// Hz
    pub fundamental: f64,
    pub n_harmonics: usize,
    /// Amplitude ratio between successive harmonics.
    pub harmonic_rolloff: f64,
    /// Share of broadband noise in the mix, 0..1.
    pub broadband_level: f64,
    /// Low-pass corner of the broadband component, Hz.
    pub broadband_cutoff: f64,
}

/// Light-vehicle fundamental as a function of speed (engine revs rise with speed).
pub fn light_fundamental(speed_kmh: f64) -> f64 {
    (90.0 + 90.0 * (speed_kmh - MIN_SPEED_KMH) / (MAX_SPEED_KMH - MIN_SPEED_KMH)).clamp(90.0, 180.0)
}

/// Speed range `[lo, hi]` a vehicle class is drawn from; `None` for NV.
pub fn speed_range(class: SoundClass) -> Option<(f64, f64)> {
    match class {
        SoundClass::H => Some((MIN_SPEED_KMH, MAX_SPEED_KMH)),
        SoundClass::LL => Some((MIN_SPEED_KMH, LL_LH_BOUNDARY_KMH)),
        SoundClass::LH => Some((LL_LH_BOUNDARY_KMH, MAX_SPEED_KMH)),
        SoundClass::NV => None,
    }
}

fn speed_matches(class: SoundClass, speed: f64) -> bool {
    match class {
        SoundClass::H => (MIN_SPEED_KMH..=MAX_SPEED_KMH).contains(&speed),
        SoundClass::LL => (MIN_SPEED_KMH..=LL_LH_BOUNDARY_KMH).contains(&speed),
        SoundClass::LH => speed > LL_LH_BOUNDARY_KMH && speed <= MAX_SPEED_KMH,
        SoundClass::NV => false,
    }
}

impl VehicleProfile {
    /// A single sinusoid with no noise.
    pub fn pure_tone(class: SoundClass, fundamental: f64) -> Self {
        Self { class, fundamental, n_harmonics: 1, harmonic_rolloff: 1.0, broadband_level: 0.0, broadband_cutoff: 1000.0 }
    }

    /// Draws a class-typical profile for a vehicle moving at `speed_kmh`.
    pub fn sample<R: Rng>(class: SoundClass, speed_kmh: f64, rng: &mut R) -> Result<Self> {
        if !speed_matches(class, speed_kmh) {
            return Err(Error::InvalidConfig(format!("speed {speed_kmh} km/h outside the {class} range")));
        }
        Ok(match class {
            SoundClass::H => Self {
                class,
                fundamental: rng.random_range(40.0..80.0),
                n_harmonics: 12,
                harmonic_rolloff: rng.random_range(0.55..0.7),
                broadband_level: rng.random_range(0.3..0.5),
                broadband_cutoff: 800.0,
            },
            _ => Self {
                class,
                fundamental: (light_fundamental(speed_kmh) + rng.random_range(-2.0..2.0)).clamp(90.0, 180.0),
                n_harmonics: 8,
                harmonic_rolloff: rng.random_range(0.55..0.7),
                broadband_level: 0.05 + 0.25 * speed_kmh / MAX_SPEED_KMH,
                broadband_cutoff: 2000.0,
            },
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.fundamental > 0.0 && self.n_harmonics >= 1 && (0.0..=1.0).contains(&self.broadband_level)) {
            return Err(Error::InvalidConfig(format!("invalid vehicle profile {self:?}")));
        }
        if self.broadband_level > 0.0 && !(self.broadband_cutoff > 0.0) {
            return Err(Error::InvalidConfig("broadband cutoff must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproachFrom {
    /// Arrives through the cardioid front lobe.
    Front,
    /// Travels the other way and arrives from behind the microphone.
    Back,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassbyScenario {
    /// km/h; zero renders a parked source.
    pub speed_kmh: f64,
    /// Lateral offset of the lane from the microphone, m.
    pub closest_distance: f64,
    pub mic_height: f64,
    pub approach_from: ApproachFrom,
    /// Clip length, s.
    pub duration: f64,
    /// Emission time of the closest point, s.
    pub closest_time: f64,
    /// Standard deviation of additive sensor noise after level scaling.
    pub noise_floor: f64,
    /// Scale the clip so its largest sample has this magnitude; `None` keeps 1/r units.
    pub peak_level: Option<f64>,
    pub seed: u64,
}

impl Default for PassbyScenario {
    fn default() -> Self {
        Self {
            speed_kmh: 50.0,
            closest_distance: 4.0,
            mic_height: 3.0,
            approach_from: ApproachFrom::Front,
            duration: 3.0,
            closest_time: 1.5,
            noise_floor: 1e-3,
            peak_level: Some(0.5),
            seed: 0,
        }
    }
}

impl PassbyScenario {
    fn validate(&self) -> Result<()> {
        let ok = (0.0..=120.0).contains(&self.speed_kmh)
            && self.closest_distance > 0.0
            && self.mic_height >= 0.0
            && self.duration > 0.0
            && self.closest_time.is_finite()
            && self.noise_floor >= 0.0
            && self.peak_level.is_none_or(|p| p > 0.0 && p <= 1.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid pass-by scenario {self:?}")))
        }
    }

    /// Unit vector of the cardioid front axis.
    pub fn mic_axis(&self) -> [f64; 3] {
        let yaw = MIC_YAW_DEG.to_radians();
        let tilt = self.mic_height.atan2(self.closest_distance);
        [-yaw.sin() * tilt.cos(), yaw.cos() * tilt.cos(), -tilt.sin()]
    }
}

/// Moving-source kinematics: emission time and source position for each receive time.
#[derive(Debug, Clone, Copy)]
pub struct Kinematics {
    v: f64,
    c: f64,
    sign: f64,
    d0: f64,
    h: f64,
    t_c: f64,
}

impl Kinematics {
    pub fn new(scenario: &PassbyScenario) -> Self {
        Self {
            v: scenario.speed_kmh / 3.6,
            c: SPEED_OF_SOUND,
            sign: match scenario.approach_from {
                ApproachFrom::Front => 1.0,
                ApproachFrom::Back => -1.0,
            },
            d0: scenario.closest_distance,
            h: scenario.mic_height,
            t_c: scenario.closest_time,
        }
    }

    fn closest_range_sq(&self) -> f64 {
        self.d0 * self.d0 + self.h * self.h
    }

    /// Emission time relative to the closest point, for a receive time `t`.
    pub fn emission_offset(&self, t: f64) -> f64 {
        let big_t = t - self.t_c;
        let (v, c) = (self.v, self.c);
        let d2 = self.closest_range_sq();
        if v == 0.0 {
            return big_t - d2.sqrt() / c;
        }
        let disc = v * v * c * c * big_t * big_t + (c * c - v * v) * d2;
        (c * c * big_t - disc.sqrt()) / (c * c - v * v)
    }

    /// Source position at emission offset `u`.
    pub fn position(&self, u: f64) -> [f64; 3] {
        [self.sign * self.v * u, self.d0, -self.h]
    }

    /// Instantaneous ratio of received to emitted frequency at emission offset `u`.
    pub fn doppler_ratio(&self, u: f64) -> f64 {
        let r = norm(self.position(u));
        1.0 / (1.0 + self.v * self.v * u / (r * self.c))
    }

    /// Receive time of the closest-point emission.
    pub fn t_closest(&self) -> f64 {
        self.t_c + self.closest_range_sq().sqrt() / self.c
    }
}

fn norm(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

/// Ground truth for one rendered pass-by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassbyTruth {
    /// Receive time of the distance minimum, s.
    pub t_closest: f64,
    /// Frame holding `t_closest` for the given frame length.
    pub frame_length: f64,
    /// True received fundamental at each frame center, Hz.
    pub frame_freq: Vec<f64>,
}

impl PassbyTruth {
    pub fn closest_frame(&self) -> usize {
        (self.t_closest / self.frame_length).floor() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Passby {
    pub buffer: SampleBuffer,
    pub truth: PassbyTruth,
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Two cascaded one-pole low-pass sections.
fn lowpass(x: &mut [f64], cutoff: f64, rate: f64) {
    let a = 1.0 - (-2.0 * PI * cutoff / rate).exp();
    for _ in 0..2 {
        let mut y = 0.0;
        for s in x.iter_mut() {
            y += a * (*s - y);
            *s = y;
        }
    }
}

fn highpass(x: &mut [f64], cutoff: f64, rate: f64) {
    let mut low = x.to_vec();
    lowpass(&mut low, cutoff, rate);
    for (s, l) in x.iter_mut().zip(low) {
        *s -= l;
    }
}

fn normalize_rms(x: &mut [f64]) {
    let rms = (x.iter().map(|s| s * s).sum::<f64>() / x.len().max(1) as f64).sqrt();
    if rms > 0.0 {
        x.iter_mut().for_each(|s| *s /= rms);
    }
}

fn white(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Scales to `peak` and adds sensor noise.
fn finish(mut x: Vec<f64>, peak: Option<f64>, noise_floor: f64, rng: &mut ChaCha8Rng, rate: u32) -> Result<SampleBuffer> {
    if let Some(p) = peak {
        let m = x.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if m > 0.0 {
            x.iter_mut().for_each(|s| *s *= p / m);
        }
    }
    if noise_floor > 0.0 {
        x.iter_mut().for_each(|s| *s += noise_floor * gaussian(rng));
    }
    SampleBuffer::new(x, rate)
}

pub fn synth_passby(profile: &VehicleProfile, scenario: &PassbyScenario, sample_rate: u32) -> Result<Passby> {
    profile.validate()?;
    scenario.validate()?;
    if sample_rate == 0 {
        return Err(Error::InvalidConfig("sample rate must be positive".into()));
    }
    let fs = sample_rate as f64;
    let n = (scenario.duration * fs).round() as usize;
    let kin = Kinematics::new(scenario);
    let axis = scenario.mic_axis();
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let amps: Vec<f64> = (0..profile.n_harmonics).map(|k| profile.harmonic_rolloff.powi(k as i32)).collect();
    let harmonic_rms = (amps.iter().map(|a| a * a).sum::<f64>() / 2.0).sqrt();
    let phases: Vec<f64> = amps.iter().map(|_| rng.random_range(0.0..2.0 * PI)).collect();

    // Source-time noise, read back at each emission time.
    let u_first = kin.emission_offset(0.0);
    let u_last = kin.emission_offset((n.max(1) - 1) as f64 / fs);
    let warmup = 512;
    let noise_len = ((u_last - u_first) * fs).ceil() as usize + 2;
    let mut noise = white(&mut rng, noise_len + warmup);
    lowpass(&mut noise, profile.broadband_cutoff, fs);
    let mut noise = noise.split_off(warmup);
    normalize_rms(&mut noise);

    let b = profile.broadband_level;
    let mut x = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 / fs;
        let u = kin.emission_offset(t);
        let tau = scenario.closest_time + u;
        let p = kin.position(u);
        let r = norm(p);
        let cos = (p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2]) / r;
        let gain = (1.0 + cos) / 2.0;
        let harm: f64 = amps
            .iter()
            .zip(&phases)
            .enumerate()
            .map(|(k, (a, ph))| a * (2.0 * PI * (k + 1) as f64 * profile.fundamental * tau + ph).sin())
            .sum::<f64>()
            / harmonic_rms;
        let pos = (u - u_first) * fs;
        let j = (pos.floor() as usize).min(noise.len() - 2);
        let frac = pos - j as f64;
        let nz = noise[j] * (1.0 - frac) + noise[j + 1] * frac;
        x.push(gain / r * ((1.0 - b) * harm + b * nz));
    }

    let frame_length = 0.1;
    let frames = (scenario.duration / frame_length).floor() as usize;
    let frame_freq =
        (0..frames).map(|k| profile.fundamental * kin.doppler_ratio(kin.emission_offset((k as f64 + 0.5) * frame_length))).collect();
    let truth = PassbyTruth { t_closest: kin.t_closest(), frame_length, frame_freq };
    let buffer = finish(x, scenario.peak_level, scenario.noise_floor, &mut rng, sample_rate)?;
    Ok(Passby { buffer, truth })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NvKind {
    Birds,
    Airplane,
    Crowd,
}

impl NvKind {
    pub const ALL: [NvKind; 3] = [NvKind::Birds, NvKind::Airplane, NvKind::Crowd];

    pub fn as_str(self) -> &'static str {
        match self {
            NvKind::Birds => "birds",
            NvKind::Airplane => "airplane",
            NvKind::Crowd => "crowd",
        }
    }
}

impl FromStr for NvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "birds" => Ok(NvKind::Birds),
            "airplane" => Ok(NvKind::Airplane),
            "crowd" => Ok(NvKind::Crowd),
            other => Err(Error::Parse(format!("unknown background kind {other:?}"))),
        }
    }
}

fn birds(rng: &mut ChaCha8Rng, n: usize, fs: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let n_birds = rng.random_range(1..=3);
    for _ in 0..n_birds {
        let mut t = rng.random_range(0.0..0.3);
        let duration = n as f64 / fs;
        while t < duration {
            let len = rng.random_range(0.05..0.25);
            let f_start: f64 = rng.random_range(2000.0..6000.0);
            let f_end = (f_start + rng.random_range(-1500.0..1500.0)).clamp(1800.0, 7000.0);
            let amp = rng.random_range(0.3..1.0);
            let start = (t * fs) as usize;
            let m = ((len * fs) as usize).min(n.saturating_sub(start));
            let mut phase: f64 = rng.random_range(0.0..2.0 * PI);
            for k in 0..m {
                let frac = k as f64 / (len * fs);
                let env = (PI * frac).sin().powi(2);
                phase += 2.0 * PI * (f_start + (f_end - f_start) * frac) / fs;
                x[start + k] += amp * env * phase.sin();
            }
            t += len + rng.random_range(0.05..0.4);
        }
    }
    x
}

fn airplane(rng: &mut ChaCha8Rng, n: usize, fs: f64) -> Vec<f64> {
    let mut rumble = white(rng, n + 2048);
    lowpass(&mut rumble, rng.random_range(150.0..400.0), fs);
    let mut rumble = rumble.split_off(2048);
    normalize_rms(&mut rumble);
    let mut hiss = white(rng, n + 512);
    lowpass(&mut hiss, 2000.0, fs);
    let mut hiss = hiss.split_off(512);
    normalize_rms(&mut hiss);
    let fm = rng.random_range(0.1..0.3);
    let depth = rng.random_range(0.1..0.3);
    let ph: f64 = rng.random_range(0.0..2.0 * PI);
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            (1.0 + depth * (2.0 * PI * fm * t + ph).sin()) * (rumble[i] + 0.15 * hiss[i])
        })
        .collect()
}

fn crowd(rng: &mut ChaCha8Rng, n: usize, fs: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    for _ in 0..12 {
        let mut v = white(rng, n + 512);
        lowpass(&mut v, rng.random_range(1000.0..3000.0), fs);
        highpass(&mut v, rng.random_range(200.0..500.0), fs);
        let v = &v[512..];
        let rate = rng.random_range(2.0..5.0);
        let ph: f64 = rng.random_range(0.0..PI);
        let level = rng.random_range(0.5..1.0);
        for (i, s) in x.iter_mut().enumerate() {
            let env = 0.3 + 0.7 * (PI * rate * i as f64 / fs + ph).sin().abs();
            *s += level * env * v[i];
        }
    }
    x
}

/// Background sound without a vehicle, scaled to a 0.5 peak.
pub fn synth_nv(kind: NvKind, duration: f64, seed: u64, sample_rate: u32) -> Result<SampleBuffer> {
    if !(duration > 0.0) || sample_rate == 0 {
        return Err(Error::InvalidConfig(format!("invalid background duration {duration} s at {sample_rate} Hz")));
    }
    let fs = sample_rate as f64;
    let n = (duration * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = match kind {
        NvKind::Birds => birds(&mut rng, n, fs),
        NvKind::Airplane => airplane(&mut rng, n, fs),
        NvKind::Crowd => crowd(&mut rng, n, fs),
    };
    finish(x, Some(0.5), 5e-4, &mut rng, sample_rate)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ClipSource {
    Passby { profile: VehicleProfile, scenario: PassbyScenario },
    Background { kind: NvKind, level: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipSpec {
    pub file: String,
    pub class: SoundClass,
    pub seed: u64,
    pub source: ClipSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub sample_rate: u32,
    pub duration: f64,
    pub counts: Vec<(SoundClass, usize)>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { sample_rate: SAMPLE_RATE, duration: 3.0, counts: CORPUS_COUNTS.to_vec() }
    }
}

/// One manifest row. Background clips have no speed or closest-approach time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub file: String,
    pub class: SoundClass,
    pub speed_kmh: Option<f64>,
    pub t_closest_s: Option<f64>,
    pub seed: u64,
}

/// Draws the scenario of every clip; rendering is separate and deterministic per clip.
pub fn corpus_plan(seed: u64, config: &CorpusConfig) -> Result<Vec<ClipSpec>> {
    let mut specs = Vec::new();
    for &(class, count) in &config.counts {
        for _ in 0..count {
            let index = specs.len();
            let clip_seed = derive_seed(seed, index as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(clip_seed);
            let source = match speed_range(class) {
                Some((lo, hi)) => {
                    let speed = match class {
                        // (50, 75]
                        SoundClass::LH => hi - rng.random_range(0.0..hi - lo),
                        _ => rng.random_range(lo..=hi),
                    };
                    let profile = VehicleProfile::sample(class, speed, &mut rng)?;
                    let scenario = PassbyScenario {
                        speed_kmh: speed,
                        closest_distance: rng.random_range(3.0..6.0),
                        duration: config.duration,
                        closest_time: config.duration * rng.random_range(0.4..0.6),
                        noise_floor: rng.random_range(5e-4..3e-3),
                        peak_level: Some(rng.random_range(0.3..0.8)),
                        seed: rng.random(),
                        ..PassbyScenario::default()
                    };
                    ClipSource::Passby { profile, scenario }
                }
                None => ClipSource::Background { kind: NvKind::ALL[index % 3], level: rng.random_range(0.3..0.8), seed: rng.random() },
            };
            specs.push(ClipSpec { file: format!("clip_{index:03}_{class}.wav"), class, seed: clip_seed, source });
        }
    }
    Ok(specs)
}

pub fn render_clip(spec: &ClipSpec, config: &CorpusConfig) -> Result<(SampleBuffer, ManifestRow)> {
    let (buffer, speed, t_closest) = match &spec.source {
        ClipSource::Passby { profile, scenario } => {
            let p = synth_passby(profile, scenario, config.sample_rate)?;
            (p.buffer, Some(scenario.speed_kmh), Some(p.truth.t_closest))
        }
        ClipSource::Background { kind, level, seed } => {
            let b = synth_nv(*kind, config.duration, *seed, config.sample_rate)?;
            let scaled = b.samples().iter().map(|s| s * level / 0.5).collect();
            (SampleBuffer::new(scaled, config.sample_rate)?, None, None)
        }
    };
    let row = ManifestRow { file: spec.file.clone(), class: spec.class, speed_kmh: speed, t_closest_s: t_closest, seed: spec.seed };
    Ok((buffer, row))
}

/// Renders the whole corpus in memory, in manifest order.
pub fn generate_corpus(seed: u64, config: &CorpusConfig) -> Result<Vec<(ManifestRow, SampleBuffer)>> {
    corpus_plan(seed, config)?.par_iter().map(|spec| render_clip(spec, config).map(|(b, r)| (r, b))).collect()
}

pub fn write_manifest<W: std::io::Write>(rows: &[ManifestRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["file", "class", "speed_kmh", "t_closest_s", "seed"])?;
    for r in rows {
        w.write_record([
            r.file.clone(),
            r.class.to_string(),
            r.speed_kmh.map(|s| format!("{s:.3}")).unwrap_or_default(),
            r.t_closest_s.map(|t| format!("{t:.6}")).unwrap_or_default(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestRow>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path)?;
    let opt = |s: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::Parse(format!("bad number {s:?} in manifest")))
        }
    };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 5 {
            return Err(Error::Parse(format!("manifest row has {} fields, expected 5", rec.len())));
        }
        rows.push(ManifestRow {
            file: rec[0].to_string(),
            class: rec[1].parse()?,
            speed_kmh: opt(&rec[2])?,
            t_closest_s: opt(&rec[3])?,
            seed: rec[4].parse().map_err(|_| Error::Parse(format!("bad seed {:?}", &rec[4])))?,
        });
    }
    Ok(rows)
}

/// Writes every clip as a WAV into `dir`, then the manifest (atomically, last).
pub fn write_corpus(dir: impl AsRef<Path>, seed: u64, config: &CorpusConfig) -> Result<Vec<ManifestRow>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let specs = corpus_plan(seed, config)?;
    let rows = specs
        .par_iter()
        .map(|spec| {
            let (buffer, row) = render_clip(spec, config)?;
            write_wav(dir.join(&spec.file), &buffer)?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let tmp: PathBuf = dir.join(format!(".{MANIFEST_FILE}.tmp"));
    write_manifest(&rows, fs::File::create(&tmp)?)?;
    fs::rename(&tmp, dir.join(MANIFEST_FILE))?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn energy_fraction_above(x: &[f64], rate: f64, cutoff: f64) -> f64 {
        let spec = crate::features::dft(x);
        let m = x.len() / 2 + 1;
        let (mut above, mut total) = (0.0, 0.0);
        for (k, c) in spec.iter().take(m).enumerate() {
            let e = c.norm_sqr();
            total += e;
            if k as f64 * rate / x.len() as f64 > cutoff {
                above += e;
            }
        }
        above / total
    }

    #[test]
    fn emission_time_solves_light_cone() {
        let s = PassbyScenario { speed_kmh: 75.0, ..Default::default() };
        let k = Kinematics::new(&s);
        for t in [0.0, 0.7, 1.5, 2.9] {
            let u = k.emission_offset(t);
            let r = norm(k.position(u));
            assert!((r - SPEED_OF_SOUND * (t - s.closest_time - u)).abs() < 1e-9);
        }
    }

    #[test]
    fn doppler_ratio_limits() {
        let s = PassbyScenario { speed_kmh: 75.0, ..Default::default() };
        let k = Kinematics::new(&s);
        let v = 75.0 / 3.6;
        assert!((k.doppler_ratio(-1e6) - SPEED_OF_SOUND / (SPEED_OF_SOUND - v)).abs() < 1e-6);
        assert!((k.doppler_ratio(1e6) - SPEED_OF_SOUND / (SPEED_OF_SOUND + v)).abs() < 1e-6);
        assert_eq!(k.doppler_ratio(0.0), 1.0);
    }

    #[test]
    fn profiles_respect_bands() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let h = VehicleProfile::sample(SoundClass::H, 60.0, &mut rng).unwrap();
            let l = VehicleProfile::sample(SoundClass::LL, 20.0, &mut rng).unwrap();
            assert!(h.fundamental < 80.0 && l.fundamental >= 90.0);
        }
        assert!(VehicleProfile::sample(SoundClass::LL, 60.0, &mut rng).is_err());
        assert!(VehicleProfile::sample(SoundClass::LH, 50.0, &mut rng).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let p = VehicleProfile::pure_tone(SoundClass::H, 100.0);
        let s = PassbyScenario { duration: 0.5, ..Default::default() };
        assert_eq!(synth_passby(&p, &s, 8000).unwrap(), synth_passby(&p, &s, 8000).unwrap());
        for kind in NvKind::ALL {
            assert_eq!(synth_nv(kind, 0.5, 9, 8000).unwrap(), synth_nv(kind, 0.5, 9, 8000).unwrap());
        }
    }

    #[test]
    fn birds_are_high_pitched() {
        for seed in 0..5 {
            let b = synth_nv(NvKind::Birds, 3.0, seed, SAMPLE_RATE).unwrap();
            assert!(energy_fraction_above(b.samples(), 16000.0, 1500.0) > 0.8);
        }
    }

    #[test]
    fn crowd_has_no_climax() {
        let c = synth_nv(NvKind::Crowd, 3.0, 4, SAMPLE_RATE).unwrap();
        let frames: Vec<f64> = c.samples().chunks_exact(1600).map(|f| f.iter().map(|s| s * s).sum()).collect();
        let total: f64 = frames.iter().sum();
        assert!(frames.iter().all(|e| e / total < 0.1));
    }

    #[test]
    fn corpus_plan_split() {
        let specs = corpus_plan(7, &CorpusConfig::default()).unwrap();
        assert_eq!(specs.len(), 210);
        for (class, n) in CORPUS_COUNTS {
            assert_eq!(specs.iter().filter(|s| s.class == class).count(), n);
        }
        let fundamentals = |want: fn(SoundClass) -> bool| -> Vec<f64> {
            specs
                .iter()
                .filter_map(|s| match &s.source {
                    ClipSource::Passby { profile, .. } if want(s.class) => Some(profile.fundamental),
                    _ => None,
                })
                .collect()
        };
        let heavy = fundamentals(|c| c == SoundClass::H);
        let light = fundamentals(|c| matches!(c, SoundClass::LL | SoundClass::LH));
        assert!(heavy.iter().fold(0.0f64, |a, &b| a.max(b)) < light.iter().fold(f64::INFINITY, |a, &b| a.min(b)));
        assert_eq!(specs, corpus_plan(7, &CorpusConfig::default()).unwrap());
    }

    #[test]
    fn manifest_round_trip() {
        let rows = vec![
            ManifestRow { file: "a.wav".into(), class: SoundClass::LH, speed_kmh: Some(61.25), t_closest_s: Some(1.5125), seed: 3 },
            ManifestRow { file: "b.wav".into(), class: SoundClass::NV, speed_kmh: None, t_closest_s: None, seed: 4 },
        ];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_manifest(&rows, fs::File::create(&path).unwrap()).unwrap();
        assert_eq!(read_manifest(&path).unwrap(), rows);
    }
}
