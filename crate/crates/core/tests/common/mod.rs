//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roadwarn::classifiers::LabeledDataset;
use roadwarn::decision::{detect_climax, track_frames, Band, Direction};
use roadwarn::deployment::{DeploymentPlan, PedestrianPosition};
use roadwarn::features::MfccConfig;
use roadwarn::pipeline::tracking_spectra;
use roadwarn::synth::{synth_passby, Passby, PassbyScenario, VehicleProfile, SAMPLE_RATE};
use roadwarn::warnd::{decode, ErrReason, Message, Recorder, Service, WarningMessage};
use roadwarn::SoundClass;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// `O(N^2)` DFT straight from the definition, as `(re, im)` pairs.
pub fn direct_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter().enumerate().fold((0.0, 0.0), |(re, im), (i, &v)| {
                let a = -2.0 * PI * ((k * i) % n) as f64 / n as f64;
                (re + v * a.cos(), im + v * a.sin())
            })
        })
        .collect()
}

/// LPC by solving the full Toeplitz system `R a = r[1..]`; returns `(a, prediction error)`.
pub fn toeplitz_lpc(x: &[f64], order: usize) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let r: Vec<f64> = (0..=order).map(|k| x.iter().zip(x.iter().skip(k)).map(|(a, b)| a * b).sum::<f64>() / n).collect();
    let m = DMatrix::from_fn(order, order, |i, j| r[i.abs_diff(j)]);
    let rhs = DVector::from_iterator(order, r[1..].iter().copied());
    let a = m.lu().solve(&rhs).expect("non-singular autocorrelation matrix");
    let err = r[0] - a.iter().zip(&r[1..]).map(|(a, r)| a * r).sum::<f64>();
    (a.iter().copied().collect(), err)
}

/// MFCC from the textbook definition, written out without shared helpers.
pub fn reference_mfcc(x: &[f64], sample_rate: u32, cfg: &MfccConfig) -> Vec<f64> {
    let n = x.len();
    let fs = sample_rate as f64;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let prev = if i == 0 { 0.0 } else { x[i - 1] };
        let emph = if i == 0 { x[0] } else { x[i] - cfg.pre_emphasis * prev };
        y[i] = emph * (0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos());
    }
    let power: Vec<f64> = direct_dft(&y)[..=n / 2].iter().map(|(re, im)| re * re + im * im).collect();

    let mel = |f: f64| 1127.0 * (1.0 + f / 700.0).ln();
    let inv = |m: f64| 700.0 * ((m / 1127.0).exp() - 1.0);
    let fmax = cfg.fmax.unwrap_or(fs / 2.0);
    let (m0, m1) = (mel(cfg.fmin), mel(fmax));
    let edge = |i: usize| inv(m0 + (m1 - m0) * i as f64 / (cfg.n_filters + 1) as f64);

    let logs: Vec<f64> = (0..cfg.n_filters)
        .map(|j| {
            let (l, c, r) = (edge(j), edge(j + 1), edge(j + 2));
            let e: f64 = power
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let f = k as f64 * fs / n as f64;
                    let w = if f > l && f <= c {
                        (f - l) / (c - l)
                    } else if f > c && f < r {
                        (r - f) / (r - c)
                    } else {
                        0.0
                    };
                    w * p
                })
                .sum();
            (e + cfg.log_floor).ln()
        })
        .collect();

    let m = cfg.n_filters;
    let dct = DMatrix::from_fn(cfg.n_coeffs, m, |k, i| {
        let s = if k == 0 { (1.0 / m as f64).sqrt() } else { (2.0 / m as f64).sqrt() };
        s * (PI * k as f64 * (2 * i + 1) as f64 / (2 * m) as f64).cos()
    });
    (dct * DVector::from_vec(logs)).iter().copied().collect()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-12)
}

/// Majority class, ties to the more dangerous class.
pub fn vote_oracle(labels: &[SoundClass]) -> SoundClass {
    let order = [SoundClass::LH, SoundClass::H, SoundClass::LL, SoundClass::NV];
    let count = |c: SoundClass| labels.iter().filter(|&&l| l == c).count();
    let best = order.iter().map(|&c| count(c)).max().unwrap();
    *order.iter().find(|&&c| count(c) == best).unwrap()
}

/// Who must receive a warning, recomputed by brute force.
pub fn dispatch_oracle(
    plan: &DeploymentPlan,
    positions: &[PedestrianPosition],
    processor: usize,
    class: SoundClass,
    direction: Direction,
    t: f64,
) -> BTreeSet<String> {
    if !matches!(class, SoundClass::H | SoundClass::LH) || direction == Direction::Receding {
        return BTreeSet::new();
    }
    let a = plan.processors[processor].area;
    positions
        .iter()
        .filter(|p| t - p.timestamp <= plan.config.freshness_window)
        .filter(|p| a.x_min <= p.x && p.x <= a.x_max && a.y_min <= p.y && p.y <= a.y_max)
        .map(|p| p.client_id.clone())
        .collect()
}

/// The 100 seeded pass-bys: 20 at each of 30, 40, 50, 60 and 75 km/h,
/// alternating heavy and light vehicles.
pub fn climax_trials() -> Vec<(SoundClass, Passby)> {
    let mut out = Vec::new();
    for (si, &speed) in [30.0, 40.0, 50.0, 60.0, 75.0].iter().enumerate() {
        for trial in 0..20u64 {
            let mut rng = rng(1000 * si as u64 + trial);
            let class = if trial % 2 == 0 {
                SoundClass::H
            } else if speed > 50.0 {
                SoundClass::LH
            } else {
                SoundClass::LL
            };
            let profile = VehicleProfile::sample(class, speed, &mut rng).unwrap();
            let scenario = PassbyScenario {
                speed_kmh: speed,
                closest_distance: rng.random_range(3.0..6.0),
                closest_time: rng.random_range(1.2..1.8),
                noise_floor: rng.random_range(5e-4..3e-3),
                seed: rng.random(),
                ..Default::default()
            };
            out.push((class, synth_passby(&profile, &scenario, SAMPLE_RATE).unwrap()));
        }
    }
    out
}

/// Climax frame detected on a clip, with every frame given `class`.
pub fn climax_of(passby: &Passby, class: SoundClass) -> usize {
    let frames = roadwarn::audio_io::frame_signal(&passby.buffer, &Default::default()).unwrap();
    let spectra = tracking_spectra(&frames).unwrap();
    let labels = vec![class; frames.len()];
    let track = track_frames(&frames, &spectra, &labels, Band::default()).unwrap();
    detect_climax(&track).unwrap()
}

/// Best Gini split by enumerating every feature and every midpoint threshold.
pub fn brute_force_split(data: &LabeledDataset) -> Option<(usize, f64, f64)> {
    let gini = |rows: &[usize]| {
        let n = rows.len() as f64;
        let mut c = [0.0; 4];
        for &i in rows {
            c[data.labels[i].index()] += 1.0;
        }
        1.0 - c.iter().map(|x| (x / n) * (x / n)).sum::<f64>()
    };
    let all: Vec<usize> = (0..data.len()).collect();
    let parent = gini(&all);
    let mut best: Option<(usize, f64, f64)> = None;
    for f in 0..data.dim() {
        let mut values: Vec<f64> = data.vectors.iter().map(|v| v[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let thr = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = all.iter().partition(|&&i| data.vectors[i][f] <= thr);
            let n = all.len() as f64;
            let gain = parent - (l.len() as f64 / n) * gini(&l) - (r.len() as f64 / n) * gini(&r);
            if best.is_none_or(|b| gain > b.2 + 1e-12) {
                best = Some((f, thr, gain));
            }
        }
    }
    best
}

/// Frequency of the strongest tone in `[lo, hi]` Hz within `x[start..start + len]`,
/// by a fine Hann-windowed DTFT scan.
pub fn measure_tone(x: &[f64], rate: u32, start: usize, len: usize, lo: f64, hi: f64) -> f64 {
    let seg = &x[start..start + len];
    let fs = rate as f64;
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, &v) in seg.iter().enumerate() {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / (len - 1) as f64).cos();
            let a = 2.0 * PI * f * i as f64 / fs;
            re += w * v * a.cos();
            im -= w * v * a.sin();
        }
        re * re + im * im
    };
    let steps = ((hi - lo) / 0.005).round() as usize;
    (0..=steps).map(|s| lo + s as f64 * 0.005).max_by(|a, b| power(*a).total_cmp(&power(*b))).unwrap()
}

/// A 100 Hz pure tone passing at 75 km/h, with the lane 0.5 m from a
/// ground-level microphone so the far-field Doppler limit applies away from
/// the closest point. Closest approach is at 6 s of 10.
pub fn doppler_passby() -> Passby {
    let scenario = PassbyScenario {
        speed_kmh: 75.0,
        closest_distance: 0.5,
        mic_height: 0.0,
        duration: 10.0,
        closest_time: 6.0,
        noise_floor: 0.0,
        peak_level: None,
        ..Default::default()
    };
    synth_passby(&VehicleProfile::pure_tone(SoundClass::H, 100.0), &scenario, SAMPLE_RATE).unwrap()
}

/// Measured approaching and receding frequencies of [`doppler_passby`].
pub fn measured_doppler() -> (f64, f64) {
    let p = doppler_passby();
    let x = p.buffer.samples();
    let len = 6400;
    let approach = measure_tone(x, SAMPLE_RATE, 8000, len, 100.0, 112.0);
    let recede = measure_tone(x, SAMPLE_RATE, 148_800, len, 88.0, 100.0);
    (approach, recede)
}

pub const DIRS: [Direction; 3] = [Direction::Approaching, Direction::Receding, Direction::Unknown];

pub fn default_plan() -> DeploymentPlan {
    roadwarn::deployment::build_plan(200.0, roadwarn::deployment::PlanConfig::default()).unwrap()
}

/// Uniform value on a millimetre / millisecond grid.
pub fn milli(r: &mut ChaCha8Rng, lo: i64, hi: i64) -> f64 {
    r.random_range(lo * 1000..=hi * 1000) as f64 / 1000.0
}

/// Sequential model of the registry: latest accepted position per client.
#[derive(Default)]
pub struct Model {
    pub positions: BTreeMap<String, PedestrianPosition>,
}

impl Model {
    pub fn register(&mut self, p: &PedestrianPosition) -> Result<(), ErrReason> {
        if let Some(old) = self.positions.get(&p.client_id) {
            if p.timestamp < old.timestamp {
                return Err(ErrReason::Stale);
            }
        }
        self.positions.insert(p.client_id.clone(), p.clone());
        Ok(())
    }

    pub fn update(&mut self, p: &PedestrianPosition) -> Result<(), ErrReason> {
        match self.positions.get(&p.client_id) {
            None => Err(ErrReason::UnknownClient),
            Some(old) if p.timestamp < old.timestamp => Err(ErrReason::Stale),
            Some(_) => {
                self.positions.insert(p.client_id.clone(), p.clone());
                Ok(())
            }
        }
    }

    pub fn all(&self) -> Vec<PedestrianPosition> {
        self.positions.values().cloned().collect()
    }
}

pub fn random_position(r: &mut ChaCha8Rng, clock: f64) -> PedestrianPosition {
    let id = format!("p{}", r.random_range(0..8));
    let t = (clock + milli(r, -3, 3)).max(0.0);
    PedestrianPosition::new(id, milli(r, -10, 215), milli(r, -2, 9), (t * 1000.0).round() / 1000.0)
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Runs `count` random registration / update / dispatch sequences against a
/// fresh service each, checking every outcome against [`Model`] and
/// [`dispatch_oracle`]. Returns the number of dispatches checked.
pub fn run_dispatch_sequences(count: u64) -> Result<usize, String> {
    let plan = default_plan();
    let n_proc = plan.processors.len();
    let mut dispatched = 0;
    for seq in 0..count {
        let mut r = rng(seq);
        let service: Service<Recorder> = Service::new(plan.clone());
        let mut model = Model::default();
        let mut sinks: BTreeMap<String, Recorder> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        let mut clock = 0.0;
        for _ in 0..r.random_range(5..40) {
            clock += milli(&mut r, 0, 2);
            match r.random_range(0..3) {
                0 => {
                    let p = random_position(&mut r, clock);
                    let msg = Message::Reg { client_id: p.client_id.clone(), x: p.x, y: p.y, t: p.timestamp };
                    ensure!(decode(&msg.to_string()) == Ok(msg.clone()), "REG round trip failed: {msg}");
                    let sink = Recorder::default();
                    let got = service.register(p.clone(), sink.clone());
                    ensure!(got == model.register(&p), "sequence {seq}: register {p:?} gave {got:?}");
                    if got.is_ok() {
                        sinks.insert(p.client_id.clone(), sink);
                    }
                    seen.insert(p.client_id);
                }
                1 => {
                    let p = random_position(&mut r, clock);
                    let msg = Message::Pos { client_id: p.client_id.clone(), x: p.x, y: p.y, t: p.timestamp };
                    ensure!(decode(&msg.to_string()) == Ok(msg.clone()), "POS round trip failed: {msg}");
                    let got = service.update(p.clone());
                    ensure!(got == model.update(&p), "sequence {seq}: update {p:?} gave {got:?}");
                }
                _ => {
                    let pid = r.random_range(0..n_proc + 1);
                    let class = SoundClass::ALL[r.random_range(0..4)];
                    let dir = DIRS[r.random_range(0..3)];
                    let t = (clock * 1000.0_f64).round() / 1000.0;
                    if pid >= n_proc {
                        ensure!(service.dispatch(pid, class, dir, t).is_err(), "processor {pid} should not exist");
                        continue;
                    }
                    let before: BTreeMap<String, usize> = sinks.iter().map(|(k, s)| (k.clone(), s.lines().len())).collect();
                    let got = service.dispatch(pid, class, dir, t).map_err(|e| e.to_string())?;
                    let want = dispatch_oracle(&plan, &model.all(), pid, class, dir, t);
                    ensure!(got == want, "sequence {seq}: delivered {got:?}, oracle {want:?}");
                    if matches!(class, SoundClass::LL | SoundClass::NV) || dir == Direction::Receding {
                        ensure!(got.is_empty(), "sequence {seq}: warned for {class} {dir}");
                    }
                    let msg = Message::Warn(WarningMessage { processor_id: pid, sound_class: class, direction: dir, event_time: t });
                    let line = msg.to_string();
                    ensure!(decode(&line) == Ok(msg.clone()), "WARN round trip failed: {line}");
                    for (id, sink) in &sinks {
                        let lines = sink.lines();
                        let added = lines.len() - before[id];
                        ensure!(added == got.contains(id) as usize, "sequence {seq}: {id} got {added} lines");
                        if added == 1 {
                            ensure!(lines.last() == Some(&line), "sequence {seq}: {id} got {:?}", lines.last());
                        }
                    }
                    dispatched += 1;
                }
            }
            ensure!(service.client_count() <= seen.len(), "registry larger than distinct ids");
        }
    }
    Ok(dispatched)
}
