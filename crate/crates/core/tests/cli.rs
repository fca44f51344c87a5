use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use roadwarn::audio_io::{write_wav, SampleBuffer};
use roadwarn::synth::{synth_nv, synth_passby, NvKind, PassbyScenario, VehicleProfile, SAMPLE_RATE};
use roadwarn::SoundClass;

fn roadwarn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadwarn")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Corpus, features and a trained MLP shared by the tests below.
struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Fixture {
    fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }
}

fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let corpus = root.join("corpus");
        let features = root.join("features.csv");
        let model = root.join("model.json");
        assert!(roadwarn(&["synth", "--out", s(&corpus)]).status.success());
        assert!(roadwarn(&["extract", "--corpus", s(&corpus), "--out", s(&features)]).status.success());
        assert!(roadwarn(&["train", "--features", s(&features), "--out", s(&model)]).status.success());
        Fixture { _dir: dir, root }
    })
}

#[test]
fn synth_writes_the_corpus_deterministically() {
    let f = fixture();
    let corpus = f.path("corpus");
    let wavs = fs::read_dir(&corpus).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "wav")).count();
    assert_eq!(wavs, 210);
    let again = tempfile::tempdir().unwrap();
    assert!(roadwarn(&["synth", "--out", s(again.path())]).status.success());
    assert_eq!(fs::read(corpus.join("manifest.csv")).unwrap(), fs::read(again.path().join("manifest.csv")).unwrap());
    assert!(corpus.join("run.json").exists());
}

#[test]
fn synth_into_unwritable_dir_fails_without_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = blocker.join("corpus");
    let o = roadwarn(&["synth", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.join("manifest.csv").exists());
}

#[test]
fn extract_is_reproducible() {
    let f = fixture();
    let text = fs::read_to_string(f.path("features.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 32);
    assert!(header.ends_with(",label"));
    let again = f.path("features_again.csv");
    assert!(roadwarn(&["extract", "--corpus", s(&f.path("corpus")), "--out", s(&again)]).status.success());
    assert_eq!(fs::read(f.path("features.csv")).unwrap(), fs::read(&again).unwrap());
    assert!(f.path("features.csv.run.json").exists());
}

#[test]
fn extract_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = roadwarn(&["extract", "--corpus", s(dir.path()), "--out", s(&dir.path().join("f.csv"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!dir.path().join("f.csv").exists());
}

#[test]
fn saved_model_evaluates_identically_twice() {
    let f = fixture();
    let (features, model) = (f.path("features.csv"), f.path("model.json"));
    let args = ["eval", "--features", s(&features), "--model-in", s(&model)];
    let (a, b) = (roadwarn(&args), roadwarn(&args));
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    for row in ["Precision", "Recall", "Accuracy", "f-measure", "LH class", "Overall accuracy"] {
        assert!(stdout(&a).contains(row), "{row}");
    }
}

#[test]
fn cross_validation_report_and_comparison_grid() {
    let f = fixture();
    let report = f.path("nb_report.txt");
    let o = roadwarn(&["eval", "--features", s(&f.path("features.csv")), "--model", "nb", "--feature-set", "five", "--report", s(&report)]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&report).unwrap(), stdout(&o));
    assert!(stdout(&o).contains("Overall accuracy"));

    let cfg = f.path("fast.toml");
    fs::write(&cfg, "[classifier]\nepochs = 5\nfolds = 3\nmax_depth = 4\n").unwrap();
    let o = roadwarn(&["--config", s(&cfg), "eval", "--compare", "--features", s(&f.path("features.csv"))]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = stdout(&o);
    assert_eq!(grid.lines().count(), 5);
    assert!(grid.lines().next().unwrap().split_whitespace().eq(["model", "five", "cepstral", "all"]));
    for kind in ["mlp", "knn", "nb", "dt"] {
        assert!(grid.lines().any(|l| l.starts_with(kind)));
    }
}

fn wav(dir: &Path, name: &str, buffer: &SampleBuffer) -> PathBuf {
    let p = dir.join(name);
    write_wav(&p, buffer).unwrap();
    p
}

#[test]
fn detect_end_to_end() {
    let f = fixture();
    let model = f.path("model.json");
    let dir = tempfile::tempdir().unwrap();

    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(77);
    let profile = VehicleProfile::sample(SoundClass::H, 40.0, &mut rng).unwrap();
    let scenario = PassbyScenario { speed_kmh: 40.0, seed: 77, ..Default::default() };
    let heavy = wav(dir.path(), "h.wav", &synth_passby(&profile, &scenario, SAMPLE_RATE).unwrap().buffer);
    let o = roadwarn(&["detect", "--wav", s(&heavy), "--model-in", s(&model)]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2, "{out}");
    let det: Vec<&str> = lines[0].split(' ').collect();
    assert_eq!((det[0], det[2], det[3]), ("DET", "H", "approaching"));
    assert!(det[1].parse::<usize>().is_ok());
    assert_eq!(lines[1], "WARN H approaching");

    let birds = wav(dir.path(), "nv.wav", &synth_nv(NvKind::Birds, 3.0, 5, SAMPLE_RATE).unwrap());
    let out = stdout(&roadwarn(&["detect", "--wav", s(&birds), "--model-in", s(&model)]));
    assert_eq!(out.lines().count(), 1);
    assert_eq!(out.split(' ').nth(2), Some("NV"));

    let short = wav(dir.path(), "short.wav", &SampleBuffer::new(vec![0.1; 1600 * 5], SAMPLE_RATE).unwrap());
    assert_eq!(roadwarn(&["detect", "--wav", s(&short), "--model-in", s(&model)]).status.code(), Some(2));
}

#[test]
fn simulate_scripts() {
    let dir = tempfile::tempdir().unwrap();
    let script = |name: &str, text: &str| {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    };
    let lh = script("lh.txt", "# fast light vehicle\nVEHICLE LH 75 0 0\nPED p1 87.5 1 0\n");
    let report = dir.path().join("lh.log");
    let o = roadwarn(&["simulate", "--script", s(&lh), "--report", s(&report)]);
    assert!(o.status.success());
    let warns: Vec<String> = stdout(&o).lines().filter(|l| l.contains(" WARN ")).map(String::from).collect();
    assert_eq!(warns.len(), 1);
    let lead: f64 = warns[0].rsplit("lead=").next().unwrap().parse().unwrap();
    assert!((3.6..=4.8).contains(&lead));
    assert!(report.with_file_name("lh.log.run.json").exists());

    for (name, text) in [
        ("nv.txt", "VEHICLE NV 40 0 0\nPED p1 87.5 1 0\n"),
        ("ll.txt", "VEHICLE LL 40 0 0\nPED p1 87.5 1 0\n"),
        ("out.txt", "VEHICLE LH 75 0 0\nPED p1 87.5 30 0\n"),
    ] {
        let o = roadwarn(&["simulate", "--script", s(&script(name, text))]);
        assert!(o.status.success());
        assert!(!stdout(&o).contains(" WARN "), "{name}");
    }
    assert_eq!(roadwarn(&["simulate", "--script", s(&script("bad.txt", "VEHICLE LH 0 0 0\n"))]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(roadwarn(&["--feature-set", "six", "synth", "--out", "x"]).status.code(), Some(1));
    assert_eq!(roadwarn(&["frobnicate"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[classifier]\nfolds = 1\n").unwrap();
    assert_eq!(roadwarn(&["--config", s(&cfg), "synth", "--out", s(&dir.path().join("c"))]).status.code(), Some(1));
    assert!(roadwarn(&["--help"]).status.success());
}
