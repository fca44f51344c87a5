//! The subcommands behind the `roadwarn` binary, callable as plain functions.
//!
//! Every command that writes a file also writes its resolved [`RunConfig`]
//! next to it as `<output>.run.json` (`run.json` inside a corpus directory).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::audio_io::{load_wav, FramingConfig};
use crate::classifiers::{
    compare_feature_sets, evaluate_cv, train, ClassifierModel, ComparisonGrid, ConfusionMatrix, LabeledDataset, Metrics, MlpConfig,
    ModelKind, ModelSpec, DEFAULT_FOLDS,
};
use crate::decision::{Band, DetectionResult};
use crate::deployment::{warning_decision, DeploymentPlan, PlanConfig, WarningDecision};
use crate::error::{Error, Result};
use crate::features::{FeatureSet, FeatureTable, LpcConfig, MfccConfig};
use crate::pipeline::{detect, extract_corpus, PipelineConfig};
use crate::simulate::{parse_script, simulate, SimReport};
use crate::synth::{write_corpus, CorpusConfig, ManifestRow};
use crate::warnd::{spawn, ServerHandle};

pub const DEFAULT_SEED: u64 = 2024;
pub const RUN_FILE: &str = "run.json";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierSettings {
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub k: usize,
    pub max_depth: usize,
    pub pca: Option<f64>,
    pub folds: usize,
}

impl Default for ClassifierSettings {
    fn default() -> Self {
        let base = ModelSpec::new(ModelKind::Mlp, FeatureSet::All);
        Self {
            hidden_units: base.mlp.hidden_units,
            learning_rate: base.mlp.learning_rate,
            epochs: base.mlp.epochs,
            k: base.k,
            max_depth: base.max_depth,
            pca: base.pca,
            folds: DEFAULT_FOLDS,
        }
    }
}

/// Contents of a `--config` TOML file. Every table is optional.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub framing: FramingConfig,
    pub mfcc: MfccConfig,
    pub lpc: LpcConfig,
    pub band: Band,
    pub classifier: ClassifierSettings,
    pub plan: PlanConfig,
}

impl Settings {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Settings = toml::from_str(text).map_err(|e| Error::InvalidConfig(format!("config: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&read_input(path.as_ref())?)
    }

    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        let c = &self.classifier;
        if c.hidden_units == 0 || c.epochs == 0 || c.k == 0 || c.max_depth == 0 {
            return Err(Error::InvalidConfig("classifier sizes must be positive".into()));
        }
        if !(c.learning_rate.is_finite() && c.learning_rate > 0.0) {
            return Err(Error::InvalidConfig(format!("learning_rate must be positive, got {}", c.learning_rate)));
        }
        if let Some(p) = c.pca {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidConfig(format!("pca retained variance must be in (0, 1], got {p}")));
            }
        }
        if c.folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {}", c.folds)));
        }
        if !(self.band.low >= 0.0 && self.band.low < self.band.high) {
            return Err(Error::InvalidConfig(format!("band [{}, {}] is empty", self.band.low, self.band.high)));
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig { framing: self.framing, mfcc: self.mfcc, lpc: self.lpc, band: self.band }
    }

    pub fn model_spec(&self, kind: ModelKind, feature_set: FeatureSet, seed: u64) -> ModelSpec {
        let c = &self.classifier;
        ModelSpec {
            kind,
            feature_set,
            mlp: MlpConfig { hidden_units: c.hidden_units, learning_rate: c.learning_rate, epochs: c.epochs, seed },
            k: c.k,
            max_depth: c.max_depth,
            pca: c.pca,
        }
    }
}

/// Resolved record of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: u64,
    pub model: Option<ModelSpec>,
    pub settings: Settings,
}

impl RunConfig {
    pub fn new(subcommand: &str, seed: u64, settings: &Settings) -> Self {
        Self { subcommand: subcommand.into(), inputs: vec![], outputs: vec![], seed, model: None, settings: *settings }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), serde_json::to_string_pretty(self)?.as_bytes())
    }
}

pub fn run_file_for(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".run.json");
    output.with_file_name(name)
}

fn require(path: &Path) -> Result<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingFile(path.to_path_buf()))
    }
}

fn read_input(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
        _ => Error::Io(e),
    })
}

/// Writes through a sibling temp file so a failed run never leaves a partial output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut name = std::ffi::OsString::from(".");
    name.push(path.file_name().unwrap_or_default());
    name.push(".tmp");
    let tmp = path.with_file_name(name);
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn cmd_synth(out_dir: &Path, seed: u64, settings: &Settings) -> Result<Vec<ManifestRow>> {
    settings.validate()?;
    let rows = write_corpus(out_dir, seed, &CorpusConfig::default())?;
    let mut run = RunConfig::new("synth", seed, settings);
    run.outputs.push(out_dir.to_path_buf());
    run.write(out_dir.join(RUN_FILE))?;
    Ok(rows)
}

pub fn cmd_extract(corpus_dir: &Path, features_csv: &Path, settings: &Settings) -> Result<FeatureTable> {
    settings.validate()?;
    require(corpus_dir)?;
    let table = extract_corpus(corpus_dir, &settings.pipeline())?;
    let mut bytes = Vec::new();
    table.write_csv(&mut bytes)?;
    write_atomic(features_csv, &bytes)?;
    let mut run = RunConfig::new("extract", 0, settings);
    run.inputs.push(corpus_dir.to_path_buf());
    run.outputs.push(features_csv.to_path_buf());
    run.write(run_file_for(features_csv))?;
    Ok(table)
}

pub fn load_dataset(features_csv: &Path) -> Result<LabeledDataset> {
    let file = fs::File::open(features_csv).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingFile(features_csv.to_path_buf()),
        _ => Error::Io(e),
    })?;
    LabeledDataset::try_from(FeatureTable::read_csv(file)?)
}

pub fn cmd_train(features_csv: &Path, model_out: &Path, spec: &ModelSpec, settings: &Settings) -> Result<ClassifierModel> {
    settings.validate()?;
    let data = load_dataset(features_csv)?;
    let model = train(&data, spec)?;
    write_atomic(model_out, model.to_json()?.as_bytes())?;
    let mut run = RunConfig::new("train", spec.mlp.seed, settings);
    run.inputs.push(features_csv.to_path_buf());
    run.outputs.push(model_out.to_path_buf());
    run.model = Some(*spec);
    run.write(run_file_for(model_out))?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalMode {
    CrossValidate(ModelSpec),
    Compare(ModelSpec),
    Saved(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Metrics(Metrics),
    Grid(ComparisonGrid),
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Report::Metrics(m) => m.fmt(f),
            Report::Grid(g) => g.fmt(f),
        }
    }
}

/// Metrics of a saved model on every labeled row of `data`.
pub fn evaluate_model(model: &ClassifierModel, data: &LabeledDataset) -> Result<Metrics> {
    let mut cm = ConfusionMatrix::default();
    for (v, &label) in data.vectors.iter().zip(&data.labels) {
        cm.record(label, model.predict(v)?);
    }
    Ok(cm.metrics())
}

pub fn cmd_eval(features_csv: &Path, mode: &EvalMode, seed: u64, report_out: Option<&Path>, settings: &Settings) -> Result<Report> {
    settings.validate()?;
    if let EvalMode::Saved(p) = mode {
        require(p)?;
    }
    let data = load_dataset(features_csv)?;
    let folds = settings.classifier.folds;
    let mut run = RunConfig::new("eval", seed, settings);
    run.inputs.push(features_csv.to_path_buf());
    let report = match mode {
        EvalMode::CrossValidate(spec) => {
            run.model = Some(*spec);
            Report::Metrics(evaluate_cv(&data, spec, folds, seed)?)
        }
        EvalMode::Compare(spec) => {
            run.model = Some(*spec);
            Report::Grid(compare_feature_sets(&data, spec, folds, seed)?)
        }
        EvalMode::Saved(path) => {
            let model = ClassifierModel::load(path)?;
            run.inputs.push(path.clone());
            run.model = Some(model.spec);
            Report::Metrics(evaluate_model(&model, &data)?)
        }
    };
    if let Some(out) = report_out {
        write_atomic(out, report.to_string().as_bytes())?;
        run.outputs.push(out.to_path_buf());
        run.write(run_file_for(out))?;
    }
    Ok(report)
}

/// The `DET` line, followed by a `WARN <class> <direction>` line when the policy warns.
pub fn detection_lines(result: &DetectionResult) -> Vec<String> {
    let mut lines = vec![result.to_string()];
    if warning_decision(result) == WarningDecision::Warn {
        lines.push(format!("WARN {} {}", result.sound_type, result.direction));
    }
    lines
}

pub fn cmd_detect(wav: &Path, model_path: &Path, settings: &Settings) -> Result<DetectionResult> {
    settings.validate()?;
    require(wav)?;
    require(model_path)?;
    let model = ClassifierModel::load(model_path)?;
    let buffer = load_wav(wav)?;
    detect(&buffer, &model, &settings.pipeline())
}

pub fn load_plan(plan_path: Option<&Path>, settings: &Settings) -> Result<DeploymentPlan> {
    let cfg = match plan_path {
        Some(p) => PlanConfig::load(p)?,
        None => settings.plan,
    };
    DeploymentPlan::from_config(cfg)
}

pub fn cmd_simulate(script: &Path, plan_path: Option<&Path>, report_out: Option<&Path>, settings: &Settings) -> Result<SimReport> {
    settings.validate()?;
    let plan = load_plan(plan_path, settings)?;
    let events = parse_script(&read_input(script)?)?;
    let report = simulate(&plan, &events)?;
    if let Some(out) = report_out {
        write_atomic(out, report.to_string().as_bytes())?;
        let mut run = RunConfig::new("simulate", 0, settings);
        run.settings.plan = plan.config;
        run.inputs.push(script.to_path_buf());
        run.inputs.extend(plan_path.map(Path::to_path_buf));
        run.outputs.push(out.to_path_buf());
        run.write(run_file_for(out))?;
    }
    Ok(report)
}

pub fn cmd_serve(plan_path: Option<&Path>, listen: &str, settings: &Settings) -> Result<ServerHandle> {
    settings.validate()?;
    let plan = load_plan(plan_path, settings)?;
    spawn(listen, plan)
}
