//! A trainable classifier bundled with its column selection and optional PCA
//! stage, plus JSON persistence.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{LabeledDataset, Standardizer};
use super::gnb::{train_gnb, GnbModel};
use super::knn::{train_knn, KnnModel, DEFAULT_K};
use super::mlp::{train_mlp, MlpConfig, MlpModel};
use super::tree::{train_dt, DecisionTree, DEFAULT_MAX_DEPTH};
use crate::class::SoundClass;
use crate::error::{Error, Result};
use crate::features::pca::{pca_fit, PcaModel};
use crate::features::FeatureSet;

pub const MODEL_FORMAT: &str = "roadwarn-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Mlp,
    Knn,
    Nb,
    Dt,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Mlp, ModelKind::Knn, ModelKind::Nb, ModelKind::Dt];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Mlp => "mlp",
            ModelKind::Knn => "knn",
            ModelKind::Nb => "nb",
            ModelKind::Dt => "dt",
        }
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlp" => Ok(ModelKind::Mlp),
            "knn" => Ok(ModelKind::Knn),
            "nb" => Ok(ModelKind::Nb),
            "dt" => Ok(ModelKind::Dt),
            other => Err(Error::Parse(format!("unknown model {other:?}"))),
        }
    }
}

/// Everything needed to train a model from a full-width dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub feature_set: FeatureSet,
    pub mlp: MlpConfig,
    pub k: usize,
    pub max_depth: usize,
    /// Retained-variance target of an optional PCA stage (applied to z-scored columns).
    pub pca: Option<f64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, feature_set: FeatureSet) -> Self {
        Self { kind, feature_set, mlp: MlpConfig::default(), k: DEFAULT_K, max_depth: DEFAULT_MAX_DEPTH, pca: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.mlp.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Trained {
    Mlp(MlpModel),
    Knn(KnnModel),
    Nb(GnbModel),
    Dt(DecisionTree),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub scaler: Standardizer,
    pub pca: PcaModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub format: String,
    pub version: u32,
    pub spec: ModelSpec,
    /// Width of the raw vectors this model accepts.
    pub input_dim: usize,
    pub columns: Vec<usize>,
    pub reduction: Option<Reduction>,
    pub trained: Trained,
}

pub fn train(data: &LabeledDataset, spec: &ModelSpec) -> Result<ClassifierModel> {
    if data.is_empty() {
        return Err(Error::InsufficientData("empty training set".into()));
    }
    let columns = spec.feature_set.columns(data.dim());
    let mut selected = data.select_columns(&columns);
    let reduction = match spec.pca {
        Some(fraction) => {
            let scaler = Standardizer::fit(&selected.vectors);
            let z = scaler.apply_all(&selected.vectors);
            let pca = pca_fit(&z, fraction)?;
            selected.vectors = z.iter().map(|v| pca.transform(v)).collect::<Result<_>>()?;
            selected.names = (0..pca.retained).map(|i| format!("pc{i}")).collect();
            Some(Reduction { scaler, pca })
        }
        None => None,
    };
    let trained = match spec.kind {
        ModelKind::Mlp => Trained::Mlp(train_mlp(&selected, &spec.mlp)?),
        ModelKind::Knn => Trained::Knn(train_knn(&selected, spec.k)?),
        ModelKind::Nb => Trained::Nb(train_gnb(&selected)?),
        ModelKind::Dt => Trained::Dt(train_dt(&selected, spec.max_depth)?),
    };
    Ok(ClassifierModel {
        format: MODEL_FORMAT.into(),
        version: MODEL_VERSION,
        spec: *spec,
        input_dim: data.dim(),
        columns,
        reduction,
        trained,
    })
}

impl ClassifierModel {
    /// Classifies one full-width raw feature vector.
    pub fn predict(&self, vector: &[f64]) -> Result<SoundClass> {
        if vector.len() != self.input_dim {
            return Err(Error::DimensionMismatch { expected: self.input_dim, got: vector.len() });
        }
        let mut x: Vec<f64> = self.columns.iter().map(|&c| vector[c]).collect();
        if let Some(r) = &self.reduction {
            x = r.pca.transform(&r.scaler.apply(&x))?;
        }
        Ok(match &self.trained {
            Trained::Mlp(m) => m.predict(&x),
            Trained::Knn(m) => m.predict(&x),
            Trained::Nb(m) => m.predict(&x),
            Trained::Dt(m) => m.predict(&x),
        })
    }

    pub fn predict_all(&self, vectors: &[Vec<f64>]) -> Result<Vec<SoundClass>> {
        vectors.iter().map(|v| self.predict(v)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: ClassifierModel = serde_json::from_str(text)?;
        if model.format != MODEL_FORMAT || model.version != MODEL_VERSION {
            return Err(Error::Parse(format!(
                "unsupported model document {} v{} (expected {MODEL_FORMAT} v{MODEL_VERSION})",
                model.format, model.version
            )));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        Self::from_json(&text)
    }
}
