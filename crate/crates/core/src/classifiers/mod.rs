//! Frame classifiers (MLP, KNN, Gaussian naive Bayes, decision tree),
//! cross-validation, and evaluation metrics.

pub mod cv;
pub mod dataset;
pub mod gnb;
pub mod knn;
pub mod metrics;
pub mod mlp;
pub mod model;
pub mod tree;

pub use cv::{compare_feature_sets, evaluate_cv, ComparisonGrid, DEFAULT_FOLDS};
pub use dataset::{LabeledDataset, Standardizer};
pub use gnb::{train_gnb, GnbModel};
pub use knn::{train_knn, KnnModel};
pub use metrics::{f_measure, ClassMetrics, ConfusionMatrix, Metrics};
pub use mlp::{train_mlp, MlpConfig, MlpModel};
pub use model::{train, ClassifierModel, ModelKind, ModelSpec};
pub use tree::{train_dt, DecisionTree};
