//! Overall accuracy of every classifier on every feature subset.
//!
//! Takes about a minute in release mode.
use roadwarn::classifiers::{compare_feature_sets, LabeledDataset, ModelKind, ModelSpec, DEFAULT_FOLDS};
use roadwarn::features::FeatureSet;
use roadwarn::pipeline::{extract_corpus, PipelineConfig};
use roadwarn::synth::{write_corpus, CorpusConfig};

fn main() -> roadwarn::Result<()> {
    let seed = 2024;
    let dir = std::env::temp_dir().join(format!("roadwarn-corpus-{seed}"));
    write_corpus(&dir, seed, &CorpusConfig::default())?;
    let data = LabeledDataset::try_from(extract_corpus(&dir, &PipelineConfig::default())?)?;

    let base = ModelSpec::new(ModelKind::Mlp, FeatureSet::All).with_seed(seed);
    let grid = compare_feature_sets(&data, &base, DEFAULT_FOLDS, seed)?;
    println!("accuracy (%), {DEFAULT_FOLDS}-fold cross-validation");
    print!("{grid}");
    Ok(())
}
