//! Six-fold cross-validation of one classifier on the synthetic corpus.
//!
//! cargo run --release --example classify_cv -- mlp all
use roadwarn::classifiers::{evaluate_cv, LabeledDataset, ModelKind, ModelSpec, DEFAULT_FOLDS};
use roadwarn::features::FeatureSet;
use roadwarn::pipeline::{extract_corpus, PipelineConfig};
use roadwarn::synth::{write_corpus, CorpusConfig};

fn main() -> roadwarn::Result<()> {
    let mut args = std::env::args().skip(1);
    let kind: ModelKind = args.next().as_deref().unwrap_or("mlp").parse()?;
    let set: FeatureSet = args.next().as_deref().unwrap_or("all").parse()?;
    let seed = 2024;

    let dir = std::env::temp_dir().join(format!("roadwarn-corpus-{seed}"));
    write_corpus(&dir, seed, &CorpusConfig::default())?;
    let data = LabeledDataset::try_from(extract_corpus(&dir, &PipelineConfig::default())?)?;
    println!("{} frames, {} features", data.len(), data.dim());

    let spec = ModelSpec::new(kind, set).with_seed(seed);
    let metrics = evaluate_cv(&data, &spec, DEFAULT_FOLDS, seed)?;
    println!("{} on {} features, {DEFAULT_FOLDS}-fold:", kind.as_str(), set.as_str());
    print!("{metrics}");
    Ok(())
}
