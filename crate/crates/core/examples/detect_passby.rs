//! Trains an MLP on a reduced corpus, then runs the full detection on a
//! fresh heavy-vehicle pass-by and a background clip.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use roadwarn::classifiers::{train, LabeledDataset, ModelKind, ModelSpec};
use roadwarn::deployment::warning_decision;
use roadwarn::features::FeatureSet;
use roadwarn::pipeline::{analyze, clip_rows, PipelineConfig};
use roadwarn::synth::{generate_corpus, synth_nv, synth_passby, CorpusConfig, NvKind, PassbyScenario, VehicleProfile, SAMPLE_RATE};
use roadwarn::SoundClass;

fn main() -> roadwarn::Result<()> {
    let cfg = PipelineConfig::default();
    let corpus = CorpusConfig {
        counts: vec![(SoundClass::LH, 12), (SoundClass::LL, 12), (SoundClass::H, 12), (SoundClass::NV, 12)],
        ..Default::default()
    };
    let (mut vectors, mut labels) = (Vec::new(), Vec::new());
    for (row, buffer) in generate_corpus(7, &corpus)? {
        let rows = clip_rows(&buffer, &cfg)?;
        labels.extend(std::iter::repeat_n(row.class, rows.len()));
        vectors.extend(rows);
    }
    let data = LabeledDataset::new(cfg.feature_names(), vectors, labels)?;
    let model = train(&data, &ModelSpec::new(ModelKind::Mlp, FeatureSet::All).with_seed(7))?;
    println!("trained on {} frames", data.len());

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let profile = VehicleProfile::sample(SoundClass::H, 45.0, &mut rng)?;
    let scenario = PassbyScenario { speed_kmh: 45.0, seed: 99, ..Default::default() };
    let passby = synth_passby(&profile, &scenario, SAMPLE_RATE)?;
    let a = analyze(&passby.buffer, &model, &cfg)?;
    let labels: String = a.track.labels.iter().map(|l| format!("{l} ")).collect();
    println!("frame labels: {labels}");
    println!("true closest frame {}, {}, {:?}", passby.truth.closest_frame(), a.result, warning_decision(&a.result));

    let birds = synth_nv(NvKind::Birds, 3.0, 3, SAMPLE_RATE)?;
    let b = analyze(&birds, &model, &cfg)?;
    println!("birds: {}, {:?}", b.result, warning_decision(&b.result));
    Ok(())
}
