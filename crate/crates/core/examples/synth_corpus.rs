//! Writes the seeded 210-clip corpus and prints its manifest summary.
//!
//! cargo run --release --example synth_corpus -- /tmp/corpus 2024
use roadwarn::synth::{write_corpus, CorpusConfig};
use roadwarn::SoundClass;

fn main() -> roadwarn::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "corpus".into());
    let seed = args.next().map(|s| s.parse().expect("seed must be an integer")).unwrap_or(2024);

    let rows = write_corpus(&dir, seed, &CorpusConfig::default())?;
    for class in SoundClass::ALL {
        let clips: Vec<_> = rows.iter().filter(|r| r.class == class).collect();
        let speeds: Vec<f64> = clips.iter().filter_map(|r| r.speed_kmh).collect();
        let range = match (speeds.iter().copied().reduce(f64::min), speeds.iter().copied().reduce(f64::max)) {
            (Some(lo), Some(hi)) => format!("{lo:.1}..{hi:.1} km/h"),
            _ => "background".into(),
        };
        println!("{class:>2}: {:>3} clips  {range}", clips.len());
    }
    println!("wrote {} clips and manifest.csv to {dir}", rows.len());
    Ok(())
}
