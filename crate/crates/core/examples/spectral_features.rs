//! Frames a short two-tone signal and prints the 31 features of one frame.
use std::f64::consts::PI;

use roadwarn::audio_io::{frame_signal, FramingConfig, SampleBuffer};
use roadwarn::features::{assemble_feature_vector, feature_names, fft_magnitude, spectral_features, LpcConfig, MfccConfig};

fn main() -> roadwarn::Result<()> {
    let rate = 8000;
    let x: Vec<f64> = (0..rate)
        .map(|i| {
            let t = i as f64 / rate as f64;
            (2.0 * PI * 440.0 * t).sin() + 0.5 * (2.0 * PI * 2500.0 * t).sin()
        })
        .collect();
    let buffer = SampleBuffer::new(x, rate)?;
    let frames = frame_signal(&buffer, &FramingConfig::default())?;
    println!("{} frames of {} samples", frames.len(), frames[0].len());

    let s = spectral_features(&fft_magnitude(&frames[3])?)?;
    println!("strongest bins: {:.0} Hz (lower half), {:.0} Hz (upper half)", s.f1, s.f2);

    let (mfcc, lpc) = (MfccConfig::default(), LpcConfig::default());
    let v = assemble_feature_vector(&frames[3], &mfcc, &lpc)?;
    for (name, value) in feature_names(mfcc.n_coeffs, lpc.order).iter().zip(v.to_vec()) {
        println!("{name:>9} {value:>14.6e}");
    }
    Ok(())
}
