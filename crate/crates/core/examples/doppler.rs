//! Closed-form Doppler shift next to the tracked frequency of a rendered pass-by.
use roadwarn::audio_io::{frame_signal, FramingConfig};
use roadwarn::decision::{doppler_observed, track_frames, Band, DopplerParams, Phase};
use roadwarn::pipeline::tracking_spectra;
use roadwarn::synth::{synth_passby, PassbyScenario, VehicleProfile, SAMPLE_RATE};
use roadwarn::SoundClass;

fn main() -> roadwarn::Result<()> {
    let (f0, kmh) = (120.0, 60.0);
    let p = DopplerParams::new(f0, kmh / 3.6);
    println!(
        "{f0} Hz at {kmh} km/h: {:.2} Hz approaching, {:.2} Hz receding",
        doppler_observed(&p, Phase::Approaching)?,
        doppler_observed(&p, Phase::Receding)?
    );

    let scenario = PassbyScenario { speed_kmh: kmh, ..Default::default() };
    let passby = synth_passby(&VehicleProfile::pure_tone(SoundClass::LH, f0), &scenario, SAMPLE_RATE)?;
    let frames = frame_signal(&passby.buffer, &FramingConfig::default())?;
    let spectra = tracking_spectra(&frames)?;
    let track = track_frames(&frames, &spectra, &vec![SoundClass::LH; frames.len()], Band::default())?;

    println!("frame  truth Hz  tracked Hz  energy");
    for (k, truth) in passby.truth.frame_freq.iter().enumerate() {
        let mark = if k == passby.truth.closest_frame() { "  <- closest" } else { "" };
        println!("{k:>5}  {truth:>8.2}  {:>10.2}  {:.4}{mark}", track.dominant_freq[k], track.rms_energy[k]);
    }
    Ok(())
}
