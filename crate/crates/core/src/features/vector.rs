use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lpc::{lpc, LpcConfig};
use super::mfcc::{mfcc, MfccConfig};
use super::spectrum::{fft_magnitude, spectral_features, SpectralFeatures};
use crate::audio_io::Frame;
use crate::class::SoundClass;
use crate::error::{Error, Result};

/// All seven feature groups of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub spectral: SpectralFeatures,
    pub mfcc: Vec<f64>,
    pub lpc: Vec<f64>,
    pub gain: f64,
    pub label: Option<SoundClass>,
}

impl FeatureVector {
    /// `[p1, p2, f1, f2, peak_value, mfcc.., lpc.., gain]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend(self.spectral.to_array());
        v.extend(&self.mfcc);
        v.extend(&self.lpc);
        v.push(self.gain);
        v
    }

    pub fn dim(&self) -> usize {
        5 + self.mfcc.len() + self.lpc.len() + 1
    }
}

/// The frame is expected unwindowed: the FFT features use it as-is and the
/// MFCC path applies its own Hann window.
pub fn assemble_feature_vector(frame: &Frame, mfcc_cfg: &MfccConfig, lpc_cfg: &LpcConfig) -> Result<FeatureVector> {
    let spectrum = fft_magnitude(frame)?;
    let spectral = spectral_features(&spectrum)?;
    let mfcc = mfcc(frame, mfcc_cfg)?;
    let lpc = lpc(frame, lpc_cfg)?;
    Ok(FeatureVector { spectral, mfcc, lpc: lpc.coefficients, gain: lpc.gain, label: None })
}

/// Column names for a layout, in vector order.
pub fn feature_names(n_coeffs: usize, order: usize) -> Vec<String> {
    let mut names: Vec<String> = ["p1", "p2", "f1", "f2", "peak"].iter().map(|s| s.to_string()).collect();
    names.extend((0..n_coeffs).map(|i| format!("mfcc{i}")));
    names.extend((1..=order).map(|i| format!("lpc{i}")));
    names.push("lpc_gain".into());
    names
}

/// Column subsets compared in the feature-set study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSet {
    /// The five FFT-derived scalars.
    Five,
    /// MFCC and LPC groups.
    Cepstral,
    All,
}

impl FeatureSet {
    pub const ALL: [FeatureSet; 3] = [FeatureSet::Five, FeatureSet::Cepstral, FeatureSet::All];

    /// Column indices into a full vector of `dim` columns.
    pub fn columns(self, dim: usize) -> Vec<usize> {
        match self {
            FeatureSet::Five => (0..5.min(dim)).collect(),
            FeatureSet::Cepstral => (5.min(dim)..dim).collect(),
            FeatureSet::All => (0..dim).collect(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSet::Five => "five",
            FeatureSet::Cepstral => "cepstral",
            FeatureSet::All => "all",
        }
    }
}

impl FromStr for FeatureSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "five" => Ok(FeatureSet::Five),
            "cepstral" => Ok(FeatureSet::Cepstral),
            "all" => Ok(FeatureSet::All),
            other => Err(Error::Parse(format!("unknown feature set {other:?}"))),
        }
    }
}

/// Fixed 9-significant-digit scientific notation used in every feature file.
pub fn format_value(x: f64) -> String {
    format!("{x:.8e}")
}

/// Rows of a feature CSV file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Option<SoundClass>>,
}

impl FeatureTable {
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.names.clone();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, label) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            rec.push(label.map(|l| l.to_string()).unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.clone();
        if header.len() < 2 || &header[header.len() - 1] != "label" {
            return Err(Error::Parse("feature CSV must end with a label column".into()));
        }
        let names: Vec<String> = header.iter().take(header.len() - 1).map(str::to_string).collect();
        let mut table = FeatureTable { names, ..Default::default() };
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let dim = table.names.len();
            let row = rec
                .iter()
                .take(dim)
                .map(|s| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {e}", line + 1))))
                .collect::<Result<Vec<_>>>()?;
            let label = match &rec[dim] {
                "" => None,
                s => Some(s.parse()?),
            };
            table.rows.push(row);
            table.labels.push(label);
        }
        Ok(table)
    }
}
