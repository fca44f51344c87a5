//! Per-frame feature extraction: five FFT scalars, MFCC, LPC, and PCA.

pub mod lpc;
pub mod mfcc;
pub mod pca;
pub mod spectrum;
pub mod vector;

pub use lpc::{autocorrelation, levinson_durbin, lpc, LpcConfig, LpcResult};
pub use mfcc::{mfcc, MfccConfig};
pub use pca::{pca_fit, PcaModel};
pub use spectrum::{dft, fft_magnitude, spectral_features, SpectralFeatures, Spectrum};
pub use vector::{assemble_feature_vector, feature_names, FeatureSet, FeatureTable, FeatureVector};
