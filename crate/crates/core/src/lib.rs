#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod audio_io;
pub mod class;
pub mod classifiers;
pub mod commands;
pub mod decision;
pub mod deployment;
pub mod error;
pub mod features;
pub mod pipeline;
pub mod simulate;
pub mod synth;
pub mod warnd;

pub use class::SoundClass;
pub use error::{Error, Result};
