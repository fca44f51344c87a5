//! The four decision classes and the danger ordering used for every tie-break.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Risk class of one frame or one detection event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SoundClass {
    /// Heavy vehicle.
    H,
    /// Light vehicle, low speed.
    LL,
    /// Light vehicle, high speed.
    LH,
    /// No vehicle (birds, airplanes, crowds).
    NV,
}

impl SoundClass {
    pub const ALL: [SoundClass; 4] = [SoundClass::H, SoundClass::LL, SoundClass::LH, SoundClass::NV];

    /// Dense index in `ALL` order, used for one-hot targets and confusion matrices.
    pub fn index(self) -> usize {
        match self {
            SoundClass::H => 0,
            SoundClass::LL => 1,
            SoundClass::LH => 2,
            SoundClass::NV => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Higher is more dangerous: LH > H > LL > NV.
    pub fn danger(self) -> u8 {
        match self {
            SoundClass::LH => 3,
            SoundClass::H => 2,
            SoundClass::LL => 1,
            SoundClass::NV => 0,
        }
    }

    /// Whether this class warrants a pedestrian warning.
    pub fn is_risky(self) -> bool {
        matches!(self, SoundClass::H | SoundClass::LH)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SoundClass::H => "H",
            SoundClass::LL => "LL",
            SoundClass::LH => "LH",
            SoundClass::NV => "NV",
        }
    }
}

impl fmt::Display for SoundClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SoundClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H" => Ok(SoundClass::H),
            "LL" => Ok(SoundClass::LL),
            "LH" => Ok(SoundClass::LH),
            "NV" => Ok(SoundClass::NV),
            other => Err(Error::Parse(format!("unknown sound class {other:?}"))),
        }
    }
}

/// Picks the winner among `(class, count)` candidates: highest count, then
/// the `secondary` key (smaller wins), then danger ordering.
pub(crate) fn break_ties<I>(candidates: I) -> Option<SoundClass>
where
    I: IntoIterator<Item = (SoundClass, usize, f64)>,
{
    candidates
        .into_iter()
        .filter(|&(_, n, _)| n > 0)
        .max_by(|a, b| {
            a.1.cmp(&b.1)
                .then_with(|| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal))
                .then_with(|| a.0.danger().cmp(&b.0.danger()))
        })
        .map(|(c, _, _)| c)
}
