//! Benchmark environments.

pub mod constants;
pub mod lasertag;
pub mod lightdark;
pub mod subhunt;
pub mod vdptag;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use constants::EnvConstants;
pub use lasertag::{LaserTag, LaserTagState};
pub use lightdark::{LightDark, LightDarkState};
pub use subhunt::{SubHunt, SubHuntState};
pub use vdptag::{VdpState, VdpTag};

/// Registered environment names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvKind {
    #[serde(rename = "lightdark")]
    LightDark,
    #[serde(rename = "lasertag")]
    LaserTag,
    #[serde(rename = "subhunt")]
    SubHunt,
    #[serde(rename = "vdptag")]
    VdpTag,
    #[serde(rename = "vdptag-discrete")]
    VdpTagDiscrete,
}

impl EnvKind {
    pub const ALL: [EnvKind; 5] = [
        EnvKind::LightDark,
        EnvKind::LaserTag,
        EnvKind::SubHunt,
        EnvKind::VdpTag,
        EnvKind::VdpTagDiscrete,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            EnvKind::LightDark => "lightdark",
            EnvKind::LaserTag => "lasertag",
            EnvKind::SubHunt => "subhunt",
            EnvKind::VdpTag => "vdptag",
            EnvKind::VdpTagDiscrete => "vdptag-discrete",
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown environment `{s}`")))
    }
}

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub(crate) fn normal_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    FRAC_1_SQRT_2PI / sd * (-0.5 * z * z).exp()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

/// `Phi(hi) - Phi(lo)` for `lo <= hi`, computed on the tail that keeps
/// precision when both bounds are far from zero.
pub fn normal_interval_mass(lo: f64, hi: f64) -> f64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    if lo >= 0.0 {
        0.5 * (libm::erfc(lo * s) - libm::erfc(hi * s))
    } else if hi <= 0.0 {
        0.5 * (libm::erfc(-hi * s) - libm::erfc(-lo * s))
    } else {
        0.5 * (libm::erf(hi * s) - libm::erf(lo * s))
    }
}

/// Probability that `round(N(mean, sd))` equals `k`.
pub fn rounded_normal_mass(k: i32, mean: f64, sd: f64) -> f64 {
    let k = k as f64;
    normal_interval_mass((k - 0.5 - mean) / sd, (k + 0.5 - mean) / sd)
}
