//! Entropy units.
//!
//! Every computation in this crate runs in nats. Values are converted only
//! when they leave the library (reports, CLI output).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

impl LogBase {
    /// Converts an entropy given in nats into this unit.
    pub fn from_nats(self, value: f64) -> f64 {
        match self {
            LogBase::Nats => value,
            LogBase::Bits => value / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogBase::Nats => "nats",
            LogBase::Bits => "bits",
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LogBase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nats" => Ok(LogBase::Nats),
            "bits" => Ok(LogBase::Bits),
            other => Err(format!("unknown log base `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_of_ln2_is_one() {
        assert!((LogBase::Bits.from_nats(std::f64::consts::LN_2) - 1.0).abs() < 1e-15);
        assert_eq!(LogBase::Nats.from_nats(0.7), 0.7);
        assert_eq!("bits".parse::<LogBase>().unwrap(), LogBase::Bits);
        assert!("decibans".parse::<LogBase>().is_err());
    }
}
