use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, StegoError};
use crate::key::SecretKey;

/// How candidate words are mapped to bit strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coder {
    /// Keyed Huffman code over the renormalized candidate probabilities.
    Consistency,
    /// Fixed-length codes over the top `2^l` candidates.
    Block,
}

/// Which temporary text each masked position is predicted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionMode {
    /// Earlier positions are filled with their chosen tokens before predicting.
    Autoregressive,
    /// Every position is predicted from the fully masked text.
    Parallel,
}

impl FromStr for Coder {
    type Err = StegoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "consistency" => Ok(Coder::Consistency),
            "block" => Ok(Coder::Block),
            other => Err(StegoError::Config(format!("unknown coder {other:?}"))),
        }
    }
}

impl fmt::Display for Coder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coder::Consistency => "consistency",
            Coder::Block => "block",
        })
    }
}

impl FromStr for PredictionMode {
    type Err = StegoError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" | "autoregressive" => Ok(PredictionMode::Autoregressive),
            "parallel" => Ok(PredictionMode::Parallel),
            other => Err(StegoError::Config(format!("unknown prediction mode {other:?}"))),
        }
    }
}

impl fmt::Display for PredictionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictionMode::Autoregressive => "auto",
            PredictionMode::Parallel => "parallel",
        })
    }
}

/// Side information both parties must share (besides the language model).
#[derive(Debug, Clone)]
pub struct StegoConfig {
    pub interval: usize,
    pub threshold: f64,
    pub key: SecretKey,
    pub coder: Coder,
    pub mode: PredictionMode,
}

impl StegoConfig {
    pub fn new(interval: usize, threshold: f64, key: SecretKey) -> Result<Self> {
        let cfg = StegoConfig {
            interval,
            threshold,
            key,
            coder: Coder::Consistency,
            mode: PredictionMode::Autoregressive,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_coder(mut self, coder: Coder) -> Self {
        self.coder = coder;
        self
    }

    pub fn with_mode(mut self, mode: PredictionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.interval < 1 {
            return Err(StegoError::Config("masking interval must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(StegoError::Config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> SecretKey {
        SecretKey::new(vec![7u8; 16]).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(StegoConfig::new(0, 0.02, key()).is_err());
        assert!(StegoConfig::new(1, 1.5, key()).is_err());
        assert!(StegoConfig::new(1, -0.1, key()).is_err());
        assert!(StegoConfig::new(3, 0.02, key()).is_ok());
    }

    #[test]
    fn parse_names() {
        assert_eq!("block".parse::<Coder>().unwrap(), Coder::Block);
        assert_eq!(
            "auto".parse::<PredictionMode>().unwrap(),
            PredictionMode::Autoregressive
        );
        assert!("arith".parse::<Coder>().is_err());
    }
}
