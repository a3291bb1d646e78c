use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Which objective is trained and which distance ranks candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Triple distance only; touches entity and relation tables.
    Kre,
    /// Mention distance only; touches relation and word tables.
    Tme,
    /// Sum of both distances under one margin.
    Jrme,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Kre, Variant::Tme, Variant::Jrme];

    pub fn margin(self, config: &ModelConfig) -> f64 {
        match self {
            Variant::Kre => config.alpha,
            Variant::Tme => config.beta,
            Variant::Jrme => config.gamma,
        }
    }

    pub fn uses_triple(self) -> bool {
        matches!(self, Variant::Kre | Variant::Jrme)
    }

    pub fn uses_mention(self) -> bool {
        matches!(self, Variant::Tme | Variant::Jrme)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Kre => "KRE",
            Variant::Tme => "TME",
            Variant::Jrme => "JRME",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kre" => Ok(Variant::Kre),
            "tme" => Ok(Variant::Tme),
            "jrme" => Ok(Variant::Jrme),
            other => Err(Error::Config(format!(
                "unknown variant '{other}' (expected kre, tme or jrme)"
            ))),
        }
    }
}

/// How corrupt relations are chosen for each training belief.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NegativeMode {
    /// Every relation other than the true one, ascending by id.
    EnumerateAll,
    /// `k` distinct wrong relations drawn uniformly. Approximates the full sum.
    Sample(usize),
}

impl fmt::Display for NegativeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NegativeMode::EnumerateAll => f.write_str("all"),
            NegativeMode::Sample(k) => write!(f, "sample:{k}"),
        }
    }
}

impl FromStr for NegativeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "all" {
            return Ok(NegativeMode::EnumerateAll);
        }
        let bad = || Error::Config(format!("bad negative mode '{s}' (expected 'all' or 'sample:K')"));
        let k = s.strip_prefix("sample:").ok_or_else(bad)?;
        let k: usize = k.parse().map_err(|_| bad())?;
        if k == 0 {
            return Err(bad());
        }
        Ok(NegativeMode::Sample(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub dim: usize,
    /// Triple-distance margin.
    pub alpha: f64,
    /// Mention-distance margin.
    pub beta: f64,
    /// Joint margin.
    pub gamma: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub neg_mode: NegativeMode,
    pub seed: u64,
    /// Project updated entity vectors back to the unit sphere after every step.
    pub normalize_entities: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            dim: 100,
            alpha: 1.0,
            beta: 1.0,
            gamma: 2.0,
            learning_rate: 0.01,
            epochs: 100,
            neg_mode: NegativeMode::EnumerateAll,
            seed: 1,
            normalize_entities: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("dim must be positive".into()));
        }
        for (name, m) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} must be a finite nonnegative margin, got {m}"
                )));
            }
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if let NegativeMode::Sample(0) = self.neg_mode {
            return Err(Error::Config("sample:K needs K >= 1".into()));
        }
        Ok(())
    }

    /// Order over the searched hyperparameters `(dim, alpha, beta, gamma)`.
    pub fn grid_cmp(&self, other: &ModelConfig) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.beta.total_cmp(&other.beta))
            .then(self.gamma.total_cmp(&other.gamma))
    }
}
