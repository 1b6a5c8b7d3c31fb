use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaseModel {
    BradleyTerry,
    Davidson,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Extension {
    OrderEffect,
    Generalized,
    RandomEffects,
    SubjectPredictors,
}

impl Extension {
    pub fn token(self) -> &'static str {
        match self {
            Extension::OrderEffect => "ordereffect",
            Extension::Generalized => "generalized",
            Extension::RandomEffects => "U",
            Extension::SubjectPredictors => "S",
        }
    }
}

/// Prior variances. Every block uses a mean-zero normal, except `u_std`
/// which is the variance of the half-normal on the random-effect scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub lambda: f64,
    pub nu: f64,
    pub gamma: f64,
    pub beta: f64,
    pub s: f64,
    pub u_std: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors { lambda: 3.0, nu: 3.0, gamma: 1.0, beta: 3.0, s: 3.0, u_std: 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub base: BaseModel,
    pub extensions: BTreeSet<Extension>,
    pub priors: Priors,
}

const VALID_TOKENS: &str = "bt, davidson, ordereffect, generalized, U, S";

impl ModelSpec {
    pub fn new(base: BaseModel) -> Self {
        ModelSpec { base, extensions: BTreeSet::new(), priors: Priors::default() }
    }

    pub fn with(mut self, ext: Extension) -> Self {
        self.extensions.insert(ext);
        self
    }

    pub fn with_priors(mut self, priors: Priors) -> Self {
        self.priors = priors;
        self
    }

    pub fn has(&self, ext: Extension) -> bool {
        self.extensions.contains(&ext)
    }

    pub fn is_davidson(&self) -> bool {
        self.base == BaseModel::Davidson
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.priors;
        for (name, v) in
            [("lambda", p.lambda), ("nu", p.nu), ("gamma", p.gamma), ("beta", p.beta), ("S", p.s), ("U", p.u_std)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidSpec(format!("prior variance for {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Parses model strings such as `bt`, `bt-ordereffect` or `davidson-generalized-U`.
    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split('-');
        let base = match tokens.next() {
            Some("bt") => BaseModel::BradleyTerry,
            Some("davidson") => BaseModel::Davidson,
            other => {
                return Err(Error::UnknownModelToken {
                    token: other.unwrap_or_default().to_string(),
                    valid: VALID_TOKENS.into(),
                })
            }
        };
        let mut spec = ModelSpec::new(base);
        for tok in tokens {
            let ext = match tok {
                "ordereffect" => Extension::OrderEffect,
                "generalized" => Extension::Generalized,
                "U" => Extension::RandomEffects,
                "S" => Extension::SubjectPredictors,
                _ => return Err(Error::UnknownModelToken { token: tok.to_string(), valid: VALID_TOKENS.into() }),
            };
            if !spec.extensions.insert(ext) {
                return Err(Error::InvalidSpec(format!("extension '{tok}' given twice")));
            }
        }
        Ok(spec)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.base {
            BaseModel::BradleyTerry => "bt",
            BaseModel::Davidson => "davidson",
        })?;
        for ext in &self.extensions {
            write!(f, "-{}", ext.token())?;
        }
        Ok(())
    }
}
