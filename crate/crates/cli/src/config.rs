//! Resolved run configuration shared by every subcommand.

use detmax_core::{Limits, Rat};
use serde::Serialize;

use crate::CliError;

pub const MAX_BITS_ENV: &str = "DETMAX_LAB_MAX_BITS";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selector: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Rat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    pub seed: u64,
    pub max_subsets: u64,
    pub max_bits: u64,
}

impl RunConfig {
    pub fn limits(&self) -> Limits {
        Limits {
            max_subsets: self.max_subsets,
            max_bits: self.max_bits,
        }
    }
}

/// `--max-bits` wins over the environment, which wins over the default.
pub fn resolve_max_bits(flag: Option<u64>) -> Result<u64, CliError> {
    let bits = match flag {
        Some(b) => b,
        None => match std::env::var(MAX_BITS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::Validation(format!("{MAX_BITS_ENV} must be a positive integer, got {v:?}"))
            })?,
            Err(_) => Limits::DEFAULT_MAX_BITS,
        },
    };
    if bits == 0 {
        return Err(CliError::Validation("max bits must be positive".into()));
    }
    Ok(bits)
}

pub fn resolve_max_subsets(flag: Option<u64>) -> Result<u64, CliError> {
    let n = flag.unwrap_or(Limits::DEFAULT_MAX_SUBSETS);
    if n == 0 {
        return Err(CliError::Validation("max subsets must be positive".into()));
    }
    Ok(n)
}

pub fn parse_eps(text: &str) -> Result<Rat, CliError> {
    let eps: Rat = text
        .parse()
        .map_err(|_| CliError::Validation(format!("cannot parse eps {text:?} as a rational")))?;
    if !eps.is_positive() {
        return Err(CliError::Validation(format!("eps must be positive, got {eps}")));
    }
    Ok(eps)
}
