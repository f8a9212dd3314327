//! Scalar expressions over named variables, backed by `exmex`.
//!
//! Expressions keep their source text so that configurations serialize
//! back to exactly what was written.

use exmex::prelude::*;
use exmex::FlatEx;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct Expr {
    source: String,
    flat: FlatEx<f64>,
    /// For each exmex variable (in exmex order), the caller-side slot.
    slots: Vec<usize>,
    allowed: Vec<String>,
}

impl Expr {
    /// Parses `source`, permitting only the variables in `allowed`. The
    /// slice passed to [`Expr::eval`] follows the order of `allowed`.
    pub fn parse(source: &str, allowed: &[&str]) -> Result<Self> {
        let flat = exmex::parse::<f64>(source).map_err(|e| Error::Expression {
            source_text: source.to_string(),
            message: e.to_string(),
        })?;
        let mut slots = Vec::new();
        for name in flat.var_names() {
            match allowed.iter().position(|a| a == name) {
                Some(slot) => slots.push(slot),
                None => {
                    return Err(Error::Expression {
                        source_text: source.to_string(),
                        message: format!(
                            "unknown variable `{name}` (allowed: {})",
                            allowed.join(", ")
                        ),
                    })
                }
            }
        }
        Ok(Self {
            source: source.to_string(),
            flat,
            slots,
            allowed: allowed.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        let mut buf = [0.0; 4];
        for (k, &slot) in self.slots.iter().enumerate() {
            buf[k] = vars[slot];
        }
        self.flat.eval(&buf[..self.slots.len()]).unwrap_or(f64::NAN)
    }

    /// True when the expression does not depend on any variable.
    pub fn is_constant(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn allowed(&self) -> &[String] {
        &self.allowed
    }
}

impl std::fmt::Debug for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.allowed == other.allowed
    }
}

/// Source text of an expression as it appears in a configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExprText(pub String);

impl ExprText {
    pub fn new(s: impl Into<String>) -> Self {
        Self(s.into())
    }

    pub fn compile(&self, allowed: &[&str]) -> Result<Expr> {
        Expr::parse(&self.0, allowed)
    }
}

impl From<&str> for ExprText {
    fn from(s: &str) -> Self {
        Self(s.to_string())
    }
}
