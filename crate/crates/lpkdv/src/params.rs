use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice spacing parameters attached to the two discrete directions.
/// `p` goes with shifts in `n`, `q` with shifts in `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub p: f64,
    pub q: f64,
}

impl LatticeParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidParams(format!(
                "lattice parameters must be finite, got p={p} q={q}"
            )));
        }
        Ok(LatticeParams { p, q })
    }

    /// `p^2 - q^2`, the constant side of the quad equation.
    pub fn c(&self) -> f64 {
        self.p * self.p - self.q * self.q
    }

    /// True when the quad equation factors into two linear wave equations.
    pub fn is_degenerate(&self) -> bool {
        self.p == self.q || self.p == -self.q
    }

    /// Parameters with the two lattice directions exchanged.
    pub fn swapped(&self) -> Self {
        LatticeParams { p: self.q, q: self.p }
    }
}

impl std::str::FromStr for LatticeParams {
    type Err = Error;

    /// Parses `"p,q"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Parse(format!("expected `p,q`, got `{s}`")));
        }
        let p: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad p in `{s}`")))?;
        let q: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad q in `{s}`")))?;
        LatticeParams::new(p, q)
    }
}
