//! Exact soliton solutions built from plane-wave factors
//! `X = (p + kappa)/(p - kappa)`, `Y = (q + kappa)/(q - kappa)`.
//!
//! All evaluations run in log space so deep tails and plateaus clamp to
//! their asymptotic values instead of overflowing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::LatticeParams;

/// Exponent magnitude beyond which `F/(1+F)` is clamped to 0 or 1.
const CLAMP: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub kappa0: f64,
    pub c0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub modes: Vec<Mode>,
}

impl SolitonSpec {
    pub fn one(kappa0: f64, c0: f64) -> Self {
        SolitonSpec {
            modes: vec![Mode { kappa0, c0 }],
        }
    }

    pub fn two(kappa1: f64, c1: f64, kappa2: f64, c2: f64) -> Self {
        SolitonSpec {
            modes: vec![Mode { kappa0: kappa1, c0: c1 }, Mode { kappa0: kappa2, c0: c2 }],
        }
    }

    /// Checks mode count, positivity, and the spectral bound
    /// `0 < kappa0 < min(|p|, |q|)`; amplitudes must satisfy `c0 >= 0`
    /// (zero degenerates a mode away).
    pub fn validate(&self, prm: &LatticeParams) -> Result<()> {
        if self.modes.is_empty() || self.modes.len() > 2 {
            return Err(Error::InvalidSpec(format!(
                "supported mode counts are 1 and 2, got {}",
                self.modes.len()
            )));
        }
        let bound = prm.p.abs().min(prm.q.abs());
        for (i, mode) in self.modes.iter().enumerate() {
            if !mode.kappa0.is_finite() || !mode.c0.is_finite() {
                return Err(Error::InvalidSpec(format!("mode {i} has non-finite entries")));
            }
            if mode.kappa0 <= 0.0 || mode.kappa0 >= bound {
                return Err(Error::InvalidSpec(format!(
                    "mode {i}: kappa0={} outside (0, {bound})",
                    mode.kappa0
                )));
            }
            if mode.c0 < 0.0 {
                return Err(Error::InvalidSpec(format!("mode {i}: c0={} negative", mode.c0)));
            }
        }
        if self.modes.len() == 2 && self.modes[0].kappa0 == self.modes[1].kappa0 {
            return Err(Error::Degenerate(format!(
                "two-soliton modes need distinct kappa0, both are {}",
                self.modes[0].kappa0
            )));
        }
        Ok(())
    }
}

/// Log of the plane-wave part, `ln(c0/(2 kappa)) + n ln X + m ln Y`;
/// `-inf` when `c0 = 0`.
pub(crate) fn log_f(mode: &Mode, n: i64, m: i64, prm: &LatticeParams) -> f64 {
    if mode.c0 == 0.0 {
        return f64::NEG_INFINITY;
    }
    let k = mode.kappa0;
    let ln_x = ((prm.p + k) / (prm.p - k)).ln();
    let ln_y = ((prm.q + k) / (prm.q - k)).ln();
    (mode.c0 / (2.0 * k)).ln() + n as f64 * ln_x + m as f64 * ln_y
}

/// One-soliton value `2 kappa F / (1 + F)`.
pub fn one_soliton(n: i64, m: i64, spec: &SolitonSpec, prm: &LatticeParams) -> Result<f64> {
    spec.validate(prm)?;
    if spec.modes.len() != 1 {
        return Err(Error::InvalidSpec("one_soliton needs exactly one mode".into()));
    }
    Ok(one_soliton_unchecked(n, m, &spec.modes[0], prm))
}

fn one_soliton_unchecked(n: i64, m: i64, mode: &Mode, prm: &LatticeParams) -> f64 {
    let k = mode.kappa0;
    let l = log_f(mode, n, m, prm);
    if l > CLAMP {
        2.0 * k
    } else if l < -CLAMP {
        0.0
    } else {
        let f = l.exp();
        2.0 * k * f / (1.0 + f)
    }
}

/// Two-soliton value from the bilinear form
/// `u = (2k1 F1 + 2k2 F2 + 2(k1+k2) rho F1 F2) / (1 + F1 + F2 + rho F1 F2)`
/// with interaction factor `rho = ((k2-k1)/(k2+k1))^2`. Stabilised by
/// factoring out the largest log term.
pub fn two_soliton(n: i64, m: i64, spec: &SolitonSpec, prm: &LatticeParams) -> Result<f64> {
    spec.validate(prm)?;
    if spec.modes.len() != 2 {
        return Err(Error::InvalidSpec("two_soliton needs exactly two modes".into()));
    }
    let (m1, m2) = (&spec.modes[0], &spec.modes[1]);
    let (k1, k2) = (m1.kappa0, m2.kappa0);
    let ln_rho = 2.0 * ((k2 - k1) / (k2 + k1)).abs().ln();
    let l1 = log_f(m1, n, m, prm);
    let l2 = log_f(m2, n, m, prm);
    let l12 = l1 + l2 + ln_rho;
    let lmax = 0f64.max(l1).max(l2).max(l12);
    let e = |l: f64| (l - lmax).exp();
    let num = 2.0 * k1 * e(l1) + 2.0 * k2 * e(l2) + 2.0 * (k1 + k2) * e(l12);
    let den = e(0.0) + e(l1) + e(l2) + e(l12);
    Ok(num / den)
}

/// Dispatches on the number of modes.
pub fn soliton_value(n: i64, m: i64, spec: &SolitonSpec, prm: &LatticeParams) -> Result<f64> {
    spec.validate(prm)?;
    match spec.modes.len() {
        1 => Ok(one_soliton_unchecked(n, m, &spec.modes[0], prm)),
        _ => two_soliton(n, m, spec, prm),
    }
}

/// Fills a window with the soliton solution.
pub fn soliton_grid(
    spec: &SolitonSpec,
    prm: &LatticeParams,
    n0: i64,
    m0: i64,
    n_cols: usize,
    m_rows: usize,
) -> Result<Grid> {
    spec.validate(prm)?;
    if n_cols == 0 || m_rows == 0 {
        return Err(Error::WindowTooSmall("empty soliton window".into()));
    }
    if spec.modes.len() == 1 {
        let mode = spec.modes[0];
        Ok(Grid::from_fn(n0, m0, n_cols, m_rows, |n, m| {
            one_soliton_unchecked(n, m, &mode, prm)
        }))
    } else {
        let mut g = Grid::new(n0, m0, n_cols, m_rows);
        for m in m0..m0 + m_rows as i64 {
            for n in n0..n0 + n_cols as i64 {
                g.set(n, m, two_soliton(n, m, spec, prm)?);
            }
        }
        Ok(g)
    }
}

/// Discrete potentials read from a stored field.
pub struct PotentialView<'a> {
    pub grid: &'a Grid,
    pub prm: LatticeParams,
}

impl<'a> PotentialView<'a> {
    pub fn new(grid: &'a Grid, prm: LatticeParams) -> Self {
        PotentialView { grid, prm }
    }

    /// Double-shift difference `u(n,m) - u(n+2,m)`.
    pub fn eta(&self, n: i64, m: i64) -> Result<f64> {
        Ok(self.grid.at(n, m)? - self.grid.at(n + 2, m)?)
    }

    /// `2p + eta(n,m)`, the n-direction potential; tends to `2p` on tails.
    pub fn q_pot(&self, n: i64, m: i64) -> Result<f64> {
        Ok(2.0 * self.prm.p + self.eta(n, m)?)
    }

    /// Mirror potential `2q - u(n,m+2) + u(n,m)` for the m-direction.
    pub fn p_pot(&self, n: i64, m: i64) -> Result<f64> {
        Ok(2.0 * self.prm.q - self.grid.at(n, m + 2)? + self.grid.at(n, m)?)
    }
}
