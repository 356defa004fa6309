//! Lie point symmetries of the quad equation.
//!
//! Characteristics (with `sigma = (-1)^(n+m)`):
//!   X1: 1
//!   X2: sigma
//!   X3: sigma (u - p n - q m)
//!
//! and the discrete symmetries exchanging or reversing lattice directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid};
use crate::lattice::residual_gradient;
use crate::params::LatticeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointGenerator {
    X1,
    X2,
    X3,
}

/// Alternating sign `(-1)^(n+m)`.
pub fn sigma(n: i64, m: i64) -> f64 {
    if (n + m).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Characteristic of a point generator at one site.
pub fn point_char(g: PointGenerator, n: i64, m: i64, u: f64, prm: &LatticeParams) -> f64 {
    match g {
        PointGenerator::X1 => 1.0,
        PointGenerator::X2 => sigma(n, m),
        PointGenerator::X3 => sigma(n, m) * (u - prm.p * n as f64 - prm.q * m as f64),
    }
}

/// Action of the prolonged generator on the quad residual at one cell:
/// the gradient of the residual contracted with the characteristic at the
/// four corners. Terms are paired (00,11) and (10,01) so that the exact
/// antisymmetry of the gradient cancels X1 and X2 to literal zero.
pub fn prolonged_defect(g: PointGenerator, cell: Cell, grid: &Grid, prm: &LatticeParams) -> Result<f64> {
    let Cell { n, m } = cell;
    let u00 = grid.at(n, m)?;
    let u10 = grid.at(n + 1, m)?;
    let u01 = grid.at(n, m + 1)?;
    let u11 = grid.at(n + 1, m + 1)?;
    let d = residual_gradient(prm, u00, u10, u01, u11);
    let c00 = point_char(g, n, m, u00, prm);
    let c10 = point_char(g, n + 1, m, u10, prm);
    let c01 = point_char(g, n, m + 1, u01, prm);
    let c11 = point_char(g, n + 1, m + 1, u11, prm);
    Ok((d[0] * c00 + d[3] * c11) + (d[1] * c10 + d[2] * c01))
}

/// Largest `|prolonged_defect|` over all quads.
pub fn prolonged_defect_max(g: PointGenerator, grid: &Grid, prm: &LatticeParams) -> Result<f64> {
    if grid.n_cols() < 2 || grid.m_rows() < 2 {
        return Err(Error::WindowTooSmall("defect sweep needs a 2x2 window".into()));
    }
    let mut worst = 0.0f64;
    for cell in grid.quads() {
        worst = worst.max(prolonged_defect(g, cell, grid, prm)?.abs());
    }
    Ok(worst)
}

/// `(exp(s) - 1)/s` with the removable singularity filled in.
fn phi(s: f64) -> f64 {
    if s.abs() < 1e-12 {
        1.0 + 0.5 * s
    } else {
        s.exp_m1() / s
    }
}

/// Finite point transformation `exp(e1 X1 + e2 X2 + e3 X3)` applied to a
/// field. With `s = e3 sigma` the closed form is
/// `u ~> exp(s) u + phi(s) (e1 + e2 sigma - e3 sigma (p n + q m))`.
pub fn apply_point_transform(
    grid: &Grid,
    prm: &LatticeParams,
    e1: f64,
    e2: f64,
    e3: f64,
) -> Grid {
    Grid::from_fn(grid.n0(), grid.m0(), grid.n_cols(), grid.m_rows(), |n, m| {
        let sg = sigma(n, m);
        let s = e3 * sg;
        let inhom = e1 + e2 * sg - e3 * sg * (prm.p * n as f64 + prm.q * m as f64);
        s.exp() * grid.u(n, m) + phi(s) * inhom
    })
}

/// Structure constants of the point algebra: returns the characteristic of
/// `[a, b]` at a site, computed from `phi_a du(phi_b) - phi_b du(phi_a)`
/// by central differences in `u`.
pub fn bracket_char_numeric(
    a: PointGenerator,
    b: PointGenerator,
    n: i64,
    m: i64,
    u: f64,
    prm: &LatticeParams,
) -> f64 {
    let h = 1e-6 * (1.0 + u.abs());
    let du = |g: PointGenerator| {
        (point_char(g, n, m, u + h, prm) - point_char(g, n, m, u - h, prm)) / (2.0 * h)
    };
    point_char(a, n, m, u, prm) * du(b) - point_char(b, n, m, u, prm) * du(a)
}

/// Expected bracket: `[X1,X2] = 0`, `[X1,X3] = X2`, `[X2,X3] = X1`.
pub fn bracket_expected(
    a: PointGenerator,
    b: PointGenerator,
    n: i64,
    m: i64,
    u: f64,
    prm: &LatticeParams,
) -> Option<f64> {
    use PointGenerator::*;
    match (a, b) {
        (X1, X2) | (X2, X1) => Some(0.0),
        (X1, X3) => Some(point_char(X2, n, m, u, prm)),
        (X3, X1) => Some(-point_char(X2, n, m, u, prm)),
        (X2, X3) => Some(point_char(X1, n, m, u, prm)),
        (X3, X2) => Some(-point_char(X1, n, m, u, prm)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscreteSymmetry {
    /// Transpose the lattice, exchanging `p` and `q`.
    SwapNm,
    /// Reverse the n direction around the window midpoint, `p -> -p`.
    ReflectN,
    /// Reverse the m direction around the window midpoint, `q -> -q`.
    ReflectM,
}

/// Applies a discrete symmetry, returning the transformed field and the
/// parameters under which it again solves the quad equation.
pub fn apply_discrete_symmetry(
    grid: &Grid,
    prm: &LatticeParams,
    which: DiscreteSymmetry,
) -> Result<(Grid, LatticeParams)> {
    match which {
        DiscreteSymmetry::SwapNm => {
            let g = Grid::from_fn(grid.m0(), grid.n0(), grid.m_rows(), grid.n_cols(), |n, m| {
                grid.u(m, n)
            });
            Ok((g, prm.swapped()))
        }
        DiscreteSymmetry::ReflectN => {
            let c = grid.n0() + grid.n_max() + 1;
            let g = Grid::from_fn(
                grid.n0() + 1,
                grid.m0(),
                grid.n_cols(),
                grid.m_rows(),
                |n, m| grid.u(c - n, m),
            );
            Ok((g, LatticeParams::new(-prm.p, prm.q)?))
        }
        DiscreteSymmetry::ReflectM => {
            let c = grid.m0() + grid.m_max() + 1;
            let g = Grid::from_fn(
                grid.n0(),
                grid.m0() + 1,
                grid.n_cols(),
                grid.m_rows(),
                |n, m| grid.u(n, c - m),
            );
            Ok((g, LatticeParams::new(prm.p, -prm.q)?))
        }
    }
}
