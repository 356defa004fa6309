//! Spectral structure: the 2x2 Lax pair, its scalar second-order form, and
//! reflectionless inverse-scattering reconstruction.
//!
//! The scalar recursions multiply wave functions that grow geometrically,
//! so they are propagated as (sign, log magnitude) pairs and every identity
//! is checked after normalising by its largest term.

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::LatticeParams;
use crate::soliton::{log_f, soliton_value, SolitonSpec};

/// Shift matrix in n: `psi(n+1,m) = L psi(n,m)` with spectral parameter
/// entering through `h2`.
pub fn lax_l(n: i64, m: i64, grid: &Grid, prm: &LatticeParams, h2: f64) -> Result<Matrix2<f64>> {
    let u00 = grid.at(n, m)?;
    let u10 = grid.at(n + 1, m)?;
    Ok(Matrix2::new(
        prm.p - u10,
        1.0,
        h2 - prm.p * prm.p + (prm.p + u00) * (prm.p - u10),
        prm.p + u00,
    ))
}

/// Shift matrix in m, the mirror of `lax_l`.
pub fn lax_m(n: i64, m: i64, grid: &Grid, prm: &LatticeParams, h2: f64) -> Result<Matrix2<f64>> {
    let u00 = grid.at(n, m)?;
    let u01 = grid.at(n, m + 1)?;
    Ok(Matrix2::new(
        prm.q - u01,
        1.0,
        h2 - prm.q * prm.q + (prm.q + u00) * (prm.q - u01),
        prm.q + u00,
    ))
}

/// Determinants are field-independent: `det L = p^2 - h2`, `det M = q^2 - h2`.
pub fn lax_det_defect(grid: &Grid, prm: &LatticeParams, h2: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in grid.m0()..=grid.m_max() {
        for n in grid.n0()..grid.n_max() {
            let l = lax_l(n, m, grid, prm, h2)?;
            worst = worst.max((l.determinant() - (prm.p * prm.p - h2)).abs());
        }
    }
    for m in grid.m0()..grid.m_max() {
        for n in grid.n0()..=grid.n_max() {
            let mm = lax_m(n, m, grid, prm, h2)?;
            worst = worst.max((mm.determinant() - (prm.q * prm.q - h2)).abs());
        }
    }
    Ok(worst)
}

/// Largest entry of `L(n,m+1) M(n,m) - M(n+1,m) L(n,m)` over all quads;
/// zero exactly when the field solves the quad equation.
pub fn lax_compatibility_defect(grid: &Grid, prm: &LatticeParams, h2: f64) -> Result<f64> {
    if grid.n_cols() < 2 || grid.m_rows() < 2 {
        return Err(Error::WindowTooSmall("compatibility sweep needs a 2x2 window".into()));
    }
    let mut worst = 0.0f64;
    for cell in grid.quads() {
        let (n, m) = (cell.n, cell.m);
        let d = lax_l(n, m + 1, grid, prm, h2)? * lax_m(n, m, grid, prm, h2)?
            - lax_m(n + 1, m, grid, prm, h2)? * lax_l(n, m, grid, prm, h2)?;
        worst = worst.max(d.abs().max());
    }
    Ok(worst)
}

/// Signed log-magnitude scalar: value = `s * exp(l)` with `s` in {-1,0,1}.
#[derive(Debug, Clone, Copy)]
struct LogVal {
    s: f64,
    l: f64,
}

impl LogVal {
    fn zero() -> Self {
        LogVal { s: 0.0, l: f64::NEG_INFINITY }
    }

    fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            LogVal::zero()
        } else {
            LogVal { s: x.signum(), l: x.abs().ln() }
        }
    }

    fn scale(self, c: f64) -> Self {
        if c == 0.0 || self.s == 0.0 {
            LogVal::zero()
        } else {
            LogVal { s: self.s * c.signum(), l: self.l + c.abs().ln() }
        }
    }

    fn add(self, other: LogVal) -> Self {
        if self.s == 0.0 {
            return other;
        }
        if other.s == 0.0 {
            return self;
        }
        let (hi, lo) = if self.l >= other.l { (self, other) } else { (other, self) };
        let r = (lo.l - hi.l).exp();
        let t = if hi.s == lo.s { 1.0 + r } else { 1.0 - r };
        if t == 0.0 {
            LogVal::zero()
        } else {
            LogVal { s: hi.s * t.signum(), l: hi.l + t.abs().ln() }
        }
    }
}

/// Propagates the scalar wave function from two seeds on the bottom row and
/// checks the second-order m-recursion everywhere it is defined. Returns
/// the largest violation, each normalised by the largest of its three terms.
///
/// Row fill: `psi(n+2,m) = (2p - u(n+2,m) + u(n,m)) psi(n+1,m) + (h2 - p^2) psi(n,m)`.
/// Up fill: `psi(n,m+1) = psi(n+1,m) + (q - p + u(n+1,m) - u(n,m+1)) psi(n,m)`.
/// Checked: `psi(n,m+2) = (2q - u(n,m+2) + u(n,m)) psi(n,m+1) + (h2 - q^2) psi(n,m)`.
pub fn scalar_recursion_check(
    grid: &Grid,
    prm: &LatticeParams,
    h2: f64,
    seed: (f64, f64),
) -> Result<f64> {
    if grid.n_cols() < 3 || grid.m_rows() < 3 {
        return Err(Error::WindowTooSmall("scalar check needs a 3x3 window".into()));
    }
    let n0 = grid.n0();
    let m0 = grid.m0();
    let n_cols = grid.n_cols();
    let m_rows = grid.m_rows();

    // rows[j][i] = psi(n0 + i, m0 + j); each row is one shorter than the last
    let mut rows: Vec<Vec<LogVal>> = Vec::with_capacity(m_rows);
    let mut row0 = vec![LogVal::from_f64(seed.0), LogVal::from_f64(seed.1)];
    for i in 2..n_cols {
        let n = n0 + i as i64;
        let a = 2.0 * prm.p - grid.u(n, m0) + grid.u(n - 2, m0);
        let b = h2 - prm.p * prm.p;
        let v = row0[i - 1].scale(a).add(row0[i - 2].scale(b));
        row0.push(v);
    }
    rows.push(row0);
    for j in 1..m_rows {
        let prev = &rows[j - 1];
        if prev.len() < 2 {
            break;
        }
        let m = m0 + j as i64 - 1;
        let mut row = Vec::with_capacity(prev.len() - 1);
        for i in 0..prev.len() - 1 {
            let n = n0 + i as i64;
            let c = prm.q - prm.p + grid.u(n + 1, m) - grid.u(n, m + 1);
            row.push(prev[i + 1].add(prev[i].scale(c)));
        }
        rows.push(row);
    }

    let mut worst = 0.0f64;
    for j in 0..rows.len().saturating_sub(2) {
        let m = m0 + j as i64;
        for i in 0..rows[j + 2].len() {
            let n = n0 + i as i64;
            let t1 = rows[j + 2][i];
            let t2 = rows[j + 1][i].scale(-(2.0 * prm.q - grid.u(n, m + 2) + grid.u(n, m)));
            let t3 = rows[j][i].scale(-(h2 - prm.q * prm.q));
            let lmax = t1.l.max(t2.l).max(t3.l);
            if lmax == f64::NEG_INFINITY {
                continue;
            }
            let v = t1.s * (t1.l - lmax).exp()
                + t2.s * (t2.l - lmax).exp()
                + t3.s * (t3.l - lmax).exp();
            worst = worst.max(v.abs());
        }
    }
    Ok(worst)
}

/// Seed `(1, p + sqrt(h2))` selecting the dominant branch; falls back to
/// `(1, p)` for non-positive `h2`.
pub fn dominant_seed(prm: &LatticeParams, h2: f64) -> (f64, f64) {
    if h2 > 0.0 {
        (1.0, prm.p + h2.sqrt())
    } else {
        (1.0, prm.p)
    }
}

fn plane_factors(spec: &SolitonSpec, prm: &LatticeParams) -> Vec<(f64, f64)> {
    spec.modes
        .iter()
        .map(|mode| {
            let k = mode.kappa0;
            ((prm.p + k) / (prm.p - k), (prm.q + k) / (prm.q - k))
        })
        .collect()
}

/// Reflectionless Jost functions `mu_j(n,m)` for one or two bound states.
///
/// One mode: `mu = 1 / (1 + F)`. Two modes:
/// `mu_j = (1 + ((k_j - k_o)/(k_j + k_o)) F_o) / D` with
/// `D = 1 + F1 + F2 + rho F1 F2`, evaluated with the largest log term
/// factored out.
pub fn jost_mu(spec: &SolitonSpec, n: i64, m: i64, prm: &LatticeParams) -> Result<Vec<f64>> {
    spec.validate(prm)?;
    match spec.modes.len() {
        1 => {
            let l = log_f(&spec.modes[0], n, m, prm);
            let mu = if l > 600.0 {
                0.0
            } else if l < -600.0 {
                1.0
            } else {
                1.0 / (1.0 + l.exp())
            };
            Ok(vec![mu])
        }
        _ => {
            let (k1, k2) = (spec.modes[0].kappa0, spec.modes[1].kappa0);
            let ln_rho = 2.0 * ((k2 - k1) / (k2 + k1)).abs().ln();
            let l1 = log_f(&spec.modes[0], n, m, prm);
            let l2 = log_f(&spec.modes[1], n, m, prm);
            let l12 = l1 + l2 + ln_rho;
            let lmax = 0f64.max(l1).max(l2).max(l12);
            let e = |l: f64| (l - lmax).exp();
            let den = e(0.0) + e(l1) + e(l2) + e(l12);
            let g1 = (k1 - k2) / (k1 + k2);
            let g2 = (k2 - k1) / (k2 + k1);
            Ok(vec![
                (e(0.0) + g1 * e(l2)) / den,
                (e(0.0) + g2 * e(l1)) / den,
            ])
        }
    }
}

/// Denominator `D(n,m)` of the Jost functions; strictly positive, so the
/// reconstruction never hits a pole.
pub fn jost_denominator(spec: &SolitonSpec, n: i64, m: i64, prm: &LatticeParams) -> Result<f64> {
    spec.validate(prm)?;
    let l1 = log_f(&spec.modes[0], n, m, prm);
    match spec.modes.len() {
        1 => Ok(1.0 + l1.exp()),
        _ => {
            let (k1, k2) = (spec.modes[0].kappa0, spec.modes[1].kappa0);
            let rho = ((k2 - k1) / (k2 + k1)).powi(2);
            let l2 = log_f(&spec.modes[1], n, m, prm);
            Ok(1.0 + l1.exp() + l2.exp() + rho * (l1 + l2).exp())
        }
    }
}

/// Raw inverse-scattering sum for the double-shift difference
/// `eta(n,m) = u(n,m) - u(n+2,m)`:
/// `sum_j (-c_j Y_j^m) (mu_j(n+2,m) X_j^2 - mu_j(n,m)) X_j^n`, scaled by
/// `calib`.
pub fn reconstruct_eta(
    spec: &SolitonSpec,
    n: i64,
    m: i64,
    prm: &LatticeParams,
    calib: f64,
) -> Result<f64> {
    spec.validate(prm)?;
    let mu_n = jost_mu(spec, n, m, prm)?;
    let mu_n2 = jost_mu(spec, n + 2, m, prm)?;
    let factors = plane_factors(spec, prm);
    let mut acc = 0.0;
    for (j, mode) in spec.modes.iter().enumerate() {
        let (x, y) = factors[j];
        let expo = n as f64 * x.ln() + m as f64 * y.ln();
        if expo > 700.0 {
            return Err(Error::Overflow(format!(
                "plane-wave exponent {expo:.1} at ({n},{m})"
            )));
        }
        acc += -mode.c0 * expo.exp() * (mu_n2[j] * x * x - mu_n[j]);
    }
    Ok(calib * acc)
}

/// Fixes the single overall scale of the reconstruction against the closed
/// form at one reference site.
pub fn calibrate_reconstruction(
    spec: &SolitonSpec,
    prm: &LatticeParams,
    reference: (i64, i64),
) -> Result<f64> {
    let (n, m) = reference;
    let raw = reconstruct_eta(spec, n, m, prm, 1.0)?;
    if raw.abs() < 1e-250 {
        return Err(Error::InvalidSpec(format!(
            "reconstruction vanishes at reference site ({n},{m})"
        )));
    }
    let truth =
        soliton_value(n, m, spec, prm)? - soliton_value(n + 2, m, spec, prm)?;
    Ok(truth / raw)
}

/// Evolution factor `(q + kappa0)/(q - kappa0)` advancing the reflection
/// data by one step in m.
pub fn reflection_evolution_factor(kappa0: f64, prm: &LatticeParams) -> Result<f64> {
    if (prm.q.abs() - kappa0).abs() < 1e-12 * (1.0 + prm.q.abs()) {
        return Err(Error::PoleAtQ);
    }
    Ok((prm.q + kappa0) / (prm.q - kappa0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::soliton::soliton_grid;

    fn prm() -> LatticeParams {
        LatticeParams::new(2.0, 1.0).unwrap()
    }

    fn soliton() -> Grid {
        soliton_grid(&SolitonSpec::one(0.5, 1.0), &prm(), -12, -12, 25, 25).unwrap()
    }

    #[test]
    fn determinants_are_field_independent() {
        let prm = prm();
        let g = soliton();
        for h2 in [-1.0, 0.0, 1.0, 5.0] {
            assert!(lax_det_defect(&g, &prm, h2).unwrap() < 1e-12);
        }
    }

    #[test]
    fn compatibility_vanishes_on_shell_only() {
        let prm = prm();
        let g = soliton();
        assert!(lax_compatibility_defect(&g, &prm, 1.0).unwrap() < 1e-11);

        let mut off = g.clone();
        off.set(0, 0, off.u(0, 0) + 0.1);
        assert!(lax_compatibility_defect(&off, &prm, 1.0).unwrap() > 1e-3);
    }

    #[test]
    fn scalar_recursion_on_constant_background() {
        let prm = prm();
        let g = Grid::from_fn(0, 0, 20, 10, |_, _| 0.0);
        // exact exponential solution psi = (p + kappa)^n (q + kappa)^m at h2 = kappa^2
        let kappa = 0.5f64;
        let v = scalar_recursion_check(&g, &prm, kappa * kappa, (1.0, prm.p + kappa)).unwrap();
        assert!(v < 1e-12, "violation {v}");
    }

    #[test]
    fn scalar_recursion_on_soliton() {
        // each upward fill amplifies rounding by roughly the ratio of the
        // two plane-wave branches, so the check is kept to ten rows
        let prm = prm();
        let g = soliton_grid(&SolitonSpec::one(0.5, 1.0), &prm, -12, -5, 25, 10).unwrap();
        for h2 in [1.0, 5.0] {
            let v = scalar_recursion_check(&g, &prm, h2, dominant_seed(&prm, h2)).unwrap();
            assert!(v < 1e-9, "h2={h2}: violation {v}");
        }
    }

    #[test]
    fn jost_reconstructs_one_soliton() {
        let prm = prm();
        let spec = SolitonSpec::one(0.5, 1.0);
        let calib = calibrate_reconstruction(&spec, &prm, (0, 0)).unwrap();
        assert!((calib - 1.0).abs() < 1e-10, "calibration {calib}");
        let mut worst = 0.0f64;
        for m in -7..7 {
            for n in -7..7 {
                let rec = reconstruct_eta(&spec, n, m, &prm, calib).unwrap();
                let truth = soliton_value(n, m, &spec, &prm).unwrap()
                    - soliton_value(n + 2, m, &spec, &prm).unwrap();
                worst = worst.max((rec - truth).abs());
            }
        }
        assert!(worst < 1e-10, "worst {worst}");
    }

    #[test]
    fn jost_reconstructs_two_soliton() {
        let prm = prm();
        let spec = SolitonSpec::two(0.5, 1.0, 0.8, 2.0);
        let calib = calibrate_reconstruction(&spec, &prm, (0, 0)).unwrap();
        let mut worst = 0.0f64;
        for m in -6..6 {
            for n in -6..6 {
                let rec = reconstruct_eta(&spec, n, m, &prm, calib).unwrap();
                let truth = soliton_value(n, m, &spec, &prm).unwrap()
                    - soliton_value(n + 2, m, &spec, &prm).unwrap();
                worst = worst.max((rec - truth).abs());
            }
        }
        assert!(worst < 1e-7, "worst {worst}");
    }

    #[test]
    fn jost_denominator_stays_positive() {
        let prm = prm();
        let spec = SolitonSpec::two(0.5, 1.0, 0.8, 2.0);
        for m in -10..10 {
            for n in -10..10 {
                assert!(jost_denominator(&spec, n, m, &prm).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn reflection_factor_and_pole() {
        let prm = prm();
        let f = reflection_evolution_factor(0.5, &prm).unwrap();
        assert!((f - 3.0).abs() < 1e-15);
        assert_eq!(reflection_evolution_factor(1.0, &prm).unwrap_err().code(), "POLE_AT_Q");
    }
}
