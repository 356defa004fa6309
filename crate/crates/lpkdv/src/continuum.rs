//! Skew continuum limit along k = n + m.
//!
//! With `q = p - delta` and `tau = delta * m`, the field collapses onto
//! differential-difference equations in `tau`:
//!
//!   v:        dv_k/dtau = 2p / (2p - v_{k+1} + v_{k-1}) - 1
//!   q_pot:    dq_k/dtau = 2p (1/q_{k-1} - 1/q_{k+1})
//!   dkdv:     ds_k/dtau' = s_k^2 (s_{k+1} - s_{k-1})
//!   volterra: da_k/dtau' = a_k (a_{k+1} - a_{k-1})
//!
//! linked by the Miura maps `s = 2p/q` and `a_k = s_k s_{k+1}`, with the
//! dkdv/volterra clock running at `tau' = tau / (2p)`.

use crate::error::{Error, Result};
use crate::params::LatticeParams;

const DEN_TOL: f64 = 1e-12;

/// A sequence `values[i]` at sites `k0 + i`, tagged with its time.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumState {
    pub k0: i64,
    pub tau: f64,
    pub values: Vec<f64>,
}

impl ContinuumState {
    pub fn new(k0: i64, tau: f64, values: Vec<f64>) -> Self {
        ContinuumState { k0, tau, values }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: &mut W, p: f64) -> Result<()> {
        writeln!(w, "# k0={} tau={:.16e} p={:.16e}", self.k0, self.tau, p)?;
        for v in &self.values {
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DdeKind {
    V,
    QPot,
    DKdV,
    Volterra,
}

impl std::str::FromStr for DdeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "v" => Ok(DdeKind::V),
            "q" | "q_pot" => Ok(DdeKind::QPot),
            "dkdv" => Ok(DdeKind::DKdV),
            "volterra" => Ok(DdeKind::Volterra),
            other => Err(Error::Parse(format!("unknown flow `{other}`"))),
        }
    }
}

/// Right-hand side on interior sites; output `out[i]` belongs to site
/// `k0 + 1 + i` (one site is lost per edge).
pub fn rhs_eval(kind: DdeKind, vals: &[f64], k0: i64, p: f64) -> Result<Vec<f64>> {
    if vals.len() < 3 {
        return Err(Error::WindowTooSmall(format!(
            "rhs needs 3 sites, got {}",
            vals.len()
        )));
    }
    let l = vals.len();
    let mut out = Vec::with_capacity(l - 2);
    for i in 1..l - 1 {
        let k = k0 + i as i64;
        let v = match kind {
            DdeKind::V => {
                let den = 2.0 * p - vals[i + 1] + vals[i - 1];
                if den.abs() < DEN_TOL {
                    return Err(Error::DivergentDenominator { n: k, m: 0 });
                }
                2.0 * p / den - 1.0
            }
            DdeKind::QPot => {
                if vals[i - 1].abs() < DEN_TOL || vals[i + 1].abs() < DEN_TOL {
                    return Err(Error::DivergentDenominator { n: k, m: 0 });
                }
                2.0 * p * (1.0 / vals[i - 1] - 1.0 / vals[i + 1])
            }
            DdeKind::DKdV => vals[i] * vals[i] * (vals[i + 1] - vals[i - 1]),
            DdeKind::Volterra => vals[i] * (vals[i + 1] - vals[i - 1]),
        };
        out.push(v);
    }
    Ok(out)
}

/// Classical RK4 on a shrinking window: each step consumes four sites per
/// edge, so no artificial boundary condition ever enters the interior.
pub fn integrate_dde(
    kind: DdeKind,
    state: &ContinuumState,
    p: f64,
    tau_span: f64,
    steps: usize,
) -> Result<ContinuumState> {
    if steps == 0 || !tau_span.is_finite() {
        return Err(Error::InvalidParams(format!(
            "integration needs steps >= 1 and finite tau, got {steps}, {tau_span}"
        )));
    }
    if state.values.len() < 8 * steps + 3 {
        return Err(Error::WindowTooSmall(format!(
            "{} sites cannot support {steps} shrinking steps",
            state.values.len()
        )));
    }
    let h = tau_span / steps as f64;
    let mut v = state.values.clone();
    let mut k0 = state.k0;
    for _ in 0..steps {
        let l = v.len();
        let k1 = rhs_eval(kind, &v, k0, p)?;
        let s2: Vec<f64> = (1..l - 1).map(|i| v[i] + 0.5 * h * k1[i - 1]).collect();
        let k2 = rhs_eval(kind, &s2, k0 + 1, p)?;
        let s3: Vec<f64> = (2..l - 2).map(|i| v[i] + 0.5 * h * k2[i - 2]).collect();
        let k3 = rhs_eval(kind, &s3, k0 + 2, p)?;
        let s4: Vec<f64> = (3..l - 3).map(|i| v[i] + h * k3[i - 3]).collect();
        let k4 = rhs_eval(kind, &s4, k0 + 3, p)?;
        v = (4..l - 4)
            .map(|i| {
                v[i] + (h / 6.0)
                    * (k1[i - 1] + 2.0 * k2[i - 2] + 2.0 * k3[i - 3] + k4[i - 4])
            })
            .collect();
        k0 += 4;
    }
    Ok(ContinuumState::new(k0, state.tau + tau_span, v))
}

/// Miura map `s_k = 2p / q_k`.
pub fn miura_s(q: &[f64], k0: i64, p: f64) -> Result<Vec<f64>> {
    q.iter()
        .enumerate()
        .map(|(i, &qk)| {
            if qk.abs() < DEN_TOL {
                Err(Error::DivergentDenominator { n: k0 + i as i64, m: 0 })
            } else {
                Ok(2.0 * p / qk)
            }
        })
        .collect()
}

/// Miura map `a_k = s_k s_{k+1}`; output is aligned to `k0 + 1`.
pub fn miura_a(s: &[f64]) -> Vec<f64> {
    s.windows(2).map(|w| w[0] * w[1]).collect()
}

/// Composite `q -> a` in one step, `a_k = 4p^2 / (q_k q_{k+1})`.
pub fn miura_q_to_a(q: &[f64], k0: i64, p: f64) -> Result<Vec<f64>> {
    Ok(miura_a(&miura_s(q, k0, p)?))
}

#[derive(Debug, Clone, Copy)]
pub struct Calibration {
    /// Clock ratio minimising the dkdv/q mismatch, found by golden search.
    pub fitted: f64,
    /// The analytic value `2p`.
    pub expected: f64,
    /// Mismatch when integrating with the analytic constant.
    pub mismatch_at_expected: f64,
}

fn dkdv_vs_q_mismatch(
    q0: &ContinuumState,
    p: f64,
    tau: f64,
    steps: usize,
    kappa: f64,
) -> Result<f64> {
    let q_tau = integrate_dde(DdeKind::QPot, q0, p, tau, steps)?;
    let target = miura_s(&q_tau.values, q_tau.k0, p)?;
    let s0 = ContinuumState::new(q0.k0, 0.0, miura_s(&q0.values, q0.k0, p)?);
    let direct = integrate_dde(DdeKind::DKdV, &s0, p, tau / kappa, steps)?;
    debug_assert_eq!(direct.k0, q_tau.k0);
    let worst = direct
        .values
        .iter()
        .zip(&target)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    Ok(worst)
}

/// Measures the clock ratio between the q_pot flow and the dkdv flow of its
/// Miura image: integrates both and golden-searches the ratio that matches.
pub fn calibrate_time_constant(
    q0: &ContinuumState,
    p: f64,
    tau: f64,
    steps: usize,
) -> Result<Calibration> {
    let expected = 2.0 * p;
    let mismatch_at_expected = dkdv_vs_q_mismatch(q0, p, tau, steps, expected)?;
    let mut lo = p;
    let mut hi = 3.0 * p;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = dkdv_vs_q_mismatch(q0, p, tau, steps, x1)?;
    let mut f2 = dkdv_vs_q_mismatch(q0, p, tau, steps, x2)?;
    for _ in 0..60 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = dkdv_vs_q_mismatch(q0, p, tau, steps, x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = dkdv_vs_q_mismatch(q0, p, tau, steps, x2)?;
        }
    }
    Ok(Calibration {
        fitted: 0.5 * (lo + hi),
        expected,
        mismatch_at_expected,
    })
}

/// Largest disagreement between evolving `a` directly under volterra and
/// mapping the evolved `q` through both Miura maps.
pub fn volterra_consistency(q0: &ContinuumState, p: f64, tau: f64, steps: usize) -> Result<f64> {
    let a0 = ContinuumState::new(q0.k0 + 1, 0.0, miura_q_to_a(&q0.values, q0.k0, p)?);
    let direct = integrate_dde(DdeKind::Volterra, &a0, p, tau / (2.0 * p), steps)?;
    let q_tau = integrate_dde(DdeKind::QPot, q0, p, tau, steps)?;
    let mapped = miura_q_to_a(&q_tau.values, q_tau.k0, p)?;
    debug_assert_eq!(direct.k0, q_tau.k0 + 1);
    Ok(direct
        .values
        .iter()
        .zip(&mapped)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs())))
}

/// One upward row of the quad equation solved for the NW corner, marching
/// right to left from a vacuum seed. For `q = p - delta` the gain per cell
/// is `(p-q)/(p+q)`, a contraction, where the left-to-right march would
/// amplify by its inverse.
pub fn evolve_row_rl(prev: &[f64], seed_right: f64, prm: &LatticeParams, row_m: i64) -> Result<Vec<f64>> {
    let l = prev.len();
    let mut out = vec![0.0; l];
    out[l - 1] = seed_right;
    for i in (0..l - 1).rev() {
        let b = prm.p + prm.q - out[i + 1] + prev[i];
        if b.abs() < DEN_TOL {
            return Err(Error::SingularQuad { n: i as i64, m: row_m });
        }
        out[i] = prev[i + 1] - (prm.p - prm.q) + prm.c() / b;
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct OrderMeasurement {
    pub deltas: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of log error against log delta; `None` when every
    /// error is at rounding level (exact match).
    pub slope: Option<f64>,
}

/// Compares full lattice evolution at `q = p - delta` against the skew
/// continuum flow for a decaying initial profile, for each `delta`.
/// The lattice marches `round(tau/delta)` rows and is read along
/// `k = n + m`; errors are measured on `[k_min + 20, k_max - 20]`.
pub fn continuum_limit_order(
    profile: &dyn Fn(f64) -> f64,
    p: f64,
    deltas: &[f64],
    tau_target: f64,
    k_min: i64,
    k_max: i64,
) -> Result<OrderMeasurement> {
    if deltas.is_empty() || k_max - k_min < 41 {
        return Err(Error::InvalidParams(
            "order measurement needs deltas and a window of at least 42 sites".into(),
        ));
    }
    let dde_steps = 100usize;
    let pad = 4 * dde_steps as i64;
    let v0: Vec<f64> = (k_min - pad..=k_max + pad).map(|k| profile(k as f64)).collect();
    let reference = integrate_dde(
        DdeKind::V,
        &ContinuumState::new(k_min - pad, 0.0, v0),
        p,
        tau_target,
        dde_steps,
    )?;

    let mut errors = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let prm = LatticeParams::new(p, p - delta)?;
        let rows = (tau_target / delta).round() as i64;
        if rows < 1 {
            return Err(Error::InvalidParams(format!(
                "delta {delta} exceeds tau {tau_target}"
            )));
        }
        let n_lo = k_min - rows;
        let mut row: Vec<f64> = (n_lo..=k_max).map(|n| profile(n as f64)).collect();
        for j in 0..rows {
            row = evolve_row_rl(&row, profile((k_max + j + 1) as f64), &prm, j + 1)?;
        }
        let mut err = 0.0f64;
        for k in k_min + 20..=k_max - 20 {
            let lattice = row[(k - rows - n_lo) as usize];
            let dde = reference.values[(k - reference.k0) as usize];
            err = err.max((lattice - dde).abs());
        }
        errors.push(err);
    }

    let slope = if errors.iter().all(|e| *e < 1e-14) {
        None
    } else {
        let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
        let ys: Vec<f64> = errors.iter().map(|e| e.max(1e-300).ln()).collect();
        let xm = xs.iter().sum::<f64>() / xs.len() as f64;
        let ym = ys.iter().sum::<f64>() / ys.len() as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
        Some(num / den)
    };
    Ok(OrderMeasurement {
        deltas: deltas.to_vec(),
        errors,
        slope,
    })
}
