//! Generalized symmetries of the quad equation.
//!
//! Characteristics are written through the reciprocal potentials
//! `qpot(n,m) = 2p - u(n+2,m) + u(n,m)` and
//! `ppot(n,m) = 2q - u(n,m+2) + u(n,m)`,
//! which tend to `2p` / `2q` on decaying backgrounds. The hierarchy label k
//! counts applications of the inverse recursion operator to the seed flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Grid};
use crate::lattice::residual_gradient;
use crate::params::LatticeParams;
use crate::point_sym::{point_char, PointGenerator};

/// Decay requirement at the +n edge for the inverse recursion.
pub const DECAY_TOL: f64 = 1e-10;

const POT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZVariant {
    Ms,
    Z1,
    Z2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    #[serde(rename = "char")]
    pub charac: Characteristic,
}

/// A symmetry characteristic, evaluable at a lattice site given the
/// surrounding field values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Characteristic {
    /// Isospectral n-hierarchy member; k = 3 exists only through the
    /// inverse recursion (`generated_next_row`), not as a site formula.
    Xn { k: u8 },
    /// Mirror hierarchy in the m direction.
    Xm { k: u8 },
    /// n-weighted seed `n / qpot(n-1,m)`.
    Yn1,
    /// m-weighted seed `m / ppot(n,m-1)`.
    Ym1,
    /// Linear background characteristic `u - p n`.
    Y0n,
    /// Linear background characteristic `u - q m`.
    Y0m,
    /// Second-order n-weighted characteristic.
    Sigma0,
    /// Master-symmetry family in n with weight `w`.
    Zn { w: f64, variant: ZVariant },
    /// Master-symmetry family in m with weight `w`.
    Zm { w: f64, variant: ZVariant },
    /// Point characteristic lifted into this algebra.
    #[serde(rename = "point")]
    Point { generator: PointGenerator },
    #[serde(rename = "combined")]
    Combined { terms: Vec<Term> },
}

impl Characteristic {
    /// Half-width of the field stencil in each direction.
    pub fn stencil_radius(&self) -> (i64, i64) {
        match self {
            Characteristic::Xn { k } => (*k as i64 + 1, 0),
            Characteristic::Xm { k } => (0, *k as i64 + 1),
            Characteristic::Yn1 | Characteristic::Sigma0 | Characteristic::Zn { .. } => (1, 0),
            Characteristic::Ym1 | Characteristic::Zm { .. } => (0, 1),
            Characteristic::Y0n | Characteristic::Y0m | Characteristic::Point { .. } => (0, 0),
            Characteristic::Combined { terms } => terms.iter().fold((0, 0), |(an, am), t| {
                let (bn, bm) = t.charac.stencil_radius();
                (an.max(bn), am.max(bm))
            }),
        }
    }
}

fn qpot(grid: &Grid, prm: &LatticeParams, n: i64, m: i64) -> Result<f64> {
    let v = 2.0 * prm.p - grid.at(n + 2, m)? + grid.at(n, m)?;
    if v.abs() < POT_TOL {
        return Err(Error::DivergentDenominator { n, m });
    }
    Ok(v)
}

fn ppot(grid: &Grid, prm: &LatticeParams, n: i64, m: i64) -> Result<f64> {
    let v = 2.0 * prm.q - grid.at(n, m + 2)? + grid.at(n, m)?;
    if v.abs() < POT_TOL {
        return Err(Error::DivergentDenominator { n, m });
    }
    Ok(v)
}

fn pow_checked(base: f64, w: f64) -> Result<f64> {
    let v = base.powf(w);
    if !v.is_finite() {
        return Err(Error::InvalidW(w));
    }
    Ok(v)
}

/// Evaluates a characteristic at site `(n, m)`.
pub fn char_eval(
    c: &Characteristic,
    n: i64,
    m: i64,
    grid: &Grid,
    prm: &LatticeParams,
) -> Result<f64> {
    let nf = n as f64;
    let mf = m as f64;
    match c {
        Characteristic::Xn { k: 0 } => {
            Ok(-1.0 / qpot(grid, prm, n - 1, m)? + 1.0 / (2.0 * prm.p))
        }
        Characteristic::Xn { k: 1 } => {
            let qm1 = qpot(grid, prm, n - 1, m)?;
            let q0 = qpot(grid, prm, n, m)?;
            let qm2 = qpot(grid, prm, n - 2, m)?;
            Ok((1.0 / (qm1 * qm1)) * (1.0 / q0 + 1.0 / qm2) - 1.0 / (4.0 * prm.p.powi(3)))
        }
        Characteristic::Xn { k: 2 } => {
            let qm3 = qpot(grid, prm, n - 3, m)?;
            let qm2 = qpot(grid, prm, n - 2, m)?;
            let qm1 = qpot(grid, prm, n - 1, m)?;
            let q0 = qpot(grid, prm, n, m)?;
            let qp1 = qpot(grid, prm, n + 1, m)?;
            let left = (1.0 / qm2)
                * (1.0 / (qm2 * qm3) + 1.0 / (qm2 * qm1) + 1.0 / (q0 * qm1));
            let right = (1.0 / q0)
                * (1.0 / (q0 * qp1) + 1.0 / (qm1 * q0) + 1.0 / (qm1 * qm2));
            Ok(-(1.0 / (qm1 * qm1)) * (left + right) + 3.0 / (16.0 * prm.p.powi(5)))
        }
        Characteristic::Xn { k } => Err(Error::InvalidSpec(format!(
            "Xn({k}) has no site formula; use the inverse recursion"
        ))),
        Characteristic::Xm { k: 0 } => {
            Ok(-1.0 / ppot(grid, prm, n, m - 1)? + 1.0 / (2.0 * prm.q))
        }
        Characteristic::Xm { k: 1 } => {
            let pm1 = ppot(grid, prm, n, m - 1)?;
            let p0 = ppot(grid, prm, n, m)?;
            let pm2 = ppot(grid, prm, n, m - 2)?;
            Ok((1.0 / (pm1 * pm1)) * (1.0 / p0 + 1.0 / pm2) - 1.0 / (4.0 * prm.q.powi(3)))
        }
        Characteristic::Xm { k: 2 } => {
            let pm3 = ppot(grid, prm, n, m - 3)?;
            let pm2 = ppot(grid, prm, n, m - 2)?;
            let pm1 = ppot(grid, prm, n, m - 1)?;
            let p0 = ppot(grid, prm, n, m)?;
            let pp1 = ppot(grid, prm, n, m + 1)?;
            let left = (1.0 / pm2)
                * (1.0 / (pm2 * pm3) + 1.0 / (pm2 * pm1) + 1.0 / (p0 * pm1));
            let right = (1.0 / p0)
                * (1.0 / (p0 * pp1) + 1.0 / (pm1 * p0) + 1.0 / (pm1 * pm2));
            Ok(-(1.0 / (pm1 * pm1)) * (left + right) + 3.0 / (16.0 * prm.q.powi(5)))
        }
        Characteristic::Xm { k } => Err(Error::InvalidSpec(format!(
            "Xm({k}) has no site formula; use the inverse recursion"
        ))),
        Characteristic::Yn1 => Ok(nf / qpot(grid, prm, n - 1, m)?),
        Characteristic::Ym1 => Ok(mf / ppot(grid, prm, n, m - 1)?),
        Characteristic::Y0n => Ok(grid.at(n, m)? - prm.p * nf),
        Characteristic::Y0m => Ok(grid.at(n, m)? - prm.q * mf),
        Characteristic::Sigma0 => {
            let u = grid.at(n, m)?;
            Ok((2.0 * nf - u - 1.0) / (2.0 * prm.p * prm.p)
                + (2.0 * nf - 1.0) / qpot(grid, prm, n - 1, m)?)
        }
        Characteristic::Zn { w, variant } => {
            let u = grid.at(n, m)?;
            let qv = qpot(grid, prm, n - 1, m)?;
            let pw = pow_checked(prm.p, *w)?;
            let qw = pow_checked(prm.q, *w)?;
            match variant {
                ZVariant::Ms => {
                    let c2 = prm.c();
                    if c2.abs() < POT_TOL {
                        return Err(Error::InvalidParams(
                            "master symmetry needs p^2 != q^2".into(),
                        ));
                    }
                    Ok(nf * pw / qv - ((pw - qw) / (2.0 * c2)) * (prm.p * nf - u / 2.0))
                }
                ZVariant::Z1 => {
                    let d = pw - qw;
                    if d.abs() < POT_TOL * (1.0 + pw.abs()) {
                        return Err(Error::InvalidW(*w));
                    }
                    Ok(nf * (pw + qw) / qv - u / d)
                }
                ZVariant::Z2 => {
                    let d = pw - qw;
                    if d.abs() < POT_TOL * (1.0 + pw.abs()) {
                        return Err(Error::InvalidW(*w));
                    }
                    Ok(nf * pow_checked(prm.p * prm.q, *w)? / qv - u / d)
                }
            }
        }
        Characteristic::Zm { w, variant } => {
            let u = grid.at(n, m)?;
            let pv = ppot(grid, prm, n, m - 1)?;
            let pw = pow_checked(prm.p, *w)?;
            let qw = pow_checked(prm.q, *w)?;
            match variant {
                ZVariant::Ms => {
                    let c2 = prm.c();
                    if c2.abs() < POT_TOL {
                        return Err(Error::InvalidParams(
                            "master symmetry needs p^2 != q^2".into(),
                        ));
                    }
                    Ok(mf * qw / pv - ((qw - pw) / (-2.0 * c2)) * (prm.q * mf - u / 2.0))
                }
                ZVariant::Z1 => {
                    let d = qw - pw;
                    if d.abs() < POT_TOL * (1.0 + qw.abs()) {
                        return Err(Error::InvalidW(*w));
                    }
                    Ok(mf * (pw + qw) / pv - u / d)
                }
                ZVariant::Z2 => {
                    let d = qw - pw;
                    if d.abs() < POT_TOL * (1.0 + qw.abs()) {
                        return Err(Error::InvalidW(*w));
                    }
                    Ok(mf * pow_checked(prm.p * prm.q, *w)? / pv - u / d)
                }
            }
        }
        Characteristic::Point { generator } => {
            Ok(point_char(*generator, n, m, grid.at(n, m)?, prm))
        }
        Characteristic::Combined { terms } => {
            let mut acc = 0.0;
            for t in terms {
                acc += t.coef * char_eval(&t.charac, n, m, grid, prm)?;
            }
            Ok(acc)
        }
    }
}

/// Gradient of the quad residual contracted with the characteristic at the
/// four corners of `cell`; paired as in `point_sym::prolonged_defect`.
pub fn prolongation_sum(
    c: &Characteristic,
    cell: Cell,
    grid: &Grid,
    prm: &LatticeParams,
) -> Result<f64> {
    let Cell { n, m } = cell;
    let d = residual_gradient(
        prm,
        grid.at(n, m)?,
        grid.at(n + 1, m)?,
        grid.at(n, m + 1)?,
        grid.at(n + 1, m + 1)?,
    );
    let c00 = char_eval(c, n, m, grid, prm)?;
    let c10 = char_eval(c, n + 1, m, grid, prm)?;
    let c01 = char_eval(c, n, m + 1, grid, prm)?;
    let c11 = char_eval(c, n + 1, m + 1, grid, prm)?;
    Ok((d[0] * c00 + d[3] * c11) + (d[1] * c10 + d[2] * c01))
}

fn admissible_quads(c: &Characteristic, grid: &Grid) -> Result<Vec<Cell>> {
    let (rn, rm) = c.stencil_radius();
    let n_lo = grid.n0() + rn;
    let n_hi = grid.n_max() - 1 - rn;
    let m_lo = grid.m0() + rm;
    let m_hi = grid.m_max() - 1 - rm;
    if n_lo > n_hi || m_lo > m_hi {
        return Err(Error::WindowTooSmall(format!(
            "no quad admits stencil radius ({rn},{rm}) inside {}x{}",
            grid.n_cols(),
            grid.m_rows()
        )));
    }
    Ok((m_lo..=m_hi)
        .flat_map(|m| (n_lo..=n_hi).map(move |n| Cell { n, m }))
        .collect())
}

/// Largest `|prolongation_sum|` over all quads whose corner stencils fit.
pub fn symmetry_defect(c: &Characteristic, grid: &Grid, prm: &LatticeParams) -> Result<f64> {
    let mut worst = 0.0f64;
    for cell in admissible_quads(c, grid)? {
        worst = worst.max(prolongation_sum(c, cell, grid, prm)?.abs());
    }
    Ok(worst)
}

/// Outcome of pairing an n-family member with its m-family mirror.
#[derive(Debug, Clone)]
pub struct MasterCombination {
    /// `zn - ratio * zm`, a symmetry when the defect ratio is constant.
    pub combined: Characteristic,
    /// Constant of proportionality between the two prolonged defects.
    pub ratio: f64,
    pub gn: Vec<f64>,
    pub gm: Vec<f64>,
}

/// Tests whether `pr zn D` and `pr zm D` are proportional across the window
/// and, if so, returns the symmetry combination. The ratio is read off at
/// the quad with the largest `|pr zm D|`; the spread is the largest
/// proportionality residual `|gn - ratio gm|` relative to the working scale
/// `gm_max (1 + |ratio|)`, which stays meaningful where `gm` itself is tiny.
pub fn theorem1_combine(
    zn: &Characteristic,
    zm: &Characteristic,
    grid: &Grid,
    prm: &LatticeParams,
) -> Result<MasterCombination> {
    let joint = Characteristic::Combined {
        terms: vec![
            Term { coef: 1.0, charac: zn.clone() },
            Term { coef: 1.0, charac: zm.clone() },
        ],
    };
    let cells = admissible_quads(&joint, grid)?;
    let mut gn = Vec::with_capacity(cells.len());
    let mut gm = Vec::with_capacity(cells.len());
    for &cell in &cells {
        gn.push(prolongation_sum(zn, cell, grid, prm)?);
        gm.push(prolongation_sum(zm, cell, grid, prm)?);
    }
    let gm_max = gm.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if gm_max == 0.0 {
        return Err(Error::RatioNotConstant { spread: f64::INFINITY });
    }
    let iref = gm
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let ratio = gn[iref] / gm[iref];
    let scale = gm_max * (1.0 + ratio.abs());
    let mut spread = 0.0f64;
    for (gni, gmi) in gn.iter().zip(&gm) {
        spread = spread.max((gni - ratio * gmi).abs() / scale);
    }
    if spread > 1e-6 {
        return Err(Error::RatioNotConstant { spread });
    }
    let combined = Characteristic::Combined {
        terms: vec![
            Term { coef: 1.0, charac: zn.clone() },
            Term { coef: -ratio, charac: zm.clone() },
        ],
    };
    Ok(MasterCombination { combined, ratio, gn, gm })
}

/// Evaluates a characteristic on every site where its stencil fits,
/// returning the shrunken field.
pub fn eval_field(c: &Characteristic, grid: &Grid, prm: &LatticeParams) -> Result<Grid> {
    let (rn, rm) = c.stencil_radius();
    let n_cols = grid.n_cols() as i64 - 2 * rn;
    let m_rows = grid.m_rows() as i64 - 2 * rm;
    if n_cols < 1 || m_rows < 1 {
        return Err(Error::WindowTooSmall(format!(
            "stencil radius ({rn},{rm}) exceeds window {}x{}",
            grid.n_cols(),
            grid.m_rows()
        )));
    }
    let mut out = Grid::new(grid.n0() + rn, grid.m0() + rm, n_cols as usize, m_rows as usize);
    for m in out.m0()..=out.m_max() {
        for n in out.n0()..=out.n_max() {
            let v = char_eval(c, n, m, grid, prm)?;
            out.set(n, m, v);
        }
    }
    Ok(out)
}

fn lin(base: &Grid, s: f64, k: &Grid) -> Grid {
    Grid::from_fn(base.n0(), base.m0(), base.n_cols(), base.m_rows(), |n, m| {
        base.u(n, m) + s * k.u(n, m)
    })
}

/// Integrates `du/d eps = char(u)` with classical RK4 on a shrinking window.
/// Each step consumes `4 * stencil_radius` sites per side per flowed
/// direction, so the input window must be wide enough for `steps` steps.
pub fn flow_integrate(
    c: &Characteristic,
    grid: &Grid,
    prm: &LatticeParams,
    eps: f64,
    steps: usize,
) -> Result<Grid> {
    if steps == 0 || !eps.is_finite() {
        return Err(Error::InvalidParams(format!(
            "flow needs steps >= 1 and finite eps, got steps={steps} eps={eps}"
        )));
    }
    let (rn, rm) = c.stencil_radius();
    let need_n = 8 * rn as usize * steps + 2;
    let need_m = 8 * rm as usize * steps + 2;
    if grid.n_cols() < need_n || grid.m_rows() < need_m {
        return Err(Error::WindowTooSmall(format!(
            "flow of radius ({rn},{rm}) over {steps} steps needs {need_n}x{need_m}, got {}x{}",
            grid.n_cols(),
            grid.m_rows()
        )));
    }
    let h = eps / steps as f64;
    let (rn, rm) = (rn as usize, rm as usize);
    let mut u = grid.clone();
    for _ in 0..steps {
        let k1 = eval_field(c, &u, prm)?;
        let k2 = eval_field(c, &lin(&u.shrink(rn, rm)?, h / 2.0, &k1), prm)?;
        let k3 = eval_field(c, &lin(&u.shrink(2 * rn, 2 * rm)?, h / 2.0, &k2), prm)?;
        let k4 = eval_field(c, &lin(&u.shrink(3 * rn, 3 * rm)?, h, &k3), prm)?;
        let base = u.shrink(4 * rn, 4 * rm)?;
        u = Grid::from_fn(base.n0(), base.m0(), base.n_cols(), base.m_rows(), |n, m| {
            base.u(n, m)
                + (h / 6.0) * (k1.u(n, m) + 2.0 * k2.u(n, m) + 2.0 * k3.u(n, m) + k4.u(n, m))
        });
    }
    Ok(u)
}

/// Directional derivative of `target` along the field direction given by
/// `along`, at site `(n, m)`: central differences with one Richardson level.
fn directional_derivative(
    target: &Characteristic,
    along: &Characteristic,
    n: i64,
    m: i64,
    grid: &Grid,
    prm: &LatticeParams,
    h: f64,
) -> Result<f64> {
    let (rtn, rtm) = target.stencil_radius();
    let patch = grid.window(
        n - rtn,
        m - rtm,
        (2 * rtn + 1) as usize,
        (2 * rtm + 1) as usize,
    )?;
    let mut dir = Grid::new(patch.n0(), patch.m0(), patch.n_cols(), patch.m_rows());
    for mm in patch.m0()..=patch.m_max() {
        for nn in patch.n0()..=patch.n_max() {
            dir.set(nn, mm, char_eval(along, nn, mm, grid, prm)?);
        }
    }
    let eval_at = |s: f64| -> Result<f64> { char_eval(target, n, m, &lin(&patch, s, &dir), prm) };
    let d1 = (eval_at(h)? - eval_at(-h)?) / (2.0 * h);
    let d2 = (eval_at(h / 2.0)? - eval_at(-h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Commutator of two evolutionary vector fields at one site:
/// `[a, b] = pr_a(b) - pr_b(a)`.
pub fn commutator_eval(
    a: &Characteristic,
    b: &Characteristic,
    n: i64,
    m: i64,
    grid: &Grid,
    prm: &LatticeParams,
) -> Result<f64> {
    let umax = grid.values().iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let h = 1e-6 * (1.0 + umax);
    let pra_b = directional_derivative(b, a, n, m, grid, prm, h)?;
    let prb_a = directional_derivative(a, b, n, m, grid, prm, h)?;
    Ok(pra_b - prb_a)
}

/// Vacuum tail constant subtracted by hierarchy member k,
/// `beta_k = (-1)^k C(2k,k) v^(2k+1)` with `v = 1/(2p)`.
pub fn beta_const(k: u8, p: f64) -> f64 {
    let v = 1.0 / (2.0 * p);
    let central = [1.0, 2.0, 6.0, 20.0];
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * central[k as usize] * v.powi(2 * k as i32 + 1)
}

/// Integration constant for the antidifference in the inverse recursion,
/// `w_k = (-1)^(k+1) C(2k+1,k) v^(2k+2)`, the value that keeps the output
/// flat on the vacuum when lifting level k to k+1.
pub fn winf_const(k: u8, p: f64) -> f64 {
    let v = 1.0 / (2.0 * p);
    let central = [1.0, 3.0, 10.0];
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    sign * central[k as usize] * v.powi(2 * k as i32 + 2)
}

/// One application of the inverse recursion operator
/// `-E^{-1} (1/qpot) D+ (D-)^{-1} (1/qpot) D+ D-` along row `m`, where
/// `D+ = E + 1`, `D- = E - 1` and the antidifference `(D-)^{-1} h (n) =
/// alpha - sum_{j >= n} h(j)` sums from the decaying +n edge.
///
/// `f` holds input values at sites `n_lo .. n_lo + f.len() - 1`; the result
/// covers `n_lo + 1 .. n_lo + f.len() - 3` (three sites are lost to the
/// difference operators). Requires decay of both `f` and the potential at
/// the +n edge within `DECAY_TOL`.
pub fn apply_inverse_recursion(
    f: &[f64],
    n_lo: i64,
    m: i64,
    grid: &Grid,
    prm: &LatticeParams,
    alpha: f64,
) -> Result<(Vec<f64>, i64)> {
    let l = f.len();
    if l < 5 {
        return Err(Error::WindowTooSmall(format!(
            "inverse recursion needs at least 5 input sites, got {l}"
        )));
    }
    let n_hi = n_lo + l as i64 - 1;
    let f_edge = f[l - 1].abs();
    if f_edge > DECAY_TOL {
        return Err(Error::NoDecay(format!(
            "input magnitude {f_edge:.3e} at n={n_hi} exceeds {DECAY_TOL:.1e}"
        )));
    }
    let q_edge = (qpot(grid, prm, n_hi - 2, m)? - 2.0 * prm.p).abs();
    if q_edge > DECAY_TOL {
        return Err(Error::NoDecay(format!(
            "potential is {q_edge:.3e} away from 2p at n={}",
            n_hi - 2
        )));
    }

    let g1: Vec<f64> = (0..l - 1).map(|i| f[i + 1] - f[i]).collect();
    let g2: Vec<f64> = (0..l - 2).map(|i| g1[i + 1] + g1[i]).collect();
    let mut g3 = Vec::with_capacity(l - 2);
    for (i, &v) in g2.iter().enumerate() {
        g3.push(v / qpot(grid, prm, n_lo + i as i64, m)?);
    }
    let mut g4 = vec![0.0; l - 2];
    let mut acc = 0.0;
    for i in (0..l - 2).rev() {
        acc += g3[i];
        g4[i] = alpha - acc;
    }
    let g5: Vec<f64> = (0..l - 3).map(|i| g4[i + 1] + g4[i]).collect();
    let mut g6 = Vec::with_capacity(l - 3);
    for (i, &v) in g5.iter().enumerate() {
        g6.push(v / qpot(grid, prm, n_lo + i as i64, m)?);
    }
    let out: Vec<f64> = g6.iter().map(|v| -v).collect();
    Ok((out, n_lo + 1))
}

/// Lifts hierarchy member `Xn(k)` to level k+1 along row `m`: evaluates the
/// site formula over `[n_lo, n_hi]`, applies the inverse recursion with the
/// level's tail constant, subtracts the +n edge value, and trims `trim`
/// sites from each end.
pub fn generated_next_row(
    k: u8,
    m: i64,
    grid: &Grid,
    prm: &LatticeParams,
    n_lo: i64,
    n_hi: i64,
    trim: usize,
) -> Result<(Vec<f64>, i64)> {
    if k > 2 {
        return Err(Error::InvalidSpec(format!("no site formula for level {k}")));
    }
    let count = (n_hi - n_lo + 1) as usize;
    let c = Characteristic::Xn { k };
    let mut f = Vec::with_capacity(count);
    for n in n_lo..=n_hi {
        f.push(char_eval(&c, n, m, grid, prm)?);
    }
    let (mut out, lo) = apply_inverse_recursion(&f, n_lo, m, grid, prm, winf_const(k, prm.p))?;
    let edge = *out.last().unwrap();
    for v in &mut out {
        *v -= edge;
    }
    if out.len() < 2 * trim + 1 {
        return Err(Error::WindowTooSmall(format!(
            "generated row of {} sites cannot be trimmed by {trim} per side",
            out.len()
        )));
    }
    out.drain(..trim);
    out.truncate(out.len() - trim);
    Ok((out, lo + trim as i64))
}
