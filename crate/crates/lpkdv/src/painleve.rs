//! Similarity reduction to an alternate discrete Painleve II equation.
//!
//! Works on the rescaled equation `(u10 - u01)(u11 - u00) = p - q` (reached
//! from the full quad equation by `u -> u sqrt(p+q) + p n + q m`) together
//! with the similarity constraint
//!
//!   n p^w / a + m q^w / b - ((p^w - q^w)/(2 delta)) u + c = 0,
//!
//! where `a = u(n+1,m) - u(n-1,m)`, `b = u(n,m+1) - u(n,m-1)` and
//! `delta = p - q`. Eliminating `b` through the cross variable
//! `y(n,m) = u(n+1,m+1) - u(n,m)` collapses the pair to a second-order
//! recursion marched along a single row.

use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::LatticeParams;

const DEN_TOL: f64 = 1e-12;
const STEP_TOL: f64 = 1e-13;
const VALUE_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionParams {
    pub w: f64,
    pub c: f64,
    pub p: f64,
    pub q: f64,
}

impl ReductionParams {
    pub fn new(w: f64, c: f64, p: f64, q: f64) -> Result<Self> {
        if ![w, c, p, q].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParams("reduction parameters must be finite".into()));
        }
        if (p - q).abs() < 1e-12 * (1.0 + p.abs() + q.abs()) {
            return Err(Error::ZeroDifference("p - q vanishes in the reduction".into()));
        }
        let rp = ReductionParams { w, c, p, q };
        rp.pw()?;
        rp.qw()?;
        Ok(rp)
    }

    pub fn delta(&self) -> f64 {
        self.p - self.q
    }

    pub fn pw(&self) -> Result<f64> {
        let v = self.p.powf(self.w);
        if !v.is_finite() {
            return Err(Error::InvalidW(self.w));
        }
        Ok(v)
    }

    pub fn qw(&self) -> Result<f64> {
        let v = self.q.powf(self.w);
        if !v.is_finite() {
            return Err(Error::InvalidW(self.w));
        }
        Ok(v)
    }

    /// Parameters of the transposed lattice (column marches).
    fn transposed(&self) -> ReductionParams {
        ReductionParams { w: self.w, c: self.c, p: self.q, q: self.p }
    }
}

/// Defect of the rescaled quad equation at one cell.
pub fn reduced_residual(prm: &LatticeParams, u00: f64, u10: f64, u01: f64, u11: f64) -> f64 {
    (u10 - u01) * (u11 - u00) - (prm.p - prm.q)
}

pub fn reduced_residual_max(grid: &Grid, prm: &LatticeParams) -> Result<f64> {
    if grid.n_cols() < 2 || grid.m_rows() < 2 {
        return Err(Error::WindowTooSmall("residual sweep needs a 2x2 window".into()));
    }
    let mut worst = 0.0f64;
    for cell in grid.quads() {
        let (n, m) = (cell.n, cell.m);
        let r = reduced_residual(
            prm,
            grid.u(n, m),
            grid.u(n + 1, m),
            grid.u(n, m + 1),
            grid.u(n + 1, m + 1),
        );
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Solves the rescaled equation for the far corner.
pub fn reduced_solve_corner(prm: &LatticeParams, u00: f64, u10: f64, u01: f64) -> Result<f64> {
    let den = u10 - u01;
    if den.abs() < DEN_TOL {
        return Err(Error::ZeroDifference(format!(
            "u10 - u01 = {den:.3e} in the reduced corner solve"
        )));
    }
    Ok(u00 + (prm.p - prm.q) / den)
}

/// Maps a rescaled-equation solution to a full quad-equation solution,
/// `u -> u sqrt(p+q) + p n + q m`.
pub fn map_forward(grid: &Grid, prm: &LatticeParams) -> Result<Grid> {
    let s = prm.p + prm.q;
    if s <= 0.0 {
        return Err(Error::NegativePQSum(s));
    }
    let r = s.sqrt();
    Ok(Grid::from_fn(grid.n0(), grid.m0(), grid.n_cols(), grid.m_rows(), |n, m| {
        grid.u(n, m) * r + prm.p * n as f64 + prm.q * m as f64
    }))
}

/// Inverse of `map_forward`.
pub fn map_backward(grid: &Grid, prm: &LatticeParams) -> Result<Grid> {
    let s = prm.p + prm.q;
    if s <= 0.0 {
        return Err(Error::NegativePQSum(s));
    }
    let r = s.sqrt();
    Ok(Grid::from_fn(grid.n0(), grid.m0(), grid.n_cols(), grid.m_rows(), |n, m| {
        (grid.u(n, m) - prm.p * n as f64 - prm.q * m as f64) / r
    }))
}

/// Similarity constraint residual at an interior site.
pub fn constraint_residual(grid: &Grid, rp: &ReductionParams, n: i64, m: i64) -> Result<f64> {
    let a = grid.at(n + 1, m)? - grid.at(n - 1, m)?;
    let b = grid.at(n, m + 1)? - grid.at(n, m - 1)?;
    if a.abs() < DEN_TOL {
        return Err(Error::ZeroDifference(format!("a difference at ({n},{m})")));
    }
    if b.abs() < DEN_TOL {
        return Err(Error::ZeroDifference(format!("b difference at ({n},{m})")));
    }
    let pw = rp.pw()?;
    let qw = rp.qw()?;
    Ok(n as f64 * pw / a + m as f64 * qw / b
        - ((pw - qw) / (2.0 * rp.delta())) * grid.at(n, m)?
        + rp.c)
}

/// Largest `|constraint_residual|` over the interior of the window.
pub fn constraint_max(grid: &Grid, rp: &ReductionParams) -> Result<f64> {
    if grid.n_cols() < 3 || grid.m_rows() < 3 {
        return Err(Error::WindowTooSmall("constraint sweep needs a 3x3 window".into()));
    }
    let mut worst = 0.0f64;
    for m in grid.m0() + 1..grid.m_max() {
        for n in grid.n0() + 1..grid.n_max() {
            worst = worst.max(constraint_residual(grid, rp, n, m)?.abs());
        }
    }
    Ok(worst)
}

/// Marching state along a row at fixed m: `y_prev = y(n-1)`, `y_cur = y(n)`,
/// `u_cur = u(n)`, `u_next = u(n+1)`, with `y(n) = u(n+1,m+1) - u(n,m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PainleveState {
    pub n: i64,
    pub y_prev: f64,
    pub y_cur: f64,
    pub u_cur: f64,
    pub u_next: f64,
}

fn pa_step_raw(
    st: &PainleveState,
    m: i64,
    rp: &ReductionParams,
    pw: f64,
    qw: f64,
) -> Option<(f64, f64)> {
    let d = rp.delta();
    let y = st.y_cur;
    if y.abs() < STEP_TOL {
        return None;
    }
    let den_prev = y * st.y_prev + d;
    if den_prev.abs() < STEP_TOL {
        return None;
    }
    let half = (pw - qw) / (2.0 * d);
    let nf = st.n as f64;
    let rhs = pw * (nf + 1.0) + qw * m as f64 - rp.c * d / y + rp.c * y
        + half * (d * st.u_cur / y - y * st.u_next)
        - pw * nf * d / den_prev;
    if rhs.abs() < STEP_TOL {
        return None;
    }
    let y_next = (pw * (nf + 1.0) * d / rhs - d) / y;
    if y_next.abs() < STEP_TOL || !y_next.is_finite() {
        return None;
    }
    let u2 = st.u_cur + y + d / y_next;
    if !u2.is_finite() {
        return None;
    }
    Some((y_next, u2))
}

/// One step of the second-order row recursion obtained by eliminating the
/// m-differences from the constraint: advances `(y, u)` from `n` to `n+1`.
pub fn painleve_step(st: &PainleveState, m: i64, rp: &ReductionParams) -> Result<PainleveState> {
    let (y_next, u2) = pa_step_raw(st, m, rp, rp.pw()?, rp.qw()?)
        .ok_or(Error::SingularStep { n: st.n })?;
    Ok(PainleveState {
        n: st.n + 1,
        y_prev: st.y_cur,
        y_cur: y_next,
        u_cur: st.u_next,
        u_next: u2,
    })
}

/// Marches `steps` row steps, returning `(n, y(n), u(n))` rows including the
/// starting state.
pub fn trajectory(
    rp: &ReductionParams,
    m: i64,
    start: PainleveState,
    steps: usize,
) -> Result<Vec<(i64, f64, f64)>> {
    let mut out = Vec::with_capacity(steps + 1);
    let mut st = start;
    out.push((st.n, st.y_cur, st.u_cur));
    for _ in 0..steps {
        st = painleve_step(&st, m, rp)?;
        out.push((st.n, st.y_cur, st.u_cur));
    }
    Ok(out)
}

struct CrossBuild {
    grid: Grid,
    min_den: f64,
    u_max: f64,
}

/// Builds a full window from four corner scalars `(u00, u10, u01, y_left)`:
/// constraint-marched rows m0, m0+1 and columns n0, n0+1, then the corner
/// solve over the remaining quadrant. Returns None if any step degenerates.
fn build_cross(
    rp: &ReductionParams,
    n0: i64,
    m0: i64,
    n_cols: usize,
    m_rows: usize,
    corner: &[f64; 4],
) -> Option<CrossBuild> {
    let [u00, u10, u01, y_left] = *corner;
    let d = rp.delta();
    let pw = rp.pw().ok()?;
    let qw = rp.qw().ok()?;
    let den0 = u10 - u01;
    if den0.abs() < DEN_TOL {
        return None;
    }
    let y_core = d / den0;
    // bottom seed for the column march: the constraint at (n0, m0), written
    // with the virtual points behind the window, fixes the m-difference there
    let s0 = (pw - qw) / (2.0 * d) * u00 - rp.c;
    let a0 = den0 + y_left;
    if a0.abs() < DEN_TOL {
        return None;
    }
    let t0 = s0 - n0 as f64 * pw / a0;
    if t0.abs() < DEN_TOL {
        return None;
    }
    let y_bottom = den0 + m0 as f64 * qw / t0;
    let mut g = Grid::from_fn(n0, m0, n_cols, m_rows, |_, _| f64::NAN);
    g.set(n0, m0, u00);
    g.set(n0 + 1, m0, u10);
    g.set(n0, m0 + 1, u01);

    // row march at m0, filling row m0 and (through y) row m0+1
    let mut st = PainleveState { n: n0, y_prev: y_left, y_cur: y_core, u_cur: u00, u_next: u10 };
    loop {
        g.set(st.n + 1, m0 + 1, st.y_cur + st.u_cur);
        if st.n + 2 > g.n_max() {
            break;
        }
        let (y_next, u2) = pa_step_raw(&st, m0, rp, pw, qw)?;
        if u2.abs() > VALUE_CAP || y_next.abs() > VALUE_CAP {
            return None;
        }
        g.set(st.n + 2, m0, u2);
        st = PainleveState {
            n: st.n + 1,
            y_prev: st.y_cur,
            y_cur: y_next,
            u_cur: st.u_next,
            u_next: u2,
        };
    }

    // column march at n0: the same recursion on the transposed lattice
    let rpt = rp.transposed();
    let (pwt, qwt) = (qw, pw);
    let mut st =
        PainleveState { n: m0, y_prev: y_bottom, y_cur: y_core, u_cur: u00, u_next: u01 };
    loop {
        g.set(n0 + 1, st.n + 1, st.y_cur + st.u_cur);
        if st.n + 2 > g.m_max() {
            break;
        }
        let (y_next, u2) = pa_step_raw(&st, n0, &rpt, pwt, qwt)?;
        if u2.abs() > VALUE_CAP || y_next.abs() > VALUE_CAP {
            return None;
        }
        g.set(n0, st.n + 2, u2);
        st = PainleveState {
            n: st.n + 1,
            y_prev: st.y_cur,
            y_cur: y_next,
            u_cur: st.u_next,
            u_next: u2,
        };
    }

    // remaining quadrant from the corner solve
    for m in m0 + 1..=g.m_max() {
        for n in n0 + 1..=g.n_max() {
            if !g.u(n, m).is_nan() {
                continue;
            }
            let den = g.u(n, m - 1) - g.u(n - 1, m);
            if den.abs() < DEN_TOL {
                return None;
            }
            let v = g.u(n - 1, m - 1) + d / den;
            if !v.is_finite() || v.abs() > VALUE_CAP {
                return None;
            }
            g.set(n, m, v);
        }
    }

    // seed health over the finished window
    let mut min_den = f64::INFINITY;
    let mut u_max = 0.0f64;
    for (_, _, v) in g.iter_cells() {
        u_max = u_max.max(v.abs());
    }
    for cell in g.quads() {
        min_den = min_den.min((g.u(cell.n + 1, cell.m) - g.u(cell.n, cell.m + 1)).abs());
    }
    Some(CrossBuild { grid: g, min_den, u_max })
}

/// `a(n,m) = u(n+1,m) - u(n-1,m)` recursion defect,
/// `a = y(n-1,m) + delta / y(n,m)`, maximised over the window.
pub fn a_identity_defect(grid: &Grid, rp: &ReductionParams) -> Result<f64> {
    let d = rp.delta();
    let mut worst = 0.0f64;
    for m in grid.m0()..grid.m_max() {
        for n in grid.n0() + 1..grid.n_max() {
            let y0 = grid.u(n + 1, m + 1) - grid.u(n, m);
            if y0.abs() < DEN_TOL {
                return Err(Error::ZeroDifference(format!("y at ({n},{m})")));
            }
            let ym1 = grid.u(n, m + 1) - grid.u(n - 1, m);
            let a = grid.u(n + 1, m) - grid.u(n - 1, m);
            worst = worst.max((a - (ym1 + d / y0)).abs());
        }
    }
    Ok(worst)
}

/// Defect of the m-difference recursion
/// `1/b(n+1,m) = delta/(b(n,m) y(n,m)^2) + 1/y(n,m)` with
/// `b(n,m) = u(n,m+1) - u(n,m-1)`, maximised over the window.
pub fn ll2_identity_defect(grid: &Grid, rp: &ReductionParams) -> Result<f64> {
    let d = rp.delta();
    let mut worst = 0.0f64;
    for m in grid.m0() + 1..grid.m_max() {
        for n in grid.n0()..grid.n_max() - 1 {
            let b0 = grid.u(n, m + 1) - grid.u(n, m - 1);
            let b1 = grid.u(n + 1, m + 1) - grid.u(n + 1, m - 1);
            let y = grid.u(n + 1, m + 1) - grid.u(n, m);
            if b0.abs() < DEN_TOL || b1.abs() < DEN_TOL || y.abs() < DEN_TOL {
                return Err(Error::ZeroDifference(format!("b or y at ({n},{m})")));
            }
            worst = worst.max((1.0 / b1 - (d / (b0 * y * y) + 1.0 / y)).abs());
        }
    }
    Ok(worst)
}

/// Deviations of the row recursion from the stored field along row `m`:
/// element `i` is `|u_marched - u_stored|` at `n0 + 3 + i`.
pub fn lockstep_deviations(
    grid: &Grid,
    rp: &ReductionParams,
    m: i64,
    max_steps: usize,
) -> Result<Vec<f64>> {
    if m < grid.m0() || m + 1 > grid.m_max() || grid.n_cols() < 4 {
        return Err(Error::WindowTooSmall(format!("lockstep row {m} does not fit")));
    }
    let n0 = grid.n0();
    let mut st = PainleveState {
        n: n0 + 1,
        y_prev: grid.u(n0 + 1, m + 1) - grid.u(n0, m),
        y_cur: grid.u(n0 + 2, m + 1) - grid.u(n0 + 1, m),
        u_cur: grid.u(n0 + 1, m),
        u_next: grid.u(n0 + 2, m),
    };
    let mut devs = Vec::new();
    while devs.len() < max_steps && st.n + 2 <= grid.n_max() {
        st = painleve_step(&st, m, rp)?;
        // after the step, u_next holds the marched u(st.n + 1)
        devs.push((st.u_next - grid.u(st.n + 1, m)).abs());
    }
    Ok(devs)
}

#[derive(Debug, Clone, Copy)]
struct Health {
    res_core: f64,
    a_core: f64,
    ll2_core: f64,
    rows_ok: bool,
    score: f64,
}

const RES_TOL: f64 = 1e-7;
const IDENT_TOL: f64 = 1e-10;
const LOCKSTEP_TOL: f64 = 1e-8;
const LOCKSTEP_STEPS: usize = 30;

fn core_window(grid: &Grid) -> Result<Grid> {
    let side = 20usize;
    let nc = grid.n_cols().min(side);
    let mr = grid.m_rows().min(side);
    grid.window(
        grid.n0() + ((grid.n_cols() - nc) / 2) as i64,
        grid.m0() + ((grid.m_rows() - mr) / 2) as i64,
        nc,
        mr,
    )
}

fn assess(grid: &Grid, rp: &ReductionParams) -> Option<Health> {
    let core = core_window(grid).ok()?;
    let res_core = constraint_max(&core, rp).ok()?;
    let a_core = a_identity_defect(&core, rp).ok()?;
    let ll2_core = ll2_identity_defect(&core, rp).ok()?;
    let mut rows_ok = true;
    for m in grid.m0()..grid.m_max() {
        let devs = lockstep_deviations(grid, rp, m, LOCKSTEP_STEPS).ok()?;
        if devs.len() < LOCKSTEP_STEPS.min(grid.n_cols().saturating_sub(4))
            || devs.iter().any(|d| *d > LOCKSTEP_TOL)
        {
            rows_ok = false;
            break;
        }
    }
    let score = (res_core / RES_TOL).max(a_core / IDENT_TOL).max(ll2_core / IDENT_TOL);
    Some(Health { res_core, a_core, ll2_core, rows_ok, score })
}

/// Gauss-Newton refinement of the four corner scalars against the stacked
/// constraint residuals of the core window, with Levenberg damping.
fn polish(
    rp: &ReductionParams,
    n0: i64,
    m0: i64,
    n_cols: usize,
    m_rows: usize,
    corner: [f64; 4],
) -> Option<[f64; 4]> {
    let residuals = |c: &[f64; 4]| -> Option<Vec<f64>> {
        let cb = build_cross(rp, n0, m0, n_cols, m_rows, c)?;
        let core = core_window(&cb.grid).ok()?;
        let mut r = Vec::new();
        for m in core.m0() + 1..core.m_max() {
            for n in core.n0() + 1..core.n_max() {
                r.push(constraint_residual(&core, rp, n, m).ok()?);
            }
        }
        Some(r)
    };
    let norm = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let mut x = corner;
    let mut r = residuals(&x)?;
    let mut best = norm(&r);
    let mut lambda = 1e-6;
    for _ in 0..40 {
        if r.iter().fold(0.0f64, |a, v| a.max(v.abs())) < 1e-12 {
            break;
        }
        // numeric Jacobian, central differences
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(4);
        let mut ok = true;
        for k in 0..4 {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            match (residuals(&xp), residuals(&xm)) {
                (Some(rp_), Some(rm)) if rp_.len() == r.len() && rm.len() == r.len() => {
                    cols.push(rp_.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect());
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let mut jtj = Matrix4::<f64>::zeros();
        let mut jtr = Vector4::<f64>::zeros();
        for i in 0..4 {
            for j in 0..4 {
                jtj[(i, j)] = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
            }
            jtr[i] = cols[i].iter().zip(&r).map(|(a, b)| a * b).sum();
        }
        let mut improved = false;
        for _ in 0..8 {
            let damped = jtj + Matrix4::identity() * lambda;
            let Some(step) = damped.lu().solve(&(-jtr)) else { break };
            let mut xt = x;
            for k in 0..4 {
                xt[k] += step[k];
            }
            if let Some(rt) = residuals(&xt) {
                let nt = norm(&rt);
                if nt < best {
                    x = xt;
                    r = rt;
                    best = nt;
                    lambda = (lambda * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Some(x)
}

#[derive(Debug, Clone)]
pub enum GenerateSeed {
    /// Multi-start search seeded from a deterministic RNG stream.
    Scan { rng_seed: u64, trials: usize },
    /// Explicit corner scalars `(u00, u10, u01, y_left)`.
    Explicit { corner: [f64; 4] },
}

/// Constructs a window solving both the rescaled quad equation and the
/// similarity constraint. Candidate corners are ranked by march health,
/// then judged on the centred core: constraint residual, both eliminated
/// identities, and lockstep agreement of every row with the stored field.
/// Fails with `NewtonFailure` carrying the best core residual otherwise.
pub fn painleve_generate(
    rp: &ReductionParams,
    n0: i64,
    m0: i64,
    n_cols: usize,
    m_rows: usize,
    seed: &GenerateSeed,
) -> Result<Grid> {
    if n_cols < 8 || m_rows < 8 {
        return Err(Error::WindowTooSmall(format!(
            "generation needs at least 8x8, got {n_cols}x{m_rows}"
        )));
    }
    let mut candidates: Vec<[f64; 4]> = Vec::new();
    match seed {
        GenerateSeed::Explicit { corner } => candidates.push(*corner),
        GenerateSeed::Scan { rng_seed, trials } => {
            let s2 = rp.p + rp.q;
            if s2 <= 0.0 {
                return Err(Error::NegativePQSum(s2));
            }
            let s = s2.sqrt();
            let nf = n0 as f64;
            let mf = m0 as f64;
            let lin = [
                (rp.p * nf + rp.q * mf) / s,
                (rp.p * (nf + 1.0) + rp.q * mf) / s,
                (rp.p * nf + rp.q * (mf + 1.0)) / s,
                s,
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(*rng_seed);
            let mut ranked: Vec<(f64, [f64; 4])> = Vec::new();
            for _ in 0..*trials {
                let mut corner = lin;
                for slot in corner.iter_mut() {
                    *slot += standard_normal(&mut rng);
                }
                if let Some(cb) = build_cross(rp, n0, m0, n_cols, m_rows, &corner) {
                    if cb.u_max <= 3e3 {
                        ranked.push((cb.min_den, corner));
                    }
                }
            }
            ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            candidates.extend(ranked.into_iter().take(8).map(|(_, c)| c));
        }
    }
    if candidates.is_empty() {
        return Err(Error::NewtonFailure { residual: f64::INFINITY });
    }

    let mut best: Option<(Health, Grid)> = None;
    for corner in &candidates {
        let polished = polish(rp, n0, m0, n_cols, m_rows, *corner).unwrap_or(*corner);
        for cand in [polished, *corner] {
            let Some(cb) = build_cross(rp, n0, m0, n_cols, m_rows, &cand) else { continue };
            let Some(h) = assess(&cb.grid, rp) else { continue };
            if !h.rows_ok {
                continue;
            }
            if best.as_ref().map_or(true, |(hb, _)| h.score < hb.score) {
                best = Some((h, cb.grid));
            }
        }
    }
    match best {
        Some((h, g)) if h.score <= 1.0 => Ok(g),
        Some((h, _)) => Err(Error::NewtonFailure { residual: h.res_core.max(h.a_core).max(h.ll2_core) }),
        None => Err(Error::NewtonFailure { residual: f64::INFINITY }),
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniform draws
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Writes a marched trajectory as CSV with an `n,y,u` row per step.
pub fn write_trajectory_csv<W: std::io::Write>(
    w: &mut W,
    rp: &ReductionParams,
    m: i64,
    rows: &[(i64, f64, f64)],
) -> Result<()> {
    writeln!(
        w,
        "# w={:.16e} c={:.16e} p={:.16e} q={:.16e} m={m}",
        rp.w, rp.c, rp.p, rp.q
    )?;
    writeln!(w, "n,y,u")?;
    for (n, y, u) in rows {
        writeln!(w, "{n},{y:.16e},{u:.16e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prm() -> LatticeParams {
        LatticeParams::new(2.0, 1.0).unwrap()
    }

    fn rp(w: f64, c: f64) -> ReductionParams {
        ReductionParams::new(w, c, 2.0, 1.0).unwrap()
    }

    fn generated(w: f64, c: f64) -> Grid {
        painleve_generate(
            &rp(w, c),
            1,
            1,
            38,
            38,
            &GenerateSeed::Scan { rng_seed: 17, trials: 6000 },
        )
        .unwrap()
    }

    #[test]
    fn params_reject_equal_pq() {
        assert_eq!(
            ReductionParams::new(1.0, 0.0, 2.0, 2.0).unwrap_err().code(),
            "ZERO_DIFFERENCE"
        );
    }

    #[test]
    fn map_round_trip_and_residual_transfer() {
        let prm = prm();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = Grid::from_fn(-3, -4, 8, 9, |_, _| rng.gen_range(-1.0..1.0));
        let fwd = map_forward(&v, &prm).unwrap();
        let back = map_backward(&fwd, &prm).unwrap();
        for ((_, _, a), (_, _, b)) in v.iter_cells().zip(back.iter_cells()) {
            assert!((a - b).abs() < 1e-14);
        }
        // corners solving the rescaled equation map to quad solutions
        let u11 = reduced_solve_corner(&prm, 0.3, 1.1, -0.4).unwrap();
        let mut cellv = Grid::new(0, 0, 2, 2);
        cellv.set(0, 0, 0.3);
        cellv.set(1, 0, 1.1);
        cellv.set(0, 1, -0.4);
        cellv.set(1, 1, u11);
        let mapped = map_forward(&cellv, &prm).unwrap();
        let r = crate::lattice::residual_max(&mapped, &prm).unwrap();
        assert!(r < 1e-13, "mapped residual {r}");
    }

    #[test]
    fn negative_pq_sum_is_rejected() {
        let prm = LatticeParams::new(-2.0, 1.0).unwrap();
        let g = Grid::new(0, 0, 3, 3);
        assert_eq!(map_forward(&g, &prm).unwrap_err().code(), "NEGATIVE_PQ_SUM");
    }

    #[test]
    fn generated_window_satisfies_everything() {
        let rp = rp(0.0, 0.0);
        let g = generated(0.0, 0.0);
        let prm = prm();
        // interior of the band solves the rescaled equation exactly
        let inner = g.window(3, 3, 34, 34).unwrap();
        assert!(reduced_residual_max(&inner, &prm).unwrap() < 1e-9);
        let core = g.window(10, 10, 20, 20).unwrap();
        assert!(constraint_max(&core, &rp).unwrap() < 1e-7);
        assert!(a_identity_defect(&core, &rp).unwrap() < 1e-10);
        assert!(ll2_identity_defect(&core, &rp).unwrap() < 1e-10);
    }

    #[test]
    fn lockstep_march_follows_generated_rows() {
        let rp = rp(0.0, 0.0);
        let g = generated(0.0, 0.0);
        for m in g.m0()..g.m_max() {
            let devs = lockstep_deviations(&g, &rp, m, 30).unwrap();
            assert!(devs.len() >= 30);
            assert!(devs.iter().all(|d| *d < 1e-8), "row {m}: {devs:?}");
        }
    }

    #[test]
    fn weight_zero_alternate_path_matches_step() {
        // with w = 0, c = 0 the constraint collapses to n/a + m/b = 0 and the
        // step can be reproduced through the a and b recursions directly
        let rp = rp(0.0, 0.0);
        let d = rp.delta();
        let g = generated(0.0, 0.0);
        let m = 12i64;
        let n0 = g.n0();
        let mut st = PainleveState {
            n: n0 + 1,
            y_prev: g.u(n0 + 1, m + 1) - g.u(n0, m),
            y_cur: g.u(n0 + 2, m + 1) - g.u(n0 + 1, m),
            u_cur: g.u(n0 + 1, m),
            u_next: g.u(n0 + 2, m),
        };
        for _ in 0..8 {
            let nf = st.n as f64;
            let mf = m as f64;
            let a_n = st.y_prev + d / st.y_cur;
            let b_n = -mf * a_n / nf;
            let inv_b1 = d / (b_n * st.y_cur * st.y_cur) + 1.0 / st.y_cur;
            let a_next = -(nf + 1.0) / (mf * inv_b1);
            let y_next_alt = d / (a_next - st.y_cur);
            let u2_alt = st.u_cur + a_next;
            let next = painleve_step(&st, m, &rp).unwrap();
            assert!((next.y_cur - y_next_alt).abs() < 1e-10, "{} vs {y_next_alt}", next.y_cur);
            assert!((next.u_next - u2_alt).abs() < 1e-10, "{} vs {u2_alt}", next.u_next);
            st = next;
        }
    }

    #[test]
    fn hopeless_seed_reports_newton_failure() {
        let rp = rp(1.0, 0.1);
        let err = painleve_generate(
            &rp,
            1,
            1,
            24,
            24,
            &GenerateSeed::Explicit { corner: [50.0, -50.0, 49.0, 100.0] },
        )
        .unwrap_err();
        assert_eq!(err.code(), "NEWTON_FAILURE");
    }

    #[test]
    fn trajectory_is_deterministic_and_written() {
        let rp = rp(1.0, 0.1);
        let start = PainleveState { n: 3, y_prev: 0.9, y_cur: 1.1, u_cur: 2.0, u_next: 2.9 };
        let rows = trajectory(&rp, 2, start, 20).unwrap();
        assert_eq!(rows.len(), 21);
        let rows2 = trajectory(&rp, 2, start, 20).unwrap();
        assert_eq!(rows, rows2);
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &rp, 2, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().count() == 23);
        assert!(text.lines().nth(1).unwrap() == "n,y,u");
    }
}
