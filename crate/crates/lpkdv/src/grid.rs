use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::params::LatticeParams;

/// A lattice cell address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub n: i64,
    pub m: i64,
}

/// Rectangular window of field values over the integer lattice.
///
/// Storage is row-major by m-row: index `(n, m)` lives at
/// `(m - m0) * n_cols + (n - n0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    n0: i64,
    m0: i64,
    n_cols: usize,
    m_rows: usize,
    values: Vec<f64>,
}

impl Grid {
    pub fn new(n0: i64, m0: i64, n_cols: usize, m_rows: usize) -> Self {
        Grid {
            n0,
            m0,
            n_cols,
            m_rows,
            values: vec![0.0; n_cols * m_rows],
        }
    }

    pub fn from_fn(
        n0: i64,
        m0: i64,
        n_cols: usize,
        m_rows: usize,
        mut f: impl FnMut(i64, i64) -> f64,
    ) -> Self {
        let mut g = Grid::new(n0, m0, n_cols, m_rows);
        for m in g.m0..g.m0 + g.m_rows as i64 {
            for n in g.n0..g.n0 + g.n_cols as i64 {
                let v = f(n, m);
                g.set(n, m, v);
            }
        }
        g
    }

    pub fn n0(&self) -> i64 {
        self.n0
    }

    pub fn m0(&self) -> i64 {
        self.m0
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    /// Largest stored n index.
    pub fn n_max(&self) -> i64 {
        self.n0 + self.n_cols as i64 - 1
    }

    /// Largest stored m index.
    pub fn m_max(&self) -> i64 {
        self.m0 + self.m_rows as i64 - 1
    }

    pub fn contains(&self, n: i64, m: i64) -> bool {
        n >= self.n0 && n <= self.n_max() && m >= self.m0 && m <= self.m_max()
    }

    fn idx(&self, n: i64, m: i64) -> usize {
        debug_assert!(self.contains(n, m));
        (m - self.m0) as usize * self.n_cols + (n - self.n0) as usize
    }

    /// Field value at `(n, m)`. Panics outside the window in debug builds;
    /// use `at` for checked access.
    pub fn u(&self, n: i64, m: i64) -> f64 {
        self.values[self.idx(n, m)]
    }

    pub fn at(&self, n: i64, m: i64) -> Result<f64> {
        if !self.contains(n, m) {
            return Err(Error::OutOfWindow { n, m });
        }
        Ok(self.u(n, m))
    }

    pub fn set(&mut self, n: i64, m: i64, v: f64) {
        let i = self.idx(n, m);
        self.values[i] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter_cells(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        let n0 = self.n0;
        let m0 = self.m0;
        let n_cols = self.n_cols;
        self.values.iter().enumerate().map(move |(i, &v)| {
            let n = n0 + (i % n_cols) as i64;
            let m = m0 + (i / n_cols) as i64;
            (n, m, v)
        })
    }

    /// Lower-left corners of all elementary quads inside the window.
    pub fn quads(&self) -> impl Iterator<Item = Cell> + '_ {
        let n0 = self.n0;
        let m0 = self.m0;
        let nc = self.n_cols as i64;
        let mr = self.m_rows as i64;
        (m0..m0 + mr - 1)
            .flat_map(move |m| (n0..n0 + nc - 1).map(move |n| Cell { n, m }))
    }

    /// Copy of a sub-window.
    pub fn window(&self, n0: i64, m0: i64, n_cols: usize, m_rows: usize) -> Result<Grid> {
        let n_hi = n0 + n_cols as i64 - 1;
        let m_hi = m0 + m_rows as i64 - 1;
        if n_cols == 0 || m_rows == 0 || !self.contains(n0, m0) || !self.contains(n_hi, m_hi) {
            return Err(Error::WindowTooSmall(format!(
                "requested [{n0},{n_hi}]x[{m0},{m_hi}] from stored [{},{}]x[{},{}]",
                self.n0,
                self.n_max(),
                self.m0,
                self.m_max()
            )));
        }
        Ok(Grid::from_fn(n0, m0, n_cols, m_rows, |n, m| self.u(n, m)))
    }

    /// Sub-window shrunk by `kn` columns and `km` rows on each side.
    pub fn shrink(&self, kn: usize, km: usize) -> Result<Grid> {
        if self.n_cols < 2 * kn + 1 || self.m_rows < 2 * km + 1 {
            return Err(Error::WindowTooSmall(format!(
                "cannot shrink {}x{} window by ({kn},{km}) per side",
                self.n_cols, self.m_rows
            )));
        }
        self.window(
            self.n0 + kn as i64,
            self.m0 + km as i64,
            self.n_cols - 2 * kn,
            self.m_rows - 2 * km,
        )
    }

    /// Writes the window as CSV: a comment header with the origin and the
    /// lattice parameters, then one line per m-row in `%.16e` (lossless).
    pub fn write_csv<W: Write>(&self, w: &mut W, prm: &LatticeParams) -> Result<()> {
        writeln!(
            w,
            "# n0={} m0={} p={:.16e} q={:.16e}",
            self.n0, self.m0, prm.p, prm.q
        )?;
        for m in self.m0..=self.m_max() {
            let row: Vec<String> = (self.n0..=self.n_max())
                .map(|n| format!("{:.16e}", self.u(n, m)))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Inverse of `write_csv`.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Grid, LatticeParams)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))??;
        let (n0, m0, prm) = parse_header(&header)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad value `{t}`")))
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("grid file has no data rows".into()));
        }
        let n_cols = rows[0].len();
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::Parse("ragged grid rows".into()));
        }
        let mut g = Grid::new(n0, m0, n_cols, rows.len());
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                g.set(n0 + i as i64, m0 + j as i64, v);
            }
        }
        Ok((g, prm))
    }
}

fn parse_header(header: &str) -> Result<(i64, i64, LatticeParams)> {
    let stripped = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("missing `#` header, got `{header}`")))?;
    let mut n0 = None;
    let mut m0 = None;
    let mut p = None;
    let mut q = None;
    for tok in stripped.split_whitespace() {
        let (key, val) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token `{tok}`")))?;
        match key {
            "n0" => n0 = Some(val.parse::<i64>().map_err(|_| bad(tok))?),
            "m0" => m0 = Some(val.parse::<i64>().map_err(|_| bad(tok))?),
            "p" => p = Some(val.parse::<f64>().map_err(|_| bad(tok))?),
            "q" => q = Some(val.parse::<f64>().map_err(|_| bad(tok))?),
            _ => return Err(Error::Parse(format!("unknown header key `{key}`"))),
        }
    }
    match (n0, m0, p, q) {
        (Some(n0), Some(m0), Some(p), Some(q)) => Ok((n0, m0, LatticeParams::new(p, q)?)),
        _ => Err(Error::Parse(format!("incomplete header `{header}`"))),
    }
}

fn bad(tok: &str) -> Error {
    Error::Parse(format!("bad header token `{tok}`"))
}

/// Seed data for evolution: one leg of values along +n at row `m0` and one
/// leg along +m at column `n0`, sharing the corner value.
#[derive(Debug, Clone)]
pub struct Staircase {
    pub n0: i64,
    pub m0: i64,
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl Staircase {
    pub fn new(n0: i64, m0: i64, row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        if row.len() < 2 || col.len() < 2 {
            return Err(Error::InvalidSpec(
                "staircase legs need at least two values each".into(),
            ));
        }
        if row[0] != col[0] {
            return Err(Error::InvalidSpec(format!(
                "staircase corner mismatch: row[0]={} col[0]={}",
                row[0], col[0]
            )));
        }
        Ok(Staircase { n0, m0, row, col })
    }

    /// Reads the two-leg CSV format: grid header, then `row:` and `col:` lines.
    pub fn read_csv<R: BufRead>(r: R) -> Result<(Staircase, LatticeParams)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty staircase file".into()))??;
        let (n0, m0, prm) = parse_header(&header)?;
        let mut row = None;
        let mut col = None;
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            if let Some(rest) = t.strip_prefix("row:") {
                row = Some(parse_leg(rest)?);
            } else if let Some(rest) = t.strip_prefix("col:") {
                col = Some(parse_leg(rest)?);
            } else {
                return Err(Error::Parse(format!("unexpected staircase line `{t}`")));
            }
        }
        match (row, col) {
            (Some(row), Some(col)) => Ok((Staircase::new(n0, m0, row, col)?, prm)),
            _ => Err(Error::Parse("staircase file needs row: and col: lines".into())),
        }
    }

    pub fn write_csv<W: Write>(&self, w: &mut W, prm: &LatticeParams) -> Result<()> {
        writeln!(
            w,
            "# n0={} m0={} p={:.16e} q={:.16e}",
            self.n0, self.m0, prm.p, prm.q
        )?;
        let fmt = |leg: &[f64]| {
            leg.iter()
                .map(|v| format!("{v:.16e}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        writeln!(w, "row:{}", fmt(&self.row))?;
        writeln!(w, "col:{}", fmt(&self.col))?;
        Ok(())
    }
}

fn parse_leg(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad leg value `{t}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trip() {
        let g = Grid::from_fn(-3, 5, 4, 3, |n, m| (10 * n + m) as f64);
        assert_eq!(g.u(-3, 5), -25.0);
        assert_eq!(g.u(0, 7), 7.0);
        assert_eq!(g.n_max(), 0);
        assert_eq!(g.m_max(), 7);
        assert!(g.at(1, 5).is_err());
        assert!(g.at(-3, 8).is_err());
    }

    #[test]
    fn quads_enumerates_interior_corners() {
        let g = Grid::new(0, 0, 3, 2);
        let cells: Vec<Cell> = g.quads().collect();
        assert_eq!(cells, vec![Cell { n: 0, m: 0 }, Cell { n: 1, m: 0 }]);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let prm = LatticeParams::new(2.0, 1.0).unwrap();
        let g = Grid::from_fn(-2, 3, 5, 4, |n, m| {
            (n as f64 * 0.1 + m as f64).sin() * 1e-7 + 1.0 / 3.0
        });
        let mut buf = Vec::new();
        g.write_csv(&mut buf, &prm).unwrap();
        let (g2, prm2) = Grid::read_csv(&buf[..]).unwrap();
        assert_eq!(g, g2);
        assert_eq!(prm, prm2);
    }

    #[test]
    fn shrink_and_window() {
        let g = Grid::from_fn(0, 0, 10, 8, |n, m| (n + m) as f64);
        let s = g.shrink(2, 1).unwrap();
        assert_eq!(s.n0(), 2);
        assert_eq!(s.m0(), 1);
        assert_eq!(s.n_cols(), 6);
        assert_eq!(s.m_rows(), 6);
        assert_eq!(s.u(3, 4), 7.0);
        assert!(g.shrink(5, 0).is_err());
    }

    #[test]
    fn staircase_corner_must_match() {
        assert!(Staircase::new(0, 0, vec![1.0, 2.0], vec![1.0, 3.0]).is_ok());
        assert!(Staircase::new(0, 0, vec![1.0, 2.0], vec![1.5, 3.0]).is_err());
        assert!(Staircase::new(0, 0, vec![1.0], vec![1.0, 3.0]).is_err());
    }

    #[test]
    fn staircase_csv_round_trip() {
        let prm = LatticeParams::new(2.0, 1.0).unwrap();
        let s = Staircase::new(-1, 2, vec![0.5, 0.25, 0.125], vec![0.5, 1.5]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf, &prm).unwrap();
        let (s2, prm2) = Staircase::read_csv(&buf[..]).unwrap();
        assert_eq!(s2.row, s.row);
        assert_eq!(s2.col, s.col);
        assert_eq!(s2.n0, -1);
        assert_eq!(s2.m0, 2);
        assert_eq!(prm2, prm);
    }
}
