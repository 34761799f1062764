//! Shared value types: intervals, uniform grids, piecewise-linear curves,
//! line ensembles, boundary data and the walk lattice.
//!
//! All types are immutable after construction.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Closed time interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Parameter(format!("interval requires finite a < b, got [{a}, {b}]")));
        }
        Ok(Interval { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.a && t <= self.b
    }
}

/// Uniform grid of `steps + 1` times on an interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    interval: Interval,
    steps: usize,
}

impl Grid {
    pub fn new(interval: Interval, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Parameter("grid needs at least one step".into()));
        }
        Ok(Grid { interval, steps })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn spacing(&self) -> f64 {
        self.interval.len() / self.steps as f64
    }

    /// Time of grid point `j`; the last point is `b` exactly.
    pub fn time(&self, j: usize) -> f64 {
        if j == self.steps {
            self.interval.b
        } else {
            self.interval.a + self.interval.len() * (j as f64 / self.steps as f64)
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|j| self.time(j)).collect()
    }

    /// Index of the grid point at `t`, if `t` is within `1e-9` spacings of one.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = (t - self.interval.a) / self.spacing();
        let j = pos.round();
        if j < 0.0 || j > self.steps as f64 || (pos - j).abs() > 1e-9 {
            return None;
        }
        Some(j as usize)
    }
}

/// Strictly decreasing tuple of reals (a point of the open Weyl chamber).
#[derive(Debug, Clone, PartialEq)]
pub struct WeylVector(Vec<f64>);

impl WeylVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Parameter("Weyl vector needs at least one entry".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("Weyl vector entries must be finite".into()));
        }
        if values.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::Parameter(format!("entries must be strictly decreasing: {values:?}")));
        }
        Ok(WeylVector(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }

    pub fn last(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &WeylVector) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }
}

/// Piecewise-linear curve sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: Grid,
    values: Vec<f64>,
}

impl Curve {
    pub fn new(interval: Interval, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Parameter("a curve needs at least two grid values".into()));
        }
        let grid = Grid::new(interval, values.len() - 1)?;
        Ok(Curve { grid, values })
    }

    pub fn from_grid(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Curve { grid, values })
    }

    pub fn constant(interval: Interval, steps: usize, value: f64) -> Result<Self> {
        Curve::from_grid(Grid::new(interval, steps)?, vec![value; steps + 1])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn interval(&self) -> Interval {
        self.grid.interval
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation; exact at grid points.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let iv = self.grid.interval;
        if !iv.contains(t) {
            return Err(Error::Domain(format!("t={t} outside [{}, {}]", iv.a, iv.b)));
        }
        let m = self.grid.steps;
        let pos = (t - iv.a) / self.grid.spacing();
        let near = pos.round().clamp(0.0, m as f64) as usize;
        if self.grid.time(near) == t {
            return Ok(self.values[near]);
        }
        let j = (pos.floor() as usize).min(m - 1);
        let frac = (pos - j as f64).clamp(0.0, 1.0);
        Ok(self.values[j] + frac * (self.values[j + 1] - self.values[j]))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Restriction to the grid points `lo..=hi`.
    pub fn restrict(&self, lo: usize, hi: usize) -> Result<Curve> {
        if lo >= hi || hi > self.grid.steps {
            return Err(Error::Parameter(format!("bad restriction {lo}..={hi}")));
        }
        let iv = Interval::new(self.grid.time(lo), self.grid.time(hi))?;
        Curve::new(iv, self.values[lo..=hi].to_vec())
    }
}

/// Free function form of [`Curve::eval`].
pub fn eval_curve(c: &Curve, t: f64) -> Result<f64> {
    c.eval(t)
}

/// Upper (`f`) or lower (`g`) boundary data for an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum Barrier {
    PlusInfinity,
    MinusInfinity,
    Curve(Curve),
}

impl Barrier {
    pub fn is_infinite(&self) -> bool {
        !matches!(self, Barrier::Curve(_))
    }

    /// Barrier values at the points of `grid`; sentinels map to `±inf`,
    /// which only ever enter comparisons.
    pub fn on_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        match self {
            Barrier::PlusInfinity => Ok(vec![f64::INFINITY; grid.len()]),
            Barrier::MinusInfinity => Ok(vec![f64::NEG_INFINITY; grid.len()]),
            Barrier::Curve(c) => {
                if c.grid == *grid {
                    return Ok(c.values.clone());
                }
                let iv = c.interval();
                let gi = grid.interval();
                if gi.a < iv.a || gi.b > iv.b {
                    return Err(Error::Structure(format!(
                        "barrier on [{}, {}] does not cover [{}, {}]",
                        iv.a, iv.b, gi.a, gi.b
                    )));
                }
                grid.times().into_iter().map(|t| c.eval(t)).collect()
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Barrier::PlusInfinity => Ok(f64::INFINITY),
            Barrier::MinusInfinity => Ok(f64::NEG_INFINITY),
            Barrier::Curve(c) => c.eval(t),
        }
    }
}

/// `k` curves on a shared grid, indexed top (0) to bottom (k-1).
#[derive(Debug, Clone, PartialEq)]
pub struct LineEnsemble {
    grid: Grid,
    curves: Vec<Curve>,
}

impl LineEnsemble {
    pub fn new(curves: Vec<Curve>) -> Result<Self> {
        let first = curves
            .first()
            .ok_or_else(|| Error::Parameter("ensemble needs at least one curve".into()))?;
        let grid = first.grid;
        if curves.iter().any(|c| c.grid != grid) {
            return Err(Error::Structure("ensemble curves must share one grid".into()));
        }
        Ok(LineEnsemble { grid, curves })
    }

    /// Builds an ensemble from per-curve value rows on `grid`.
    pub fn from_rows(grid: Grid, rows: Vec<Vec<f64>>) -> Result<Self> {
        let curves = rows
            .into_iter()
            .map(|r| Curve::from_grid(grid, r))
            .collect::<Result<Vec<_>>>()?;
        LineEnsemble::new(curves)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn interval(&self) -> Interval {
        self.grid.interval
    }

    pub fn k(&self) -> usize {
        self.curves.len()
    }

    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &Curve {
        &self.curves[i]
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.curves[i].values[j]
    }

    pub fn into_curves(self) -> Vec<Curve> {
        self.curves
    }
}

/// True iff `f > curve_0 > ... > curve_{k-1} > g` at every grid point.
///
/// Comparisons are exact; infinite barriers always hold.
pub fn check_avoiding(ens: &LineEnsemble, f: &Barrier, g: &Barrier) -> Result<bool> {
    let grid = ens.grid();
    let upper = f.on_grid(&grid)?;
    let lower = g.on_grid(&grid)?;
    let k = ens.k();
    for j in 0..grid.len() {
        let top = ens.value(0, j);
        if !(upper[j] > top) {
            return Ok(false);
        }
        for i in 1..k {
            if !(ens.value(i - 1, j) > ens.value(i, j)) {
                return Ok(false);
            }
        }
        if !(ens.value(k - 1, j) > lower[j]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lattice of the random-walk approximation: `steps` time increments of
/// `dt = (b - a) / steps` and spatial unit `dx = sqrt(3 dt / 2)`.
///
/// The canonical scaling uses `steps = n^2`; arbitrary step counts are
/// allowed so that tiny enumerable instances (two steps, say) exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    interval: Interval,
    steps: usize,
    dt: f64,
    dx: f64,
}

impl LatticeParams {
    pub fn from_scale(interval: Interval, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parameter("lattice scale n must be positive".into()));
        }
        Self::with_steps(interval, n * n)
    }

    pub fn with_steps(interval: Interval, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::Parameter("lattice needs at least one step".into()));
        }
        let dt = interval.len() / steps as f64;
        let dx = (1.5 * dt).sqrt();
        Ok(LatticeParams { interval, steps, dt, dx })
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn grid(&self) -> Grid {
        Grid { interval: self.interval, steps: self.steps }
    }

    /// Integer lattice height of `x`; fails unless `x` is a multiple of `dx`
    /// to within `1e-12 dx`.
    pub fn height_of(&self, x: f64) -> Result<i64> {
        let h = (x / self.dx).round();
        if ((x / self.dx) - h).abs() > 1e-12 * h.abs().max(1.0) {
            return Err(Error::Parameter(format!("{x} is not on the dx={} lattice", self.dx)));
        }
        Ok(h as i64)
    }

    pub fn value_of(&self, h: i64) -> f64 {
        h as f64 * self.dx
    }

    /// Grid indices `(lo, hi)` of the smallest lattice window containing
    /// `[a', b']`: `lo` rounds down, `hi` rounds up.
    pub fn snap_window(&self, a_prime: f64, b_prime: f64) -> Result<(usize, usize)> {
        let iv = self.interval;
        if a_prime < iv.a || b_prime > iv.b || a_prime >= b_prime {
            return Err(Error::Parameter(format!("window [{a_prime}, {b_prime}] not inside the lattice interval")));
        }
        let lo = ((a_prime - iv.a) / self.dt * (1.0 + 1e-15)).floor() as usize;
        let hi = (((b_prime - iv.a) / self.dt) * (1.0 - 1e-15)).ceil() as usize;
        Ok((lo, hi.min(self.steps)))
    }
}

// ---------------------------------------------------------------------------
// Columnar text format
// ---------------------------------------------------------------------------

/// Writes one ensemble block: a header `# k=<k> M=<M> a=<a> b=<b>` followed by
/// `M + 1` rows `t,v_1,...,v_k`. Floats use shortest round-trip formatting.
pub fn write_ensemble<W: Write>(w: &mut W, ens: &LineEnsemble) -> std::io::Result<()> {
    let grid = ens.grid();
    let iv = grid.interval();
    let mut out = String::new();
    let _ = writeln!(out, "# k={} M={} a={} b={}", ens.k(), grid.steps(), iv.a, iv.b);
    for j in 0..grid.len() {
        let _ = write!(out, "{}", grid.time(j));
        for i in 0..ens.k() {
            let _ = write!(out, ",{}", ens.value(i, j));
        }
        out.push('\n');
    }
    w.write_all(out.as_bytes())
}

fn header_field(tok: Option<&str>, key: &str) -> Result<String> {
    let tok = tok.ok_or_else(|| Error::Parse(format!("missing header field {key}")))?;
    tok.strip_prefix(key)
        .and_then(|s| s.strip_prefix('='))
        .map(str::to_string)
        .ok_or_else(|| Error::Parse(format!("expected {key}=..., got {tok}")))
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))
}

/// Reads every ensemble block from a columnar stream.
pub fn read_ensembles<R: BufRead>(r: R) -> Result<Vec<LineEnsemble>> {
    let mut out = Vec::new();
    let mut lines = r.lines();
    while let Some(line) = lines.next() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("# ")
            .ok_or_else(|| Error::Parse(format!("expected header, got {line:?}")))?;
        let mut toks = rest.split_whitespace();
        let k: usize = parse_num(&header_field(toks.next(), "k")?)?;
        let m: usize = parse_num(&header_field(toks.next(), "M")?)?;
        let a: f64 = parse_num(&header_field(toks.next(), "a")?)?;
        let b: f64 = parse_num(&header_field(toks.next(), "b")?)?;
        let grid = Grid::new(Interval::new(a, b)?, m)?;
        let mut rows = vec![Vec::with_capacity(m + 1); k];
        for j in 0..=m {
            let row = lines
                .next()
                .ok_or_else(|| Error::Parse("truncated ensemble block".into()))??;
            let mut cols = row.split(',');
            let t: f64 = parse_num(cols.next().unwrap_or(""))?;
            if (t - grid.time(j)).abs() > 1e-9 * grid.spacing() {
                return Err(Error::Parse(format!("row {j}: time {t} off grid")));
            }
            for (i, row_i) in rows.iter_mut().enumerate() {
                let v = cols
                    .next()
                    .ok_or_else(|| Error::Parse(format!("row {j}: missing value for curve {i}")))?;
                row_i.push(parse_num(v)?);
            }
        }
        out.push(LineEnsemble::from_rows(grid, rows)?);
    }
    Ok(out)
}
