//! Trinomial random-walk bridges on the `(dt, dx)` lattice.
//!
//! A walk bridge takes `N` steps in `{-1, 0, +1}` with equal weights and is
//! conditioned on its endpoint. Exact sampling goes step by step using path
//! counts: from partial sum `S` after `m` steps the next step is `d` with
//! probability `C(N - m - 1, z - S - d) / C(N - m, z - S)`, where `C(n, d)`
//! counts `n`-step sequences summing to `d`.
//!
//! Counts are available exactly ([`count_paths`], [`count_paths_u128`]); the
//! sampler works from a table of their natural logarithms, which stays finite
//! at the step counts (`N ~ 10^3`) used for the continuum limit.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use crate::domain::{check_avoiding, Barrier, Curve, LatticeParams, LineEnsemble, WeylVector};
use crate::error::{Error, Result};

/// Number of `n`-step `{-1, 0, 1}` sequences summing to `d`.
pub fn count_paths(n: u32, d: i64) -> BigUint {
    if d.unsigned_abs() > n as u64 {
        return BigUint::zero();
    }
    let n = n as usize;
    let mut row = vec![BigUint::zero(); 2 * n + 1];
    row[n] = BigUint::one();
    for m in 1..=n {
        let mut next = vec![BigUint::zero(); 2 * n + 1];
        for (i, slot) in next.iter_mut().enumerate().take(n + m + 1).skip(n - m) {
            let mut acc = row[i].clone();
            if i > 0 {
                acc += &row[i - 1];
            }
            if i + 1 < row.len() {
                acc += &row[i + 1];
            }
            *slot = acc;
        }
        row = next;
    }
    row[(n as i64 + d) as usize].clone()
}

/// Fixed-width variant of [`count_paths`]; overflow is reported, never wrapped.
pub fn count_paths_u128(n: u32, d: i64) -> Result<u128> {
    if d.unsigned_abs() > n as u64 {
        return Ok(0);
    }
    let w = n as usize;
    let mut row = vec![0u128; 2 * w + 1];
    row[w] = 1;
    for m in 1..=w {
        let mut next = vec![0u128; 2 * w + 1];
        for i in (w - m)..=(w + m) {
            let mut acc = row[i];
            if i > 0 {
                acc = acc.checked_add(row[i - 1]).ok_or(Error::Overflow { n, d })?;
            }
            if i + 1 < row.len() {
                acc = acc.checked_add(row[i + 1]).ok_or(Error::Overflow { n, d })?;
            }
            next[i] = acc;
        }
        row = next;
    }
    Ok(row[(w as i64 + d) as usize])
}

/// A walk of `N` steps with sum `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkBridge {
    z: i64,
    steps: Vec<i8>,
}

impl WalkBridge {
    pub fn new(steps: Vec<i8>) -> Result<Self> {
        if steps.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::Parameter("walk steps must lie in {-1, 0, 1}".into()));
        }
        let z = steps.iter().map(|&s| s as i64).sum();
        Ok(WalkBridge { z, steps })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn z(&self) -> i64 {
        self.z
    }

    pub fn steps(&self) -> &[i8] {
        &self.steps
    }

    /// Heights `0, S_1, ..., S_N` relative to the start.
    pub fn partial_sums(&self) -> Vec<i64> {
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        let mut s = 0i64;
        out.push(0);
        for &d in &self.steps {
            s += d as i64;
            out.push(s);
        }
        out
    }
}

/// Step-probability table for walk bridges of up to `max_steps` steps.
///
/// Entry `(R, e)` holds `P(step = -1)` and `P(step <= 0)` for a walk with `R`
/// steps remaining that must still travel `e`.
#[derive(Debug, Clone)]
pub struct WalkBridgeSampler {
    max_steps: usize,
    // ln C(m, d) at offset m*m + (d + m)
    log_counts: Vec<f64>,
    // cumulative step probabilities, same layout
    cumulative: Vec<[f64; 2]>,
}

fn tri_index(m: usize, d: i64) -> usize {
    m * m + (d + m as i64) as usize
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl WalkBridgeSampler {
    pub fn new(max_steps: usize) -> Self {
        let size = (max_steps + 1) * (max_steps + 1);
        let mut log_counts = vec![f64::NEG_INFINITY; size];
        log_counts[0] = 0.0;
        for m in 1..=max_steps {
            let prev = |d: i64| -> f64 {
                if d.unsigned_abs() as usize > m - 1 {
                    f64::NEG_INFINITY
                } else {
                    log_counts[tri_index(m - 1, d)]
                }
            };
            let row: Vec<f64> = (-(m as i64)..=m as i64)
                .map(|d| log_add(log_add(prev(d - 1), prev(d)), prev(d + 1)))
                .collect();
            for (off, v) in row.into_iter().enumerate() {
                log_counts[m * m + off] = v;
            }
        }
        let mut cumulative = vec![[0.0, 0.0]; size];
        for r in 1..=max_steps {
            for e in -(r as i64)..=r as i64 {
                let total = log_counts[tri_index(r, e)];
                let p = |d: i64| -> f64 {
                    let rest = e - d;
                    if rest.unsigned_abs() as usize > r - 1 {
                        0.0
                    } else {
                        (log_counts[tri_index(r - 1, rest)] - total).exp()
                    }
                };
                let (pm, p0, pp) = (p(-1), p(0), p(1));
                let norm = pm + p0 + pp;
                cumulative[tri_index(r, e)] = [pm / norm, (pm + p0) / norm];
            }
        }
        WalkBridgeSampler { max_steps, log_counts, cumulative }
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    /// `ln C(m, d)`, or `-inf` when `|d| > m`.
    pub fn log_count(&self, m: usize, d: i64) -> f64 {
        if m > self.max_steps || d.unsigned_abs() as usize > m {
            return f64::NEG_INFINITY;
        }
        self.log_counts[tri_index(m, d)]
    }

    /// Probability of stepping by `delta` with `remaining` steps left and
    /// displacement `e` still to cover.
    pub fn step_prob(&self, remaining: usize, e: i64, delta: i8) -> f64 {
        let c = self.cumulative[tri_index(remaining, e)];
        match delta {
            -1 => c[0],
            0 => c[1] - c[0],
            _ => 1.0 - c[1],
        }
    }

    #[inline]
    pub fn next_step<R: Rng + ?Sized>(&self, remaining: usize, e: i64, rng: &mut R) -> i8 {
        let c = self.cumulative[tri_index(remaining, e)];
        let u: f64 = rng.random();
        if u < c[0] {
            -1
        } else if u < c[1] {
            0
        } else {
            1
        }
    }

    fn check(&self, n: usize, z: i64) -> Result<()> {
        if n > self.max_steps {
            return Err(Error::Parameter(format!("table built for {} steps, asked for {n}", self.max_steps)));
        }
        if z.unsigned_abs() as usize > n {
            return Err(Error::Parameter(format!("endpoint |z|={} exceeds N={n}", z.abs())));
        }
        Ok(())
    }

    /// Exact sample of the `n`-step walk conditioned to end at `z`.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, z: i64, rng: &mut R) -> Result<WalkBridge> {
        self.check(n, z)?;
        let mut steps = Vec::with_capacity(n);
        let mut s = 0i64;
        for m in 0..n {
            let d = self.next_step(n - m, z - s, rng);
            s += d as i64;
            steps.push(d);
        }
        Ok(WalkBridge { z, steps })
    }

    /// Sum of the natural logs of the per-step probabilities along `w`.
    pub fn path_log_prob(&self, w: &WalkBridge) -> Result<f64> {
        let n = w.len();
        self.check(n, w.z)?;
        let mut s = 0i64;
        let mut acc = 0.0;
        for (m, &d) in w.steps.iter().enumerate() {
            let rest = w.z - s - d as i64;
            acc += self.log_count(n - m - 1, rest) - self.log_count(n - m, w.z - s);
            s += d as i64;
        }
        Ok(acc)
    }
}

/// Samples an `n`-step walk bridge ending at `z`.
pub fn sample_walk_bridge<R: Rng + ?Sized>(n: usize, z: i64, rng: &mut R) -> Result<WalkBridge> {
    if z.unsigned_abs() as usize > n {
        return Err(Error::Parameter(format!("endpoint |z|={} exceeds N={n}", z.abs())));
    }
    WalkBridgeSampler::new(n).sample(n, z, rng)
}

/// Lattice curve `x0 + dx * S_j` at the lattice times.
pub fn embed_walk_as_curve(w: &WalkBridge, lattice: &LatticeParams, x0: f64) -> Result<Curve> {
    if w.len() != lattice.steps() {
        return Err(Error::Structure(format!(
            "walk has {} steps, lattice has {}",
            w.len(),
            lattice.steps()
        )));
    }
    let dx = lattice.dx();
    let values = w.partial_sums().into_iter().map(|s| x0 + dx * s as f64).collect();
    Curve::from_grid(lattice.grid(), values)
}

/// Boundary data for an avoiding walk ensemble.
#[derive(Debug, Clone)]
pub struct WalkEnsembleSpec {
    lattice: LatticeParams,
    x: WeylVector,
    y: WeylVector,
    f: Barrier,
    g: Barrier,
    x_heights: Vec<i64>,
    y_heights: Vec<i64>,
}

impl WalkEnsembleSpec {
    pub fn new(lattice: LatticeParams, x: WeylVector, y: WeylVector, f: Barrier, g: Barrier) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Parameter("entrance and exit vectors differ in length".into()));
        }
        let x_heights = x.as_slice().iter().map(|&v| lattice.height_of(v)).collect::<Result<Vec<_>>>()?;
        let y_heights = y.as_slice().iter().map(|&v| lattice.height_of(v)).collect::<Result<Vec<_>>>()?;
        for (i, (hx, hy)) in x_heights.iter().zip(&y_heights).enumerate() {
            if (hx - hy).unsigned_abs() as usize > lattice.steps() {
                return Err(Error::Parameter(format!("curve {i}: endpoints unreachable in {} steps", lattice.steps())));
            }
        }
        Ok(WalkEnsembleSpec { lattice, x, y, f, g, x_heights, y_heights })
    }

    /// Spec whose endpoints are given directly as lattice heights.
    pub fn from_heights(lattice: LatticeParams, x: &[i64], y: &[i64], f: Barrier, g: Barrier) -> Result<Self> {
        let xv = WeylVector::new(x.iter().map(|&h| lattice.value_of(h)).collect())?;
        let yv = WeylVector::new(y.iter().map(|&h| lattice.value_of(h)).collect())?;
        Self::new(lattice, xv, yv, f, g)
    }

    pub fn lattice(&self) -> &LatticeParams {
        &self.lattice
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &WeylVector {
        &self.x
    }

    pub fn y(&self) -> &WeylVector {
        &self.y
    }

    pub fn f(&self) -> &Barrier {
        &self.f
    }

    pub fn g(&self) -> &Barrier {
        &self.g
    }

    pub fn x_heights(&self) -> &[i64] {
        &self.x_heights
    }

    pub fn y_heights(&self) -> &[i64] {
        &self.y_heights
    }

    /// Builds the ensemble curves from integer heights (one row per curve).
    pub fn ensemble_from_heights(&self, heights: &[Vec<i64>]) -> Result<LineEnsemble> {
        let rows = heights
            .iter()
            .map(|h| h.iter().map(|&v| self.lattice.value_of(v)).collect())
            .collect();
        LineEnsemble::from_rows(self.lattice.grid(), rows)
    }
}

/// Rejection sampler: independent walk bridges advanced in lockstep, an
/// attempt is abandoned at the first lattice column where ordering or a
/// barrier fails. Returns the ensemble and the number of attempts used.
pub fn sample_avoiding_walks<R: Rng + ?Sized>(
    spec: &WalkEnsembleSpec,
    sampler: &WalkBridgeSampler,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(LineEnsemble, u64)> {
    let (heights, attempts) = sample_avoiding_heights(spec, sampler, rng, max_attempts)?;
    Ok((spec.ensemble_from_heights(&heights)?, attempts))
}

/// As [`sample_avoiding_walks`], returning integer heights.
pub fn sample_avoiding_heights<R: Rng + ?Sized>(
    spec: &WalkEnsembleSpec,
    sampler: &WalkBridgeSampler,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Vec<Vec<i64>>, u64)> {
    let n = spec.lattice.steps();
    let k = spec.k();
    if n > sampler.max_steps() {
        return Err(Error::Parameter("walk sampler table is too small for this lattice".into()));
    }
    let grid = spec.lattice.grid();
    let upper = spec.f.on_grid(&grid)?;
    let lower = spec.g.on_grid(&grid)?;
    let dx = spec.lattice.dx();
    let fits = |j: usize, hs: &[i64]| -> bool {
        if !(upper[j] > hs[0] as f64 * dx) || !(hs[k - 1] as f64 * dx > lower[j]) {
            return false;
        }
        hs.windows(2).all(|w| w[0] > w[1])
    };
    let mut heights = vec![vec![0i64; n + 1]; k];
    let mut col = vec![0i64; k];
    for attempt in 1..=max_attempts {
        col.copy_from_slice(&spec.x_heights);
        let mut ok = fits(0, &col);
        for j in 0..=n {
            if !ok {
                break;
            }
            if j > 0 {
                for i in 0..k {
                    let e = spec.y_heights[i] - col[i];
                    col[i] += sampler.next_step(n - j + 1, e, rng) as i64;
                }
                ok = fits(j, &col);
            }
            for i in 0..k {
                heights[i][j] = col[i];
            }
        }
        if ok {
            return Ok((heights, attempt));
        }
    }
    Err(Error::RejectionExhausted { attempts: max_attempts })
}

const ENUMERATION_LIMIT: f64 = 1e7;

fn walks_between(n: usize, to: i64, out: &mut Vec<Vec<i64>>, path: &mut Vec<i64>) {
    let cur = *path.last().expect("path starts with the entrance height");
    let left = n + 1 - path.len();
    if left == 0 {
        if cur == to {
            out.push(path.clone());
        }
        return;
    }
    for d in [-1i64, 0, 1] {
        let next = cur + d;
        if ((to - next).unsigned_abs() as usize) < left {
            path.push(next);
            walks_between(n, to, out, path);
            path.pop();
        }
    }
}

/// All avoiding lattice configurations as integer heights, in lexicographic
/// order of the concatenated step lists (curve 0 first, `-1 < 0 < +1`).
pub fn enumerate_avoiding_heights(spec: &WalkEnsembleSpec) -> Result<Vec<Vec<Vec<i64>>>> {
    let n = spec.lattice.steps();
    let k = spec.k();
    let size = 3f64.powf((k * n) as f64);
    if size > ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("3^(k*N) = 3^{} exceeds {ENUMERATION_LIMIT:e}", k * n)));
    }
    let per_curve: Vec<Vec<Vec<i64>>> = (0..k)
        .map(|i| {
            let mut out = Vec::new();
            let mut path = vec![spec.x_heights[i]];
            walks_between(n, spec.y_heights[i], &mut out, &mut path);
            out
        })
        .collect();
    let grid = spec.lattice.grid();
    let upper = spec.f.on_grid(&grid)?;
    let lower = spec.g.on_grid(&grid)?;
    let dx = spec.lattice.dx();
    let mut result = Vec::new();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    fn rec(
        i: usize,
        per_curve: &[Vec<Vec<i64>>],
        chosen: &mut Vec<usize>,
        accept: &dyn Fn(usize, &[i64], Option<&[i64]>) -> bool,
        result: &mut Vec<Vec<Vec<i64>>>,
    ) {
        if i == per_curve.len() {
            result.push(chosen.iter().enumerate().map(|(c, &p)| per_curve[c][p].clone()).collect());
            return;
        }
        for (p, path) in per_curve[i].iter().enumerate() {
            let above = if i == 0 { None } else { Some(per_curve[i - 1][chosen[i - 1]].as_slice()) };
            if accept(i, path, above) {
                chosen.push(p);
                rec(i + 1, per_curve, chosen, accept, result);
                chosen.pop();
            }
        }
    }
    let accept = |i: usize, path: &[i64], above: Option<&[i64]>| -> bool {
        for j in 0..path.len() {
            let v = path[j] as f64 * dx;
            if i == 0 && !(upper[j] > v) {
                return false;
            }
            if i == k - 1 && !(v > lower[j]) {
                return false;
            }
            if let Some(a) = above {
                if a[j] <= path[j] {
                    return false;
                }
            }
        }
        true
    };
    rec(0, &per_curve, &mut chosen, &accept, &mut result);
    Ok(result)
}

/// All avoiding lattice configurations as ensembles; see
/// [`enumerate_avoiding_heights`] for the ordering.
pub fn enumerate_avoiding_configs(spec: &WalkEnsembleSpec) -> Result<Vec<LineEnsemble>> {
    let configs = enumerate_avoiding_heights(spec)?;
    let mut out = Vec::with_capacity(configs.len());
    for c in &configs {
        let ens = spec.ensemble_from_heights(c)?;
        debug_assert!(check_avoiding(&ens, &spec.f, &spec.g)?);
        out.push(ens);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_paths(2, 0), BigUint::from(3u32));
        assert_eq!(count_paths(1, 1), BigUint::from(1u32));
        assert_eq!(count_paths(3, 0), BigUint::from(7u32));
        assert_eq!(count_paths(4, 0), BigUint::from(19u32));
        assert_eq!(count_paths(3, 4), BigUint::zero());
        assert_eq!(count_paths(0, 0), BigUint::one());
    }

    #[test]
    fn counts_sum_to_power_of_three() {
        for n in 0..30u32 {
            let total: BigUint = (-(n as i64)..=n as i64).map(|d| count_paths(n, d)).sum();
            assert_eq!(total, BigUint::from(3u32).pow(n));
        }
    }

    #[test]
    fn fixed_width_agrees_then_overflows() {
        for n in [0u32, 5, 40, 75] {
            for d in [0i64, 1, -3, n as i64] {
                assert_eq!(BigUint::from(count_paths_u128(n, d).unwrap()), count_paths(n, d));
            }
        }
        assert!(matches!(count_paths_u128(120, 0), Err(Error::Overflow { .. })));
    }

    #[test]
    fn log_table_matches_exact_counts() {
        let s = WalkBridgeSampler::new(200);
        for n in [1usize, 7, 50, 200] {
            for d in [0i64, 1, -(n as i64) / 2, n as i64] {
                let exact = count_paths(n as u32, d);
                let f: f64 = num_traits::ToPrimitive::to_f64(&exact).unwrap();
                assert!((s.log_count(n, d) - f.ln()).abs() < 1e-11 * f.ln().max(1.0));
            }
        }
    }

    #[test]
    fn forced_and_first_step_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            assert_eq!(sample_walk_bridge(1, 1, &mut rng).unwrap().steps(), &[1]);
        }
        let s = WalkBridgeSampler::new(4);
        assert!((s.step_prob(4, 0, 0) - 7.0 / 19.0).abs() < 1e-15);
        assert!((s.step_prob(4, 0, 1) - 6.0 / 19.0).abs() < 1e-15);
        assert!(sample_walk_bridge(2, 3, &mut rng).is_err());
    }

    #[test]
    fn two_step_bridge_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = WalkBridgeSampler::new(2);
        let mut counts: HashMap<Vec<i8>, u32> = HashMap::new();
        let n = 100_000;
        for _ in 0..n {
            *counts.entry(s.sample(2, 0, &mut rng).unwrap().steps().to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 3);
        let chi2: f64 = counts.values().map(|&c| (c as f64 - n as f64 / 3.0).powi(2) / (n as f64 / 3.0)).sum();
        // 0.999 quantile of chi-square with 2 degrees of freedom
        assert!(chi2 < 13.8155, "chi2={chi2}");
    }

    #[test]
    fn telescoping_against_exact_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = WalkBridgeSampler::new(300);
        for &(n, z) in &[(6usize, 2i64), (40, -7), (300, 11)] {
            let exact: f64 = num_traits::ToPrimitive::to_f64(&count_paths(n as u32, z)).unwrap();
            for _ in 0..20 {
                let w = s.sample(n, z, &mut rng).unwrap();
                assert_eq!(w.z(), z);
                assert!((s.path_log_prob(&w).unwrap() + exact.ln()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn embedding_examples() {
        let lat = LatticeParams::with_steps(unit(), 2).unwrap();
        let w = WalkBridge::new(vec![1, -1]).unwrap();
        let c = embed_walk_as_curve(&w, &lat, 0.0).unwrap();
        assert_eq!(c.values(), &[0.0, lat.dx(), 0.0]);
        let flat = WalkBridge::new(vec![0, 0]).unwrap();
        assert_eq!(embed_walk_as_curve(&flat, &lat, 1.5).unwrap().values(), &[1.5, 1.5, 1.5]);
        let lat4 = LatticeParams::from_scale(unit(), 2).unwrap();
        assert!(matches!(embed_walk_as_curve(&w, &lat4, 0.0), Err(Error::Structure(_))));
        let w4 = WalkBridge::new(vec![1, 1, 0, -1]).unwrap();
        let c4 = embed_walk_as_curve(&w4, &lat4, 0.25).unwrap();
        assert_eq!(c4.eval(1.0).unwrap(), 0.25 + lat4.dx());
    }

    fn tiny(k_heights: (&[i64], &[i64]), g: Barrier) -> WalkEnsembleSpec {
        let lat = LatticeParams::with_steps(unit(), 2).unwrap();
        WalkEnsembleSpec::from_heights(lat, k_heights.0, k_heights.1, Barrier::PlusInfinity, g).unwrap()
    }

    #[test]
    fn enumeration_examples() {
        let free = tiny((&[0], &[0]), Barrier::MinusInfinity);
        let all = enumerate_avoiding_heights(&free).unwrap();
        assert_eq!(all, vec![vec![vec![0, -1, 0]], vec![vec![0, 0, 0]], vec![vec![0, 1, 0]]]);

        let lat = free.lattice();
        let g = Barrier::Curve(Curve::constant(unit(), 2, -lat.dx() / 2.0).unwrap());
        let spec = tiny((&[0], &[0]), g);
        let ens = enumerate_avoiding_configs(&spec).unwrap();
        let mids: Vec<f64> = ens.iter().map(|e| e.value(0, 1)).collect();
        assert_eq!(mids, vec![0.0, lat.dx()]);

        assert!(WalkEnsembleSpec::from_heights(*lat, &[0, 1], &[1, 0], Barrier::PlusInfinity, Barrier::MinusInfinity).is_err());
    }

    #[test]
    fn enumeration_guard() {
        let lat = LatticeParams::from_scale(unit(), 4).unwrap();
        let spec = WalkEnsembleSpec::from_heights(lat, &[0], &[0], Barrier::PlusInfinity, Barrier::MinusInfinity).unwrap();
        assert!(matches!(enumerate_avoiding_heights(&spec), Err(Error::TooLarge(_))));
    }

    #[test]
    fn trivial_rejection_accepts_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let lat = LatticeParams::from_scale(unit(), 3).unwrap();
        let spec = WalkEnsembleSpec::from_heights(lat, &[0], &[2], Barrier::PlusInfinity, Barrier::MinusInfinity).unwrap();
        let s = WalkBridgeSampler::new(9);
        for _ in 0..20 {
            let (ens, attempts) = sample_avoiding_walks(&spec, &s, &mut rng, 1).unwrap();
            assert_eq!(attempts, 1);
            assert_eq!(ens.value(0, 9), 2.0 * lat.dx());
        }
    }

    #[test]
    fn impossible_barrier_exhausts() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let spec = tiny((&[0], &[0]), Barrier::Curve(Curve::constant(unit(), 2, 1.0).unwrap()));
        let s = WalkBridgeSampler::new(2);
        match sample_avoiding_walks(&spec, &s, &mut rng, 50) {
            Err(Error::RejectionExhausted { attempts }) => assert_eq!(attempts, 50),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn acceptance_rate_matches_enumeration() {
        let spec = tiny((&[1, 0], &[1, 0]), Barrier::MinusInfinity);
        let good = enumerate_avoiding_heights(&spec).unwrap().len() as f64;
        let total = 9.0;
        let p = good / total;
        assert_eq!(good, 6.0);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let s = WalkBridgeSampler::new(2);
        let n = 100_000u64;
        let mut used = 0u64;
        for _ in 0..(n as f64 * p) as u64 {
            used += sample_avoiding_walks(&spec, &s, &mut rng, 1000).unwrap().1;
        }
        let accepted = (n as f64 * p) as f64;
        let rate = accepted / used as f64;
        let se = (p * (1.0 - p) / used as f64).sqrt();
        assert!((rate - p).abs() < 4.0 * se, "rate {rate} vs {p}");
    }

    #[test]
    fn rejection_law_is_uniform_on_tiny_instance() {
        let spec = tiny((&[1, 0], &[1, 0]), Barrier::MinusInfinity);
        let configs = enumerate_avoiding_heights(&spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = WalkBridgeSampler::new(2);
        let n = 100_000;
        let mut counts = vec![0u32; configs.len()];
        for _ in 0..n {
            let (h, _) = sample_avoiding_heights(&spec, &s, &mut rng, 1000).unwrap();
            counts[configs.iter().position(|c| *c == h).unwrap()] += 1;
        }
        let u = 1.0 / configs.len() as f64;
        let tv: f64 = 0.5 * counts.iter().map(|&c| (c as f64 / n as f64 - u).abs()).sum::<f64>();
        assert!(tv <= 0.02, "tv={tv}");
    }

    proptest! {
        #[test]
        fn samples_hit_endpoint(n in 1usize..40, frac in -1.0f64..=1.0, seed in any::<u64>()) {
            let z = (frac * n as f64).round() as i64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let w = sample_walk_bridge(n, z, &mut rng).unwrap();
            prop_assert_eq!(w.len(), n);
            prop_assert_eq!(w.steps().iter().map(|&s| s as i64).sum::<i64>(), z);
        }

        #[test]
        fn step_probabilities_normalise(r in 1usize..60, frac in -1.0f64..=1.0) {
            let s = WalkBridgeSampler::new(60);
            let e = (frac * r as f64).round() as i64;
            let total = s.step_prob(r, e, -1) + s.step_prob(r, e, 0) + s.step_prob(r, e, 1);
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
