//! Avoiding Brownian line ensembles: `k` independent bridges conditioned to
//! stay strictly ordered, below an upper barrier `f` and above a lower
//! barrier `g`, checked on the sampling grid.
//!
//! The primary sampler is rejection with early abort: all curves are advanced
//! together one grid step at a time and an attempt is dropped at the first
//! column that violates ordering or a barrier. When the pilot acceptance rate
//! falls below [`FALLBACK_ACCEPTANCE`], [`sample_avoiding_auto`] switches to
//! the lattice walk + Glauber pipeline.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::bridge::midpoint_cdf_single;
use crate::domain::{Barrier, Curve, Grid, Interval, LatticeParams, LineEnsemble, WeylVector};
use crate::error::{Error, Result};
use crate::glauber;
use crate::rng::RngSeed;
use crate::verify::stats::wilson_interval;

/// Pilot acceptance below which the walk pipeline takes over.
pub const FALLBACK_ACCEPTANCE: f64 = 1e-4;
/// Number of pilot attempts used to measure acceptance.
pub const PILOT_ATTEMPTS: u64 = 10_000;

#[derive(Debug, Clone)]
pub struct AvoidSpec {
    interval: Interval,
    x: WeylVector,
    y: WeylVector,
    f: Barrier,
    g: Barrier,
    grid_points: usize,
}

impl AvoidSpec {
    pub fn new(
        interval: Interval,
        x: WeylVector,
        y: WeylVector,
        f: Barrier,
        g: Barrier,
        grid_points: usize,
    ) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Parameter("entrance and exit vectors differ in length".into()));
        }
        if grid_points < 2 {
            return Err(Error::Parameter(format!("grid needs M >= 2, got {grid_points}")));
        }
        let grid = Grid::new(interval, grid_points)?;
        let upper = f.on_grid(&grid)?;
        let lower = g.on_grid(&grid)?;
        let m = grid_points;
        if !(upper[0] > x.first() && upper[m] > y.first()) {
            return Err(Error::Parameter("upper barrier must lie above the top endpoints".into()));
        }
        if !(lower[0] < x.last() && lower[m] < y.last()) {
            return Err(Error::Parameter("lower barrier must lie below the bottom endpoints".into()));
        }
        if upper.iter().zip(&lower).any(|(u, l)| !(u > l)) {
            return Err(Error::Parameter("upper barrier must stay above the lower barrier".into()));
        }
        Ok(AvoidSpec { interval, x, y, f, g, grid_points })
    }

    /// Barrier-free spec.
    pub fn free(interval: Interval, x: WeylVector, y: WeylVector, grid_points: usize) -> Result<Self> {
        Self::new(interval, x, y, Barrier::PlusInfinity, Barrier::MinusInfinity, grid_points)
    }

    pub fn interval(&self) -> Interval {
        self.interval
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

    pub fn k(&self) -> usize {
        self.x.len()
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.interval, self.grid_points).expect("validated")
    }

    pub fn is_barrier_free(&self) -> bool {
        matches!(self.f, Barrier::PlusInfinity) && matches!(self.g, Barrier::MinusInfinity)
    }
}

/// Reusable rejection sampler for one spec: barrier values and conditional
/// standard deviations are computed once.
#[derive(Debug, Clone)]
pub struct AvoidSampler {
    spec: AvoidSpec,
    upper: Vec<f64>,
    lower: Vec<f64>,
    // sd of the step into column j given column j - 1
    sd: Vec<f64>,
}

impl AvoidSampler {
    pub fn new(spec: &AvoidSpec) -> Result<Self> {
        let grid = spec.grid();
        let upper = spec.f.on_grid(&grid)?;
        let lower = spec.g.on_grid(&grid)?;
        let m = spec.grid_points;
        let dt = grid.spacing();
        let sd = (0..=m)
            .map(|j| {
                if j == 0 || j == m {
                    0.0
                } else {
                    let remaining = (m - j + 1) as f64;
                    (dt * (remaining - 1.0) / remaining).sqrt()
                }
            })
            .collect();
        Ok(AvoidSampler { spec: spec.clone(), upper, lower, sd })
    }

    pub fn spec(&self) -> &AvoidSpec {
        &self.spec
    }

    #[inline]
    fn column_ok(&self, j: usize, col: &[f64]) -> bool {
        let k = col.len();
        if !(self.upper[j] > col[0]) || !(col[k - 1] > self.lower[j]) {
            return false;
        }
        col.windows(2).all(|w| w[0] > w[1])
    }

    /// One attempt; on success `rows[i][j]` holds curve `i` at column `j`.
    pub fn attempt<R: Rng + ?Sized>(&self, rows: &mut [Vec<f64>], rng: &mut R) -> bool {
        let m = self.spec.grid_points;
        let k = self.spec.k();
        let xs = self.spec.x.as_slice();
        let ys = self.spec.y.as_slice();
        let mut col = [0.0f64; 16];
        let mut heap;
        let col: &mut [f64] = if k <= 16 {
            &mut col[..k]
        } else {
            heap = vec![0.0; k];
            &mut heap
        };
        col.copy_from_slice(xs);
        if !self.column_ok(0, col) {
            return false;
        }
        for i in 0..k {
            rows[i][0] = xs[i];
        }
        for j in 1..m {
            let remaining = (m - j + 1) as f64;
            let sd = self.sd[j];
            for i in 0..k {
                let v = col[i];
                let z: f64 = StandardNormal.sample(rng);
                col[i] = v + (ys[i] - v) / remaining + sd * z;
            }
            if !self.column_ok(j, col) {
                return false;
            }
            for i in 0..k {
                rows[i][j] = col[i];
            }
        }
        col.copy_from_slice(ys);
        if !self.column_ok(m, col) {
            return false;
        }
        for i in 0..k {
            rows[i][m] = ys[i];
        }
        true
    }

    /// Rows of the first accepted ensemble and the number of attempts.
    pub fn sample_rows<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(Vec<Vec<f64>>, u64)> {
        let mut rows = vec![vec![0.0; self.spec.grid_points + 1]; self.spec.k()];
        for attempt in 1..=max_attempts {
            if self.attempt(&mut rows, rng) {
                return Ok((rows, attempt));
            }
        }
        Err(Error::RejectionExhausted { attempts: max_attempts })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, max_attempts: u64) -> Result<(LineEnsemble, u64)> {
        let (rows, attempts) = self.sample_rows(rng, max_attempts)?;
        Ok((LineEnsemble::from_rows(self.spec.grid(), rows)?, attempts))
    }

    /// Fraction of `attempts` independent proposals that are accepted.
    pub fn acceptance_rate<R: Rng + ?Sized>(&self, rng: &mut R, attempts: u64) -> f64 {
        let mut rows = vec![vec![0.0; self.spec.grid_points + 1]; self.spec.k()];
        let accepted = (0..attempts).filter(|_| self.attempt(&mut rows, rng)).count();
        accepted as f64 / attempts as f64
    }
}

/// Rejection sampler; returns the ensemble and the number of attempts used.
pub fn sample_avoiding<R: Rng + ?Sized>(spec: &AvoidSpec, rng: &mut R, max_attempts: u64) -> Result<(LineEnsemble, u64)> {
    AvoidSampler::new(spec)?.sample(rng, max_attempts)
}

/// Which sampler produced an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplerPath {
    Rejection { pilot_acceptance: f64, attempts: u64 },
    WalkGlauber { pilot_acceptance: f64, steps: usize, events: u64 },
}

/// Rejection when the pilot acceptance is at least [`FALLBACK_ACCEPTANCE`],
/// otherwise the walk + Glauber pipeline on a lattice with `lattice_steps`
/// steps (endpoints rounded to the nearest lattice heights; `f` must be
/// `+inf`).
pub fn sample_avoiding_auto(
    spec: &AvoidSpec,
    seed: &RngSeed,
    max_attempts: u64,
    lattice_steps: usize,
) -> Result<(LineEnsemble, SamplerPath)> {
    let sampler = AvoidSampler::new(spec)?;
    let pilot = sampler.acceptance_rate(&mut seed.child("pilot", 0).rng(), PILOT_ATTEMPTS);
    if pilot >= FALLBACK_ACCEPTANCE {
        let (ens, attempts) = sampler.sample(&mut seed.child("rejection", 0).rng(), max_attempts)?;
        return Ok((ens, SamplerPath::Rejection { pilot_acceptance: pilot, attempts }));
    }
    if !matches!(spec.f, Barrier::PlusInfinity) {
        return Err(Error::Parameter("walk fallback supports only f = +inf".into()));
    }
    let lattice = LatticeParams::with_steps(spec.interval, lattice_steps)?;
    let snap = |v: &WeylVector| -> Result<WeylVector> {
        WeylVector::new(v.as_slice().iter().map(|&x| lattice.value_of((x / lattice.dx()).round() as i64)).collect())
            .map_err(|e| e.context("endpoints collide after lattice rounding"))
    };
    let (xs, ys) = (snap(&spec.x)?, snap(&spec.y)?);
    let hi = glauber::maximal_state(&lattice, &xs, &ys, &spec.g)?;
    let lo = glauber::minimal_state(&lattice, &xs, &ys, &spec.g)?;
    let burn = glauber::burn_in(&hi, &lo, &seed.child("burn-in", 0), 32, 1 << 32)?;
    let state = glauber::simulate_chain(&hi, burn, &mut seed.child("chain", 0).rng());
    Ok((
        state.to_ensemble()?,
        SamplerPath::WalkGlauber { pilot_acceptance: pilot, steps: lattice_steps, events: burn },
    ))
}

/// Monte Carlo estimate with a Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbEstimate {
    pub p: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: u64,
}

impl ProbEstimate {
    pub fn exact(p: f64) -> Self {
        ProbEstimate { p, lo: p, hi: p, n: 0 }
    }
}

/// Critical value used for Wilson intervals on estimated probabilities.
pub const CI_Z: f64 = 3.0;

/// `P(bottom curve at the midpoint <= r)` under the barrier-free avoiding
/// law. For `k = 1` this is the closed form; otherwise `num_samples`
/// accepted ensembles are drawn.
pub fn midpoint_cdf_avoiding<R: Rng + ?Sized>(
    r: f64,
    spec: &AvoidSpec,
    num_samples: u64,
    max_attempts: u64,
    rng: &mut R,
) -> Result<ProbEstimate> {
    if !spec.is_barrier_free() {
        return Err(Error::Parameter("midpoint CDF is defined for barrier-free specs".into()));
    }
    let iv = spec.interval;
    let k = spec.k();
    if k == 1 {
        let p = midpoint_cdf_single(r, iv.a(), iv.b(), spec.x.first(), spec.y.first())?;
        return Ok(ProbEstimate::exact(p));
    }
    if num_samples == 0 {
        return Err(Error::Estimation("no samples requested".into()));
    }
    let sampler = AvoidSampler::new(spec)?;
    let grid = spec.grid();
    let mid = iv.midpoint();
    let mut hits = 0u64;
    for _ in 0..num_samples {
        let (rows, _) = sampler.sample_rows(rng, max_attempts)?;
        let bottom = Curve::from_grid(grid, rows.into_iter().nth(k - 1).expect("k >= 1"))?;
        if bottom.eval(mid)? <= r {
            hits += 1;
        }
    }
    let (lo, hi) = wilson_interval(hits, num_samples, CI_Z);
    Ok(ProbEstimate { p: hits as f64 / num_samples as f64, lo, hi, n: num_samples })
}

/// Ensemble on `[c^2 a + u, c^2 b + u]` with values `c * v + r`.
pub fn affine_transform(ens: &LineEnsemble, c: f64, u: f64, r: f64) -> Result<LineEnsemble> {
    if !(c > 0.0) {
        return Err(Error::Parameter(format!("affine scale must be positive, got {c}")));
    }
    let iv = ens.interval();
    let new_iv = Interval::new(c * c * iv.a() + u, c * c * iv.b() + u)?;
    let grid = Grid::new(new_iv, ens.grid().steps())?;
    let rows = ens
        .curves()
        .iter()
        .map(|cv| cv.values().iter().map(|&v| c * v + r).collect())
        .collect();
    LineEnsemble::from_rows(grid, rows)
}

/// Curve `i` becomes the negation of curve `k - 1 - i`.
pub fn flip_transform(ens: &LineEnsemble) -> LineEnsemble {
    let rows = ens
        .curves()
        .iter()
        .rev()
        .map(|cv| cv.values().iter().map(|&v| -v).collect())
        .collect();
    LineEnsemble::from_rows(ens.grid(), rows).expect("same grid")
}

/// Closed-form tail bounds for the bottom curve, with a concrete Mills-ratio
/// constant `c0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailBounds {
    pub c0: f64,
}

/// Scan used to certify `c0` for the tail bounds.
pub const C0_SCAN_MAX: f64 = 20.0;
pub const C0_SCAN_STEP: f64 = 1e-3;

impl TailBounds {
    pub fn certified() -> Result<Self> {
        Ok(TailBounds { c0: crate::bridge::certify_c0(C0_SCAN_MAX, C0_SCAN_STEP)? })
    }

    fn check(k: usize, r: f64) -> Result<()> {
        if k == 0 {
            return Err(Error::Parameter("k must be at least 1".into()));
        }
        if r.is_nan() || r < 0.0 {
            return Err(Error::Domain(format!("tail bounds need r >= 0, got {r}")));
        }
        Ok(())
    }

    /// Upper bound on `P(Q_k(mid) >= max(x_k, y_k) + sqrt(b - a) r)`.
    pub fn bottom_max(&self, k: usize, r: f64) -> Result<f64> {
        Self::check(k, r)?;
        Ok(self.c0 * (-2.0 * r * r).exp() / (crate::special::SQRT_2PI * (1.0 + 2.0 * r)))
    }

    /// Lower bound on `P(Q_k(mid) <= max(x_k, y_k) - sqrt(b - a) r)`.
    pub fn bottom_min(&self, k: usize, r: f64) -> Result<f64> {
        Self::check(k, r)?;
        Ok((-2.0 * r * r).exp() / (self.c0 * crate::special::SQRT_2PI * (1.0 + 2.0 * r)))
    }

    /// Upper bound on `P(inf Q_k <= min(x_k, y_k) - sqrt 2 sqrt(b - a) (k + r - 1))`.
    /// Values above 1 are returned unclamped; callers treat them as vacuous.
    pub fn inf(&self, k: usize, r: f64) -> Result<f64> {
        Self::check(k, r)?;
        Ok((1.0 - 2.0 * (-1.0f64).exp()).powi(-(k as i32)) * (-4.0 * r * r).exp())
    }
}

pub fn bound_bottom_max(k: usize, r: f64, c0: f64) -> Result<f64> {
    TailBounds { c0 }.bottom_max(k, r)
}

pub fn bound_bottom_min(k: usize, r: f64, c0: f64) -> Result<f64> {
    TailBounds { c0 }.bottom_min(k, r)
}

pub fn bound_inf(k: usize, r: f64) -> Result<f64> {
    TailBounds { c0: 1.0 }.inf(k, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::check_avoiding;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn wv(v: &[f64]) -> WeylVector {
        WeylVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn spec_validation() {
        let g = Barrier::Curve(Curve::constant(unit(), 4, 0.5).unwrap());
        assert!(AvoidSpec::new(unit(), wv(&[1.0]), wv(&[0.0]), Barrier::PlusInfinity, g.clone(), 4).is_err());
        assert!(AvoidSpec::new(unit(), wv(&[1.0]), wv(&[1.0]), Barrier::PlusInfinity, g.clone(), 4).is_ok());
        let f = Barrier::Curve(Curve::constant(unit(), 4, 0.4).unwrap());
        assert!(AvoidSpec::new(unit(), wv(&[0.0]), wv(&[0.0]), f, Barrier::MinusInfinity, 4).is_ok());
        assert!(AvoidSpec::free(unit(), wv(&[1.0, 0.0]), wv(&[1.0]), 4).is_err());
    }

    #[test]
    fn single_free_bridge_accepts_immediately() {
        let spec = AvoidSpec::free(unit(), wv(&[0.0]), wv(&[0.5]), 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let (ens, attempts) = sample_avoiding(&spec, &mut rng, 1).unwrap();
            assert_eq!(attempts, 1);
            assert_eq!(ens.value(0, 64), 0.5);
        }
    }

    #[test]
    fn accepted_samples_avoid() {
        let g = Barrier::Curve(Curve::constant(unit(), 32, -1.5).unwrap());
        let spec = AvoidSpec::new(unit(), wv(&[1.0, 0.0, -1.0]), wv(&[0.5, 0.0, -0.5]), Barrier::PlusInfinity, g.clone(), 32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (ens, _) = sample_avoiding(&spec, &mut rng, 100_000).unwrap();
            assert!(check_avoiding(&ens, &Barrier::PlusInfinity, &g).unwrap());
            assert_eq!(ens.value(2, 0), -1.0);
        }
    }

    #[test]
    fn flat_barrier_acceptance_matches_reflection() {
        let g = Barrier::Curve(Curve::constant(unit(), 512, 0.0).unwrap());
        let spec = AvoidSpec::new(unit(), wv(&[1.0]), wv(&[1.0]), Barrier::PlusInfinity, g, 512).unwrap();
        let sampler = AvoidSampler::new(&spec).unwrap();
        let n = 100_000;
        let rate = sampler.acceptance_rate(&mut ChaCha8Rng::seed_from_u64(3), n);
        let p = 1.0 - (-2.0f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        // the grid check misses excursions between grid points; shifting the
        // barrier down by one grid standard deviation bounds the effect
        let allowance = (-2.0f64).exp() - (-2.0 * (1.0 + (1.0f64 / 512.0).sqrt()).powi(2)).exp();
        assert!(rate >= p - 3.0 * se && rate <= p + 3.0 * se + allowance, "rate={rate} p={p}");
    }

    #[test]
    fn impossible_spec_exhausts() {
        let f = Barrier::Curve(Curve::constant(unit(), 8, 1e-9).unwrap());
        let g = Barrier::Curve(Curve::constant(unit(), 8, -1e-9).unwrap());
        let spec = AvoidSpec::new(unit(), wv(&[0.0]), wv(&[0.0]), f, g, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(sample_avoiding(&spec, &mut rng, 20), Err(Error::RejectionExhausted { attempts: 20 })));
    }

    #[test]
    fn midpoint_cdf_single_curve_delegates() {
        let spec = AvoidSpec::free(unit(), wv(&[0.3]), wv(&[-0.1]), 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let est = midpoint_cdf_avoiding(0.2, &spec, 10, 10, &mut rng).unwrap();
        assert_eq!(est.p, midpoint_cdf_single(0.2, 0.0, 1.0, 0.3, -0.1).unwrap());
        assert_eq!(est.lo, est.hi);
    }

    #[test]
    fn midpoint_cdf_monotone_in_r() {
        let spec = AvoidSpec::free(unit(), wv(&[1.0, -1.0]), wv(&[1.0, -1.0]), 64).unwrap();
        let est = |r: f64| midpoint_cdf_avoiding(r, &spec, 4000, 10_000, &mut ChaCha8Rng::seed_from_u64(6)).unwrap();
        let (a, b, c) = (est(-10.0), est(0.0), est(10.0));
        assert!(a.p <= b.p && b.p <= c.p);
        assert_eq!(a.p, 0.0);
        assert_eq!(c.p, 1.0);
        let barrier = Barrier::Curve(Curve::constant(unit(), 64, -3.0).unwrap());
        let with_g = AvoidSpec::new(unit(), wv(&[1.0]), wv(&[1.0]), Barrier::PlusInfinity, barrier, 64).unwrap();
        assert!(midpoint_cdf_avoiding(0.0, &with_g, 10, 10, &mut ChaCha8Rng::seed_from_u64(7)).is_err());
    }

    fn sample_ens() -> LineEnsemble {
        LineEnsemble::from_rows(
            Grid::new(unit(), 2).unwrap(),
            vec![vec![2.0, 1.5, 3.0], vec![0.0, -1.0, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn affine_examples() {
        let ens = sample_ens();
        assert_eq!(affine_transform(&ens, 1.0, 0.0, 0.0).unwrap(), ens);
        let shifted = affine_transform(&ens, 1.0, 0.0, 5.0).unwrap();
        assert_eq!(shifted.interval(), ens.interval());
        assert_eq!(shifted.value(1, 1), 4.0);
        let scaled = affine_transform(&ens, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(scaled.interval(), Interval::new(1.0, 5.0).unwrap());
        assert_eq!(scaled.value(0, 2), 6.0);
        assert!(affine_transform(&ens, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn flip_examples() {
        let one = LineEnsemble::new(vec![Curve::constant(unit(), 4, 2.0).unwrap()]).unwrap();
        assert!(flip_transform(&one).curve(0).values().iter().all(|&v| v == -2.0));
        let ens = sample_ens();
        assert_eq!(flip_transform(&flip_transform(&ens)), ens);
        let f = flip_transform(&ens);
        assert_eq!(f.value(0, 1), 1.0);
        assert!(check_avoiding(&f, &Barrier::PlusInfinity, &Barrier::MinusInfinity).unwrap());
    }

    #[test]
    fn bound_examples() {
        let b = TailBounds::certified().unwrap();
        assert!(b.c0 > 1.0 && b.c0 < 2.0);
        assert_relative_eq!(b.inf(1, 0.0).unwrap(), 1.0 / (1.0 - 2.0 * (-1.0f64).exp()), max_relative = 1e-15);
        assert_relative_eq!(b.inf(1, 0.0).unwrap(), 3.784_422_382_354_666, max_relative = 1e-12);
        assert_relative_eq!(
            b.bottom_max(2, 2.0).unwrap(),
            b.c0 * (-8.0f64).exp() / (crate::special::SQRT_2PI * 5.0),
            max_relative = 1e-15
        );
        assert!(b.bottom_max(1, -0.1).is_err());
        assert!(bound_inf(1, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn bottom_min_below_bottom_max(r in 0.0f64..10.0, k in 1usize..6) {
            let b = TailBounds { c0: 1.3 };
            prop_assert!(b.bottom_min(k, r).unwrap() <= b.bottom_max(k, r).unwrap());
        }

        #[test]
        fn flip_preserves_ordering(seed in any::<u64>()) {
            let spec = AvoidSpec::free(unit(), wv(&[1.0, 0.0]), wv(&[0.5, -0.5]), 16).unwrap();
            let (ens, _) = sample_avoiding(&spec, &mut ChaCha8Rng::seed_from_u64(seed), 10_000).unwrap();
            let f = flip_transform(&ens);
            prop_assert!(check_avoiding(&f, &Barrier::PlusInfinity, &Barrier::MinusInfinity).unwrap());
            let a = affine_transform(&ens, 1.7, -0.3, 2.0).unwrap();
            prop_assert!(check_avoiding(&a, &Barrier::PlusInfinity, &Barrier::MinusInfinity).unwrap());
        }
    }
}
