//! Brownian bridges with diffusion parameter 1: exact grid sampling,
//! transition densities, the reflection formula for the maximum, the
//! single-bridge midpoint CDF and the Mills-ratio constant.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::domain::{Curve, Grid, Interval};
use crate::error::{Error, Result};
use crate::special::{self, normal_cdf, SQRT_2PI};

/// Default number of grid steps per unit time.
pub const DEFAULT_GRID_DENSITY: f64 = 512.0;

/// Number of steps for `interval` at the default density (at least 2).
pub fn default_steps(interval: Interval) -> usize {
    ((interval.len() * DEFAULT_GRID_DENSITY).ceil() as usize).max(2)
}

/// A bridge from `x` at `a` to `y` at `b`, sampled on `grid_points + 1`
/// equally spaced times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeSpec {
    pub interval: Interval,
    pub x: f64,
    pub y: f64,
    pub grid_points: usize,
}

impl BridgeSpec {
    pub fn new(interval: Interval, x: f64, y: f64, grid_points: usize) -> Result<Self> {
        if grid_points < 2 {
            return Err(Error::Parameter(format!("bridge grid needs M >= 2, got {grid_points}")));
        }
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Parameter("bridge endpoints must be finite".into()));
        }
        Ok(BridgeSpec { interval, x, y, grid_points })
    }

    pub fn grid(&self) -> Grid {
        Grid::new(self.interval, self.grid_points).expect("grid_points >= 2")
    }

    /// Analytic mean and variance of the marginal at `t`.
    pub fn marginal(&self, t: f64) -> (f64, f64) {
        let (a, b) = (self.interval.a(), self.interval.b());
        let len = b - a;
        let mean = (b - t) / len * self.x + (t - a) / len * self.y;
        (mean, (t - a) * (b - t) / len)
    }
}

/// Fills `out` (length `M + 1`) with a bridge from `x` to `y` on a uniform
/// grid of spacing `dt`. Endpoints are written exactly.
pub fn fill_bridge<R: Rng + ?Sized>(out: &mut [f64], dt: f64, x: f64, y: f64, rng: &mut R) {
    let m = out.len() - 1;
    out[0] = x;
    let mut v = x;
    for j in 1..m {
        let remaining = (m - j + 1) as f64;
        let mean = v + (y - v) / remaining;
        let var = dt * (remaining - 1.0) / remaining;
        let z: f64 = StandardNormal.sample(rng);
        v = mean + var.sqrt() * z;
        out[j] = v;
    }
    out[m] = y;
}

/// Samples a bridge on the spec's grid.
pub fn sample_bridge<R: Rng + ?Sized>(spec: &BridgeSpec, rng: &mut R) -> Curve {
    let grid = spec.grid();
    let mut values = vec![0.0; grid.len()];
    fill_bridge(&mut values, grid.spacing(), spec.x, spec.y, rng);
    Curve::from_grid(grid, values).expect("length matches grid")
}

/// Samples a bridge from `(a, x)` to `(b, y)` at the increasing interior
/// times `times` (each strictly inside `(a, b)`).
pub fn sample_bridge_at<R: Rng + ?Sized>(
    a: f64,
    x: f64,
    b: f64,
    y: f64,
    times: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let (mut s, mut v) = (a, x);
    for &t in times {
        let frac = (t - s) / (b - s);
        let mean = v + frac * (y - v);
        let var = (t - s) * (b - t) / (b - s);
        let z: f64 = StandardNormal.sample(rng);
        v = mean + var.sqrt() * z;
        s = t;
        out.push(v);
    }
    out
}

/// Heat kernel `exp(-(x - y)^2 / 2t) / sqrt(2 pi t)`.
pub fn transition_density(t: f64, x: f64, y: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("transition density needs t > 0, got {t}")));
    }
    let d = x - y;
    Ok((-d * d / (2.0 * t)).exp() / (SQRT_2PI * t.sqrt()))
}

/// Probability that a bridge from 0 to `a` on `[0, T]` reaches level `beta`:
/// `min(1, exp(-2 beta (beta - a) / T))`.
pub fn bridge_max_prob(t_len: f64, a: f64, beta: f64) -> Result<f64> {
    if !(t_len > 0.0) {
        return Err(Error::Domain(format!("bridge length must be positive, got {t_len}")));
    }
    if beta <= 0.0 || beta <= a {
        return Ok(1.0);
    }
    Ok((-2.0 * beta * (beta - a) / t_len).exp().min(1.0))
}

/// `P(B((s + t) / 2) <= r)` for a bridge from `x` at `s` to `y` at `t`.
pub fn midpoint_cdf_single(r: f64, s: f64, t: f64, x: f64, y: f64) -> Result<f64> {
    if !(s < t) {
        return Err(Error::Domain(format!("midpoint cdf needs s < t, got s={s}, t={t}")));
    }
    let sd = (0.25 * (t - s)).sqrt();
    Ok(normal_cdf((r - 0.5 * (x + y)) / sd))
}

/// Mills ratio `(1 - Phi(x)) / phi(x)`; see [`special::mills_ratio`].
pub fn mills_ratio(x: f64) -> Result<f64> {
    special::mills_ratio(x)
}

/// Smallest `c >= 1` with `1 / (c (1 + x)) <= R(x) <= c / (1 + x)` on the
/// scan `{0, step, 2 step, ..., x_max}`.
pub fn certify_c0(x_max: f64, step: f64) -> Result<f64> {
    if !(x_max > 0.0 && step > 0.0) {
        return Err(Error::Parameter(format!("certify_c0 needs positive x_max and step, got {x_max}, {step}")));
    }
    let count = (x_max / step + 1e-9).floor() as u64;
    let mut c: f64 = 1.0;
    for i in 0..=count {
        let x = i as f64 * step;
        let m = (1.0 + x) * mills_ratio(x)?;
        c = c.max(m).max(1.0 / m);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spec(a: f64, b: f64, x: f64, y: f64, m: usize) -> BridgeSpec {
        BridgeSpec::new(Interval::new(a, b).unwrap(), x, y, m).unwrap()
    }

    #[test]
    fn rejects_short_grid() {
        assert!(BridgeSpec::new(Interval::new(0.0, 1.0).unwrap(), 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn endpoints_are_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = spec(0.3, 1.9, 0.1 + 0.2, -7.3, 17);
        for _ in 0..100 {
            let c = sample_bridge(&s, &mut rng);
            assert_eq!(c.values()[0], 0.1 + 0.2);
            assert_eq!(*c.values().last().unwrap(), -7.3);
        }
    }

    fn moments(s: &BridgeSpec, j: usize, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let v = sample_bridge(s, &mut rng).values()[j];
            m1 += v;
            m2 += v * v;
        }
        let mean = m1 / n as f64;
        (mean, m2 / n as f64 - mean * mean)
    }

    #[test]
    fn standard_bridge_midpoint() {
        let n = 100_000;
        let (mean, var) = moments(&spec(0.0, 1.0, 0.0, 0.0, 8), 4, n, 2);
        assert!(mean.abs() < 3.0 * 0.5 / (n as f64).sqrt());
        assert!((var - 0.25).abs() < 4.0 * 0.25 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn constant_endpoints_keep_mean() {
        let n = 100_000;
        let s = spec(0.0, 1.0, 2.5, 2.5, 8);
        for j in [1, 3, 6] {
            let (mean, var) = moments(&s, j, n, 3 + j as u64);
            let (_, v) = s.marginal(s.grid().time(j));
            assert!((mean - 2.5).abs() < 4.0 * (v / n as f64).sqrt());
            assert!((var - v).abs() < 4.0 * v * (2.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn tilted_bridge_matches_rescaled_brownian_construction() {
        // B(t) = x + (t/T)(y - x) + sqrt(T) (W(t/T) - (t/T) W(1)); at t = 1, T = 2:
        // mean 1, variance T * (1/2)(1/2) = 1/2.
        let s = spec(0.0, 2.0, 0.0, 2.0, 8);
        let (m, v) = s.marginal(1.0);
        assert_relative_eq!(m, 1.0);
        assert_relative_eq!(v, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 100_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let w_half: f64 = StandardNormal.sample(&mut rng);
            let w_half = w_half * 0.5f64.sqrt();
            let inc: f64 = StandardNormal.sample(&mut rng);
            let w_one = w_half + inc * 0.5f64.sqrt();
            let b = 1.0 + 2f64.sqrt() * (w_half - 0.5 * w_one);
            s1 += b;
            s2 += b * b;
        }
        let bm = s1 / n as f64;
        assert!((bm - 1.0).abs() < 4.0 * (0.5 / n as f64).sqrt());
        assert!((s2 / n as f64 - bm * bm - 0.5).abs() < 4.0 * 0.5 * (2.0 / n as f64).sqrt());
        let (mean, var) = moments(&s, 4, n, 10);
        assert!((mean - 1.0).abs() < 4.0 * (0.5 / n as f64).sqrt());
        assert!((var - 0.5).abs() < 4.0 * 0.5 * (2.0 / n as f64).sqrt());
    }

    #[test]
    fn sample_at_times_matches_marginals() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let times = [0.25, 0.5, 0.9];
        let mut sums = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let v = sample_bridge_at(0.0, 1.0, 1.0, -1.0, &times, &mut rng);
            for i in 0..3 {
                sums[i] += v[i];
                sq[i] += v[i] * v[i];
            }
        }
        let s = spec(0.0, 1.0, 1.0, -1.0, 4);
        for i in 0..3 {
            let (m, var) = s.marginal(times[i]);
            let mean = sums[i] / n as f64;
            assert!((mean - m).abs() < 4.0 * (var / n as f64).sqrt());
            assert!((sq[i] / n as f64 - mean * mean - var).abs() < 4.0 * var * (2.0 / n as f64).sqrt());
        }
    }

    #[test]
    fn transition_density_values() {
        assert_relative_eq!(transition_density(1.0, 0.0, 0.0).unwrap(), 0.398_942_280_401_432_7, max_relative = 1e-14);
        assert_relative_eq!(transition_density(2.0, 0.0, 2.0).unwrap(), 0.103_776_874_355_148_68, max_relative = 1e-14);
        assert_relative_eq!(transition_density(1.0, 3.0, 3.0).unwrap(), 1.0 / SQRT_2PI, max_relative = 1e-15);
        assert!(transition_density(0.0, 0.0, 0.0).is_err());
        assert!(transition_density(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn reflection_formula_values() {
        assert_relative_eq!(bridge_max_prob(1.0, 0.0, 1.0).unwrap(), (-2.0f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(bridge_max_prob(1.0, 0.0, 1.0).unwrap(), 0.135_335_283_236_612_7, max_relative = 1e-14);
        assert_eq!(bridge_max_prob(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert_relative_eq!(bridge_max_prob(2.0, 0.0, 1.0).unwrap(), 0.367_879_441_171_442_3, max_relative = 1e-14);
        assert!(bridge_max_prob(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn midpoint_cdf_values() {
        assert_eq!(midpoint_cdf_single(0.0, -1.0, 1.0, 0.0, 0.0).unwrap(), 0.5);
        assert_relative_eq!(midpoint_cdf_single(1.0, 0.0, 1.0, 0.0, 0.0).unwrap(), 0.977_249_868_051_820_8, max_relative = 1e-14);
        assert_relative_eq!(midpoint_cdf_single(-1.0, 0.0, 1.0, 0.0, 0.0).unwrap(), 0.022_750_131_948_179_2, max_relative = 1e-12);
        assert!(midpoint_cdf_single(0.0, 1.0, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn mills_examples() {
        assert_relative_eq!(mills_ratio(0.0).unwrap(), (std::f64::consts::PI / 2.0).sqrt(), max_relative = 1e-14);
        let v = mills_ratio(40.0).unwrap() * 41.0;
        assert!(v.is_finite() && v > 0.0);
        assert_relative_eq!(v, 1.024_360_572_434_543_4, max_relative = 1e-10);
        assert!(mills_ratio(-0.1).is_err());
    }

    #[test]
    fn c0_scan_properties() {
        let c = certify_c0(10.0, 0.01).unwrap();
        assert!(c > 1.0 && c <= 2.0);
        let r0 = mills_ratio(0.0).unwrap();
        assert!(1.0 / c <= r0 && r0 <= c);
        assert!(certify_c0(20.0, 0.01).unwrap() >= c);
        assert!(certify_c0(0.0, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn midpoint_cdf_monotone_and_symmetric(
            r1 in -5.0f64..5.0, dr in 0.0f64..3.0,
            s in -2.0f64..2.0, len in 0.01f64..4.0,
            x in -3.0f64..3.0, y in -3.0f64..3.0,
        ) {
            let t = s + len;
            let f1 = midpoint_cdf_single(r1, s, t, x, y).unwrap();
            let f2 = midpoint_cdf_single(r1 + dr, s, t, x, y).unwrap();
            prop_assert!((0.0..=1.0).contains(&f1));
            prop_assert!(f2 >= f1);
            let mirror = midpoint_cdf_single(x + y - r1, s, t, x, y).unwrap();
            prop_assert!((f1 - (1.0 - mirror)).abs() < 1e-12);
        }

        #[test]
        fn c0_bounds_hold_on_scan(x in 0.0f64..20.0) {
            let c = certify_c0(20.0, 1e-3).unwrap();
            let xq = (x / 1e-3).floor() * 1e-3;
            let m = mills_ratio(xq).unwrap();
            prop_assert!(1.0 / (c * (1.0 + xq)) <= m * (1.0 + 1e-12));
            prop_assert!(m <= c / (1.0 + xq) * (1.0 + 1e-12));
        }
    }
}
