//! Continuous-time Glauber dynamics on avoiding lattice path configurations.
//!
//! Every triple (interior column `r`, curve `i`, shift `delta`) carries a
//! rate-1 Poisson clock. When a clock rings, curve `i` at column `r` moves by
//! `delta * dx` if the result is still a valid configuration: increments in
//! `{-1, 0, 1}`, strict ordering, and the bottom curve strictly above the
//! lower barrier `g`. The upper barrier is always `+inf`.
//!
//! Since all clocks share rate 1, the chain is simulated event by event: the
//! total rate is `3 k (N - 1)`, and each event picks a clock uniformly. The
//! uniform law on valid configurations is stationary, and two copies driven by
//! the same clocks preserve coordinatewise order (the monotone coupling).

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::domain::{Barrier, LatticeParams, LineEnsemble, WeylVector};
use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Lattice configuration of `k` curves over `N + 1` columns, stored as
/// integer heights (value = height * dx).
#[derive(Debug, Clone, PartialEq)]
pub struct GlauberConfig {
    lattice: LatticeParams,
    k: usize,
    cols: usize,
    heights: Vec<i64>,
    floor: Vec<i64>,
    g: Barrier,
}

/// Smallest height strictly above the barrier value `g` (exact float test).
fn min_height_above(g: f64, dx: f64) -> i64 {
    if g == f64::NEG_INFINITY {
        return i64::MIN;
    }
    let mut h = (g / dx).floor() as i64 + 1;
    while (h - 1) as f64 * dx > g {
        h -= 1;
    }
    while !(h as f64 * dx > g) {
        h += 1;
    }
    h
}

impl GlauberConfig {
    /// Builds and validates a configuration from per-curve heights.
    pub fn from_heights(lattice: &LatticeParams, rows: &[Vec<i64>], g: &Barrier) -> Result<Self> {
        let k = rows.len();
        let cols = lattice.steps() + 1;
        if k == 0 || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Structure(format!("need k >= 1 rows of {cols} heights")));
        }
        let floor = g
            .on_grid(&lattice.grid())?
            .into_iter()
            .map(|v| min_height_above(v, lattice.dx()))
            .collect();
        let cfg = GlauberConfig {
            lattice: *lattice,
            k,
            cols,
            heights: rows.concat(),
            floor,
            g: g.clone(),
        };
        if let Some(why) = cfg.violation() {
            return Err(Error::Infeasible(why));
        }
        Ok(cfg)
    }

    pub fn lattice(&self) -> &LatticeParams {
        &self.lattice
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn columns(&self) -> usize {
        self.cols
    }

    pub fn barrier(&self) -> &Barrier {
        &self.g
    }

    #[inline]
    pub fn height(&self, i: usize, j: usize) -> i64 {
        self.heights[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.heights[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        (0..self.k).map(|i| self.row(i).to_vec()).collect()
    }

    /// Lowest admissible height of the bottom curve at each column.
    pub fn floor(&self) -> &[i64] {
        &self.floor
    }

    /// First constraint violated by the configuration, if any.
    pub fn violation(&self) -> Option<String> {
        for i in 0..self.k {
            for j in 0..self.cols {
                let h = self.height(i, j);
                if j > 0 && (h - self.height(i, j - 1)).abs() > 1 {
                    return Some(format!("curve {i} jumps by more than dx at column {j}"));
                }
                if i > 0 && h >= self.height(i - 1, j) {
                    return Some(format!("curves {} and {i} not strictly ordered at column {j}", i - 1));
                }
                if i + 1 == self.k && h < self.floor[j] {
                    return Some(format!("bottom curve meets the barrier at column {j}"));
                }
            }
        }
        None
    }

    /// Whether moving curve `i` at column `r` to height `h` keeps the
    /// configuration valid; only the neighbouring constraints are inspected.
    #[inline]
    pub fn move_ok(&self, i: usize, r: usize, h: i64) -> bool {
        let c = self.cols;
        let base = i * c;
        if (h - self.heights[base + r - 1]).abs() > 1 || (h - self.heights[base + r + 1]).abs() > 1 {
            return false;
        }
        if i > 0 && h >= self.heights[base - c + r] {
            return false;
        }
        if i + 1 < self.k {
            h > self.heights[base + c + r]
        } else {
            h >= self.floor[r]
        }
    }

    /// Applies the clock `(r, i, delta)`; returns whether the site changed.
    #[inline]
    pub fn apply(&mut self, ev: &ClockEvent) -> bool {
        if ev.delta == 0 {
            return false;
        }
        let idx = ev.curve * self.cols + ev.site;
        let h = self.heights[idx] + ev.delta as i64;
        if self.move_ok(ev.curve, ev.site, h) {
            self.heights[idx] = h;
            true
        } else {
            false
        }
    }

    pub fn to_ensemble(&self) -> Result<LineEnsemble> {
        let dx = self.lattice.dx();
        let rows = (0..self.k)
            .map(|i| self.row(i).iter().map(|&h| h as f64 * dx).collect())
            .collect();
        LineEnsemble::from_rows(self.lattice.grid(), rows)
    }

    /// Coordinatewise `self <= other`.
    pub fn le(&self, other: &GlauberConfig) -> bool {
        self.heights.len() == other.heights.len() && self.heights.iter().zip(&other.heights).all(|(a, b)| a <= b)
    }
}

/// One ring of a Poisson clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClockEvent {
    pub time: f64,
    pub site: usize,
    pub curve: usize,
    pub delta: i8,
}

/// Draws successive clock rings for a `k`-curve, `N`-step lattice.
#[derive(Debug, Clone)]
pub struct EventSource {
    k: usize,
    interior: usize,
    clock: f64,
    wait: Exp<f64>,
}

impl EventSource {
    pub fn new(k: usize, steps: usize) -> Self {
        let interior = steps.saturating_sub(1);
        let rate = (3 * k * interior).max(1) as f64;
        EventSource { k, interior, clock: 0.0, wait: Exp::new(rate).expect("positive rate") }
    }

    /// Total event rate `3 k (N - 1)`.
    pub fn rate(&self) -> f64 {
        (3 * self.k * self.interior) as f64
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    #[inline]
    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> ClockEvent {
        self.clock += self.wait.sample(rng);
        let total = 3 * self.k * self.interior;
        let u = rng.random_range(0..total);
        let delta = (u % 3) as i8 - 1;
        let rest = u / 3;
        let curve = rest % self.k;
        let site = rest / self.k + 1;
        ClockEvent { time: self.clock, site, curve, delta }
    }
}

fn reachable(x: i64, y: i64, steps: usize) -> Result<()> {
    if (y - x).unsigned_abs() > steps as u64 {
        return Err(Error::Infeasible(format!("endpoints {x} -> {y} unreachable in {steps} steps")));
    }
    Ok(())
}

/// Up-steps first, one flat step if parity requires, then down-steps.
fn top_profile(x: i64, y: i64, steps: usize) -> Result<Vec<i64>> {
    reachable(x, y, steps)?;
    let n = steps as i64;
    let (ups, flats) = ((y - x + n).div_euclid(2), (y - x + n).rem_euclid(2));
    let mut out = Vec::with_capacity(steps + 1);
    let mut h = x;
    out.push(h);
    for s in 0..n {
        h += if s < ups {
            1
        } else if s < ups + flats {
            0
        } else {
            -1
        };
        out.push(h);
    }
    Ok(out)
}

fn endpoint_heights(lattice: &LatticeParams, v: &WeylVector) -> Result<Vec<i64>> {
    v.as_slice().iter().map(|&x| lattice.height_of(x)).collect()
}

/// The pointwise largest configuration: each curve takes all its up-steps,
/// then one flat step if parity requires, then its down-steps.
pub fn maximal_state(lattice: &LatticeParams, x: &WeylVector, y: &WeylVector, g: &Barrier) -> Result<GlauberConfig> {
    if x.len() != y.len() {
        return Err(Error::Parameter("entrance and exit vectors differ in length".into()));
    }
    let xs = endpoint_heights(lattice, x)?;
    let ys = endpoint_heights(lattice, y)?;
    let rows = xs
        .iter()
        .zip(&ys)
        .map(|(&a, &b)| top_profile(a, b, lattice.steps()))
        .collect::<Result<Vec<_>>>()?;
    GlauberConfig::from_heights(lattice, &rows, g).map_err(|e| match e {
        Error::Infeasible(why) => Error::Infeasible(format!("{why} (try a finer lattice)")),
        other => other,
    })
}

/// The pointwise smallest feasible configuration. Without an active barrier
/// this is the mirror of [`maximal_state`] (down-steps first); where the
/// barrier or the curve below binds, the profile is lifted to the lowest
/// 1-Lipschitz path above it.
pub fn minimal_state(lattice: &LatticeParams, x: &WeylVector, y: &WeylVector, g: &Barrier) -> Result<GlauberConfig> {
    if x.len() != y.len() {
        return Err(Error::Parameter("entrance and exit vectors differ in length".into()));
    }
    let xs = endpoint_heights(lattice, x)?;
    let ys = endpoint_heights(lattice, y)?;
    let n = lattice.steps();
    let dx = lattice.dx();
    let mut below: Vec<i64> = g.on_grid(&lattice.grid())?.into_iter().map(|v| min_height_above(v, dx)).collect();
    let mut rows = vec![Vec::new(); xs.len()];
    for i in (0..xs.len()).rev() {
        let (a, b) = (xs[i], ys[i]);
        reachable(a, b, n)?;
        let mut h = below.clone();
        for j in 1..=n {
            h[j] = h[j].max(h[j - 1].saturating_sub(1));
        }
        for j in (0..n).rev() {
            h[j] = h[j].max(h[j + 1].saturating_sub(1));
        }
        for (j, v) in h.iter_mut().enumerate() {
            *v = (*v).max(a - j as i64).max(b - (n - j) as i64);
        }
        if h[0] != a || h[n] != b {
            return Err(Error::Infeasible(format!("curve {i}: endpoints sit at or below the lower constraint (try a finer lattice)")));
        }
        below = h.iter().map(|v| v + 1).collect();
        rows[i] = h;
    }
    GlauberConfig::from_heights(lattice, &rows, g)
}

/// Runs `num_events` clock rings from `init`.
pub fn simulate_chain<R: Rng + ?Sized>(init: &GlauberConfig, num_events: u64, rng: &mut R) -> GlauberConfig {
    let mut state = init.clone();
    run_chain(&mut state, num_events, rng);
    state
}

/// In-place variant of [`simulate_chain`]; returns the elapsed clock time.
pub fn run_chain<R: Rng + ?Sized>(state: &mut GlauberConfig, num_events: u64, rng: &mut R) -> f64 {
    let mut src = EventSource::new(state.k, state.cols - 1);
    if src.interior == 0 {
        return 0.0;
    }
    for _ in 0..num_events {
        let ev = src.next(rng);
        state.apply(&ev);
        #[cfg(debug_assertions)]
        debug_assert!(state.violation().is_none(), "invalid configuration after {ev:?}");
    }
    src.clock()
}

/// Pair of chains driven by shared clocks; `a` is the lower one.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledState {
    pub a: GlauberConfig,
    pub b: GlauberConfig,
}

impl CoupledState {
    pub fn new(a: GlauberConfig, b: GlauberConfig) -> Result<Self> {
        if a.k != b.k || a.lattice != b.lattice {
            return Err(Error::Structure("coupled chains need the same lattice and curve count".into()));
        }
        if !a.le(&b) {
            return Err(Error::Parameter("coupled chains need A <= B coordinatewise".into()));
        }
        if a.floor.iter().zip(&b.floor).any(|(fa, fb)| fa > fb) {
            return Err(Error::Parameter("coupled chains need g_b <= g_t".into()));
        }
        Ok(CoupledState { a, b })
    }

    /// Number of sites where the two chains differ.
    pub fn differing_sites(&self) -> usize {
        self.a.heights.iter().zip(&self.b.heights).filter(|(x, y)| x != y).count()
    }

    /// Applies one shared event and checks the ordering at the touched site.
    #[inline]
    fn step(&mut self, ev: &ClockEvent, index: u64) -> Result<()> {
        self.a.apply(ev);
        self.b.apply(ev);
        if self.a.height(ev.curve, ev.site) > self.b.height(ev.curve, ev.site) {
            return Err(Error::CouplingViolated { event: index, curve: ev.curve, column: ev.site });
        }
        #[cfg(debug_assertions)]
        debug_assert!(self.a.le(&self.b) && self.a.violation().is_none() && self.b.violation().is_none());
        Ok(())
    }
}

/// Runs both chains on the same `num_events` clock rings.
pub fn simulate_coupled<R: Rng + ?Sized>(
    init_a: &GlauberConfig,
    init_b: &GlauberConfig,
    num_events: u64,
    rng: &mut R,
) -> Result<CoupledState> {
    let mut st = CoupledState::new(init_a.clone(), init_b.clone())?;
    let mut src = EventSource::new(st.a.k, st.a.cols - 1);
    if src.interior == 0 {
        return Ok(st);
    }
    for e in 0..num_events {
        let ev = src.next(rng);
        st.step(&ev, e)?;
    }
    Ok(st)
}

/// Events until the chains started at `init_hi` and `init_lo` coincide.
pub fn mixing_diagnostic<R: Rng + ?Sized>(
    init_hi: &GlauberConfig,
    init_lo: &GlauberConfig,
    rng: &mut R,
    cap: u64,
) -> Result<u64> {
    let mut st = CoupledState::new(init_lo.clone(), init_hi.clone())?;
    let mut diff = st.differing_sites();
    if diff == 0 {
        return Ok(0);
    }
    let mut src = EventSource::new(st.a.k, st.a.cols - 1);
    for e in 0..cap {
        let ev = src.next(rng);
        let before = st.a.height(ev.curve, ev.site) != st.b.height(ev.curve, ev.site);
        st.step(&ev, e)?;
        let after = st.a.height(ev.curve, ev.site) != st.b.height(ev.curve, ev.site);
        match (before, after) {
            (true, false) => diff -= 1,
            (false, true) => diff += 1,
            _ => {}
        }
        if diff == 0 {
            return Ok(e + 1);
        }
    }
    Err(Error::CapExceeded { cap })
}

/// Burn-in of four times the median coalescence count over `seeds` runs.
pub fn burn_in(hi: &GlauberConfig, lo: &GlauberConfig, seed: &RngSeed, seeds: u64, cap: u64) -> Result<u64> {
    let mut counts = (0..seeds)
        .map(|s| mixing_diagnostic(hi, lo, &mut seed.child("coalescence", s).rng(), cap))
        .collect::<Result<Vec<_>>>()?;
    counts.sort_unstable();
    let n = counts.len();
    let median = if n == 0 {
        0
    } else if n % 2 == 1 {
        counts[n / 2]
    } else {
        (counts[n / 2 - 1] + counts[n / 2]) / 2
    };
    Ok(4 * median)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{check_avoiding, Curve, Interval};
    use crate::walk::{enumerate_avoiding_heights, WalkEnsembleSpec};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> Interval {
        Interval::new(0.0, 1.0).unwrap()
    }

    fn lat(steps: usize) -> LatticeParams {
        LatticeParams::with_steps(unit(), steps).unwrap()
    }

    fn hv(l: &LatticeParams, h: &[i64]) -> WeylVector {
        WeylVector::new(h.iter().map(|&v| l.value_of(v)).collect()).unwrap()
    }

    #[test]
    fn maximal_state_examples() {
        let l = lat(2);
        let s = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        assert_eq!(s.rows(), vec![vec![0, 1, 0]]);
        let s = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[1]), &Barrier::MinusInfinity).unwrap();
        assert_eq!(s.rows(), vec![vec![0, 1, 1]]);
        let m = minimal_state(&l, &hv(&l, &[0]), &hv(&l, &[1]), &Barrier::MinusInfinity).unwrap();
        assert_eq!(m.rows(), vec![vec![0, 0, 1]]);
        let l16 = lat(16);
        let s = maximal_state(&l16, &hv(&l16, &[3, 1, 0]), &hv(&l16, &[2, 0, -4]), &Barrier::MinusInfinity).unwrap();
        assert!(check_avoiding(&s.to_ensemble().unwrap(), &Barrier::PlusInfinity, &Barrier::MinusInfinity).unwrap());
        let high = Barrier::Curve(Curve::constant(unit(), 2, 0.5 * l.dx()).unwrap());
        assert!(matches!(
            maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &high),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn extremal_states_bound_every_configuration() {
        let l = lat(4);
        for (x, y, gh) in [([1i64, 0], [0i64, -1], -2i64), ([1, 0], [1, 0], -1), ([2, 0], [1, -1], -3)] {
            let g = Barrier::Curve(Curve::constant(unit(), 4, l.value_of(gh)).unwrap());
            let spec = WalkEnsembleSpec::from_heights(l, &x, &y, Barrier::PlusInfinity, g.clone()).unwrap();
            let all = enumerate_avoiding_heights(&spec).unwrap();
            let hi = maximal_state(&l, spec.x(), spec.y(), &g).unwrap();
            let lo = minimal_state(&l, spec.x(), spec.y(), &g).unwrap();
            assert!(all.contains(&hi.rows()) && all.contains(&lo.rows()));
            for rows in &all {
                let c = GlauberConfig::from_heights(&l, rows, &g).unwrap();
                assert!(lo.le(&c) && c.le(&hi));
            }
        }
        let high = Barrier::Curve(Curve::constant(unit(), 4, 0.0).unwrap());
        assert!(minimal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &high).is_err());
    }

    #[test]
    fn barrier_floor_is_strict() {
        let dx = 0.3;
        assert_eq!(min_height_above(0.0, dx), 1);
        assert_eq!(min_height_above(-0.15, dx), 0);
        assert_eq!(min_height_above(0.3, dx), 2);
        assert_eq!(min_height_above(-0.3, dx), 0);
        assert_eq!(min_height_above(f64::NEG_INFINITY, dx), i64::MIN);
    }

    #[test]
    fn local_moves() {
        let l = lat(2);
        let mut s = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        let before = s.clone();
        assert!(!s.apply(&ClockEvent { time: 0.0, site: 1, curve: 0, delta: 0 }));
        assert!(!s.apply(&ClockEvent { time: 0.0, site: 1, curve: 0, delta: 1 }));
        assert_eq!(s, before);
        assert!(s.apply(&ClockEvent { time: 0.0, site: 1, curve: 0, delta: -1 }));
        assert_eq!(s.rows(), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn event_rate_and_range() {
        let mut src = EventSource::new(2, 4);
        assert_eq!(src.rate(), 18.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut last = 0.0;
        for _ in 0..1000 {
            let e = src.next(&mut rng);
            assert!(e.site >= 1 && e.site <= 3 && e.curve < 2 && (-1..=1).contains(&e.delta));
            assert!(e.time > last);
            last = e.time;
        }
        // mean waiting time 1/18
        assert!((last / 1000.0 - 1.0 / 18.0).abs() < 4.0 / 18.0 / 1000f64.sqrt());
    }

    #[test]
    fn three_state_chain_is_uniform() {
        let l = lat(2);
        let init = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = init.clone();
        let mut counts = [0u32; 3];
        let n = 100_000;
        for _ in 0..n {
            run_chain(&mut state, 5, &mut rng);
            counts[(state.height(0, 1) + 1) as usize] += 1;
        }
        let tv: f64 = 0.5 * counts.iter().map(|&c| (c as f64 / n as f64 - 1.0 / 3.0).abs()).sum::<f64>();
        assert!(tv < 0.02, "tv={tv}");
    }

    #[test]
    fn identical_chains_stay_identical() {
        let l = lat(16);
        let s = maximal_state(&l, &hv(&l, &[2, 0]), &hv(&l, &[1, -1]), &Barrier::MinusInfinity).unwrap();
        let out = simulate_coupled(&s, &s, 10_000, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(out.a, out.b);
    }

    #[test]
    fn coupling_preserves_order() {
        let l = lat(16);
        let g_lo = Barrier::MinusInfinity;
        let g_hi = Barrier::Curve(Curve::constant(unit(), 16, -3.5 * l.dx()).unwrap());
        for seed in 0..20u64 {
            let a = minimal_state(&l, &hv(&l, &[1, 0]), &hv(&l, &[0, -2]), &g_lo).unwrap();
            let b = maximal_state(&l, &hv(&l, &[3, 1]), &hv(&l, &[2, 0]), &g_hi).unwrap();
            let out = simulate_coupled(&a, &b, 10_000, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(out.a.le(&out.b));
            assert_eq!(out.a.row(0)[0], 1);
            assert_eq!(out.b.row(1)[16], 0);
        }
    }

    #[test]
    fn coupled_preconditions() {
        let l = lat(4);
        let a = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        let b = minimal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        assert!(simulate_coupled(&a, &b, 1, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn coalescence() {
        let l = lat(2);
        let hi = maximal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        let lo = minimal_state(&l, &hv(&l, &[0]), &hv(&l, &[0]), &Barrier::MinusInfinity).unwrap();
        assert_eq!(mixing_diagnostic(&hi, &hi, &mut ChaCha8Rng::seed_from_u64(4), 10).unwrap(), 0);
        let c = mixing_diagnostic(&hi, &lo, &mut ChaCha8Rng::seed_from_u64(4), 1_000_000).unwrap();
        assert!(c > 0);
        assert!(matches!(
            mixing_diagnostic(&hi, &lo, &mut ChaCha8Rng::seed_from_u64(4), 0),
            Err(Error::CapExceeded { cap: 0 })
        ));
        let b = burn_in(&hi, &lo, &RngSeed::new(9), 32, 1_000_000).unwrap();
        assert!(b >= 4);
    }

    #[test]
    fn local_check_agrees_with_full_validation() {
        let l = lat(6);
        let g = Barrier::Curve(Curve::constant(unit(), 6, -2.5 * l.dx()).unwrap());
        let spec = WalkEnsembleSpec::from_heights(l, &[1, 0], &[1, -1], Barrier::PlusInfinity, g.clone()).unwrap();
        let configs = enumerate_avoiding_heights(&spec).unwrap();
        assert!(!configs.is_empty());
        for rows in configs.iter().take(300) {
            let cfg = GlauberConfig::from_heights(&l, rows, &g).unwrap();
            for i in 0..2 {
                for r in 1..6 {
                    for d in [-1i64, 1] {
                        let h = cfg.height(i, r) + d;
                        let mut moved = rows.clone();
                        moved[i][r] = h;
                        let full = GlauberConfig::from_heights(&l, &moved, &g).is_ok();
                        assert_eq!(cfg.move_ok(i, r, h), full);
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn reversible_moves(seed in any::<u64>(), r in 1usize..8, i in 0usize..2) {
            let l = lat(8);
            let s0 = maximal_state(&l, &hv(&l, &[2, 0]), &hv(&l, &[1, -1]), &Barrier::MinusInfinity).unwrap();
            let mut s = simulate_chain(&s0, 200, &mut ChaCha8Rng::seed_from_u64(seed));
            let start = s.clone();
            for delta in [-1i8, 1] {
                let fwd = ClockEvent { time: 0.0, site: r, curve: i, delta };
                if s.apply(&fwd) {
                    let back = ClockEvent { time: 0.0, site: r, curve: i, delta: -delta };
                    prop_assert!(s.apply(&back));
                    prop_assert_eq!(&s, &start);
                }
            }
        }

        #[test]
        fn boundary_columns_fixed(seed in any::<u64>()) {
            let l = lat(9);
            let s0 = maximal_state(&l, &hv(&l, &[3, 1, -1]), &hv(&l, &[2, 0, -2]), &Barrier::MinusInfinity).unwrap();
            let s = simulate_chain(&s0, 5_000, &mut ChaCha8Rng::seed_from_u64(seed));
            for i in 0..3 {
                prop_assert_eq!(s.height(i, 0), s0.height(i, 0));
                prop_assert_eq!(s.height(i, 9), s0.height(i, 9));
            }
            prop_assert!(s.violation().is_none());
        }
    }
}
