//! Named verification suites. Each suite reads its budgets from a
//! [`Config`] (defaults are the acceptance settings), derives every random
//! stream from the root `seed`, and returns one [`TestReport`] per checked
//! condition. A suite passes iff every report passes.

use std::collections::HashMap;

use rand::Rng;

use crate::avoid::{affine_transform, flip_transform, AvoidSampler, AvoidSpec, TailBounds, CI_Z};
use crate::bridge::{bridge_max_prob, fill_bridge, midpoint_cdf_single, sample_bridge_at};
use crate::config::Config;
use crate::domain::{Barrier, Curve, Interval, LatticeParams, WeylVector};
use crate::error::{Error, Result};
use crate::glauber::{burn_in, maximal_state, minimal_state, run_chain, simulate_chain, simulate_coupled, GlauberConfig};
use crate::rng::{par_draws, try_par_draws, RngSeed};
use crate::verify::gibbs::{gibbs_resample_test, GibbsConfig, Resampler};
use crate::verify::pw::{
    curve_count_detector, estimate_pw, estimate_pw_oracle, DetectorVerdict, ObservableSpec, OracleSample, TopSamples,
    DEFAULT_INNER, DEFAULT_SCHEDULE,
};
use crate::verify::stats::{
    chi_square_gof, ks_distance_to_cdf, ks_two_sample, total_variation, wilson_interval, TestReport, Verdict,
    SUITE_ALPHA,
};
use crate::walk::{count_paths_u128, enumerate_avoiding_heights, WalkBridgeSampler, WalkEnsembleSpec};

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 10] = [
    "reflection",
    "walk-exact",
    "convergence",
    "glauber-stationarity",
    "coupling",
    "gibbs",
    "tails",
    "pw",
    "detect",
    "transforms",
];

const MAX_ATTEMPTS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: String,
    pub reports: Vec<TestReport>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        !self.reports.is_empty() && self.reports.iter().all(|r| r.verdict.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestReport> {
        self.reports.iter().filter(|r| !r.verdict.passed())
    }
}

pub fn is_suite(name: &str) -> bool {
    SUITES.contains(&name)
}

/// Runs the named suite with budgets and seed from `cfg`.
pub fn run_suite(name: &str, cfg: &Config) -> Result<SuiteResult> {
    let seed = RngSeed::new(cfg.get("seed", 1u64)?).child(name, 0);
    let reports = match name {
        "reflection" => reflection(cfg, &seed)?,
        "walk-exact" => walk_exact(cfg, &seed)?,
        "convergence" => convergence(cfg, &seed)?,
        "glauber-stationarity" => glauber_stationarity(cfg, &seed)?,
        "coupling" => coupling(cfg, &seed)?,
        "gibbs" => gibbs(cfg, &seed)?,
        "tails" => tails(cfg, &seed)?,
        "pw" => pw(cfg, &seed)?,
        "detect" => detect(cfg, &seed)?,
        "transforms" => transforms(cfg, &seed)?,
        other => return Err(Error::Parameter(format!("unknown suite {other:?}"))),
    };
    Ok(SuiteResult { name: name.to_string(), reports })
}

fn unit() -> Interval {
    Interval::new(0.0, 1.0).expect("valid interval")
}

fn weyl(v: &[f64]) -> Result<WeylVector> {
    WeylVector::new(v.to_vec())
}

/// Reflection formula against grid maxima at `M` and `M / 2` (the coarse
/// grid is every other point of the fine one). Tolerance: 3 binomial SE
/// plus the allowance `P(beta) - P(beta + sqrt(T / M))`, which bounds the
/// probability lost to a grid maximum below the true one.
fn reflection(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let n: usize = cfg.get("samples", 100_000)?;
    let m: usize = cfg.get("grid", 2048)?;
    if m < 4 || m % 2 != 0 {
        return Err(Error::Parameter(format!("grid must be even and >= 4, got {m}")));
    }
    let cases = [(1.0, 0.0, 1.0), (2.0, 0.0, 1.0), (1.0, 0.5, 1.0)];
    let mut reports = Vec::new();
    for (ci, &(t, a, beta)) in cases.iter().enumerate() {
        let s = seed.child("case", ci as u64);
        let dt = t / m as f64;
        let hits = par_draws(&s, "bridges", n, |rng| {
            let mut path = vec![0.0; m + 1];
            fill_bridge(&mut path, dt, 0.0, a, rng);
            let fine = path.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let coarse = path.iter().step_by(2).copied().fold(f64::NEG_INFINITY, f64::max);
            (fine >= beta, coarse >= beta)
        });
        let exact = bridge_max_prob(t, a, beta)?;
        let se = (exact * (1.0 - exact) / n as f64).sqrt();
        let mut allowances = Vec::new();
        for (label, grid, count) in [
            ("fine", m, hits.iter().filter(|h| h.0).count()),
            ("coarse", m / 2, hits.iter().filter(|h| h.1).count()),
        ] {
            let allowance = exact - bridge_max_prob(t, a, beta + (t / grid as f64).sqrt())?;
            allowances.push(allowance);
            let p_hat = count as f64 / n as f64;
            let tol = 3.0 * se + allowance;
            reports.push(
                TestReport::new(format!("reflection.T{t}.a{a}.beta{beta}.M{grid}"), p_hat, Verdict::from_bool((p_hat - exact).abs() <= tol))
                    .ci(exact - tol, exact + tol)
                    .threshold(format!("|p-{exact:.6}|<=3se+{allowance:.6}"))
                    .samples(n.to_string())
                    .seed(&s)
                    .detail(format!("{label} grid")),
            );
        }
        reports.push(
            TestReport::new(format!("reflection.T{t}.a{a}.beta{beta}.allowance"), allowances[0], Verdict::from_bool(allowances[0] < allowances[1]))
                .threshold(format!("allowance(M={m}) < allowance(M={})={:.6}", m / 2, allowances[1]))
                .seed(&s),
        );
    }
    Ok(reports)
}

fn encode(steps: &[i8]) -> usize {
    steps.iter().rev().fold(0, |acc, &d| acc * 3 + (d + 1) as usize)
}

fn walks_with_sum(n: usize, z: i64) -> Vec<Vec<i8>> {
    let total = 3usize.pow(n as u32);
    (0..total)
        .filter_map(|mut code| {
            let steps: Vec<i8> = (0..n)
                .map(|_| {
                    let d = (code % 3) as i8 - 1;
                    code /= 3;
                    d
                })
                .collect();
            (steps.iter().map(|&d| d as i64).sum::<i64>() == z).then_some(steps)
        })
        .collect()
}

/// Conditioned walk sampler against exhaustive enumeration: the law is
/// uniform over walks with the prescribed sum.
fn walk_exact(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let per: usize = cfg.get("samples_per_endpoint", 20_000)?;
    let max_n: usize = cfg.get("max_steps", 6)?;
    let sampler = WalkBridgeSampler::new(max_n);
    let mut reports = Vec::new();
    let mut max_err = 0.0f64;
    let mut count_mismatch = 0usize;
    for n in 1..=max_n {
        for z in -(n as i64)..=n as i64 {
            let paths = walks_with_sum(n, z);
            if paths.len() as u128 != count_paths_u128(n as u32, z)? {
                count_mismatch += 1;
            }
            let exact_log = -(paths.len() as f64).ln();
            for p in &paths {
                let mut s = 0i64;
                let mut acc = 0.0;
                for (m, &d) in p.iter().enumerate() {
                    acc += sampler.step_prob(n - m, z - s, d).ln();
                    s += d as i64;
                }
                max_err = max_err.max((acc - exact_log).abs());
            }
            let mut index = vec![usize::MAX; 3usize.pow(n as u32)];
            for (i, p) in paths.iter().enumerate() {
                index[encode(p)] = i;
            }
            let s = seed.child("walk", (n as u64) << 8 | (z + n as i64) as u64);
            let draws = try_par_draws(&s, "draws", per, |rng| sampler.sample(n, z, rng).map(|w| encode(w.steps())))?;
            let mut counts = vec![0u64; paths.len()];
            let mut stray = 0u64;
            for c in draws {
                match index[c] {
                    usize::MAX => stray += 1,
                    i => counts[i] += 1,
                }
            }
            let probs = vec![1.0 / paths.len() as f64; paths.len()];
            let chi = chi_square_gof(&counts, &probs)?;
            let ok = stray == 0 && chi.p_value >= SUITE_ALPHA;
            reports.push(
                TestReport::new(format!("walk.N{n}.z{z}"), chi.statistic, Verdict::from_bool(ok))
                    .p(chi.p_value)
                    .threshold(format!("p>={SUITE_ALPHA:e}"))
                    .samples(per.to_string())
                    .seed(&s)
                    .detail(format!("cells={} df={} stray={stray}", paths.len(), chi.df)),
            );
        }
    }
    reports.push(
        TestReport::new("walk.telescoping", max_err, Verdict::from_bool(max_err <= 1e-9))
            .threshold("max |sum ln p_step + ln C(N,z)| <= 1e-9")
            .detail("every enumerated path, N <= max_steps"),
    );
    reports.push(
        TestReport::new("walk.counts", count_mismatch as f64, Verdict::from_bool(count_mismatch == 0))
            .threshold("enumeration size == C(N,z) for all (N,z)"),
    );
    Ok(reports)
}

/// Exact KS distance between the lattice law of the walk midpoint (bridge
/// `0 -> 0`, `N` steps on `[0, 1]`) and the Gaussian midpoint law.
fn population_ks(sampler: &WalkBridgeSampler, lattice: &LatticeParams) -> Result<f64> {
    let n = lattice.steps();
    let half = n / 2;
    let total = sampler.log_count(n, 0);
    let mut cum = 0.0;
    let mut d = 0.0f64;
    for h in -(half as i64)..=half as i64 {
        let p = (sampler.log_count(half, h) + sampler.log_count(n - half, -h) - total).exp();
        let f = midpoint_cdf_single(lattice.value_of(h), 0.0, 1.0, 0.0, 0.0)?;
        d = d.max((f - cum).abs());
        cum += p;
        d = d.max((cum - f).abs());
    }
    Ok(d)
}

fn convergence(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let scales: Vec<usize> = cfg.list("scales", &[4, 8, 16, 32])?;
    let n: usize = cfg.get("samples", 100_000)?;
    let limit: f64 = cfg.get("final_max", 0.02)?;
    // KS fluctuation band at the suite level (two-sided DKW).
    let band = ((2.0 / SUITE_ALPHA).ln() / (2.0 * n as f64)).sqrt();
    let mut reports = Vec::new();
    let mut ds = Vec::new();
    for &scale in &scales {
        let lattice = LatticeParams::from_scale(unit(), scale)?;
        let steps = lattice.steps();
        if steps % 2 != 0 {
            return Err(Error::Parameter(format!("scale {scale} gives an odd step count")));
        }
        let sampler = WalkBridgeSampler::new(steps);
        let s = seed.child("scale", scale as u64);
        let mids = try_par_draws(&s, "walks", n, |rng| {
            sampler.sample(steps, 0, rng).map(|w| lattice.value_of(w.steps()[..steps / 2].iter().map(|&d| d as i64).sum()))
        })?;
        let d = ks_distance_to_cdf(&mids, |x| midpoint_cdf_single(x, 0.0, 1.0, 0.0, 0.0).unwrap_or(f64::NAN))?;
        let pop = population_ks(&sampler, &lattice)?;
        ds.push(d);
        reports.push(
            TestReport::new(format!("convergence.n{scale}"), d, Verdict::Pass)
                .samples(n.to_string())
                .seed(&s)
                .detail(format!("N={steps} exact lattice-vs-Gaussian KS={pop:.6}")),
        );
    }
    let inversions: Vec<f64> = ds.windows(2).map(|w| w[1] - w[0]).filter(|&e| e > 0.0).collect();
    let mono_ok = inversions.is_empty() || (inversions.len() == 1 && inversions[0] <= band);
    reports.push(
        TestReport::new("convergence.monotone", inversions.len() as f64, Verdict::from_bool(mono_ok))
            .threshold(format!("nonincreasing; at most one inversion of size <= {band:.6}"))
            .detail(format!("{ds:?}")),
    );
    let last = *ds.last().ok_or_else(|| Error::Parameter("no scales".into()))?;
    reports.push(
        TestReport::new(format!("convergence.final.n{}", scales[scales.len() - 1]), last, Verdict::from_bool(last < limit))
            .threshold(format!("KS<{limit}")),
    );
    Ok(reports)
}

fn constant_barrier(lattice: &LatticeParams, value: f64) -> Result<Barrier> {
    Ok(Barrier::Curve(Curve::constant(lattice.interval(), lattice.steps(), value)?))
}

/// The enumerable Glauber instances: name, lattice, entrance and exit
/// heights, and the lower barrier.
fn glauber_instances() -> Result<Vec<(&'static str, LatticeParams, Vec<i64>, Vec<i64>, Barrier)>> {
    let small = LatticeParams::with_steps(unit(), 2)?;
    let four = LatticeParams::with_steps(unit(), 4)?;
    let g = constant_barrier(&four, four.value_of(-2))?;
    Ok(vec![
        ("k1.N2", small, vec![0], vec![0], Barrier::MinusInfinity),
        ("k2.N4", four, vec![1, 0], vec![0, -1], g),
    ])
}

fn glauber_stationarity(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let n: usize = cfg.get("samples", 100_000)?;
    let max_states: usize = cfg.get("max_states", 200)?;
    let tv_max: f64 = cfg.get("tv_max", 0.02)?;
    let mut reports = Vec::new();
    for (ii, (name, lattice, xh, yh, g)) in glauber_instances()?.into_iter().enumerate() {
        let spec = WalkEnsembleSpec::from_heights(lattice, &xh, &yh, Barrier::PlusInfinity, g.clone())?;
        let states = enumerate_avoiding_heights(&spec)?;
        if states.len() > max_states {
            return Err(Error::Parameter(format!("instance {name} has {} states", states.len())));
        }
        let index: HashMap<Vec<i64>, usize> = states.iter().enumerate().map(|(i, s)| (s.concat(), i)).collect();
        let hi = maximal_state(&lattice, spec.x(), spec.y(), &g)?;
        let lo = minimal_state(&lattice, spec.x(), spec.y(), &g)?;
        let s = seed.child("instance", ii as u64);
        let burn = burn_in(&hi, &lo, &s, 32, 1 << 40)?;
        let thin = (burn / 4).max(1);
        let mut rng = s.child("chain", 0).rng();
        let mut state = simulate_chain(&hi, burn, &mut rng);
        let mut counts = vec![0u64; states.len()];
        for _ in 0..n {
            run_chain(&mut state, thin, &mut rng);
            let i = index
                .get(&state.rows().concat())
                .ok_or_else(|| Error::Structure("chain left the enumerated state space".into()))?;
            counts[*i] += 1;
        }
        let probs = vec![1.0 / states.len() as f64; states.len()];
        let tv = total_variation(&counts, &probs);
        let chi = chi_square_gof(&counts, &probs)?;
        reports.push(
            TestReport::new(format!("glauber.{name}"), tv, Verdict::from_bool(tv <= tv_max))
                .p(chi.p_value)
                .threshold(format!("TV<={tv_max}"))
                .samples(format!("{n} thinned by {thin}"))
                .seed(&s)
                .detail(format!("states={} burn_in={burn}", states.len())),
        );
    }
    Ok(reports)
}

/// Random ordered pair of coupled-chain initial states on `N = 16` steps.
fn coupled_pair<R: Rng + ?Sized>(lattice: &LatticeParams, rng: &mut R) -> Result<(GlauberConfig, GlauberConfig)> {
    let mut ends = || -> (Vec<i64>, Vec<i64>) {
        let bottom = rng.random_range(-3..=0i64);
        let lo = vec![bottom + rng.random_range(1..=3i64), bottom];
        let d2 = rng.random_range(0..=2i64);
        let d1 = d2 + rng.random_range(0..=2i64);
        let hi = vec![lo[0] + d1, lo[1] + d2];
        (lo, hi)
    };
    let (x_lo, x_hi) = ends();
    let (y_lo, y_hi) = ends();
    let dx = lattice.dx();
    let floor_h = x_lo[1].min(y_lo[1]) - 1 - rng.random_range(0..=2i64);
    let (g_b, g_t) = if rng.random_bool(0.25) {
        (Barrier::MinusInfinity, Barrier::MinusInfinity)
    } else {
        let lift = rng.random_range(0..=1i64) as f64;
        (
            constant_barrier(lattice, (floor_h as f64 - 0.5) * dx)?,
            constant_barrier(lattice, (floor_h as f64 + lift - 0.5) * dx)?,
        )
    };
    let to_weyl = |h: &[i64]| weyl(&h.iter().map(|&v| lattice.value_of(v)).collect::<Vec<_>>());
    let (xl, yl, xh, yh) = (to_weyl(&x_lo)?, to_weyl(&y_lo)?, to_weyl(&x_hi)?, to_weyl(&y_hi)?);
    let a = minimal_state(lattice, &xl, &yl, &g_b)?;
    let b = maximal_state(lattice, &xh, &yh, &g_t)?;
    Ok((a, b))
}

fn dominance_report(name: &str, raised: &[f64], base: &[f64], seed: &RngSeed) -> Result<TestReport> {
    let ks = ks_two_sample(raised, base)?;
    let p = ks.p_less();
    Ok(TestReport::new(name, ks.d_plus, Verdict::from_bool(p >= SUITE_ALPHA))
        .p(p)
        .threshold(format!("one-sided p>={SUITE_ALPHA:e} against 'raised is smaller'"))
        .samples(format!("{}+{}", raised.len(), base.len()))
        .seed(seed)
        .detail(format!("effect sup(F_base - F_raised)={:.4}", ks.d_minus)))
}

fn marginal_samples(spec: &AvoidSpec, picks: &[(usize, f64)], n: usize, seed: &RngSeed) -> Result<Vec<Vec<f64>>> {
    let grid = spec.grid();
    let cols: Vec<(usize, usize)> = picks
        .iter()
        .map(|&(i, t)| grid.index_of(t).map(|j| (i, j)).ok_or_else(|| Error::Parameter(format!("{t} is not a grid time"))))
        .collect::<Result<_>>()?;
    let sampler = AvoidSampler::new(spec)?;
    let rows = try_par_draws(seed, "ensembles", n, |rng| {
        sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(r, _)| cols.iter().map(|&(i, j)| r[i][j]).collect::<Vec<f64>>())
    })?;
    Ok((0..cols.len()).map(|c| rows.iter().map(|r| r[c]).collect()).collect())
}

fn coupling(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let seeds: u64 = cfg.get("seeds", 100)?;
    let events: u64 = cfg.get("events", 10_000)?;
    let n: usize = cfg.get("samples", 20_000)?;
    let lattice = LatticeParams::from_scale(unit(), 4)?;
    let mut violations = 0u64;
    let mut first = String::new();
    for s in 0..seeds {
        let sub = seed.child("chain", s);
        let (a, b) = coupled_pair(&lattice, &mut sub.child("init", 0).rng())?;
        match simulate_coupled(&a, &b, events, &mut sub.child("clock", 0).rng()) {
            Ok(st) if st.a.le(&st.b) && st.a.violation().is_none() && st.b.violation().is_none() => {}
            Ok(_) => {
                violations += 1;
                if first.is_empty() {
                    first = format!("seed {s}: final state out of order");
                }
            }
            Err(e) => {
                violations += 1;
                if first.is_empty() {
                    first = format!("seed {s}: {e}");
                }
            }
        }
    }
    let mut reports = vec![TestReport::new("coupling.pathwise", violations as f64, Verdict::from_bool(violations == 0))
        .threshold("0 ordering violations")
        .samples(format!("{seeds} seeds x {events} events, k=2, N={}", lattice.steps()))
        .seed(seed)
        .detail(first)];

    let picks = [(0usize, 0.5), (1, 0.25), (1, 0.5)];
    let base = AvoidSpec::free(unit(), weyl(&[0.5, -0.5])?, weyl(&[0.5, -0.5])?, 512)?;
    let raised = AvoidSpec::free(unit(), weyl(&[1.5, 0.5])?, weyl(&[1.5, 0.5])?, 512)?;
    let g = Barrier::Curve(Curve::constant(unit(), 512, -0.8)?);
    let walled = AvoidSpec::new(unit(), weyl(&[0.5, -0.5])?, weyl(&[0.5, -0.5])?, Barrier::PlusInfinity, g, 512)?;
    let s_base = seed.child("base", 0);
    let base_m = marginal_samples(&base, &picks, n, &s_base)?;
    let raised_m = marginal_samples(&raised, &picks, n, &seed.child("raised", 0))?;
    let walled_m = marginal_samples(&walled, &picks, n, &seed.child("walled", 0))?;
    for (c, &(i, t)) in picks.iter().enumerate() {
        reports.push(dominance_report(&format!("coupling.endpoints.curve{}.t{t}", i + 1), &raised_m[c], &base_m[c], &s_base)?);
        reports.push(dominance_report(&format!("coupling.barrier.curve{}.t{t}", i + 1), &walled_m[c], &base_m[c], &s_base)?);
    }
    Ok(reports)
}

fn gibbs(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let n: usize = cfg.get("samples", 20_000)?;
    let control_max: f64 = cfg.get("control_max_p", 1e-6)?;
    let spec = AvoidSpec::free(unit(), weyl(&[0.25, -0.25])?, weyl(&[0.25, -0.25])?, 512)?;
    let times = [0.375, 0.5, 0.625];
    let make = |block: std::ops::Range<usize>, resampler| GibbsConfig {
        marginals: times.iter().map(|&t| (block.start, t)).collect(),
        block,
        lo: 128,
        hi: 384,
        num_samples: n,
        max_attempts: MAX_ATTEMPTS,
        resampler,
    };
    let mut reports = Vec::new();
    let mut min_p = 1.0f64;
    for (b, block) in [0..1, 1..2].into_iter().enumerate() {
        let out = gibbs_resample_test(&spec, &make(block, Resampler::Exact), &seed.child("block", b as u64))?;
        min_p = min_p.min(out.min_p);
        reports.extend(out.reports);
    }
    let tested = reports.len();
    if let Some(last) = reports.last_mut() {
        last.detail = format!("min p over {tested} marginals={min_p:.3e}, Bonferroni p={:.3e}", (min_p * tested as f64).min(1.0));
    }
    let s = seed.child("control", 0);
    let control = gibbs_resample_test(&spec, &make(0..1, Resampler::IgnoreLower), &s)?;
    reports.push(
        TestReport::new("gibbs.negative-control", control.min_p, Verdict::from_bool(control.min_p < control_max))
            .p(control.min_p)
            .threshold(format!("min p<{control_max:e}"))
            .samples(format!("{n}+{n}"))
            .seed(&s)
            .detail("resampler ignores the lower curve"),
    );
    Ok(reports)
}

/// Equally spaced entrance/exit data `(k-1)/2, ..., -(k-1)/2`.
fn spaced(k: usize) -> Result<WeylVector> {
    weyl(&(0..k).map(|i| (k as f64 - 1.0) / 2.0 - i as f64).collect::<Vec<_>>())
}

#[derive(Clone, Copy)]
enum Direction {
    /// Empirical probability must not exceed the bound.
    Upper,
    /// Empirical probability must not fall below the bound.
    Lower,
}

fn bound_report(name: String, hits: u64, n: u64, bound: f64, dir: Direction, seed: &RngSeed) -> TestReport {
    let (lo, hi) = wilson_interval(hits, n, CI_Z);
    let p_hat = hits as f64 / n as f64;
    let verdict = match dir {
        Direction::Upper if bound > 1.0 => Verdict::Vacuous,
        Direction::Upper => Verdict::from_bool(lo <= bound),
        Direction::Lower => Verdict::from_bool(hi >= bound),
    };
    let rel = match dir {
        Direction::Upper => "ci_lo<=",
        Direction::Lower => "ci_hi>=",
    };
    TestReport::new(name, p_hat, verdict)
        .ci(lo, hi)
        .threshold(format!("{rel}{bound:.6e}"))
        .samples(n.to_string())
        .seed(seed)
}

/// Bottom-curve midpoint value and minimum, per sample.
fn bottom_stats(k: usize, n: usize, seed: &RngSeed) -> Result<Vec<(f64, f64)>> {
    let v = spaced(k)?;
    let spec = AvoidSpec::free(unit(), v.clone(), v, 512)?;
    let sampler = AvoidSampler::new(&spec)?;
    try_par_draws(seed, "ensembles", n, |rng| {
        sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(rows, _)| {
            let b = &rows[k - 1];
            (b[256], b.iter().copied().fold(f64::INFINITY, f64::min))
        })
    })
}

fn tails(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let n: usize = cfg.get("samples", 100_000)?;
    let ks: Vec<usize> = cfg.list("ks", &[1, 2, 3])?;
    let rs: Vec<f64> = cfg.list("rs", &[0.5, 1.0, 1.5])?;
    let repeat_seeds: u64 = cfg.get("repeat_seeds", 20)?;
    let repeat_n: usize = cfg.get("repeat_samples", 5_000)?;
    let bounds = TailBounds::certified()?;
    let mut reports = Vec::new();
    let checks = |k: usize, r: f64, data: &[(f64, f64)], s: &RngSeed| -> Result<Vec<TestReport>> {
        let base = spaced(k)?.last();
        let nn = data.len() as u64;
        let above = data.iter().filter(|d| d.0 >= base + r).count() as u64;
        let below = data.iter().filter(|d| d.0 <= base - r).count() as u64;
        let deep = base - std::f64::consts::SQRT_2 * (k as f64 + r - 1.0);
        let dips = data.iter().filter(|d| d.1 <= deep).count() as u64;
        Ok(vec![
            bound_report(format!("tails.k{k}.r{r}.bottom_max"), above, nn, bounds.bottom_max(k, r)?, Direction::Upper, s),
            bound_report(format!("tails.k{k}.r{r}.bottom_min"), below, nn, bounds.bottom_min(k, r)?, Direction::Lower, s),
            bound_report(format!("tails.k{k}.r{r}.inf"), dips, nn, bounds.inf(k, r)?, Direction::Upper, s),
        ])
    };
    for &k in &ks {
        let s = seed.child("k", k as u64);
        let data = bottom_stats(k, n, &s)?;
        for &r in &rs {
            reports.extend(checks(k, r, &data, &s)?);
        }
    }
    if repeat_seeds > 0 {
        let mut failed = 0;
        for i in 0..repeat_seeds {
            let s = seed.child("repeat", i);
            let data = bottom_stats(3, repeat_n, &s)?;
            if !checks(3, 1.5, &data, &s)?.iter().all(|r| r.verdict.passed()) {
                failed += 1;
            }
        }
        reports.push(
            TestReport::new("tails.k3.r1.5.repeat", failed as f64, Verdict::from_bool(failed <= 1))
                .threshold("failing seeds <= 1")
                .samples(format!("{repeat_seeds} seeds x {repeat_n}"))
                .seed(seed),
        );
    }
    Ok(reports)
}

/// The calibrated two-curve experiment: barrier-free pair on `[0, 4]` with
/// `x = y = (0, -2)`, observed at `t1 = 2`.
struct TwoCurve {
    interval: Interval,
    sampler: AvoidSampler,
    t1: f64,
}

impl TwoCurve {
    const STEPS: usize = 2048;

    fn new() -> Result<Self> {
        let interval = Interval::new(0.0, 4.0)?;
        let v = weyl(&[0.0, -2.0])?;
        let spec = AvoidSpec::free(interval, v.clone(), v, Self::STEPS)?;
        Ok(TwoCurve { interval, sampler: AvoidSampler::new(&spec)?, t1: 2.0 })
    }

    fn index(&self, t: f64) -> Result<usize> {
        self.sampler.spec().grid().index_of(t).ok_or_else(|| Error::Parameter(format!("{t} is not a grid time")))
    }

    /// Median of the hidden curve at `t1`.
    fn calibrate(&self, n: usize, seed: &RngSeed) -> Result<f64> {
        let j = self.index(self.t1)?;
        let mut v = try_par_draws(seed, "calibrate", n, |rng| self.sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(r, _)| r[1][j]))?;
        v.sort_by(f64::total_cmp);
        Ok(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
    }

    /// Direct estimates of `P(L2(t1) < x1)` and `P(L2(t1) <= x1)` with SE.
    fn direct(&self, x1: f64, n: usize, seed: &RngSeed) -> Result<(f64, f64, f64)> {
        let j = self.index(self.t1)?;
        let v = try_par_draws(seed, "direct", n, |rng| self.sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(r, _)| r[1][j]))?;
        let lt = v.iter().filter(|&&x| x < x1).count() as f64 / n as f64;
        let le = v.iter().filter(|&&x| x <= x1).count() as f64 / n as f64;
        Ok((lt, le, (le * (1.0 - le) / n as f64).sqrt()))
    }

    fn top_samples(&self, schedule: &[u32], n: usize, seed: &RngSeed) -> Result<TopSamples> {
        let times = ObservableSpec::observation_times(self.t1, schedule);
        let idx: Vec<usize> = times.iter().map(|&t| self.index(t)).collect::<Result<_>>()?;
        let rows = try_par_draws(seed, "top", n, |rng| {
            self.sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(r, _)| idx.iter().map(|&j| r[0][j]).collect::<Vec<f64>>())
        })?;
        Ok(TopSamples { times, n1: 1, rows })
    }

    fn oracle_samples(&self, spec: &ObservableSpec, n: usize, seed: &RngSeed) -> Result<Vec<OracleSample>> {
        let (ja, jb) = (self.index(spec.a_w())?, self.index(spec.b_w())?);
        try_par_draws(seed, "oracle", n, |rng| {
            self.sampler.sample_rows(rng, MAX_ATTEMPTS).map(|(r, _)| OracleSample {
                u: r[0][ja],
                v: r[0][jb],
                hidden: r[1][ja..=jb].to_vec(),
            })
        })
    }
}

fn one_bridge_top(schedule: &[u32], x1_t1: f64, n: usize, seed: &RngSeed) -> TopSamples {
    let times = ObservableSpec::observation_times(x1_t1, schedule);
    let rows = par_draws(seed, "bridge", n, |rng| sample_bridge_at(0.0, 0.0, 1.0, 0.0, &times, rng));
    TopSamples { times, n1: 1, rows }
}

fn fmt_capped(capped: &[(u64, f64, f64)]) -> String {
    capped.iter().map(|(m, v, s)| format!("M={m}:{v:.4}+-{s:.4}")).collect::<Vec<_>>().join(" ")
}

fn pw(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let schedule: Vec<u32> = cfg.list("schedule", &DEFAULT_SCHEDULE)?;
    let n_one: usize = cfg.get("outer_one", 100_000)?;
    let x1_one: f64 = cfg.get("x1_one", 1.25)?;
    let z_one: f64 = cfg.get("z_one", 3.0)?;
    let n_two: usize = cfg.get("outer_two", 10_000)?;
    let inner: u64 = cfg.get("inner", DEFAULT_INNER)?;
    let n_cal: usize = cfg.get("calibration", 20_000)?;
    let n_dir: usize = cfg.get("direct", 20_000)?;
    let nested_k: f64 = cfg.get("nested_se", 4.0)?;
    let max_rate: f64 = cfg.get("max_violation_rate", 1e-3)?;
    let mut reports = Vec::new();

    let s = seed.child("one-bridge", 0);
    let top = one_bridge_top(&schedule, 0.5, n_one, &s);
    for &w in &schedule {
        let spec = ObservableSpec::new(0.5, x1_one, w, 1, unit())?;
        let est = estimate_pw(&top, &spec, inner, &s.child("w", w as u64))?;
        let (lo, hi) = est.ci(z_one);
        reports.push(
            TestReport::new(format!("pw.one-bridge.w{w}"), est.mean, Verdict::from_bool(lo <= 1.0 && 1.0 <= hi))
                .ci(lo, hi)
                .threshold(format!("1 in mean+-{z_one}se"))
                .samples(n_one.to_string())
                .seed(&s)
                .detail(format!("x1={x1_one} degenerate={} {}", est.degenerate, fmt_capped(&est.capped))),
        );
    }

    let two = TwoCurve::new()?;
    let x1 = two.calibrate(n_cal, &seed.child("calibrate", 0))?;
    let (p_lt, p_le, se_dir) = two.direct(x1, n_dir, &seed.child("direct", 0))?;
    let w = *schedule.last().ok_or_else(|| Error::Parameter("empty schedule".into()))?;
    let spec = ObservableSpec::new(two.t1, x1, w, 1, two.interval)?;
    let s = seed.child("oracle", 0);
    let samples = two.oracle_samples(&spec, n_two, &s)?;
    let oracle = estimate_pw_oracle(&samples, &spec, inner, &s)?;
    let est = &oracle.estimate;
    let comb = (est.se * est.se + se_dir * se_dir).sqrt();
    reports.push(
        TestReport::new(format!("pw.two-curve.w{w}"), est.mean, Verdict::from_bool((est.mean - p_le).abs() <= 3.0 * comb))
            .ci(p_le - 3.0 * comb, p_le + 3.0 * comb)
            .threshold(format!("|p_w - P(L2<=x1)|<=3 combined se ({comb:.4})"))
            .samples(format!("outer={n_two} inner={inner} direct={n_dir}"))
            .seed(&s)
            .detail(format!(
                "x1={x1:.6} P(L2<x1)={p_lt:.4} P(L2<=x1)={p_le:.4} se_pw={:.4} degenerate={} {}",
                est.se,
                est.degenerate,
                fmt_capped(&est.capped)
            )),
    );
    let violations = oracle.domination_violations(nested_k);
    let rate = violations as f64 / oracle.ratios.len() as f64;
    reports.push(
        TestReport::new("pw.domination", rate, Verdict::from_bool(rate < max_rate))
            .threshold(format!("violation rate<{max_rate} at {nested_k} nested se"))
            .samples(oracle.ratios.len().to_string())
            .seed(&s)
            .detail(format!("violations={violations}")),
    );
    Ok(reports)
}

fn detect(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let planted = cfg.raw("planted").unwrap_or("both").to_string();
    let seeds: u64 = cfg.get("seeds", 20)?;
    let schedule: Vec<u32> = cfg.list("schedule", &DEFAULT_SCHEDULE)?;
    let tau: f64 = cfg.get("tau", 0.9)?;
    let n_one: usize = cfg.get("outer_one", 100_000)?;
    let x1_one: f64 = cfg.get("x1_one", 1.25)?;
    let n_two: usize = cfg.get("outer_two", 10_000)?;
    let n_cal: usize = cfg.get("calibration", 20_000)?;
    let inner: u64 = cfg.get("inner", DEFAULT_INNER)?;
    let cases: Vec<&str> = match planted.as_str() {
        "both" => vec!["none", "hidden"],
        "none" => vec!["none"],
        "hidden" => vec!["hidden"],
        other => return Err(Error::Parameter(format!("planted must be none, hidden or both, got {other:?}"))),
    };
    let mut reports = Vec::new();
    for case in cases {
        let two = if case == "hidden" { Some(TwoCurve::new()?) } else { None };
        let x1 = match &two {
            Some(t) => t.calibrate(n_cal, &seed.child("calibrate", 0))?,
            None => x1_one,
        };
        let expected = if two.is_some() { DetectorVerdict::HiddenCurve } else { DetectorVerdict::NoHiddenCurve };
        let mut correct = 0;
        for i in 0..seeds {
            let s = seed.child(case, i);
            let (top, t1, iv, n) = match &two {
                Some(t) => (t.top_samples(&schedule, n_two, &s)?, t.t1, t.interval, n_two),
                None => (one_bridge_top(&schedule, 0.5, n_one, &s), 0.5, unit(), n_one),
            };
            let rep = curve_count_detector(&top, t1, x1, &schedule, tau, iv, inner, &s)?;
            let ok = rep.verdict == expected;
            correct += ok as u64;
            let means: Vec<String> = rep.estimates.iter().map(|e| format!("w{}:{:.3}+-{:.3}", e.w, e.mean, e.se)).collect();
            reports.push(
                TestReport::new(format!("detect.{case}.seed{i}"), rep.estimates.last().map_or(f64::NAN, |e| e.mean), Verdict::from_bool(ok))
                    .threshold(format!("verdict=={expected}"))
                    .samples(n.to_string())
                    .seed(&s)
                    .detail(format!("verdict={} x1={x1:.6} {}", rep.verdict, means.join(" "))),
            );
        }
        reports.push(
            TestReport::new(format!("detect.{case}.summary"), correct as f64, Verdict::from_bool(correct == seeds))
                .threshold(format!("{seeds}/{seeds} correct"))
                .seed(seed),
        );
    }
    Ok(reports)
}

fn transforms(cfg: &Config, seed: &RngSeed) -> Result<Vec<TestReport>> {
    let n: usize = cfg.get("samples", 20_000)?;
    let steps = 512;
    let times = [0.25, 0.5, 0.75];
    let mut reports = Vec::new();
    let compare = |name: &str, a: &[Vec<f64>], b: &[Vec<f64>], labels: &[String], s: &RngSeed| -> Result<Vec<TestReport>> {
        a.iter()
            .zip(b)
            .zip(labels)
            .map(|((x, y), l)| {
                let ks = ks_two_sample(x, y)?;
                Ok(TestReport::new(format!("transforms.{name}.{l}"), ks.d, Verdict::from_bool(ks.p_value >= SUITE_ALPHA))
                    .p(ks.p_value)
                    .threshold(format!("p>={SUITE_ALPHA:e}"))
                    .samples(format!("{n}+{n}"))
                    .seed(s))
            })
            .collect()
    };

    let (c, u, r) = (1.5, 0.5, 0.3);
    let xs = [0.5, -0.5];
    let base = AvoidSpec::free(unit(), weyl(&xs)?, weyl(&xs)?, steps)?;
    let iv2 = Interval::new(u, c * c + u)?;
    let moved: Vec<f64> = xs.iter().map(|v| c * v + r).collect();
    let target = AvoidSpec::free(iv2, weyl(&moved)?, weyl(&moved)?, steps)?;
    let picks: Vec<(usize, f64)> = (0..2).flat_map(|i| times.iter().map(move |&t| (i, t))).collect();
    let labels: Vec<String> = picks.iter().map(|(i, t)| format!("curve{}.t{t}", i + 1)).collect();
    let s = seed.child("affine", 0);
    let sampler = AvoidSampler::new(&base)?;
    let grid = base.grid();
    let idx: Vec<(usize, usize)> = picks.iter().map(|&(i, t)| (i, grid.index_of(t).expect("grid time"))).collect();
    let rows = try_par_draws(&s, "transformed", n, |rng| -> Result<Vec<f64>> {
        let (ens, _) = sampler.sample(rng, MAX_ATTEMPTS)?;
        let t = affine_transform(&ens, c, u, r)?;
        Ok(idx.iter().map(|&(i, j)| t.value(i, j)).collect())
    })?;
    let transformed: Vec<Vec<f64>> = (0..idx.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    let target_picks: Vec<(usize, f64)> = picks.iter().map(|&(i, t)| (i, iv2.a() + t * iv2.len())).collect();
    let direct = marginal_samples(&target, &target_picks, n, &s.child("direct", 0))?;
    reports.extend(compare("affine", &transformed, &direct, &labels, &s)?);

    let (x, y) = ([1.0, -0.5], [0.5, 0.0]);
    let base = AvoidSpec::free(unit(), weyl(&x)?, weyl(&y)?, steps)?;
    let neg = |v: &[f64]| -> Result<WeylVector> { weyl(&v.iter().rev().map(|a| -a).collect::<Vec<_>>()) };
    let target = AvoidSpec::free(unit(), neg(&x)?, neg(&y)?, steps)?;
    let s = seed.child("flip", 0);
    let sampler = AvoidSampler::new(&base)?;
    let rows = try_par_draws(&s, "transformed", n, |rng| -> Result<Vec<f64>> {
        let (ens, _) = sampler.sample(rng, MAX_ATTEMPTS)?;
        let f = flip_transform(&ens);
        Ok(idx.iter().map(|&(i, j)| f.value(i, j)).collect())
    })?;
    let flipped: Vec<Vec<f64>> = (0..idx.len()).map(|k| rows.iter().map(|row| row[k]).collect()).collect();
    let direct = marginal_samples(&target, &picks, n, &s.child("direct", 0))?;
    reports.extend(compare("flip", &flipped, &direct, &labels, &s)?);
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(pairs: &[(&str, &str)]) -> Config {
        let mut c = Config::new();
        for (k, v) in pairs {
            c.set(k, *v);
        }
        c
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(!is_suite("nope"));
        assert!(run_suite("nope", &Config::new()).is_err());
    }

    #[test]
    fn small_reflection_run_is_deterministic() {
        let c = quick(&[("samples", "2000"), ("grid", "64"), ("seed", "3")]);
        let a = run_suite("reflection", &c).unwrap();
        let b = run_suite("reflection", &c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.reports.len(), 9);
    }

    #[test]
    fn walk_exact_small() {
        let r = run_suite("walk-exact", &quick(&[("samples_per_endpoint", "3000"), ("max_steps", "3")])).unwrap();
        assert!(r.passed(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn glauber_instances_are_enumerable() {
        for (name, lattice, xh, yh, g) in glauber_instances().unwrap() {
            let spec = WalkEnsembleSpec::from_heights(lattice, &xh, &yh, Barrier::PlusInfinity, g).unwrap();
            let n = enumerate_avoiding_heights(&spec).unwrap().len();
            assert!(n >= 3 && n <= 200, "{name}: {n}");
        }
    }

    #[test]
    fn population_ks_decreases() {
        let ds: Vec<f64> = [4usize, 8, 16]
            .iter()
            .map(|&n| {
                let l = LatticeParams::from_scale(unit(), n).unwrap();
                population_ks(&WalkBridgeSampler::new(l.steps()), &l).unwrap()
            })
            .collect();
        assert!(ds[0] > ds[1] && ds[1] > ds[2], "{ds:?}");
    }

    #[test]
    fn coupled_pairs_are_ordered() {
        let lattice = LatticeParams::from_scale(unit(), 4).unwrap();
        let seed = RngSeed::new(11);
        for s in 0..50 {
            let (a, b) = coupled_pair(&lattice, &mut seed.child("p", s).rng()).unwrap();
            assert!(a.le(&b));
        }
    }

    #[test]
    fn bad_planted_value() {
        assert!(run_suite("detect", &quick(&[("planted", "maybe")])).is_err());
    }
}
