//! Gibbs resampling invariance test.
//!
//! Two independent sets of ensembles are drawn from the same avoiding law.
//! The first set is kept as is; in the second, a block of consecutive curves
//! is redrawn on a sub-interval from the avoiding law with boundary data read
//! off the surrounding curves. Marginals of the two sets are compared by
//! two-sample KS. Keeping the sets independent makes the KS null exact.

use std::ops::Range;

use crate::avoid::{AvoidSampler, AvoidSpec};
use crate::domain::{Barrier, Curve, Grid, WeylVector};
use crate::error::{Error, Result};
use crate::rng::{try_par_draws, RngSeed, SimRng};
use crate::verify::stats::{ks_two_sample, TestReport, Verdict, SUITE_ALPHA};

/// How the block is redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resampler {
    /// Avoiding law with the correct boundary data.
    Exact,
    /// Planted defect: the lower boundary is replaced by `-inf`.
    IgnoreLower,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsConfig {
    pub block: Range<usize>,
    /// Grid indices bounding the sub-interval, `lo < hi`.
    pub lo: usize,
    pub hi: usize,
    /// Curves and times whose marginals are compared.
    pub marginals: Vec<(usize, f64)>,
    pub num_samples: usize,
    pub max_attempts: u64,
    pub resampler: Resampler,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsOutcome {
    pub reports: Vec<TestReport>,
    pub min_p: f64,
    /// `min(1, m * min_p)` over the `m` marginals.
    pub bonferroni_p: f64,
}

fn boundary(barrier: &Barrier, grid: &Grid, lo: usize, hi: usize) -> Result<Barrier> {
    match barrier {
        Barrier::Curve(_) => {
            let values = barrier.on_grid(grid)?;
            Ok(Barrier::Curve(Curve::from_grid(*grid, values)?.restrict(lo, hi)?))
        }
        other => Ok(other.clone()),
    }
}

fn resample_block(
    rows: &mut [Vec<f64>],
    spec: &AvoidSpec,
    cfg: &GibbsConfig,
    rng: &mut SimRng,
) -> Result<()> {
    let grid = spec.grid();
    let (lo, hi) = (cfg.lo, cfg.hi);
    let Range { start, end } = cfg.block.clone();
    let sub_of = |i: usize| -> Result<Barrier> {
        Ok(Barrier::Curve(Curve::from_grid(grid, rows[i].clone())?.restrict(lo, hi)?))
    };
    let f = if start == 0 { boundary(spec.f(), &grid, lo, hi)? } else { sub_of(start - 1)? };
    let g = match cfg.resampler {
        Resampler::IgnoreLower => Barrier::MinusInfinity,
        Resampler::Exact if end == spec.k() => boundary(spec.g(), &grid, lo, hi)?,
        Resampler::Exact => sub_of(end)?,
    };
    let x = WeylVector::new(rows[start..end].iter().map(|r| r[lo]).collect())?;
    let y = WeylVector::new(rows[start..end].iter().map(|r| r[hi]).collect())?;
    let sub = crate::domain::Interval::new(grid.time(lo), grid.time(hi))?;
    let inner = AvoidSpec::new(sub, x, y, f, g, hi - lo)?;
    let (new_rows, _) = AvoidSampler::new(&inner)?
        .sample_rows(rng, cfg.max_attempts)
        .map_err(|e| e.context("nested block resampling"))?;
    for (i, row) in new_rows.into_iter().enumerate() {
        rows[start + i][lo..=hi].copy_from_slice(&row);
    }
    Ok(())
}

/// Runs the resampling test on `spec`; one report per marginal, each
/// failing iff its KS p-value is below [`SUITE_ALPHA`].
pub fn gibbs_resample_test(spec: &AvoidSpec, cfg: &GibbsConfig, seed: &RngSeed) -> Result<GibbsOutcome> {
    let k = spec.k();
    let m = spec.grid_points();
    if cfg.block.is_empty() || cfg.block.end > k {
        return Err(Error::Parameter(format!("block {:?} outside 0..{k}", cfg.block)));
    }
    if !(0 < cfg.lo && cfg.lo < cfg.hi && cfg.hi < m) {
        return Err(Error::Parameter("sub-interval must lie strictly inside the grid".into()));
    }
    if cfg.marginals.is_empty() || cfg.num_samples == 0 {
        return Err(Error::Parameter("nothing to test".into()));
    }
    let grid = spec.grid();
    let mut cols = Vec::with_capacity(cfg.marginals.len());
    for &(curve, t) in &cfg.marginals {
        let j = grid.index_of(t).ok_or_else(|| Error::Parameter(format!("time {t} is not a grid point")))?;
        if curve >= k || j <= cfg.lo || j >= cfg.hi {
            return Err(Error::Parameter(format!("marginal ({curve}, {t}) is outside the resampled region")));
        }
        cols.push((curve, j));
    }
    let sampler = AvoidSampler::new(spec)?;
    let pick = |rows: &[Vec<f64>]| cols.iter().map(|&(i, j)| rows[i][j]).collect::<Vec<f64>>();
    let original = try_par_draws(seed, "gibbs-original", cfg.num_samples, |rng| {
        sampler.sample_rows(rng, cfg.max_attempts).map(|(rows, _)| pick(&rows))
    })?;
    let resampled = try_par_draws(seed, "gibbs-resampled", cfg.num_samples, |rng| {
        let (mut rows, _) = sampler.sample_rows(rng, cfg.max_attempts)?;
        resample_block(&mut rows, spec, cfg, rng)?;
        Ok::<_, Error>(pick(&rows))
    })?;
    let mut reports = Vec::with_capacity(cols.len());
    let mut min_p = 1.0f64;
    for (c, &(curve, t)) in cfg.marginals.iter().enumerate() {
        let a: Vec<f64> = original.iter().map(|r| r[c]).collect();
        let b: Vec<f64> = resampled.iter().map(|r| r[c]).collect();
        let ks = ks_two_sample(&a, &b)?;
        min_p = min_p.min(ks.p_value);
        reports.push(
            TestReport::new(format!("gibbs.block{}-{}.curve{}.t{}", cfg.block.start + 1, cfg.block.end, curve + 1, t), ks.d, Verdict::from_bool(ks.p_value >= SUITE_ALPHA))
                .p(ks.p_value)
                .threshold(format!("p>={SUITE_ALPHA:e}"))
                .samples(format!("{}+{}", cfg.num_samples, cfg.num_samples))
                .seed(seed),
        );
    }
    let bonferroni_p = (min_p * cols.len() as f64).min(1.0);
    Ok(GibbsOutcome { reports, min_p, bonferroni_p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Interval;

    fn two_curve() -> AvoidSpec {
        let iv = Interval::new(0.0, 1.0).unwrap();
        let v = WeylVector::new(vec![0.25, -0.25]).unwrap();
        AvoidSpec::free(iv, v.clone(), v, 128).unwrap()
    }

    fn cfg(block: Range<usize>, resampler: Resampler, n: usize) -> GibbsConfig {
        GibbsConfig {
            block: block.clone(),
            lo: 32,
            hi: 96,
            marginals: vec![(block.start, 0.375), (block.start, 0.5)],
            num_samples: n,
            max_attempts: 100_000,
            resampler,
        }
    }

    #[test]
    fn exact_resampling_keeps_marginals() {
        let out = gibbs_resample_test(&two_curve(), &cfg(0..1, Resampler::Exact, 3000), &RngSeed::new(5)).unwrap();
        assert!(out.reports.iter().all(|r| r.verdict == Verdict::Pass), "{:?}", out.reports);
        let out = gibbs_resample_test(&two_curve(), &cfg(0..2, Resampler::Exact, 3000), &RngSeed::new(6)).unwrap();
        assert!(out.min_p >= SUITE_ALPHA);
    }

    #[test]
    fn ignoring_the_lower_curve_is_detected() {
        let out = gibbs_resample_test(&two_curve(), &cfg(0..1, Resampler::IgnoreLower, 5000), &RngSeed::new(7)).unwrap();
        assert!(out.min_p < 1e-6, "min p {}", out.min_p);
    }

    #[test]
    fn rejects_bad_configs() {
        let spec = two_curve();
        let mut c = cfg(0..1, Resampler::Exact, 10);
        c.block = 1..3;
        assert!(gibbs_resample_test(&spec, &c, &RngSeed::new(1)).is_err());
        let mut c = cfg(0..1, Resampler::Exact, 10);
        c.marginals = vec![(0, 0.1)];
        assert!(gibbs_resample_test(&spec, &c, &RngSeed::new(1)).is_err());
        let mut c = cfg(0..1, Resampler::Exact, 10);
        c.lo = 0;
        assert!(gibbs_resample_test(&spec, &c, &RngSeed::new(1)).is_err());
    }

    #[test]
    fn deterministic() {
        let c = cfg(1..2, Resampler::Exact, 500);
        let a = gibbs_resample_test(&two_curve(), &c, &RngSeed::new(9)).unwrap();
        let b = gibbs_resample_test(&two_curve(), &c, &RngSeed::new(9)).unwrap();
        assert_eq!(a, b);
    }
}
