//! Command implementations behind the `abridge` binary. Every command takes
//! a fully populated [`Config`] and writes its outputs under `out`; the
//! written files depend only on the configuration.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::avoid::{AvoidSampler, AvoidSpec};
use crate::bridge::{default_steps, sample_bridge, BridgeSpec};
use crate::config::Config;
use crate::domain::{write_ensemble, Barrier, Curve, Interval, LatticeParams, LineEnsemble, WeylVector};
use crate::error::{Error, Result};
use crate::glauber::{burn_in, maximal_state, minimal_state, run_chain, simulate_chain};
use crate::rng::{try_par_draws, RngSeed};
use crate::verify::stats::{render_csv, render_text};
use crate::verify::suites::{is_suite, run_suite, SuiteResult};
use crate::walk::{enumerate_avoiding_heights, sample_avoiding_heights, WalkBridgeSampler, WalkEnsembleSpec};

const SAMPLE_MAX_ATTEMPTS: u64 = 10_000_000;

/// Output directory from `out` (default `out`).
pub fn out_dir(cfg: &Config) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.raw("out").unwrap_or("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn manifest(cfg: &Config, results: &[(&str, String)]) -> String {
    let mut m = cfg.clone();
    for (k, v) in results {
        m.set(&format!("result.{k}"), v.clone());
    }
    m.to_string()
}

fn interval(cfg: &Config) -> Result<Interval> {
    Interval::new(cfg.get("a", 0.0)?, cfg.get("b", 1.0)?)
}

/// Entrance/exit data from `x`, `y`, or equally spaced `(k-1)/2, ..., -(k-1)/2`
/// when only `k` is given.
fn endpoints(cfg: &Config) -> Result<(Vec<f64>, Vec<f64>)> {
    let k: usize = cfg.get("k", 1)?;
    let spaced: Vec<f64> = (0..k).map(|i| (k as f64 - 1.0) / 2.0 - i as f64).collect();
    let x = cfg.list("x", &spaced)?;
    let y = cfg.list("y", &x)?;
    if x.len() != y.len() {
        return Err(Error::Parameter("x and y must have the same length".into()));
    }
    Ok((x, y))
}

fn lower_barrier(cfg: &Config, iv: Interval, steps: usize) -> Result<Barrier> {
    match cfg.raw("g") {
        None | Some("-inf") => Ok(Barrier::MinusInfinity),
        Some(_) => Ok(Barrier::Curve(Curve::constant(iv, steps, cfg.get("g", 0.0)?)?)),
    }
}

fn snap(lattice: &LatticeParams, v: &[f64]) -> Vec<i64> {
    v.iter().map(|&x| (x / lattice.dx()).round() as i64).collect()
}

/// `sample`: writes `samples.txt` (columnar ensembles) and `manifest.txt`.
pub fn cmd_sample(cfg: &Config) -> Result<Vec<PathBuf>> {
    let kind: String = cfg.require("kind")?;
    let iv = interval(cfg)?;
    let grid: usize = cfg.get("grid", default_steps(iv))?;
    let n: usize = cfg.get("n_samples", 1)?;
    let seed = RngSeed::new(cfg.get("seed", 1u64)?).child("sample", 0);
    let (x, y) = endpoints(cfg)?;
    let mut results: Vec<(&str, String)> = Vec::new();
    let ensembles: Vec<LineEnsemble> = match kind.as_str() {
        "bridge" => {
            if x.len() != 1 {
                return Err(Error::Parameter("bridge sampling takes a single x and y".into()));
            }
            let spec = BridgeSpec::new(iv, x[0], y[0], grid)?;
            try_par_draws(&seed, "bridge", n, |rng| LineEnsemble::new(vec![sample_bridge(&spec, rng)]))?
        }
        "avoid" => {
            let spec = AvoidSpec::new(iv, WeylVector::new(x)?, WeylVector::new(y)?, Barrier::PlusInfinity, lower_barrier(cfg, iv, grid)?, grid)?;
            let sampler = AvoidSampler::new(&spec)?;
            let draws = try_par_draws(&seed, "avoid", n, |rng| sampler.sample(rng, SAMPLE_MAX_ATTEMPTS))?;
            let attempts: u64 = draws.iter().map(|d| d.1).sum();
            results.push(("attempts", attempts.to_string()));
            results.push(("acceptance_rate", format!("{:.6}", n as f64 / attempts.max(1) as f64)));
            draws.into_iter().map(|d| d.0).collect()
        }
        "walk" => {
            let lattice = LatticeParams::with_steps(iv, grid)?;
            let (xh, yh) = (snap(&lattice, &x), snap(&lattice, &y));
            let spec = WalkEnsembleSpec::from_heights(lattice, &xh, &yh, Barrier::PlusInfinity, lower_barrier(cfg, iv, grid)?)?;
            let sampler = WalkBridgeSampler::new(grid);
            let draws = try_par_draws(&seed, "walk", n, |rng| sample_avoiding_heights(&spec, &sampler, rng, SAMPLE_MAX_ATTEMPTS))?;
            let attempts: u64 = draws.iter().map(|d| d.1).sum();
            results.push(("attempts", attempts.to_string()));
            results.push(("acceptance_rate", format!("{:.6}", n as f64 / attempts.max(1) as f64)));
            results.push(("x_heights", format!("{xh:?}")));
            results.push(("y_heights", format!("{yh:?}")));
            draws.iter().map(|d| spec.ensemble_from_heights(&d.0)).collect::<Result<_>>()?
        }
        "glauber" => {
            let lattice = LatticeParams::with_steps(iv, grid)?;
            let (xh, yh) = (snap(&lattice, &x), snap(&lattice, &y));
            let g = lower_barrier(cfg, iv, grid)?;
            let spec = WalkEnsembleSpec::from_heights(lattice, &xh, &yh, Barrier::PlusInfinity, g.clone())?;
            let hi = maximal_state(&lattice, spec.x(), spec.y(), &g)?;
            let lo = minimal_state(&lattice, spec.x(), spec.y(), &g)?;
            let burn = burn_in(&hi, &lo, &seed.child("burn-in", 0), 32, 1 << 40)?;
            let thin: u64 = cfg.get("thin", (burn / 4).max(1))?;
            let mut rng = seed.child("chain", 0).rng();
            let mut state = simulate_chain(&hi, burn, &mut rng);
            results.push(("burn_in_events", burn.to_string()));
            results.push(("thin_events", thin.to_string()));
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                run_chain(&mut state, thin, &mut rng);
                out.push(state.to_ensemble()?);
            }
            out
        }
        other => return Err(Error::Parameter(format!("unknown sample kind {other:?}"))),
    };
    let dir = out_dir(cfg)?;
    let mut buf = Vec::new();
    for e in &ensembles {
        write_ensemble(&mut buf, e)?;
    }
    let samples = dir.join("samples.txt");
    fs::write(&samples, buf)?;
    results.push(("ensembles", ensembles.len().to_string()));
    let man = dir.join("manifest.txt");
    write_file(&man, &manifest(cfg, &results))?;
    Ok(vec![samples, man])
}

/// `verify`: runs the named suite and writes `<suite>.txt`, `<suite>.csv`
/// and `<suite>.manifest`.
pub fn cmd_verify(cfg: &Config) -> Result<(SuiteResult, Vec<PathBuf>)> {
    let suite: String = cfg.require("suite")?;
    if !is_suite(&suite) {
        return Err(Error::Parameter(format!("unknown suite {suite:?}")));
    }
    let result = run_suite(&suite, cfg)?;
    let dir = out_dir(cfg)?;
    let text = dir.join(format!("{suite}.txt"));
    let csv = dir.join(format!("{suite}.csv"));
    let man = dir.join(format!("{suite}.manifest"));
    write_file(&text, &render_text(&result.reports))?;
    write_file(&csv, &render_csv(&result.reports))?;
    let failed = result.failures().count();
    let verdict = if result.passed() { "PASS" } else { "FAIL" };
    write_file(
        &man,
        &manifest(cfg, &[("verdict", verdict.into()), ("tests", result.reports.len().to_string()), ("failed", failed.to_string())]),
    )?;
    Ok((result, vec![text, csv, man]))
}

/// `enumerate`: every avoiding lattice configuration for the given integer
/// endpoint heights, written as columnar ensembles.
pub fn cmd_enumerate(cfg: &Config) -> Result<Vec<PathBuf>> {
    let iv = interval(cfg)?;
    let steps: usize = cfg.require("steps")?;
    let lattice = LatticeParams::with_steps(iv, steps)?;
    let xh: Vec<i64> = cfg.list("x_heights", &[0])?;
    let yh: Vec<i64> = cfg.list("y_heights", &xh)?;
    let g = match cfg.raw("g_height") {
        None => Barrier::MinusInfinity,
        Some(_) => {
            let h: i64 = cfg.get("g_height", 0)?;
            Barrier::Curve(Curve::constant(iv, steps, lattice.value_of(h))?)
        }
    };
    let spec = WalkEnsembleSpec::from_heights(lattice, &xh, &yh, Barrier::PlusInfinity, g)?;
    let configs = enumerate_avoiding_heights(&spec)?;
    let dir = out_dir(cfg)?;
    let mut buf = Vec::new();
    for h in &configs {
        write_ensemble(&mut buf, &spec.ensemble_from_heights(h)?)?;
    }
    let path = dir.join("enumeration.txt");
    fs::write(&path, buf)?;
    let man = dir.join("manifest.txt");
    write_file(&man, &manifest(cfg, &[("configurations", configs.len().to_string())]))?;
    Ok(vec![path, man])
}

/// `bench`: throughput figures (not deterministic; printed, never written).
pub fn cmd_bench(cfg: &Config) -> Result<String> {
    let n: usize = cfg.get("samples", 20_000)?;
    let events: u64 = cfg.get("events", 10_000_000)?;
    let seed = RngSeed::new(cfg.get("seed", 1u64)?);
    let unit = Interval::new(0.0, 1.0)?;
    let mut out = String::new();
    let rate = |count: f64, t: Instant| count / t.elapsed().as_secs_f64().max(1e-9);

    let spec = BridgeSpec::new(unit, 0.0, 0.0, 512)?;
    let t = Instant::now();
    let _ = try_par_draws(&seed, "bench-bridge", n, |rng| Ok::<_, Error>(sample_bridge(&spec, rng)))?;
    out.push_str(&format!("bridge (M=512)        {:>14.0} samples/s\n", rate(n as f64, t)));

    let v = WeylVector::new(vec![1.0, 0.0, -1.0])?;
    let aspec = AvoidSpec::free(unit, v.clone(), v, 512)?;
    let sampler = AvoidSampler::new(&aspec)?;
    let t = Instant::now();
    let _ = try_par_draws(&seed, "bench-avoid", n, |rng| sampler.sample_rows(rng, SAMPLE_MAX_ATTEMPTS))?;
    out.push_str(&format!("avoid k=3 (M=512)     {:>14.0} samples/s\n", rate(n as f64, t)));

    let walk = WalkBridgeSampler::new(1024);
    let t = Instant::now();
    let _ = try_par_draws(&seed, "bench-walk", n, |rng| walk.sample(1024, 0, rng))?;
    out.push_str(&format!("walk bridge (N=1024)  {:>14.0} steps/s\n", rate(n as f64 * 1024.0, t)));

    let lattice = LatticeParams::from_scale(unit, 8)?;
    let x = WeylVector::new(vec![lattice.value_of(2), lattice.value_of(0)])?;
    let state = maximal_state(&lattice, &x, &x, &Barrier::MinusInfinity)?;
    let t = Instant::now();
    let _ = simulate_chain(&state, events, &mut seed.child("bench-glauber", 0).rng());
    out.push_str(&format!("glauber k=2 (N=64)    {:>14.0} events/s\n", rate(events as f64, t)));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base(dir: &Path, pairs: &[(&str, &str)]) -> Config {
        let mut c = Config::new();
        c.set("out", dir.to_string_lossy().to_string());
        for (k, v) in pairs {
            c.set(k, *v);
        }
        c
    }

    #[test]
    fn sample_kinds_write_files() {
        let dir = tempfile::tempdir().unwrap();
        for kind in ["bridge", "avoid", "walk", "glauber"] {
            let k = if kind == "bridge" { "1" } else { "2" };
            let c = base(dir.path(), &[("kind", kind), ("k", k), ("grid", "16"), ("n_samples", "3"), ("seed", "7")]);
            let files = cmd_sample(&c).unwrap();
            let text = fs::read_to_string(&files[0]).unwrap();
            let ens = crate::domain::read_ensembles(text.as_bytes()).unwrap();
            assert_eq!(ens.len(), 3, "{kind}");
            assert!(fs::read_to_string(&files[1]).unwrap().contains("result.ensembles = 3"));
        }
    }

    #[test]
    fn unknown_kind_and_suite_fail() {
        let dir = tempfile::tempdir().unwrap();
        assert!(cmd_sample(&base(dir.path(), &[("kind", "nope")])).is_err());
        assert!(cmd_verify(&base(dir.path(), &[("suite", "nope")])).is_err());
    }

    #[test]
    fn enumerate_counts_three_state_instance() {
        let dir = tempfile::tempdir().unwrap();
        let c = base(dir.path(), &[("steps", "2"), ("x_heights", "0")]);
        cmd_enumerate(&c).unwrap();
        let man = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(man.contains("result.configurations = 3"));
    }
}
