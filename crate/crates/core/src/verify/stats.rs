//! Hypothesis tests and report records.

use std::fmt;

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Per-test failure threshold used by every suite.
pub const SUITE_ALPHA: f64 = 1e-5;

/// Result of a Kolmogorov-Smirnov comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    /// Two-sided statistic `sup |F1 - F2|`.
    pub d: f64,
    /// `sup (F1 - F2)`: large when sample 1 sits to the left of sample 2.
    pub d_plus: f64,
    /// `sup (F2 - F1)`.
    pub d_minus: f64,
    pub p_value: f64,
    pub n1: usize,
    pub n2: usize,
}

impl KsResult {
    fn effective_n(&self) -> f64 {
        let (a, b) = (self.n1 as f64, self.n2 as f64);
        a * b / (a + b)
    }

    /// Asymptotic p-value for the alternative "sample 1 is stochastically
    /// smaller than sample 2" (`F1 > F2` somewhere).
    pub fn p_less(&self) -> f64 {
        one_sided_p(self.d_plus, self.effective_n())
    }

    /// Asymptotic p-value for "sample 1 is stochastically larger".
    pub fn p_greater(&self) -> f64 {
        one_sided_p(self.d_minus, self.effective_n())
    }
}

fn one_sided_p(d: f64, ne: f64) -> f64 {
    (-2.0 * ne * d * d).exp().min(1.0)
}

/// Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let mut s = 0.0;
        for j in 1..=20 {
            let m = (2 * j - 1) as f64;
            s += (-m * m * pi2 / (8.0 * lambda * lambda)).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            s += if j % 2 == 1 { term } else { -term };
            if term < 1e-300 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

fn sorted(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Parameter("NaN in sample".into()));
    }
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    Ok(s)
}

/// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value
/// `Q((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D)`, `ne = n1 n2 / (n1 + n2)`.
pub fn ks_two_sample(s1: &[f64], s2: &[f64]) -> Result<KsResult> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::Parameter("KS test needs two nonempty samples".into()));
    }
    let (a, b) = (sorted(s1)?, sorted(s2)?);
    let (n1, n2) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let (mut d_plus, mut d_minus) = (0.0f64, 0.0f64);
    while i < n1 && j < n2 {
        let v = a[i].min(b[j]);
        while i < n1 && a[i] == v {
            i += 1;
        }
        while j < n2 && b[j] == v {
            j += 1;
        }
        let diff = i as f64 / n1 as f64 - j as f64 / n2 as f64;
        d_plus = d_plus.max(diff);
        d_minus = d_minus.max(-diff);
    }
    let d = d_plus.max(d_minus);
    let mut res = KsResult { d, d_plus, d_minus, p_value: 1.0, n1, n2 };
    let ne = res.effective_n();
    let sq = ne.sqrt();
    res.p_value = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok(res)
}

/// One-sample KS distance between the empirical law of `sample` and a
/// continuous CDF, valid when the sample has ties (lattice-valued data).
pub fn ks_distance_to_cdf<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Parameter("KS distance needs a nonempty sample".into()));
    }
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < s.len() {
        let v = s[i];
        let below = i as f64 / n;
        while i < s.len() && s[i] == v {
            i += 1;
        }
        let upto = i as f64 / n;
        let f = cdf(v);
        d = d.max((f - below).abs()).max((upto - f).abs());
    }
    Ok(d)
}

/// Asymptotic p-value of a one-sample KS distance `d` over `n` points.
pub fn ks_one_sample_p(d: f64, n: usize) -> f64 {
    let sq = (n as f64).sqrt();
    kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)
}

/// Pearson chi-square goodness-of-fit result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Chi-square test of `observed` counts against cell probabilities `probs`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::Parameter("observed and expected cells differ".into()));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::Parameter("no observations".into()));
    }
    let mut stat = 0.0;
    for (&o, &p) in observed.iter().zip(probs) {
        let e = p * total as f64;
        if e <= 0.0 {
            if o > 0 {
                return Ok(ChiSquareResult { statistic: f64::INFINITY, df: observed.len() - 1, p_value: 0.0 });
            }
            continue;
        }
        stat += (o as f64 - e).powi(2) / e;
    }
    let df = observed.len() - 1;
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).map_err(|e| Error::Parameter(e.to_string()))?.sf(stat)
    };
    Ok(ChiSquareResult { statistic: stat, df, p_value })
}

/// Wilson score interval for `k` successes out of `n` at critical value `z`.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Total variation distance between empirical counts and a law.
pub fn total_variation(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    0.5 * counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| (c as f64 / n as f64 - p).abs())
        .sum::<f64>()
}

/// Sample mean and standard error.
pub fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound being checked exceeds 1 and holds automatically.
    Vacuous,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        })
    }
}

/// One test record.
#[derive(Debug, Clone, PartialEq)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub ci: Option<(f64, f64)>,
    /// Declared threshold the verdict was derived from.
    pub threshold: String,
    pub samples: String,
    pub verdict: Verdict,
    pub seed: String,
    pub detail: String,
}

impl TestReport {
    pub fn new(name: impl Into<String>, statistic: f64, verdict: Verdict) -> Self {
        TestReport {
            name: name.into(),
            statistic,
            p_value: None,
            ci: None,
            threshold: String::new(),
            samples: String::new(),
            verdict,
            seed: String::new(),
            detail: String::new(),
        }
    }

    pub fn p(mut self, p: f64) -> Self {
        self.p_value = Some(p);
        self
    }

    pub fn ci(mut self, lo: f64, hi: f64) -> Self {
        self.ci = Some((lo, hi));
        self
    }

    pub fn threshold(mut self, t: impl Into<String>) -> Self {
        self.threshold = t.into();
        self
    }

    pub fn samples(mut self, s: impl Into<String>) -> Self {
        self.samples = s.into();
        self
    }

    pub fn seed(mut self, s: impl fmt::Display) -> Self {
        self.seed = s.to_string();
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into())
}

fn fmt_ci(ci: Option<(f64, f64)>) -> String {
    ci.map(|(a, b)| format!("[{a:.6}, {b:.6}]")).unwrap_or_else(|| "-".into())
}

/// Plain-text rendering, one record per line.
pub fn render_text(reports: &[TestReport]) -> String {
    let mut out = String::new();
    for r in reports {
        out.push_str(&format!(
            "{} {} stat={:.6} p={} ci={} threshold={} n={} seed={}",
            r.verdict,
            r.name,
            r.statistic,
            fmt_opt(r.p_value),
            fmt_ci(r.ci),
            if r.threshold.is_empty() { "-" } else { &r.threshold },
            if r.samples.is_empty() { "-" } else { &r.samples },
            if r.seed.is_empty() { "-" } else { &r.seed },
        ));
        if !r.detail.is_empty() {
            out.push_str(" | ");
            out.push_str(&r.detail);
        }
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// CSV rendering with a header row.
pub fn render_csv(reports: &[TestReport]) -> String {
    let mut out = String::from("name,statistic,p_value,ci_lo,ci_hi,threshold,samples,verdict,seed,detail\n");
    for r in reports {
        let (lo, hi) = r.ci.map(|(a, b)| (format!("{a}"), format!("{b}"))).unwrap_or_default();
        let fields = [
            csv_field(&r.name),
            format!("{}", r.statistic),
            r.p_value.map(|p| format!("{p}")).unwrap_or_default(),
            lo,
            hi,
            csv_field(&r.threshold),
            csv_field(&r.samples),
            r.verdict.to_string(),
            csv_field(&r.seed),
            csv_field(&r.detail),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
