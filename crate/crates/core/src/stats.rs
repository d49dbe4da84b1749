//! Two-sample testing gated on normality, box-plot summaries and sample-size
//! planning for survey responses.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::beta::beta_reg;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("sample {label:?} is empty")]
    Empty { label: String },
    #[error("sample {label:?} contains a non-finite value")]
    NonFinite { label: String },
    #[error("{test} needs at least {min} observations, sample {label:?} has {n}")]
    TooFew {
        test: &'static str,
        label: String,
        n: usize,
        min: usize,
    },
    #[error("{test} supports at most {max} observations, sample {label:?} has {n}")]
    TooMany {
        test: &'static str,
        label: String,
        n: usize,
        max: usize,
    },
    #[error("degenerate sample: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("column {0:?} not found in header")]
    MissingColumn(String),
    #[error("line {line}: value {value:?} is not a number")]
    BadValue { line: u64, value: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub label: String,
    pub values: Vec<f64>,
}

impl Sample {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self, StatsError> {
        let label = label.into();
        if values.is_empty() {
            return Err(StatsError::Empty { label });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(StatsError::NonFinite { label });
        }
        Ok(Sample { label, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    fn require(&self, test: &'static str, min: usize) -> Result<(), StatsError> {
        if self.len() < min {
            return Err(StatsError::TooFew {
                test,
                label: self.label.clone(),
                n: self.len(),
                min,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    WelchT,
    MannWhitneyU,
    ShapiroWilk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stars {
    #[serde(rename = "ns")]
    Ns,
    #[serde(rename = "*")]
    One,
    #[serde(rename = "**")]
    Two,
    #[serde(rename = "***")]
    Three,
    #[serde(rename = "****")]
    Four,
}

impl Stars {
    pub fn from_p(p: f64) -> Self {
        if p < 1e-4 {
            Stars::Four
        } else if p < 1e-3 {
            Stars::Three
        } else if p < 1e-2 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else {
            Stars::Ns
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stars::Ns => "ns",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
            Stars::Four => "****",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test: TestKind,
    pub statistic: f64,
    pub p_value: f64,
    /// Welch-Satterthwaite degrees of freedom (t-test only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<f64>,
    pub n1: usize,
    pub n2: usize,
    pub significance_stars: Stars,
}

impl TestResult {
    fn new(test: TestKind, statistic: f64, p_value: f64, dof: Option<f64>, n1: usize, n2: usize) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestResult {
            test,
            statistic,
            p_value,
            dof,
            n1,
            n2,
            significance_stars: Stars::from_p(p_value),
        }
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Unbiased (n - 1) variance.
fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub const SHAPIRO_MAX_N: usize = 5000;

/// Shapiro-Wilk W and p-value using Royston's coefficient and p-value
/// approximations.
pub fn shapiro_wilk(s: &Sample) -> Result<TestResult, StatsError> {
    const TEST: &str = "shapiro-wilk";
    s.require(TEST, 3)?;
    let n = s.len();
    if n > SHAPIRO_MAX_N {
        return Err(StatsError::TooMany {
            test: TEST,
            label: s.label.clone(),
            n,
            max: SHAPIRO_MAX_N,
        });
    }
    let x = s.sorted();
    let range = x[n - 1] - x[0];
    if range < 1e-19 * x[0].abs().max(x[n - 1].abs()).max(1.0) {
        return Err(StatsError::Degenerate(format!("sample {:?} has zero range", s.label)));
    }

    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    const G: [f64; 2] = [-2.273, 0.459];

    let an = n as f64;
    let half = n / 2;
    // a[k] for k = 0..half pairs x[n-1-k] with -x[k].
    let mut a = vec![0.0; half];
    if n == 3 {
        a[0] = 0.5f64.sqrt();
    } else {
        let norm = std_normal();
        let m: Vec<f64> = (1..=half).map(|i| norm.inverse_cdf((i as f64 - 0.375) / (an + 0.25))).collect();
        let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
        let ssumm2 = summ2.sqrt();
        let rsn = 1.0 / an.sqrt();
        let a1 = poly(&C1, rsn) - m[0] / ssumm2;
        let (first, fac) = if n > 5 {
            let a2 = -m[1] / ssumm2 + poly(&C2, rsn);
            a[1] = a2;
            let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
            (2, fac)
        } else {
            (1, ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt())
        };
        a[0] = a1;
        for k in first..half {
            a[k] = -m[k] / fac;
        }
    }

    // Scale by the range so the sums stay well conditioned.
    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let xm = mean(&xs);
    let ssx: f64 = xs.iter().map(|v| (v - xm) * (v - xm)).sum();
    let num: f64 = (0..half).map(|k| a[k] * (xs[n - 1 - k] - xs[k])).sum();
    let w = (num * num / ssx).min(1.0);

    let p = if n == 3 {
        const PI6: f64 = 1.909_859_317_102_74;
        const STQR: f64 = std::f64::consts::FRAC_PI_3;
        (PI6 * (w.sqrt().asin() - STQR)).max(0.0)
    } else {
        let w1 = 1.0 - w;
        let mut y = w1.ln();
        let (m, sd) = if n <= 11 {
            let gamma = poly(&G, an);
            if y >= gamma {
                return Ok(TestResult::new(TestKind::ShapiroWilk, w, 1e-99, None, n, 0));
            }
            y = -(gamma - y).ln();
            (poly(&C3, an), poly(&C4, an).exp())
        } else {
            let ln_n = an.ln();
            (poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        1.0 - std_normal().cdf((y - m) / sd)
    };
    Ok(TestResult::new(TestKind::ShapiroWilk, w, p, None, n, 0))
}

/// Welch's unequal-variance t-test, two-sided.
pub fn welch_t(a: &Sample, b: &Sample) -> Result<TestResult, StatsError> {
    a.require("welch t-test", 2)?;
    b.require("welch t-test", 2)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (variance(&a.values) / na, variance(&b.values) / nb);
    let se2 = va + vb;
    if se2 <= 0.0 {
        return Err(StatsError::Degenerate(format!(
            "samples {:?} and {:?} both have zero variance",
            a.label, b.label
        )));
    }
    let t = (mean(&a.values) - mean(&b.values)) / se2.sqrt();
    let dof = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let p = beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
    Ok(TestResult::new(TestKind::WelchT, t, p, Some(dof), a.len(), b.len()))
}

/// Largest group size for which the exact null distribution is used.
pub const MWU_EXACT_MAX: usize = 8;

/// Midranks (1-based) of the pooled values plus the tie-group sizes.
fn midranks(pooled: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = pooled.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| pooled[i].total_cmp(&pooled[j]));
    let mut ranks = vec![0.0; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[order[j]] == pooled[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = r;
        }
        if j - i > 1 {
            ties.push(j - i);
        }
        i = j;
    }
    (ranks, ties)
}

/// Number of arrangements of `n1` first-sample items among `n1 + n2` giving
/// each value of U, for U = 0..=n1*n2.
fn u_frequencies(n1: usize, n2: usize) -> Vec<u64> {
    // f[i][j][u] built incrementally: the largest item belongs to sample 1
    // (adds j to U) or to sample 2 (adds nothing).
    let max_u = n1 * n2;
    let mut f = vec![vec![vec![0u64; max_u + 1]; n2 + 1]; n1 + 1];
    for row in f.iter_mut() {
        row[0][0] = 1;
    }
    for j in 0..=n2 {
        f[0][j][0] = 1;
    }
    for i in 1..=n1 {
        for j in 1..=n2 {
            for u in 0..=i * j {
                let with_1 = if u >= j { f[i - 1][j][u - j] } else { 0 };
                f[i][j][u] = with_1 + f[i][j - 1][u];
            }
        }
    }
    f[n1][n2].clone()
}

/// Mann-Whitney U, reported as min(U1, U2). Exact two-sided p when both
/// groups have at most eight values and there are no ties, otherwise the
/// normal approximation with tie and continuity correction.
pub fn mann_whitney_u(a: &Sample, b: &Sample) -> Result<TestResult, StatsError> {
    a.require("mann-whitney u", 1)?;
    b.require("mann-whitney u", 1)?;
    let (n1, n2) = (a.len(), b.len());
    let pooled: Vec<f64> = a.values.iter().chain(&b.values).copied().collect();
    let (ranks, ties) = midranks(&pooled);
    let r1: f64 = ranks[..n1].iter().sum();
    let u1 = r1 - (n1 * (n1 + 1)) as f64 / 2.0;
    let u2 = (n1 * n2) as f64 - u1;
    let u = u1.min(u2);

    let p = if n1 <= MWU_EXACT_MAX && n2 <= MWU_EXACT_MAX && ties.is_empty() {
        let freq = u_frequencies(n1, n2);
        let total: u64 = freq.iter().sum();
        let below: u64 = freq[..=u as usize].iter().sum();
        (2.0 * below as f64 / total as f64).min(1.0)
    } else {
        let (f1, f2) = (n1 as f64, n2 as f64);
        let n = f1 + f2;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (n * (n - 1.0));
        let sd = (f1 * f2 / 12.0 * ((n + 1.0) - tie_term)).sqrt();
        if sd == 0.0 || !sd.is_finite() {
            1.0
        } else {
            let z = (u1.max(u2) - f1 * f2 / 2.0 - 0.5) / sd;
            (2.0 * (1.0 - std_normal().cdf(z))).min(1.0)
        }
    };
    Ok(TestResult::new(TestKind::MannWhitneyU, u, p, None, n1, n2))
}

pub const DEFAULT_NORMALITY_ALPHA: f64 = 0.05;

/// Welch t-test when both samples pass Shapiro-Wilk at `alpha_normality`,
/// Mann-Whitney U otherwise.
pub fn select_and_test(a: &Sample, b: &Sample, alpha_normality: f64) -> Result<TestResult, StatsError> {
    select_and_test_with(a, b, alpha_normality, |s| shapiro_wilk(s).map(|r| r.p_value))
}

/// Same routing with a caller-supplied normality p-value function.
pub fn select_and_test_with<F>(a: &Sample, b: &Sample, alpha_normality: f64, normality_p: F) -> Result<TestResult, StatsError>
where
    F: Fn(&Sample) -> Result<f64, StatsError>,
{
    if !(alpha_normality > 0.0 && alpha_normality < 1.0) {
        return Err(StatsError::InvalidParameter(format!(
            "alpha_normality must be in (0, 1), got {alpha_normality}"
        )));
    }
    let pa = normality_p(a)?;
    let pb = normality_p(b)?;
    if pa >= alpha_normality && pb >= alpha_normality {
        welch_t(a, b)
    } else {
        mann_whitney_u(a, b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Quantile by linear interpolation between order statistics
/// (`h = (n - 1) p`), on sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Quartiles by linear interpolation; whiskers at the most extreme values
/// within 1.5 IQR of the box, everything beyond is an outlier (ascending).
pub fn box_stats(s: &Sample) -> BoxStats {
    let x = s.sorted();
    let q1 = quantile_sorted(&x, 0.25);
    let median = quantile_sorted(&x, 0.5);
    let q3 = quantile_sorted(&x, 0.75);
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || x.iter().copied().filter(|v| *v >= lo && *v <= hi);
    BoxStats {
        q1,
        median,
        q3,
        whisker_low: inside().next().unwrap_or(q1),
        whisker_high: inside().next_back().unwrap_or(q3),
        outliers: x.iter().copied().filter(|v| *v < lo || *v > hi).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    TwoSample,
    Paired,
}

impl std::str::FromStr for Design {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "two_sample" | "two-sample" => Ok(Design::TwoSample),
            "paired" => Ok(Design::Paired),
            _ => Err(format!("unknown design {s:?} (expected two_sample or paired)")),
        }
    }
}

/// Normal-approximation sample size for a two-sided t-test: per group for
/// two-sample designs, total pairs for paired designs.
pub fn sample_size_t(effect_d: f64, power: f64, alpha: f64, design: Design) -> Result<u64, StatsError> {
    if !(effect_d > 0.0 && effect_d.is_finite()) {
        return Err(StatsError::InvalidParameter(format!("effect size must be positive, got {effect_d}")));
    }
    if !(power > 0.0 && power < 1.0) {
        return Err(StatsError::InvalidParameter(format!("power must be in (0, 1), got {power}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let norm = std_normal();
    let z = norm.inverse_cdf(1.0 - alpha / 2.0) + norm.inverse_cdf(power);
    let factor = match design {
        Design::TwoSample => 2.0,
        Design::Paired => 1.0,
    };
    let n = factor * z * z / (effect_d * effect_d);
    // Guard against 63.000000000001-style round-up from float noise.
    Ok(((n - 1e-9).ceil() as u64).max(2))
}

/// Reads long-format survey responses: one row per response, grouped by
/// `group_col`, values parsed from `value_col`. Groups keep first-seen
/// value order.
pub fn read_samples_csv<R: Read>(reader: R, group_col: &str, value_col: &str) -> Result<BTreeMap<String, Sample>, StatsError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| StatsError::Csv(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| StatsError::MissingColumn(name.to_string()))
    };
    let gi = find(group_col)?;
    let vi = find(value_col)?;
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in rdr.records() {
        let row = row.map_err(|e| StatsError::Csv(e.to_string()))?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let g = row.get(gi).unwrap_or("").trim().to_string();
        let raw = row.get(vi).unwrap_or("").trim();
        let v: f64 = raw.parse().map_err(|_| StatsError::BadValue {
            line,
            value: raw.to_string(),
        })?;
        groups.entry(g).or_default().push(v);
    }
    groups.into_iter().map(|(g, v)| Ok((g.clone(), Sample::new(g, v)?))).collect()
}
