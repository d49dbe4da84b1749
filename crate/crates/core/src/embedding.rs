//! Vector math over face embeddings: cosine similarity, per-item
//! homogenization scores and Gaussian kernel density curves.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::EmbeddingRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmbeddingError {
    #[error("embedding has no components")]
    Empty,
    #[error("embedding has a non-finite component at index {0}")]
    NonFinite(usize),
    #[error("embedding has zero norm")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("group too small: {0} items, need at least 2")]
    GroupTooSmall(usize),
    #[error("no scores to average")]
    NoScores,
    #[error("bandwidth required: samples have zero variance or fewer than two values")]
    BandwidthRequired,
    #[error("invalid bandwidth {0}")]
    InvalidBandwidth(f64),
    #[error("kde grid must be non-empty and ascending")]
    BadGrid,
    #[error("kde needs at least one sample")]
    NoSamples,
}

/// A finite, nonzero real vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EmbeddingVector(Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EmbeddingError> {
        if values.is_empty() {
            return Err(EmbeddingError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EmbeddingError::NonFinite(i));
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(EmbeddingError::ZeroNorm);
        }
        Ok(EmbeddingVector(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }
}

impl<'de> Deserialize<'de> for EmbeddingVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        EmbeddingVector::new(v).map_err(serde::de::Error::custom)
    }
}

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Neumaier-compensated running sum.
#[derive(Default, Clone, Copy)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, EmbeddingError> {
    if a.dim() != b.dim() {
        return Err(EmbeddingError::DimensionMismatch(a.dim(), b.dim()));
    }
    Ok(cosine_with_norms(a.as_slice(), b.as_slice(), a.norm(), b.norm()))
}

#[inline]
fn cosine_with_norms(a: &[f64], b: &[f64], na: f64, nb: f64) -> f64 {
    // na * nb can miss |a|^2 by an ulp.
    if a == b {
        return 1.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationScore {
    pub item_id: String,
    pub score: f64,
}

/// Mean cosine similarity of each item to every other item of the group,
/// in input order.
pub fn homogenization_scores(
    group: &[EmbeddingRecord],
) -> Result<Vec<HomogenizationScore>, EmbeddingError> {
    let vectors: Vec<&EmbeddingVector> = group.iter().map(|r| &r.embedding).collect();
    let scores = homogenization_of_vectors(&vectors)?;
    Ok(group
        .iter()
        .zip(scores)
        .map(|(r, score)| HomogenizationScore {
            item_id: r.id.clone(),
            score,
        })
        .collect())
}

/// Full pairwise pass over `vectors`. Each row is summed in ascending index
/// order with compensation, so the output does not depend on thread count.
pub fn homogenization_of_vectors(vectors: &[&EmbeddingVector]) -> Result<Vec<f64>, EmbeddingError> {
    let n = vectors.len();
    if n < 2 {
        return Err(EmbeddingError::GroupTooSmall(n));
    }
    let dim = vectors[0].dim();
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(EmbeddingError::DimensionMismatch(dim, v.dim()));
    }
    let norms: Vec<f64> = vectors.iter().map(|v| v.norm()).collect();
    let denom = (n - 1) as f64;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = CompensatedSum::default();
            let a = vectors[i].as_slice();
            for j in (0..n).filter(|&j| j != i) {
                acc.add(cosine_with_norms(a, vectors[j].as_slice(), norms[i], norms[j]));
            }
            acc.value() / denom
        })
        .collect())
}

/// Groups larger than this are subsampled by [`homogenization_scores_capped`].
pub const FULL_PASS_LIMIT: usize = 10_000;

/// Like [`homogenization_scores`], but groups above `max_items` are first
/// reduced to a seeded random subset of that size (kept in input order).
pub fn homogenization_scores_capped(
    group: &[EmbeddingRecord],
    max_items: usize,
    seed: u64,
) -> Result<Vec<HomogenizationScore>, EmbeddingError> {
    if group.len() <= max_items {
        return homogenization_scores(group);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, group.len(), max_items).into_vec();
    picked.sort_unstable();
    let subset: Vec<EmbeddingRecord> = picked.into_iter().map(|i| group[i].clone()).collect();
    homogenization_scores(&subset)
}

pub fn group_mean_score(scores: &[HomogenizationScore]) -> Result<f64, EmbeddingError> {
    if scores.is_empty() {
        return Err(EmbeddingError::NoScores);
    }
    let mut acc = CompensatedSum::default();
    for s in scores {
        acc.add(s.score);
    }
    Ok(acc.value() / scores.len() as f64)
}

/// Summary row of the homogenization JSON output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub group: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); zero for a single score.
    pub std: f64,
}

impl GroupSummary {
    pub fn from_scores(group: &str, scores: &[HomogenizationScore]) -> Result<Self, EmbeddingError> {
        let mean = group_mean_score(scores)?;
        let n = scores.len();
        let std = if n > 1 {
            let ss: f64 = scores.iter().map(|s| (s.score - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Ok(GroupSummary {
            group: group.to_string(),
            n,
            mean,
            std,
        })
    }
}

/// Writes `item_id,group,score` rows.
pub fn write_scores_csv<W: std::io::Write>(
    out: W,
    groups: &[(String, Vec<HomogenizationScore>)],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item_id", "group", "score"])?;
    for (group, scores) in groups {
        for s in scores {
            w.write_record([s.item_id.as_str(), group.as_str(), &s.score.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: f64,
}

impl DensityCurve {
    /// Trapezoidal integral of the density over the grid.
    pub fn integral(&self) -> f64 {
        self.grid
            .windows(2)
            .zip(self.density.windows(2))
            .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
            .sum()
    }
}

/// Scott's rule: sample standard deviation times n^(-1/5).
pub fn scott_bandwidth(samples: &[f64]) -> Option<f64> {
    let n = samples.len();
    if n < 2 {
        return None;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let h = var.sqrt() * (n as f64).powf(-0.2);
    (h > 0.0 && h.is_finite()).then_some(h)
}

/// Gaussian kernel density estimate of `samples` evaluated on `grid`.
pub fn kde(samples: &[f64], grid: &[f64], bandwidth: Option<f64>) -> Result<DensityCurve, EmbeddingError> {
    if samples.is_empty() {
        return Err(EmbeddingError::NoSamples);
    }
    if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(EmbeddingError::BadGrid);
    }
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(EmbeddingError::InvalidBandwidth(h)),
        None => scott_bandwidth(samples).ok_or(EmbeddingError::BandwidthRequired)?,
    };
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let density = grid
        .iter()
        .map(|&x| {
            let mut acc = CompensatedSum::default();
            for &s in samples {
                let u = (x - s) / h;
                acc.add((-0.5 * u * u).exp());
            }
            acc.value() * norm
        })
        .collect();
    Ok(DensityCurve {
        grid: grid.to_vec(),
        density,
        bandwidth: h,
    })
}

/// `points` evenly spaced values covering the samples plus `pad_bandwidths`
/// bandwidths on each side.
pub fn padded_grid(samples: &[f64], bandwidth: f64, pad_bandwidths: f64, points: usize) -> Vec<f64> {
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min) - pad_bandwidths * bandwidth;
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + pad_bandwidths * bandwidth;
    let step = (hi - lo) / (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| lo + step * i as f64).collect()
}
