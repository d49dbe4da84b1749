//! Variant selection against a target demographic distribution, and the
//! language-model prompt regulator.

mod client;
mod regulator;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demographic::{Category, DemographicDistribution, DemographicError, DemographicLabel, LabelDistribution};

pub use client::{
    ChatCompletionClient, ClientError, LanguageModelClient, RuleBasedMock, ENV_LLM_API_KEY, ENV_LLM_ENDPOINT,
    ENV_LLM_MODEL,
};
pub use regulator::{
    build_query, parse_regulation, regulate_prompt, GenderAnswer, QueryWording, RegulatedPrompt, RegulationAnswers,
    RegulationError, YesNo,
};

/// One of the 12 race x gender model variants.
pub type VariantKey = DemographicLabel;

#[derive(Debug, Error)]
pub enum DebiasError {
    #[error(transparent)]
    Distribution(#[from] DemographicError),
    #[error("unknown cell {0:?} in target file")]
    UnknownCell(String),
    #[error("target file: {0}")]
    Parse(String),
    #[error("batch size must be at least 1")]
    EmptyBatch,
}

/// Desired distribution over the 12 (race, gender) cells.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetDistribution {
    pub cells: LabelDistribution,
}

/// Files may carry rounded probabilities; sums within this of 1 are
/// renormalized.
pub const TARGET_FILE_SUM_TOLERANCE: f64 = 1e-6;

impl TargetDistribution {
    pub fn new(cells: LabelDistribution) -> Self {
        TargetDistribution { cells }
    }

    pub fn uniform() -> Self {
        TargetDistribution {
            cells: DemographicDistribution::uniform(),
        }
    }

    /// Parses `{"Asian/Female": 0.1, ...}`; absent cells get zero.
    pub fn from_json(text: &str) -> Result<Self, DebiasError> {
        let raw: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| DebiasError::Parse(e.to_string()))?;
        let mut w = vec![0.0; DemographicLabel::ALL.len()];
        for (k, p) in raw {
            let cell = DemographicLabel::parse(&k).ok_or(DebiasError::UnknownCell(k))?;
            w[cell.index()] += p;
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > TARGET_FILE_SUM_TOLERANCE {
            return Err(DemographicError::BadSum(sum).into());
        }
        Ok(TargetDistribution {
            cells: DemographicDistribution::from_weights(&w)?,
        })
    }

    pub fn to_json(&self) -> String {
        let m: BTreeMap<&str, f64> = self.cells.iter().map(|(c, p)| (c.name(), p)).collect();
        serde_json::to_string_pretty(&m).expect("map serializes")
    }
}

/// Seeded random stream owned by the caller; every draw advances it.
#[derive(Debug, Clone)]
pub struct SamplerState(ChaCha8Rng);

impl SamplerState {
    pub fn from_seed(seed: u64) -> Self {
        SamplerState(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.0
    }
}

/// Inverse-CDF draw over the canonical category order. Zero-probability
/// categories are never returned.
pub fn sample_category<C: Category>(dist: &DemographicDistribution<C>, state: &mut SamplerState) -> C {
    let u: f64 = state.0.random();
    let mut acc = 0.0;
    let mut last = None;
    for (c, p) in dist.iter() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = Some(c);
        if u < acc {
            return c;
        }
    }
    last.expect("a distribution has at least one positive cell")
}

/// One i.i.d. variant draw from the target.
pub fn sample_variant(target: &TargetDistribution, state: &mut SamplerState) -> VariantKey {
    sample_category(&target.cells, state)
}

/// Largest-remainder apportionment of `n` over the target cells. Ties in
/// the remainder go to the earlier cell.
pub fn apportion(target: &TargetDistribution, n: usize) -> Vec<usize> {
    let probs = target.cells.as_slice();
    let quotas: Vec<f64> = probs.iter().map(|p| p * n as f64).collect();
    // Snap quotas sitting a rounding error below an integer up to it.
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    let rem = |i: usize| (quotas[i] - counts[i] as f64).max(0.0);
    order.sort_by(|&a, &b| rem(b).total_cmp(&rem(a)).then(a.cmp(&b)));
    for &i in order.iter().take(n.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Exactly `n` variants whose cell counts are the largest-remainder
/// apportionment of `n * p`, shuffled by `seed`.
pub fn balanced_batch(target: &TargetDistribution, n: usize, seed: u64) -> Result<Vec<VariantKey>, DebiasError> {
    if n == 0 {
        return Err(DebiasError::EmptyBatch);
    }
    let mut out = Vec::with_capacity(n);
    for (cell, count) in DemographicLabel::ALL.iter().zip(apportion(target, n)) {
        out.extend(std::iter::repeat_n(*cell, count));
    }
    out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    Iid,
    Balanced,
}

impl std::str::FromStr for SamplingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "iid" => Ok(SamplingMode::Iid),
            "balanced" => Ok(SamplingMode::Balanced),
            _ => Err(format!("unknown sampling mode {s:?} (expected iid or balanced)")),
        }
    }
}

/// `n` variants by either mode.
pub fn draw_variants(target: &TargetDistribution, n: usize, mode: SamplingMode, seed: u64) -> Result<Vec<VariantKey>, DebiasError> {
    match mode {
        SamplingMode::Balanced => balanced_batch(target, n, seed),
        SamplingMode::Iid => {
            if n == 0 {
                return Err(DebiasError::EmptyBatch);
            }
            let mut state = SamplerState::from_seed(seed);
            Ok((0..n).map(|_| sample_variant(target, &mut state)).collect())
        }
    }
}
