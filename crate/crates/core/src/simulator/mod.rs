//! Generation backends: a deterministic simulator with configurable
//! demographic bias and per-race embedding clouds, and an HTTP client for
//! remote generation services.

mod presets;
mod remote;

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::audit::PromptSpec;
use crate::debias::VariantKey;
use crate::demographic::{Category, DemographicLabel, Gender, LabelDistribution, Race};
use crate::embedding::EmbeddingVector;
use crate::ingest::{EmbeddingRecord, RecordSource};

pub use presets::{preset, table2_row, PresetName, DEFAULT_DIM, TABLE2_SDXL};
pub use remote::{RemoteBackend, ENV_BACKEND_URL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend unreachable: {0}")]
    Unreachable(String),
    #[error("backend request failed: {0}")]
    Retryable(String),
    #[error("backend protocol error: {0}")]
    Protocol(String),
    #[error("prompt group {0:?} is not configured and no variant override applies")]
    UnknownGroup(String),
    #[error("invalid world config: {0}")]
    Config(String),
    #[error("unknown preset {0:?}")]
    UnknownPreset(String),
    #[error("invalid backend spec {0:?}: expected sim:<preset>, sim:@<config.json> or remote")]
    BadSpec(String),
}

impl BackendError {
    /// Whether another attempt may succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, BackendError::Retryable(_))
    }
}

/// One generation call.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    /// Campaign group name; the simulator keys its demographics on it.
    pub group: &'a str,
    pub prompt: &'a PromptSpec,
    pub variant: Option<VariantKey>,
    pub n: usize,
    pub seed: u64,
}

/// Anything that turns a prompt into `n` face embeddings.
pub trait GenerationBackend: Send + Sync {
    fn id(&self) -> String;
    fn generate(&self, request: &GenerationRequest<'_>) -> Result<Vec<EmbeddingRecord>, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceCloud {
    pub mean: EmbeddingVector,
    /// Root-mean-square distance of cloud members from the mean; each
    /// coordinate gets standard deviation `dispersion / sqrt(dim)`.
    pub dispersion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorldConfig {
    pub dim: usize,
    pub per_group_demographics: BTreeMap<String, LabelDistribution>,
    pub per_race_cloud: BTreeMap<Race, RaceCloud>,
    /// Added to the race-cloud sample of each gender.
    #[serde(default)]
    pub gender_offsets: BTreeMap<Gender, EmbeddingVector>,
    #[serde(default)]
    pub variant_overrides: BTreeMap<VariantKey, DemographicLabel>,
}

impl SyntheticWorldConfig {
    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |m: String| Err(BackendError::Config(m));
        if self.dim == 0 {
            return bad("dim must be positive".into());
        }
        for r in Race::ALL {
            let Some(cloud) = self.per_race_cloud.get(r) else {
                return bad(format!("missing cloud for race {r}"));
            };
            if cloud.mean.dim() != self.dim {
                return bad(format!("cloud mean for {r} has dim {}, expected {}", cloud.mean.dim(), self.dim));
            }
            if !(cloud.dispersion > 0.0 && cloud.dispersion.is_finite()) {
                return bad(format!("dispersion for {r} must be positive"));
            }
        }
        for (g, off) in &self.gender_offsets {
            if off.dim() != self.dim {
                return bad(format!("gender offset for {g} has dim {}, expected {}", off.dim(), self.dim));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, BackendError> {
        let c: SyntheticWorldConfig = serde_json::from_str(text).map_err(|e| BackendError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Identity overrides for all 12 variants: variant k always yields cell k.
    pub fn with_identity_variants(mut self) -> Self {
        self.variant_overrides = DemographicLabel::ALL.iter().map(|&l| (l, l)).collect();
        self
    }
}

fn stream_seed(seed: u64, group: &str, variant: Option<VariantKey>) -> Sha256 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((group.len() as u64).to_le_bytes());
    h.update(group.as_bytes());
    h.update([variant.map_or(u8::MAX, |v| v.index() as u8)]);
    h
}

/// Independent stream per record index, so records do not depend on how a
/// request is split into batches.
fn record_rng(base: &Sha256, index: u64) -> ChaCha8Rng {
    let mut h = base.clone();
    h.update(index.to_le_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn draw_cell(dist: &LabelDistribution, u: f64) -> DemographicLabel {
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
    last.expect("distribution has a positive cell")
}

/// `n` labeled records for one group (or forced variant), a pure function
/// of its arguments.
pub fn generate(
    config: &SyntheticWorldConfig,
    group: &str,
    variant: Option<VariantKey>,
    n: usize,
    seed: u64,
) -> Result<Vec<EmbeddingRecord>, BackendError> {
    let forced = variant.and_then(|v| config.variant_overrides.get(&v).copied());
    let dist = match forced {
        Some(_) => None,
        None => Some(
            config
                .per_group_demographics
                .get(group)
                .ok_or_else(|| BackendError::UnknownGroup(group.to_string()))?,
        ),
    };
    let base = stream_seed(seed, group, variant);
    let prefix = hex::encode(&base.clone().finalize()[..6]);
    let scale = 1.0 / (config.dim as f64).sqrt();
    (0..n as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = record_rng(&base, k);
            let label = match (forced, dist) {
                (Some(l), _) => l,
                (None, Some(d)) => draw_cell(d, rng.random()),
                (None, None) => unreachable!(),
            };
            let cloud = &config.per_race_cloud[&label.race];
            let offset = config.gender_offsets.get(&label.gender);
            let sd = cloud.dispersion * scale;
            let values: Vec<f64> = cloud
                .mean
                .as_slice()
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + sd * z + offset.map_or(0.0, |o| o.as_slice()[i])
                })
                .collect();
            let embedding = EmbeddingVector::new(values).map_err(|e| BackendError::Config(e.to_string()))?;
            let mut rec = EmbeddingRecord::labeled(format!("sim-{prefix}-{k:06}"), embedding, label);
            rec.source = Some(RecordSource::Synthetic);
            rec.provenance = Some(format!("sim:{group}"));
            Ok(rec)
        })
        .collect()
}

/// The simulator behind the backend interface.
#[derive(Debug, Clone)]
pub struct SyntheticBackend {
    id: String,
    config: SyntheticWorldConfig,
}

impl SyntheticBackend {
    pub fn new(id: impl Into<String>, config: SyntheticWorldConfig) -> Result<Self, BackendError> {
        config.validate()?;
        Ok(SyntheticBackend { id: id.into(), config })
    }

    pub fn config(&self) -> &SyntheticWorldConfig {
        &self.config
    }
}

impl GenerationBackend for SyntheticBackend {
    fn id(&self) -> String {
        self.id.clone()
    }

    fn generate(&self, r: &GenerationRequest<'_>) -> Result<Vec<EmbeddingRecord>, BackendError> {
        generate(&self.config, r.group, r.variant, r.n, r.seed)
    }
}

/// Where generations come from, as written on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendSpec {
    Preset(PresetName),
    ConfigFile(String),
    Remote,
}

impl std::str::FromStr for BackendSpec {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, BackendError> {
        if s == "remote" {
            return Ok(BackendSpec::Remote);
        }
        match s.strip_prefix("sim:") {
            Some(rest) if rest.starts_with('@') && rest.len() > 1 => Ok(BackendSpec::ConfigFile(rest[1..].to_string())),
            Some(rest) => Ok(BackendSpec::Preset(rest.parse()?)),
            None => Err(BackendError::BadSpec(s.to_string())),
        }
    }
}

impl std::fmt::Display for BackendSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BackendSpec::Preset(p) => write!(f, "sim:{}", p.as_str()),
            BackendSpec::ConfigFile(p) => write!(f, "sim:@{p}"),
            BackendSpec::Remote => f.write_str("remote"),
        }
    }
}

/// Builds the backend for a spec. Presets are laid out with `dim` and
/// `world_seed`; the remote URL comes from the environment.
pub fn open_backend(spec: &BackendSpec, dim: usize, world_seed: u64) -> Result<Box<dyn GenerationBackend>, BackendError> {
    Ok(match spec {
        BackendSpec::Preset(p) => Box::new(SyntheticBackend::new(spec.to_string(), preset(*p, dim, world_seed)?)?),
        BackendSpec::ConfigFile(path) => Box::new(SyntheticBackend::new(
            spec.to_string(),
            SyntheticWorldConfig::load(Path::new(path))?,
        )?),
        BackendSpec::Remote => Box::new(RemoteBackend::from_env()?),
    })
}
