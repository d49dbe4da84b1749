//! Prompt campaigns run against a generation backend, classified on both
//! axes and summarized as per-group distributions and sigma.

mod prompts;
mod report;

use std::collections::BTreeMap;
use std::time::Duration;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::classifier::{SvmError, SvmModel};
use crate::debias::{draw_variants, SamplingMode, TargetDistribution, VariantKey};
use crate::demographic::{Axis, Category, CountTable, DemographicError, DemographicLabel};
use crate::ingest::EmbeddingRecord;
use crate::simulator::{BackendError, GenerationBackend, GenerationRequest};

pub use prompts::{
    build_person_prompt, build_profession_prompt, indefinite_article, standard_campaign, CampaignKind, GroupKind,
    ProfessionUse, PromptGroup, PromptSpec, ATTRIBUTES, NEGATIVE_PROMPT, PERSON_PROMPT, PROFESSIONS,
    PROFESSION_TEMPLATE,
};
pub use report::{
    compare_backends, AuditReport, AxisComparison, ComparisonTable, GroupComparison, GroupFailure, GroupReport,
    PanelSummary, ShareRow,
};

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("prompt text is empty")]
    EmptyPrompt,
    #[error("unknown campaign {0:?} (expected professions32, attributes8 or person)")]
    UnknownCampaign(String),
    #[error("invalid audit config: {0}")]
    InvalidConfig(String),
    #[error("duplicate group name {0:?}")]
    DuplicateGroup(String),
    #[error("campaign aborted: {0}")]
    Backend(BackendError),
    #[error("classification failed for record {id:?}: {message}")]
    Classification { id: String, message: String },
    #[error(transparent)]
    Demographic(#[from] DemographicError),
    #[error("comparison needs at least two reports, got {0}")]
    TooFewReports(usize),
    #[error("reports cover different groups: only in first {only_first:?}, only in {other:?}: {only_other:?}")]
    GroupMismatch {
        other: String,
        only_first: Vec<String>,
        only_other: Vec<String>,
    },
    #[error("report {0:?} was produced by a different campaign configuration")]
    CampaignMismatch(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
    #[error("nothing to emit")]
    NothingToEmit,
}

/// Assigns a (race, gender) label to a generated embedding.
pub trait DemographicClassifier: Send + Sync {
    fn classify(&self, record: &EmbeddingRecord) -> Result<DemographicLabel, AuditError>;
}

/// Reads the label the simulator attached. Useful for checking everything
/// except the classifier.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrueLabelClassifier;

impl DemographicClassifier for TrueLabelClassifier {
    fn classify(&self, r: &EmbeddingRecord) -> Result<DemographicLabel, AuditError> {
        r.true_label().ok_or_else(|| AuditError::Classification {
            id: r.id.clone(),
            message: "record carries no true label".into(),
        })
    }
}

/// A race model and a gender model.
#[derive(Debug, Clone)]
pub struct SvmClassifier {
    race: SvmModel,
    gender: SvmModel,
}

impl SvmClassifier {
    pub fn new(race: SvmModel, gender: SvmModel) -> Result<Self, AuditError> {
        if race.axis != Axis::Race || gender.axis != Axis::Gender {
            return Err(AuditError::InvalidConfig(format!(
                "expected race and gender models, got {} and {}",
                race.axis, gender.axis
            )));
        }
        if race.training_dim != gender.training_dim {
            return Err(AuditError::InvalidConfig(format!(
                "race model expects dim {}, gender model {}",
                race.training_dim, gender.training_dim
            )));
        }
        Ok(SvmClassifier { race, gender })
    }

    pub fn dim(&self) -> usize {
        self.race.training_dim
    }
}

impl DemographicClassifier for SvmClassifier {
    fn classify(&self, r: &EmbeddingRecord) -> Result<DemographicLabel, AuditError> {
        let err = |e: SvmError| AuditError::Classification {
            id: r.id.clone(),
            message: e.to_string(),
        };
        Ok(DemographicLabel::new(
            self.race.predict_race(&r.embedding).map_err(err)?,
            self.gender.predict_gender(&r.embedding).map_err(err)?,
        ))
    }
}

/// How requests pick a model variant.
#[derive(Debug, Clone, PartialEq)]
pub enum VariantPolicy {
    /// Base model, no variant.
    None,
    /// Each image's variant drawn i.i.d. from the target.
    Iid(TargetDistribution),
    /// Variant counts apportioned exactly from the target.
    Balanced(TargetDistribution),
}

impl VariantPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            VariantPolicy::None => "none",
            VariantPolicy::Iid(_) => "iid",
            VariantPolicy::Balanced(_) => "balanced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditConfig {
    pub n_per_group: usize,
    pub seed: u64,
    pub policy: VariantPolicy,
    pub batch_size: usize,
    /// Concurrent backend requests.
    pub parallelism: usize,
    pub max_attempts: u32,
    pub retry_base_delay: Duration,
}

impl AuditConfig {
    pub const DEFAULT_BATCH: usize = 64;

    pub fn new(n_per_group: usize, seed: u64) -> Self {
        AuditConfig {
            n_per_group,
            seed,
            policy: VariantPolicy::None,
            batch_size: Self::DEFAULT_BATCH,
            parallelism: 1,
            max_attempts: 3,
            retry_base_delay: Duration::from_millis(200),
        }
    }
}

/// Hash of what was asked: group names, prompts and the per-group count.
pub fn campaign_hash(groups: &[PromptGroup], n_per_group: usize) -> String {
    let v = serde_json::json!({ "groups": groups, "n_per_group": n_per_group });
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}

fn derive_seed(seed: u64, parts: &[&[u8]]) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    u64::from_le_bytes(h.finalize()[..8].try_into().expect("8 bytes"))
}

enum BatchError {
    Backend(BackendError),
    Audit(AuditError),
}

#[derive(Debug, Clone)]
struct Batch {
    group: usize,
    variant: Option<VariantKey>,
    index: usize,
    n: usize,
    seed: u64,
}

fn plan(groups: &[PromptGroup], cfg: &AuditConfig) -> Result<Vec<Batch>, AuditError> {
    let mut batches = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        let name = g.name.as_bytes();
        // (variant, how many) in cell order
        let streams: Vec<(Option<VariantKey>, usize)> = match &cfg.policy {
            VariantPolicy::None => vec![(None, cfg.n_per_group)],
            VariantPolicy::Iid(t) | VariantPolicy::Balanced(t) => {
                let mode = if matches!(cfg.policy, VariantPolicy::Iid(_)) {
                    SamplingMode::Iid
                } else {
                    SamplingMode::Balanced
                };
                let draws = draw_variants(t, cfg.n_per_group, mode, derive_seed(cfg.seed, &[b"variants", name]))
                    .map_err(|e| AuditError::InvalidConfig(e.to_string()))?;
                let counts = CountTable::from_labels(&draws);
                counts.iter().filter(|(_, c)| *c > 0).map(|(v, c)| (Some(v), c as usize)).collect()
            }
        };
        for (variant, total) in streams {
            let vtag = [variant.map_or(u8::MAX, |v| v.index() as u8)];
            let mut done = 0;
            let mut index = 0;
            while done < total {
                let n = cfg.batch_size.min(total - done);
                let seed = derive_seed(cfg.seed, &[b"batch", name, &vtag, &(index as u64).to_le_bytes()]);
                batches.push(Batch {
                    group: gi,
                    variant,
                    index,
                    n,
                    seed,
                });
                done += n;
                index += 1;
            }
        }
    }
    Ok(batches)
}

fn fetch(backend: &dyn GenerationBackend, group: &PromptGroup, b: &Batch, cfg: &AuditConfig) -> Result<Vec<EmbeddingRecord>, BackendError> {
    let req = GenerationRequest {
        group: &group.name,
        prompt: &group.prompt,
        variant: b.variant,
        n: b.n,
        seed: b.seed,
    };
    let mut attempt = 0;
    loop {
        attempt += 1;
        match backend.generate(&req) {
            Ok(recs) if recs.len() == b.n => return Ok(recs),
            Ok(recs) => {
                return Err(BackendError::Protocol(format!("asked for {} records, got {}", b.n, recs.len())));
            }
            Err(e @ (BackendError::Retryable(_) | BackendError::Unreachable(_))) if attempt < cfg.max_attempts => {
                let delay = cfg.retry_base_delay * 2u32.pow(attempt - 1);
                tracing::warn!(group = %group.name, batch = b.index, attempt, error = %e, "retrying batch");
                std::thread::sleep(delay);
            }
            Err(e) => return Err(e),
        }
    }
}

/// Requests `n_per_group` embeddings for every group, classifies them and
/// builds the report. Batches run concurrently up to `parallelism`; results
/// are aggregated in record-id order, so the report does not depend on it.
pub fn run_audit(
    backend: &dyn GenerationBackend,
    classifier: &dyn DemographicClassifier,
    groups: &[PromptGroup],
    cfg: &AuditConfig,
) -> Result<AuditReport, AuditError> {
    if cfg.n_per_group == 0 {
        return Err(AuditError::InvalidConfig("n_per_group must be at least 1".into()));
    }
    if cfg.batch_size == 0 || cfg.parallelism == 0 || cfg.max_attempts == 0 {
        return Err(AuditError::InvalidConfig("batch size, parallelism and attempts must be positive".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for g in groups {
        if !seen.insert(g.name.as_str()) {
            return Err(AuditError::DuplicateGroup(g.name.clone()));
        }
    }
    let batches = plan(groups, cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(|e| AuditError::InvalidConfig(e.to_string()))?;
    tracing::info!(backend = %backend.id(), groups = groups.len(), batches = batches.len(), "running audit");

    let results: Vec<Result<Vec<(String, DemographicLabel)>, BatchError>> = pool.install(|| {
        batches
            .par_iter()
            .map(|b| {
                let recs = fetch(backend, &groups[b.group], b, cfg).map_err(BatchError::Backend)?;
                recs.into_iter()
                    .map(|r| classifier.classify(&r).map(|l| (r.id, l)).map_err(BatchError::Audit))
                    .collect()
            })
            .collect()
    });

    let mut labelled: Vec<Vec<(String, DemographicLabel)>> = vec![Vec::new(); groups.len()];
    let mut failures = Vec::new();
    for (b, res) in batches.iter().zip(results) {
        match res {
            Ok(v) => labelled[b.group].extend(v),
            Err(BatchError::Audit(e)) => return Err(e),
            Err(BatchError::Backend(e @ (BackendError::Unreachable(_) | BackendError::UnknownGroup(_) | BackendError::Config(_)))) => {
                return Err(AuditError::Backend(e));
            }
            Err(BatchError::Backend(e)) => failures.push(GroupFailure {
                group: groups[b.group].name.clone(),
                batch: b.index,
                variant: b.variant.map(|v| v.name().to_string()),
                requested: b.n,
                error: e.to_string(),
            }),
        }
    }

    let mut per_group = BTreeMap::new();
    for (g, mut recs) in groups.iter().zip(labelled) {
        if recs.is_empty() {
            continue;
        }
        recs.sort_by(|a, b| a.0.cmp(&b.0));
        let counts = CountTable::from_labels(recs.iter().map(|(_, l)| l));
        per_group.insert(g.name.clone(), GroupReport::from_counts(cfg.n_per_group, counts)?);
    }
    Ok(AuditReport {
        backend_id: backend.id(),
        campaign_config_hash: campaign_hash(groups, cfg.n_per_group),
        seed: cfg.seed,
        n_per_group: cfg.n_per_group,
        variant_policy: cfg.policy.name().to_string(),
        per_group,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demographic::{DemographicDistribution, Gender, Race};
    use crate::simulator::{preset, PresetName, SyntheticBackend, SyntheticWorldConfig};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn backend(world: SyntheticWorldConfig) -> SyntheticBackend {
        SyntheticBackend::new("sim:test", world).unwrap()
    }

    fn person() -> Vec<PromptGroup> {
        standard_campaign(CampaignKind::Person)
    }

    #[test]
    fn degenerate_backend() {
        let mut w = preset(PresetName::SdxlPersonFig1, 16, 1).unwrap();
        let wm = DemographicLabel::new(Race::White, Gender::Male);
        w.per_group_demographics.insert("person".into(), DemographicDistribution::degenerate(wm));
        let r = run_audit(&backend(w), &TrueLabelClassifier, &person(), &AuditConfig::new(100, 1)).unwrap();
        let g = &r.per_group["person"];
        assert_eq!(g.race_distribution.get(Race::White), 1.0);
        assert!((g.sigma_gender - 50.0).abs() < 1e-12);
        r.validate().unwrap();
    }

    #[test]
    fn single_image_report_is_valid() {
        let w = preset(PresetName::SdxlPersonFig1, 16, 1).unwrap();
        let r = run_audit(&backend(w), &TrueLabelClassifier, &person(), &AuditConfig::new(1, 1)).unwrap();
        assert_eq!(r.per_group["person"].counts.total(), 1);
        r.validate().unwrap();
    }

    #[test]
    fn nurse_row_recovered() {
        let w = preset(PresetName::Table2Professions, 16, 2).unwrap();
        let nurse: Vec<_> = standard_campaign(CampaignKind::Professions32).into_iter().filter(|g| g.name == "Nurse").collect();
        let r = run_audit(&backend(w.clone()), &TrueLabelClassifier, &nurse, &AuditConfig::new(10_000, 3)).unwrap();
        let g = &r.per_group["Nurse"];
        let want = &w.per_group_demographics["Nurse"];
        for (race, p) in want.race_marginal().iter() {
            assert!((g.race_distribution.get(race) - p).abs() <= 3.0 * (p * (1.0 - p) / 1e4).sqrt());
        }
        let pf = want.gender_marginal().get(Gender::Female);
        assert!((g.gender_distribution.get(Gender::Female) - pf).abs() <= 3.0 * (pf * (1.0 - pf) / 1e4).sqrt());
    }

    #[test]
    fn parallelism_and_batching_do_not_change_reports() {
        let w = preset(PresetName::SdxlPersonFig1, 16, 1).unwrap();
        let b = backend(w);
        let mut c1 = AuditConfig::new(500, 4);
        let r1 = run_audit(&b, &TrueLabelClassifier, &person(), &c1).unwrap();
        c1.parallelism = 8;
        let r8 = run_audit(&b, &TrueLabelClassifier, &person(), &c1).unwrap();
        assert_eq!(r1.to_canonical_json(), r8.to_canonical_json());
        c1.policy = VariantPolicy::Balanced(TargetDistribution::uniform());
        let bal = run_audit(&b, &TrueLabelClassifier, &person(), &c1).unwrap();
        assert!(bal.per_group["person"].sigma_race < r1.per_group["person"].sigma_race);
        assert_eq!(bal.campaign_config_hash, r1.campaign_config_hash);
    }

    struct Flaky {
        inner: SyntheticBackend,
        calls: AtomicUsize,
        fail_first: usize,
        error: BackendError,
    }

    impl GenerationBackend for Flaky {
        fn id(&self) -> String {
            "flaky".into()
        }

        fn generate(&self, r: &GenerationRequest<'_>) -> Result<Vec<EmbeddingRecord>, BackendError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail_first {
                return Err(self.error.clone());
            }
            self.inner.generate(r)
        }
    }

    fn fast(n: usize) -> AuditConfig {
        let mut c = AuditConfig::new(n, 1);
        c.retry_base_delay = Duration::from_millis(1);
        c
    }

    #[test]
    fn retries_then_succeeds() {
        let f = Flaky {
            inner: backend(preset(PresetName::SdxlPersonFig1, 16, 1).unwrap()),
            calls: AtomicUsize::new(0),
            fail_first: 2,
            error: BackendError::Retryable("503".into()),
        };
        let r = run_audit(&f, &TrueLabelClassifier, &person(), &fast(10)).unwrap();
        assert!(r.failures.is_empty());
        assert_eq!(f.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn persistent_failures_are_recorded_or_abort() {
        let f = Flaky {
            inner: backend(preset(PresetName::SdxlPersonFig1, 16, 1).unwrap()),
            calls: AtomicUsize::new(0),
            fail_first: 3,
            error: BackendError::Retryable("503".into()),
        };
        // First batch exhausts its three attempts, second batch succeeds.
        let r = run_audit(&f, &TrueLabelClassifier, &person(), &fast(100)).unwrap();
        assert_eq!(r.failures.len(), 1);
        assert_eq!(r.failures[0].requested, 64);
        assert_eq!(r.per_group["person"].counts.total(), 36);

        let down = Flaky {
            inner: backend(preset(PresetName::SdxlPersonFig1, 16, 1).unwrap()),
            calls: AtomicUsize::new(0),
            fail_first: usize::MAX,
            error: BackendError::Unreachable("refused".into()),
        };
        assert!(matches!(
            run_audit(&down, &TrueLabelClassifier, &person(), &fast(10)),
            Err(AuditError::Backend(BackendError::Unreachable(_)))
        ));
        assert_eq!(down.calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn classifier_dimension_mismatch_aborts() {
        use crate::classifier::{train, Gamma, SvmHyperParams};
        use crate::embedding::EmbeddingVector;
        let recs: Vec<EmbeddingRecord> = (0..4)
            .map(|i| {
                EmbeddingRecord::labeled(
                    format!("t{i}"),
                    EmbeddingVector::new(vec![i as f64 + 1.0, 1.0]).unwrap(),
                    DemographicLabel::new(if i < 2 { Race::Asian } else { Race::White }, if i % 2 == 0 { Gender::Female } else { Gender::Male }),
                )
            })
            .collect();
        let p = SvmHyperParams {
            gamma: Gamma::Value(1.0),
            ..Default::default()
        };
        let clf = SvmClassifier::new(train(&recs, Axis::Race, &p).unwrap(), train(&recs, Axis::Gender, &p).unwrap()).unwrap();
        let w = preset(PresetName::SdxlPersonFig1, 16, 1).unwrap();
        assert!(matches!(
            run_audit(&backend(w), &clf, &person(), &AuditConfig::new(5, 1)),
            Err(AuditError::Classification { .. })
        ));
    }

    #[test]
    fn config_errors() {
        let b = backend(preset(PresetName::SdxlPersonFig1, 16, 1).unwrap());
        assert!(run_audit(&b, &TrueLabelClassifier, &person(), &AuditConfig::new(0, 1)).is_err());
        let mut twice = person();
        twice.extend(person());
        assert!(matches!(
            run_audit(&b, &TrueLabelClassifier, &twice, &AuditConfig::new(1, 1)),
            Err(AuditError::DuplicateGroup(_))
        ));
        let pro = standard_campaign(CampaignKind::Professions32);
        assert!(matches!(
            run_audit(&b, &TrueLabelClassifier, &pro[..1], &AuditConfig::new(1, 1)),
            Err(AuditError::Backend(BackendError::UnknownGroup(_)))
        ));
    }
}
