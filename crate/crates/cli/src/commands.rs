use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use demaudit_core::audit::{
    compare_backends, run_audit, standard_campaign, AuditConfig, AuditError, AuditReport, CampaignKind,
    DemographicClassifier, SvmClassifier, TrueLabelClassifier, VariantPolicy,
};
use demaudit_core::classifier::{train, SvmHyperParams, SvmModel};
use demaudit_core::debias::{
    draw_variants, regulate_prompt, ChatCompletionClient, LanguageModelClient, RuleBasedMock, SamplerState,
    TargetDistribution,
};
use demaudit_core::demographic::{chi_square_gof, Axis, Category, CountTable, DemographicLabel};
use demaudit_core::embedding::{
    homogenization_scores_capped, kde, padded_grid, scott_bandwidth, write_scores_csv, GroupSummary,
};
use demaudit_core::ingest::{self, CorpusFormat, EmbeddingRecord, IngestOptions};
use demaudit_core::simulator::{self, open_backend, preset, BackendError, BackendSpec, SyntheticWorldConfig};
use demaudit_core::stats::{box_stats, read_samples_csv, sample_size_t, select_and_test, Sample, StatsError};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::config::{OutDir, CONFIG_VERSION};
use crate::invalid;

/// Pretty JSON with sorted keys and a trailing newline.
fn canonical<T: Serialize>(v: &T) -> Vec<u8> {
    let value = serde_json::to_value(v).expect("outputs serialize");
    let mut s = serde_json::to_string_pretty(&value).expect("values serialize");
    s.push('\n');
    s.into_bytes()
}

fn infer_format(path: &Path, explicit: Option<CorpusFormat>) -> CorpusFormat {
    explicit.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
        Some("bin") => CorpusFormat::Bin,
        _ => CorpusFormat::Jsonl,
    })
}

fn load(path: &Path, format: Option<CorpusFormat>) -> anyhow::Result<Vec<EmbeddingRecord>> {
    ingest::load_corpus(path, infer_format(path, format))
        .map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn corpus_bytes(records: &[EmbeddingRecord], format: CorpusFormat) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    match format {
        CorpusFormat::Jsonl => ingest::write_jsonl(&mut buf, records)?,
        CorpusFormat::Bin => ingest::write_bin(&mut buf, records)?,
    }
    Ok(buf)
}

fn load_model(path: &Path) -> anyhow::Result<SvmModel> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    SvmModel::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn load_target(spec: &str) -> anyhow::Result<TargetDistribution> {
    if spec == "uniform" {
        return Ok(TargetDistribution::uniform());
    }
    let text = std::fs::read_to_string(spec).map_err(|e| invalid(format!("target {spec}: {e}")))?;
    TargetDistribution::from_json(&text).map_err(|e| invalid(format!("target {spec}: {e}")))
}

fn backend_exit(e: BackendError) -> anyhow::Error {
    match e {
        BackendError::Unreachable(_) | BackendError::Retryable(_) | BackendError::Protocol(_) => e.into(),
        _ => invalid(e),
    }
}

fn audit_exit(e: AuditError) -> anyhow::Error {
    match e {
        AuditError::Backend(b) => backend_exit(b),
        AuditError::Inconsistent(_) | AuditError::Demographic(_) => e.into(),
        _ => invalid(e),
    }
}

/// Runs the command; returns the primary output path.
pub fn run(cli: &Cli) -> anyhow::Result<PathBuf> {
    let g = &cli.global;
    let threads = g.parallelism.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if threads == 0 {
        return Err(invalid("parallelism must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("starting worker pool")?;
    let out = OutDir::create(&g.out_dir)?;
    out.resolve(cli.command.out())?;
    tracing::info!(command = cli.command.name(), seed = g.seed, parallelism = threads, "starting");

    let (name, bytes) = match &cli.command {
        Command::Ingest(a) => ingest_cmd(a)?,
        Command::Train(a) => train_cmd(a, g.seed, &out)?,
        Command::Evaluate(a) => evaluate_cmd(a, &out)?,
        Command::Audit(a) => audit_cmd(a, g.seed, threads, &out)?,
        Command::Compare(a) => compare_cmd(a, &out)?,
        Command::Homogenize(a) => homogenize_cmd(a, g.seed, &out)?,
        Command::Debias(DebiasCommand::Sample(a)) => sample_cmd(a, g.seed)?,
        Command::Debias(DebiasCommand::Regulate(a)) => regulate_cmd(a, g.seed)?,
        Command::Survey(SurveyCommand::Analyze(a)) => analyze_cmd(a)?,
        Command::Survey(SurveyCommand::Power(a)) => power_cmd(a)?,
        Command::Simulate(a) => simulate_cmd(a, g.seed, &out)?,
    };
    let path = out.write(&name, &bytes)?;
    // Same shape as a --config file, so a run can be replayed from it.
    let mut effective = serde_json::to_value(&cli.command)?;
    effective["version"] = json!(CONFIG_VERSION);
    effective["seed"] = json!(g.seed);
    effective["parallelism"] = json!(threads);
    effective["out_dir"] = json!(g.out_dir);
    effective["log_level"] = json!(g.log_level);
    out.write(&OutDir::sibling(&name, ".run.json"), &canonical(&effective))?;
    Ok(path)
}

type Output = (PathBuf, Vec<u8>);

fn ingest_cmd(a: &IngestArgs) -> anyhow::Result<Output> {
    let opts = IngestOptions {
        merge_fairface: a.merge_fairface,
        laion_filter: a.laion_filter,
    };
    let outcome = ingest::ingest(&a.input, infer_format(&a.input, a.format), opts)
        .map_err(|e| invalid(format!("{}: {e}", a.input.display())))?;
    tracing::info!(kept = outcome.records.len(), filtered_out = outcome.filtered_out, "ingested");
    Ok((a.out.clone(), corpus_bytes(&outcome.records, infer_format(&a.out, a.out_format))?))
}

fn train_cmd(a: &TrainArgs, seed: u64, out: &OutDir) -> anyhow::Result<Output> {
    let corpus = load(&a.input, a.format)?;
    let (train_set, holdout) = match a.holdout {
        Some(f) => {
            let (t, v) = ingest::split(&corpus, 1.0 - f, seed).map_err(invalid)?;
            (t, Some(v))
        }
        None => (corpus, None),
    };
    let params = SvmHyperParams {
        c: a.c,
        gamma: a.gamma,
        tolerance: a.tolerance,
        ..Default::default()
    };
    let model = train(&train_set, a.axis, &params).map_err(invalid)?;
    tracing::info!(axis = %a.axis, records = train_set.len(), binaries = model.binaries.len(), "trained");
    if let Some(v) = holdout {
        let metrics = model.evaluate(&v).map_err(invalid)?;
        out.write(&OutDir::sibling(&a.out, ".metrics.json"), &canonical(&metrics))?;
        out.write(&OutDir::sibling(&a.out, ".metrics.txt"), metrics.to_table(a.axis.as_str()).as_bytes())?;
    }
    Ok((a.out.clone(), model.to_json().into_bytes()))
}

fn evaluate_cmd(a: &EvaluateArgs, out: &OutDir) -> anyhow::Result<Output> {
    let model = load_model(&a.model)?;
    let corpus = load(&a.input, a.format)?;
    let metrics = model.evaluate(&corpus).map_err(invalid)?;
    out.write(&OutDir::sibling(&a.out, ".txt"), metrics.to_table(model.axis.as_str()).as_bytes())?;
    Ok((a.out.clone(), canonical(&metrics)))
}

fn audit_cmd(a: &AuditArgs, seed: u64, threads: usize, out: &OutDir) -> anyhow::Result<Output> {
    let spec: BackendSpec = a.backend.parse().map_err(invalid)?;
    let kind: CampaignKind = a.campaign.parse().map_err(invalid)?;
    let classifier: Box<dyn DemographicClassifier> = match (&a.race_model, &a.gender_model) {
        (Some(r), Some(g)) => Box::new(SvmClassifier::new(load_model(r)?, load_model(g)?).map_err(invalid)?),
        _ if spec == BackendSpec::Remote => {
            return Err(invalid("a remote backend needs --race-model and --gender-model"));
        }
        _ => Box::new(TrueLabelClassifier),
    };
    let dim = match (a.dim, &a.race_model) {
        (Some(d), _) => d,
        (None, Some(r)) => load_model(r)?.training_dim,
        (None, None) => simulator::DEFAULT_DIM,
    };
    let backend = open_backend(&spec, dim, a.world_seed).map_err(backend_exit)?;
    let mut cfg = AuditConfig::new(a.n, seed);
    cfg.parallelism = threads;
    cfg.batch_size = a.batch_size;
    cfg.policy = match a.variants {
        VariantMode::None => VariantPolicy::None,
        VariantMode::Iid => VariantPolicy::Iid(load_target(&a.target)?),
        VariantMode::Balanced => VariantPolicy::Balanced(load_target(&a.target)?),
    };
    let report = run_audit(backend.as_ref(), classifier.as_ref(), &standard_campaign(kind), &cfg).map_err(audit_exit)?;
    if !report.failures.is_empty() {
        tracing::warn!(failed_batches = report.failures.len(), "some batches failed; see report failures");
    }
    if report.per_group.is_empty() {
        // Keep the failure list for inspection, but do not report success.
        let path = out.write(&a.out, canonical(&report).as_slice())?;
        anyhow::bail!("every batch failed; failures written to {}", path.display());
    }
    if a.csv {
        out.write(&OutDir::sibling(&a.out, ".csv"), report.to_csv().map_err(invalid)?.as_bytes())?;
    }
    let mut bytes = report.to_canonical_json().into_bytes();
    bytes.push(b'\n');
    Ok((a.out.clone(), bytes))
}

fn compare_cmd(a: &CompareArgs, out: &OutDir) -> anyhow::Result<Output> {
    let reports = a
        .reports
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
            AuditReport::from_json(&text).map_err(|e| invalid(format!("{}: {e}", p.display())))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table = compare_backends(&reports).map_err(invalid)?;
    out.write(&OutDir::sibling(&a.out, ".csv"), table.to_csv().map_err(invalid)?.as_bytes())?;
    let mut bytes = table.to_canonical_json().into_bytes();
    bytes.push(b'\n');
    Ok((a.out.clone(), bytes))
}

#[derive(Serialize)]
struct HomogenizationGroup {
    summary: GroupSummary,
    kde: Option<demaudit_core::embedding::DensityCurve>,
}

fn homogenize_cmd(a: &HomogenizeArgs, seed: u64, out: &OutDir) -> anyhow::Result<Output> {
    let race_model = a.race_model.as_deref().map(load_model).transpose()?;
    if race_model.as_ref().is_some_and(|m| m.axis != Axis::Race) {
        return Err(invalid("--race-model must be a race model"));
    }
    let mut groups: BTreeMap<String, Vec<EmbeddingRecord>> = BTreeMap::new();
    for spec in &a.input {
        let (label, path) = match spec.split_once('=') {
            Some((l, p)) => (l.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| spec.clone());
                (stem, p)
            }
        };
        for r in load(&path, a.format)? {
            let key = match a.group_by {
                GroupBy::File => label.clone(),
                GroupBy::Race => {
                    let race = match (r.race, &race_model) {
                        (Some(race), _) => race,
                        (None, Some(m)) => m.predict_race(&r.embedding).map_err(invalid)?,
                        (None, None) => {
                            return Err(invalid(format!("record {:?} has no race; pass --race-model", r.id)));
                        }
                    };
                    format!("{label}/{}", race.name())
                }
            };
            groups.entry(key).or_default().push(r);
        }
    }

    let mut scored = Vec::new();
    let mut report = BTreeMap::new();
    for (name, recs) in &groups {
        let scores = homogenization_scores_capped(recs, a.max_items, seed).map_err(|e| invalid(format!("group {name}: {e}")))?;
        let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
        let curve = match scott_bandwidth(&values) {
            Some(h) => Some(kde(&values, &padded_grid(&values, h, 3.0, a.kde_points), Some(h))?),
            None => None,
        };
        report.insert(
            name.clone(),
            HomogenizationGroup {
                summary: GroupSummary::from_scores(name, &scores)?,
                kde: curve,
            },
        );
        scored.push((name.clone(), scores));
    }

    let mut tests = Vec::new();
    for pair in &a.test {
        let (x, y) = pair.split_once(':').ok_or_else(|| invalid(format!("test pair {pair:?} is not a:b")))?;
        let sample = |g: &str| -> anyhow::Result<Sample> {
            let (_, s) = scored
                .iter()
                .find(|(n, _)| n == g)
                .ok_or_else(|| invalid(format!("no group {g:?}; groups are {:?}", groups.keys().collect::<Vec<_>>())))?;
            Sample::new(g, s.iter().map(|h| h.score).collect()).map_err(invalid)
        };
        let result = select_and_test(&sample(x)?, &sample(y)?, a.alpha).map_err(invalid)?;
        tests.push(json!({ "a": x, "b": y, "result": result }));
    }

    let mut csv = Vec::new();
    write_scores_csv(&mut csv, &scored)?;
    out.write(&OutDir::sibling(&a.out, ".scores.csv"), &csv)?;
    Ok((a.out.clone(), canonical(&json!({ "groups": report, "tests": tests }))))
}

fn sample_cmd(a: &SampleArgs, seed: u64) -> anyhow::Result<Output> {
    let target = load_target(&a.target)?;
    let variants = draw_variants(&target, a.n, a.mode, seed).map_err(invalid)?;
    let counts = CountTable::from_labels(&variants);
    let gof = chi_square_gof(&counts, &target.cells)?;
    let body = json!({
        "mode": a.mode,
        "n": a.n,
        "seed": seed,
        "target": serde_json::from_str::<serde_json::Value>(&target.to_json())?,
        "counts": counts,
        "goodness_of_fit": gof,
        "variants": variants.iter().map(|v| v.name()).collect::<Vec<_>>(),
    });
    Ok((a.out.clone(), canonical(&body)))
}

fn regulate_cmd(a: &RegulateArgs, seed: u64) -> anyhow::Result<Output> {
    let mut prompts = a.prompt.clone();
    if let Some(p) = &a.prompts_file {
        let text = std::fs::read_to_string(p).map_err(|e| invalid(format!("{}: {e}", p.display())))?;
        prompts.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if prompts.is_empty() {
        return Err(invalid("no prompts given; use --prompt or --prompts-file"));
    }
    let target = load_target(&a.target)?;
    let client: Box<dyn LanguageModelClient> = match a.client {
        ClientKind::Mock => Box::new(RuleBasedMock::default()),
        ClientKind::Remote => Box::new(ChatCompletionClient::from_env().map_err(invalid)?),
    };
    let mut state = SamplerState::from_seed(seed);
    let mut results = Vec::with_capacity(prompts.len());
    for p in &prompts {
        results.push(regulate_prompt(p, client.as_ref(), &target, a.wording, &mut state)?);
    }
    let modified = results.iter().filter(|r| r.modified()).count();
    tracing::info!(prompts = results.len(), modified, "regulated");
    Ok((a.out.clone(), canonical(&json!({ "modified": modified, "results": results }))))
}

fn stats_exit(e: StatsError) -> anyhow::Error {
    invalid(e)
}

fn analyze_cmd(a: &AnalyzeArgs) -> anyhow::Result<Output> {
    let file = std::fs::File::open(&a.input).map_err(|e| invalid(format!("{}: {e}", a.input.display())))?;
    let samples = read_samples_csv(file, &a.group_col, &a.value_col).map_err(stats_exit)?;
    let pairs: Vec<(String, String)> = match &a.pairs {
        Some(spec) => spec
            .split(',')
            .map(|p| {
                p.split_once(':')
                    .map(|(x, y)| (x.trim().to_string(), y.trim().to_string()))
                    .ok_or_else(|| invalid(format!("pair {p:?} is not a:b")))
            })
            .collect::<anyhow::Result<_>>()?,
        None => {
            let names: Vec<&String> = samples.keys().collect();
            let mut v = Vec::new();
            for i in 0..names.len() {
                for j in i + 1..names.len() {
                    v.push((names[i].clone(), names[j].clone()));
                }
            }
            v
        }
    };
    let get = |g: &str| samples.get(g).ok_or_else(|| invalid(format!("no responses for group {g:?} in column {}", a.group_col)));
    let mut rows = Vec::new();
    for (x, y) in &pairs {
        let (sx, sy) = (get(x)?, get(y)?);
        let result = select_and_test(sx, sy, a.alpha).map_err(stats_exit)?;
        rows.push(json!({
            "a": x,
            "b": y,
            "test": result,
            "box_a": box_stats(sx),
            "box_b": box_stats(sy),
        }));
    }
    Ok((a.out.clone(), canonical(&json!({ "pairs": rows }))))
}

fn power_cmd(a: &PowerArgs) -> anyhow::Result<Output> {
    let n = sample_size_t(a.effect, a.power, a.alpha, a.design).map_err(stats_exit)?;
    let body = json!({
        "effect_size": a.effect,
        "power": a.power,
        "alpha": a.alpha,
        "design": a.design,
        "n": n,
    });
    Ok((a.out.clone(), canonical(&body)))
}

fn simulate_cmd(a: &SimulateArgs, seed: u64, out: &OutDir) -> anyhow::Result<Output> {
    let spec: BackendSpec = a.backend.parse().map_err(invalid)?;
    let world: SyntheticWorldConfig = match &spec {
        BackendSpec::Preset(p) => preset(*p, a.dim, a.world_seed).map_err(invalid)?,
        BackendSpec::ConfigFile(path) => SyntheticWorldConfig::load(Path::new(path)).map_err(invalid)?,
        BackendSpec::Remote => return Err(invalid("simulate needs a sim: backend")),
    };
    let variant = match &a.variant {
        Some(v) => Some(DemographicLabel::parse(v).ok_or_else(|| invalid(format!("unknown cell {v:?}")))?),
        None => None,
    };
    let mut records = Vec::with_capacity(a.n * a.group.len());
    for g in &a.group {
        records.extend(simulator::generate(&world, g, variant, a.n, seed).map_err(invalid)?);
    }
    if a.dump_world {
        out.write(&OutDir::sibling(&a.out, ".world.json"), world.to_json().as_bytes())?;
    }
    Ok((a.out.clone(), corpus_bytes(&records, infer_format(&a.out, a.format))?))
}
