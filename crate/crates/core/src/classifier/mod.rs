//! RBF-kernel SVM over face embeddings, trained once per axis with a
//! one-vs-one scheme and evaluated with macro-averaged metrics.

pub mod kernel;
mod metrics;
pub mod smo;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demographic::{Axis, Category, Gender, Race};
use crate::embedding::EmbeddingVector;
use crate::ingest::EmbeddingRecord;

pub use metrics::EvalMetrics;
pub use smo::{kkt_max_violation, BinaryProblem, SmoSolution};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvmError {
    #[error("invalid hyper-parameter: {0}")]
    InvalidParams(String),
    #[error("classifiers are trained per axis (race or gender), not {0}")]
    UnsupportedAxis(Axis),
    #[error("record {0:?} has no {1} label")]
    Unlabeled(String, Axis),
    #[error("need at least two classes, found {0}")]
    SingleClass(usize),
    #[error("inseparable degenerate data: all training embeddings are identical")]
    Degenerate,
    #[error("dimension mismatch: model expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("smo did not converge after {iterations} iterations (gap {gap})")]
    Unconverged { iterations: usize, gap: f64 },
    #[error("validation set is empty")]
    EmptyValidation,
    #[error("class {0} is not known to the model")]
    UnknownClass(String),
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("malformed model: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (d * v)` where v is the mean per-coordinate variance of the
    /// training embeddings.
    Scale,
    Value(f64),
}

impl std::str::FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "scale" {
            return Ok(Gamma::Scale);
        }
        s.parse::<f64>()
            .ok()
            .filter(|g| *g > 0.0 && g.is_finite())
            .map(Gamma::Value)
            .ok_or_else(|| format!("gamma must be \"scale\" or a positive number, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmHyperParams {
    pub c: f64,
    pub gamma: Gamma,
    /// KKT violation tolerance for SMO.
    pub tolerance: f64,
    pub max_passes: usize,
    /// Kernel rows kept in the LRU cache per binary problem (0 disables it).
    pub cache_rows: usize,
}

impl Default for SvmHyperParams {
    fn default() -> Self {
        SvmHyperParams {
            c: 1.0,
            gamma: Gamma::Scale,
            tolerance: 1e-3,
            max_passes: smo::MAX_ITERATIONS,
            cache_rows: 1024,
        }
    }
}

impl SvmHyperParams {
    fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(SvmError::InvalidParams(format!("c must be positive, got {}", self.c)));
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(SvmError::InvalidParams(format!("gamma must be positive, got {g}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(SvmError::InvalidParams("tolerance must be positive".into()));
        }
        if self.max_passes == 0 {
            return Err(SvmError::InvalidParams("max_passes must be positive".into()));
        }
        Ok(())
    }
}

/// One pairwise classifier: positive decision values vote for
/// `class_pair.0`, negative for `class_pair.1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySvm {
    pub class_pair: (usize, usize),
    pub support_vectors: Vec<EmbeddingVector>,
    /// `alpha_i * y_i` per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub gamma: f64,
    /// Positions of the support vectors in the training corpus.
    pub support_indices: Vec<usize>,
}

impl BinarySvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, a)| a * kernel::rbf(sv.as_slice(), x, self.gamma))
            .sum::<f64>()
            + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub axis: Axis,
    /// Category indices (within `axis`) in canonical order.
    pub classes: Vec<usize>,
    pub binaries: Vec<BinarySvm>,
    pub training_dim: usize,
    pub gamma: f64,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    /// Winning category index within the model's axis.
    pub class: usize,
    /// Votes per model class, aligned with `SvmModel::classes`.
    pub votes: Vec<u32>,
}

fn axis_len(axis: Axis) -> usize {
    match axis {
        Axis::Race => Race::ALL.len(),
        Axis::Gender => Gender::ALL.len(),
        Axis::Label => 12,
    }
}

fn class_of(rec: &EmbeddingRecord, axis: Axis) -> Result<usize, SvmError> {
    let c = match axis {
        Axis::Race => rec.race.map(Category::index),
        Axis::Gender => rec.gender.map(Category::index),
        Axis::Label => return Err(SvmError::UnsupportedAxis(axis)),
    };
    c.ok_or_else(|| SvmError::Unlabeled(rec.id.clone(), axis))
}

fn class_name(axis: Axis, idx: usize) -> String {
    axis.category_names()
        .get(idx)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("#{idx}"))
}

/// `1 / (d * v)` with v the mean of the per-coordinate population variances.
pub fn scale_gamma(points: &[&[f64]]) -> Option<f64> {
    let n = points.len() as f64;
    let d = points.first()?.len();
    let mut var_sum = 0.0;
    for k in 0..d {
        let mean = points.iter().map(|p| p[k]).sum::<f64>() / n;
        var_sum += points.iter().map(|p| (p[k] - mean).powi(2)).sum::<f64>() / n;
    }
    let v = var_sum / d as f64;
    (v > 0.0).then(|| 1.0 / (d as f64 * v))
}

/// Trains one binary SVM per unordered class pair. Training is fully
/// deterministic; pairs are solved in parallel and collected in order.
pub fn train(records: &[EmbeddingRecord], axis: Axis, params: &SvmHyperParams) -> Result<SvmModel, SvmError> {
    params.validate()?;
    if axis == Axis::Label {
        return Err(SvmError::UnsupportedAxis(axis));
    }
    let labels: Vec<usize> = records.iter().map(|r| class_of(r, axis)).collect::<Result<_, _>>()?;
    let mut classes: Vec<usize> = labels.clone();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(SvmError::SingleClass(classes.len()));
    }
    let dim = records[0].embedding.dim();
    if let Some(r) = records.iter().find(|r| r.embedding.dim() != dim) {
        return Err(SvmError::DimensionMismatch {
            expected: dim,
            got: r.embedding.dim(),
        });
    }
    let points: Vec<&[f64]> = records.iter().map(|r| r.embedding.as_slice()).collect();
    if points.iter().all(|p| *p == points[0]) {
        return Err(SvmError::Degenerate);
    }
    let gamma = match params.gamma {
        Gamma::Value(g) => g,
        Gamma::Scale => scale_gamma(&points).ok_or(SvmError::Degenerate)?,
    };

    let pairs: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| classes[i + 1..].iter().map(move |&b| (a, b)))
        .collect();

    let binaries = pairs
        .par_iter()
        .map(|&(a, b)| {
            let idx: Vec<usize> = (0..records.len()).filter(|&i| labels[i] == a || labels[i] == b).collect();
            let sub: Vec<&[f64]> = idx.iter().map(|&i| points[i]).collect();
            let y: Vec<f64> = idx.iter().map(|&i| if labels[i] == a { 1.0 } else { -1.0 }).collect();
            let sol = smo::solve(&BinaryProblem {
                points: &sub,
                labels: &y,
                c: params.c,
                gamma,
                tolerance: params.tolerance,
                max_iterations: params.max_passes,
                cache_rows: params.cache_rows,
            })?;
            let mut bin = BinarySvm {
                class_pair: (a, b),
                support_vectors: Vec::new(),
                coefficients: Vec::new(),
                bias: -sol.rho,
                gamma,
                support_indices: Vec::new(),
            };
            for (k, &alpha) in sol.alpha.iter().enumerate() {
                if alpha > 0.0 {
                    bin.support_vectors.push(records[idx[k]].embedding.clone());
                    bin.coefficients.push(alpha * y[k]);
                    bin.support_indices.push(idx[k]);
                }
            }
            Ok(bin)
        })
        .collect::<Result<Vec<_>, SvmError>>()?;

    Ok(SvmModel {
        axis,
        classes,
        binaries,
        training_dim: dim,
        gamma,
        c: params.c,
    })
}

impl SvmModel {
    /// One-vs-one vote. Ties go to the class with the largest summed
    /// |decision value| over the binaries it won, then to canonical order.
    pub fn predict(&self, x: &EmbeddingVector) -> Result<Prediction, SvmError> {
        if x.dim() != self.training_dim {
            return Err(SvmError::DimensionMismatch {
                expected: self.training_dim,
                got: x.dim(),
            });
        }
        let k = self.classes.len();
        let pos = |c: usize| self.classes.iter().position(|&m| m == c).expect("binary class belongs to model");
        let mut votes = vec![0u32; k];
        let mut strength = vec![0.0f64; k];
        for b in &self.binaries {
            let f = b.decision(x.as_slice());
            let winner = if f >= 0.0 { pos(b.class_pair.0) } else { pos(b.class_pair.1) };
            votes[winner] += 1;
            strength[winner] += f.abs();
        }
        let mut best = 0;
        for i in 1..k {
            if votes[i] > votes[best] || (votes[i] == votes[best] && strength[i] > strength[best]) {
                best = i;
            }
        }
        Ok(Prediction {
            class: self.classes[best],
            votes,
        })
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|&c| class_name(self.axis, c)).collect()
    }

    pub fn predict_race(&self, x: &EmbeddingVector) -> Result<Race, SvmError> {
        if self.axis != Axis::Race {
            return Err(SvmError::UnsupportedAxis(self.axis));
        }
        Ok(Race::ALL[self.predict(x)?.class])
    }

    pub fn predict_gender(&self, x: &EmbeddingVector) -> Result<Gender, SvmError> {
        if self.axis != Axis::Gender {
            return Err(SvmError::UnsupportedAxis(self.axis));
        }
        Ok(Gender::ALL[self.predict(x)?.class])
    }

    /// Confusion matrix and macro metrics on a labeled validation set.
    pub fn evaluate(&self, validation: &[EmbeddingRecord]) -> Result<EvalMetrics, SvmError> {
        if validation.is_empty() {
            return Err(SvmError::EmptyValidation);
        }
        let k = self.classes.len();
        let mut confusion = vec![vec![0u64; k]; k];
        let pos = |c: usize| {
            self.classes
                .iter()
                .position(|&m| m == c)
                .ok_or_else(|| SvmError::UnknownClass(class_name(self.axis, c)))
        };
        for rec in validation {
            let truth = pos(class_of(rec, self.axis)?)?;
            let pred = pos(self.predict(&rec.embedding)?.class)?;
            confusion[truth][pred] += 1;
        }
        Ok(EvalMetrics::from_confusion(self.class_names(), confusion))
    }

    /// Largest KKT violation over all binaries, recomputed against the
    /// corpus the model was trained on.
    pub fn max_kkt_violation(&self, training: &[EmbeddingRecord]) -> Result<f64, SvmError> {
        let labels: Vec<usize> = training.iter().map(|r| class_of(r, self.axis)).collect::<Result<_, _>>()?;
        let mut worst: f64 = 0.0;
        for b in &self.binaries {
            let idx: Vec<usize> = (0..training.len())
                .filter(|&i| labels[i] == b.class_pair.0 || labels[i] == b.class_pair.1)
                .collect();
            let pts: Vec<&[f64]> = idx.iter().map(|&i| training[i].embedding.as_slice()).collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if labels[i] == b.class_pair.0 { 1.0 } else { -1.0 })
                .collect();
            let mut alpha = vec![0.0; idx.len()];
            for (&g, &coef) in b.support_indices.iter().zip(&b.coefficients) {
                let local = idx
                    .binary_search(&g)
                    .map_err(|_| SvmError::Malformed(format!("support index {g} outside its class pair")))?;
                alpha[local] = coef.abs();
            }
            worst = worst.max(kkt_max_violation(&pts, &y, &alpha, b.bias, self.c, b.gamma));
        }
        Ok(worst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelRepr::from(self)).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, SvmError> {
        let repr: ModelRepr = serde_json::from_str(s).map_err(|e| SvmError::Malformed(e.to_string()))?;
        SvmModel::try_from(repr)
    }
}

#[derive(Serialize, Deserialize)]
struct BinaryRepr {
    class_pair: [String; 2],
    support_vectors: Vec<Vec<f64>>,
    coefficients: Vec<f64>,
    bias: f64,
    gamma: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    support_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct ModelRepr {
    version: u32,
    axis: Axis,
    classes: Vec<String>,
    gamma: f64,
    c: f64,
    training_dim: usize,
    binaries: Vec<BinaryRepr>,
}

impl From<&SvmModel> for ModelRepr {
    fn from(m: &SvmModel) -> Self {
        ModelRepr {
            version: MODEL_VERSION,
            axis: m.axis,
            classes: m.class_names(),
            gamma: m.gamma,
            c: m.c,
            training_dim: m.training_dim,
            binaries: m
                .binaries
                .iter()
                .map(|b| BinaryRepr {
                    class_pair: [class_name(m.axis, b.class_pair.0), class_name(m.axis, b.class_pair.1)],
                    support_vectors: b.support_vectors.iter().map(|v| v.as_slice().to_vec()).collect(),
                    coefficients: b.coefficients.clone(),
                    bias: b.bias,
                    gamma: b.gamma,
                    support_indices: b.support_indices.clone(),
                })
                .collect(),
        }
    }
}

impl TryFrom<ModelRepr> for SvmModel {
    type Error = SvmError;

    fn try_from(r: ModelRepr) -> Result<Self, SvmError> {
        if r.version != MODEL_VERSION {
            return Err(SvmError::Version(r.version));
        }
        let names = r.axis.category_names();
        let parse = |s: &str| {
            names
                .iter()
                .position(|n| *n == s)
                .ok_or_else(|| SvmError::UnknownClass(s.to_string()))
        };
        if r.axis == Axis::Label {
            return Err(SvmError::UnsupportedAxis(r.axis));
        }
        let classes: Vec<usize> = r.classes.iter().map(|s| parse(s)).collect::<Result<_, _>>()?;
        let k = classes.len();
        if k < 2 || r.binaries.len() != k * (k - 1) / 2 {
            return Err(SvmError::Malformed(format!(
                "{} classes need {} binaries, found {}",
                k,
                k * k.saturating_sub(1) / 2,
                r.binaries.len()
            )));
        }
        let mut binaries = Vec::with_capacity(r.binaries.len());
        for b in r.binaries {
            if b.support_vectors.len() != b.coefficients.len() {
                return Err(SvmError::Malformed("support vector / coefficient count mismatch".into()));
            }
            let support_vectors = b
                .support_vectors
                .into_iter()
                .map(|v| {
                    if v.len() != r.training_dim {
                        return Err(SvmError::DimensionMismatch {
                            expected: r.training_dim,
                            got: v.len(),
                        });
                    }
                    EmbeddingVector::new(v).map_err(|e| SvmError::Malformed(e.to_string()))
                })
                .collect::<Result<_, _>>()?;
            binaries.push(BinarySvm {
                class_pair: (parse(&b.class_pair[0])?, parse(&b.class_pair[1])?),
                support_vectors,
                coefficients: b.coefficients,
                bias: b.bias,
                gamma: b.gamma,
                support_indices: b.support_indices,
            });
        }
        debug_assert!(classes.iter().all(|&c| c < axis_len(r.axis)));
        Ok(SvmModel {
            axis: r.axis,
            classes,
            binaries,
            training_dim: r.training_dim,
            gamma: r.gamma,
            c: r.c,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demographic::DemographicLabel;

    fn rec(id: usize, x: &[f64], race: Race) -> EmbeddingRecord {
        EmbeddingRecord::labeled(
            format!("r{id}"),
            EmbeddingVector::new(x.to_vec()).unwrap(),
            DemographicLabel::new(race, Gender::Female),
        )
    }

    fn params(c: f64, gamma: f64) -> SvmHyperParams {
        SvmHyperParams {
            c,
            gamma: Gamma::Value(gamma),
            ..Default::default()
        }
    }

    #[test]
    fn two_point_midpoint() {
        let data = vec![rec(0, &[1e-300, 0.0], Race::Asian), rec(1, &[2.0, 0.0], Race::Black)];
        let m = train(&data, Axis::Race, &params(1.0, 1.0)).unwrap();
        assert_eq!(m.binaries.len(), 1);
        let b = &m.binaries[0];
        assert!(b.decision(&[1.0, 0.0]).abs() < 1e-9);
        assert!(b.decision(&[0.0, 0.0]) > 0.0);
        assert!(b.decision(&[2.0, 0.0]) < 0.0);
        assert_eq!(m.predict_race(&data[0].embedding).unwrap(), Race::Asian);
        assert_eq!(m.predict_race(&data[1].embedding).unwrap(), Race::Black);
    }

    #[test]
    fn xor_is_separated() {
        let pts = [([0.5, 0.5], Race::Asian), ([1.5, 1.5], Race::Asian), ([0.5, 1.5], Race::Black), ([1.5, 0.5], Race::Black)];
        let data: Vec<_> = pts.iter().enumerate().map(|(i, (x, r))| rec(i, x, *r)).collect();
        let m = train(&data, Axis::Race, &params(10.0, 1.0)).unwrap();
        for r in &data {
            assert_eq!(m.predict_race(&r.embedding).unwrap(), r.race.unwrap());
        }
        assert!(m.max_kkt_violation(&data).unwrap() <= 1e-3 + 1e-12);
    }

    #[test]
    fn training_errors() {
        let one = vec![rec(0, &[1.0], Race::Asian), rec(1, &[2.0], Race::Asian)];
        assert_eq!(train(&one, Axis::Race, &params(1.0, 1.0)).unwrap_err(), SvmError::SingleClass(1));
        let same = vec![rec(0, &[1.0, 1.0], Race::Asian), rec(1, &[1.0, 1.0], Race::White)];
        assert_eq!(
            train(&same, Axis::Race, &SvmHyperParams::default()).unwrap_err(),
            SvmError::Degenerate
        );
        let mut unl = one.clone();
        unl[0].gender = None;
        assert!(matches!(train(&unl, Axis::Gender, &params(1.0, 1.0)), Err(SvmError::Unlabeled(..))));
        assert!(matches!(
            train(&one, Axis::Race, &params(-1.0, 1.0)),
            Err(SvmError::InvalidParams(_))
        ));
    }

    #[test]
    fn scale_gamma_uses_mean_coordinate_variance() {
        let a = [0.0, 10.0];
        let b = [2.0, 10.0];
        // variances 1 and 0, mean 0.5, d = 2
        assert_eq!(scale_gamma(&[&a, &b]), Some(1.0));
    }

    #[test]
    fn hand_built_three_class_vote_matches_enumeration() {
        // Binaries with constant decision values (zero coefficients, chosen bias).
        let sv = EmbeddingVector::new(vec![1.0]).unwrap();
        let mk = |a, b, bias| BinarySvm {
            class_pair: (a, b),
            support_vectors: vec![sv.clone()],
            coefficients: vec![0.0],
            bias,
            gamma: 1.0,
            support_indices: vec![],
        };
        let signs = [-1.0, 1.0];
        for &s01 in &signs {
            for &s02 in &signs {
                for &s12 in &signs {
                    let model = SvmModel {
                        axis: Axis::Race,
                        classes: vec![0, 1, 2],
                        binaries: vec![mk(0, 1, s01 * 0.5), mk(0, 2, s02 * 0.25), mk(1, 2, s12 * 0.75)],
                        training_dim: 1,
                        gamma: 1.0,
                        c: 1.0,
                    };
                    // Enumeration oracle.
                    let mut votes = [0u32; 3];
                    let mut strength = [0.0; 3];
                    for (a, b, f) in [(0, 1, s01 * 0.5), (0, 2, s02 * 0.25), (1, 2, s12 * 0.75)] {
                        let w = if f >= 0.0 { a } else { b };
                        votes[w] += 1;
                        strength[w] += f64::abs(f);
                    }
                    let best = (0..3)
                        .max_by(|&i, &j| {
                            votes[i]
                                .cmp(&votes[j])
                                .then(strength[i].partial_cmp(&strength[j]).unwrap())
                                .then(j.cmp(&i))
                        })
                        .unwrap();
                    let p = model.predict(&sv).unwrap();
                    assert_eq!(p.class, best);
                    assert_eq!(p.votes, votes.to_vec());
                }
            }
        }
    }

    #[test]
    fn symmetric_center_is_deterministic() {
        let data = vec![
            rec(0, &[-1.0, 0.0], Race::Asian),
            rec(1, &[-1.2, 0.1], Race::Asian),
            rec(2, &[1.0, 0.0], Race::Black),
            rec(3, &[1.2, 0.1], Race::Black),
            rec(4, &[0.0, 9.0], Race::White),
            rec(5, &[0.1, 9.2], Race::White),
        ];
        let m = train(&data, Axis::Race, &params(1.0, 0.5)).unwrap();
        let x = EmbeddingVector::new(vec![0.0, 0.05]).unwrap();
        let first = m.predict(&x).unwrap();
        for _ in 0..10 {
            assert_eq!(m.predict(&x).unwrap(), first);
        }
    }

    #[test]
    fn zero_alpha_duplicates_do_not_change_predictions() {
        let data: Vec<_> = (0..12)
            .map(|i| {
                let r = Race::ALL[i % 3];
                let off = (i % 3) as f64 * 2.0;
                rec(i, &[off + 0.1 * i as f64 + 1.0, -off], r)
            })
            .collect();
        let m = train(&data, Axis::Race, &params(1.0, 0.5)).unwrap();
        let mut padded = m.clone();
        for b in &mut padded.binaries {
            let sv = b.support_vectors[0].clone();
            b.support_vectors.push(sv);
            b.coefficients.push(0.0);
        }
        for r in &data {
            assert_eq!(m.predict(&r.embedding).unwrap(), padded.predict(&r.embedding).unwrap());
        }
    }

    #[test]
    fn model_json_round_trip_and_dimension_check() {
        let data = vec![rec(0, &[0.0, 1.0], Race::Asian), rec(1, &[2.0, 1.0], Race::Black)];
        let m = train(&data, Axis::Race, &params(1.0, 1.0)).unwrap();
        let back = SvmModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
        let x = EmbeddingVector::new(vec![1.0]).unwrap();
        assert!(matches!(m.predict(&x), Err(SvmError::DimensionMismatch { expected: 2, got: 1 })));
        let bad = m.to_json().replace("\"version\": 1", "\"version\": 9");
        assert_eq!(SvmModel::from_json(&bad).unwrap_err(), SvmError::Version(9));
    }

    #[test]
    fn evaluate_identity_confusion() {
        let data: Vec<_> = (0..6).map(|i| rec(i, &[i as f64 * 5.0 + 1.0], Race::ALL[i % 2])).collect();
        let data: Vec<_> = data
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r.race = Some(if i < 3 { Race::Asian } else { Race::Black });
                r
            })
            .collect();
        let m = train(&data, Axis::Race, &params(10.0, 0.5)).unwrap();
        let e = m.evaluate(&data).unwrap();
        assert_eq!(e.accuracy, 1.0);
        assert_eq!(e.confusion, vec![vec![3, 0], vec![0, 3]]);
        assert_eq!(m.evaluate(&[]).unwrap_err(), SvmError::EmptyValidation);
    }

    #[test]
    fn gaussian_blobs_training_accuracy() {
        use rand::{Rng, SeedableRng};
        // Class means 3 sigma apart along the axes, sigma being the RMS
        // radius of each blob.
        let d = 16;
        let sd = 1.0 / (d as f64).sqrt();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut data = Vec::new();
        for &r in Race::ALL {
            for _ in 0..120 {
                let x: Vec<f64> = (0..d)
                    .map(|i| {
                        let z: f64 = rng.sample(rand_distr::StandardNormal);
                        let mean = if i == r.index() { 3.0 } else { 0.0 };
                        mean + sd * z
                    })
                    .collect();
                data.push(rec(data.len(), &x, r));
            }
        }
        let m = train(&data, Axis::Race, &SvmHyperParams::default()).unwrap();
        assert!(m.evaluate(&data).unwrap().accuracy >= 0.99);
        assert!(m.max_kkt_violation(&data).unwrap() <= 1e-3 + 1e-12);
    }
}
