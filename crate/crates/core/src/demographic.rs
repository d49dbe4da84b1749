//! Demographic taxonomy, distributions over it, and the scalar bias metrics
//! used by every report.
//!
//! The taxonomy is the merged six-race set crossed with two genders. Category
//! order is fixed (alphabetical) so that every serialized artifact is
//! deterministic.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::Hash;
use std::marker::PhantomData;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

/// Tolerance on the sum of a distribution's probabilities.
pub const SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DemographicError {
    #[error("no observations")]
    NoObservations,
    #[error("probabilities sum to {0}, expected 1")]
    BadSum(f64),
    #[error("probability {value} for {category} is outside [0, 1]")]
    OutOfRange { category: String, value: f64 },
    #[error("expected {expected} probabilities, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("unknown {axis} category {name:?}")]
    UnknownCategory { axis: Axis, name: String },
    #[error("axis mismatch: expected {expected}, found {found}")]
    AxisMismatch { expected: Axis, found: Axis },
    #[error("impossible observation: {count} counts in zero-probability cell {category}")]
    ImpossibleObservation { category: String, count: u64 },
    #[error("count table total {total} does not equal the sum of its counts {sum}")]
    InconsistentTotal { total: u64, sum: u64 },
}

/// The label dimension a distribution or classifier is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Race,
    Gender,
    /// The joint race x gender cells.
    Label,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Race => "race",
            Axis::Gender => "gender",
            Axis::Label => "label",
        }
    }

    /// Category names of this axis in canonical order.
    pub fn category_names(self) -> Vec<&'static str> {
        match self {
            Axis::Race => Race::ALL.iter().map(|c| c.name()).collect(),
            Axis::Gender => Gender::ALL.iter().map(|c| c.name()).collect(),
            Axis::Label => DemographicLabel::ALL.iter().map(|c| c.name()).collect(),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Axis {
    type Err = DemographicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "race" => Ok(Axis::Race),
            "gender" => Ok(Axis::Gender),
            "label" => Ok(Axis::Label),
            _ => Err(DemographicError::UnknownCategory {
                axis: Axis::Label,
                name: s.to_string(),
            }),
        }
    }
}

/// A finite, totally ordered set of categories forming one axis.
pub trait Category: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync + 'static {
    const AXIS: Axis;
    const ALL: &'static [Self];

    fn index(self) -> usize;
    fn name(self) -> &'static str;
    fn parse(s: &str) -> Option<Self>;

    fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// Lowercases and drops everything that is not an ASCII letter, so that
/// "Middle Eastern", "middle_eastern" and "MiddleEastern" compare equal.
pub(crate) fn normalize_name(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Race {
    Asian,
    Black,
    Indian,
    Latinx,
    MiddleEastern,
    White,
}

impl Race {
    /// Human-readable form used when writing prompts.
    pub fn prompt_word(self) -> &'static str {
        match self {
            Race::Asian => "Asian",
            Race::Black => "Black",
            Race::Indian => "Indian",
            Race::Latinx => "Latinx",
            Race::MiddleEastern => "Middle Eastern",
            Race::White => "White",
        }
    }
}

impl Category for Race {
    const AXIS: Axis = Axis::Race;
    const ALL: &'static [Self] = &[
        Race::Asian,
        Race::Black,
        Race::Indian,
        Race::Latinx,
        Race::MiddleEastern,
        Race::White,
    ];

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Race::Asian => "Asian",
            Race::Black => "Black",
            Race::Indian => "Indian",
            Race::Latinx => "Latinx",
            Race::MiddleEastern => "MiddleEastern",
            Race::White => "White",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match normalize_name(s).as_str() {
            "asian" => Some(Race::Asian),
            "black" => Some(Race::Black),
            "indian" => Some(Race::Indian),
            "latinx" | "latino" | "latina" | "hispanic" | "latinohispanic" | "latinoorhispanic" => {
                Some(Race::Latinx)
            }
            "middleeastern" | "me" => Some(Race::MiddleEastern),
            "white" => Some(Race::White),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gender {
    Female,
    Male,
}

impl Gender {
    pub fn prompt_word(self) -> &'static str {
        match self {
            Gender::Female => "female",
            Gender::Male => "male",
        }
    }
}

impl Category for Gender {
    const AXIS: Axis = Axis::Gender;
    const ALL: &'static [Self] = &[Gender::Female, Gender::Male];

    fn index(self) -> usize {
        self as usize
    }

    fn name(self) -> &'static str {
        match self {
            Gender::Female => "Female",
            Gender::Male => "Male",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match normalize_name(s).as_str() {
            "female" | "f" => Some(Gender::Female),
            "male" | "m" => Some(Gender::Male),
            _ => None,
        }
    }
}

/// One (race, gender) cell of the 6 x 2 taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DemographicLabel {
    pub race: Race,
    pub gender: Gender,
}

macro_rules! label {
    ($r:ident, $g:ident) => {
        DemographicLabel {
            race: Race::$r,
            gender: Gender::$g,
        }
    };
}

const LABEL_NAMES: [&str; 12] = [
    "Asian/Female",
    "Asian/Male",
    "Black/Female",
    "Black/Male",
    "Indian/Female",
    "Indian/Male",
    "Latinx/Female",
    "Latinx/Male",
    "MiddleEastern/Female",
    "MiddleEastern/Male",
    "White/Female",
    "White/Male",
];

impl DemographicLabel {
    pub const fn new(race: Race, gender: Gender) -> Self {
        DemographicLabel { race, gender }
    }
}

impl Category for DemographicLabel {
    const AXIS: Axis = Axis::Label;
    const ALL: &'static [Self] = &[
        label!(Asian, Female),
        label!(Asian, Male),
        label!(Black, Female),
        label!(Black, Male),
        label!(Indian, Female),
        label!(Indian, Male),
        label!(Latinx, Female),
        label!(Latinx, Male),
        label!(MiddleEastern, Female),
        label!(MiddleEastern, Male),
        label!(White, Female),
        label!(White, Male),
    ];

    fn index(self) -> usize {
        self.race.index() * Gender::ALL.len() + self.gender.index()
    }

    fn name(self) -> &'static str {
        LABEL_NAMES[self.index()]
    }

    fn parse(s: &str) -> Option<Self> {
        let (r, g) = s.split_once('/')?;
        Some(DemographicLabel::new(Race::parse(r)?, Gender::parse(g)?))
    }
}

impl fmt::Display for Race {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for DemographicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

macro_rules! category_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.name())
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                <$t as Category>::parse(&s).ok_or_else(|| {
                    D::Error::custom(format!("unknown {} category {:?}", <$t>::AXIS, s))
                })
            }
        }
    };
}

category_serde!(Race);
category_serde!(Gender);
category_serde!(DemographicLabel);

/// A probability vector over every category of one axis.
#[derive(Clone, PartialEq)]
pub struct DemographicDistribution<C: Category> {
    probs: Vec<f64>,
    _axis: PhantomData<C>,
}

pub type RaceDistribution = DemographicDistribution<Race>;
pub type GenderDistribution = DemographicDistribution<Gender>;
pub type LabelDistribution = DemographicDistribution<DemographicLabel>;

impl<C: Category> fmt::Debug for DemographicDistribution<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (c, p) in self.iter() {
            m.entry(&c.name(), &p);
        }
        m.finish()
    }
}

impl<C: Category> DemographicDistribution<C> {
    /// Builds a distribution from probabilities in canonical category order.
    pub fn from_vec(probs: Vec<f64>) -> Result<Self, DemographicError> {
        if probs.len() != C::ALL.len() {
            return Err(DemographicError::WrongLength {
                expected: C::ALL.len(),
                got: probs.len(),
            });
        }
        for (c, &p) in C::ALL.iter().zip(&probs) {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(DemographicError::OutOfRange {
                    category: c.name().to_string(),
                    value: p,
                });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DemographicError::BadSum(sum));
        }
        Ok(DemographicDistribution {
            probs,
            _axis: PhantomData,
        })
    }

    /// Builds a distribution from (category, probability) pairs; missing
    /// categories get zero.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, DemographicError>
    where
        I: IntoIterator<Item = (C, f64)>,
    {
        let mut probs = vec![0.0; C::ALL.len()];
        for (c, p) in pairs {
            probs[c.index()] += p;
        }
        Self::from_vec(probs)
    }

    /// Normalizes nonnegative weights (e.g. rounded percentages) to sum to one.
    pub fn from_weights(weights: &[f64]) -> Result<Self, DemographicError> {
        if weights.len() != C::ALL.len() {
            return Err(DemographicError::WrongLength {
                expected: C::ALL.len(),
                got: weights.len(),
            });
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DemographicError::BadSum(total));
        }
        Self::from_vec(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform() -> Self {
        let k = C::ALL.len();
        DemographicDistribution {
            probs: vec![1.0 / k as f64; k],
            _axis: PhantomData,
        }
    }

    pub fn degenerate(c: C) -> Self {
        let mut probs = vec![0.0; C::ALL.len()];
        probs[c.index()] = 1.0;
        DemographicDistribution {
            probs,
            _axis: PhantomData,
        }
    }

    pub fn from_counts(counts: &CountTable<C>) -> Result<Self, DemographicError> {
        let total = counts.total();
        if total == 0 {
            return Err(DemographicError::NoObservations);
        }
        let n = total as f64;
        Ok(DemographicDistribution {
            probs: counts.counts.iter().map(|&c| c as f64 / n).collect(),
            _axis: PhantomData,
        })
    }

    pub fn axis(&self) -> Axis {
        C::AXIS
    }

    pub fn get(&self, c: C) -> f64 {
        self.probs[c.index()]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (C, f64)> + '_ {
        C::ALL.iter().copied().zip(self.probs.iter().copied())
    }
}

impl LabelDistribution {
    pub fn race_marginal(&self) -> RaceDistribution {
        let mut probs = vec![0.0; Race::ALL.len()];
        for (l, p) in self.iter() {
            probs[l.race.index()] += p;
        }
        DemographicDistribution {
            probs,
            _axis: PhantomData,
        }
    }

    pub fn gender_marginal(&self) -> GenderDistribution {
        let mut probs = vec![0.0; Gender::ALL.len()];
        for (l, p) in self.iter() {
            probs[l.gender.index()] += p;
        }
        DemographicDistribution {
            probs,
            _axis: PhantomData,
        }
    }

    /// Joint distribution with independent race and gender.
    pub fn independent(race: &RaceDistribution, gender: &GenderDistribution) -> Self {
        let probs = DemographicLabel::ALL
            .iter()
            .map(|l| race.get(l.race) * gender.get(l.gender))
            .collect();
        DemographicDistribution {
            probs,
            _axis: PhantomData,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    axis: Axis,
    probabilities: BTreeMap<String, f64>,
}

impl<C: Category> Serialize for DemographicDistribution<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DistributionRepr {
            axis: C::AXIS,
            probabilities: self.iter().map(|(c, p)| (c.name().to_string(), p)).collect(),
        }
        .serialize(s)
    }
}

impl<'de, C: Category> Deserialize<'de> for DemographicDistribution<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = DistributionRepr::deserialize(d)?;
        if repr.axis != C::AXIS {
            return Err(D::Error::custom(DemographicError::AxisMismatch {
                expected: C::AXIS,
                found: repr.axis,
            }));
        }
        let mut pairs = Vec::with_capacity(repr.probabilities.len());
        for (name, p) in repr.probabilities {
            let c = C::parse(&name).ok_or_else(|| {
                D::Error::custom(DemographicError::UnknownCategory {
                    axis: C::AXIS,
                    name,
                })
            })?;
            pairs.push((c, p));
        }
        Self::from_pairs(pairs).map_err(D::Error::custom)
    }
}

/// Raw per-category counts.
#[derive(Clone, PartialEq, Eq)]
pub struct CountTable<C: Category> {
    counts: Vec<u64>,
    _axis: PhantomData<C>,
}

impl<C: Category> fmt::Debug for CountTable<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (c, n) in self.iter() {
            m.entry(&c.name(), &n);
        }
        m.finish()
    }
}

impl<C: Category> Default for CountTable<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Category> CountTable<C> {
    pub fn new() -> Self {
        CountTable {
            counts: vec![0; C::ALL.len()],
            _axis: PhantomData,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Result<Self, DemographicError> {
        if counts.len() != C::ALL.len() {
            return Err(DemographicError::WrongLength {
                expected: C::ALL.len(),
                got: counts.len(),
            });
        }
        Ok(CountTable {
            counts,
            _axis: PhantomData,
        })
    }

    pub fn from_labels<'a, I>(labels: I) -> Self
    where
        I: IntoIterator<Item = &'a C>,
    {
        let mut t = Self::new();
        for &c in labels {
            t.add(c);
        }
        t
    }

    pub fn add(&mut self, c: C) {
        self.counts[c.index()] += 1;
    }

    pub fn add_n(&mut self, c: C, n: u64) {
        self.counts[c.index()] += n;
    }

    pub fn get(&self, c: C) -> u64 {
        self.counts[c.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (C, u64)> + '_ {
        C::ALL.iter().copied().zip(self.counts.iter().copied())
    }
}

impl CountTable<DemographicLabel> {
    pub fn race_counts(&self) -> CountTable<Race> {
        let mut t = CountTable::new();
        for (l, n) in self.iter() {
            t.add_n(l.race, n);
        }
        t
    }

    pub fn gender_counts(&self) -> CountTable<Gender> {
        let mut t = CountTable::new();
        for (l, n) in self.iter() {
            t.add_n(l.gender, n);
        }
        t
    }
}

#[derive(Serialize, Deserialize)]
struct CountRepr {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl<C: Category> Serialize for CountTable<C> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CountRepr {
            counts: self.iter().map(|(c, n)| (c.name().to_string(), n)).collect(),
            total: self.total(),
        }
        .serialize(s)
    }
}

impl<'de, C: Category> Deserialize<'de> for CountTable<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CountRepr::deserialize(d)?;
        let mut t = CountTable::new();
        for (name, n) in repr.counts {
            let c = C::parse(&name).ok_or_else(|| {
                D::Error::custom(DemographicError::UnknownCategory {
                    axis: C::AXIS,
                    name,
                })
            })?;
            t.add_n(c, n);
        }
        if t.total() != repr.total {
            return Err(D::Error::custom(DemographicError::InconsistentTotal {
                total: repr.total,
                sum: t.total(),
            }));
        }
        Ok(t)
    }
}

/// Empirical proportions of `labels`.
pub fn estimate_distribution<C: Category>(
    labels: &[C],
) -> Result<DemographicDistribution<C>, DemographicError> {
    DemographicDistribution::from_counts(&CountTable::from_labels(labels))
}

/// Population standard deviation of the category shares, in percentage
/// points. Zero exactly at uniformity.
pub fn bias_sigma<C: Category>(dist: &DemographicDistribution<C>) -> f64 {
    let k = dist.probs.len() as f64;
    let mean = 100.0 / k;
    let ss: f64 = dist
        .probs
        .iter()
        .map(|p| {
            let d = p * 100.0 - mean;
            d * d
        })
        .sum();
    (ss / k).sqrt()
}

/// Half the L1 distance between two distributions on the same axis.
pub fn total_variation<C: Category>(
    p: &DemographicDistribution<C>,
    q: &DemographicDistribution<C>,
) -> f64 {
    let l1: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum();
    (0.5 * l1).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson chi-square goodness of fit of `observed` against `target`.
///
/// Cells with zero target probability and zero count are left out of both
/// the statistic and the degrees of freedom.
pub fn chi_square_gof<C: Category>(
    observed: &CountTable<C>,
    target: &DemographicDistribution<C>,
) -> Result<GoodnessOfFit, DemographicError> {
    let total = observed.total();
    if total == 0 {
        return Err(DemographicError::NoObservations);
    }
    let n = total as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    for ((c, count), p) in observed.iter().zip(target.probs.iter().copied()) {
        if p == 0.0 {
            if count > 0 {
                return Err(DemographicError::ImpossibleObservation {
                    category: c.name().to_string(),
                    count,
                });
            }
            continue;
        }
        cells += 1;
        let expected = n * p;
        let d = count as f64 - expected;
        statistic += d * d / expected;
    }
    let dof = cells.saturating_sub(1);
    Ok(GoodnessOfFit {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof),
    })
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(statistic: f64, dof: usize) -> f64 {
    if dof == 0 || statistic <= 0.0 {
        return 1.0;
    }
    gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
}
