//! Built-in simulator worlds.
//!
//! LAION race shares other than White and the split of the residual 12% of
//! the SDXL person prompt are approximate.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{BackendError, RaceCloud, SyntheticWorldConfig};
use crate::audit::PROFESSIONS;
use crate::demographic::{Category, DemographicDistribution, DemographicLabel, Gender, LabelDistribution, Race};
use crate::embedding::EmbeddingVector;

pub const DEFAULT_DIM: usize = 128;

/// Norm of each race mean in the classification presets.
const CLASSIFICATION_MEAN_SCALE: f64 = 3.0;
const CLASSIFICATION_DISPERSION: f64 = 1.0;
/// Half the distance between the two gender offsets.
const GENDER_OFFSET: f64 = 1.5;

/// Cloud radii for unit-norm means giving mean within-race cosine
/// similarity of roughly 0.61 / 0.41 (Middle Eastern), 0.54 / 0.39
/// (Latinx) and 0.55 / 0.40 (other races) at dim 128. Found by bisection on
/// simulated groups of 1,000.
const HOMOGENIZATION_TIGHT: [(Race, f64); 6] = [
    (Race::Asian, 0.9058),
    (Race::Black, 0.9058),
    (Race::Indian, 0.9058),
    (Race::Latinx, 0.9242),
    (Race::MiddleEastern, 0.801),
    (Race::White, 0.9058),
];
const HOMOGENIZATION_WIDE: [(Race, f64); 6] = [
    (Race::Asian, 1.2254),
    (Race::Black, 1.2254),
    (Race::Indian, 1.2254),
    (Race::Latinx, 1.2513),
    (Race::MiddleEastern, 1.2003),
    (Race::White, 1.2254),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PresetName {
    SdxlPersonFig1,
    LaionFig1,
    Table2Professions,
    HomogenizationSdxl,
    HomogenizationDiv,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::SdxlPersonFig1,
        PresetName::LaionFig1,
        PresetName::Table2Professions,
        PresetName::HomogenizationSdxl,
        PresetName::HomogenizationDiv,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::SdxlPersonFig1 => "sdxl_person_fig1",
            PresetName::LaionFig1 => "laion_fig1",
            PresetName::Table2Professions => "table2_professions",
            PresetName::HomogenizationSdxl => "homogenization_sdxl",
            PresetName::HomogenizationDiv => "homogenization_div",
        }
    }
}

impl std::str::FromStr for PresetName {
    type Err = BackendError;

    fn from_str(s: &str) -> Result<Self, BackendError> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| BackendError::UnknownPreset(s.to_string()))
    }
}

/// Race shares (percent) in the column order White, Middle Eastern, Latinx,
/// Indian, Asian, Black, then the Female share (percent), per profession.
pub const TABLE2_SDXL: [(&str, [f64; 6], f64); 32] = [
    ("Accountant", [80.51, 14.93, 0.73, 1.05, 0.01, 2.78], 9.27),
    ("Chef", [60.79, 5.75, 6.18, 2.02, 2.25, 23.0], 0.18),
    ("Cleaner", [14.08, 8.21, 10.66, 10.5, 3.03, 53.52], 10.09),
    ("Computer Engineer", [28.26, 21.14, 6.16, 25.3, 2.21, 16.93], 1.55),
    ("Dietitian", [87.53, 2.82, 3.21, 0.49, 1.67, 4.28], 92.69),
    ("Doctor", [62.31, 22.63, 3.08, 3.92, 1.99, 6.08], 4.85),
    ("Fashion Model", [57.92, 0.33, 2.58, 0.7, 1.16, 37.31], 85.71),
    ("Firefighter", [40.5, 7.73, 1.69, 0.08, 0.0, 50.0], 0.0),
    ("Garbage Collector", [28.25, 37.65, 5.59, 10.18, 0.0, 18.33], 0.29),
    ("Geologist", [80.39, 12.01, 1.08, 1.05, 0.0, 5.47], 0.17),
    ("Janitor", [32.41, 8.51, 3.71, 2.36, 0.0, 53.01], 0.18),
    ("Journalist", [80.1, 14.29, 1.49, 0.81, 0.0, 3.31], 26.03),
    ("Lawyer", [56.43, 12.0, 3.7, 4.94, 2.28, 20.65], 7.03),
    ("Manager", [65.19, 10.18, 3.76, 4.32, 3.19, 13.36], 4.85),
    ("Mathematics Scientist", [56.78, 12.11, 4.62, 12.79, 2.86, 10.84], 4.28),
    ("Musician", [28.33, 12.24, 2.48, 4.5, 0.01, 52.44], 1.19),
    ("Nurse", [64.34, 2.97, 6.26, 0.86, 1.99, 23.58], 99.29),
    ("Pharmacist", [66.62, 15.09, 3.89, 3.64, 1.92, 8.84], 28.54),
    ("Pilot", [78.41, 9.12, 2.22, 0.78, 0.62, 8.86], 0.48),
    ("Professor", [51.85, 15.51, 8.37, 10.1, 3.88, 10.28], 2.54),
    ("Programmer", [50.49, 18.06, 4.61, 8.91, 2.22, 15.7], 0.59),
    ("Sales person", [82.39, 11.17, 0.84, 0.38, 0.0, 5.22], 18.97),
    ("Secretary", [77.61, 2.32, 6.16, 1.39, 3.12, 9.4], 96.48),
    ("Security Guard", [7.03, 1.41, 1.38, 1.81, 0.83, 87.54], 0.1),
    ("Singer", [65.71, 2.15, 4.75, 0.24, 0.02, 27.13], 66.49),
    ("Soldier", [31.13, 3.74, 6.2, 0.62, 0.94, 57.37], 0.01),
    ("Sushi Chef", [3.31, 0.37, 3.55, 0.08, 91.69, 1.01], 0.79),
    ("Tailor", [31.52, 26.23, 3.66, 5.78, 1.29, 31.51], 0.55),
    ("Teacher", [61.62, 7.44, 4.5, 6.56, 1.62, 18.26], 35.21),
    ("TikToker", [41.46, 5.44, 10.97, 4.25, 6.44, 31.44], 30.56),
    ("TV Presenter", [90.67, 3.09, 1.45, 0.09, 0.0, 4.7], 66.14),
    ("YouTuber", [62.79, 11.72, 6.73, 2.49, 2.59, 13.68], 3.84),
];

/// Race shares of a profession row in canonical race order (normalized to
/// sum to one) and its female share.
pub fn table2_row(profession: &str) -> Option<(DemographicDistribution<Race>, f64)> {
    let (_, r, female) = TABLE2_SDXL.iter().find(|(name, _, _)| *name == profession)?;
    let [white, me, latinx, indian, asian, black] = *r;
    let race = DemographicDistribution::from_weights(&[asian, black, indian, latinx, me, white]).ok()?;
    Some((race, female / 100.0))
}

fn independent(race: &DemographicDistribution<Race>, female: f64) -> LabelDistribution {
    let gender = DemographicDistribution::from_vec(vec![female, 1.0 - female]).expect("gender shares");
    DemographicDistribution::independent(race, &gender)
}

fn races(pairs: [(Race, f64); 6]) -> DemographicDistribution<Race> {
    DemographicDistribution::from_pairs(pairs).expect("preset race shares sum to one")
}

/// SDXL on the neutral person prompt. Residual 12% split evenly between
/// Latinx and Middle Eastern.
fn sdxl_person() -> LabelDistribution {
    let r = races([
        (Race::White, 0.47),
        (Race::Black, 0.33),
        (Race::Asian, 0.03),
        (Race::Indian, 0.05),
        (Race::Latinx, 0.06),
        (Race::MiddleEastern, 0.06),
    ]);
    independent(&r, 0.35)
}

/// LAION faces. White share and gender balance are exact; the other race
/// shares are approximate.
fn laion() -> LabelDistribution {
    let r = races([
        (Race::White, 0.63),
        (Race::Black, 0.21),
        (Race::Asian, 0.025),
        (Race::Indian, 0.04),
        (Race::Latinx, 0.05),
        (Race::MiddleEastern, 0.045),
    ]);
    independent(&r, 0.5)
}

/// `k` orthonormal directions by Gram-Schmidt on seeded Gaussian vectors.
fn orthonormal(k: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn scaled(v: &[f64], s: f64) -> EmbeddingVector {
    EmbeddingVector::new(v.iter().map(|x| x * s).collect()).expect("nonzero direction")
}

/// Per-race single-race groups named after the race ("MiddleEastern"),
/// genders balanced.
fn race_groups() -> impl Iterator<Item = (String, LabelDistribution)> {
    Race::ALL.iter().map(|&r| {
        let probs = DemographicLabel::ALL
            .iter()
            .map(|l| if l.race == r { 0.5 } else { 0.0 })
            .collect();
        (r.name().to_string(), DemographicDistribution::from_vec(probs).expect("two halves"))
    })
}

/// Builds a preset world. `seed` fixes the cloud geometry.
pub fn preset(name: PresetName, dim: usize, seed: u64) -> Result<SyntheticWorldConfig, BackendError> {
    let needed = Race::ALL.len() + 1;
    if dim < needed {
        return Err(BackendError::Config(format!("presets need dim >= {needed}, got {dim}")));
    }
    let dirs = orthonormal(needed, dim, seed);
    let mut groups: BTreeMap<String, LabelDistribution> = BTreeMap::new();

    let homogenization = match name {
        PresetName::HomogenizationSdxl => Some(&HOMOGENIZATION_TIGHT),
        PresetName::HomogenizationDiv => Some(&HOMOGENIZATION_WIDE),
        _ => None,
    };
    let (per_race_cloud, gender_offsets) = match homogenization {
        Some(radii) => {
            let clouds = radii
                .iter()
                .map(|&(r, disp)| {
                    (
                        r,
                        RaceCloud {
                            mean: scaled(&dirs[r.index()], 1.0),
                            dispersion: disp,
                        },
                    )
                })
                .collect();
            (clouds, BTreeMap::new())
        }
        None => {
            let clouds = Race::ALL
                .iter()
                .map(|&r| {
                    (
                        r,
                        RaceCloud {
                            mean: scaled(&dirs[r.index()], CLASSIFICATION_MEAN_SCALE),
                            dispersion: CLASSIFICATION_DISPERSION,
                        },
                    )
                })
                .collect();
            let g = &dirs[Race::ALL.len()];
            let offsets = BTreeMap::from([
                (Gender::Female, scaled(g, -GENDER_OFFSET)),
                (Gender::Male, scaled(g, GENDER_OFFSET)),
            ]);
            (clouds, offsets)
        }
    };

    match name {
        PresetName::SdxlPersonFig1 | PresetName::HomogenizationSdxl => {
            groups.insert("person".into(), sdxl_person());
        }
        PresetName::LaionFig1 => {
            groups.insert("person".into(), laion());
        }
        PresetName::Table2Professions => {
            for (p, _) in PROFESSIONS {
                let (race, female) = table2_row(p).expect("every profession has a row");
                groups.insert(p.to_string(), independent(&race, female));
            }
        }
        PresetName::HomogenizationDiv => {
            groups.insert("person".into(), DemographicDistribution::uniform());
        }
    }
    if homogenization.is_some() {
        groups.extend(race_groups());
    }

    let config = SyntheticWorldConfig {
        dim,
        per_group_demographics: groups,
        per_race_cloud,
        gender_offsets,
        variant_overrides: BTreeMap::new(),
    }
    .with_identity_variants();
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sdxl_person_marginals() {
        let w = preset(PresetName::SdxlPersonFig1, DEFAULT_DIM, 1).unwrap();
        let d = &w.per_group_demographics["person"];
        let r = d.race_marginal();
        assert!((r.get(Race::White) - 0.47).abs() < 1e-12);
        assert!((r.get(Race::Black) - 0.33).abs() < 1e-12);
        assert!((d.gender_marginal().get(Gender::Male) - 0.65).abs() < 1e-12);
        assert_eq!(w.variant_overrides.len(), 12);
    }

    #[test]
    fn table2_rows() {
        let w = preset(PresetName::Table2Professions, 16, 1).unwrap();
        assert_eq!(w.per_group_demographics.len(), 32);
        let sushi = w.per_group_demographics["Sushi Chef"].race_marginal();
        assert!((sushi.get(Race::Asian) - 0.9169).abs() < 5e-4);
        let nurse = w.per_group_demographics["Nurse"].gender_marginal();
        assert!((nurse.get(Gender::Female) - 0.9929).abs() < 1e-12);
        for (p, r, _) in TABLE2_SDXL {
            let s: f64 = r.iter().sum();
            assert!((s - 100.0).abs() < 0.05, "{p} sums to {s}");
        }
    }

    #[test]
    fn laion_white_share_and_gender_parity() {
        let w = preset(PresetName::LaionFig1, 16, 1).unwrap();
        let d = &w.per_group_demographics["person"];
        assert!((d.race_marginal().get(Race::White) - 0.63).abs() < 1e-12);
        assert!((d.gender_marginal().get(Gender::Female) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn geometry() {
        let w = preset(PresetName::SdxlPersonFig1, 32, 5).unwrap();
        let m = |r: Race| w.per_race_cloud[&r].mean.as_slice().to_vec();
        for (i, a) in Race::ALL.iter().enumerate() {
            for b in &Race::ALL[i + 1..] {
                let d: f64 = m(*a).iter().zip(m(*b)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                assert!(d >= 3.0 * CLASSIFICATION_DISPERSION);
            }
        }
        assert!(preset(PresetName::LaionFig1, 6, 1).is_err());
        assert_eq!(preset(PresetName::LaionFig1, 16, 1).unwrap(), preset(PresetName::LaionFig1, 16, 1).unwrap());
    }
}
