use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AuditError;
use crate::demographic::{
    bias_sigma, total_variation, Axis, Category, CountTable, DemographicDistribution, DemographicLabel,
    GenderDistribution, RaceDistribution,
};

const SIGMA_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub requested: usize,
    pub counts: CountTable<DemographicLabel>,
    pub race_distribution: RaceDistribution,
    pub gender_distribution: GenderDistribution,
    pub sigma_race: f64,
    pub sigma_gender: f64,
}

impl GroupReport {
    pub fn from_counts(requested: usize, counts: CountTable<DemographicLabel>) -> Result<Self, AuditError> {
        let race_distribution = DemographicDistribution::from_counts(&counts.race_counts())?;
        let gender_distribution = DemographicDistribution::from_counts(&counts.gender_counts())?;
        Ok(GroupReport {
            requested,
            sigma_race: bias_sigma(&race_distribution),
            sigma_gender: bias_sigma(&gender_distribution),
            counts,
            race_distribution,
            gender_distribution,
        })
    }
}

/// One batch that never came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFailure {
    pub group: String,
    pub batch: usize,
    pub variant: Option<String>,
    pub requested: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub backend_id: String,
    pub campaign_config_hash: String,
    pub seed: u64,
    pub n_per_group: usize,
    pub variant_policy: String,
    pub per_group: BTreeMap<String, GroupReport>,
    pub failures: Vec<GroupFailure>,
}

/// Long-format row shared by report and comparison CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShareRow {
    pub group: String,
    pub axis: Axis,
    pub backend: String,
    pub category: String,
    pub share: f64,
}

fn canonical_json<T: Serialize>(v: &T) -> String {
    // Value maps are ordered, so keys come out sorted.
    let value = serde_json::to_value(v).expect("reports serialize");
    serde_json::to_string_pretty(&value).expect("values serialize")
}

fn rows_to_csv(rows: &[ShareRow]) -> Result<String, AuditError> {
    if rows.is_empty() {
        return Err(AuditError::NothingToEmit);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| AuditError::Inconsistent(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| AuditError::Inconsistent(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn push_rows<C: Category>(rows: &mut Vec<ShareRow>, group: &str, backend: &str, d: &DemographicDistribution<C>) {
    rows.extend(d.iter().map(|(c, p)| ShareRow {
        group: group.to_string(),
        axis: C::AXIS,
        backend: backend.to_string(),
        category: c.name().to_string(),
        share: p,
    }));
}

impl AuditReport {
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self, AuditError> {
        let r: AuditReport =
            serde_json::from_str(text).map_err(|e| AuditError::Inconsistent(format!("unreadable report: {e}")))?;
        r.validate()?;
        Ok(r)
    }

    /// Distributions must match the counts and sigma must match the
    /// distributions.
    pub fn validate(&self) -> Result<(), AuditError> {
        for (name, g) in &self.per_group {
            let fresh = GroupReport::from_counts(g.requested, g.counts.clone())?;
            let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= SIGMA_TOL);
            if !close(fresh.race_distribution.as_slice(), g.race_distribution.as_slice())
                || !close(fresh.gender_distribution.as_slice(), g.gender_distribution.as_slice())
            {
                return Err(AuditError::Inconsistent(format!("group {name:?}: distributions do not match counts")));
            }
            if (fresh.sigma_race - g.sigma_race).abs() > SIGMA_TOL || (fresh.sigma_gender - g.sigma_gender).abs() > SIGMA_TOL {
                return Err(AuditError::Inconsistent(format!("group {name:?}: sigma does not match distribution")));
            }
            if g.counts.total() as usize > g.requested {
                return Err(AuditError::Inconsistent(format!("group {name:?}: more records than requested")));
            }
        }
        Ok(())
    }

    pub fn share_rows(&self) -> Vec<ShareRow> {
        let mut rows = Vec::new();
        for (name, g) in &self.per_group {
            push_rows(&mut rows, name, &self.backend_id, &g.race_distribution);
            push_rows(&mut rows, name, &self.backend_id, &g.gender_distribution);
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String, AuditError> {
        rows_to_csv(&self.share_rows())
    }

    fn label(&self) -> String {
        if self.variant_policy == "none" {
            self.backend_id.clone()
        } else {
            format!("{}+{}", self.backend_id, self.variant_policy)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisComparison {
    /// Per backend, category name to share.
    pub shares: Vec<BTreeMap<String, f64>>,
    pub sigma: Vec<f64>,
    /// sigma of the first backend over sigma of this one. `None` stands for
    /// an infinite factor (this backend reached exact uniformity).
    pub reduction_factor: Vec<Option<f64>>,
    pub tv_to_uniform: Vec<f64>,
}

impl AxisComparison {
    fn build<C: Category>(dists: &[&DemographicDistribution<C>]) -> Self {
        let sigma: Vec<f64> = dists.iter().map(|d| bias_sigma(*d)).collect();
        let base = sigma[0];
        let reduction_factor = sigma
            .iter()
            .map(|&s| {
                if s > SIGMA_TOL {
                    Some(base / s)
                } else if base > SIGMA_TOL {
                    None
                } else {
                    Some(1.0)
                }
            })
            .collect();
        let uniform = DemographicDistribution::<C>::uniform();
        AxisComparison {
            shares: dists.iter().map(|d| d.iter().map(|(c, p)| (c.name().to_string(), p)).collect()).collect(),
            tv_to_uniform: dists.iter().map(|d| total_variation(*d, &uniform)).collect(),
            sigma,
            reduction_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub race: AxisComparison,
    pub gender: AxisComparison,
}

/// Averages over every group in the campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PanelSummary {
    pub backend: String,
    pub mean_sigma_race: f64,
    pub mean_sigma_gender: f64,
    pub mean_tv_race: f64,
    pub mean_tv_gender: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub backends: Vec<String>,
    pub campaign_config_hash: String,
    pub groups: BTreeMap<String, GroupComparison>,
    pub summary: Vec<PanelSummary>,
}

impl ComparisonTable {
    pub fn to_canonical_json(&self) -> String {
        canonical_json(self)
    }

    pub fn share_rows(&self) -> Vec<ShareRow> {
        let mut rows = Vec::new();
        for (group, g) in &self.groups {
            for (axis, cmp) in [(Axis::Race, &g.race), (Axis::Gender, &g.gender)] {
                for (backend, shares) in self.backends.iter().zip(&cmp.shares) {
                    rows.extend(shares.iter().map(|(c, &p)| ShareRow {
                        group: group.clone(),
                        axis,
                        backend: backend.clone(),
                        category: c.clone(),
                        share: p,
                    }));
                }
            }
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String, AuditError> {
        rows_to_csv(&self.share_rows())
    }
}

/// Lines up reports of the same campaign. The first report is the
/// reference for reduction factors.
pub fn compare_backends(reports: &[AuditReport]) -> Result<ComparisonTable, AuditError> {
    if reports.len() < 2 {
        return Err(AuditError::TooFewReports(reports.len()));
    }
    let first = &reports[0];
    let mut backends: Vec<String> = Vec::with_capacity(reports.len());
    for r in reports {
        if r.campaign_config_hash != first.campaign_config_hash {
            return Err(AuditError::CampaignMismatch(r.backend_id.clone()));
        }
        let only_first: Vec<String> = first.per_group.keys().filter(|k| !r.per_group.contains_key(*k)).cloned().collect();
        let only_other: Vec<String> = r.per_group.keys().filter(|k| !first.per_group.contains_key(*k)).cloned().collect();
        if !only_first.is_empty() || !only_other.is_empty() {
            return Err(AuditError::GroupMismatch {
                other: r.backend_id.clone(),
                only_first,
                only_other,
            });
        }
        let mut label = r.label();
        if backends.contains(&label) {
            label = format!("{label}#{}", backends.len());
        }
        backends.push(label);
    }

    let mut groups = BTreeMap::new();
    for name in first.per_group.keys() {
        let races: Vec<_> = reports.iter().map(|r| &r.per_group[name].race_distribution).collect();
        let genders: Vec<_> = reports.iter().map(|r| &r.per_group[name].gender_distribution).collect();
        groups.insert(
            name.clone(),
            GroupComparison {
                race: AxisComparison::build(&races),
                gender: AxisComparison::build(&genders),
            },
        );
    }
    let k = groups.len().max(1) as f64;
    let summary = backends
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let mean = |f: &dyn Fn(&GroupComparison) -> f64| groups.values().map(f).sum::<f64>() / k;
            PanelSummary {
                backend: b.clone(),
                mean_sigma_race: mean(&|g| g.race.sigma[i]),
                mean_sigma_gender: mean(&|g| g.gender.sigma[i]),
                mean_tv_race: mean(&|g| g.race.tv_to_uniform[i]),
                mean_tv_gender: mean(&|g| g.gender.tv_to_uniform[i]),
            }
        })
        .collect();
    Ok(ComparisonTable {
        backends,
        campaign_config_hash: first.campaign_config_hash.clone(),
        groups,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demographic::{Gender, Race};

    fn report(backend: &str, groups: &[(&str, &[(DemographicLabel, u64)])]) -> AuditReport {
        let mut per_group = BTreeMap::new();
        for (name, cells) in groups {
            let mut c = CountTable::new();
            for (l, n) in *cells {
                c.add_n(*l, *n);
            }
            per_group.insert(name.to_string(), GroupReport::from_counts(100, c).unwrap());
        }
        AuditReport {
            backend_id: backend.into(),
            campaign_config_hash: "h".into(),
            seed: 0,
            n_per_group: 100,
            variant_policy: "none".into(),
            per_group,
            failures: vec![],
        }
    }

    fn l(r: Race, g: Gender) -> DemographicLabel {
        DemographicLabel::new(r, g)
    }

    #[test]
    fn identical_reports_compare_flat() {
        let cells = [(l(Race::White, Gender::Male), 70), (l(Race::Asian, Gender::Female), 30)];
        let a = report("a", &[("doctor", &cells)]);
        let t = compare_backends(&[a.clone(), a]).unwrap();
        let g = &t.groups["doctor"];
        assert_eq!(g.race.reduction_factor, vec![Some(1.0), Some(1.0)]);
        assert_eq!(g.race.tv_to_uniform[0], g.race.tv_to_uniform[1]);
        assert_eq!(t.backends, vec!["a", "a#1"]);
    }

    #[test]
    fn uniform_backend_gets_infinite_factor() {
        let biased = [(l(Race::White, Gender::Male), 100)];
        let flat: Vec<(DemographicLabel, u64)> = DemographicLabel::ALL.iter().map(|&x| (x, 10)).collect();
        let t = compare_backends(&[report("a", &[("x", &biased)]), report("b", &[("x", &flat)])]).unwrap();
        assert_eq!(t.groups["x"].race.reduction_factor[1], None);
        assert!(t.to_canonical_json().contains("null"));
    }

    #[test]
    fn mismatches_are_refused() {
        let c = [(l(Race::White, Gender::Male), 1)];
        let a = report("a", &[("x", &c), ("y", &c)]);
        let b = report("b", &[("x", &c), ("z", &c)]);
        match compare_backends(&[a.clone(), b]) {
            Err(AuditError::GroupMismatch { only_first, only_other, .. }) => {
                assert_eq!(only_first, vec!["y"]);
                assert_eq!(only_other, vec!["z"]);
            }
            other => panic!("{other:?}"),
        }
        let mut h = a.clone();
        h.campaign_config_hash = "other".into();
        assert!(matches!(compare_backends(&[a.clone(), h]), Err(AuditError::CampaignMismatch(_))));
        assert!(matches!(compare_backends(&[a]), Err(AuditError::TooFewReports(1))));
    }

    #[test]
    fn csv_rows_and_empty_report() {
        let c = [(l(Race::Black, Gender::Female), 3)];
        let r = report("sim", &[("x", &c), ("y", &c)]);
        let csv = r.to_csv().unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "group,axis,backend,category,share");
        assert_eq!(lines.len(), 1 + 2 * (6 + 2));
        assert!(lines.contains(&"x,gender,sim,Female,1.0"));
        let empty = report("sim", &[]);
        assert_eq!(empty.to_csv().unwrap_err().to_string(), "nothing to emit");
    }

    #[test]
    fn json_round_trip_and_tamper_detection() {
        let c = [(l(Race::Black, Gender::Female), 3), (l(Race::Indian, Gender::Male), 1)];
        let r = report("sim", &[("x", &c)]);
        let text = r.to_canonical_json();
        assert_eq!(AuditReport::from_json(&text).unwrap(), r);
        let mut bad = r.clone();
        bad.per_group.get_mut("x").unwrap().sigma_race += 1.0;
        assert!(AuditReport::from_json(&bad.to_canonical_json()).is_err());
    }
}
