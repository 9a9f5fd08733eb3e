use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{EvalReport, InstanceOutcome, Metric};
use super::EvalError;
use crate::gold::GoldInstance;

/// Subgroups smaller than this are reported but flagged unreliable.
pub const DEFAULT_MIN_SUBGROUP: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubgroupKey {
    PosClass,
    Gender,
    PolaritySign,
}

impl SubgroupKey {
    pub fn name(self) -> &'static str {
        match self {
            SubgroupKey::PosClass => "pos_class",
            SubgroupKey::Gender => "gender",
            SubgroupKey::PolaritySign => "polarity_sign",
        }
    }
}

impl std::str::FromStr for SubgroupKey {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, EvalError> {
        match s {
            "pos_class" | "pos" => Ok(SubgroupKey::PosClass),
            "gender" => Ok(SubgroupKey::Gender),
            "polarity_sign" | "polarity" => Ok(SubgroupKey::PolaritySign),
            _ => Err(EvalError::Config(format!("unknown subgroup key {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgroupReport {
    pub group: String,
    /// Distinct instances in the group.
    pub instances: usize,
    pub reliable: bool,
    pub report: EvalReport,
}

/// Re-scores a report restricted to each subgroup. `instances` resolves the
/// outcome keys. For gender the targets become the male or female mean.
pub fn subgroup_eval(
    instances: &[GoldInstance],
    report: &EvalReport,
    key: SubgroupKey,
    min_size: usize,
) -> Result<Vec<SubgroupReport>, EvalError> {
    let by_key: BTreeMap<String, &GoldInstance> = instances.iter().map(|i| (i.key(), i)).collect();
    let lookup = |o: &InstanceOutcome| {
        by_key
            .get(&o.key)
            .copied()
            .ok_or_else(|| EvalError::Config(format!("outcome {} has no gold instance", o.key)))
    };
    let mut groups: BTreeMap<String, Vec<InstanceOutcome>> = BTreeMap::new();
    match key {
        SubgroupKey::PosClass => {
            for o in &report.per_instance {
                let g = lookup(o)?.subgroup.pos_class.tag().to_string();
                groups.entry(g).or_default().push(o.clone());
            }
        }
        SubgroupKey::PolaritySign => {
            for o in &report.per_instance {
                let g = if o.target >= 0.0 { "positive" } else { "negative" };
                groups.entry(g.to_string()).or_default().push(o.clone());
            }
        }
        SubgroupKey::Gender => {
            if report.metric != Metric::Mae {
                return Err(EvalError::Config("gender subgroups need real-valued targets".into()));
            }
            if !instances
                .iter()
                .any(|i| i.subgroup.male_target.is_some() || i.subgroup.female_target.is_some())
            {
                return Err(EvalError::Config("gold data has no gender metadata".into()));
            }
            for o in &report.per_instance {
                let sg = &lookup(o)?.subgroup;
                for (g, t) in [("female", sg.female_target), ("male", sg.male_target)] {
                    if let Some(target) = t {
                        groups.entry(g.to_string()).or_default().push(InstanceOutcome {
                            target,
                            ..o.clone()
                        });
                    }
                }
            }
        }
    }
    groups
        .into_iter()
        .map(|(group, outcomes)| {
            let distinct: std::collections::BTreeSet<&str> = outcomes.iter().map(|o| o.key.as_str()).collect();
            let n = distinct.len();
            if n < min_size {
                log::debug!("subgroup {}={group} has {n} instances (< {min_size})", key.name());
            }
            Ok(SubgroupReport {
                instances: n,
                reliable: n >= min_size,
                report: EvalReport::from_outcomes(&report.system, report.metric, outcomes)?,
                group,
            })
        })
        .collect()
}
