//! Evaluation metrics per run and their mapping onto qualitative grades.
//!
//! All metrics derive from the run's logs and final world, so they are
//! recomputable and identical across replays. Digital consistency is
//! operationalized as (sources needed to aggregate the mandatory aspects,
//! update-visibility staleness at the original creator's twin); ownership
//! clarity as the share of aspect versions hosted by their data owner plus
//! the flagging of foreign-origin copies; data sovereignty as the count of
//! writes by non-owners into other-hosted twins.
//!
//! Grade thresholds are the constants below, visible for audit.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SemanticKind;
use crate::sim::{EventOutcome, SimulationResult};
use crate::strategy::{self, StrategyKind, ViewScope};
use crate::traffic::{MessageKind, TrafficLog};

/// A single aggregation source suffices for full digital consistency.
pub const CONSISTENT_SOURCES_MAX: usize = 1;
/// Any write by a non-owner into an other-hosted twin forfeits sovereignty.
pub const FOREIGN_WRITES_TOLERANCE: u64 = 0;
/// Every aspect version hosted by its own data owner.
pub const OWN_HOSTED_FULL_FRACTION: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Grade {
    /// Not fulfilled (--).
    NotFulfilled,
    /// Insufficient (-).
    Insufficient,
    /// Fulfilled to some extent (+).
    PartlyFulfilled,
    /// Fulfilled (++).
    Fulfilled,
}

impl Grade {
    pub fn symbol(&self) -> &'static str {
        match self {
            Grade::NotFulfilled => "--",
            Grade::Insufficient => "-",
            Grade::PartlyFulfilled => "+",
            Grade::Fulfilled => "++",
        }
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub strategy: StrategyKind,
    pub messages_by_kind: BTreeMap<MessageKind, u64>,
    pub messages_total: u64,
    /// Writes by non-owners into other-hosted twins.
    pub foreign_writes: u64,
    /// Registries consulted to aggregate the mandatory aspects, per asset.
    pub sources_per_asset: BTreeMap<String, usize>,
    pub max_sources: usize,
    /// Fraction of the reference content still reachable, per aspect kind.
    pub completeness_by_kind: BTreeMap<SemanticKind, f64>,
    /// Aspect versions flagged as copied from an external party.
    pub external_flag_count: u64,
    /// Max events between a mandatory update and its visibility at the
    /// original creator's twin. `None`: updates never become visible there.
    pub staleness: Option<u64>,
    pub twin_count_per_asset: BTreeMap<String, usize>,
    /// Share of aspect versions hosted by their data owner.
    pub own_hosted_fraction: f64,
    /// Foreign-origin versions not flagged as external copies.
    pub unflagged_foreign: u64,
    /// Foreign-origin versions properly flagged as external copies.
    pub flagged_foreign: u64,
    pub denied_events: u64,
    pub phase_skips: u64,
    /// Read-path messages (lookups, discovery, reads) of the polling
    /// consumer, when polling was enabled.
    pub poll_read_messages: u64,
}

/// Compute all metrics for one finished run.
///
/// Fails with `IncompleteLog` when the event log has gaps and therefore
/// cannot certify the world it accompanies.
pub fn compute_metrics(result: &SimulationResult) -> Result<RunMetrics> {
    for (i, record) in result.events.iter().enumerate() {
        if record.seq != i as u64 + 1 {
            return Err(Error::IncompleteLog(format!(
                "event log jumps from #{} to seq {}",
                i, record.seq
            )));
        }
    }

    let mut messages_by_kind: BTreeMap<MessageKind, u64> = BTreeMap::new();
    for kind in MessageKind::ALL {
        messages_by_kind.insert(kind, 0);
    }
    for message in &result.traffic.messages {
        *messages_by_kind.entry(message.kind).or_insert(0) += 1;
    }
    let foreign_writes = messages_by_kind[&MessageKind::SubmodelWrite];

    // Dry aggregation against a scratch world: lookups stay pure, and the
    // negotiations it performs do not contaminate the run's logs.
    let mut scratch = result.world.clone();
    let mut sink = TrafficLog::default();
    let mut sources_per_asset = BTreeMap::new();
    let mut hits: BTreeMap<SemanticKind, (u64, u64)> = BTreeMap::new();
    for (asset, kinds) in result.world.ledger.latest.clone() {
        let consumer = match result.world.asset_creators.get(&asset) {
            Some(c) => c.clone(),
            None => continue,
        };
        let mandatory_view = strategy::aggregate_view(
            &mut scratch,
            &asset,
            &consumer,
            ViewScope::MandatoryOnly,
            &mut sink,
        )?;
        let has_mandatory = kinds
            .keys()
            .any(|k| result.world.mandatory_kinds.contains(k));
        if has_mandatory {
            sources_per_asset.insert(
                asset.to_string(),
                mandatory_view.sources_consulted.len().max(1),
            );
        }
        let full_view =
            strategy::aggregate_view(&mut scratch, &asset, &consumer, ViewScope::Full, &mut sink)?;
        for (kind, truth) in kinds {
            let entry = hits.entry(kind).or_insert((0, 0));
            entry.1 += 1;
            let reached = full_view
                .entries
                .get(&kind)
                .map(|e| e.payload == truth.payload && e.origin_bpn == truth.origin_bpn)
                .unwrap_or(false);
            if reached {
                entry.0 += 1;
            }
        }
    }
    let completeness_by_kind: BTreeMap<SemanticKind, f64> = hits
        .into_iter()
        .map(|(k, (hit, total))| (k, hit as f64 / total as f64))
        .collect();
    let max_sources = sources_per_asset.values().copied().max().unwrap_or(1);

    // Placement census over the final world.
    let mut external_flag_count = 0u64;
    let mut own_hosted = 0u64;
    let mut unflagged_foreign = 0u64;
    let mut flagged_foreign = 0u64;
    let mut total_submodels = 0u64;
    let mut twin_count_per_asset: BTreeMap<String, usize> = BTreeMap::new();
    let mut unsynced_mandatory = false;
    for registry in result.world.registries.values() {
        for twin in registry.twins() {
            *twin_count_per_asset
                .entry(twin.asset_id.to_string())
                .or_insert(0) += 1;
            let creator = result.world.asset_creators.get(&twin.asset_id);
            for submodel in &twin.submodels {
                total_submodels += 1;
                if submodel.external_copy {
                    external_flag_count += 1;
                    flagged_foreign += 1;
                } else if submodel.origin_bpn == twin.host_bpn {
                    own_hosted += 1;
                } else {
                    unflagged_foreign += 1;
                }
                if !submodel.external_copy
                    && result.world.mandatory_kinds.contains(&submodel.kind)
                    && Some(&submodel.origin_bpn) != creator
                    && submodel.origin_bpn == twin.host_bpn
                {
                    unsynced_mandatory = true;
                }
            }
        }
    }
    let own_hosted_fraction = if total_submodels == 0 {
        1.0
    } else {
        own_hosted as f64 / total_submodels as f64
    };

    // Staleness from the message log: each announcement is answered by a
    // pull; the gap in event sequence numbers is the visibility lag.
    let mut staleness_max = 0u64;
    let mut pending: BTreeMap<String, Vec<u64>> = BTreeMap::new();
    for message in &result.traffic.messages {
        match message.kind {
            MessageKind::Notification => pending
                .entry(message.resource.clone())
                .or_default()
                .push(message.at),
            MessageKind::Pull => {
                if let Some(queue) = pending.get_mut(&message.resource) {
                    if !queue.is_empty() {
                        let sent = queue.remove(0);
                        staleness_max = staleness_max.max(message.at.saturating_sub(sent));
                    }
                }
            }
            _ => {}
        }
    }
    let staleness = match result.strategy {
        StrategyKind::OneTwin => Some(0),
        StrategyKind::LicensingNotification => Some(staleness_max),
        StrategyKind::SeveralTwins => {
            if unsynced_mandatory {
                None
            } else {
                Some(0)
            }
        }
    };

    let denied_events = result
        .events
        .iter()
        .filter(|e| matches!(e.outcome, EventOutcome::Denied { .. }))
        .count() as u64;
    let poll_read_messages = result
        .poll_traffic
        .messages
        .iter()
        .filter(|m| m.kind.is_read_path())
        .count() as u64;

    Ok(RunMetrics {
        strategy: result.strategy,
        messages_total: result.traffic.len() as u64,
        messages_by_kind,
        foreign_writes,
        sources_per_asset,
        max_sources,
        completeness_by_kind,
        external_flag_count,
        staleness,
        twin_count_per_asset,
        own_hosted_fraction,
        unflagged_foreign,
        flagged_foreign,
        denied_events,
        phase_skips: result.world.phase_skips,
        poll_read_messages,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradeSet {
    pub consistency: Grade,
    pub sovereignty: Grade,
    pub ownership: Grade,
    /// Descriptive sharing level; reported as a label, not scored.
    pub sharing: String,
}

/// Map metrics onto the qualitative grade scale. Pure and deterministic.
pub fn grade(metrics: &RunMetrics) -> GradeSet {
    let consistency =
        if metrics.max_sources <= CONSISTENT_SOURCES_MAX && metrics.staleness.is_some() {
            Grade::Fulfilled
        } else {
            Grade::Insufficient
        };
    let sovereignty = if metrics.foreign_writes > FOREIGN_WRITES_TOLERANCE {
        Grade::NotFulfilled
    } else {
        // Self-determination holds, but a baseline of trust is still
        // required of every participant, so full marks stay out of reach.
        Grade::PartlyFulfilled
    };
    let ownership = if metrics.unflagged_foreign > 0 {
        Grade::NotFulfilled
    } else if metrics.flagged_foreign > 0 {
        Grade::PartlyFulfilled
    } else if metrics.own_hosted_fraction >= OWN_HOSTED_FULL_FRACTION {
        Grade::Fulfilled
    } else {
        Grade::NotFulfilled
    };
    let sharing = match metrics.strategy {
        StrategyKind::OneTwin => "sharing all data with the twin creator",
        StrategyKind::SeveralTwins => "sharing the responsibility to link twins",
        StrategyKind::LicensingNotification => "sharing updates while keeping an own twin",
    };
    GradeSet {
        consistency,
        sovereignty,
        ownership,
        sharing: sharing.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;
    use crate::sim;

    #[test]
    fn metrics_are_stable_across_replays() {
        let scenario = Scenario::builtin();
        let a = compute_metrics(&sim::run(&scenario, StrategyKind::SeveralTwins).unwrap()).unwrap();
        let b = compute_metrics(&sim::run(&scenario, StrategyKind::SeveralTwins).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gap_in_event_log_is_incomplete() {
        let scenario = Scenario::builtin();
        let mut result = sim::run(&scenario, StrategyKind::OneTwin).unwrap();
        result.events.remove(3);
        let err = compute_metrics(&result).unwrap_err();
        assert!(matches!(err, Error::IncompleteLog(_)));
    }

    #[test]
    fn single_point_strategies_use_one_source() {
        let scenario = Scenario::builtin();
        for strategy in [StrategyKind::OneTwin, StrategyKind::LicensingNotification] {
            let metrics = compute_metrics(&sim::run(&scenario, strategy).unwrap()).unwrap();
            assert_eq!(metrics.max_sources, 1, "{strategy}");
        }
        let scattered =
            compute_metrics(&sim::run(&scenario, StrategyKind::SeveralTwins).unwrap()).unwrap();
        assert!(scattered.max_sources >= 2);
    }

    #[test]
    fn external_flags_only_under_licensing() {
        let scenario = Scenario::builtin();
        for strategy in StrategyKind::ALL {
            let metrics = compute_metrics(&sim::run(&scenario, strategy).unwrap()).unwrap();
            if strategy == StrategyKind::LicensingNotification {
                assert!(metrics.external_flag_count > 0);
            } else {
                assert_eq!(metrics.external_flag_count, 0, "{strategy}");
            }
        }
    }

    #[test]
    fn grades_reproduce_the_comparison_pattern() {
        let scenario = Scenario::builtin();
        let expect = [
            (
                StrategyKind::OneTwin,
                Grade::Fulfilled,
                Grade::NotFulfilled,
                Grade::NotFulfilled,
            ),
            (
                StrategyKind::SeveralTwins,
                Grade::Insufficient,
                Grade::PartlyFulfilled,
                Grade::Fulfilled,
            ),
            (
                StrategyKind::LicensingNotification,
                Grade::Fulfilled,
                Grade::PartlyFulfilled,
                Grade::PartlyFulfilled,
            ),
        ];
        for (strategy, consistency, sovereignty, ownership) in expect {
            let metrics = compute_metrics(&sim::run(&scenario, strategy).unwrap()).unwrap();
            let grades = grade(&metrics);
            assert_eq!(grades.consistency, consistency, "{strategy} consistency");
            assert_eq!(grades.sovereignty, sovereignty, "{strategy} sovereignty");
            assert_eq!(grades.ownership, ownership, "{strategy} ownership");
        }
    }
}
