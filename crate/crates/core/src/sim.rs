//! Deterministic scenario execution, log persistence, and scaled runs.
//!
//! A run applies every scenario event in order through the active update
//! strategy. Rejected events are recorded in the event log and leave the
//! world untouched; only structural invariant violations abort a run. The
//! resulting logs are replay-complete: the world is reconstructible from
//! the scenario plus the logs, and two runs of the same (scenario, seed,
//! strategy) serialize byte-identically.
//!
//! Persisted artifacts (`events.jsonl`, `messages.jsonl`, `world.json`) use
//! stable field names, one record per line for the logs.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AssetId, Bpn};
use crate::scenario::{LifecycleEvent, Scenario};
use crate::strategy::{self, StrategyKind, ViewScope};
use crate::traffic::TrafficLog;
use crate::world::World;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EventOutcome {
    Applied,
    Denied { reason: String },
}

/// One line of the event log: the full event plus what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub seq: u64,
    #[serde(flatten)]
    pub event: LifecycleEvent,
    pub outcome: EventOutcome,
}

/// Consumer polling performed after every event, kept in a separate log so
/// the run's own traffic stays unpolluted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PollSpec {
    pub consumer: Bpn,
    pub mandatory_only: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Defer creator pulls by this many events (licensing strategy).
    pub async_pull_delay: u64,
    pub poll: Option<PollSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub scenario_name: String,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub world: World,
    pub events: Vec<EventRecord>,
    pub traffic: TrafficLog,
    /// Traffic generated by the optional polling consumer.
    pub poll_traffic: TrafficLog,
}

impl SimulationResult {
    pub fn denied_events(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.outcome, EventOutcome::Denied { .. }))
            .count()
    }
}

pub fn run(scenario: &Scenario, strategy: StrategyKind) -> Result<SimulationResult> {
    run_with(scenario, strategy, &RunOptions::default())
}

pub fn run_with(
    scenario: &Scenario,
    strategy: StrategyKind,
    options: &RunOptions,
) -> Result<SimulationResult> {
    scenario.validate()?;
    let mut world = World::new(
        strategy,
        scenario.seed,
        scenario.stakeholders.clone(),
        scenario.policies.clone(),
        scenario.mandatory_copy_kinds.iter().copied(),
    );
    world.async_pull_delay = options.async_pull_delay;
    let mut traffic = TrafficLog::default();
    let mut poll_traffic = TrafficLog::default();
    let mut records = Vec::with_capacity(scenario.events.len());

    for (i, event) in scenario.events.iter().enumerate() {
        world.seq = i as u64 + 1;
        let outcome = match strategy::apply_event(&mut world, event, &mut traffic) {
            Ok(()) => EventOutcome::Applied,
            Err(e) => EventOutcome::Denied {
                reason: e.to_string(),
            },
        };
        strategy::drain_pending_pulls(&mut world, &mut traffic, false)?;
        records.push(EventRecord {
            seq: world.seq,
            event: event.clone(),
            outcome,
        });
        if let Some(poll) = &options.poll {
            poll_assets(&mut world, poll, &mut poll_traffic)?;
        }
    }
    strategy::drain_pending_pulls(&mut world, &mut traffic, true)?;
    world.audit()?;

    Ok(SimulationResult {
        scenario_name: scenario.name.clone(),
        strategy,
        seed: scenario.seed,
        world,
        events: records,
        traffic,
        poll_traffic,
    })
}

fn poll_assets(world: &mut World, poll: &PollSpec, traffic: &mut TrafficLog) -> Result<()> {
    if !world.stakeholders.contains_key(&poll.consumer) {
        return Err(Error::UnknownStakeholder(poll.consumer.to_string()));
    }
    let assets: Vec<AssetId> = world.assets.keys().cloned().collect();
    let scope = if poll.mandatory_only {
        ViewScope::MandatoryOnly
    } else {
        ViewScope::Full
    };
    for asset in assets {
        strategy::aggregate_view(world, &asset, &poll.consumer, scope.clone(), traffic)?;
    }
    Ok(())
}

/// Write `events.jsonl`, `messages.jsonl`, and `world.json` into a
/// directory, creating it if needed.
pub fn save_logs(result: &SimulationResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut events = String::new();
    for record in &result.events {
        events.push_str(&serde_json::to_string(record).expect("record serializes"));
        events.push('\n');
    }
    fs::write(dir.join("events.jsonl"), events)?;
    let mut messages = String::new();
    for message in &result.traffic.messages {
        messages.push_str(&serde_json::to_string(message).expect("message serializes"));
        messages.push('\n');
    }
    fs::write(dir.join("messages.jsonl"), messages)?;
    let world = serde_json::to_string_pretty(&result.world).expect("world serializes");
    fs::write(dir.join("world.json"), world)?;
    Ok(())
}

/// Aggregate result of running many independent vehicle worlds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaleMetrics {
    pub n_worlds: usize,
    pub strategy: StrategyKind,
    pub messages_per_world: usize,
    pub total_messages: usize,
    pub total_denied_events: usize,
    /// Wall time; excluded from serialized artifacts so identical runs
    /// produce identical files.
    #[serde(skip)]
    pub elapsed_ms: u128,
}

/// Run `n` independent copies of a template scenario, one world each,
/// distributed across worker threads. Worlds share no state; the per-world
/// message count is constant, so totals scale exactly linearly.
pub fn scale_run(template: &Scenario, n: usize, strategy: StrategyKind) -> Result<ScaleMetrics> {
    assert!(n >= 1, "scale run needs at least one world");
    template.validate()?;
    let started = Instant::now();
    let workers = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(4)
        .min(n);
    let mut counts: Vec<Option<(usize, usize)>> = vec![None; n];
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| -> Result<()> {
        let mut handles = Vec::new();
        for (w, slot) in counts.chunks_mut(chunk).enumerate() {
            handles.push(scope.spawn(move || -> Result<()> {
                for (j, out) in slot.iter_mut().enumerate() {
                    let index = w * chunk + j;
                    let mut scenario = template.clone();
                    scenario.seed = template.seed.wrapping_add(index as u64);
                    let result = run(&scenario, strategy)?;
                    *out = Some((result.traffic.len(), result.denied_events()));
                }
                Ok(())
            }));
        }
        for handle in handles {
            handle.join().expect("worker thread panicked")?;
        }
        Ok(())
    })?;

    let counts: Vec<(usize, usize)> = counts.into_iter().map(|c| c.expect("world ran")).collect();
    let per_world = counts[0].0;
    for (i, (messages, _)) in counts.iter().enumerate() {
        if *messages != per_world {
            return Err(Error::InvariantViolation(format!(
                "world {i} produced {messages} messages, expected {per_world}"
            )));
        }
    }
    Ok(ScaleMetrics {
        n_worlds: n,
        strategy,
        messages_per_world: per_world,
        total_messages: per_world * n,
        total_denied_events: counts.iter().map(|(_, d)| d).sum(),
        elapsed_ms: started.elapsed().as_millis(),
    })
}
