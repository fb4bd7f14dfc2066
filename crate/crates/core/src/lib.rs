//! Deterministic multi-stakeholder simulator for shared digital twins
//! across an asset lifecycle.
//!
//! The library models the industrial collaboration network fully
//! in-process: per-stakeholder twin registries, a central discovery index,
//! policy-gated contract negotiation, and three interchangeable strategies
//! for propagating twin updates between the parties that produce, use,
//! repair, and dismantle an asset. Scenarios execute deterministically from
//! a seed, producing replay-complete event and message logs from which the
//! evaluation metrics (digital consistency, data sovereignty, ownership
//! clarity, data traffic) are derived.
//!
//! ```
//! use twinmesh_core::{compute_metrics, grade, run, Grade, Scenario, StrategyKind};
//!
//! let scenario = Scenario::builtin();
//! let result = run(&scenario, StrategyKind::SeveralTwins)?;
//! let metrics = compute_metrics(&result)?;
//! assert_eq!(metrics.foreign_writes, 0);
//! assert_eq!(grade(&metrics).ownership, Grade::Fulfilled);
//! # Ok::<(), twinmesh_core::Error>(())
//! ```

pub mod error;
pub mod ids;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod registry;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod strategy;
pub mod traffic;
pub mod world;

pub use error::{Error, Result};
pub use metrics::{compute_metrics, grade, Grade, GradeSet, RunMetrics};
pub use model::{
    AssetId, AssetIdentity, AssetKind, BomEntry, BomLedger, Bpn, CeStrategyKind, Certificate,
    CertificateKind, DigitalTwin, LifecyclePhase, Role, SemanticKind, StatusValue, Submodel,
    TwinId, TwinStatus,
};
pub use policy::{
    evaluate, negotiate, propagate_on_copy, AccessRequest, Action, AgreementBook,
    ContractAgreement, Decision, DenyReason, Policy, PolicySubject, ResourceSelector,
};
pub use registry::{DiscoveryIndex, Registry, RegistryDescriptor, TwinDescriptor};
pub use report::ComparisonReport;
pub use scenario::{
    default_mandatory_kinds, load_scenario, random_scenario, save_scenario, standard_policies,
    EventKind, LifecycleEvent, Scenario,
};
pub use sim::{
    run, run_with, save_logs, scale_run, EventOutcome, EventRecord, PollSpec, RunOptions,
    ScaleMetrics, SimulationResult,
};
pub use strategy::{
    aggregate_view, apply_event, handle_ownership_transfer, handle_provider_loss, AggregatedView,
    StrategyKind, ViewEntry, ViewScope,
};
pub use traffic::{Message, MessageKind, TrafficLog};
pub use world::{ContentLedger, LedgerEntry, Stakeholder, World};
