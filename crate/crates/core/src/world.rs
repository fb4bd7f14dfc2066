//! Shared simulation world: physical ground truth plus the per-stakeholder
//! registries the update strategies write into.
//!
//! The world separates two layers. The *physical* layer (assets, composition,
//! statuses, phases, odometer high-water marks) is strategy-independent:
//! every strategy observes the same asset history. The *digital* layer
//! (twins, submodels, discovery, agreements) differs per strategy in
//! placement and traffic only.
//!
//! One world is mutated by a single event loop; concurrent use is limited to
//! running distinct worlds in parallel.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ids::IdGen;
use crate::model::{
    AssetId, AssetIdentity, BomLedger, Bpn, Certificate, CertificateKind, DigitalTwin,
    LifecyclePhase, Role, SemanticKind, StatusValue, TwinId,
};
use crate::policy::{AgreementBook, Policy};
use crate::registry::{DiscoveryIndex, Registry};
use crate::strategy::{PendingPull, StrategyKind};

/// A participating company with an asserted role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stakeholder {
    pub bpn: Bpn,
    pub role: Role,
    /// Required for dismantling and decommissioning certificates.
    #[serde(default)]
    pub authorized_dismantler: bool,
}

/// Latest known content per (asset, semantic kind), maintained as events
/// apply. This is the reference information set used for completeness and
/// retention metrics; every strategy must be able to reproduce it through
/// aggregation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContentLedger {
    pub latest: BTreeMap<AssetId, BTreeMap<SemanticKind, LedgerEntry>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub payload: serde_json::Value,
    pub origin_bpn: Bpn,
    pub at: u64,
}

impl ContentLedger {
    pub fn record(&mut self, asset: &AssetId, kind: SemanticKind, entry: LedgerEntry) {
        self.latest
            .entry(asset.clone())
            .or_default()
            .insert(kind, entry);
    }

    pub fn kinds_of(&self, asset: &AssetId) -> Vec<SemanticKind> {
        self.latest
            .get(asset)
            .map(|m| m.keys().copied().collect())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub strategy: StrategyKind,
    pub seed: u64,
    pub mandatory_kinds: BTreeSet<SemanticKind>,
    pub stakeholders: BTreeMap<Bpn, Stakeholder>,
    pub registries: BTreeMap<Bpn, Registry>,
    pub discovery: DiscoveryIndex,
    /// Scenario-declared policies; submodel-attached policies travel with
    /// the submodels themselves.
    pub policies: Vec<Policy>,
    pub agreements: AgreementBook,
    pub assets: BTreeMap<AssetId, AssetIdentity>,
    /// Original twin creator per asset; notifications and mandatory copies
    /// flow back to this party.
    pub asset_creators: BTreeMap<AssetId, Bpn>,
    /// Scenario-local handle -> asset id bindings, assigned at creation.
    pub bindings: BTreeMap<String, AssetId>,
    pub bom: BomLedger,
    pub statuses: BTreeMap<AssetId, StatusValue>,
    pub phases: BTreeMap<AssetId, LifecyclePhase>,
    pub mileage_high_water: BTreeMap<AssetId, u64>,
    pub certificates: Vec<Certificate>,
    pub ledger: ContentLedger,
    pub id_gen: IdGen,
    /// Sequence number of the event currently being applied (1-based).
    pub seq: u64,
    /// Forward phase skips observed, surfaced in reports.
    pub phase_skips: u64,
    /// Creator pulls deferred by the asynchronous notification mode;
    /// empty when `async_pull_delay` is zero.
    pub pending_pulls: Vec<PendingPull>,
    /// Number of events a creator pull lags behind its notification.
    pub async_pull_delay: u64,
}

impl World {
    pub fn new(
        strategy: StrategyKind,
        seed: u64,
        stakeholders: Vec<Stakeholder>,
        policies: Vec<Policy>,
        mandatory_kinds: impl IntoIterator<Item = SemanticKind>,
    ) -> Self {
        let mut registries = BTreeMap::new();
        let mut by_bpn = BTreeMap::new();
        for s in stakeholders {
            registries.insert(s.bpn.clone(), Registry::new(s.bpn.clone()));
            by_bpn.insert(s.bpn.clone(), s);
        }
        World {
            strategy,
            seed,
            mandatory_kinds: mandatory_kinds.into_iter().collect(),
            stakeholders: by_bpn,
            registries,
            discovery: DiscoveryIndex::default(),
            policies,
            agreements: AgreementBook::default(),
            assets: BTreeMap::new(),
            asset_creators: BTreeMap::new(),
            bindings: BTreeMap::new(),
            bom: BomLedger::default(),
            statuses: BTreeMap::new(),
            phases: BTreeMap::new(),
            mileage_high_water: BTreeMap::new(),
            certificates: Vec::new(),
            ledger: ContentLedger::default(),
            id_gen: IdGen::new(seed),
            seq: 0,
            phase_skips: 0,
            pending_pulls: Vec::new(),
            async_pull_delay: 0,
        }
    }

    pub fn role_of(&self, bpn: &Bpn) -> Option<Role> {
        self.stakeholders.get(bpn).map(|s| s.role)
    }

    pub fn is_authorized_dismantler(&self, bpn: &Bpn) -> bool {
        self.stakeholders
            .get(bpn)
            .map(|s| s.role == Role::Dismantler && s.authorized_dismantler)
            .unwrap_or(false)
    }

    pub fn registry(&self, bpn: &Bpn) -> Result<&Registry> {
        self.registries
            .get(bpn)
            .ok_or_else(|| Error::UnknownProvider(bpn.to_string()))
    }

    pub fn registry_mut(&mut self, bpn: &Bpn) -> Result<&mut Registry> {
        self.registries
            .get_mut(bpn)
            .ok_or_else(|| Error::UnknownProvider(bpn.to_string()))
    }

    pub fn provider_available(&self, bpn: &Bpn) -> bool {
        self.registries
            .get(bpn)
            .map(|r| r.available)
            .unwrap_or(false)
    }

    pub fn asset(&self, id: &AssetId) -> Result<&AssetIdentity> {
        self.assets
            .get(id)
            .ok_or_else(|| Error::UnknownAsset(id.to_string()))
    }

    /// Resolve a scenario-local handle to a bound asset.
    pub fn resolve(&self, handle: &str) -> Result<AssetId> {
        self.bindings
            .get(handle)
            .cloned()
            .ok_or_else(|| Error::UnknownAsset(handle.to_string()))
    }

    /// Register a brand-new asset and its first twin at the creator.
    /// The creator's registry must not already hold a twin for the asset.
    pub fn create_asset_with_twin(
        &mut self,
        identity: AssetIdentity,
        creator: &Bpn,
        phase: LifecyclePhase,
        handle: &str,
    ) -> Result<AssetId> {
        if !self.stakeholders.contains_key(creator) {
            return Err(Error::UnknownStakeholder(creator.to_string()));
        }
        let asset_id = identity.asset_id.clone();
        let twin = DigitalTwin::new(
            TwinId(self.id_gen.next_twin_id()),
            asset_id.clone(),
            creator.clone(),
            phase,
        );
        self.registry_mut(creator)?.insert(twin)?;
        self.discovery.register(creator, &identity);
        self.assets.insert(asset_id.clone(), identity);
        self.asset_creators
            .insert(asset_id.clone(), creator.clone());
        self.bindings.insert(handle.to_string(), asset_id.clone());
        self.phases.insert(asset_id.clone(), phase);
        self.statuses.insert(asset_id.clone(), StatusValue::None);
        Ok(asset_id)
    }

    /// Create an additional twin for an existing asset at `host` (the
    /// several-twins strategies). Registers it with discovery.
    pub fn create_additional_twin(&mut self, asset: &AssetId, host: &Bpn) -> Result<TwinId> {
        let identity = self.asset(asset)?.clone();
        let phase = *self.phases.get(asset).unwrap_or(&LifecyclePhase::AsUsed);
        let twin = DigitalTwin::new(
            TwinId(self.id_gen.next_twin_id()),
            asset.clone(),
            host.clone(),
            phase,
        );
        let twin_id = twin.twin_id.clone();
        self.registry_mut(host)?.insert(twin)?;
        self.discovery.register(host, &identity);
        Ok(twin_id)
    }

    /// Providers currently reachable that host a twin for `asset`.
    pub fn available_hosts_of(&self, asset: &AssetId) -> Vec<Bpn> {
        self.registries
            .values()
            .filter(|r| r.available && r.twin_of_asset(asset).is_some())
            .map(|r| r.owner_bpn.clone())
            .collect()
    }

    /// All twins of an asset across all registries, reachable or not.
    pub fn twins_of_asset(&self, asset: &AssetId) -> Vec<&DigitalTwin> {
        self.registries
            .values()
            .filter_map(|r| r.twin_of_asset(asset))
            .collect()
    }

    pub fn update_status(&mut self, asset: &AssetId, to: StatusValue) -> Result<()> {
        let current = *self.statuses.get(asset).unwrap_or(&StatusValue::None);
        if !current.can_transition_to(to) {
            return Err(Error::IllegalTransition {
                from: current.to_string(),
                to: to.to_string(),
            });
        }
        self.statuses.insert(asset.clone(), to);
        Ok(())
    }

    pub fn advance_phase(&mut self, asset: &AssetId, to: LifecyclePhase) -> Result<()> {
        let current = *self
            .phases
            .get(asset)
            .unwrap_or(&LifecyclePhase::AsSpecified);
        if current == to {
            return Ok(());
        }
        let skipped = current.advance_to(to)?;
        self.phase_skips += skipped as u64;
        self.phases.insert(asset.clone(), to);
        Ok(())
    }

    pub fn record_certificate(&mut self, kind: CertificateKind, subject: &AssetId, issuer: &Bpn) {
        self.certificates.push(Certificate {
            kind,
            subject: subject.clone(),
            issuer_bpn: issuer.clone(),
            at: self.seq,
        });
    }

    /// Content hash over the serialized world; used to verify that denied
    /// events leave no trace and that replays are identical.
    pub fn state_hash(&self) -> String {
        let encoded = serde_json::to_vec(self).expect("world serializes");
        let mut hasher = Sha256::new();
        hasher.update(&encoded);
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Structural invariant audit, run after a simulation. A violation is a
    /// bug signal, not a scenario error.
    pub fn audit(&self) -> Result<()> {
        self.bom.check_exclusivity()?;
        for registry in self.registries.values() {
            for twin in registry.twins() {
                for kind in twin.kinds_offered() {
                    let history = twin.history(kind);
                    for (i, version) in history.iter().enumerate() {
                        if version.version != i as u32 + 1 {
                            return Err(Error::InvariantViolation(format!(
                                "twin {} stream {kind} has version gap at {}",
                                twin.twin_id, version.version
                            )));
                        }
                    }
                }
                for submodel in &twin.submodels {
                    if submodel.external_copy && submodel.origin_bpn == twin.host_bpn {
                        return Err(Error::InvariantViolation(format!(
                            "twin {} holds an external copy owned by its host",
                            twin.twin_id
                        )));
                    }
                }
            }
        }
        // A decommissioning certificate exists iff the subject reached the
        // dismantled flag (or a later circular-economy flag).
        let decommissioned: BTreeSet<&AssetId> = self
            .certificates
            .iter()
            .filter(|c| c.kind == CertificateKind::Decommissioning)
            .map(|c| &c.subject)
            .collect();
        for (asset, status) in &self.statuses {
            let past_dismantling = matches!(
                status,
                StatusValue::Dismantled
                    | StatusValue::Reused
                    | StatusValue::Remanufactured
                    | StatusValue::Recycled
                    | StatusValue::TransferredToWaste
            );
            if past_dismantling != decommissioned.contains(asset) {
                return Err(Error::InvariantViolation(format!(
                    "decommissioning certificate presence does not match status {status} of {asset}"
                )));
            }
        }
        Ok(())
    }
}
