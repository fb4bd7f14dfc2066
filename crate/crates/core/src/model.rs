//! Domain model: stakeholders, assets, digital twins, submodels, bill of
//! materials, statuses, and certificates.
//!
//! A [`DigitalTwin`] is a stakeholder-hosted shell aggregating versioned
//! [`Submodel`]s for one asset. Submodel version streams are append-only:
//! versions within one `(twin, semantic_kind)` stream are strictly
//! increasing and gap-free from 1, and historical versions are never
//! mutated or deleted.
//!
//! Logical time is an integer event counter, not a wall clock; every value
//! carrying an `at` field refers to either a scenario tick (declared event
//! time, 10 ticks per modeled year by convention) or an event sequence
//! number, as documented on the field.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::policy::Policy;

/// Business partner number identifying a participating company.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bpn(pub String);

impl Bpn {
    pub fn new(s: impl Into<String>) -> Self {
        Bpn(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Bpn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Network-unique identifier of one physical asset instance.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AssetId(pub String);

impl AssetId {
    pub fn new(s: impl Into<String>) -> Self {
        AssetId(s.into())
    }
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Registry-local identifier of one twin shell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwinId(pub String);

impl fmt::Display for TwinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Role a stakeholder plays in the network. Roles are asserted scenario
/// inputs; no credential verification is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Oem,
    Supplier,
    RepairShop,
    Dismantler,
    Recycler,
    Remanufacturer,
    Consumer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetKind {
    Vehicle,
    Component,
    Material,
}

/// Identity of one physical asset. Two twins of the same physical component
/// sourced from competing suppliers never share an asset id; linkage across
/// twins of the *same* asset happens through `specific_asset_ids` (VIN,
/// part instance id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetIdentity {
    pub asset_id: AssetId,
    pub specific_asset_ids: BTreeMap<String, String>,
    pub manufacturer_bpn: Bpn,
    pub kind: AssetKind,
}

/// Lifecycle phase of an asset. Transitions are monotone along the declared
/// order; skipping forward is allowed but counted for reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LifecyclePhase {
    AsSpecified,
    AsDelivered,
    AsBuilt,
    AsUsed,
    AsDismantled,
}

impl LifecyclePhase {
    pub const ORDER: [LifecyclePhase; 5] = [
        LifecyclePhase::AsSpecified,
        LifecyclePhase::AsDelivered,
        LifecyclePhase::AsBuilt,
        LifecyclePhase::AsUsed,
        LifecyclePhase::AsDismantled,
    ];

    fn rank(self) -> usize {
        Self::ORDER.iter().position(|p| *p == self).unwrap()
    }

    /// Whether `self -> to` is a legal (forward) move. Returns the number of
    /// skipped intermediate phases on success.
    pub fn advance_to(self, to: LifecyclePhase) -> Result<usize> {
        let (from, dest) = (self.rank(), to.rank());
        if dest < from {
            return Err(Error::IllegalPhaseTransition {
                from: format!("{self:?}"),
                to: format!("{to:?}"),
            });
        }
        Ok(dest.saturating_sub(from + 1))
    }
}

impl fmt::Display for LifecyclePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Status flag of an asset, mirroring the flag set stakeholders may set and
/// review across the lifecycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatusValue {
    None,
    Reused,
    Sold,
    Maintained,
    Dismantled,
    Remanufactured,
    Recycled,
    TransferredToWaste,
}

impl StatusValue {
    pub const ALL: [StatusValue; 8] = [
        StatusValue::None,
        StatusValue::Reused,
        StatusValue::Sold,
        StatusValue::Maintained,
        StatusValue::Dismantled,
        StatusValue::Remanufactured,
        StatusValue::Recycled,
        StatusValue::TransferredToWaste,
    ];

    /// Legality of `self -> to`.
    ///
    /// The flag set itself carries no automaton, so the transition table
    /// encodes the narrative order of a vehicle life: an asset circulates
    /// between `Sold`/`Maintained`/`Reused`, decommissioning gates the
    /// circular-economy flags, and `Recycled`/`TransferredToWaste` are
    /// terminal. Re-setting the current value is always a legal idempotent
    /// append.
    pub fn can_transition_to(self, to: StatusValue) -> bool {
        use StatusValue::*;
        if self == to {
            return true;
        }
        match self {
            None => matches!(to, Sold | Maintained | Dismantled),
            Sold => matches!(to, Maintained | Dismantled),
            Maintained => matches!(to, Sold | Dismantled),
            Dismantled => matches!(to, Reused | Remanufactured | Recycled | TransferredToWaste),
            Reused => matches!(to, Sold | Maintained | Dismantled),
            Remanufactured => matches!(to, Reused | Sold | Maintained | Dismantled),
            Recycled | TransferredToWaste => false,
        }
    }
}

impl fmt::Display for StatusValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Latest status of a twin, including who set it and when (event sequence).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinStatus {
    pub status: StatusValue,
    pub set_by: Bpn,
    pub at: u64,
}

impl TwinStatus {
    pub fn initial() -> Self {
        TwinStatus {
            status: StatusValue::None,
            set_by: Bpn::new(""),
            at: 0,
        }
    }
}

/// Typed aspect streams a twin may host.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemanticKind {
    BomAsBuilt,
    Mileage,
    StateOfHealth,
    MaintenanceRecord,
    DismantlingResult,
    CeStrategy,
    RecyclingResult,
    SecondaryMaterialContent,
    DecommissioningCertificate,
    StatusFlag,
}

impl SemanticKind {
    pub const ALL: [SemanticKind; 10] = [
        SemanticKind::BomAsBuilt,
        SemanticKind::Mileage,
        SemanticKind::StateOfHealth,
        SemanticKind::MaintenanceRecord,
        SemanticKind::DismantlingResult,
        SemanticKind::CeStrategy,
        SemanticKind::RecyclingResult,
        SemanticKind::SecondaryMaterialContent,
        SemanticKind::DecommissioningCertificate,
        SemanticKind::StatusFlag,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SemanticKind::BomAsBuilt => "bom_as_built",
            SemanticKind::Mileage => "mileage",
            SemanticKind::StateOfHealth => "state_of_health",
            SemanticKind::MaintenanceRecord => "maintenance_record",
            SemanticKind::DismantlingResult => "dismantling_result",
            SemanticKind::CeStrategy => "ce_strategy",
            SemanticKind::RecyclingResult => "recycling_result",
            SemanticKind::SecondaryMaterialContent => "secondary_material_content",
            SemanticKind::DecommissioningCertificate => "decommissioning_certificate",
            SemanticKind::StatusFlag => "status_flag",
        }
    }
}

impl fmt::Display for SemanticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One version of one aspect of one twin.
///
/// `origin_bpn` is the data owner (the party that produced the content);
/// the hosting stakeholder is merely the data provider. `external_copy`
/// marks content copied from another party's twin; such copies carry the
/// source's policies verbatim so downstream consumers can honor them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submodel {
    pub kind: SemanticKind,
    pub payload: Value,
    pub origin_bpn: Bpn,
    pub external_copy: bool,
    pub policies: Vec<Policy>,
    /// 1-based, strictly increasing and gap-free per (twin, kind) stream.
    pub version: u32,
    /// Event sequence number at which this version was appended.
    pub created_at: u64,
}

/// A stakeholder-hosted shell aggregating versioned submodels for one asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DigitalTwin {
    pub twin_id: TwinId,
    pub asset_id: AssetId,
    pub creator_bpn: Bpn,
    pub host_bpn: Bpn,
    pub phase: LifecyclePhase,
    pub status: TwinStatus,
    /// All versions of all streams, in append order. Never pruned.
    pub submodels: Vec<Submodel>,
    /// Set after an ownership transfer; lookups chase at most one hop.
    pub forward_to: Option<Bpn>,
}

impl DigitalTwin {
    pub fn new(twin_id: TwinId, asset_id: AssetId, creator: Bpn, phase: LifecyclePhase) -> Self {
        DigitalTwin {
            twin_id,
            asset_id,
            host_bpn: creator.clone(),
            creator_bpn: creator,
            phase,
            status: TwinStatus::initial(),
            submodels: Vec::new(),
            forward_to: None,
        }
    }

    /// Append the next version of `kind` with the given payload.
    pub fn append_submodel(
        &mut self,
        kind: SemanticKind,
        payload: Value,
        origin: Bpn,
        external_copy: bool,
        policies: Vec<Policy>,
        created_at: u64,
    ) -> &Submodel {
        let version = self.next_version(kind);
        if kind == SemanticKind::StatusFlag {
            if let Some(v) = payload.get("status") {
                if let Ok(status) = serde_json::from_value::<StatusValue>(v.clone()) {
                    self.status = TwinStatus {
                        status,
                        set_by: origin.clone(),
                        at: created_at,
                    };
                }
            }
        }
        self.submodels.push(Submodel {
            kind,
            payload,
            origin_bpn: origin,
            external_copy,
            policies,
            version,
            created_at,
        });
        self.submodels.last().unwrap()
    }

    pub fn next_version(&self, kind: SemanticKind) -> u32 {
        self.submodels.iter().filter(|s| s.kind == kind).count() as u32 + 1
    }

    /// Complete, gap-free version history of one stream, oldest first.
    pub fn history(&self, kind: SemanticKind) -> Vec<&Submodel> {
        let mut versions: Vec<&Submodel> =
            self.submodels.iter().filter(|s| s.kind == kind).collect();
        versions.sort_by_key(|s| s.version);
        versions
    }

    /// Most recent version of one stream, identifiable as the latest.
    pub fn latest(&self, kind: SemanticKind) -> Option<&Submodel> {
        self.submodels
            .iter()
            .filter(|s| s.kind == kind)
            .max_by_key(|s| s.version)
    }

    /// Semantic kinds this twin currently offers.
    pub fn kinds_offered(&self) -> Vec<SemanticKind> {
        let mut kinds: Vec<SemanticKind> = self.submodels.iter().map(|s| s.kind).collect();
        kinds.sort();
        kinds.dedup();
        kinds
    }
}

/// One parent-child composition record. A child is attached to at most one
/// parent at any instant; `detached_at` closes the interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BomEntry {
    pub parent: AssetId,
    pub child: AssetId,
    pub child_supplier: Bpn,
    /// Event sequence of attachment.
    pub attached_at: u64,
    /// Event sequence of detachment, when closed. Always >= `attached_at`.
    pub detached_at: Option<u64>,
}

/// Physical composition ledger, shared ground truth for every strategy.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BomLedger {
    pub entries: Vec<BomEntry>,
}

impl BomLedger {
    /// Open entry for a child, if currently attached anywhere.
    pub fn open_entry(&self, child: &AssetId) -> Option<&BomEntry> {
        self.entries
            .iter()
            .find(|e| &e.child == child && e.detached_at.is_none())
    }

    pub fn attach(
        &mut self,
        parent: &AssetId,
        child: &AssetId,
        child_supplier: &Bpn,
        at: u64,
    ) -> Result<BomEntry> {
        if let Some(open) = self.open_entry(child) {
            return Err(Error::AlreadyAttached {
                child: child.to_string(),
                parent: open.parent.to_string(),
            });
        }
        let entry = BomEntry {
            parent: parent.clone(),
            child: child.clone(),
            child_supplier: child_supplier.clone(),
            attached_at: at,
            detached_at: None,
        };
        self.entries.push(entry.clone());
        Ok(entry)
    }

    pub fn detach(&mut self, parent: &AssetId, child: &AssetId, at: u64) -> Result<BomEntry> {
        let entry = self
            .entries
            .iter_mut()
            .find(|e| &e.child == child && &e.parent == parent && e.detached_at.is_none())
            .ok_or_else(|| Error::NotAttached {
                child: child.to_string(),
                parent: parent.to_string(),
            })?;
        debug_assert!(at >= entry.attached_at);
        entry.detached_at = Some(at);
        Ok(entry.clone())
    }

    /// Children currently attached to `parent`, ordered by asset id.
    pub fn children_of(&self, parent: &AssetId) -> Vec<&BomEntry> {
        let mut children: Vec<&BomEntry> = self
            .entries
            .iter()
            .filter(|e| &e.parent == parent && e.detached_at.is_none())
            .collect();
        children.sort_by(|a, b| a.child.cmp(&b.child));
        children
    }

    /// Serializable snapshot of the current children of `parent`, used as
    /// the payload of a `BomAsBuilt` version.
    pub fn snapshot(&self, parent: &AssetId) -> Value {
        let children: Vec<Value> = self
            .children_of(parent)
            .iter()
            .map(|e| {
                serde_json::json!({
                    "asset_id": e.child.as_str(),
                    "supplier_bpn": e.child_supplier.as_str(),
                })
            })
            .collect();
        serde_json::json!({ "children": children })
    }

    /// Every child asset has at most one open entry.
    pub fn check_exclusivity(&self) -> Result<()> {
        let mut open: BTreeMap<&AssetId, usize> = BTreeMap::new();
        for e in self.entries.iter().filter(|e| e.detached_at.is_none()) {
            *open.entry(&e.child).or_insert(0) += 1;
        }
        for (child, n) in open {
            if n > 1 {
                return Err(Error::InvariantViolation(format!(
                    "{child} has {n} open attachment entries"
                )));
            }
        }
        Ok(())
    }
}

/// Kinds of asset-specific certificates stakeholders may issue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Decommissioning,
    Reuse,
    Remanufacture,
    Refurbish,
    Repair,
    Recycle,
    Waste,
}

impl CertificateKind {
    /// Roles entitled to issue a certificate of this kind. Decommissioning
    /// additionally requires the authorized-dismantler flag, checked by the
    /// caller.
    pub fn issuing_roles(&self) -> &'static [Role] {
        match self {
            CertificateKind::Decommissioning => &[Role::Dismantler],
            CertificateKind::Repair => &[Role::RepairShop],
            CertificateKind::Remanufacture => {
                &[Role::Dismantler, Role::Remanufacturer, Role::Recycler]
            }
            _ => &[Role::Dismantler, Role::Recycler, Role::Remanufacturer],
        }
    }
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub subject: AssetId,
    pub issuer_bpn: Bpn,
    /// Event sequence of issuance.
    pub at: u64,
}

/// Circular-economy pathway chosen for an end-of-life asset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeStrategyKind {
    Reuse,
    Remanufacture,
    Refurbish,
    Repurpose,
    Recycle,
    Recover,
}

impl CeStrategyKind {
    /// Status flag recorded when this pathway is chosen. Refurbishing and
    /// repurposing put the asset back into circulation, so they map onto the
    /// reuse flag; recovery ends at the waste flag.
    pub fn resulting_status(&self) -> StatusValue {
        match self {
            CeStrategyKind::Reuse | CeStrategyKind::Refurbish | CeStrategyKind::Repurpose => {
                StatusValue::Reused
            }
            CeStrategyKind::Remanufacture => StatusValue::Remanufactured,
            CeStrategyKind::Recycle => StatusValue::Recycled,
            CeStrategyKind::Recover => StatusValue::TransferredToWaste,
        }
    }

    /// Certificate kind attesting the chosen pathway.
    pub fn certificate_kind(&self) -> CertificateKind {
        match self {
            CeStrategyKind::Reuse | CeStrategyKind::Repurpose => CertificateKind::Reuse,
            CeStrategyKind::Remanufacture => CertificateKind::Remanufacture,
            CeStrategyKind::Refurbish => CertificateKind::Refurbish,
            CeStrategyKind::Recycle => CertificateKind::Recycle,
            CeStrategyKind::Recover => CertificateKind::Waste,
        }
    }
}

impl fmt::Display for CeStrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn twin() -> DigitalTwin {
        DigitalTwin::new(
            TwinId("urn:twin:shell:test".into()),
            AssetId::new("urn:twin:asset:test"),
            Bpn::new("BPNL-OEM"),
            LifecyclePhase::AsBuilt,
        )
    }

    #[test]
    fn version_streams_are_gap_free_from_one() {
        let mut t = twin();
        for i in 0..5 {
            t.append_submodel(
                SemanticKind::Mileage,
                json!({"km": i * 100, "at": i}),
                Bpn::new("BPNL-OEM"),
                false,
                vec![],
                i,
            );
        }
        let history = t.history(SemanticKind::Mileage);
        let versions: Vec<u32> = history.iter().map(|s| s.version).collect();
        assert_eq!(versions, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn history_of_unknown_kind_is_empty() {
        let t = twin();
        assert!(t.history(SemanticKind::RecyclingResult).is_empty());
        assert!(t.latest(SemanticKind::RecyclingResult).is_none());
    }

    #[test]
    fn latest_is_the_highest_version() {
        let mut t = twin();
        t.append_submodel(
            SemanticKind::Mileage,
            json!({"km": 1}),
            Bpn::new("A"),
            false,
            vec![],
            1,
        );
        t.append_submodel(
            SemanticKind::Mileage,
            json!({"km": 2}),
            Bpn::new("A"),
            false,
            vec![],
            2,
        );
        let latest = t.latest(SemanticKind::Mileage).unwrap();
        assert_eq!(latest.version, 2);
        assert_eq!(latest.payload, json!({"km": 2}));
    }

    #[test]
    fn status_flag_append_mirrors_twin_status() {
        let mut t = twin();
        t.append_submodel(
            SemanticKind::StatusFlag,
            json!({"status": "sold"}),
            Bpn::new("BPNL-OEM"),
            false,
            vec![],
            3,
        );
        assert_eq!(t.status.status, StatusValue::Sold);
        assert_eq!(t.status.at, 3);
    }

    // Hand-written legality oracle over all status pairs; the implementation
    // must agree exactly. `1` marks a legal transition.
    #[test]
    fn status_transition_matrix_matches_oracle() {
        use StatusValue::*;
        let order = [
            None,
            Reused,
            Sold,
            Maintained,
            Dismantled,
            Remanufactured,
            Recycled,
            TransferredToWaste,
        ];
        // Rows = from, columns = to, in `order`.
        let oracle: [[u8; 8]; 8] = [
            // None     Reu Sold Main Dism Rema Recy Waste
            [1, 0, 1, 1, 1, 0, 0, 0], // None
            [0, 1, 1, 1, 1, 0, 0, 0], // Reused
            [0, 0, 1, 1, 1, 0, 0, 0], // Sold
            [0, 0, 1, 1, 1, 0, 0, 0], // Maintained
            [0, 1, 0, 0, 1, 1, 1, 1], // Dismantled
            [0, 1, 1, 1, 1, 1, 0, 0], // Remanufactured
            [0, 0, 0, 0, 0, 0, 1, 0], // Recycled
            [0, 0, 0, 0, 0, 0, 0, 1], // TransferredToWaste
        ];
        for (i, from) in order.iter().enumerate() {
            for (j, to) in order.iter().enumerate() {
                assert_eq!(
                    from.can_transition_to(*to),
                    oracle[i][j] == 1,
                    "{from:?} -> {to:?}"
                );
            }
        }
    }

    #[test]
    fn dismantled_to_sold_is_illegal() {
        assert!(!StatusValue::Dismantled.can_transition_to(StatusValue::Sold));
    }

    #[test]
    fn phase_moves_forward_only() {
        assert!(LifecyclePhase::AsUsed
            .advance_to(LifecyclePhase::AsBuilt)
            .is_err());
        // Skipping is allowed; the skip count is surfaced for reporting.
        assert_eq!(
            LifecyclePhase::AsDelivered
                .advance_to(LifecyclePhase::AsUsed)
                .unwrap(),
            1
        );
        assert_eq!(
            LifecyclePhase::AsBuilt
                .advance_to(LifecyclePhase::AsUsed)
                .unwrap(),
            0
        );
    }

    #[test]
    fn bom_detach_of_never_attached_child_fails() {
        let mut bom = BomLedger::default();
        let err = bom
            .detach(&AssetId::new("vehicle"), &AssetId::new("gearbox"), 5)
            .unwrap_err();
        assert!(matches!(err, Error::NotAttached { .. }));
    }

    #[test]
    fn bom_child_attached_to_at_most_one_parent() {
        let mut bom = BomLedger::default();
        let child = AssetId::new("gearbox");
        let sup = Bpn::new("BPNL-SUP-A");
        bom.attach(&AssetId::new("v1"), &child, &sup, 1).unwrap();
        let err = bom
            .attach(&AssetId::new("v2"), &child, &sup, 2)
            .unwrap_err();
        assert!(matches!(err, Error::AlreadyAttached { .. }));
        bom.detach(&AssetId::new("v1"), &child, 3).unwrap();
        bom.attach(&AssetId::new("v2"), &child, &sup, 4).unwrap();
        bom.check_exclusivity().unwrap();
        let open = bom.open_entry(&child).unwrap();
        assert_eq!(open.parent, AssetId::new("v2"));
        assert!(open.detached_at.is_none());
    }

    #[test]
    fn bom_snapshot_lists_children_sorted() {
        let mut bom = BomLedger::default();
        let parent = AssetId::new("v1");
        bom.attach(&parent, &AssetId::new("b"), &Bpn::new("S2"), 1)
            .unwrap();
        bom.attach(&parent, &AssetId::new("a"), &Bpn::new("S1"), 2)
            .unwrap();
        let snap = bom.snapshot(&parent);
        let children = snap["children"].as_array().unwrap();
        assert_eq!(children[0]["asset_id"], "a");
        assert_eq!(children[1]["asset_id"], "b");
    }

    #[test]
    fn ce_strategy_mappings() {
        assert_eq!(
            CeStrategyKind::Recycle.resulting_status(),
            StatusValue::Recycled
        );
        assert_eq!(
            CeStrategyKind::Recover.certificate_kind(),
            CertificateKind::Waste
        );
        assert_eq!(
            CeStrategyKind::Repurpose.certificate_kind(),
            CertificateKind::Reuse
        );
    }
}
