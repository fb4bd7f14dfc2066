//! The three update-propagation strategies behind one interface: apply a
//! lifecycle event to a world, producing state changes and a message trace.
//!
//! * `OneTwin` - one twin per asset, hosted at its creator (vehicles at the
//!   OEM, components at their suppliers). Updating parties write directly
//!   into the creator-hosted twin after negotiating write access.
//! * `SeveralTwins` - every updating stakeholder keeps its own twin per
//!   asset, created on first contact and registered with discovery. Updates
//!   stay local; consumers aggregate across providers.
//! * `LicensingNotification` - as `SeveralTwins`, but mandatory aspects are
//!   copied into the new twin at creation, every mandatory update is
//!   announced to the original twin creator, and the creator pulls the
//!   update into its own twin as a policy-carrying external copy.
//!
//! The strategies differ in data placement and traffic, never in produced
//! information: the physical layer of the world is updated identically, and
//! an all-granting consumer aggregates the same content under each strategy.
//!
//! Event application is atomic: all preconditions (existence, status and
//! phase legality, mileage monotonicity, write policies) are checked before
//! the first mutation or message, so a rejected event leaves the world
//! byte-identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::model::{
    AssetId, AssetIdentity, AssetKind, Bpn, CertificateKind, LifecyclePhase, Role, SemanticKind,
    StatusValue,
};
use crate::policy::{self, AccessRequest, Action, Decision, Policy};
use crate::scenario::{EventKind, LifecycleEvent};
use crate::traffic::{Message, MessageKind, TrafficLog};
use crate::world::{LedgerEntry, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    OneTwin,
    SeveralTwins,
    LicensingNotification,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::OneTwin,
        StrategyKind::SeveralTwins,
        StrategyKind::LicensingNotification,
    ];

    pub fn slug(&self) -> &'static str {
        match self {
            StrategyKind::OneTwin => "one-twin",
            StrategyKind::SeveralTwins => "several-twins",
            StrategyKind::LicensingNotification => "licensing-notification",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

/// What an aggregating consumer asks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewScope {
    /// Everything that exists for the asset.
    Full,
    /// Only the mandatory-copy aspect set.
    MandatoryOnly,
    /// A specific aspect list (used by event read preambles).
    Kinds(Vec<SemanticKind>),
}

/// Latest retrieved version of one aspect, with its source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub payload: Value,
    pub origin_bpn: Bpn,
    pub source_registry: Bpn,
    pub external_copy: bool,
    pub version: u32,
    pub created_at: u64,
}

/// A consumer's aggregated view over all reachable twins of one asset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregatedView {
    pub asset: AssetId,
    pub entries: BTreeMap<SemanticKind, ViewEntry>,
    pub sources_consulted: BTreeSet<Bpn>,
    /// Fraction of the reference information set retrieved at its latest
    /// content, within the requested scope.
    pub completeness: f64,
}

/// A deferred creator pull (asynchronous notification mode).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingPull {
    pub due: u64,
    pub creator: Bpn,
    pub source_host: Bpn,
    pub asset: AssetId,
    pub kind: SemanticKind,
}

/// Per-event bookkeeping: message dedup and notification targets.
struct EventCtx {
    actor: Bpn,
    role: Option<Role>,
    tick: u64,
    seq: u64,
    /// One write message per (target registry, asset) per event.
    write_msgs: BTreeSet<(Bpn, AssetId)>,
    /// Mandatory aspects written by a non-creator, to notify after commit.
    notify: BTreeSet<(AssetId, SemanticKind)>,
}

impl EventCtx {
    fn new(world: &World, actor: &Bpn, tick: u64) -> Self {
        EventCtx {
            actor: actor.clone(),
            role: world.role_of(actor),
            tick,
            seq: world.seq,
            write_msgs: BTreeSet::new(),
            notify: BTreeSet::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Event application
// ---------------------------------------------------------------------------

/// Apply one lifecycle event under the world's active strategy.
///
/// Errors are rejections: the caller records them in the event log and the
/// world is guaranteed unchanged.
pub fn apply_event(
    world: &mut World,
    event: &LifecycleEvent,
    traffic: &mut TrafficLog,
) -> Result<()> {
    let actor = &event.actor;
    if !world.stakeholders.contains_key(actor) {
        return Err(Error::UnknownStakeholder(actor.to_string()));
    }
    if !world.provider_available(actor) {
        return Err(Error::RegistryUnavailable(actor.to_string()));
    }
    let mut ctx = EventCtx::new(world, actor, event.at);
    match &event.kind {
        EventKind::ProduceComponent {
            part,
            suppliers,
            customer,
        } => apply_produce(world, &mut ctx, part, suppliers, customer),
        EventKind::AssembleVehicle { vin, components } => {
            apply_assemble(world, &mut ctx, traffic, vin, components)
        }
        EventKind::Sell { asset, buyer } => apply_sell(world, &mut ctx, traffic, asset, buyer),
        EventKind::MileageUpdate { asset, km } => {
            apply_mileage(world, &mut ctx, traffic, asset, *km)
        }
        EventKind::RepairExchange {
            vehicle,
            remove,
            install,
            overhaul_removed,
            state_of_health,
        } => apply_exchange(
            world,
            &mut ctx,
            traffic,
            vehicle,
            remove,
            install,
            *overhaul_removed,
            *state_of_health,
        ),
        EventKind::Overhaul {
            component,
            state_of_health,
        } => apply_overhaul(world, &mut ctx, traffic, component, *state_of_health),
        EventKind::Dismantle { asset } => apply_dismantle(world, &mut ctx, traffic, asset),
        EventKind::CeDecision {
            component,
            strategy,
        } => apply_ce_decision(world, &mut ctx, traffic, component, *strategy),
        EventKind::RecyclingReport {
            component,
            material,
            quota,
            secondary_material_fraction,
        } => apply_recycling_report(
            world,
            &mut ctx,
            traffic,
            component,
            material,
            *quota,
            *secondary_material_fraction,
        ),
        EventKind::RemanufactureIntoVehicle { component, vin } => {
            apply_remanufacture(world, &mut ctx, traffic, component, vin)
        }
        EventKind::ProviderLoss {
            provider,
            transfer_to,
        } => handle_provider_loss(world, provider, transfer_to.as_ref()),
        EventKind::OwnershipTransfer { asset, new_owner } => {
            let asset_id = world.resolve(asset)?;
            handle_ownership_transfer(world, &asset_id, new_owner, traffic)
        }
    }?;
    // Announcements to the original creators, after all writes of the event.
    let notify: Vec<(AssetId, SemanticKind)> = ctx.notify.iter().cloned().collect();
    for (asset, kind) in notify {
        announce_update(world, &mut ctx, traffic, &asset, kind)?;
    }
    Ok(())
}

fn apply_produce(
    world: &mut World,
    _ctx: &mut EventCtx,
    part: &str,
    suppliers: &[Bpn],
    customer: &Bpn,
) -> Result<()> {
    if suppliers.is_empty() {
        return Err(Error::ValidationError(format!(
            "produce event for {part} names no supplier"
        )));
    }
    if !world.stakeholders.contains_key(customer) {
        return Err(Error::UnknownStakeholder(customer.to_string()));
    }
    for supplier in suppliers {
        if !world.stakeholders.contains_key(supplier) {
            return Err(Error::UnknownStakeholder(supplier.to_string()));
        }
        if !world.provider_available(supplier) {
            return Err(Error::RegistryUnavailable(supplier.to_string()));
        }
        let scoped = format!("{part}@{supplier}");
        if world.bindings.contains_key(&scoped)
            || (suppliers.len() == 1 && world.bindings.contains_key(part))
        {
            return Err(Error::ValidationError(format!(
                "part handle {part} is already bound"
            )));
        }
    }
    // One twin per supplier: competing suppliers never share an asset id,
    // and the customer is recorded as the specification issuer.
    for supplier in suppliers {
        let mut specific = BTreeMap::new();
        specific.insert("partInstanceId".to_string(), format!("{part}-{supplier}"));
        specific.insert("customerBpn".to_string(), customer.to_string());
        let identity = AssetIdentity {
            asset_id: AssetId::new(world.id_gen.next_asset_id()),
            specific_asset_ids: specific,
            manufacturer_bpn: supplier.clone(),
            kind: AssetKind::Component,
        };
        let scoped = format!("{part}@{supplier}");
        let asset = world.create_asset_with_twin(
            identity,
            supplier,
            LifecyclePhase::AsDelivered,
            &scoped,
        )?;
        if suppliers.len() == 1 {
            world.bindings.insert(part.to_string(), asset);
        }
    }
    Ok(())
}

fn apply_assemble(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    vin: &str,
    components: &[String],
) -> Result<()> {
    if world.bindings.contains_key(vin) {
        return Err(Error::ValidationError(format!(
            "VIN {vin} is already bound"
        )));
    }
    let mut resolved = Vec::new();
    for handle in components {
        let id = world.resolve(handle)?;
        if let Some(open) = world.bom.open_entry(&id) {
            return Err(Error::AlreadyAttached {
                child: id.to_string(),
                parent: open.parent.to_string(),
            });
        }
        let phase = *world
            .phases
            .get(&id)
            .unwrap_or(&LifecyclePhase::AsSpecified);
        phase.advance_to(LifecyclePhase::AsBuilt)?;
        resolved.push(id);
    }

    // Descriptor integration: one lookup per supplier-hosted component twin.
    for id in &resolved {
        read_for_event(world, ctx, traffic, id, &[])?;
    }

    let mut specific = BTreeMap::new();
    specific.insert("VIN".to_string(), vin.to_string());
    let identity = AssetIdentity {
        asset_id: AssetId::new(world.id_gen.next_asset_id()),
        specific_asset_ids: specific,
        manufacturer_bpn: ctx.actor.clone(),
        kind: AssetKind::Vehicle,
    };
    let actor = ctx.actor.clone();
    let vehicle = world.create_asset_with_twin(identity, &actor, LifecyclePhase::AsBuilt, vin)?;

    for id in &resolved {
        let supplier = world.asset(id)?.manufacturer_bpn.clone();
        world.bom.attach(&vehicle, id, &supplier, world.seq)?;
        let snapshot = world.bom.snapshot(&vehicle);
        deposit(
            world,
            ctx,
            traffic,
            &vehicle,
            SemanticKind::BomAsBuilt,
            snapshot,
        )?;
        world.advance_phase(id, LifecyclePhase::AsBuilt)?;
    }
    Ok(())
}

fn apply_sell(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &str,
    buyer: &Bpn,
) -> Result<()> {
    let id = world.resolve(asset)?;
    if !world.stakeholders.contains_key(buyer) {
        return Err(Error::UnknownStakeholder(buyer.to_string()));
    }
    let current = *world.statuses.get(&id).unwrap_or(&StatusValue::None);
    if !current.can_transition_to(StatusValue::Sold) {
        return Err(Error::IllegalTransition {
            from: current.to_string(),
            to: StatusValue::Sold.to_string(),
        });
    }
    let phase = *world
        .phases
        .get(&id)
        .unwrap_or(&LifecyclePhase::AsSpecified);
    phase.advance_to(LifecyclePhase::AsUsed)?;
    can_deposit(world, ctx, &id, &[SemanticKind::StatusFlag])?;

    set_status(world, ctx, traffic, &id, StatusValue::Sold)?;
    world.advance_phase(&id, LifecyclePhase::AsUsed)?;
    let children: Vec<AssetId> = world
        .bom
        .children_of(&id)
        .iter()
        .map(|e| e.child.clone())
        .collect();
    for child in children {
        world.advance_phase(&child, LifecyclePhase::AsUsed)?;
    }
    Ok(())
}

fn apply_mileage(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &str,
    km: u64,
) -> Result<()> {
    let id = world.resolve(asset)?;
    let previous = *world.mileage_high_water.get(&id).unwrap_or(&0);
    if km < previous {
        return Err(Error::MileageRegression {
            asset: id.to_string(),
            km,
            previous,
        });
    }
    can_deposit(world, ctx, &id, &[SemanticKind::Mileage])?;

    world.mileage_high_water.insert(id.clone(), km);
    let tick = ctx.tick;
    deposit(
        world,
        ctx,
        traffic,
        &id,
        SemanticKind::Mileage,
        json!({"km": km, "at": tick}),
    )
}

#[allow(clippy::too_many_arguments)]
fn apply_exchange(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    vehicle: &str,
    remove: &str,
    install: &str,
    overhaul_removed: bool,
    state_of_health: Option<f64>,
) -> Result<()> {
    let vehicle_id = world.resolve(vehicle)?;
    let remove_id = world.resolve(remove)?;
    let install_id = world.resolve(install)?;
    match world.bom.open_entry(&remove_id) {
        Some(entry) if entry.parent == vehicle_id => {}
        _ => {
            return Err(Error::NotAttached {
                child: remove_id.to_string(),
                parent: vehicle_id.to_string(),
            })
        }
    }
    if let Some(open) = world.bom.open_entry(&install_id) {
        return Err(Error::AlreadyAttached {
            child: install_id.to_string(),
            parent: open.parent.to_string(),
        });
    }
    let install_phase = *world
        .phases
        .get(&install_id)
        .unwrap_or(&LifecyclePhase::AsSpecified);
    install_phase.advance_to(LifecyclePhase::AsUsed)?;
    if overhaul_removed {
        let current = *world.statuses.get(&remove_id).unwrap_or(&StatusValue::None);
        if !current.can_transition_to(StatusValue::Maintained) {
            return Err(Error::IllegalTransition {
                from: current.to_string(),
                to: StatusValue::Maintained.to_string(),
            });
        }
        check_issuer_role(world, ctx, CertificateKind::Repair)?;
    }
    let mut vehicle_kinds = vec![SemanticKind::BomAsBuilt, SemanticKind::MaintenanceRecord];
    vehicle_kinds.dedup();
    can_deposit(world, ctx, &vehicle_id, &vehicle_kinds)?;
    if overhaul_removed {
        let mut kinds = vec![
            SemanticKind::StatusFlag,
            SemanticKind::DecommissioningCertificate,
        ];
        if state_of_health.is_some() {
            kinds.push(SemanticKind::StateOfHealth);
        }
        can_deposit(world, ctx, &remove_id, &kinds)?;
    }

    // The workshop first requests the vehicle's current composition and the
    // state of the component it is about to replace.
    read_for_event(
        world,
        ctx,
        traffic,
        &vehicle_id,
        &[SemanticKind::BomAsBuilt],
    )?;
    read_for_event(world, ctx, traffic, &remove_id, &[SemanticKind::StatusFlag])?;

    world.bom.detach(&vehicle_id, &remove_id, world.seq)?;
    let snapshot = world.bom.snapshot(&vehicle_id);
    deposit(
        world,
        ctx,
        traffic,
        &vehicle_id,
        SemanticKind::BomAsBuilt,
        snapshot,
    )?;
    let supplier = world.asset(&install_id)?.manufacturer_bpn.clone();
    world
        .bom
        .attach(&vehicle_id, &install_id, &supplier, world.seq)?;
    let snapshot = world.bom.snapshot(&vehicle_id);
    deposit(
        world,
        ctx,
        traffic,
        &vehicle_id,
        SemanticKind::BomAsBuilt,
        snapshot,
    )?;
    let record = json!({
        "action": "component_exchange",
        "removed": remove_id.as_str(),
        "installed": install_id.as_str(),
        "at": ctx.tick,
    });
    deposit(
        world,
        ctx,
        traffic,
        &vehicle_id,
        SemanticKind::MaintenanceRecord,
        record,
    )?;
    world.advance_phase(&install_id, LifecyclePhase::AsUsed)?;

    if overhaul_removed {
        set_status(world, ctx, traffic, &remove_id, StatusValue::Maintained)?;
        issue_certificate(world, ctx, traffic, CertificateKind::Repair, &remove_id)?;
        if let Some(percent) = state_of_health {
            deposit(
                world,
                ctx,
                traffic,
                &remove_id,
                SemanticKind::StateOfHealth,
                json!({"percent": percent}),
            )?;
        }
    }
    Ok(())
}

fn apply_overhaul(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    component: &str,
    state_of_health: Option<f64>,
) -> Result<()> {
    let id = world.resolve(component)?;
    let current = *world.statuses.get(&id).unwrap_or(&StatusValue::None);
    if !current.can_transition_to(StatusValue::Maintained) {
        return Err(Error::IllegalTransition {
            from: current.to_string(),
            to: StatusValue::Maintained.to_string(),
        });
    }
    check_issuer_role(world, ctx, CertificateKind::Repair)?;
    let mut kinds = vec![
        SemanticKind::StatusFlag,
        SemanticKind::MaintenanceRecord,
        SemanticKind::DecommissioningCertificate,
    ];
    if state_of_health.is_some() {
        kinds.push(SemanticKind::StateOfHealth);
    }
    can_deposit(world, ctx, &id, &kinds)?;

    read_for_event(world, ctx, traffic, &id, &[SemanticKind::StatusFlag])?;
    set_status(world, ctx, traffic, &id, StatusValue::Maintained)?;
    let record = json!({"action": "overhaul", "at": ctx.tick});
    deposit(
        world,
        ctx,
        traffic,
        &id,
        SemanticKind::MaintenanceRecord,
        record,
    )?;
    issue_certificate(world, ctx, traffic, CertificateKind::Repair, &id)?;
    if let Some(percent) = state_of_health {
        deposit(
            world,
            ctx,
            traffic,
            &id,
            SemanticKind::StateOfHealth,
            json!({"percent": percent}),
        )?;
    }
    Ok(())
}

fn apply_dismantle(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &str,
) -> Result<()> {
    let id = world.resolve(asset)?;
    world.asset(&id)?;
    if !world.is_authorized_dismantler(&ctx.actor) {
        return Err(Error::RoleMismatch {
            actor: ctx.actor.to_string(),
            kind: CertificateKind::Decommissioning.to_string(),
        });
    }
    let current = *world.statuses.get(&id).unwrap_or(&StatusValue::None);
    if !current.can_transition_to(StatusValue::Dismantled) {
        return Err(Error::IllegalTransition {
            from: current.to_string(),
            to: StatusValue::Dismantled.to_string(),
        });
    }
    let phase = *world
        .phases
        .get(&id)
        .unwrap_or(&LifecyclePhase::AsSpecified);
    phase.advance_to(LifecyclePhase::AsDismantled)?;
    let children: Vec<AssetId> = world
        .bom
        .children_of(&id)
        .iter()
        .map(|e| e.child.clone())
        .collect();
    for child in &children {
        let status = *world.statuses.get(child).unwrap_or(&StatusValue::None);
        if !status.can_transition_to(StatusValue::Dismantled) {
            return Err(Error::IllegalTransition {
                from: status.to_string(),
                to: StatusValue::Dismantled.to_string(),
            });
        }
        let child_phase = *world
            .phases
            .get(child)
            .unwrap_or(&LifecyclePhase::AsSpecified);
        child_phase.advance_to(LifecyclePhase::AsDismantled)?;
    }
    let mut vehicle_kinds = vec![
        SemanticKind::StatusFlag,
        SemanticKind::DecommissioningCertificate,
        SemanticKind::DismantlingResult,
    ];
    if !children.is_empty() {
        vehicle_kinds.insert(0, SemanticKind::BomAsBuilt);
    }
    can_deposit(world, ctx, &id, &vehicle_kinds)?;
    for child in &children {
        can_deposit(
            world,
            ctx,
            child,
            &[
                SemanticKind::StatusFlag,
                SemanticKind::DecommissioningCertificate,
            ],
        )?;
    }

    read_for_event(world, ctx, traffic, &id, &[SemanticKind::BomAsBuilt])?;

    for child in &children {
        world.bom.detach(&id, child, world.seq)?;
        let snapshot = world.bom.snapshot(&id);
        deposit(world, ctx, traffic, &id, SemanticKind::BomAsBuilt, snapshot)?;
    }
    set_status(world, ctx, traffic, &id, StatusValue::Dismantled)?;
    issue_certificate(world, ctx, traffic, CertificateKind::Decommissioning, &id)?;
    let detached: Vec<&str> = children.iter().map(|c| c.as_str()).collect();
    let tick = ctx.tick;
    deposit(
        world,
        ctx,
        traffic,
        &id,
        SemanticKind::DismantlingResult,
        json!({"detached": detached, "at": tick}),
    )?;
    world.advance_phase(&id, LifecyclePhase::AsDismantled)?;
    for child in &children {
        set_status(world, ctx, traffic, child, StatusValue::Dismantled)?;
        issue_certificate(world, ctx, traffic, CertificateKind::Decommissioning, child)?;
        world.advance_phase(child, LifecyclePhase::AsDismantled)?;
    }
    Ok(())
}

fn apply_ce_decision(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    component: &str,
    strategy: crate::model::CeStrategyKind,
) -> Result<()> {
    let id = world.resolve(component)?;
    let cert_kind = strategy.certificate_kind();
    check_issuer_role(world, ctx, cert_kind)?;
    let target = strategy.resulting_status();
    let current = *world.statuses.get(&id).unwrap_or(&StatusValue::None);
    if !current.can_transition_to(target) {
        return Err(Error::IllegalTransition {
            from: current.to_string(),
            to: target.to_string(),
        });
    }
    can_deposit(
        world,
        ctx,
        &id,
        &[
            SemanticKind::CeStrategy,
            SemanticKind::StatusFlag,
            SemanticKind::DecommissioningCertificate,
        ],
    )?;

    read_for_event(world, ctx, traffic, &id, &[SemanticKind::StatusFlag])?;
    deposit(
        world,
        ctx,
        traffic,
        &id,
        SemanticKind::CeStrategy,
        json!({"strategy": strategy, "at": ctx.tick}),
    )?;
    set_status(world, ctx, traffic, &id, target)?;
    issue_certificate(world, ctx, traffic, cert_kind, &id)?;
    Ok(())
}

fn apply_recycling_report(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    component: &str,
    material: &str,
    quota: f64,
    secondary: Option<f64>,
) -> Result<()> {
    let id = world.resolve(component)?;
    if !matches!(ctx.role, Some(Role::Dismantler) | Some(Role::Recycler)) {
        return Err(Error::RoleMismatch {
            actor: ctx.actor.to_string(),
            kind: "recycling report".to_string(),
        });
    }
    let mut kinds = vec![SemanticKind::RecyclingResult];
    if secondary.is_some() {
        kinds.push(SemanticKind::SecondaryMaterialContent);
    }
    can_deposit(world, ctx, &id, &kinds)?;

    deposit(
        world,
        ctx,
        traffic,
        &id,
        SemanticKind::RecyclingResult,
        json!({"material": material, "quota": quota, "at": ctx.tick}),
    )?;
    if let Some(fraction) = secondary {
        deposit(
            world,
            ctx,
            traffic,
            &id,
            SemanticKind::SecondaryMaterialContent,
            json!({"fraction": fraction}),
        )?;
    }
    Ok(())
}

fn apply_remanufacture(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    component: &str,
    vin: &str,
) -> Result<()> {
    let component_id = world.resolve(component)?;
    if let Some(open) = world.bom.open_entry(&component_id) {
        return Err(Error::AlreadyAttached {
            child: component_id.to_string(),
            parent: open.parent.to_string(),
        });
    }
    let current = *world
        .statuses
        .get(&component_id)
        .unwrap_or(&StatusValue::None);
    if !current.can_transition_to(StatusValue::Reused) {
        return Err(Error::IllegalTransition {
            from: current.to_string(),
            to: StatusValue::Reused.to_string(),
        });
    }
    can_deposit(world, ctx, &component_id, &[SemanticKind::StatusFlag])?;

    // The remanufacturer inspects the component's status and cumulative
    // mileage; the odometer value survives re-attachment.
    read_for_event(
        world,
        ctx,
        traffic,
        &component_id,
        &[SemanticKind::StatusFlag, SemanticKind::Mileage],
    )?;

    let vehicle_id = match world.bindings.get(vin) {
        Some(id) => id.clone(),
        None => {
            let mut specific = BTreeMap::new();
            specific.insert("VIN".to_string(), vin.to_string());
            let identity = AssetIdentity {
                asset_id: AssetId::new(world.id_gen.next_asset_id()),
                specific_asset_ids: specific,
                manufacturer_bpn: ctx.actor.clone(),
                kind: AssetKind::Vehicle,
            };
            let actor = ctx.actor.clone();
            world.create_asset_with_twin(identity, &actor, LifecyclePhase::AsBuilt, vin)?
        }
    };
    let supplier = world.asset(&component_id)?.manufacturer_bpn.clone();
    world
        .bom
        .attach(&vehicle_id, &component_id, &supplier, world.seq)?;
    let snapshot = world.bom.snapshot(&vehicle_id);
    deposit(
        world,
        ctx,
        traffic,
        &vehicle_id,
        SemanticKind::BomAsBuilt,
        snapshot,
    )?;
    set_status(world, ctx, traffic, &component_id, StatusValue::Reused)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Placement primitives
// ---------------------------------------------------------------------------

/// Host currently serving the authoritative twin of an asset: the original
/// creator, or the transfer target its stub forwards to.
pub fn authoritative_host(world: &World, asset: &AssetId) -> Result<Bpn> {
    let creator = world
        .asset_creators
        .get(asset)
        .ok_or_else(|| Error::UnknownAsset(asset.to_string()))?;
    if let Ok(registry) = world.registry(creator) {
        if let Some(twin) = registry.twin_of_asset(asset) {
            if let Some(target) = &twin.forward_to {
                return Ok(target.clone());
            }
        }
    }
    Ok(creator.clone())
}

/// Check, without mutating anything, that the actor may deposit the given
/// aspect writes for an asset under the active strategy.
fn can_deposit(
    world: &World,
    ctx: &EventCtx,
    asset: &AssetId,
    kinds: &[SemanticKind],
) -> Result<()> {
    match world.strategy {
        StrategyKind::OneTwin => {
            let host = authoritative_host(world, asset)?;
            if host == ctx.actor {
                return Ok(());
            }
            if !world.provider_available(&host) {
                return Err(Error::RegistryUnavailable(host.to_string()));
            }
            for kind in kinds {
                let request = AccessRequest {
                    actor: &ctx.actor,
                    actor_role: ctx.role,
                    owner: &host,
                    action: Action::Write,
                    kind: Some(*kind),
                };
                if let Decision::Deny(reason) = policy::evaluate(&request, &world.policies) {
                    return Err(Error::PolicyDenied(format!(
                        "{} may not write {kind} of {asset} hosted at {host}: {reason}",
                        ctx.actor
                    )));
                }
            }
            Ok(())
        }
        // Updates always land in the actor's own twin.
        StrategyKind::SeveralTwins | StrategyKind::LicensingNotification => Ok(()),
    }
}

/// Append one aspect version for an asset, placed according to the active
/// strategy, and record the content in the reference ledger.
fn deposit(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &AssetId,
    kind: SemanticKind,
    payload: Value,
) -> Result<()> {
    let creator = world
        .asset_creators
        .get(asset)
        .ok_or_else(|| Error::UnknownAsset(asset.to_string()))?
        .clone();
    match world.strategy {
        StrategyKind::OneTwin => {
            let host = authoritative_host(world, asset)?;
            if host != ctx.actor {
                let request = AccessRequest {
                    actor: &ctx.actor,
                    actor_role: ctx.role,
                    owner: &host,
                    action: Action::Write,
                    kind: Some(kind),
                };
                let available = world.provider_available(&host);
                policy::negotiate(
                    &request,
                    &world.policies,
                    &host,
                    available,
                    &format!("{asset}:{kind}"),
                    &mut world.agreements,
                    traffic,
                    ctx.seq,
                )?;
                if ctx.write_msgs.insert((host.clone(), asset.clone())) {
                    traffic.record(Message::new(
                        MessageKind::SubmodelWrite,
                        &ctx.actor,
                        &host,
                        asset.as_str(),
                        ctx.seq,
                    ));
                }
            }
            let actor = ctx.actor.clone();
            let seq = ctx.seq;
            let twin = world
                .registry_mut(&host)?
                .twin_of_asset_mut(asset)
                .ok_or_else(|| Error::NotFound(asset.to_string()))?;
            twin.append_submodel(kind, payload.clone(), actor, false, Vec::new(), seq);
        }
        StrategyKind::SeveralTwins | StrategyKind::LicensingNotification => {
            ensure_own_twin(world, ctx, traffic, asset)?;
            let licensing = world.strategy == StrategyKind::LicensingNotification;
            let mandatory = world.mandatory_kinds.contains(&kind);
            let policies = if licensing && mandatory && ctx.actor != creator {
                vec![Policy::mandatory_copy_grant(&ctx.actor, &creator, kind)]
            } else {
                Vec::new()
            };
            let actor = ctx.actor.clone();
            let seq = ctx.seq;
            let twin = world
                .registry_mut(&actor)?
                .twin_of_asset_mut(asset)
                .ok_or_else(|| Error::NotFound(asset.to_string()))?;
            twin.append_submodel(kind, payload.clone(), actor.clone(), false, policies, seq);
            if licensing && mandatory && ctx.actor != creator {
                ctx.notify.insert((asset.clone(), kind));
            }
        }
    }
    let entry = LedgerEntry {
        payload,
        origin_bpn: ctx.actor.clone(),
        at: ctx.seq,
    };
    world.ledger.record(asset, kind, entry);
    Ok(())
}

fn set_status(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &AssetId,
    to: StatusValue,
) -> Result<()> {
    world.update_status(asset, to)?;
    deposit(
        world,
        ctx,
        traffic,
        asset,
        SemanticKind::StatusFlag,
        json!({"status": to, "at": ctx.tick}),
    )
}

fn check_issuer_role(world: &World, ctx: &EventCtx, kind: CertificateKind) -> Result<()> {
    let role_ok = ctx
        .role
        .map(|r| kind.issuing_roles().contains(&r))
        .unwrap_or(false);
    let authorized_ok =
        kind != CertificateKind::Decommissioning || world.is_authorized_dismantler(&ctx.actor);
    if !role_ok || !authorized_ok {
        return Err(Error::RoleMismatch {
            actor: ctx.actor.to_string(),
            kind: kind.to_string(),
        });
    }
    Ok(())
}

fn issue_certificate(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    kind: CertificateKind,
    subject: &AssetId,
) -> Result<()> {
    check_issuer_role(world, ctx, kind)?;
    let issuer = ctx.actor.clone();
    world.record_certificate(kind, subject, &issuer);
    deposit(
        world,
        ctx,
        traffic,
        subject,
        SemanticKind::DecommissioningCertificate,
        json!({
            "certificate": kind,
            "subject": subject.as_str(),
            "issuer": issuer.as_str(),
            "at": ctx.tick,
        }),
    )
}

/// Make sure the actor has an own twin for the asset (several-twins
/// strategies). On first contact under licensing, accessible mandatory
/// aspects are copied in from the authoritative twin.
fn ensure_own_twin(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &AssetId,
) -> Result<()> {
    let actor = ctx.actor.clone();
    if world.registry(&actor)?.twin_of_asset(asset).is_some() {
        return Ok(());
    }
    world.create_additional_twin(asset, &actor)?;
    if world.strategy != StrategyKind::LicensingNotification {
        return Ok(());
    }
    // Request relevant accessible information and copy it into the new twin.
    let source_host = authoritative_host(world, asset)?;
    if source_host == actor || !world.provider_available(&source_host) {
        return Ok(());
    }
    let mandatory: Vec<SemanticKind> = world.mandatory_kinds.iter().copied().collect();
    for kind in mandatory {
        let source = match world
            .registry(&source_host)?
            .twin_of_asset(asset)
            .and_then(|t| t.latest(kind))
        {
            Some(s) => s.clone(),
            None => continue,
        };
        let request = AccessRequest {
            actor: &actor,
            actor_role: ctx.role,
            owner: &source.origin_bpn,
            action: Action::Copy,
            kind: Some(kind),
        };
        let mut policies: Vec<Policy> = world.policies.clone();
        policies.extend(source.policies.iter().cloned());
        let negotiated = policy::negotiate(
            &request,
            &policies,
            &source_host,
            true,
            &format!("{asset}:{kind}"),
            &mut world.agreements,
            traffic,
            ctx.seq,
        );
        if negotiated.is_err() {
            continue; // inaccessible aspects are simply not copied
        }
        traffic.record(Message::new(
            MessageKind::SubmodelRead,
            &actor,
            &source_host,
            format!("{asset}:{kind}"),
            ctx.seq,
        ));
        let seq = ctx.seq;
        let twin = world
            .registry_mut(&actor)?
            .twin_of_asset_mut(asset)
            .ok_or_else(|| Error::NotFound(asset.to_string()))?;
        let version = twin.next_version(kind);
        let copy = policy::propagate_on_copy(&source, version, seq);
        twin.submodels.push(copy);
    }
    Ok(())
}

/// Notify the original twin creator that a mandatory aspect changed, and let
/// the creator pull the update into its own twin (immediately, or deferred
/// by the configured number of events).
fn announce_update(
    world: &mut World,
    ctx: &mut EventCtx,
    traffic: &mut TrafficLog,
    asset: &AssetId,
    kind: SemanticKind,
) -> Result<()> {
    let creator = match world.asset_creators.get(asset) {
        Some(c) => c.clone(),
        None => return Ok(()),
    };
    if creator == ctx.actor || !world.provider_available(&creator) {
        return Ok(());
    }
    traffic.record(Message::new(
        MessageKind::Notification,
        &ctx.actor,
        &creator,
        format!("{asset}:{kind}"),
        ctx.seq,
    ));
    let pending = PendingPull {
        due: ctx.seq + world.async_pull_delay,
        creator,
        source_host: ctx.actor.clone(),
        asset: asset.clone(),
        kind,
    };
    if world.async_pull_delay == 0 {
        execute_pull(world, &pending, traffic)?;
    } else {
        world.pending_pulls.push(pending);
    }
    Ok(())
}

/// Creator-side pull: negotiate against the carried license, fetch the
/// latest version, and integrate it as an external copy.
pub(crate) fn execute_pull(
    world: &mut World,
    pull: &PendingPull,
    traffic: &mut TrafficLog,
) -> Result<()> {
    if !world.provider_available(&pull.source_host) {
        return Ok(()); // source vanished before the deferred pull ran
    }
    let source = match world
        .registry(&pull.source_host)?
        .twin_of_asset(&pull.asset)
        .and_then(|t| t.latest(pull.kind))
    {
        Some(s) => s.clone(),
        None => return Ok(()),
    };
    let creator_role = world.role_of(&pull.creator);
    let request = AccessRequest {
        actor: &pull.creator,
        actor_role: creator_role,
        owner: &source.origin_bpn,
        action: Action::Copy,
        kind: Some(pull.kind),
    };
    let mut policies: Vec<Policy> = world.policies.clone();
    policies.extend(source.policies.iter().cloned());
    policy::negotiate(
        &request,
        &policies,
        &pull.source_host,
        true,
        &format!("{}:{}", pull.asset, pull.kind),
        &mut world.agreements,
        traffic,
        world.seq,
    )?;
    traffic.record(Message::new(
        MessageKind::Pull,
        &pull.creator,
        &pull.source_host,
        format!("{}:{}", pull.asset, pull.kind),
        world.seq,
    ));
    let seq = world.seq;
    let twin = world
        .registry_mut(&pull.creator)?
        .twin_of_asset_mut(&pull.asset)
        .ok_or_else(|| Error::NotFound(pull.asset.to_string()))?;
    let version = twin.next_version(pull.kind);
    let copy = policy::propagate_on_copy(&source, version, seq);
    twin.submodels.push(copy);
    Ok(())
}

/// Run all deferred pulls that are due at the current event sequence.
pub fn drain_pending_pulls(
    world: &mut World,
    traffic: &mut TrafficLog,
    flush_all: bool,
) -> Result<()> {
    let due: Vec<PendingPull> = world
        .pending_pulls
        .iter()
        .filter(|p| flush_all || p.due <= world.seq)
        .cloned()
        .collect();
    world
        .pending_pulls
        .retain(|p| !(flush_all || p.due <= world.seq));
    for pull in due {
        execute_pull(world, &pull, traffic)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

struct Candidate {
    kind: SemanticKind,
    entry: ViewEntry,
}

/// Aggregate a consumer's view of one asset under the active strategy.
///
/// `OneTwin` and `LicensingNotification` consult a single source for
/// mandatory aspects (the authoritative twin); `SeveralTwins` queries
/// discovery and one registry per provider. Inaccessible aspects lower
/// completeness instead of failing.
pub fn aggregate_view(
    world: &mut World,
    asset: &AssetId,
    consumer: &Bpn,
    scope: ViewScope,
    traffic: &mut TrafficLog,
) -> Result<AggregatedView> {
    if !world.stakeholders.contains_key(consumer) {
        return Err(Error::UnknownStakeholder(consumer.to_string()));
    }
    world.asset(asset)?;
    let wanted = |kind: SemanticKind, mandatory: &BTreeSet<SemanticKind>| match &scope {
        ViewScope::Full => true,
        ViewScope::MandatoryOnly => mandatory.contains(&kind),
        ViewScope::Kinds(list) => list.contains(&kind),
    };
    let mandatory = world.mandatory_kinds.clone();
    let mut sources: BTreeSet<Bpn> = BTreeSet::new();
    let mut candidates: Vec<Candidate> = Vec::new();

    let consult_single_point = match world.strategy {
        StrategyKind::OneTwin => true,
        StrategyKind::LicensingNotification => {
            world.provider_available(&authoritative_host(world, asset)?)
        }
        StrategyKind::SeveralTwins => false,
    };

    if consult_single_point {
        let host = authoritative_host(world, asset)?;
        let creator = world
            .asset_creators
            .get(asset)
            .cloned()
            .unwrap_or_else(|| host.clone());
        if world.provider_available(&host) {
            if consumer != &host {
                // Chasing a forward stub costs one extra lookup.
                if host != creator {
                    traffic.record(Message::new(
                        MessageKind::RegistryLookup,
                        consumer,
                        &creator,
                        asset.as_str(),
                        world.seq,
                    ));
                }
                traffic.record(Message::new(
                    MessageKind::RegistryLookup,
                    consumer,
                    &host,
                    asset.as_str(),
                    world.seq,
                ));
            }
            sources.insert(host.clone());
            collect_from_host(
                world,
                asset,
                consumer,
                &host,
                &|k| wanted(k, &mandatory),
                &mut candidates,
                traffic,
            )?;
        }
    }

    // Which aspects still need the scattered path: everything under
    // several-twins; non-mandatory aspects (or an unavailable single point)
    // under licensing.
    let need_discovery = match world.strategy {
        StrategyKind::OneTwin => false,
        StrategyKind::SeveralTwins => true,
        StrategyKind::LicensingNotification => {
            !consult_single_point
                || match &scope {
                    ViewScope::Full => true,
                    ViewScope::MandatoryOnly => false,
                    ViewScope::Kinds(list) => list.iter().any(|k| !mandatory.contains(k)),
                }
        }
    };
    if need_discovery {
        traffic.record(Message::new(
            MessageKind::DiscoveryQuery,
            consumer,
            &Bpn::new(""),
            asset.as_str(),
            world.seq,
        ));
        let licensing_extra_only =
            world.strategy == StrategyKind::LicensingNotification && consult_single_point;
        let providers = world.discovery.discover(asset.as_str());
        for provider in providers {
            if sources.contains(&provider) {
                continue;
            }
            if !world.provider_available(&provider) {
                continue;
            }
            if consumer != &provider {
                traffic.record(Message::new(
                    MessageKind::RegistryLookup,
                    consumer,
                    &provider,
                    asset.as_str(),
                    world.seq,
                ));
            }
            sources.insert(provider.clone());
            let accept = |k: SemanticKind| {
                wanted(k, &mandatory) && (!licensing_extra_only || !mandatory.contains(&k))
            };
            collect_from_host(
                world,
                asset,
                consumer,
                &provider,
                &accept,
                &mut candidates,
                traffic,
            )?;
        }
    }

    let mut entries: BTreeMap<SemanticKind, ViewEntry> = BTreeMap::new();
    for candidate in candidates {
        let replace = match entries.get(&candidate.kind) {
            None => true,
            Some(existing) => {
                let new_key = (
                    candidate.entry.created_at,
                    candidate.entry.version,
                    candidate.entry.source_registry.clone(),
                );
                let old_key = (
                    existing.created_at,
                    existing.version,
                    existing.source_registry.clone(),
                );
                new_key > old_key
            }
        };
        if replace {
            entries.insert(candidate.kind, candidate.entry);
        }
    }

    // Completeness against the reference ledger, within scope.
    let reference = world.ledger.latest.get(asset).cloned().unwrap_or_default();
    let in_scope: Vec<(&SemanticKind, &LedgerEntry)> = reference
        .iter()
        .filter(|(k, _)| wanted(**k, &mandatory))
        .collect();
    let completeness = if in_scope.is_empty() {
        1.0
    } else {
        let hit = in_scope
            .iter()
            .filter(|(kind, truth)| {
                entries
                    .get(kind)
                    .map(|e| e.payload == truth.payload && e.origin_bpn == truth.origin_bpn)
                    .unwrap_or(false)
            })
            .count();
        hit as f64 / in_scope.len() as f64
    };

    Ok(AggregatedView {
        asset: asset.clone(),
        entries,
        sources_consulted: sources,
        completeness,
    })
}

fn collect_from_host(
    world: &mut World,
    asset: &AssetId,
    consumer: &Bpn,
    host: &Bpn,
    accept: &dyn Fn(SemanticKind) -> bool,
    candidates: &mut Vec<Candidate>,
    traffic: &mut TrafficLog,
) -> Result<()> {
    let consumer_role = world.role_of(consumer);
    let offered: Vec<(SemanticKind, crate::model::Submodel)> =
        match world.registry(host)?.twin_of_asset(asset) {
            Some(twin) => twin
                .kinds_offered()
                .into_iter()
                .filter(|k| accept(*k))
                .filter_map(|k| twin.latest(k).map(|s| (k, s.clone())))
                .collect(),
            None => return Ok(()),
        };
    for (kind, submodel) in offered {
        if consumer != host {
            let request = AccessRequest {
                actor: consumer,
                actor_role: consumer_role,
                owner: &submodel.origin_bpn,
                action: Action::Read,
                kind: Some(kind),
            };
            let mut policies: Vec<Policy> = world.policies.clone();
            policies.extend(submodel.policies.iter().cloned());
            let negotiated = policy::negotiate(
                &request,
                &policies,
                host,
                true,
                &format!("{asset}:{kind}"),
                &mut world.agreements,
                traffic,
                world.seq,
            );
            if negotiated.is_err() {
                continue; // unreadable aspects lower completeness
            }
            traffic.record(Message::new(
                MessageKind::SubmodelRead,
                consumer,
                host,
                format!("{asset}:{kind}"),
                world.seq,
            ));
        }
        candidates.push(Candidate {
            kind,
            entry: ViewEntry {
                payload: submodel.payload.clone(),
                origin_bpn: submodel.origin_bpn.clone(),
                source_registry: host.clone(),
                external_copy: submodel.external_copy,
                version: submodel.version,
                created_at: submodel.created_at,
            },
        });
    }
    Ok(())
}

/// Event read preamble: fetch the named aspects the acting party needs,
/// following the same paths an aggregating consumer would take.
fn read_for_event(
    world: &mut World,
    ctx: &EventCtx,
    traffic: &mut TrafficLog,
    asset: &AssetId,
    kinds: &[SemanticKind],
) -> Result<()> {
    let consumer = ctx.actor.clone();
    let _ = aggregate_view(
        world,
        asset,
        &consumer,
        ViewScope::Kinds(kinds.to_vec()),
        traffic,
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Provider loss and ownership transfer
// ---------------------------------------------------------------------------

/// A stakeholder leaves the network. Its registry becomes unreachable (data
/// is retained, not erased) and discovery forgets it. With a transfer
/// target, all hosted twins are re-hosted there with provenance unchanged.
pub fn handle_provider_loss(world: &mut World, bpn: &Bpn, transfer_to: Option<&Bpn>) -> Result<()> {
    if !world.registries.contains_key(bpn) {
        return Err(Error::UnknownProvider(bpn.to_string()));
    }
    if let Some(successor) = transfer_to {
        if !world.registries.contains_key(successor) {
            return Err(Error::UnknownProvider(successor.to_string()));
        }
        if !world.provider_available(successor) {
            return Err(Error::RegistryUnavailable(successor.to_string()));
        }
    }
    if let Some(successor) = transfer_to {
        let twin_ids: Vec<_> = world
            .registry(bpn)?
            .twins()
            .map(|t| t.twin_id.clone())
            .collect();
        for twin_id in twin_ids {
            let mut twin = world
                .registry_mut(bpn)?
                .remove(&twin_id)
                .expect("twin listed above");
            twin.host_bpn = successor.clone();
            let asset = twin.asset_id.clone();
            let already_hosted = world.registry(successor)?.twin_of_asset(&asset).is_some();
            if already_hosted {
                // Merge streams into the successor's shell, provenance intact.
                let successor_registry = world.registry_mut(successor)?;
                let target = successor_registry
                    .twin_of_asset_mut(&asset)
                    .expect("checked above");
                let mut kinds = twin.kinds_offered();
                kinds.sort();
                for kind in kinds {
                    for version in twin.history(kind) {
                        let next = target.next_version(kind);
                        let mut merged = version.clone();
                        merged.version = next;
                        target.submodels.push(merged);
                    }
                }
            } else {
                world.registry_mut(successor)?.insert(twin)?;
            }
            let identity = world.asset(&asset)?.clone();
            world.discovery.register(successor, &identity);
        }
    }
    world.registry_mut(bpn)?.available = false;
    world.discovery.deregister_provider(bpn);
    Ok(())
}

/// Ownership of an asset changes hands.
///
/// Under `OneTwin` the authoritative twin moves to the new owner and the
/// previous hosts keep forwarding stubs, so lookups chase at most one hop.
/// Under the several-twins strategies the new owner simply creates its own
/// twin; prior twins stay untouched.
pub fn handle_ownership_transfer(
    world: &mut World,
    asset: &AssetId,
    new_owner: &Bpn,
    traffic: &mut TrafficLog,
) -> Result<()> {
    world.asset(asset)?;
    if !world.stakeholders.contains_key(new_owner) {
        return Err(Error::UnknownStakeholder(new_owner.to_string()));
    }
    if !world.provider_available(new_owner) {
        return Err(Error::RegistryUnavailable(new_owner.to_string()));
    }
    match world.strategy {
        StrategyKind::OneTwin => {
            let host = authoritative_host(world, asset)?;
            if &host == new_owner {
                return Ok(()); // transferring to the current owner is a no-op
            }
            let twin_id = world
                .registry(&host)?
                .twin_of_asset(asset)
                .map(|t| t.twin_id.clone())
                .ok_or_else(|| Error::NotFound(asset.to_string()))?;
            let mut twin = world
                .registry_mut(&host)?
                .remove(&twin_id)
                .expect("twin listed above");
            twin.host_bpn = new_owner.clone();
            twin.forward_to = None;
            let stub_phase = twin.phase;
            world.registry_mut(new_owner)?.insert(twin)?;
            let identity = world.asset(asset)?.clone();
            world.discovery.register(new_owner, &identity);
            // Leave a forwarding stub behind and repoint any older stubs so
            // every hop resolves directly to the new host.
            let stub_id = crate::model::TwinId(world.id_gen.next_twin_id());
            let mut stub =
                crate::model::DigitalTwin::new(stub_id, asset.clone(), host.clone(), stub_phase);
            stub.forward_to = Some(new_owner.clone());
            world.registry_mut(&host)?.insert(stub)?;
            let hosts: Vec<Bpn> = world.registries.keys().cloned().collect();
            for other in hosts {
                if &other == new_owner {
                    continue;
                }
                if let Some(twin) = world.registry_mut(&other)?.twin_of_asset_mut(asset) {
                    if twin.forward_to.is_some() {
                        twin.forward_to = Some(new_owner.clone());
                    }
                }
            }
        }
        StrategyKind::SeveralTwins | StrategyKind::LicensingNotification => {
            let mut ctx = EventCtx::new(world, &new_owner.clone(), world.seq);
            ensure_own_twin(world, &mut ctx, traffic, asset)?;
        }
    }
    Ok(())
}
