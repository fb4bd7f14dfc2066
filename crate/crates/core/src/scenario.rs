//! Scenario definition, validation, the built-in vehicle lifecycle
//! scenario, and a seeded random scenario generator.
//!
//! A scenario is a JSON document with the following fields:
//!
//! * `name` - free-form scenario name.
//! * `seed` - integer seed; all generated identifiers derive from it.
//! * `stakeholders` - list of `{bpn, role, authorized_dismantler?}`.
//! * `policies` - initial access policies, each
//!   `{owner_bpn, subject, actions, resource, mandatory_copy?}` where
//!   `subject` is `{"kind": "any"}`, `{"kind": "bpn", "bpn": ...}` or
//!   `{"kind": "role", "role": ...}` and `resource` is
//!   `{"kind": "twin_wide"}` or `{"kind": "semantic", "semantic": ...}`.
//! * `mandatory_copy_kinds` - aspect kinds the licensing strategy copies
//!   back to the original twin creator.
//! * `events` - ordered list of `{at, actor, kind, ...payload}`; assets are
//!   referenced by scenario-local handles bound at creation (part names,
//!   `part@supplier` for multi-sourced parts, VINs for vehicles).
//!
//! Events are totally ordered by logical time: `at` values must be
//! non-decreasing and the list order is the execution order.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bpn, CeStrategyKind, Role, SemanticKind};
use crate::policy::{Action, Policy, PolicySubject, ResourceSelector};
use crate::world::Stakeholder;

/// One timeline element of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleEvent {
    /// Declared logical tick (10 ticks per modeled year by convention).
    pub at: u64,
    pub actor: Bpn,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    /// Create component twins, one per supplier. Multi-sourced parts get
    /// pairwise-distinct asset ids; the customer is recorded as the
    /// specification issuer.
    ProduceComponent {
        part: String,
        suppliers: Vec<Bpn>,
        customer: Bpn,
    },
    /// Create the vehicle twin and integrate component twins into its BoM.
    AssembleVehicle {
        vin: String,
        components: Vec<String>,
    },
    Sell {
        asset: String,
        buyer: Bpn,
    },
    MileageUpdate {
        asset: String,
        km: u64,
    },
    RepairExchange {
        vehicle: String,
        remove: String,
        install: String,
        /// Whether the removed component is overhauled, which additionally
        /// updates the component twin.
        #[serde(default)]
        overhaul_removed: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state_of_health: Option<f64>,
    },
    Overhaul {
        component: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state_of_health: Option<f64>,
    },
    Dismantle {
        asset: String,
    },
    CeDecision {
        component: String,
        strategy: CeStrategyKind,
    },
    RecyclingReport {
        component: String,
        material: String,
        quota: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        secondary_material_fraction: Option<f64>,
    },
    RemanufactureIntoVehicle {
        component: String,
        vin: String,
    },
    ProviderLoss {
        provider: Bpn,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        transfer_to: Option<Bpn>,
    },
    OwnershipTransfer {
        asset: String,
        new_owner: Bpn,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub stakeholders: Vec<Stakeholder>,
    pub policies: Vec<Policy>,
    pub mandatory_copy_kinds: Vec<SemanticKind>,
    pub events: Vec<LifecycleEvent>,
}

impl Scenario {
    /// Validate static scenario invariants: declared actors, bound asset
    /// handles, ordered timeline, sane payloads.
    pub fn validate(&self) -> Result<()> {
        let declared: BTreeSet<&Bpn> = self.stakeholders.iter().map(|s| &s.bpn).collect();
        let mut seen = BTreeSet::new();
        for s in &self.stakeholders {
            if !seen.insert(&s.bpn) {
                return Err(Error::ValidationError(format!(
                    "stakeholder {} declared twice",
                    s.bpn
                )));
            }
        }
        for p in &self.policies {
            if !declared.contains(&p.owner_bpn) {
                return Err(Error::ValidationError(format!(
                    "policy owner {} is not a declared stakeholder",
                    p.owner_bpn
                )));
            }
            if p.mandatory_copy
                && !(p.actions.contains(&Action::Read) && p.actions.contains(&Action::Copy))
            {
                return Err(Error::ValidationError(format!(
                    "mandatory-copy policy of {} must grant at least read and copy",
                    p.owner_bpn
                )));
            }
        }
        let mut bound: BTreeSet<String> = BTreeSet::new();
        let mut last_at = 0u64;
        for (i, event) in self.events.iter().enumerate() {
            let position = || format!("event #{i} at t={}", event.at);
            if event.at < last_at {
                return Err(Error::ValidationError(format!(
                    "{}: timeline goes backwards ({} < {last_at})",
                    position(),
                    event.at
                )));
            }
            last_at = event.at;
            if !declared.contains(&event.actor) {
                return Err(Error::ValidationError(format!(
                    "{}: actor {} is not a declared stakeholder",
                    position(),
                    event.actor
                )));
            }
            let require = |handle: &str| -> Result<()> {
                if !bound.contains(handle) {
                    return Err(Error::ValidationError(format!(
                        "{}: asset handle {handle} is not bound by an earlier event",
                        position()
                    )));
                }
                Ok(())
            };
            match &event.kind {
                EventKind::ProduceComponent {
                    part,
                    suppliers,
                    customer,
                } => {
                    if suppliers.is_empty() {
                        return Err(Error::ValidationError(format!(
                            "{}: produce event names no supplier",
                            position()
                        )));
                    }
                    for s in suppliers {
                        if !declared.contains(s) {
                            return Err(Error::ValidationError(format!(
                                "{}: supplier {s} is not declared",
                                position()
                            )));
                        }
                    }
                    if !declared.contains(customer) {
                        return Err(Error::ValidationError(format!(
                            "{}: customer {customer} is not declared",
                            position()
                        )));
                    }
                    if bound.contains(part) {
                        return Err(Error::ValidationError(format!(
                            "{}: part handle {part} is already bound",
                            position()
                        )));
                    }
                    for s in suppliers {
                        bound.insert(format!("{part}@{s}"));
                    }
                    if suppliers.len() == 1 {
                        bound.insert(part.clone());
                    }
                }
                EventKind::AssembleVehicle { vin, components } => {
                    if bound.contains(vin) {
                        return Err(Error::ValidationError(format!(
                            "{}: VIN {vin} is already bound",
                            position()
                        )));
                    }
                    for c in components {
                        require(c)?;
                    }
                    bound.insert(vin.clone());
                }
                EventKind::Sell { asset, buyer } => {
                    require(asset)?;
                    if !declared.contains(buyer) {
                        return Err(Error::ValidationError(format!(
                            "{}: buyer {buyer} is not declared",
                            position()
                        )));
                    }
                }
                EventKind::MileageUpdate { asset, .. } => require(asset)?,
                EventKind::RepairExchange {
                    vehicle,
                    remove,
                    install,
                    ..
                } => {
                    require(vehicle)?;
                    require(remove)?;
                    require(install)?;
                }
                EventKind::Overhaul { component, .. } => require(component)?,
                EventKind::Dismantle { asset } => require(asset)?,
                EventKind::CeDecision { component, .. } => require(component)?,
                EventKind::RecyclingReport {
                    component, quota, ..
                } => {
                    require(component)?;
                    if !(0.0..=1.0).contains(quota) {
                        return Err(Error::ValidationError(format!(
                            "{}: recycling quota {quota} is outside [0, 1]",
                            position()
                        )));
                    }
                }
                EventKind::RemanufactureIntoVehicle { component, vin } => {
                    require(component)?;
                    if !bound.contains(vin) {
                        bound.insert(vin.clone());
                    }
                }
                EventKind::ProviderLoss {
                    provider,
                    transfer_to,
                } => {
                    if !declared.contains(provider) {
                        return Err(Error::ValidationError(format!(
                            "{}: provider {provider} is not declared",
                            position()
                        )));
                    }
                    if let Some(t) = transfer_to {
                        if !declared.contains(t) {
                            return Err(Error::ValidationError(format!(
                                "{}: transfer target {t} is not declared",
                                position()
                            )));
                        }
                    }
                }
                EventKind::OwnershipTransfer { asset, new_owner } => {
                    require(asset)?;
                    if !declared.contains(new_owner) {
                        return Err(Error::ValidationError(format!(
                            "{}: new owner {new_owner} is not declared",
                            position()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The built-in vehicle lifecycle scenario with a 20-year usage span.
    pub fn builtin() -> Scenario {
        Scenario::builtin_with_usage_years(20)
    }

    /// Built-in scenario with a parameterized usage span.
    ///
    /// Three suppliers deliver components (one part is multi-sourced), the
    /// OEM assembles and sells the vehicle, the battery is exchanged at an
    /// OEM-certified repair shop and the gearbox at an independent workshop
    /// at different times, mileage is recorded yearly, and an authorized
    /// dismantler decommissions the vehicle, takes circular-economy
    /// decisions per component, and reports the recycling quota. The worn
    /// gearbox is remanufactured into a second vehicle mid-life, carrying
    /// its cumulative mileage along.
    pub fn builtin_with_usage_years(years: u64) -> Scenario {
        assert!(years >= 5, "usage span must cover at least 5 years");
        let oem = Bpn::new("BPNL-OEM");
        let sup_a = Bpn::new("BPNL-SUPPLIER-A");
        let sup_b = Bpn::new("BPNL-SUPPLIER-B");
        let sup_c = Bpn::new("BPNL-SUPPLIER-C");
        let cert_shop = Bpn::new("BPNL-REPAIR-CERT");
        let indie_shop = Bpn::new("BPNL-REPAIR-INDIE");
        let dismantler = Bpn::new("BPNL-DISMANTLER");
        let consumer = Bpn::new("BPNL-CONSUMER");

        let stakeholders = vec![
            Stakeholder {
                bpn: oem.clone(),
                role: Role::Oem,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: sup_a.clone(),
                role: Role::Supplier,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: sup_b.clone(),
                role: Role::Supplier,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: sup_c.clone(),
                role: Role::Supplier,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: cert_shop.clone(),
                role: Role::RepairShop,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: indie_shop.clone(),
                role: Role::RepairShop,
                authorized_dismantler: false,
            },
            Stakeholder {
                bpn: dismantler.clone(),
                role: Role::Dismantler,
                authorized_dismantler: true,
            },
            Stakeholder {
                bpn: consumer.clone(),
                role: Role::Consumer,
                authorized_dismantler: false,
            },
        ];
        let policies = standard_policies(&stakeholders);

        let mut events = Vec::new();
        let mut push = |at: u64, actor: &Bpn, kind: EventKind| {
            events.push(LifecycleEvent {
                at,
                actor: actor.clone(),
                kind,
            });
        };

        // Production and assembly.
        push(
            0,
            &oem,
            EventKind::ProduceComponent {
                part: "gearbox-1".into(),
                suppliers: vec![sup_a.clone()],
                customer: oem.clone(),
            },
        );
        push(
            0,
            &oem,
            EventKind::ProduceComponent {
                part: "ecu-1".into(),
                suppliers: vec![sup_b.clone()],
                customer: oem.clone(),
            },
        );
        push(
            0,
            &oem,
            EventKind::ProduceComponent {
                part: "battery-1".into(),
                suppliers: vec![sup_c.clone()],
                customer: oem.clone(),
            },
        );
        push(
            1,
            &oem,
            EventKind::ProduceComponent {
                part: "brake-1".into(),
                suppliers: vec![sup_a.clone(), sup_b.clone()],
                customer: oem.clone(),
            },
        );
        let brake = format!("brake-1@{sup_a}");
        push(
            5,
            &oem,
            EventKind::AssembleVehicle {
                vin: "WVX0000001".into(),
                components: vec![
                    "gearbox-1".into(),
                    "ecu-1".into(),
                    "battery-1".into(),
                    brake.clone(),
                ],
            },
        );
        push(
            10,
            &oem,
            EventKind::Sell {
                asset: "WVX0000001".into(),
                buyer: consumer.clone(),
            },
        );

        let km_per_year = 15_000u64;
        let battery_year = (2 * years / 5).max(2);
        let gearbox_year = (3 * years / 5).max(battery_year + 1);
        let overhaul_year = battery_year + (years - battery_year) / 2;

        for year in 2..=years {
            push(
                year * 10,
                &oem,
                EventKind::MileageUpdate {
                    asset: "WVX0000001".into(),
                    km: year * km_per_year,
                },
            );
            if year == 6.min(battery_year) {
                // Telemetry also covers component odometers.
                push(
                    year * 10 + 1,
                    &oem,
                    EventKind::MileageUpdate {
                        asset: "gearbox-1".into(),
                        km: year * km_per_year,
                    },
                );
            }
            if year == battery_year {
                push(
                    year * 10 + 5,
                    &cert_shop,
                    EventKind::ProduceComponent {
                        part: "battery-2".into(),
                        suppliers: vec![sup_c.clone()],
                        customer: cert_shop.clone(),
                    },
                );
                push(
                    year * 10 + 6,
                    &cert_shop,
                    EventKind::RepairExchange {
                        vehicle: "WVX0000001".into(),
                        remove: "battery-1".into(),
                        install: "battery-2".into(),
                        overhaul_removed: true,
                        state_of_health: Some(0.72),
                    },
                );
                push(
                    year * 10 + 7,
                    &cert_shop,
                    EventKind::MileageUpdate {
                        asset: "WVX0000001".into(),
                        km: year * km_per_year + 7_500,
                    },
                );
                push(
                    year * 10 + 8,
                    &cert_shop,
                    EventKind::MileageUpdate {
                        asset: "battery-1".into(),
                        km: year * km_per_year + 7_500,
                    },
                );
            }
            if year == gearbox_year {
                push(
                    year * 10 + 1,
                    &indie_shop,
                    EventKind::ProduceComponent {
                        part: "gearbox-2".into(),
                        suppliers: vec![sup_a.clone()],
                        customer: indie_shop.clone(),
                    },
                );
                push(
                    year * 10 + 2,
                    &indie_shop,
                    EventKind::RepairExchange {
                        vehicle: "WVX0000001".into(),
                        remove: "gearbox-1".into(),
                        install: "gearbox-2".into(),
                        overhaul_removed: false,
                        state_of_health: None,
                    },
                );
                push(
                    year * 10 + 3,
                    &indie_shop,
                    EventKind::MileageUpdate {
                        asset: "WVX0000001".into(),
                        km: year * km_per_year + 500,
                    },
                );
                push(
                    year * 10 + 4,
                    &indie_shop,
                    EventKind::MileageUpdate {
                        asset: "gearbox-1".into(),
                        km: year * km_per_year + 500,
                    },
                );
                // The worn gearbox is decommissioned and remanufactured into
                // a second vehicle; its odometer is never reset.
                push(
                    year * 10 + 5,
                    &dismantler,
                    EventKind::Dismantle {
                        asset: "gearbox-1".into(),
                    },
                );
                push(
                    year * 10 + 6,
                    &dismantler,
                    EventKind::CeDecision {
                        component: "gearbox-1".into(),
                        strategy: CeStrategyKind::Remanufacture,
                    },
                );
                push(
                    year * 10 + 8,
                    &oem,
                    EventKind::RemanufactureIntoVehicle {
                        component: "gearbox-1".into(),
                        vin: "WVX0000002".into(),
                    },
                );
                push(
                    year * 10 + 9,
                    &oem,
                    EventKind::MileageUpdate {
                        asset: "gearbox-1".into(),
                        km: (year + 1) * km_per_year,
                    },
                );
            }
            if year == overhaul_year && year != battery_year && year != gearbox_year {
                push(
                    year * 10 + 5,
                    &cert_shop,
                    EventKind::Overhaul {
                        component: "battery-2".into(),
                        state_of_health: Some(0.88),
                    },
                );
            }
        }

        // End of life: decommissioning at the authorized dismantler.
        let eol = years * 10;
        push(
            eol + 1,
            &dismantler,
            EventKind::Dismantle {
                asset: "WVX0000001".into(),
            },
        );
        push(
            eol + 2,
            &dismantler,
            EventKind::CeDecision {
                component: "gearbox-2".into(),
                strategy: CeStrategyKind::Reuse,
            },
        );
        push(
            eol + 3,
            &dismantler,
            EventKind::CeDecision {
                component: "ecu-1".into(),
                strategy: CeStrategyKind::Refurbish,
            },
        );
        push(
            eol + 4,
            &dismantler,
            EventKind::CeDecision {
                component: "battery-2".into(),
                strategy: CeStrategyKind::Recycle,
            },
        );
        push(
            eol + 5,
            &dismantler,
            EventKind::CeDecision {
                component: brake,
                strategy: CeStrategyKind::Recover,
            },
        );
        push(
            eol + 6,
            &dismantler,
            EventKind::RecyclingReport {
                component: "battery-2".into(),
                material: "lithium-nickel-cobalt".into(),
                quota: 0.76,
                secondary_material_fraction: Some(0.45),
            },
        );

        Scenario {
            name: "vehicle-lifecycle".into(),
            seed: 42,
            stakeholders,
            policies,
            mandatory_copy_kinds: default_mandatory_kinds(),
            events,
        }
    }
}

/// Aspect kinds copied back to the original twin creator by default under
/// the licensing strategy: component mileage, the current BoM, and battery
/// state of health.
pub fn default_mandatory_kinds() -> Vec<SemanticKind> {
    vec![
        SemanticKind::BomAsBuilt,
        SemanticKind::Mileage,
        SemanticKind::StateOfHealth,
    ]
}

/// The grant block every data-hosting stakeholder declares in the shipped
/// scenarios: read and copy for everyone, write access for the service
/// roles that update twins in the field.
pub fn standard_policies(stakeholders: &[Stakeholder]) -> Vec<Policy> {
    let mut policies = Vec::new();
    for s in stakeholders {
        policies.push(Policy::new(
            &s.bpn,
            PolicySubject::Any,
            [Action::Read, Action::Copy],
            ResourceSelector::TwinWide,
        ));
        for role in [
            Role::RepairShop,
            Role::Dismantler,
            Role::Oem,
            Role::Recycler,
        ] {
            policies.push(Policy::new(
                &s.bpn,
                PolicySubject::Role { role },
                [Action::Write],
                ResourceSelector::TwinWide,
            ));
        }
    }
    policies
}

/// Generate a random but valid scenario: production, assembly, sale, a mix
/// of field updates, and optionally an end-of-life tail. Deterministic per
/// seed; used for fuzzing the strategy-equivalence properties.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = StdRng::seed_from_u64(seed);
    let oem = Bpn::new("BPNL-OEM");
    let dismantler = Bpn::new("BPNL-DISMANTLER");
    let consumer = Bpn::new("BPNL-CONSUMER");
    let n_suppliers = rng.random_range(2..=3usize);
    let n_shops = rng.random_range(1..=2usize);

    let mut stakeholders = vec![
        Stakeholder {
            bpn: oem.clone(),
            role: Role::Oem,
            authorized_dismantler: false,
        },
        Stakeholder {
            bpn: dismantler.clone(),
            role: Role::Dismantler,
            authorized_dismantler: true,
        },
        Stakeholder {
            bpn: consumer.clone(),
            role: Role::Consumer,
            authorized_dismantler: false,
        },
    ];
    let suppliers: Vec<Bpn> = (0..n_suppliers)
        .map(|i| Bpn::new(format!("BPNL-SUPPLIER-{i}")))
        .collect();
    for s in &suppliers {
        stakeholders.push(Stakeholder {
            bpn: s.clone(),
            role: Role::Supplier,
            authorized_dismantler: false,
        });
    }
    let shops: Vec<Bpn> = (0..n_shops)
        .map(|i| Bpn::new(format!("BPNL-REPAIR-{i}")))
        .collect();
    for s in &shops {
        stakeholders.push(Stakeholder {
            bpn: s.clone(),
            role: Role::RepairShop,
            authorized_dismantler: false,
        });
    }
    let policies = standard_policies(&stakeholders);

    let mut events = Vec::new();
    let mut tick = 0u64;
    let mut next_tick = |rng: &mut StdRng| {
        tick += rng.random_range(1..=4u64);
        tick
    };

    // Production: 2-4 parts, the first possibly multi-sourced.
    let n_parts = rng.random_range(2..=4usize);
    let mut part_handles = Vec::new();
    for p in 0..n_parts {
        let multi = p == 0 && rng.random_bool(0.4) && suppliers.len() >= 2;
        let chosen: Vec<Bpn> = if multi {
            suppliers.iter().take(2).cloned().collect()
        } else {
            vec![suppliers[rng.random_range(0..suppliers.len())].clone()]
        };
        let part = format!("part-{p}");
        events.push(LifecycleEvent {
            at: next_tick(&mut rng),
            actor: oem.clone(),
            kind: EventKind::ProduceComponent {
                part: part.clone(),
                suppliers: chosen.clone(),
                customer: oem.clone(),
            },
        });
        if chosen.len() == 1 {
            part_handles.push(part);
        } else {
            part_handles.push(format!("{part}@{}", chosen[0]));
        }
    }
    events.push(LifecycleEvent {
        at: next_tick(&mut rng),
        actor: oem.clone(),
        kind: EventKind::AssembleVehicle {
            vin: "VIN-RANDOM-1".into(),
            components: part_handles.clone(),
        },
    });
    events.push(LifecycleEvent {
        at: next_tick(&mut rng),
        actor: oem.clone(),
        kind: EventKind::Sell {
            asset: "VIN-RANDOM-1".into(),
            buyer: consumer.clone(),
        },
    });

    // Field phase: mileage, exchanges, overhauls.
    let mut vehicle_km = 0u64;
    let mut attached = part_handles.clone();
    let mut detached: Vec<String> = Vec::new();
    let mut spare_counter = 0usize;
    let n_updates = rng.random_range(3..=9usize);
    for _ in 0..n_updates {
        match rng.random_range(0..4u8) {
            0 | 1 => {
                vehicle_km += rng.random_range(1_000..=20_000u64);
                events.push(LifecycleEvent {
                    at: next_tick(&mut rng),
                    actor: if rng.random_bool(0.7) {
                        oem.clone()
                    } else {
                        shops[rng.random_range(0..shops.len())].clone()
                    },
                    kind: EventKind::MileageUpdate {
                        asset: "VIN-RANDOM-1".into(),
                        km: vehicle_km,
                    },
                });
            }
            2 => {
                if attached.is_empty() {
                    continue;
                }
                let shop = shops[rng.random_range(0..shops.len())].clone();
                let remove = attached.remove(rng.random_range(0..attached.len()));
                let supplier = suppliers[rng.random_range(0..suppliers.len())].clone();
                let spare = format!("spare-{spare_counter}");
                spare_counter += 1;
                events.push(LifecycleEvent {
                    at: next_tick(&mut rng),
                    actor: shop.clone(),
                    kind: EventKind::ProduceComponent {
                        part: spare.clone(),
                        suppliers: vec![supplier],
                        customer: shop.clone(),
                    },
                });
                let overhaul = rng.random_bool(0.5);
                events.push(LifecycleEvent {
                    at: next_tick(&mut rng),
                    actor: shop,
                    kind: EventKind::RepairExchange {
                        vehicle: "VIN-RANDOM-1".into(),
                        remove: remove.clone(),
                        install: spare.clone(),
                        overhaul_removed: overhaul,
                        state_of_health: if overhaul && rng.random_bool(0.5) {
                            Some(rng.random_range(0.5..0.95))
                        } else {
                            None
                        },
                    },
                });
                detached.push(remove);
                attached.push(spare);
            }
            _ => {
                if detached.is_empty() {
                    continue;
                }
                let component = detached[rng.random_range(0..detached.len())].clone();
                let shop = shops[rng.random_range(0..shops.len())].clone();
                events.push(LifecycleEvent {
                    at: next_tick(&mut rng),
                    actor: shop,
                    kind: EventKind::Overhaul {
                        component,
                        state_of_health: None,
                    },
                });
            }
        }
    }

    // End-of-life tail for most scenarios.
    if rng.random_bool(0.8) {
        events.push(LifecycleEvent {
            at: next_tick(&mut rng),
            actor: dismantler.clone(),
            kind: EventKind::Dismantle {
                asset: "VIN-RANDOM-1".into(),
            },
        });
        let strategies = [
            CeStrategyKind::Reuse,
            CeStrategyKind::Remanufacture,
            CeStrategyKind::Refurbish,
            CeStrategyKind::Recycle,
            CeStrategyKind::Recover,
            CeStrategyKind::Repurpose,
        ];
        let mut remanufactured: Option<String> = None;
        for component in attached.clone() {
            let strategy = strategies[rng.random_range(0..strategies.len())];
            events.push(LifecycleEvent {
                at: next_tick(&mut rng),
                actor: dismantler.clone(),
                kind: EventKind::CeDecision {
                    component: component.clone(),
                    strategy,
                },
            });
            match strategy {
                CeStrategyKind::Recycle => {
                    events.push(LifecycleEvent {
                        at: next_tick(&mut rng),
                        actor: dismantler.clone(),
                        kind: EventKind::RecyclingReport {
                            component: component.clone(),
                            material: "mixed-metals".into(),
                            quota: (rng.random_range(50..=98u32) as f64) / 100.0,
                            secondary_material_fraction: Some(
                                (rng.random_range(10..=60u32) as f64) / 100.0,
                            ),
                        },
                    });
                }
                CeStrategyKind::Remanufacture if remanufactured.is_none() => {
                    remanufactured = Some(component.clone());
                }
                _ => {}
            }
        }
        if let Some(component) = remanufactured {
            events.push(LifecycleEvent {
                at: next_tick(&mut rng),
                actor: oem.clone(),
                kind: EventKind::RemanufactureIntoVehicle {
                    component,
                    vin: "VIN-RANDOM-2".into(),
                },
            });
        }
    }

    Scenario {
        name: format!("random-{seed}"),
        seed,
        stakeholders,
        policies,
        mandatory_copy_kinds: default_mandatory_kinds(),
        events,
    }
}

/// Load and validate a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)?;
    let scenario: Scenario = serde_json::from_str(&text).map_err(|e| Error::ParseError {
        line: e.line(),
        reason: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

/// Write a scenario as pretty-printed JSON.
pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(scenario).expect("scenario serializes");
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_validates() {
        let scenario = Scenario::builtin();
        scenario.validate().unwrap();
    }

    #[test]
    fn builtin_has_two_repairs_at_distinct_shops() {
        let scenario = Scenario::builtin();
        let repair_actors: BTreeSet<&Bpn> = scenario
            .events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::RepairExchange { .. }))
            .map(|e| &e.actor)
            .collect();
        assert!(repair_actors.len() >= 2);
    }

    #[test]
    fn builtin_usage_span_is_parameterized() {
        let short = Scenario::builtin_with_usage_years(10);
        short.validate().unwrap();
        let default = Scenario::builtin();
        let last = |s: &Scenario| s.events.last().unwrap().at;
        assert_eq!(last(&default), 206);
        assert!(last(&short) < last(&default));
    }

    #[test]
    fn undeclared_actor_is_rejected() {
        let mut scenario = Scenario::builtin();
        scenario.events[0].actor = Bpn::new("BPNL-GHOST");
        let err = scenario.validate().unwrap_err();
        assert!(matches!(err, Error::ValidationError(_)));
    }

    #[test]
    fn unbound_handle_is_rejected() {
        let mut scenario = Scenario::builtin();
        scenario.events.push(LifecycleEvent {
            at: 999,
            actor: Bpn::new("BPNL-OEM"),
            kind: EventKind::MileageUpdate {
                asset: "no-such-part".into(),
                km: 1,
            },
        });
        let err = scenario.validate().unwrap_err();
        assert!(matches!(err, Error::ValidationError(_)));
    }

    #[test]
    fn backwards_timeline_is_rejected() {
        let mut scenario = Scenario::builtin();
        let n = scenario.events.len();
        scenario.events.swap(n - 1, n - 2);
        assert!(scenario.validate().is_err());
    }

    #[test]
    fn scenario_roundtrips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scenario.json");
        let scenario = Scenario::builtin();
        save_scenario(&scenario, &path).unwrap();
        let loaded = load_scenario(&path).unwrap();
        assert_eq!(scenario, loaded);
    }

    #[test]
    fn malformed_event_kind_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        let mut text = serde_json::to_string_pretty(&Scenario::builtin()).unwrap();
        text = text.replace("\"produce_component\"", "\"produce_gadget\"");
        std::fs::write(&path, text).unwrap();
        match load_scenario(&path).unwrap_err() {
            Error::ParseError { line, .. } => assert!(line > 0),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn weak_mandatory_copy_policy_is_rejected() {
        let mut scenario = Scenario::builtin();
        scenario.policies.push(Policy {
            owner_bpn: Bpn::new("BPNL-OEM"),
            subject: PolicySubject::Any,
            actions: [Action::Read].into_iter().collect(),
            resource: ResourceSelector::TwinWide,
            mandatory_copy: true,
        });
        let err = scenario.validate().unwrap_err();
        assert!(matches!(err, Error::ValidationError(_)));
    }

    #[test]
    fn random_scenarios_validate_and_are_deterministic() {
        for seed in 0..25 {
            let a = random_scenario(seed);
            let b = random_scenario(seed);
            assert_eq!(a, b);
            a.validate().unwrap();
        }
    }
}
