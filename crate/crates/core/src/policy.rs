//! Access and usage policies, contract negotiation, and policy propagation
//! on copy.
//!
//! The policy language is a flat allow-list: the data owner declares which
//! subjects may perform which actions on which resources. Evaluation is
//! deny-by-default and pure; the same request against the same policy set
//! always yields the same decision. Obligations, duties, and cryptographic
//! enforcement are out of scope.
//!
//! Write access into a twin is governed by the twin creator (they control
//! the shell); read/copy access to a submodel version is governed by that
//! version's data owner (`origin_bpn`).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bpn, Role, SemanticKind, Submodel};
use crate::traffic::{Message, MessageKind, TrafficLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Read,
    Write,
    Copy,
    Share,
}

impl Action {
    pub const ALL: [Action; 4] = [Action::Read, Action::Write, Action::Copy, Action::Share];

    pub fn as_str(&self) -> &'static str {
        match self {
            Action::Read => "read",
            Action::Write => "write",
            Action::Copy => "copy",
            Action::Share => "share",
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Who a policy applies to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySubject {
    Any,
    Bpn { bpn: Bpn },
    Role { role: Role },
}

/// What a policy applies to: the whole twin or a single aspect stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResourceSelector {
    TwinWide,
    Semantic { semantic: SemanticKind },
}

impl ResourceSelector {
    fn matches(&self, kind: Option<SemanticKind>) -> bool {
        match self {
            ResourceSelector::TwinWide => true,
            ResourceSelector::Semantic { semantic } => kind == Some(*semantic),
        }
    }
}

/// One allow rule, authored by the data owner. `mandatory_copy` marks the
/// license an updating party grants the original twin creator so updates can
/// be copied back; it always carries at least read and copy rights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub owner_bpn: Bpn,
    pub subject: PolicySubject,
    pub actions: BTreeSet<Action>,
    pub resource: ResourceSelector,
    #[serde(default)]
    pub mandatory_copy: bool,
}

impl Policy {
    pub fn new(
        owner: &Bpn,
        subject: PolicySubject,
        actions: impl IntoIterator<Item = Action>,
        resource: ResourceSelector,
    ) -> Self {
        Policy {
            owner_bpn: owner.clone(),
            subject,
            actions: actions.into_iter().collect(),
            resource,
            mandatory_copy: false,
        }
    }

    /// The license an updating party must attach to mandatory data: the
    /// original twin creator may read, copy, and share it.
    pub fn mandatory_copy_grant(owner: &Bpn, creator: &Bpn, kind: SemanticKind) -> Self {
        Policy {
            owner_bpn: owner.clone(),
            subject: PolicySubject::Bpn {
                bpn: creator.clone(),
            },
            actions: [Action::Read, Action::Copy, Action::Share]
                .into_iter()
                .collect(),
            resource: ResourceSelector::Semantic { semantic: kind },
            mandatory_copy: true,
        }
    }

    fn subject_matches(&self, actor: &Bpn, role: Option<Role>) -> bool {
        match &self.subject {
            PolicySubject::Any => true,
            PolicySubject::Bpn { bpn } => bpn == actor,
            PolicySubject::Role { role: r } => role == Some(*r),
        }
    }
}

/// Access request evaluated against a policy set.
#[derive(Debug, Clone)]
pub struct AccessRequest<'a> {
    pub actor: &'a Bpn,
    pub actor_role: Option<Role>,
    /// Data owner of the requested resource.
    pub owner: &'a Bpn,
    pub action: Action,
    /// `None` requests twin-wide access.
    pub kind: Option<SemanticKind>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Allow,
    Deny(DenyReason),
}

impl Decision {
    pub fn is_allow(&self) -> bool {
        matches!(self, Decision::Allow)
    }
}

/// First failing rule, carried for report explanations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenyReason {
    NoMatchingPolicy,
    SubjectMismatch,
    ActionNotGranted,
}

impl fmt::Display for DenyReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DenyReason::NoMatchingPolicy => f.write_str("no policy covers this resource"),
            DenyReason::SubjectMismatch => f.write_str("no policy covers this subject"),
            DenyReason::ActionNotGranted => {
                f.write_str("matching policy does not grant the action")
            }
        }
    }
}

/// Pure policy decision. The owner always has full access to their own data
/// (self-determination); everyone else needs an owner-authored policy whose
/// subject, resource, and action all match.
pub fn evaluate(request: &AccessRequest, policies: &[Policy]) -> Decision {
    if request.actor == request.owner {
        return Decision::Allow;
    }
    let mut best_miss = DenyReason::NoMatchingPolicy;
    for policy in policies {
        if &policy.owner_bpn != request.owner || !policy.resource.matches(request.kind) {
            continue;
        }
        if !policy.subject_matches(request.actor, request.actor_role) {
            best_miss = deeper(best_miss, DenyReason::SubjectMismatch);
            continue;
        }
        if !policy.actions.contains(&request.action) {
            best_miss = deeper(best_miss, DenyReason::ActionNotGranted);
            continue;
        }
        return Decision::Allow;
    }
    Decision::Deny(best_miss)
}

fn deeper(current: DenyReason, candidate: DenyReason) -> DenyReason {
    let depth = |r: &DenyReason| match r {
        DenyReason::NoMatchingPolicy => 0,
        DenyReason::SubjectMismatch => 1,
        DenyReason::ActionNotGranted => 2,
    };
    if depth(&candidate) > depth(&current) {
        candidate
    } else {
        current
    }
}

/// Agreement produced by a successful negotiation; granted actions never
/// exceed what the matching policies allowed at negotiation time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractAgreement {
    pub consumer_bpn: Bpn,
    pub provider_bpn: Bpn,
    pub resource: String,
    pub granted_actions: BTreeSet<Action>,
    pub at: u64,
}

/// Cache of concluded agreements. One negotiation message is emitted per
/// distinct `(consumer, provider, resource, action)`; repeat requests reuse
/// the agreement silently.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementBook {
    pub agreements: Vec<ContractAgreement>,
}

impl AgreementBook {
    pub fn covers(&self, consumer: &Bpn, provider: &Bpn, resource: &str, action: Action) -> bool {
        self.agreements.iter().any(|a| {
            &a.consumer_bpn == consumer
                && &a.provider_bpn == provider
                && a.resource == resource
                && a.granted_actions.contains(&action)
        })
    }

    pub fn len(&self) -> usize {
        self.agreements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agreements.is_empty()
    }
}

/// Negotiate access before a cross-stakeholder data operation.
///
/// On success the agreement is cached and (for a fresh agreement) one
/// `ContractNegotiation` message is recorded. Rejections surface the deny
/// reason and leave no trace in the message log; the caller records them as
/// denied interactions in the event log.
#[allow(clippy::too_many_arguments)]
pub fn negotiate(
    request: &AccessRequest,
    policies: &[Policy],
    provider: &Bpn,
    provider_available: bool,
    resource: &str,
    book: &mut AgreementBook,
    traffic: &mut TrafficLog,
    at: u64,
) -> Result<()> {
    if request.actor == provider {
        // Local access; nothing to negotiate.
        return Ok(());
    }
    if !provider_available {
        return Err(Error::RegistryUnavailable(provider.to_string()));
    }
    if book.covers(request.actor, provider, resource, request.action) {
        return Ok(());
    }
    match evaluate(request, policies) {
        Decision::Allow => {
            book.agreements.push(ContractAgreement {
                consumer_bpn: request.actor.clone(),
                provider_bpn: provider.clone(),
                resource: resource.to_string(),
                granted_actions: [request.action].into_iter().collect(),
                at,
            });
            // The negotiation message names the granted action so the log
            // is auditable without the agreement book.
            traffic.record(Message::new(
                MessageKind::ContractNegotiation,
                request.actor,
                provider,
                format!("{resource}:{}", request.action.as_str()),
                at,
            ));
            Ok(())
        }
        Decision::Deny(reason) => Err(Error::NegotiationRejected(format!(
            "{} may not {} {} of {}: {}",
            request.actor, request.action, resource, request.owner, reason
        ))),
    }
}

/// Copy a submodel into another party's twin, carrying provenance and the
/// source's policies verbatim. The copy keeps the original data owner even
/// when the source is itself a copy, and the copier gains no rights beyond
/// the carried policies.
pub fn propagate_on_copy(source: &Submodel, version: u32, created_at: u64) -> Submodel {
    Submodel {
        kind: source.kind,
        payload: source.payload.clone(),
        origin_bpn: source.origin_bpn.clone(),
        external_copy: true,
        policies: source.policies.clone(),
        version,
        created_at,
    }
}
