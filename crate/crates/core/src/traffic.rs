//! Counted units of inter-stakeholder traffic.
//!
//! Every cross-stakeholder interaction emits at least one [`Message`];
//! operations a stakeholder performs against its own registry emit none.
//! Message logs are the raw input for all traffic metrics and can be
//! replayed independently of world state.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::Bpn;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    RegistryLookup,
    DiscoveryQuery,
    ContractNegotiation,
    SubmodelRead,
    SubmodelWrite,
    Notification,
    Pull,
}

impl MessageKind {
    pub const ALL: [MessageKind; 7] = [
        MessageKind::RegistryLookup,
        MessageKind::DiscoveryQuery,
        MessageKind::ContractNegotiation,
        MessageKind::SubmodelRead,
        MessageKind::SubmodelWrite,
        MessageKind::Notification,
        MessageKind::Pull,
    ];

    /// Read-path kinds: traffic a consumer generates while locating and
    /// fetching data, as opposed to writing or synchronizing it.
    pub fn is_read_path(&self) -> bool {
        matches!(
            self,
            MessageKind::RegistryLookup | MessageKind::DiscoveryQuery | MessageKind::SubmodelRead
        )
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub kind: MessageKind,
    pub from_bpn: Bpn,
    /// Receiving stakeholder; discovery queries address the network service
    /// and carry an empty receiver.
    pub to_bpn: Bpn,
    pub resource: String,
    /// Event sequence number of the causing event (logical time).
    pub at: u64,
}

impl Message {
    pub fn new(
        kind: MessageKind,
        from: &Bpn,
        to: &Bpn,
        resource: impl Into<String>,
        at: u64,
    ) -> Self {
        Message {
            kind,
            from_bpn: from.clone(),
            to_bpn: to.clone(),
            resource: resource.into(),
            at,
        }
    }
}

/// Append-only message log for one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficLog {
    pub messages: Vec<Message>,
}

impl TrafficLog {
    pub fn record(&mut self, message: Message) {
        self.messages.push(message);
    }

    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages.iter().filter(|m| m.kind == kind).count()
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}
