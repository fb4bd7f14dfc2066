//! Per-stakeholder twin registries and the network-wide discovery index.
//!
//! Discovery is modeled as one logically central index mapping a common
//! identifier (VIN, part instance id, asset id) to the set of stakeholders
//! hosting twins for it. Provider loss marks a registry unavailable without
//! deleting data, so retention metrics can distinguish "unreachable" from
//! "transferred".

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AssetId, AssetIdentity, Bpn, DigitalTwin, SemanticKind, TwinId};

/// Descriptor entry served for one hosted twin.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinDescriptor {
    pub twin_id: TwinId,
    pub asset_id: AssetId,
    pub specific_asset_ids: BTreeMap<String, String>,
    pub semantic_kinds: Vec<SemanticKind>,
    pub endpoint: String,
}

/// Descriptor view of a whole registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistryDescriptor {
    pub owner_bpn: Bpn,
    pub available: bool,
    pub entries: BTreeMap<TwinId, TwinDescriptor>,
}

/// One stakeholder's twin registry. Twins live here; the descriptor view is
/// derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Registry {
    pub owner_bpn: Bpn,
    pub available: bool,
    twins: BTreeMap<TwinId, DigitalTwin>,
    by_asset: BTreeMap<AssetId, TwinId>,
}

impl Registry {
    pub fn new(owner: Bpn) -> Self {
        Registry {
            owner_bpn: owner,
            available: true,
            twins: BTreeMap::new(),
            by_asset: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, twin: DigitalTwin) -> Result<()> {
        if !self.available {
            return Err(Error::RegistryUnavailable(self.owner_bpn.to_string()));
        }
        if self.by_asset.contains_key(&twin.asset_id) {
            return Err(Error::DuplicateTwin {
                asset: twin.asset_id.to_string(),
                creator: self.owner_bpn.to_string(),
            });
        }
        self.by_asset
            .insert(twin.asset_id.clone(), twin.twin_id.clone());
        self.twins.insert(twin.twin_id.clone(), twin);
        Ok(())
    }

    /// Remove a twin for re-hosting elsewhere; keeps the registry usable.
    pub fn remove(&mut self, twin_id: &TwinId) -> Option<DigitalTwin> {
        let twin = self.twins.remove(twin_id)?;
        self.by_asset.remove(&twin.asset_id);
        Some(twin)
    }

    pub fn twin(&self, twin_id: &TwinId) -> Option<&DigitalTwin> {
        self.twins.get(twin_id)
    }

    pub fn twin_mut(&mut self, twin_id: &TwinId) -> Option<&mut DigitalTwin> {
        self.twins.get_mut(twin_id)
    }

    pub fn twin_of_asset(&self, asset: &AssetId) -> Option<&DigitalTwin> {
        self.by_asset.get(asset).and_then(|id| self.twins.get(id))
    }

    pub fn twin_of_asset_mut(&mut self, asset: &AssetId) -> Option<&mut DigitalTwin> {
        let id = self.by_asset.get(asset)?.clone();
        self.twins.get_mut(&id)
    }

    pub fn twins(&self) -> impl Iterator<Item = &DigitalTwin> {
        self.twins.values()
    }

    pub fn len(&self) -> usize {
        self.twins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twins.is_empty()
    }

    /// Pure read returning all descriptors matching an asset id or a
    /// specific asset id value. Callers count the lookup message.
    pub fn lookup(
        &self,
        needle: &str,
        identities: &BTreeMap<AssetId, AssetIdentity>,
    ) -> Result<Vec<TwinDescriptor>> {
        if !self.available {
            return Err(Error::RegistryUnavailable(self.owner_bpn.to_string()));
        }
        let matches: Vec<TwinDescriptor> = self
            .twins
            .values()
            .filter(|t| {
                t.asset_id.as_str() == needle
                    || identities
                        .get(&t.asset_id)
                        .map(|i| i.specific_asset_ids.values().any(|v| v == needle))
                        .unwrap_or(false)
            })
            .map(|t| self.descriptor_of(t, identities))
            .collect();
        if matches.is_empty() {
            return Err(Error::NotFound(needle.to_string()));
        }
        Ok(matches)
    }

    fn descriptor_of(
        &self,
        twin: &DigitalTwin,
        identities: &BTreeMap<AssetId, AssetIdentity>,
    ) -> TwinDescriptor {
        TwinDescriptor {
            twin_id: twin.twin_id.clone(),
            asset_id: twin.asset_id.clone(),
            specific_asset_ids: identities
                .get(&twin.asset_id)
                .map(|i| i.specific_asset_ids.clone())
                .unwrap_or_default(),
            semantic_kinds: twin.kinds_offered(),
            endpoint: format!("{}/{}", self.owner_bpn, twin.twin_id),
        }
    }

    pub fn descriptor(&self, identities: &BTreeMap<AssetId, AssetIdentity>) -> RegistryDescriptor {
        RegistryDescriptor {
            owner_bpn: self.owner_bpn.clone(),
            available: self.available,
            entries: self
                .twins
                .values()
                .map(|t| (t.twin_id.clone(), self.descriptor_of(t, identities)))
                .collect(),
        }
    }
}

/// Central discovery service: common identifier value -> providers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryIndex {
    pub index: BTreeMap<String, BTreeSet<Bpn>>,
}

impl DiscoveryIndex {
    /// Register a hosted twin under its asset id and every specific asset id
    /// value.
    pub fn register(&mut self, host: &Bpn, identity: &AssetIdentity) {
        self.index
            .entry(identity.asset_id.to_string())
            .or_default()
            .insert(host.clone());
        for value in identity.specific_asset_ids.values() {
            self.index
                .entry(value.clone())
                .or_default()
                .insert(host.clone());
        }
    }

    /// Drop every entry for a provider that left the network.
    pub fn deregister_provider(&mut self, bpn: &Bpn) {
        for providers in self.index.values_mut() {
            providers.remove(bpn);
        }
        self.index.retain(|_, v| !v.is_empty());
    }

    /// Providers for a common identifier; empty set when unknown. Callers
    /// count the discovery query message.
    pub fn discover(&self, needle: &str) -> BTreeSet<Bpn> {
        self.index.get(needle).cloned().unwrap_or_default()
    }
}
