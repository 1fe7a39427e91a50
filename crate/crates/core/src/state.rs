//! The canonical piling state and its transactional update contract.
//!
//! Every mutating operation runs against a scratch copy and is swapped in
//! only on success, so a rejected operation never leaves a half-applied
//! state behind. Each committed transaction advances `epoch` by one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::arrangement::{ArrangeBySpec, ItemOffsetPolicy, PileReducer};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grouping::ProximityKind;
use crate::interaction::{Dispersion, Hover, InteractionMode, LayerState};
use crate::model::{Canvas, Item, ItemId, Pile, PileId, Zoom};
use crate::view::ViewProperty;
use crate::STATE_VERSION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PilingState {
    pub version: u32,
    pub seed: u64,
    #[serde(default)]
    pub epoch: u64,
    pub canvas: Canvas,
    #[serde(default)]
    pub zoom: Zoom,
    /// Items never change once ingested, so copies of the state share them.
    #[serde(with = "items_seq")]
    pub items: BTreeMap<ItemId, Arc<Item>>,
    /// Unzoomed home position of every item: its anchor, or the grid slot it
    /// was ingested into.
    #[serde(default)]
    pub anchors: BTreeMap<ItemId, Vec2>,
    /// Visible piles. While a layer is open, the other piles wait in `layer`.
    #[serde(with = "piles_seq")]
    pub piles: BTreeMap<PileId, Pile>,
    #[serde(default)]
    pub next_pile_id: u64,
    #[serde(default)]
    pub view_config: BTreeMap<String, ViewProperty>,
    #[serde(default)]
    pub offset_policy: ItemOffsetPolicy,
    #[serde(default)]
    pub pile_reducer: PileReducer,
    #[serde(default)]
    pub arrangement: Option<ArrangeBySpec>,
    #[serde(default)]
    pub zoom_grouping: Option<ProximityKind>,
    #[serde(default)]
    pub dispersion_backup: Option<Dispersion>,
    #[serde(default)]
    pub layer: Option<LayerState>,
    #[serde(default)]
    pub mode: InteractionMode,
    #[serde(default)]
    pub hover: Option<Hover>,
}

mod items_seq {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<ItemId, Arc<Item>>, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.values().map(|i| &**i))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<BTreeMap<ItemId, Arc<Item>>, D::Error> {
        let items: Vec<Item> = Vec::deserialize(d)?;
        let len = items.len();
        let map: BTreeMap<ItemId, Arc<Item>> = items.into_iter().map(|i| (i.id.clone(), Arc::new(i))).collect();
        if map.len() != len {
            return Err(serde::de::Error::custom("duplicate item id"));
        }
        Ok(map)
    }
}

pub(crate) mod piles_seq {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(map: &BTreeMap<PileId, Pile>, s: S) -> core::result::Result<S::Ok, S::Error> {
        s.collect_seq(map.values())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<BTreeMap<PileId, Pile>, D::Error> {
        let piles: Vec<Pile> = Vec::deserialize(d)?;
        let len = piles.len();
        let map: BTreeMap<PileId, Pile> = piles.into_iter().map(|p| (p.id, p)).collect();
        if map.len() != len {
            return Err(serde::de::Error::custom("duplicate pile id"));
        }
        Ok(map)
    }
}

/// Validates a batch of items and assigns default ids.
pub(crate) fn ingest(items: Vec<Item>) -> Result<Vec<Item>> {
    let mut seen = BTreeSet::new();
    let mut width: Option<(usize, ItemId)> = None;
    let mut out = Vec::with_capacity(items.len());
    for (index, mut item) in items.into_iter().enumerate() {
        if item.id.as_str().is_empty() {
            item.id = ItemId(format!("{index}"));
        }
        if !seen.insert(item.id.clone()) {
            return Err(Error::DuplicateId(item.id));
        }
        if let Some(features) = &item.features {
            match &width {
                None => width = Some((features.len(), item.id.clone())),
                Some((w, _)) if *w != features.len() => {
                    return Err(Error::FeatureLengthMismatch { id: item.id.clone(), expected: *w, found: features.len() });
                }
                Some(_) => {}
            }
            if features.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFiniteFeature(item.id));
            }
        }
        if item.anchor.is_some_and(|a| !a.is_finite()) {
            return Err(Error::NonFinite);
        }
        out.push(item);
    }
    Ok(out)
}

impl PilingState {
    /// One singleton pile per item, laid out row-major on the grid. Epoch 0.
    pub fn new(items: Vec<Item>, canvas: Canvas, seed: u64) -> Result<PilingState> {
        canvas.validate()?;
        let items = ingest(items)?;
        let mut state = PilingState {
            version: STATE_VERSION,
            seed,
            epoch: 0,
            canvas,
            zoom: Zoom::default(),
            items: BTreeMap::new(),
            anchors: BTreeMap::new(),
            piles: BTreeMap::new(),
            next_pile_id: 0,
            view_config: BTreeMap::new(),
            offset_policy: ItemOffsetPolicy::default(),
            pile_reducer: PileReducer::Cover,
            arrangement: None,
            zoom_grouping: None,
            dispersion_backup: None,
            layer: None,
            mode: InteractionMode::Idle,
            hover: None,
        };
        for (slot, item) in items.into_iter().enumerate() {
            let pos = canvas.slot_center(slot);
            state.anchors.insert(item.id.clone(), item.anchor.unwrap_or(pos));
            let id = state.alloc_pile_id();
            state.piles.insert(id, Pile::new(id, alloc::vec![item.id.clone()], pos, 0));
            state.items.insert(item.id.clone(), Arc::new(item));
        }
        Ok(state)
    }

    /// Runs `f` on a scratch copy; commits and advances the epoch on success.
    pub(crate) fn transact<R>(&mut self, f: impl FnOnce(&mut PilingState) -> Result<R>) -> Result<R> {
        let mut next = self.clone();
        let out = f(&mut next)?;
        next.tidy();
        next.epoch = self.epoch + 1;
        *self = next;
        Ok(out)
    }

    pub(crate) fn alloc_pile_id(&mut self) -> PileId {
        let id = PileId(self.next_pile_id);
        self.next_pile_id += 1;
        id
    }

    /// Drops hover and drag references to piles or items that no longer exist.
    fn tidy(&mut self) {
        if let Some(h) = &self.hover {
            if !self.piles.get(&h.pile).is_some_and(|p| p.contains(&h.item)) {
                self.hover = None;
            }
        }
        if let Some(pile) = self.mode.pile() {
            if !self.piles.contains_key(&pile) {
                self.mode = InteractionMode::Idle;
            }
        }
    }

    pub fn pile(&self, id: PileId) -> Result<&Pile> {
        self.piles.get(&id).ok_or(Error::UnknownPile(id))
    }

    pub(crate) fn pile_mut(&mut self, id: PileId) -> Result<&mut Pile> {
        self.piles.get_mut(&id).ok_or(Error::UnknownPile(id))
    }

    pub fn item(&self, id: &ItemId) -> Option<&Item> {
        self.items.get(id).map(|i| &**i)
    }

    /// The visible pile holding `item`.
    pub fn pile_of(&self, item: &ItemId) -> Option<PileId> {
        self.piles.values().find(|p| p.contains(item)).map(|p| p.id)
    }

    /// Visible piles followed by piles hidden behind an open layer.
    pub fn all_piles(&self) -> impl Iterator<Item = &Pile> {
        self.piles.values().chain(self.layer.iter().flat_map(|l| l.hidden.values()))
    }

    /// One above the highest z of any pile, visible or hidden.
    pub(crate) fn top_z(&self) -> i64 {
        self.all_piles().map(|p| p.z).max().map_or(0, |z| z + 1)
    }

    pub fn anchor(&self, item: &ItemId) -> Vec2 {
        self.anchors.get(item).copied().unwrap_or_default()
    }

    /// Item-set partition over visible and hidden piles, canonically sorted.
    pub fn partition(&self) -> Vec<Vec<ItemId>> {
        let mut parts: Vec<Vec<ItemId>> = self
            .all_piles()
            .map(|p| {
                let mut ids = p.item_ids.clone();
                ids.sort();
                ids
            })
            .collect();
        parts.sort();
        parts
    }

    /// Fills in bookkeeping that a hand-written state file may omit (homes,
    /// the pile id counter) and checks the result.
    pub fn finish_load(&mut self) -> core::result::Result<(), String> {
        self.canvas.validate().map_err(|e| format!("{e}"))?;
        if !self.zoom.is_valid() {
            return Err("invalid zoom".into());
        }
        let items: Vec<Item> = self.items.values().map(|i| Item::clone(i)).collect();
        ingest(items).map_err(|e| format!("{e}"))?;
        let positions: BTreeMap<ItemId, Vec2> =
            self.all_piles().flat_map(|p| p.item_ids.iter().map(move |id| (id.clone(), p.position()))).collect();
        for item in self.items.values() {
            if !self.anchors.contains_key(&item.id) {
                let home = item.anchor.or_else(|| positions.get(&item.id).copied()).unwrap_or_default();
                self.anchors.insert(item.id.clone(), home);
            }
        }
        let top = self.all_piles().map(|p| p.id.0 + 1).max().unwrap_or(0);
        self.next_pile_id = self.next_pile_id.max(top);
        self.check_invariants()
    }

    /// Checks the structural invariants: every item in exactly one pile,
    /// non-empty duplicate-free piles, and consistent bookkeeping.
    pub fn check_invariants(&self) -> core::result::Result<(), String> {
        let mut seen: BTreeSet<&ItemId> = BTreeSet::new();
        for pile in self.all_piles() {
            if pile.item_ids.is_empty() {
                return Err(format!("pile {} is empty", pile.id));
            }
            if pile.id.0 >= self.next_pile_id {
                return Err(format!("pile {} not below the id counter {}", pile.id, self.next_pile_id));
            }
            for item in &pile.item_ids {
                if !self.items.contains_key(item) {
                    return Err(format!("pile {} references unknown item {item:?}", pile.id));
                }
                if !seen.insert(item) {
                    return Err(format!("item {item:?} appears in more than one place (pile {})", pile.id));
                }
            }
        }
        if seen.len() != self.items.len() {
            let missing: Vec<&ItemId> = self.items.keys().filter(|k| !seen.contains(k)).collect();
            return Err(format!("items without a pile: {missing:?}"));
        }
        if let Some(layer) = &self.layer {
            if layer.hidden.keys().any(|id| self.piles.contains_key(id)) {
                return Err("a pile is both hidden and visible".into());
            }
        }
        if let Some(d) = &self.dispersion_backup {
            if !self.piles.get(&d.pile.id).is_some_and(|p| p.temporarily_dispersed) {
                return Err(format!("dispersion backup for {} without a dispersed pile", d.pile.id));
            }
        }
        Ok(())
    }

    /// Joins a fresh item list against the current one by id.
    ///
    /// Matching ids are replaced in place, missing ids leave their piles
    /// (emptied piles are deleted), and new ids become singleton piles
    /// appended to the layout. Open dispersions and layers are closed first.
    pub fn update_items(&mut self, new_items: Vec<Item>) -> Result<()> {
        let new_items = ingest(new_items)?;
        self.transact(|s| {
            s.restore_dispersion();
            s.close_layer();
            let incoming: BTreeSet<ItemId> = new_items.iter().map(|i| i.id.clone()).collect();
            let mut changed = false;
            s.piles.retain(|_, pile| {
                let before = pile.item_ids.len();
                pile.item_ids.retain(|id| incoming.contains(id));
                if pile.item_ids.len() != before {
                    changed = true;
                    if let Some(prov) = &mut pile.provenance {
                        prov.parts.iter_mut().for_each(|part| part.retain(|id| incoming.contains(id)));
                        prov.parts.retain(|part| !part.is_empty());
                    }
                }
                !pile.item_ids.is_empty()
            });
            s.anchors.retain(|id, _| incoming.contains(id));

            let mut slot = s.piles.len();
            let mut items = BTreeMap::new();
            for item in new_items {
                let id = item.id.clone();
                if !s.items.contains_key(&id) {
                    changed = true;
                    let pos = s.canvas.slot_center(slot);
                    slot += 1;
                    s.anchors.insert(id.clone(), item.anchor.unwrap_or(pos));
                    let pid = s.alloc_pile_id();
                    s.piles.insert(pid, Pile::new(pid, alloc::vec![id.clone()], pos, 0));
                } else if let Some(anchor) = item.anchor {
                    s.anchors.insert(id.clone(), anchor);
                }
                items.insert(id, Arc::new(item));
            }
            s.items = items;
            if changed {
                s.reapply_arrangement()?;
            }
            Ok(())
        })
    }
}
