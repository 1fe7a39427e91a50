//! Messages sent to a renderer after each transaction.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::animation::{plan_transition, AnimationPlan};
use crate::interaction::{Dispersion, Hover, InteractionMode};
use crate::model::{Pile, PileId, Zoom};
use crate::state::PilingState;

/// Difference between two states as seen by a renderer: the visible piles
/// that were added or changed, those that vanished, and the small amount of
/// session state a renderer needs to draw the new frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StateDelta {
    pub epoch: u64,
    pub changed_piles: Vec<Pile>,
    pub removed_piles: Vec<PileId>,
    pub animation_plan: Option<AnimationPlan>,
    pub zoom: Zoom,
    pub mode: InteractionMode,
    pub hover: Option<Hover>,
    pub dispersion: Option<Dispersion>,
    pub layer_open: bool,
}

impl StateDelta {
    pub fn between(old: &PilingState, new: &PilingState) -> Self {
        StateDelta {
            epoch: new.epoch,
            changed_piles: new.piles.values().filter(|p| old.piles.get(&p.id) != Some(*p)).cloned().collect(),
            removed_piles: old.piles.keys().filter(|id| !new.piles.contains_key(id)).copied().collect(),
            animation_plan: plan_transition(old, new),
            zoom: new.zoom,
            mode: new.mode.clone(),
            hover: new.hover.clone(),
            dispersion: new.dispersion_backup.clone(),
            layer_open: new.layer.is_some(),
        }
    }

    /// Full delta against an empty scene, for a renderer that is starting up.
    pub fn snapshot(state: &PilingState) -> Self {
        let mut blank = state.clone();
        blank.piles.clear();
        let mut d = Self::between(&blank, state);
        d.animation_plan = None;
        d
    }

    pub fn is_empty(&self) -> bool {
        self.changed_piles.is_empty() && self.removed_piles.is_empty()
    }

    /// Applies the delta to a renderer-side copy of the visible piles.
    pub fn apply_to(&self, piles: &mut BTreeMap<PileId, Pile>) {
        for id in &self.removed_piles {
            piles.remove(id);
        }
        for p in &self.changed_piles {
            piles.insert(p.id, p.clone());
        }
    }
}
