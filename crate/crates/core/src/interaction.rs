//! Gesture state machine and browsing: hit testing, drag and drop, the
//! lasso lifecycle, temporary dispersion, layered browsing and hover
//! previews.
//!
//! Gestures never fail. Events that make no sense in the current mode are
//! ignored, and engine rejections are reported in [`GestureOutcome`] with
//! the state left untouched.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::animation::{plan_transition, AnimationPlan};
use crate::arrangement::ArrangeBySpec;
use crate::error::{Error, Result};
use crate::geometry::{centroid, point_in_polygon, Vec2};
use crate::grouping::ProximityKind;
use crate::model::{ItemId, Pile, PileId, Zoom};
use crate::state::PilingState;

/// Cursor footprint in canvas units.
pub const CURSOR_SIZE: f64 = 8.0;
/// Radius of the circle that appears after clicking empty canvas.
pub const LASSO_ARM_RADIUS: f64 = 2.0 * CURSOR_SIZE;
/// An armed lasso falls back to idle after this long.
pub const LASSO_ARM_TIMEOUT_MS: u64 = 3000;
/// Pointer travel below which a press-release counts as a click.
pub const CLICK_SLOP: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Modifiers {
    pub shift: bool,
    pub ctrl: bool,
    pub alt: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ContextAction {
    BrowseSeparately,
    LeaveLayer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum GestureKind {
    PointerDown,
    PointerMove,
    PointerUp,
    DoubleClick,
    ContextAction { action: ContextAction },
    /// Multiplicative zoom around the event position.
    WheelZoom { factor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GestureEvent {
    pub kind: GestureKind,
    pub position: Vec2,
    pub time_ms: u64,
    /// Explicit target; when absent the pile under `position` is used.
    #[serde(default)]
    pub target: Option<PileId>,
    #[serde(default)]
    pub modifiers: Modifiers,
}

impl GestureEvent {
    pub fn new(kind: GestureKind, position: Vec2, time_ms: u64) -> Self {
        GestureEvent { kind, position, time_ms, target: None, modifiers: Modifiers::default() }
    }

    pub fn on(mut self, pile: PileId) -> Self {
        self.target = Some(pile);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum InteractionMode {
    #[default]
    Idle,
    #[serde(rename_all = "camelCase")]
    Dragging { pile: PileId, grab_offset: Vec2, origin: Vec2 },
    #[serde(rename_all = "camelCase")]
    LassoArmed { origin: Vec2, since_ms: u64 },
    LassoActive { points: Vec<Vec2> },
    BrowsingPile { pile: PileId },
}

impl InteractionMode {
    pub fn pile(&self) -> Option<PileId> {
        match self {
            InteractionMode::Dragging { pile, .. } | InteractionMode::BrowsingPile { pile } => Some(*pile),
            _ => None,
        }
    }
}

/// Saved copy of a temporarily dispersed pile plus where its items are shown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Dispersion {
    pub pile: Pile,
    pub item_positions: Vec<(ItemId, Vec2)>,
}

/// A pile browsed on its own layer. Everything else waits in `hidden`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayerState {
    pub browsed: Pile,
    #[serde(with = "crate::state::piles_seq")]
    pub hidden: BTreeMap<PileId, Pile>,
    pub saved_next_pile_id: u64,
    pub saved_arrangement: Option<ArrangeBySpec>,
    pub saved_zoom_grouping: Option<ProximityKind>,
    pub saved_zoom: Zoom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hover {
    pub pile: PileId,
    pub item: ItemId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub pile: PileId,
    /// Set when the point falls on a preview rather than the cover.
    pub preview: Option<ItemId>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct GestureOutcome {
    pub plan: Option<AnimationPlan>,
    pub rejected: Option<Error>,
}

/// `ceil(sqrt(n))` for small `n`.
fn grid_columns(n: usize) -> usize {
    let mut c = 1;
    while c * c < n {
        c += 1;
    }
    c
}

impl PilingState {
    /// Centers of an `n`-item local grid around `center`, row-major.
    pub(crate) fn local_grid(&self, center: Vec2, n: usize) -> Vec<Vec2> {
        let cols = grid_columns(n);
        let rows = n.div_ceil(cols);
        let item = self.canvas.item_size();
        let cell = Vec2::new(item.x + self.canvas.padding, item.y + self.canvas.padding);
        (0..n)
            .map(|i| {
                let (r, c) = ((i / cols) as f64, (i % cols) as f64);
                center
                    + Vec2::new((c - (cols as f64 - 1.0) / 2.0) * cell.x, (r - (rows as f64 - 1.0) / 2.0) * cell.y)
            })
            .collect()
    }

    /// Topmost pile whose rendered bounds contain `point`.
    pub fn hit_test(&self, point: Vec2) -> Option<Hit> {
        self.hit_test_excluding(point, None)
    }

    pub fn hit_test_excluding(&self, point: Vec2, exclude: Option<PileId>) -> Option<Hit> {
        if !point.is_finite() {
            return None;
        }
        let pile = self
            .piles
            .values()
            .filter(|p| Some(p.id) != exclude && self.pile_bounds(p).contains(point))
            .max_by_key(|p| (p.z, p.id))?;
        let preview = self
            .pile_item_rects(pile)
            .into_iter()
            .rev()
            .find(|(_, r)| r.contains(point))
            .and_then(|(id, _)| (id != *pile.cover()).then_some(id));
        Some(Hit { pile: pile.id, preview })
    }

    /// Moves a pile without regrouping.
    pub fn move_pile(&mut self, pile: PileId, position: Vec2) -> Result<()> {
        if !position.is_finite() {
            return Err(Error::NonFinite);
        }
        self.pile(pile)?;
        self.transact(|s| {
            s.restore_dispersion();
            let z = s.top_z();
            let p = s.pile_mut(pile)?;
            p.set_position(position);
            p.z = z;
            Ok(())
        })
    }

    /// Spreads a pile's items into a local grid around the pile position.
    /// The items stay one pile. A singleton only ends any open dispersion.
    pub fn temporary_disperse(&mut self, pile: PileId) -> Result<()> {
        if self.pile(pile)?.len() < 2 {
            self.end_temporary_disperse();
            return Ok(());
        }
        self.transact(|s| {
            s.restore_dispersion();
            let z = s.top_z();
            let backup = s.pile(pile)?.clone();
            let grid = s.local_grid(backup.position(), backup.len());
            let item_positions = backup.item_ids.iter().cloned().zip(grid).collect();
            let p = s.pile_mut(pile)?;
            p.temporarily_dispersed = true;
            p.z = z;
            s.dispersion_backup = Some(Dispersion { pile: backup, item_positions });
            Ok(())
        })
    }

    pub fn end_temporary_disperse(&mut self) {
        if self.dispersion_backup.is_some() {
            let _ = self.transact(|s| {
                s.restore_dispersion();
                Ok(())
            });
        }
    }

    /// Puts a dispersed pile back exactly as it was. No epoch change.
    pub(crate) fn restore_dispersion(&mut self) {
        if let Some(d) = self.dispersion_backup.take() {
            if let Some(p) = self.piles.get_mut(&d.pile.id) {
                *p = d.pile;
            }
        }
    }

    /// Opens a layer showing only `pile`, its items laid out as singleton
    /// piles in a centered grid. Edits on the layer are committed on leave.
    pub fn browse_separately(&mut self, pile: PileId) -> Result<()> {
        if self.layer.is_some() {
            return Err(Error::MaxLayerDepth);
        }
        self.pile(pile)?;
        self.transact(|s| {
            s.restore_dispersion();
            s.hover = None;
            let browsed = s.piles.remove(&pile).unwrap();
            let hidden = core::mem::take(&mut s.piles);
            let mut z = hidden.values().map(|p| p.z).max().map_or(0, |z| z + 1).max(browsed.z + 1);
            let center = Vec2::new(s.canvas.width / 2.0, s.canvas.height / 2.0);
            let grid = s.local_grid(center, browsed.len());
            let saved_next_pile_id = s.next_pile_id;
            for (item, pos) in browsed.item_ids.clone().into_iter().zip(grid) {
                let id = s.alloc_pile_id();
                let mut p = Pile::new(id, alloc::vec![item], pos, z);
                p.layer = 1;
                z += 1;
                s.piles.insert(id, p);
            }
            s.layer = Some(LayerState {
                browsed,
                hidden,
                saved_next_pile_id,
                saved_arrangement: s.arrangement.take(),
                saved_zoom_grouping: s.zoom_grouping.take(),
                saved_zoom: s.zoom,
            });
            Ok(())
        })
    }

    /// Closes the open layer, if any.
    ///
    /// Without edits (every item still on its own) the browsed pile returns
    /// untouched. Otherwise it is replaced by the layer's piles, fanned out
    /// around its old position.
    pub fn leave_layer(&mut self) -> Result<()> {
        if self.layer.is_none() {
            return Ok(());
        }
        self.transact(|s| {
            s.close_layer();
            Ok(())
        })
    }

    pub(crate) fn close_layer(&mut self) {
        self.restore_dispersion();
        let Some(layer) = self.layer.take() else { return };
        self.hover = None;
        let edited = self.piles.values().any(|p| p.len() > 1);
        let layer_piles = core::mem::replace(&mut self.piles, layer.hidden);
        self.arrangement = layer.saved_arrangement;
        self.zoom_grouping = layer.saved_zoom_grouping;
        self.zoom = layer.saved_zoom;
        if !edited {
            self.piles.insert(layer.browsed.id, layer.browsed);
            self.next_pile_id = layer.saved_next_pile_id;
            return;
        }
        let origin = layer.browsed.position();
        let radius = self.canvas.cell_size().x;
        let n = layer_piles.len();
        let mut z = self.top_z().max(layer.browsed.z);
        for (i, (_, mut p)) in layer_piles.into_iter().enumerate() {
            p.layer = 0;
            p.provenance = None;
            p.set_position(origin.radial(i, n, radius));
            p.z = z;
            z += 1;
            self.piles.insert(p.id, p);
        }
    }

    /// Draws `item` on top of its pile without changing the grouping order.
    pub fn hover_preview(&mut self, pile: PileId, item: &ItemId) -> Result<()> {
        if !self.pile(pile)?.contains(item) {
            return Err(Error::ItemNotInPile { pile, item: item.clone() });
        }
        self.transact(|s| {
            s.hover = Some(Hover { pile, item: item.clone() });
            Ok(())
        })
    }

    pub fn end_hover(&mut self) {
        if self.hover.is_some() {
            let _ = self.transact(|s| {
                s.hover = None;
                Ok(())
            });
        }
    }

    /// Advances the gesture state machine by one event.
    pub fn apply_gesture(&mut self, event: &GestureEvent) -> GestureOutcome {
        if !event.position.is_finite() {
            return GestureOutcome::default();
        }
        let before = self.clone();
        let result = self.gesture_step(event);
        let mut outcome = GestureOutcome::default();
        match result {
            Ok(()) => {
                if self.epoch != before.epoch {
                    outcome.plan = plan_transition(&before, self);
                }
            }
            Err(e) => {
                *self = before;
                outcome.rejected = Some(e);
            }
        }
        outcome
    }

    fn set_mode(&mut self, mode: InteractionMode) {
        if self.mode != mode {
            let _ = self.transact(|s| {
                s.mode = mode;
                Ok(())
            });
        }
    }

    fn gesture_step(&mut self, event: &GestureEvent) -> Result<()> {
        let p = event.position;
        if let InteractionMode::LassoArmed { since_ms, .. } = self.mode {
            if event.time_ms.saturating_sub(since_ms) > LASSO_ARM_TIMEOUT_MS {
                self.set_mode(InteractionMode::Idle);
            }
        }
        match (&self.mode, event.kind) {
            (InteractionMode::LassoArmed { origin, .. }, GestureKind::PointerDown) => {
                if origin.distance(p) <= LASSO_ARM_RADIUS {
                    self.set_mode(InteractionMode::LassoActive { points: alloc::vec![p] });
                    Ok(())
                } else {
                    self.set_mode(InteractionMode::Idle);
                    self.pointer_down(event)
                }
            }
            (InteractionMode::Idle | InteractionMode::BrowsingPile { .. }, GestureKind::PointerDown) => self.pointer_down(event),
            (InteractionMode::Dragging { pile, grab_offset, .. }, GestureKind::PointerMove) => {
                let (pile, grab) = (*pile, *grab_offset);
                self.transact(|s| {
                    s.pile_mut(pile)?.set_position(p + grab);
                    Ok(())
                })
            }
            (InteractionMode::Dragging { pile, grab_offset, origin }, GestureKind::PointerUp) => {
                let (pile, grab, origin) = (*pile, *grab_offset, *origin);
                self.drop_pile(pile, grab, origin, p)
            }
            (InteractionMode::LassoActive { .. }, GestureKind::PointerMove) => self.transact(|s| {
                if let InteractionMode::LassoActive { points } = &mut s.mode {
                    points.push(p);
                }
                Ok(())
            }),
            (InteractionMode::LassoActive { points }, GestureKind::PointerUp) => {
                let mut polygon = points.clone();
                polygon.push(p);
                self.transact(|s| {
                    s.mode = InteractionMode::Idle;
                    if polygon.len() >= 3 {
                        s.lasso_inner(&polygon)?;
                    }
                    Ok(())
                })
            }
            (InteractionMode::BrowsingPile { pile }, GestureKind::PointerMove) => {
                let browsing = *pile;
                match self.hit_test(p) {
                    Some(Hit { pile, preview: Some(item) }) if pile == browsing => {
                        if self.hover.as_ref().is_none_or(|h| h.item != item) {
                            self.hover_preview(pile, &item)?;
                        }
                    }
                    Some(Hit { pile, preview: None }) if pile == browsing => self.end_hover(),
                    _ => {
                        self.end_hover();
                        self.set_mode(InteractionMode::Idle);
                    }
                }
                Ok(())
            }
            (_, GestureKind::DoubleClick) => {
                let target = event.target.or_else(|| self.hit_test(p).map(|h| h.pile));
                self.set_mode(InteractionMode::Idle);
                let active = self.dispersion_backup.as_ref().map(|d| d.pile.id);
                match (active, target) {
                    (Some(a), Some(t)) if a != t => self.temporary_disperse(t),
                    (Some(_), _) => {
                        self.end_temporary_disperse();
                        Ok(())
                    }
                    (None, Some(t)) => self.temporary_disperse(t),
                    (None, None) => Ok(()),
                }
            }
            (_, GestureKind::ContextAction { action }) => {
                self.set_mode(InteractionMode::Idle);
                match action {
                    ContextAction::BrowseSeparately => match event.target.or_else(|| self.hit_test(p).map(|h| h.pile)) {
                        Some(t) => self.browse_separately(t),
                        None => Ok(()),
                    },
                    ContextAction::LeaveLayer => self.leave_layer(),
                }
            }
            (_, GestureKind::WheelZoom { factor }) => {
                if !(factor.is_finite() && factor > 0.0) {
                    return Ok(());
                }
                let zoom = Zoom { scale: self.zoom.scale * factor, translate: p - (p - self.zoom.translate) * factor };
                self.zoom_update(zoom)
            }
            _ => Ok(()),
        }
    }

    fn pointer_down(&mut self, event: &GestureEvent) -> Result<()> {
        let p = event.position;
        let target = match event.target {
            Some(t) if self.piles.contains_key(&t) => Some(t),
            _ => self.hit_test(p).map(|h| h.pile),
        };
        self.transact(|s| {
            s.hover = None;
            match target {
                Some(pile) => {
                    s.restore_dispersion();
                    let z = s.top_z();
                    let pl = s.pile_mut(pile)?;
                    pl.z = z;
                    let grab_offset = pl.position() - p;
                    s.mode = InteractionMode::Dragging { pile, grab_offset, origin: p };
                }
                None => s.mode = InteractionMode::LassoArmed { origin: p, since_ms: event.time_ms },
            }
            Ok(())
        })
    }

    fn drop_pile(&mut self, pile: PileId, grab: Vec2, origin: Vec2, p: Vec2) -> Result<()> {
        if origin.distance(p) < CLICK_SLOP {
            return self.transact(|s| {
                s.pile_mut(pile)?.set_position(origin + grab);
                s.mode = InteractionMode::BrowsingPile { pile };
                Ok(())
            });
        }
        let target = self.hit_test_excluding(p, Some(pile)).map(|h| h.pile);
        self.transact(|s| {
            s.restore_dispersion();
            s.mode = InteractionMode::Idle;
            match target {
                Some(t) => {
                    s.merge_inner(t, &[pile]);
                    s.reapply_arrangement()
                }
                None => {
                    s.pile_mut(pile)?.set_position(p + grab);
                    Ok(())
                }
            }
        })
    }

    pub(crate) fn lasso_inner(&mut self, polygon: &[Vec2]) -> Result<()> {
        let captured: Vec<PileId> = self.piles.values().filter(|p| point_in_polygon(p.position(), polygon)).map(|p| p.id).collect();
        if captured.len() < 2 {
            return Ok(());
        }
        let center = centroid(captured.iter().map(|id| self.piles[id].position())).unwrap();
        self.merge_group(&captured, center);
        self.reapply_arrangement()
    }
}
