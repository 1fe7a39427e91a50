//! Pile layouts, item offsets within a pile, and zoom-driven regrouping.
//!
//! Grid cells are indexed row-major from 0. Pile-level values for data
//! driven layouts come from the configured [`PileReducer`] (the cover item's
//! value by default).

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::model::{ItemId, Pile, PileId, Zoom};
use crate::pca::{Embedder, PcaEmbedder};
use crate::rng;
use crate::state::PilingState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ArrangeBySpec {
    /// Gridded linear order. Without a key, piles are ordered by id.
    Index { key: Option<String> },
    /// Row `i`, column `j` of the grid.
    Ij { source: CoordSource },
    /// Literal canvas coordinates.
    Xy { source: CoordSource },
    /// Fractions of the canvas extent, each in `[0, 1]`.
    Uv { source: CoordSource },
    /// One key orders the grid, two keys scatter, three or more are projected.
    Data { keys: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum CoordSource {
    Metadata { x: String, y: String },
    /// The item's home (anchor) position.
    Anchor,
}

/// How a pile-level value is derived from its items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum PileReducer {
    #[default]
    Cover,
    Mean,
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum OffsetOrigin {
    /// The cover sits at the pile position; lower items step away from it.
    #[default]
    Cover,
    /// The bottom item sits at the pile position.
    Bottom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "camelCase")]
pub enum ItemOffsetPolicy {
    Orderly { dx: f64, dy: f64, origin: OffsetOrigin },
    Random { max_offset: f64, max_rotation: f64, seed: Option<u64> },
}

impl Default for ItemOffsetPolicy {
    fn default() -> Self {
        ItemOffsetPolicy::Orderly { dx: 5.0, dy: 5.0, origin: OffsetOrigin::Cover }
    }
}

impl ItemOffsetPolicy {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ItemOffsetPolicy::Orderly { dx, dy, .. } => dx.is_finite() && dy.is_finite(),
            ItemOffsetPolicy::Random { max_offset, max_rotation, .. } => {
                max_offset.is_finite() && max_offset >= 0.0 && max_rotation.is_finite() && max_rotation >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpec(alloc::format!("invalid offset policy {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ItemOffset {
    pub dx: f64,
    pub dy: f64,
    pub rotation: f64,
}

const OFFSET_STREAM: u64 = 0x6f66_6673;

/// Offsets of each item relative to the pile position, aligned with
/// `pile.item_ids` (bottom to top). `seed` is used by random policies that
/// carry no seed of their own.
pub fn item_offsets(pile: &Pile, policy: &ItemOffsetPolicy, seed: u64) -> Vec<ItemOffset> {
    let n = pile.len();
    match *policy {
        ItemOffsetPolicy::Orderly { dx, dy, origin } => (0..n)
            .map(|i| {
                let step = match origin {
                    OffsetOrigin::Cover => (n - 1 - i) as f64,
                    OffsetOrigin::Bottom => i as f64,
                };
                ItemOffset { dx: step * dx, dy: step * dy, rotation: 0.0 }
            })
            .collect(),
        ItemOffsetPolicy::Random { max_offset, max_rotation, seed: own } => {
            let mut rng = rng::stream(own.unwrap_or(seed) ^ OFFSET_STREAM, pile.id.0);
            (0..n)
                .map(|_| {
                    let r = max_offset * libm::sqrt(rng.random::<f64>());
                    let theta = 2.0 * core::f64::consts::PI * rng.random::<f64>();
                    let rotation = max_rotation * (2.0 * rng.random::<f64>() - 1.0);
                    ItemOffset { dx: r * libm::cos(theta), dy: r * libm::sin(theta), rotation }
                })
                .collect()
        }
    }
}

impl PilingState {
    /// Item ids in render order, bottom to top. A hovered item is drawn last.
    pub fn render_order(&self, pile: &Pile) -> Vec<ItemId> {
        let mut order = pile.item_ids.clone();
        if let Some(h) = self.hover.as_ref().filter(|h| h.pile == pile.id) {
            if let Some(idx) = order.iter().position(|i| *i == h.item) {
                let item = order.remove(idx);
                order.push(item);
            }
        }
        order
    }

    /// Rendered rectangle of every item on a pile, in render order.
    pub fn pile_item_rects(&self, pile: &Pile) -> Vec<(ItemId, Rect)> {
        let dispersed = self.dispersion_backup.as_ref().filter(|d| d.pile.id == pile.id && pile.temporarily_dispersed);
        let offsets = item_offsets(pile, &self.offset_policy, self.seed);
        let base = pile.position();
        self.render_order(pile)
            .into_iter()
            .map(|id| {
                let center = match dispersed.and_then(|d| d.item_positions.iter().find(|(i, _)| *i == id)) {
                    Some((_, p)) => *p,
                    None => {
                        let idx = pile.item_ids.iter().position(|i| *i == id).unwrap_or(0);
                        let o = offsets[idx];
                        base + Vec2::new(o.dx, o.dy)
                    }
                };
                let rect = self.canvas.item_rect(center);
                (id, rect)
            })
            .collect()
    }

    /// Bounding box of the rendered pile: cover plus preview offsets.
    pub fn pile_bounds(&self, pile: &Pile) -> Rect {
        let rects = self.pile_item_rects(pile);
        let mut bounds = rects[0].1;
        for (_, r) in &rects[1..] {
            bounds = bounds.union(r);
        }
        bounds
    }

    /// Pile-level numeric value of a metadata key under the active reducer.
    pub fn pile_value(&self, pile: &Pile, key: &str) -> Option<f64> {
        let value = |id: &ItemId| self.items.get(id)?.metadata.get(key)?.as_f64();
        match self.pile_reducer {
            PileReducer::Cover => value(pile.cover()),
            reducer => {
                let values: Option<Vec<f64>> = pile.item_ids.iter().map(value).collect();
                let values = values?;
                Some(match reducer {
                    PileReducer::Mean => values.iter().sum::<f64>() / values.len() as f64,
                    PileReducer::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
                    _ => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                })
            }
        }
    }

    fn pile_anchor(&self, pile: &Pile) -> Vec2 {
        match self.pile_reducer {
            PileReducer::Cover => self.anchor(pile.cover()),
            _ => crate::geometry::centroid(pile.item_ids.iter().map(|i| self.anchor(i))).unwrap_or_default(),
        }
    }

    fn keyed_values(&self, ids: &[PileId], key: &str) -> Result<Vec<f64>> {
        let mut missing = Vec::new();
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            match self.pile_value(&self.piles[id], key) {
                Some(v) if v.is_finite() => out.push(v),
                _ => missing.push(*id),
            }
        }
        if missing.is_empty() {
            Ok(out)
        } else {
            Err(Error::MissingArrangeKey { key: key.into(), piles: missing })
        }
    }

    fn coords(&self, ids: &[PileId], source: &CoordSource) -> Result<Vec<Vec2>> {
        match source {
            CoordSource::Anchor => Ok(ids.iter().map(|id| self.pile_anchor(&self.piles[id])).collect()),
            CoordSource::Metadata { x, y } => {
                let xs = self.keyed_values(ids, x)?;
                let ys = self.keyed_values(ids, y)?;
                Ok(xs.into_iter().zip(ys).map(|(x, y)| Vec2::new(x, y)).collect())
            }
        }
    }

    fn grid_by_keys(&self, ids: &[PileId], keys: Option<&[f64]>) -> Vec<Vec2> {
        let mut order: Vec<usize> = (0..ids.len()).collect();
        if let Some(keys) = keys {
            order.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(ids[a].cmp(&ids[b])));
        }
        let mut out = alloc::vec![Vec2::ZERO; ids.len()];
        for (rank, &idx) in order.iter().enumerate() {
            out[idx] = self.canvas.slot_center(rank);
        }
        out
    }

    /// Target position of every visible pile under `spec`, in pile-id order.
    pub fn layout_positions(&self, spec: &ArrangeBySpec, embedder: &dyn Embedder) -> Result<Vec<(PileId, Vec2)>> {
        let ids: Vec<PileId> = self.piles.keys().copied().collect();
        let (w, h) = (self.canvas.width, self.canvas.height);
        let positions = match spec {
            ArrangeBySpec::Index { key: None } => self.grid_by_keys(&ids, None),
            ArrangeBySpec::Index { key: Some(key) } => {
                let keys = self.keyed_values(&ids, key)?;
                self.grid_by_keys(&ids, Some(&keys))
            }
            ArrangeBySpec::Ij { source } => {
                let coords = self.coords(&ids, source)?;
                let (rows, cols) = (self.canvas.rows(), self.canvas.columns as usize);
                let mut out = Vec::with_capacity(ids.len());
                for (id, c) in ids.iter().zip(coords) {
                    if libm::floor(c.x) != c.x || libm::floor(c.y) != c.y {
                        return Err(Error::InvalidSpec(alloc::format!("pile {id} has non-integer cell ({}, {})", c.x, c.y)));
                    }
                    let (i, j) = (c.x as i64, c.y as i64);
                    if i < 0 || j < 0 || i as usize >= rows || j as usize >= cols {
                        return Err(Error::GridOutOfRange { pile: *id, i, j, rows, columns: cols });
                    }
                    out.push(self.canvas.cell_center(i as usize, j as usize));
                }
                out
            }
            ArrangeBySpec::Xy { source } => self.coords(&ids, source)?,
            ArrangeBySpec::Uv { source } => {
                let coords = self.coords(&ids, source)?;
                let mut out = Vec::with_capacity(ids.len());
                for (id, c) in ids.iter().zip(coords) {
                    if !(0.0..=1.0).contains(&c.x) || !(0.0..=1.0).contains(&c.y) {
                        return Err(Error::UvOutOfRange { pile: *id });
                    }
                    out.push(Vec2::new(c.x * w, c.y * h));
                }
                out
            }
            ArrangeBySpec::Data { keys } => match keys.len() {
                0 => return Err(Error::InvalidSpec("data arrangement needs at least one key".into())),
                1 => {
                    let values = self.keyed_values(&ids, &keys[0])?;
                    self.grid_by_keys(&ids, Some(&values))
                }
                2 => {
                    let xs = normalize(&self.keyed_values(&ids, &keys[0])?);
                    let ys = normalize(&self.keyed_values(&ids, &keys[1])?);
                    xs.into_iter().zip(ys).map(|(x, y)| Vec2::new(x * w, y * h)).collect()
                }
                _ => {
                    let columns: Result<Vec<Vec<f64>>> = keys.iter().map(|k| self.keyed_values(&ids, k)).collect();
                    let columns = columns?;
                    let rows: Vec<Vec<f64>> = (0..ids.len()).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
                    let uv = if rows.len() < 2 { alloc::vec![Vec2::new(0.5, 0.5); rows.len()] } else { embedder.embed(&rows)? };
                    uv.into_iter().map(|p| Vec2::new(p.x * w, p.y * h)).collect()
                }
            },
        };
        Ok(ids.into_iter().zip(positions).collect())
    }

    pub(crate) fn place(&mut self, spec: &ArrangeBySpec, embedder: &dyn Embedder) -> Result<()> {
        for (id, pos) in self.layout_positions(spec, embedder)? {
            self.piles.get_mut(&id).expect("layout covers visible piles").set_position(pos);
        }
        Ok(())
    }

    /// Lays out all visible piles and registers `spec` for re-application
    /// after later grouping operations.
    pub fn arrange_by(&mut self, spec: ArrangeBySpec) -> Result<()> {
        self.arrange_by_with(spec, &PcaEmbedder)
    }

    pub fn arrange_by_with(&mut self, spec: ArrangeBySpec, embedder: &dyn Embedder) -> Result<()> {
        self.transact(|s| {
            s.restore_dispersion();
            s.place(&spec, embedder)?;
            s.arrangement = Some(spec);
            Ok(())
        })
    }

    pub(crate) fn reapply_arrangement(&mut self) -> Result<()> {
        match self.arrangement.clone() {
            Some(spec) => self.place(&spec, &PcaEmbedder),
            None => Ok(()),
        }
    }

    /// Re-applies the registered arrangement to the current pile set.
    /// Positions stay put when none is registered.
    pub fn rearrange_after_grouping(&mut self) -> Result<()> {
        self.transact(|s| s.reapply_arrangement())
    }

    /// Moves the camera. Pile positions follow the transform; with a
    /// zoom-reactive proximity grouping registered, piles also split and
    /// merge until a fixpoint is reached.
    pub fn zoom_update(&mut self, zoom: Zoom) -> Result<()> {
        if !zoom.is_valid() {
            return Err(Error::NonFinite);
        }
        self.transact(|s| {
            s.restore_dispersion();
            let old = s.zoom;
            let remap = |p: &mut Pile| p.set_position(zoom.apply(old.invert(p.position())));
            // Piles hidden behind a layer keep their frame; the layer's zoom
            // is dropped when it closes.
            if zoom != old {
                s.piles.values_mut().for_each(remap);
            }
            s.zoom = zoom;
            if let Some(kind) = s.zoom_grouping {
                s.regroup_by_proximity(kind);
            }
            Ok(())
        })
    }

    /// Screen position of an item's home under the current zoom.
    pub fn item_screen_position(&self, item: &ItemId) -> Vec2 {
        self.zoom.apply(self.anchor(item))
    }
}

/// Min-max normalisation into `[0, 1]`; constant input maps to 0.5.
fn normalize(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    values.iter().map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.5 }).collect()
}
