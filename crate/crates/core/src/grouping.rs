//! Manual merges and the automatic `groupBy` / `splitBy` subroutines.
//!
//! Parallel groupings have no natural order, so merged piles stack their
//! members in ascending pile id (or ascending item id when items are
//! regrouped from scratch).
//!
//! Piles formed by a category or cluster `groupBy` remember the pieces they
//! were built from. A `splitBy` with the same specification restores those
//! pieces; any other split partitions the pile by its own subroutine.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, Vec2};
use crate::kmeans::{default_k, kmeans};
use crate::model::{Canvas, ItemId, Pile, PileId, Provenance, Scalar};
use crate::state::PilingState;
use crate::union_find::UnionFind;

/// Where cluster features come from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FeatureSource {
    /// The item's feature vector.
    #[default]
    Features,
    /// Numeric metadata values, in key order.
    Metadata { keys: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum GroupBySpec {
    /// Merge piles whose rendered bounds overlap. A reactive grouping works
    /// on item home positions and is re-evaluated on every zoom.
    Overlap { reactive: bool },
    /// Merge piles whose centers are at most `threshold` apart.
    Distance { threshold: f64, reactive: bool },
    /// Merge piles in the same grid cell. `columns` overrides the canvas grid.
    Grid { columns: Option<u32> },
    Column { columns: Option<u32> },
    Row { columns: Option<u32> },
    Category { key: String },
    Cluster { source: FeatureSource, k: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum SplitBySpec {
    Overlap,
    Distance { threshold: f64 },
    Category { key: String },
    Cluster { source: FeatureSource, k: Option<usize> },
}

/// A zoom-reactive proximity grouping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum ProximityKind {
    Overlap,
    Distance { threshold: f64 },
}

/// Merge hysteresis: piles merge only once items overlap by more than this
/// fraction of the item width (or the distance threshold).
pub const MERGE_MARGIN: f64 = 0.1;

fn check_threshold(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("distance threshold must be positive, got {t}")))
    }
}

fn check_k(k: Option<usize>) -> Result<()> {
    match k {
        Some(k) if k < 2 => Err(Error::InvalidSpec(format!("cluster count must be at least 2, got {k}"))),
        _ => Ok(()),
    }
}

impl GroupBySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GroupBySpec::Distance { threshold, .. } => check_threshold(*threshold),
            GroupBySpec::Grid { columns: Some(0) } | GroupBySpec::Column { columns: Some(0) } | GroupBySpec::Row { columns: Some(0) } => {
                Err(Error::InvalidSpec("columns must be at least 1".into()))
            }
            GroupBySpec::Cluster { k, .. } => check_k(*k),
            _ => Ok(()),
        }
    }

    fn provenance_label(&self) -> Option<String> {
        match self {
            GroupBySpec::Category { key } => Some(category_label(key)),
            GroupBySpec::Cluster { source, k } => Some(cluster_label(source, *k)),
            _ => None,
        }
    }
}

impl SplitBySpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            SplitBySpec::Distance { threshold } => check_threshold(*threshold),
            SplitBySpec::Cluster { k, .. } => check_k(*k),
            _ => Ok(()),
        }
    }

    fn provenance_label(&self) -> Option<String> {
        match self {
            SplitBySpec::Category { key } => Some(category_label(key)),
            SplitBySpec::Cluster { source, k } => Some(cluster_label(source, *k)),
            _ => None,
        }
    }
}

fn category_label(key: &str) -> String {
    format!("category:{key}")
}

fn cluster_label(source: &FeatureSource, k: Option<usize>) -> String {
    let src = match source {
        FeatureSource::Features => String::from("features"),
        FeatureSource::Metadata { keys } => keys.join(","),
    };
    match k {
        Some(k) => format!("cluster:{src}:{k}"),
        None => format!("cluster:{src}:auto"),
    }
}

impl PilingState {
    /// Stacks each source pile on top of `target`, in the given order.
    /// The target keeps its id and position and is raised to the top.
    pub fn merge_piles(&mut self, target: PileId, sources: &[PileId]) -> Result<()> {
        self.check_merge(target, sources)?;
        self.transact(|s| {
            s.restore_dispersion();
            s.merge_inner(target, sources);
            s.reapply_arrangement()
        })
    }

    pub(crate) fn check_merge(&self, target: PileId, sources: &[PileId]) -> Result<()> {
        self.pile(target)?;
        for (i, src) in sources.iter().enumerate() {
            self.pile(*src)?;
            if *src == target {
                return Err(Error::SelfMerge(target));
            }
            if sources[..i].contains(src) {
                return Err(Error::DuplicatePile(*src));
            }
        }
        Ok(())
    }

    pub(crate) fn merge_inner(&mut self, target: PileId, sources: &[PileId]) {
        let z = self.top_z();
        let mut moved = Vec::new();
        for src in sources {
            let pile = self.piles.remove(src).expect("validated source pile");
            moved.extend(pile.item_ids);
        }
        let pile = self.piles.get_mut(&target).expect("validated target pile");
        pile.item_ids.extend(moved);
        pile.z = z;
        if !sources.is_empty() {
            pile.provenance = None;
        }
    }

    /// Merges a set of piles (ascending id) into the lowest id, placed at `position`.
    pub(crate) fn merge_group(&mut self, group: &[PileId], position: Vec2) -> PileId {
        let target = group[0];
        self.merge_inner(target, &group[1..]);
        self.piles.get_mut(&target).unwrap().set_position(position);
        target
    }

    /// Merges every pile whose position lies inside `polygon` (even-odd rule).
    /// Fewer than two captured piles leave the layout unchanged.
    pub fn lasso_group(&mut self, polygon: &[Vec2]) -> Result<()> {
        if polygon.len() < 3 {
            return Err(Error::DegeneratePolygon(polygon.len()));
        }
        if polygon.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.transact(|s| {
            s.restore_dispersion();
            s.lasso_inner(polygon)
        })
    }

    pub fn group_by(&mut self, spec: &GroupBySpec) -> Result<()> {
        spec.validate()?;
        self.transact(|s| {
            s.restore_dispersion();
            match spec {
                GroupBySpec::Overlap { reactive: true } => s.register_proximity(ProximityKind::Overlap),
                GroupBySpec::Distance { threshold, reactive: true } => {
                    s.register_proximity(ProximityKind::Distance { threshold: *threshold })
                }
                GroupBySpec::Overlap { reactive: false } => s.merge_until_separated(|s, a, b| s.pile_bounds(a).overlaps(&s.pile_bounds(b))),
                GroupBySpec::Distance { threshold, reactive: false } => {
                    let t = *threshold;
                    s.merge_until_separated(move |_, a, b| a.position().distance(b.position()) <= t)
                }
                GroupBySpec::Grid { columns } => s.group_by_layout(*columns, LayoutUnit::Cell),
                GroupBySpec::Column { columns } => s.group_by_layout(*columns, LayoutUnit::Column),
                GroupBySpec::Row { columns } => s.group_by_layout(*columns, LayoutUnit::Row),
                GroupBySpec::Category { .. } | GroupBySpec::Cluster { .. } => {
                    let items: Vec<ItemId> = s.visible_items();
                    let groups = match spec {
                        GroupBySpec::Category { key } => s.category_groups(&items, key)?,
                        GroupBySpec::Cluster { source, k } => s.cluster_groups(&items, source, *k, s.seed)?,
                        _ => unreachable!(),
                    };
                    s.regroup_items(groups, spec.provenance_label().unwrap());
                }
            }
            s.reapply_arrangement()
        })
    }

    /// Items on visible piles, ascending id.
    pub(crate) fn visible_items(&self) -> Vec<ItemId> {
        let mut items: Vec<ItemId> = self.piles.values().flat_map(|p| p.item_ids.iter().cloned()).collect();
        items.sort();
        items
    }

    fn register_proximity(&mut self, kind: ProximityKind) {
        self.zoom_grouping = Some(kind);
        self.regroup_by_proximity(kind);
    }

    /// Repeatedly merges connected components of the pile adjacency graph,
    /// each at the centroid of its members, until no two piles are adjacent.
    fn merge_until_separated(&mut self, adjacent: impl Fn(&PilingState, &Pile, &Pile) -> bool) {
        loop {
            let ids: Vec<PileId> = self.piles.keys().copied().collect();
            let mut uf = UnionFind::new(ids.len());
            let mut any = false;
            for a in 0..ids.len() {
                for b in (a + 1)..ids.len() {
                    if adjacent(self, &self.piles[&ids[a]], &self.piles[&ids[b]]) {
                        any |= uf.union(a, b);
                    }
                }
            }
            if !any {
                return;
            }
            for comp in uf.components().into_iter().filter(|c| c.len() > 1) {
                let group: Vec<PileId> = comp.iter().map(|&i| ids[i]).collect();
                let center = centroid(group.iter().map(|id| self.piles[id].position())).unwrap();
                self.merge_group(&group, center);
            }
        }
    }

    fn group_by_layout(&mut self, columns: Option<u32>, unit: LayoutUnit) {
        let canvas = Canvas { columns: columns.unwrap_or(self.canvas.columns), ..self.canvas };
        let mut groups: BTreeMap<(i64, i64), Vec<PileId>> = BTreeMap::new();
        for pile in self.piles.values() {
            let (row, col) = canvas.cell_of(pile.position());
            let key = match unit {
                LayoutUnit::Cell => (row, col),
                LayoutUnit::Column => (0, col),
                LayoutUnit::Row => (row, 0),
            };
            groups.entry(key).or_default().push(pile.id);
        }
        let cell = canvas.cell_size();
        for ((row, col), group) in groups.into_iter().filter(|(_, g)| g.len() > 1) {
            let mean = centroid(group.iter().map(|id| self.piles[id].position())).unwrap();
            let cx = (col as f64 + 0.5) * cell.x;
            let cy = (row as f64 + 0.5) * cell.y;
            let position = match unit {
                LayoutUnit::Cell => Vec2::new(cx, cy),
                LayoutUnit::Column => Vec2::new(cx, mean.y),
                LayoutUnit::Row => Vec2::new(mean.x, cy),
            };
            self.merge_group(&group, position);
        }
    }

    pub(crate) fn category_values<'a>(&'a self, items: &[ItemId], key: &str) -> Result<Vec<&'a Scalar>> {
        let mut missing = Vec::new();
        let mut values = Vec::with_capacity(items.len());
        for id in items {
            match self.items[id].metadata.get(key) {
                Some(v) => values.push(v),
                None => missing.push(id.clone()),
            }
        }
        if missing.is_empty() {
            Ok(values)
        } else {
            missing.sort();
            Err(Error::MissingMetadata { key: key.into(), ids: missing })
        }
    }

    /// Items grouped by value (ascending value), keeping the input order inside each group.
    fn category_groups(&self, items: &[ItemId], key: &str) -> Result<Vec<Vec<ItemId>>> {
        let values = self.category_values(items, key)?;
        let mut groups: BTreeMap<&Scalar, Vec<ItemId>> = BTreeMap::new();
        for (id, v) in items.iter().zip(values) {
            groups.entry(v).or_default().push(id.clone());
        }
        Ok(groups.into_values().collect())
    }

    pub(crate) fn feature_rows(&self, items: &[ItemId], source: &FeatureSource) -> Result<Vec<Vec<f64>>> {
        match source {
            FeatureSource::Features => {
                let missing: Vec<ItemId> = items.iter().filter(|id| self.items[*id].features.is_none()).cloned().collect();
                if !missing.is_empty() {
                    return Err(Error::MissingFeatures(missing));
                }
                Ok(items.iter().map(|id| self.items[id].features.clone().unwrap()).collect())
            }
            FeatureSource::Metadata { keys } => {
                if keys.is_empty() {
                    return Err(Error::InvalidSpec("metadata feature source needs keys".into()));
                }
                let mut rows = vec![Vec::with_capacity(keys.len()); items.len()];
                for key in keys {
                    let values = self.category_values(items, key)?;
                    let mut bad = Vec::new();
                    for ((row, v), id) in rows.iter_mut().zip(values).zip(items) {
                        match v.as_f64() {
                            Some(x) if x.is_finite() => row.push(x),
                            _ => bad.push(id.clone()),
                        }
                    }
                    if !bad.is_empty() {
                        return Err(Error::NonNumericMetadata { key: key.clone(), ids: bad });
                    }
                }
                Ok(rows)
            }
        }
    }

    /// k-means groups over `items`, in cluster order, keeping input order inside each.
    fn cluster_groups(&self, items: &[ItemId], source: &FeatureSource, k: Option<usize>, seed: u64) -> Result<Vec<Vec<ItemId>>> {
        if items.is_empty() {
            return Ok(Vec::new());
        }
        let rows = self.feature_rows(items, source)?;
        let k = k.unwrap_or_else(|| default_k(items.len())).min(items.len());
        let clustering = kmeans(&rows, k, seed)?;
        Ok(clustering.members().into_iter().map(|m| m.into_iter().map(|i| items[i].clone()).collect()).collect())
    }

    /// Replaces all visible piles by one pile per group. Each new pile sits
    /// at the centroid of its items' previous positions and remembers the
    /// pieces it was assembled from.
    fn regroup_items(&mut self, groups: Vec<Vec<ItemId>>, label: String) {
        let mut home: BTreeMap<ItemId, (PileId, Vec2)> = BTreeMap::new();
        for pile in self.piles.values() {
            for id in &pile.item_ids {
                home.insert(id.clone(), (pile.id, pile.position()));
            }
        }
        let mut z = self.top_z();
        self.piles.clear();
        for group in groups.into_iter().filter(|g| !g.is_empty()) {
            let mut parts: Vec<(PileId, Vec<ItemId>)> = Vec::new();
            for id in &group {
                let origin = home[id].0;
                match parts.iter_mut().find(|(p, _)| *p == origin) {
                    Some((_, part)) => part.push(id.clone()),
                    None => parts.push((origin, vec![id.clone()])),
                }
            }
            let position = centroid(group.iter().map(|id| home[id].1)).unwrap();
            let pid = self.alloc_pile_id();
            let mut pile = Pile::new(pid, group, position, z);
            z += 1;
            pile.provenance = Some(Provenance { grouping: label.clone(), parts: parts.into_iter().map(|(_, p)| p).collect() });
            self.piles.insert(pid, pile);
        }
    }

    /// Splits every visible pile by the subroutine in `spec`, or back into
    /// its recorded pieces when it was grouped by the same specification.
    pub fn split_by(&mut self, spec: &SplitBySpec) -> Result<()> {
        spec.validate()?;
        if let SplitBySpec::Category { key } = spec {
            self.category_values(&self.visible_items(), key)?;
        }
        if let SplitBySpec::Cluster { source, .. } = spec {
            self.feature_rows(&self.visible_items(), source)?;
        }
        let label = spec.provenance_label();
        self.transact(|s| {
            s.restore_dispersion();
            let ids: Vec<PileId> = s.piles.keys().copied().collect();
            let radius = s.canvas.cell_size().x;
            for id in ids {
                let pile = &s.piles[&id];
                if pile.len() < 2 {
                    continue;
                }
                let pieces = match (&pile.provenance, &label) {
                    (Some(prov), Some(label)) if prov.grouping == *label => restore_parts(pile, prov),
                    _ => s.split_pieces(pile, spec)?,
                };
                if pieces.len() < 2 {
                    continue;
                }
                let parent = s.piles.remove(&id).unwrap();
                let n = pieces.len();
                for (i, piece) in pieces.into_iter().enumerate() {
                    let pid = s.alloc_pile_id();
                    let z = s.top_z();
                    let pos = parent.position().radial(i, n, radius);
                    s.piles.insert(pid, Pile::new(pid, piece, pos, z));
                }
            }
            s.reapply_arrangement()
        })
    }

    fn split_pieces(&self, pile: &Pile, spec: &SplitBySpec) -> Result<Vec<Vec<ItemId>>> {
        let items = &pile.item_ids;
        Ok(match spec {
            SplitBySpec::Category { key } => self.category_groups(items, key)?,
            SplitBySpec::Cluster { source, k } => {
                let seed = self.seed ^ pile.id.0.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                self.cluster_groups(items, source, *k, seed)?
            }
            SplitBySpec::Overlap => self.item_components(items, |s, a, b| {
                s.canvas.item_rect(s.item_screen_position(a)).overlaps(&s.canvas.item_rect(s.item_screen_position(b)))
            }),
            SplitBySpec::Distance { threshold } => {
                let t = *threshold;
                self.item_components(items, move |s, a, b| s.item_screen_position(a).distance(s.item_screen_position(b)) <= t)
            }
        })
    }

    /// Connected components of `items` under `linked`, each in input order,
    /// ordered by first member.
    fn item_components(&self, items: &[ItemId], linked: impl Fn(&PilingState, &ItemId, &ItemId) -> bool) -> Vec<Vec<ItemId>> {
        let mut uf = UnionFind::new(items.len());
        for a in 0..items.len() {
            for b in (a + 1)..items.len() {
                if linked(self, &items[a], &items[b]) {
                    uf.union(a, b);
                }
            }
        }
        uf.components().into_iter().map(|c| c.into_iter().map(|i| items[i].clone()).collect()).collect()
    }

    /// Signed closeness of two items under a proximity rule: non-negative
    /// means "together", and the merge margin is measured on the same scale.
    fn proximity(&self, kind: ProximityKind, a: Vec2, b: Vec2) -> f64 {
        match kind {
            ProximityKind::Overlap => self.canvas.item_rect(a).overlap_depth(&self.canvas.item_rect(b)),
            ProximityKind::Distance { threshold } => threshold - a.distance(b),
        }
    }

    fn merge_margin(&self, kind: ProximityKind) -> f64 {
        match kind {
            ProximityKind::Overlap => MERGE_MARGIN * self.canvas.item_size().x,
            ProximityKind::Distance { threshold } => MERGE_MARGIN * threshold,
        }
    }

    /// Zoom-reactive fixpoint over item home positions.
    ///
    /// Piles whose items are no longer connected (closeness >= 0) split into
    /// their components; piles with an item pair closer than the merge
    /// margin merge. Every pile is placed at the centroid of its items'
    /// screen positions. One split pass followed by one merge pass is a
    /// fixpoint because the merge threshold is stricter than the split one.
    pub(crate) fn regroup_by_proximity(&mut self, kind: ProximityKind) {
        let screen: BTreeMap<ItemId, Vec2> = self.visible_items().into_iter().map(|id| {
            let p = self.item_screen_position(&id);
            (id, p)
        }).collect();

        let ids: Vec<PileId> = self.piles.keys().copied().collect();
        for id in ids {
            let pile = &self.piles[&id];
            if pile.len() < 2 {
                continue;
            }
            let comps = self.item_components(&pile.item_ids, |s, a, b| s.proximity(kind, screen[a], screen[b]) >= 0.0);
            if comps.len() < 2 {
                continue;
            }
            let parent = self.piles.remove(&id).unwrap();
            let cover = parent.cover().clone();
            for comp in comps {
                let pid = if comp.contains(&cover) { parent.id } else { self.alloc_pile_id() };
                let z = if pid == parent.id { parent.z } else { self.top_z() };
                self.piles.insert(pid, Pile::new(pid, comp, parent.position(), z));
            }
        }

        let margin = self.merge_margin(kind);
        let ids: Vec<PileId> = self.piles.keys().copied().collect();
        let mut uf = UnionFind::new(ids.len());
        for a in 0..ids.len() {
            for b in (a + 1)..ids.len() {
                let close = self.piles[&ids[a]].item_ids.iter().any(|ia| {
                    self.piles[&ids[b]].item_ids.iter().any(|ib| self.proximity(kind, screen[ia], screen[ib]) > margin)
                });
                if close {
                    uf.union(a, b);
                }
            }
        }
        for comp in uf.components().into_iter().filter(|c| c.len() > 1) {
            let group: Vec<PileId> = comp.iter().map(|&i| ids[i]).collect();
            self.merge_inner(group[0], &group[1..]);
        }
        for pile in self.piles.values_mut() {
            let c = centroid(pile.item_ids.iter().map(|i| screen[i])).unwrap();
            pile.set_position(c);
        }
    }
}

#[derive(Clone, Copy)]
enum LayoutUnit {
    Cell,
    Column,
    Row,
}

fn restore_parts(pile: &Pile, prov: &Provenance) -> Vec<Vec<ItemId>> {
    let mut parts: Vec<Vec<ItemId>> = prov
        .parts
        .iter()
        .map(|part| part.iter().filter(|id| pile.contains(id)).cloned().collect::<Vec<_>>())
        .filter(|p| !p.is_empty())
        .collect();
    let covered: Vec<&ItemId> = parts.iter().flatten().collect();
    let rest: Vec<ItemId> = pile.item_ids.iter().filter(|id| !covered.contains(id)).cloned().collect();
    if !rest.is_empty() {
        parts.push(rest);
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Item;

    fn canvas() -> Canvas {
        Canvas { width: 1000.0, height: 800.0, columns: 10, cell_aspect: 1.0, padding: 0.0 }
    }

    fn singletons(n: usize) -> PilingState {
        PilingState::new((0..n).map(|_| Item::default()).collect(), canvas(), 1).unwrap()
    }

    fn sizes(s: &PilingState) -> Vec<usize> {
        let mut v: Vec<usize> = s.piles.values().map(Pile::len).collect();
        v.sort();
        v
    }

    #[test]
    fn merge_appends_sources_in_order() {
        let mut a = singletons(3);
        let mut b = a.clone();
        a.merge_piles(PileId(0), &[PileId(1)]).unwrap();
        a.merge_piles(PileId(0), &[PileId(2)]).unwrap();
        b.merge_piles(PileId(0), &[PileId(1), PileId(2)]).unwrap();
        assert_eq!(a.piles[&PileId(0)].item_ids, b.piles[&PileId(0)].item_ids);
        assert_eq!(a.piles[&PileId(0)].position(), canvas().slot_center(0));
    }

    #[test]
    fn merge_errors() {
        let mut s = singletons(2);
        assert_eq!(s.merge_piles(PileId(0), &[PileId(0)]), Err(Error::SelfMerge(PileId(0))));
        assert_eq!(s.merge_piles(PileId(0), &[PileId(9)]), Err(Error::UnknownPile(PileId(9))));
        assert_eq!(s.merge_piles(PileId(0), &[PileId(1), PileId(1)]), Err(Error::DuplicatePile(PileId(1))));
        assert_eq!(s.epoch, 0);
    }

    #[test]
    fn merged_target_rises_to_top() {
        let mut s = singletons(3);
        s.merge_piles(PileId(2), &[PileId(0)]).unwrap();
        assert!(s.piles[&PileId(2)].z > s.piles[&PileId(1)].z);
    }

    #[test]
    fn lasso_merges_inner_piles() {
        let mut s = singletons(3);
        s.pile_mut(PileId(0)).unwrap().set_position(Vec2::new(0.5, 0.5));
        s.pile_mut(PileId(1)).unwrap().set_position(Vec2::new(0.25, 0.25));
        s.pile_mut(PileId(2)).unwrap().set_position(Vec2::new(2.0, 2.0));
        let square = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        s.lasso_group(&square).unwrap();
        assert_eq!(sizes(&s), [1, 2]);
        assert_eq!(s.piles[&PileId(0)].position(), Vec2::new(0.375, 0.375));
    }

    #[test]
    fn lasso_single_capture_is_noop_but_advances_epoch() {
        let mut s = singletons(2);
        let tri = [Vec2::new(0.0, 0.0), Vec2::new(100.0, 0.0), Vec2::new(0.0, 100.0)];
        s.lasso_group(&tri).unwrap();
        assert_eq!(sizes(&s), [1, 1]);
        assert_eq!(s.epoch, 1);
        assert_eq!(s.lasso_group(&tri[..2]), Err(Error::DegeneratePolygon(2)));
    }

    #[test]
    fn overlap_groups_interval_components() {
        let c = Canvas { width: 50.0, height: 800.0, columns: 10, cell_aspect: 1.0, padding: 0.0 };
        let mut s = PilingState::new((0..4).map(|_| Item::default()).collect(), c, 0).unwrap();
        for (i, x) in [0.0, 10.0, 12.0, 100.0].iter().enumerate() {
            s.pile_mut(PileId(i as u64)).unwrap().set_position(Vec2::new(*x, 50.0));
        }
        s.group_by(&GroupBySpec::Overlap { reactive: false }).unwrap();
        assert_eq!(sizes(&s), [1, 1, 2]);
        let merged = s.piles.values().find(|p| p.len() == 2).unwrap();
        assert_eq!(merged.position(), Vec2::new(11.0, 50.0));
    }

    #[test]
    fn category_groups_and_errors() {
        let items = ["US", "US", "CN", "CN"].iter().map(|c| Item::default().with_meta("country", *c)).collect();
        let mut s = PilingState::new(items, canvas(), 0).unwrap();
        s.group_by(&GroupBySpec::Category { key: "country".into() }).unwrap();
        assert_eq!(sizes(&s), [2, 2]);
        let err = s.group_by(&GroupBySpec::Category { key: "city".into() }).unwrap_err();
        assert!(matches!(err, Error::MissingMetadata { ref ids, .. } if ids.len() == 4));
    }

    #[test]
    fn grid_grouping_merges_same_cell() {
        let mut s = singletons(3);
        s.pile_mut(PileId(1)).unwrap().set_position(Vec2::new(10.0, 10.0));
        s.group_by(&GroupBySpec::Grid { columns: None }).unwrap();
        assert_eq!(sizes(&s), [1, 2]);
        assert_eq!(s.piles[&PileId(0)].position(), canvas().cell_center(0, 0));
    }

    #[test]
    fn cluster_without_features_is_rejected() {
        let mut s = singletons(3);
        let spec = GroupBySpec::Cluster { source: FeatureSource::Features, k: None };
        assert!(matches!(s.group_by(&spec), Err(Error::MissingFeatures(_))));
        assert!(GroupBySpec::Cluster { source: FeatureSource::Features, k: Some(1) }.validate().is_err());
        assert!(GroupBySpec::Distance { threshold: 0.0, reactive: false }.validate().is_err());
    }

    #[test]
    fn split_restores_grouped_pieces() {
        let items = ["a", "b", "a", "b", "a"].iter().map(|c| Item::default().with_meta("c", *c)).collect();
        let mut s = PilingState::new(items, canvas(), 0).unwrap();
        let before = s.partition();
        let spec = GroupBySpec::Category { key: "c".into() };
        s.group_by(&spec).unwrap();
        s.split_by(&SplitBySpec::Category { key: "c".into() }).unwrap();
        assert_eq!(s.partition(), before);
        s.check_invariants().unwrap();
    }

    #[test]
    fn split_of_homogeneous_manual_pile_keeps_it() {
        let items = ["a", "a", "b"].iter().map(|c| Item::default().with_meta("c", *c)).collect();
        let mut s = PilingState::new(items, canvas(), 0).unwrap();
        s.merge_piles(PileId(0), &[PileId(1)]).unwrap();
        let before = s.partition();
        s.split_by(&SplitBySpec::Category { key: "c".into() }).unwrap();
        assert_eq!(s.partition(), before);
        s.merge_piles(PileId(0), &[PileId(2)]).unwrap();
        s.split_by(&SplitBySpec::Category { key: "c".into() }).unwrap();
        assert_eq!(sizes(&s), [1, 2]);
    }

    #[test]
    fn split_children_do_not_coincide() {
        let items = ["a", "b", "c"].iter().map(|c| Item::default().with_meta("c", *c)).collect();
        let mut s = PilingState::new(items, canvas(), 0).unwrap();
        s.merge_piles(PileId(0), &[PileId(1), PileId(2)]).unwrap();
        s.split_by(&SplitBySpec::Category { key: "c".into() }).unwrap();
        let pos: Vec<Vec2> = s.piles.values().map(Pile::position).collect();
        assert_eq!(pos.len(), 3);
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(pos[i].distance(pos[j]) > 1.0);
            }
        }
    }
}
