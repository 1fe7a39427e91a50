//! Matrix aggregates, representative selection, foreshortened previews,
//! gallery slot layouts and category badges.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grouping::FeatureSource;
use crate::kmeans::{kmeans, squared_distance};
use crate::model::{ItemId, Pile};
use crate::state::PilingState;

/// Row-major matrix with an optional per-cell missing mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDatum {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
    /// `true` marks a missing cell. Empty means nothing is missing.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mask: Vec<bool>,
}

impl MatrixDatum {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        let m = MatrixDatum { rows, cols, values, mask: Vec::new() };
        m.validate()?;
        Ok(m)
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        self.mask = mask;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rows * self.cols;
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::EmptyInput);
        }
        if self.values.len() != n {
            return Err(Error::MatrixSize { expected: n, found: self.values.len() });
        }
        if !self.mask.is_empty() && self.mask.len() != n {
            return Err(Error::MatrixSize { expected: n, found: self.mask.len() });
        }
        if self.values.iter().enumerate().any(|(i, v)| !v.is_finite() && !self.is_masked(i)) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn is_masked(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    /// Value at `(r, c)`, `None` when masked.
    pub fn get(&self, r: usize, c: usize) -> Option<f64> {
        let i = r * self.cols + c;
        (!self.is_masked(i)).then(|| self.values[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AggregateKind {
    Mean,
    Variance,
    Std,
}

/// Cell-wise statistic over a stack of equally shaped matrices. Masked cells
/// are skipped; a cell is masked in the output only if it is masked in every
/// input. Variance is the population variance.
pub fn aggregate_matrices(matrices: &[MatrixDatum], kind: AggregateKind) -> Result<MatrixDatum> {
    let first = matrices.first().ok_or(Error::EmptyInput)?;
    for m in matrices {
        m.validate()?;
        if m.shape() != first.shape() {
            return Err(Error::ShapeMismatch { expected: first.shape(), found: m.shape() });
        }
    }
    let n = first.rows * first.cols;
    let mut values = vec![0.0; n];
    let mut mask = vec![false; n];
    let mut cell = Vec::with_capacity(matrices.len());
    for i in 0..n {
        cell.clear();
        cell.extend(matrices.iter().filter(|m| !m.is_masked(i)).map(|m| m.values[i]));
        if cell.is_empty() {
            mask[i] = true;
            continue;
        }
        let len = cell.len() as f64;
        let mean = cell.iter().sum::<f64>() / len;
        values[i] = match kind {
            AggregateKind::Mean => mean,
            AggregateKind::Variance | AggregateKind::Std => {
                let var = cell.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / len;
                if kind == AggregateKind::Std {
                    libm::sqrt(var)
                } else {
                    var
                }
            }
        };
    }
    if !mask.contains(&true) {
        mask.clear();
    }
    Ok(MatrixDatum { rows: first.rows, cols: first.cols, values, mask })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Reducer {
    Mean,
    Max,
    Min,
}

/// Axis collapsed by a foreshortened preview.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum SliceAxis {
    /// Collapse rows: one entry per column.
    Rows,
    /// Collapse columns: one entry per row.
    Cols,
}

/// One-dimensional summary of a matrix. `None` entries had every cell masked.
pub fn foreshortened_preview(matrix: &MatrixDatum, axis: SliceAxis, reducer: Reducer) -> Vec<Option<f64>> {
    let (outer, inner) = match axis {
        SliceAxis::Rows => (matrix.cols, matrix.rows),
        SliceAxis::Cols => (matrix.rows, matrix.cols),
    };
    (0..outer)
        .map(|o| {
            let cells = (0..inner).filter_map(|k| match axis {
                SliceAxis::Rows => matrix.get(k, o),
                SliceAxis::Cols => matrix.get(o, k),
            });
            let mut count = 0usize;
            let acc = cells.fold(None, |acc: Option<f64>, v| {
                count += 1;
                Some(match (acc, reducer) {
                    (None, _) => v,
                    (Some(a), Reducer::Mean) => a + v,
                    (Some(a), Reducer::Max) => a.max(v),
                    (Some(a), Reducer::Min) => a.min(v),
                })
            });
            match reducer {
                Reducer::Mean => acc.map(|s| s / count as f64),
                _ => acc,
            }
        })
        .collect()
}

/// Integer pixel rectangle inside a pile cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotRect {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl SlotRect {
    pub fn area(&self) -> u64 {
        self.w as u64 * self.h as u64
    }
}

/// Sizes of `parts` integer spans covering `total`; the last one takes the
/// remainder.
fn spans(total: u32, parts: u32) -> impl Iterator<Item = (u32, u32)> {
    let base = total / parts;
    (0..parts).map(move |i| {
        let start = i * base;
        let len = if i + 1 == parts { total - start } else { base };
        (start, len)
    })
}

/// Slot rectangles for a gallery of `k` previews on a `w` by `h` cover.
///
/// Supported sizes are 1 (the whole cover), 2 (1x2), 3 (a large left slot
/// two thirds wide plus two stacked on the right), 4 (2x2), 6 (2x3),
/// 8 (2x4) and 9 (3x3). Slots are listed row by row.
pub fn gallery_layout(k: usize, w: u32, h: u32) -> Result<Vec<SlotRect>> {
    let (rows, cols) = match k {
        1 => (1, 1),
        2 => (1, 2),
        3 => {
            if w < 2 || h < 2 {
                return Err(Error::InvalidSpec("cover too small for a 3-slot gallery".to_string()));
            }
            let left = (2 * w as u64 / 3) as u32;
            let top = h / 2;
            return Ok(vec![
                SlotRect { x: 0, y: 0, w: left, h },
                SlotRect { x: left, y: 0, w: w - left, h: top },
                SlotRect { x: left, y: top, w: w - left, h: h - top },
            ]);
        }
        4 => (2, 2),
        6 => (2, 3),
        8 => (2, 4),
        9 => (3, 3),
        _ => return Err(Error::UnsupportedGallerySize(k)),
    };
    if w < cols || h < rows {
        return Err(Error::InvalidSpec("cover smaller than one pixel per slot".to_string()));
    }
    Ok(spans(h, rows)
        .flat_map(|(y, sh)| spans(w, cols).map(move |(x, sw)| SlotRect { x, y, w: sw, h: sh }))
        .collect())
}

impl PilingState {
    /// Exact histogram of a metadata key over a pile, keyed by the value's
    /// display form.
    pub fn badge_counts(&self, pile: &Pile, key: &str) -> Result<BTreeMap<String, usize>> {
        let mut counts = BTreeMap::new();
        for v in self.category_values(&pile.item_ids, key)? {
            *counts.entry(v.to_string()).or_insert(0) += 1;
        }
        Ok(counts)
    }

    /// The `k` items closest to the centroids of a k-means clustering of the
    /// pile, largest cluster first. Each centroid takes its nearest member,
    /// assigned greedily by ascending distance so no item is used twice.
    pub fn representative_items(&self, pile: &Pile, source: &FeatureSource, k: usize, seed: u64) -> Result<Vec<ItemId>> {
        if k == 0 {
            return Err(Error::InvalidSpec("k must be at least 1".to_string()));
        }
        if k > pile.len() {
            return Err(Error::NotEnoughVectors { n: pile.len(), k });
        }
        let rows = self.feature_rows(&pile.item_ids, source)?;
        let clustering = kmeans(&rows, k, seed)?;
        let mut pairs: Vec<(f64, usize, usize)> = (0..rows.len())
            .map(|i| {
                let c = clustering.assignments[i];
                (squared_distance(&rows[i], &clustering.centroids[c]), c, i)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut chosen: Vec<Option<usize>> = vec![None; k];
        let mut used = vec![false; rows.len()];
        for (_, c, i) in pairs {
            if chosen[c].is_none() && !used[i] {
                chosen[c] = Some(i);
                used[i] = true;
            }
        }
        let sizes = clustering.cluster_sizes();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|a, b| sizes[*b].cmp(&sizes[*a]).then(a.cmp(b)));
        Ok(order.into_iter().filter_map(|c| chosen[c]).map(|i| pile.item_ids[i].clone()).collect())
    }

    /// Reads each pile item's feature vector as a `rows` by `cols` matrix.
    pub fn pile_matrices(&self, pile: &Pile, rows: usize, cols: usize) -> Result<Vec<MatrixDatum>> {
        self.feature_rows(&pile.item_ids, &FeatureSource::Features)?
            .into_iter()
            .map(|v| MatrixDatum::new(rows, cols, v))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Canvas, Item, PileId};

    fn m(rows: usize, cols: usize, v: &[f64]) -> MatrixDatum {
        MatrixDatum::new(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn mean_and_variance() {
        let a = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let b = m(2, 2, &[3.0, 4.0, 5.0, 6.0]);
        assert_eq!(aggregate_matrices(&[a.clone(), b], AggregateKind::Mean).unwrap().values, [2.0, 3.0, 4.0, 5.0]);
        assert_eq!(aggregate_matrices(&[a.clone(), a], AggregateKind::Variance).unwrap().values, [0.0; 4]);
        let stack: Vec<MatrixDatum> = [0.0, 0.0, 2.0, 2.0].iter().map(|&v| m(1, 2, &[v, v])).collect();
        assert_eq!(aggregate_matrices(&stack, AggregateKind::Std).unwrap().values, [1.0, 1.0]);
    }

    #[test]
    fn aggregate_errors() {
        assert_eq!(aggregate_matrices(&[], AggregateKind::Mean), Err(Error::EmptyInput));
        let e = aggregate_matrices(&[m(1, 2, &[0.0, 0.0]), m(2, 1, &[0.0, 0.0])], AggregateKind::Mean);
        assert_eq!(e, Err(Error::ShapeMismatch { expected: (1, 2), found: (2, 1) }));
        assert_eq!(MatrixDatum::new(2, 2, vec![0.0]), Err(Error::MatrixSize { expected: 4, found: 1 }));
    }

    #[test]
    fn masked_cells() {
        let a = m(1, 2, &[1.0, 9.0]).with_mask(vec![false, true]).unwrap();
        let b = m(1, 2, &[3.0, 9.0]).with_mask(vec![false, true]).unwrap();
        let c = m(1, 2, &[5.0, 9.0]).with_mask(vec![true, true]).unwrap();
        let out = aggregate_matrices(&[a, b, c], AggregateKind::Mean).unwrap();
        assert_eq!(out.get(0, 0), Some(2.0));
        assert_eq!(out.get(0, 1), None);
    }

    #[test]
    fn foreshortening() {
        let x = m(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(foreshortened_preview(&x, SliceAxis::Rows, Reducer::Mean), [Some(2.0), Some(3.0)]);
        assert_eq!(foreshortened_preview(&x, SliceAxis::Cols, Reducer::Max), [Some(2.0), Some(4.0)]);
        let masked = x.with_mask(vec![false, true, false, true]).unwrap();
        assert_eq!(foreshortened_preview(&masked, SliceAxis::Rows, Reducer::Min), [Some(1.0), None]);
    }

    #[test]
    fn galleries() {
        let four = gallery_layout(4, 100, 100).unwrap();
        assert!(four.iter().all(|s| s.w == 50 && s.h == 50));
        assert_eq!(gallery_layout(1, 30, 20).unwrap(), [SlotRect { x: 0, y: 0, w: 30, h: 20 }]);
        assert_eq!(gallery_layout(5, 100, 100), Err(Error::UnsupportedGallerySize(5)));
        let three = gallery_layout(3, 90, 60).unwrap();
        assert_eq!(three[0], SlotRect { x: 0, y: 0, w: 60, h: 60 });
        assert_eq!(three[2], SlotRect { x: 60, y: 30, w: 30, h: 30 });
        let eight = gallery_layout(8, 101, 51).unwrap();
        assert_eq!(eight.iter().map(SlotRect::area).sum::<u64>(), 101 * 51);
        assert_eq!(eight[7], SlotRect { x: 75, y: 25, w: 26, h: 26 });
    }

    fn points(coords: &[(f64, f64, &str)]) -> (PilingState, Pile) {
        let items = coords.iter().map(|&(x, y, c)| Item::default().with_features(vec![x, y]).with_meta("c", c)).collect();
        let mut s = PilingState::new(items, Canvas::default(), 5).unwrap();
        let ids: Vec<PileId> = (1..coords.len() as u64).map(PileId).collect();
        if !ids.is_empty() {
            s.merge_piles(PileId(0), &ids).unwrap();
        }
        let pile = s.piles[&PileId(0)].clone();
        (s, pile)
    }

    #[test]
    fn representatives() {
        let (s, pile) = points(&[(0.0, 0.0, "a"), (0.1, 0.0, "a"), (10.0, 10.0, "b"), (10.1, 10.0, "b"), (10.0, 10.1, "b")]);
        let reps = s.representative_items(&pile, &FeatureSource::Features, 2, 1).unwrap();
        assert_eq!(reps.len(), 2);
        // larger cluster first
        assert!(["2", "3", "4"].contains(&reps[0].as_str()));
        assert!(["0", "1"].contains(&reps[1].as_str()));
        let all = s.representative_items(&pile, &FeatureSource::Features, 5, 1).unwrap();
        assert_eq!(all.len(), 5);
        assert!(s.representative_items(&pile, &FeatureSource::Features, 6, 1).is_err());
    }

    #[test]
    fn single_representative_is_nearest_to_mean() {
        let (s, pile) = points(&[(0.0, 0.0, "a"), (1.0, 0.0, "a"), (5.0, 0.0, "a")]);
        assert_eq!(s.representative_items(&pile, &FeatureSource::Features, 1, 0).unwrap()[0].as_str(), "1");
    }

    #[test]
    fn badges() {
        let (s, pile) = points(&[(0.0, 0.0, "US"), (0.0, 0.0, "US"), (0.0, 0.0, "CN")]);
        let counts = s.badge_counts(&pile, "c").unwrap();
        assert_eq!(counts.into_iter().collect::<Vec<_>>(), [("CN".to_string(), 1), ("US".to_string(), 2)]);
        assert!(matches!(s.badge_counts(&pile, "missing"), Err(Error::MissingMetadata { .. })));
    }
}
