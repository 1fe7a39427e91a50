//! Items, piles and the canvas they live on.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::geometry::{Rect, Vec2};

/// Item identifier.
///
/// Ordered numerically when both ids are decimal integers (so "2" < "10"),
/// lexicographically otherwise, with numeric ids first.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(pub String);

impl ItemId {
    pub fn new(id: impl Into<String>) -> Self {
        ItemId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn numeric(&self) -> Option<u64> {
        if self.0.is_empty() || !self.0.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        self.0.parse().ok()
    }
}

impl Ord for ItemId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.numeric(), other.numeric()) {
            (Some(a), Some(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ItemId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_string())
    }
}

/// Pile identifier. Assigned from a monotone counter and never reused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PileId(pub u64);

impl fmt::Display for PileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Metadata value.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Number(f64),
    Text(String),
    Bool(bool),
}

impl Scalar {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Scalar::Number(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Scalar::Bool(_) => 0,
            Scalar::Number(_) => 1,
            Scalar::Text(_) => 2,
        }
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => a.total_cmp(b),
            (Scalar::Text(a), Scalar::Text(b)) => a.cmp(b),
            (Scalar::Bool(a), Scalar::Bool(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Number(v) => write!(f, "{v}"),
            Scalar::Text(s) => f.write_str(s),
            Scalar::Bool(b) => write!(f, "{b}"),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Number(v)
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Text(s.to_string())
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Bool(b)
    }
}

/// One small multiple. Immutable once ingested; updates replace it wholesale.
///
/// An empty `id` means "unset": ingestion assigns the decimal list index.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Item {
    pub id: ItemId,
    /// Opaque payload handle handed to the renderer.
    #[serde(default)]
    pub src: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec2>,
}

impl Item {
    pub fn new(id: impl Into<String>) -> Self {
        Item { id: ItemId::new(id), ..Default::default() }
    }

    pub fn with_src(mut self, src: impl Into<String>) -> Self {
        self.src = src.into();
        self
    }

    pub fn with_features(mut self, features: Vec<f64>) -> Self {
        self.features = Some(features);
        self
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<Scalar>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_anchor(mut self, anchor: Vec2) -> Self {
        self.anchor = Some(anchor);
        self
    }
}

/// Records how an automatic grouping formed a pile, so a matching split can
/// restore the pieces it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub grouping: String,
    pub parts: Vec<Vec<ItemId>>,
}

/// An ordered, non-empty group of items. The last item is the cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pile {
    pub id: PileId,
    #[serde(rename = "itemIds")]
    pub item_ids: Vec<ItemId>,
    pub x: f64,
    pub y: f64,
    pub z: i64,
    #[serde(rename = "temporarilyDispersed", default)]
    pub temporarily_dispersed: bool,
    #[serde(default)]
    pub layer: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl Pile {
    pub fn new(id: PileId, item_ids: Vec<ItemId>, position: Vec2, z: i64) -> Self {
        Pile {
            id,
            item_ids,
            x: position.x,
            y: position.y,
            z,
            temporarily_dispersed: false,
            layer: 0,
            provenance: None,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn set_position(&mut self, p: Vec2) {
        self.x = p.x;
        self.y = p.y;
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    pub fn cover(&self) -> &ItemId {
        self.item_ids.last().expect("piles are never empty")
    }

    pub fn contains(&self, item: &ItemId) -> bool {
        self.item_ids.iter().any(|i| i == item)
    }
}

/// Canvas and grid layout parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub columns: u32,
    /// Item width divided by item height.
    #[serde(rename = "cellAspect")]
    pub cell_aspect: f64,
    pub padding: f64,
}

impl Default for Canvas {
    fn default() -> Self {
        Canvas { width: 1000.0, height: 800.0, columns: 10, cell_aspect: 1.0, padding: 4.0 }
    }
}

impl Canvas {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.columns >= 1
            && self.width.is_finite()
            && self.width > 0.0
            && self.height.is_finite()
            && self.height > 0.0
            && self.cell_aspect.is_finite()
            && self.cell_aspect > 0.0
            && self.padding.is_finite()
            && self.padding >= 0.0;
        let size = self.item_size();
        if !ok || !(size.x > 0.0 && size.y > 0.0) {
            return Err(crate::Error::InvalidSpec(alloc::format!("invalid canvas {self:?}")));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> Vec2 {
        let w = self.width / self.columns as f64;
        Vec2::new(w, w / self.cell_aspect)
    }

    /// Rendered size of one item: its cell minus padding.
    pub fn item_size(&self) -> Vec2 {
        let cell = self.cell_size();
        Vec2::new(cell.x - self.padding, cell.y - self.padding)
    }

    /// Number of whole rows that fit into the canvas height (at least one).
    pub fn rows(&self) -> usize {
        let rows = libm::floor(self.height / self.cell_size().y) as usize;
        rows.max(1)
    }

    /// Center of the cell at `(row, col)`, 0-based.
    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        let cell = self.cell_size();
        Vec2::new((col as f64 + 0.5) * cell.x, (row as f64 + 0.5) * cell.y)
    }

    /// Center of the `index`-th cell in row-major order.
    pub fn slot_center(&self, index: usize) -> Vec2 {
        let cols = self.columns as usize;
        self.cell_center(index / cols, index % cols)
    }

    /// The `(row, col)` cell containing a point, clamped to non-negative indices.
    pub fn cell_of(&self, p: Vec2) -> (i64, i64) {
        let cell = self.cell_size();
        (libm::floor(p.y / cell.y) as i64, libm::floor(p.x / cell.x) as i64)
    }

    pub fn item_rect(&self, center: Vec2) -> Rect {
        Rect::centered(center, self.item_size())
    }
}

/// Camera transform: screen = canvas * scale + translate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Zoom {
    pub scale: f64,
    pub translate: Vec2,
}

impl Default for Zoom {
    fn default() -> Self {
        Zoom { scale: 1.0, translate: Vec2::ZERO }
    }
}

impl Zoom {
    pub fn apply(&self, p: Vec2) -> Vec2 {
        p * self.scale + self.translate
    }

    pub fn invert(&self, p: Vec2) -> Vec2 {
        (p - self.translate) * (1.0 / self.scale)
    }

    pub fn is_valid(&self) -> bool {
        self.scale.is_finite() && self.scale > 0.0 && self.translate.is_finite()
    }
}
