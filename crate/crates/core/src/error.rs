use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{ItemId, PileId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every way an engine operation can be rejected.
///
/// A rejected operation leaves the state untouched.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate item id {0:?}")]
    DuplicateId(ItemId),
    #[error("item {id:?} has {found} features, expected {expected}")]
    FeatureLengthMismatch { id: ItemId, expected: usize, found: usize },
    #[error("item {0:?} has a non-finite feature value")]
    NonFiniteFeature(ItemId),
    #[error("unknown pile {0}")]
    UnknownPile(PileId),
    #[error("pile {0} cannot be merged onto itself")]
    SelfMerge(PileId),
    #[error("pile {0} listed more than once")]
    DuplicatePile(PileId),
    #[error("polygon needs at least 3 points, got {0}")]
    DegeneratePolygon(usize),
    #[error("metadata key {key:?} missing on items {ids:?}")]
    MissingMetadata { key: String, ids: Vec<ItemId> },
    #[error("metadata key {key:?} is not numeric on items {ids:?}")]
    NonNumericMetadata { key: String, ids: Vec<ItemId> },
    #[error("items {0:?} carry no feature vector")]
    MissingFeatures(Vec<ItemId>),
    #[error("k-means needs at least k={k} vectors, got {n}")]
    NotEnoughVectors { n: usize, k: usize },
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("arrangement key {key:?} unavailable on piles {piles:?}")]
    MissingArrangeKey { key: String, piles: Vec<PileId> },
    #[error("pile {pile} maps to cell ({i}, {j}) outside the {rows}x{columns} grid")]
    GridOutOfRange { pile: PileId, i: i64, j: i64, rows: usize, columns: usize },
    #[error("pile {pile} has uv coordinate outside the unit square")]
    UvOutOfRange { pile: PileId },
    #[error("matrix shape {found:?} does not match {expected:?}")]
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    #[error("matrix has {found} values, expected {expected}")]
    MatrixSize { expected: usize, found: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("gallery of {0} previews is not supported")]
    UnsupportedGallerySize(usize),
    #[error("unknown property {name:?}, did you mean {suggestion:?}?")]
    UnknownProperty { name: String, suggestion: String },
    #[error("value for {property:?} out of range: {value}")]
    RangeError { property: String, value: String },
    #[error("value for {property:?} has the wrong type, expected {expected}")]
    TypeMismatch { property: String, expected: &'static str },
    #[error("property {0:?} does not accept specifiers")]
    StaticOnly(String),
    #[error("unknown specifier {0:?}")]
    UnknownSpecifier(String),
    #[error("specifier for {property:?} produced a non-finite value on pile {pile}")]
    NonFiniteStyle { property: String, pile: PileId },
    #[error("specifier for {property:?} produced {value} on pile {pile}, outside the allowed range")]
    StyleOutOfRange { property: String, pile: PileId, value: f64 },
    #[error("item {item:?} is not on pile {pile}")]
    ItemNotInPile { pile: PileId, item: ItemId },
    #[error("already browsing a pile on a separate layer")]
    MaxLayerDepth,
    #[error("result computed at epoch {read} but state is at epoch {current}")]
    StaleEpoch { read: u64, current: u64 },
    #[error("non-finite input coordinate")]
    NonFinite,
}
