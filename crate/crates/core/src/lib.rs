//! Headless state engine for interactive piling of small multiples.
//!
//! Items are immutable data points; piles are ordered groups of items that
//! act as one interactive unit. Every public operation preserves the
//! partition invariant: each item lives in exactly one pile, visible or
//! hidden behind a browsing layer.
//!
//! The crate is `no_std` and needs only `alloc`. Persistence, hashing,
//! scripting and benchmarking live in the `pilecore-bench` companion crate.
#![no_std]
#![forbid(unsafe_code)]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod aggregation;
pub mod animation;
pub mod arrangement;
pub mod delta;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod grouping;
pub mod interaction;
pub mod kmeans;
pub mod model;
pub mod pca;
mod rng;
pub mod state;
pub mod union_find;
pub mod view;

pub use aggregation::{AggregateKind, MatrixDatum, Reducer, SliceAxis, SlotRect};
pub use animation::{AnimationPlan, Easing, Keyframe, PileTransform};
pub use arrangement::{ArrangeBySpec, CoordSource, ItemOffset, ItemOffsetPolicy, PileReducer};
pub use delta::StateDelta;
pub use engine::Engine;
pub use error::{Error, Result};
pub use geometry::{Rect, Vec2};
pub use grouping::{FeatureSource, GroupBySpec, ProximityKind, SplitBySpec};
pub use interaction::{ContextAction, GestureEvent, GestureKind, InteractionMode};
pub use model::{Canvas, Item, ItemId, Pile, PileId, Scalar, Zoom};
pub use state::PilingState;
pub use view::{PropertyValue, ResolvedStyle, SpecifierTable, ViewProperty};

/// Version tag written into serialized state.
pub const STATE_VERSION: u32 = 1;
