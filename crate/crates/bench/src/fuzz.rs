//! Random command generation for randomized testing.
//!
//! Commands are drawn against the current state so most pile references are
//! live, but a fraction deliberately point at missing piles or carry bad
//! arguments to exercise the rejection paths. Keys match the `points`
//! dataset.

use pilecore::{
    ArrangeBySpec, CoordSource, FeatureSource, GestureKind, GroupBySpec, ItemId, PileId, PilingState, SplitBySpec,
    Vec2, ViewProperty,
};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::script::{Command, PileRef};

const NUMERIC_KEYS: [&str; 5] = ["x", "y", "u", "v", "year"];

fn pile_ref<R: Rng>(state: &PilingState, rng: &mut R) -> PileRef {
    let ids: Vec<PileId> = state.piles.keys().copied().collect();
    match ids.choose(rng) {
        Some(id) if rng.random::<f64>() < 0.95 => PileRef::Id(*id),
        _ => PileRef::Id(PileId(rng.random_range(0..10_000))),
    }
}

fn item_ref<R: Rng>(state: &PilingState, rng: &mut R) -> ItemId {
    let n = state.items.len().max(1);
    ItemId::new(rng.random_range(0..n + 1).to_string())
}

fn point<R: Rng>(state: &PilingState, rng: &mut R) -> Vec2 {
    let c = &state.canvas;
    Vec2::new(rng.random_range(-20.0..c.width + 20.0), rng.random_range(-20.0..c.height + 20.0))
}

fn near_pile<R: Rng>(state: &PilingState, rng: &mut R) -> Vec2 {
    let piles: Vec<_> = state.piles.values().collect();
    match piles.choose(rng) {
        Some(p) => state.zoom.apply(p.position()) + Vec2::new(rng.random_range(-6.0..6.0), rng.random_range(-6.0..6.0)),
        None => point(state, rng),
    }
}

fn polygon<R: Rng>(state: &PilingState, rng: &mut R) -> Vec<Vec2> {
    let centre = point(state, rng);
    let r = rng.random_range(20.0..300.0);
    let n = rng.random_range(3..9);
    let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.iter().map(|a| centre + Vec2::new(a.cos(), a.sin()) * (r * rng.random_range(0.3..1.0))).collect()
}

fn key<R: Rng>(rng: &mut R) -> String {
    NUMERIC_KEYS.choose(rng).unwrap().to_string()
}

fn feature_source<R: Rng>(rng: &mut R) -> FeatureSource {
    if rng.random::<bool>() {
        FeatureSource::Features
    } else {
        FeatureSource::Metadata { keys: vec![key(rng), key(rng)] }
    }
}

fn cluster_k<R: Rng>(rng: &mut R) -> Option<usize> {
    if rng.random::<bool>() {
        None
    } else {
        Some(rng.random_range(1..12))
    }
}

/// One random command for `state`.
pub fn random_command<R: Rng>(state: &PilingState, rng: &mut R) -> Command {
    match rng.random_range(0..22) {
        0 | 1 => {
            let sources = (0..rng.random_range(1..4)).map(|_| pile_ref(state, rng)).collect();
            Command::Merge { target: pile_ref(state, rng), sources }
        }
        2 | 3 => Command::Lasso(polygon(state, rng)),
        4 => Command::GroupBy(match rng.random_range(0..7) {
            0 => GroupBySpec::Overlap { reactive: rng.random() },
            1 => GroupBySpec::Distance { threshold: rng.random_range(1.0..120.0), reactive: rng.random() },
            2 => GroupBySpec::Grid { columns: rng.random_bool(0.5).then(|| rng.random_range(1..12)) },
            3 => GroupBySpec::Column { columns: None },
            4 => GroupBySpec::Row { columns: None },
            5 => GroupBySpec::Category { key: "cluster".into() },
            _ => GroupBySpec::Cluster { source: feature_source(rng), k: cluster_k(rng) },
        }),
        5 => Command::SplitBy(match rng.random_range(0..4) {
            0 => SplitBySpec::Overlap,
            1 => SplitBySpec::Distance { threshold: rng.random_range(1.0..120.0) },
            2 => SplitBySpec::Category { key: "cluster".into() },
            _ => SplitBySpec::Cluster { source: feature_source(rng), k: cluster_k(rng) },
        }),
        6 => Command::Disperse(pile_ref(state, rng)),
        7 => Command::Undisperse,
        8 => Command::Browse(pile_ref(state, rng)),
        9 => Command::Leave,
        10 => Command::Zoom { factor: rng.random_range(0.5..2.0), about: point(state, rng) },
        11 => Command::ArrangeBy(match rng.random_range(0..5) {
            0 => ArrangeBySpec::Index { key: rng.random_bool(0.5).then(|| key(rng)) },
            1 => ArrangeBySpec::Xy { source: CoordSource::Anchor },
            2 => ArrangeBySpec::Uv { source: CoordSource::Metadata { x: "u".into(), y: "v".into() } },
            3 => ArrangeBySpec::Data { keys: vec![key(rng), key(rng)] },
            _ => ArrangeBySpec::Data { keys: vec!["x".into(), "y".into(), "u".into()] },
        }),
        12 => Command::Move { pile: pile_ref(state, rng), to: point(state, rng) },
        13 => Command::Hover { pile: pile_ref(state, rng), item: item_ref(state, rng) },
        14 => Command::Unhover,
        15 => Command::Set {
            name: ["pileScale", "itemBrightness", "itemOpacity", "columns"].choose(rng).unwrap().to_string(),
            value: match rng.random_range(0..3) {
                0 => ViewProperty::specifier(if rng.random() { "scaleByCount" } else { "brightnessByIndex" }),
                1 => rng.random_range(-2.0..12.0f64).round().into(),
                _ => rng.random_range(0.0..1.0f64).into(),
            },
        },
        _ => {
            let kind = match rng.random_range(0..6) {
                0 | 1 => GestureKind::PointerDown,
                2 | 3 => GestureKind::PointerMove,
                4 => GestureKind::PointerUp,
                _ => GestureKind::DoubleClick,
            };
            let at = if rng.random::<bool>() { near_pile(state, rng) } else { point(state, rng) };
            Command::Gesture { kind, at: Some(at), target: None }
        }
    }
}
