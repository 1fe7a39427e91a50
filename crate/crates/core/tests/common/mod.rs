#![allow(dead_code)]

use pilecore::interaction::GestureOutcome;
use pilecore::{
    ArrangeBySpec, Canvas, ContextAction, CoordSource, FeatureSource, GestureEvent, GestureKind, GroupBySpec, Item,
    PileId, PilingState, SplitBySpec, Vec2, Zoom,
};
use proptest::prelude::*;

pub const CATEGORIES: [&str; 4] = ["red", "green", "blue", "gray"];

/// Deterministic items with 3 features, a category, a numeric value and an
/// anchor spread over the default canvas.
pub fn items(n: usize, seed: u64) -> Vec<Item> {
    let mut x = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| {
            let cat = CATEGORIES[(next() * 4.0) as usize % 4];
            Item::default()
                .with_features(vec![next(), next(), next()])
                .with_meta("cat", cat)
                .with_meta("v", (next() * 100.0).floor())
                .with_anchor(Vec2::new(next() * 1000.0, next() * 800.0))
        })
        .collect()
}

pub fn state(n: usize, seed: u64) -> PilingState {
    PilingState::new(items(n, seed), Canvas::default(), seed).unwrap()
}

/// One randomly parameterised operation; indices are reduced modulo the
/// current pile count when applied.
#[derive(Debug, Clone)]
pub enum Op {
    Merge(usize, Vec<usize>),
    Lasso(Vec<(f64, f64)>),
    Group(u8),
    Split(u8),
    Disperse(usize),
    EndDisperse,
    Browse(usize),
    Leave,
    Zoom(f64, f64, f64),
    Arrange(u8),
    Move(usize, f64, f64),
    Hover(usize),
    Gesture(u8, f64, f64, u64),
}

pub fn op_strategy() -> impl Strategy<Value = Op> {
    let coord = || (0.0..1000.0f64, 0.0..800.0f64);
    prop_oneof![
        (any::<usize>(), prop::collection::vec(any::<usize>(), 1..4)).prop_map(|(t, s)| Op::Merge(t, s)),
        prop::collection::vec(coord(), 3..7).prop_map(Op::Lasso),
        (0u8..7).prop_map(Op::Group),
        (0u8..4).prop_map(Op::Split),
        any::<usize>().prop_map(Op::Disperse),
        Just(Op::EndDisperse),
        any::<usize>().prop_map(Op::Browse),
        Just(Op::Leave),
        (0.25..4.0f64, -200.0..200.0f64, -200.0..200.0f64).prop_map(|(s, x, y)| Op::Zoom(s, x, y)),
        (0u8..4).prop_map(Op::Arrange),
        (any::<usize>(), 0.0..1000.0f64, 0.0..800.0f64).prop_map(|(p, x, y)| Op::Move(p, x, y)),
        any::<usize>().prop_map(Op::Hover),
        (0u8..7, 0.0..1000.0f64, 0.0..800.0f64, 0u64..10_000).prop_map(|(k, x, y, t)| Op::Gesture(k, x, y, t)),
    ]
}

fn nth_pile(s: &PilingState, i: usize) -> Option<PileId> {
    let n = s.piles.len();
    (n > 0).then(|| *s.piles.keys().nth(i % n).unwrap())
}

pub fn gesture_kind(k: u8) -> GestureKind {
    match k % 7 {
        0 => GestureKind::PointerDown,
        1 | 2 => GestureKind::PointerMove,
        3 => GestureKind::PointerUp,
        4 => GestureKind::DoubleClick,
        5 => GestureKind::ContextAction { action: ContextAction::BrowseSeparately },
        _ => GestureKind::ContextAction { action: ContextAction::LeaveLayer },
    }
}

/// Applies `op`; engine rejections are fine, panics and broken invariants
/// are not.
pub fn apply(s: &mut PilingState, op: &Op) -> pilecore::Result<()> {
    match op {
        Op::Merge(t, srcs) => match nth_pile(s, *t) {
            Some(target) => {
                let mut sources: Vec<PileId> = srcs.iter().filter_map(|i| nth_pile(s, *i)).collect();
                sources.sort();
                sources.dedup();
                s.merge_piles(target, &sources)
            }
            None => Ok(()),
        },
        Op::Lasso(pts) => s.lasso_group(&pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect::<Vec<_>>()),
        Op::Group(k) => s.group_by(&match k {
            0 => GroupBySpec::Overlap { reactive: false },
            1 => GroupBySpec::Distance { threshold: 60.0, reactive: false },
            2 => GroupBySpec::Grid { columns: Some(4) },
            3 => GroupBySpec::Category { key: "cat".into() },
            4 => GroupBySpec::Cluster { source: FeatureSource::Features, k: None },
            5 => GroupBySpec::Overlap { reactive: true },
            _ => GroupBySpec::Row { columns: None },
        }),
        Op::Split(k) => s.split_by(&match k {
            0 => SplitBySpec::Overlap,
            1 => SplitBySpec::Distance { threshold: 60.0 },
            2 => SplitBySpec::Category { key: "cat".into() },
            _ => SplitBySpec::Cluster { source: FeatureSource::Features, k: None },
        }),
        Op::Disperse(i) => nth_pile(s, *i).map_or(Ok(()), |p| s.temporary_disperse(p)),
        Op::EndDisperse => {
            s.end_temporary_disperse();
            Ok(())
        }
        Op::Browse(i) => nth_pile(s, *i).map_or(Ok(()), |p| s.browse_separately(p)),
        Op::Leave => s.leave_layer(),
        Op::Zoom(scale, x, y) => s.zoom_update(Zoom { scale: *scale, translate: Vec2::new(*x, *y) }),
        Op::Arrange(k) => s.arrange_by(match k {
            0 => ArrangeBySpec::Index { key: None },
            1 => ArrangeBySpec::Index { key: Some("v".into()) },
            2 => ArrangeBySpec::Xy { source: CoordSource::Anchor },
            _ => ArrangeBySpec::Data { keys: vec!["v".into()] },
        }),
        Op::Move(i, x, y) => nth_pile(s, *i).map_or(Ok(()), |p| s.move_pile(p, Vec2::new(*x, *y))),
        Op::Hover(i) => match nth_pile(s, *i) {
            Some(p) => {
                let item = s.piles[&p].item_ids[*i % s.piles[&p].len()].clone();
                s.hover_preview(p, &item)
            }
            None => Ok(()),
        },
        Op::Gesture(k, x, y, t) => {
            let GestureOutcome { .. } = s.apply_gesture(&GestureEvent::new(gesture_kind(*k), Vec2::new(*x, *y), *t));
            Ok(())
        }
    }
}
