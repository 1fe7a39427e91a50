//! Transition plans between two states: per-pile keyframes along straight
//! segments, sampled with an easing curve.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::model::{ItemId, PileId};
use crate::state::PilingState;

pub const DEFAULT_DURATION_MS: u32 = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Easing {
    Linear,
    #[default]
    CubicInOut,
}

impl Easing {
    /// Maps progress in [0, 1] to eased progress. Endpoints are exact and the
    /// curve is non-decreasing.
    pub fn apply(self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        match self {
            Easing::Linear => t,
            Easing::CubicInOut if t < 0.5 => 4.0 * t * t * t,
            Easing::CubicInOut => {
                let u = 2.0 - 2.0 * t;
                1.0 - u * u * u / 2.0
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Keyframe {
    pub pile: PileId,
    pub start: Vec2,
    pub end: Vec2,
    pub start_scale: f64,
    pub end_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnimationPlan {
    /// Epoch of the state the plan animates towards.
    pub epoch: u64,
    pub duration_ms: u32,
    pub easing: Easing,
    pub keyframes: Vec<Keyframe>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PileTransform {
    pub pile: PileId,
    pub position: Vec2,
    pub scale: f64,
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a * (1.0 - t) + b * t
}

impl AnimationPlan {
    /// Pile transforms at progress `t` in [0, 1].
    pub fn sample(&self, t: f64) -> Vec<PileTransform> {
        let e = self.easing.apply(t);
        self.keyframes
            .iter()
            .map(|k| PileTransform {
                pile: k.pile,
                position: Vec2::new(lerp(k.start.x, k.end.x, e), lerp(k.start.y, k.end.y, e)),
                scale: lerp(k.start_scale, k.end_scale, e),
            })
            .collect()
    }

    /// Samples at an elapsed time in milliseconds.
    pub fn sample_at(&self, elapsed_ms: u32) -> Vec<PileTransform> {
        let t = if self.duration_ms == 0 { 1.0 } else { elapsed_ms as f64 / self.duration_ms as f64 };
        self.sample(t)
    }
}

/// Keyframes moving every visible pile of `new` from where its content was
/// in `old`, and every pile that disappeared towards the pile that absorbed
/// its cover. Returns `None` when nothing moves.
pub fn plan_transition(old: &PilingState, new: &PilingState) -> Option<AnimationPlan> {
    let old_home: BTreeMap<&ItemId, Vec2> =
        old.piles.values().flat_map(|p| p.item_ids.iter().map(move |id| (id, p.position()))).collect();
    let new_home: BTreeMap<&ItemId, PileId> =
        new.piles.values().flat_map(|p| p.item_ids.iter().map(move |id| (id, p.id))).collect();
    let mut keyframes = Vec::new();
    for p in new.piles.values() {
        let start = match old.piles.get(&p.id) {
            Some(o) => Some(o.position()),
            None => old_home.get(p.cover()).copied(),
        };
        if let Some(start) = start.filter(|s| *s != p.position()) {
            keyframes.push(Keyframe { pile: p.id, start, end: p.position(), start_scale: 1.0, end_scale: 1.0 });
        }
    }
    for p in old.piles.values().filter(|p| !new.piles.contains_key(&p.id)) {
        if let Some(target) = new_home.get(p.cover()) {
            let end = new.piles[target].position();
            keyframes.push(Keyframe { pile: p.id, start: p.position(), end, start_scale: 1.0, end_scale: 0.0 });
        }
    }
    (!keyframes.is_empty()).then_some(AnimationPlan {
        epoch: new.epoch,
        duration_ms: DEFAULT_DURATION_MS,
        easing: Easing::default(),
        keyframes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn easing_endpoints_and_monotone() {
        for e in [Easing::Linear, Easing::CubicInOut] {
            assert_eq!(e.apply(0.0), 0.0);
            assert_eq!(e.apply(1.0), 1.0);
            let mut last = 0.0;
            for i in 0..=1000 {
                let v = e.apply(i as f64 / 1000.0);
                assert!(v >= last);
                last = v;
            }
        }
        assert_eq!(Easing::CubicInOut.apply(0.5), 0.5);
    }

    #[test]
    fn sample_hits_endpoints_exactly() {
        let plan = AnimationPlan {
            epoch: 1,
            duration_ms: 250,
            easing: Easing::CubicInOut,
            keyframes: alloc::vec![Keyframe {
                pile: PileId(0),
                start: Vec2::new(0.1, 0.7),
                end: Vec2::new(3.3, -9.1),
                start_scale: 1.0,
                end_scale: 0.0,
            }],
        };
        assert_eq!(plan.sample(0.0)[0].position, Vec2::new(0.1, 0.7));
        assert_eq!(plan.sample(1.0)[0].position, Vec2::new(3.3, -9.1));
        assert_eq!(plan.sample_at(250)[0].scale, 0.0);
    }
}
