mod common;

use common::{apply, op_strategy, state};
use pilecore::view::SpecifierTable;
use pilecore::{Engine, Scalar, StateDelta, ViewProperty};
use proptest::prelude::*;
use std::collections::BTreeMap;

fn table() -> SpecifierTable {
    let mut t = SpecifierTable::with_builtins();
    t.register_pile("labelByCover", |_, pile| Scalar::Text(pile.cover().to_string()));
    t.register_item("opacityByValue", |_, item, _, _| Scalar::Number(item.metadata["v"].as_f64().unwrap() / 100.0));
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cached_styles_always_match_a_fresh_resolve(seed in any::<u64>(), steps in prop::collection::vec(prop_oneof![
        op_strategy().prop_map(Some),
        Just(None),
    ], 1..30)) {
        let mut engine = Engine::with_specifiers(state(12, seed), table());
        engine.set_property("pileScale", ViewProperty::specifier("scaleByCount")).unwrap();
        engine.set_property("pileLabel", ViewProperty::specifier("labelByCover")).unwrap();
        engine.set_property("itemBrightness", ViewProperty::specifier("brightnessByIndex")).unwrap();
        engine.set_property("itemOpacity", ViewProperty::specifier("opacityByValue")).unwrap();
        for step in steps {
            match step {
                Some(op) => {
                    let _ = engine.apply(|s| apply(s, &op));
                }
                None => {
                    let cached = engine.resolve_styles().unwrap();
                    let fresh = engine.state().resolve_styles(engine.specifiers()).unwrap();
                    prop_assert_eq!(&*cached, &fresh);
                    prop_assert_eq!(cached.len(), engine.state().piles.len());
                }
            }
        }
    }

    #[test]
    fn deltas_rebuild_the_visible_piles(seed in any::<u64>(), ops in prop::collection::vec(op_strategy(), 1..30)) {
        let mut engine = Engine::new(state(15, seed));
        let mut mirror = BTreeMap::new();
        StateDelta::snapshot(engine.state()).apply_to(&mut mirror);
        for op in ops {
            if let Ok(delta) = engine.apply(|s| apply(s, &op)) {
                let text = serde_json::to_string(&delta).unwrap();
                let delta: StateDelta = serde_json::from_str(&text).unwrap();
                delta.apply_to(&mut mirror);
                prop_assert_eq!(delta.epoch, engine.epoch());
            }
            prop_assert_eq!(&mirror, &engine.state().piles);
        }
    }
}
