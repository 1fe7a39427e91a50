use pilecore::{Canvas, Engine, GroupBySpec, Item, PilingState, StateDelta, Vec2};
use pilecore_bench::state_file::format_hash;
use pilecore_bench::{from_json, state_hash, to_canonical_json, StateFileError};

fn small() -> PilingState {
    let items = ["a", "b", "c"]
        .iter()
        .enumerate()
        .map(|(i, id)| {
            Item::new(*id)
                .with_meta("kind", if i < 2 { "x" } else { "y" })
                .with_features(vec![i as f64, 0.5])
                .with_anchor(Vec2::new(10.0 * i as f64, 20.0))
        })
        .collect();
    PilingState::new(items, Canvas::default(), 3).unwrap()
}

const ONE_ITEM: &str = r#"{"anchors":{"a":{"x":5.0000000000000000e1,"y":5.0000000000000000e1}},"arrangement":null,"canvas":{"cellAspect":1.0000000000000000e0,"columns":10,"height":8.0000000000000000e2,"padding":4.0000000000000000e0,"width":1.0000000000000000e3},"dispersionBackup":null,"epoch":0,"hover":null,"items":[{"id":"a","src":""}],"layer":null,"mode":{"mode":"idle"},"nextPileId":1,"offsetPolicy":{"dx":5.0000000000000000e0,"dy":5.0000000000000000e0,"mode":"orderly","origin":"cover"},"pileReducer":"cover","piles":[{"id":0,"itemIds":["a"],"layer":0,"temporarilyDispersed":false,"x":5.0000000000000000e1,"y":5.0000000000000000e1,"z":0}],"seed":0,"version":1,"viewConfig":{},"zoom":{"scale":1.0000000000000000e0,"translate":{"x":0.0000000000000000e0,"y":0.0000000000000000e0}},"zoomGrouping":null}"#;

#[test]
fn canonical_text_is_stable() {
    let s = PilingState::new(vec![Item::new("a")], Canvas::default(), 0).unwrap();
    assert_eq!(to_canonical_json(&s).unwrap(), ONE_ITEM);
    assert_eq!(from_json(ONE_ITEM).unwrap(), s);
}

#[test]
fn frozen_hashes() {
    let empty = PilingState::new(vec![], Canvas::default(), 0).unwrap();
    assert_eq!(format_hash(state_hash(&empty)), "619739336d391aca");
    let mut s = small();
    assert_eq!(format_hash(state_hash(&s)), "74766865d71a9e47");
    s.group_by(&GroupBySpec::Category { key: "kind".into() }).unwrap();
    assert_eq!(format_hash(state_hash(&s)), "3a58020d48dab663");
    s.epoch += 40;
    assert_eq!(format_hash(state_hash(&s)), "3a58020d48dab663");
}

#[test]
fn loaded_states_are_checked() {
    let mut broken: serde_json::Value = serde_json::from_str(ONE_ITEM).unwrap();
    broken["piles"][0]["itemIds"] = serde_json::json!(["a", "a"]);
    assert!(matches!(from_json(&broken.to_string()), Err(StateFileError::Invalid(_))));
    let mut future: serde_json::Value = serde_json::from_str(ONE_ITEM).unwrap();
    future["version"] = serde_json::json!(99);
    assert!(matches!(from_json(&future.to_string()), Err(StateFileError::Version(99))));
    assert!(matches!(from_json("{\"version\": 1,"), Err(StateFileError::Parse { .. })));
}

#[test]
fn deltas_cross_the_message_boundary() {
    let mut engine = Engine::new(small());
    let loaded = from_json(&to_canonical_json(engine.state()).unwrap()).unwrap();
    let mut mirror = loaded.piles.clone();
    let delta = engine.apply(|s| s.group_by(&GroupBySpec::Category { key: "kind".into() })).unwrap();
    let wire = serde_json::to_string(&delta).unwrap();
    let received: StateDelta = serde_json::from_str(&wire).unwrap();
    received.apply_to(&mut mirror);
    assert_eq!(mirror, engine.state().piles);
    assert_eq!(received.epoch, engine.epoch());
}
