//! View properties: named, scoped settings that are either static values or
//! references to registered specifier functions, and their resolution into
//! concrete per-pile styles.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::arrangement::{item_offsets, ItemOffset, ItemOffsetPolicy, PileReducer};
use crate::error::{Error, Result};
use crate::model::{Item, Pile, PileId, Scalar};
use crate::state::PilingState;

pub type PropertyValue = Scalar;

/// Stored value of a pile or item property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ViewProperty {
    /// Reference into a [`SpecifierTable`].
    Specifier { specifier: String },
    Static(Scalar),
}

impl ViewProperty {
    pub fn specifier(name: impl Into<String>) -> Self {
        ViewProperty::Specifier { specifier: name.into() }
    }
}

impl<T: Into<Scalar>> From<T> for ViewProperty {
    fn from(v: T) -> Self {
        ViewProperty::Static(v.into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Global,
    Pile,
    Item,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Count,
    Positive,
    NonNegative,
    Finite,
    Range(f64, f64),
    Text,
    Any,
    OffsetMode,
    Reducer,
}

struct Def {
    name: &'static str,
    scope: Scope,
    kind: Kind,
}

const fn def(name: &'static str, scope: Scope, kind: Kind) -> Def {
    Def { name, scope, kind }
}

const PROPERTIES: &[Def] = &[
    def("columns", Scope::Global, Kind::Count),
    def("cellAspect", Scope::Global, Kind::Positive),
    def("cellPadding", Scope::Global, Kind::NonNegative),
    def("itemOffsetMode", Scope::Global, Kind::OffsetMode),
    def("itemOffsetX", Scope::Global, Kind::Finite),
    def("itemOffsetY", Scope::Global, Kind::Finite),
    def("itemMaxOffset", Scope::Global, Kind::NonNegative),
    def("itemMaxRotation", Scope::Global, Kind::NonNegative),
    def("pileReducer", Scope::Global, Kind::Reducer),
    def("pileScale", Scope::Pile, Kind::Positive),
    def("pileBorderSize", Scope::Pile, Kind::NonNegative),
    def("pileBorderColor", Scope::Pile, Kind::Text),
    def("pileLabel", Scope::Pile, Kind::Any),
    def("pileBadgeKey", Scope::Pile, Kind::Text),
    def("itemBrightness", Scope::Item, Kind::Range(-1.0, 1.0)),
    def("itemTint", Scope::Item, Kind::Text),
    def("itemOpacity", Scope::Item, Kind::Range(0.0, 1.0)),
];

pub const DEFAULT_BORDER_COLOR: &str = "#808080";

/// Scope of a registered property, or `None` for unknown names.
pub fn property_scope(name: &str) -> Option<Scope> {
    PROPERTIES.iter().find(|d| d.name == name).map(|d| d.scope)
}

pub fn property_names() -> impl Iterator<Item = &'static str> {
    PROPERTIES.iter().map(|d| d.name)
}

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

fn lookup(name: &str) -> Result<&'static Def> {
    PROPERTIES.iter().find(|d| d.name == name).ok_or_else(|| {
        let lower = name.to_lowercase();
        let suggestion = PROPERTIES.iter().min_by_key(|d| levenshtein(&lower, &d.name.to_lowercase())).unwrap();
        Error::UnknownProperty { name: name.to_string(), suggestion: suggestion.name.to_string() }
    })
}

fn check_value(def: &Def, value: &Scalar) -> Result<()> {
    let range_err = || Error::RangeError { property: def.name.to_string(), value: value.to_string() };
    let type_err = |expected| Error::TypeMismatch { property: def.name.to_string(), expected };
    match def.kind {
        Kind::Text => value.as_str().map(|_| ()).ok_or_else(|| type_err("string")),
        Kind::Any => Ok(()),
        Kind::OffsetMode => match value.as_str() {
            Some("orderly" | "random") => Ok(()),
            Some(_) => Err(range_err()),
            None => Err(type_err("\"orderly\" or \"random\"")),
        },
        Kind::Reducer => match value.as_str() {
            Some("cover" | "mean" | "min" | "max") => Ok(()),
            Some(_) => Err(range_err()),
            None => Err(type_err("\"cover\", \"mean\", \"min\" or \"max\"")),
        },
        kind => {
            let v = value.as_f64().ok_or_else(|| type_err("number"))?;
            let ok = v.is_finite()
                && match kind {
                    Kind::Count => v >= 1.0 && v == libm::floor(v) && v <= u32::MAX as f64,
                    Kind::Positive => v > 0.0,
                    Kind::NonNegative => v >= 0.0,
                    Kind::Range(lo, hi) => (lo..=hi).contains(&v),
                    _ => true,
                };
            if ok {
                Ok(())
            } else {
                Err(range_err())
            }
        }
    }
}

pub type PileFn = dyn Fn(&PilingState, &Pile) -> Scalar + Send + Sync;
pub type ItemFn = dyn Fn(&PilingState, &Item, usize, &Pile) -> Scalar + Send + Sync;

/// A pure function computing a property value. Pile specifiers see the pile;
/// item specifiers see the item, its index (0 = bottom) and its pile. Both
/// get a read-only snapshot of the state.
#[derive(Clone)]
pub enum Specifier {
    Pile(Arc<PileFn>),
    Item(Arc<ItemFn>),
}

impl fmt::Debug for Specifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Specifier::Pile(_) => "Specifier::Pile",
            Specifier::Item(_) => "Specifier::Item",
        })
    }
}

/// Named specifiers that view properties can refer to.
#[derive(Debug, Clone, Default)]
pub struct SpecifierTable {
    entries: BTreeMap<String, Specifier>,
}

impl SpecifierTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Table preloaded with `scaleByCount` (1 + 0.1 log2 n) and
    /// `brightnessByIndex` (-i / n).
    pub fn with_builtins() -> Self {
        let mut t = Self::new();
        t.register_pile("scaleByCount", |_, pile| Scalar::Number(1.0 + 0.1 * libm::log2(pile.len() as f64)));
        t.register_item("brightnessByIndex", |_, _, i, pile| Scalar::Number(-(i as f64) / pile.len() as f64));
        t
    }

    pub fn register_pile<F>(&mut self, name: &str, f: F)
    where
        F: Fn(&PilingState, &Pile) -> Scalar + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Specifier::Pile(Arc::new(f)));
    }

    pub fn register_item<F>(&mut self, name: &str, f: F)
    where
        F: Fn(&PilingState, &Item, usize, &Pile) -> Scalar + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Specifier::Item(Arc::new(f)));
    }

    pub fn get(&self, name: &str) -> Option<&Specifier> {
        self.entries.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Checks that `value` can be stored under `property`.
    pub fn check(&self, property: &str, value: &ViewProperty) -> Result<()> {
        let def = lookup(property)?;
        match value {
            ViewProperty::Static(v) => check_value(def, v),
            ViewProperty::Specifier { specifier } => {
                let spec = self.get(specifier).ok_or_else(|| Error::UnknownSpecifier(specifier.clone()))?;
                match (def.scope, spec) {
                    (Scope::Global, _) => Err(Error::StaticOnly(property.to_string())),
                    (Scope::Pile, Specifier::Pile(_)) | (Scope::Item, Specifier::Item(_)) => Ok(()),
                    (Scope::Pile, _) => Err(Error::TypeMismatch { property: property.to_string(), expected: "pile specifier" }),
                    (Scope::Item, _) => Err(Error::TypeMismatch { property: property.to_string(), expected: "item specifier" }),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ItemStyle {
    pub brightness: f64,
    pub tint: Option<String>,
    pub opacity: f64,
    pub offset: ItemOffset,
}

/// Concrete style of one pile. `items` follows the pile's item order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResolvedStyle {
    pub scale: f64,
    pub border_size: f64,
    pub border_color: String,
    pub label: Option<String>,
    pub badge: Option<BTreeMap<String, usize>>,
    pub items: Vec<ItemStyle>,
}

impl PilingState {
    /// Validates and stores a property. Global properties are static only
    /// and write straight into the canvas, offset policy or pile reducer;
    /// grid changes re-run the registered arrangement.
    pub fn set_property(&mut self, name: &str, value: ViewProperty, table: &SpecifierTable) -> Result<()> {
        table.check(name, &value)?;
        let def = lookup(name)?;
        if def.scope != Scope::Global {
            return self.transact(|s| {
                s.view_config.insert(name.to_string(), value);
                Ok(())
            });
        }
        let ViewProperty::Static(v) = value else { unreachable!() };
        let num = v.as_f64().unwrap_or(0.0);
        let text = v.as_str().unwrap_or("").to_string();
        self.transact(|s| {
            let mut canvas = s.canvas;
            match name {
                "columns" => canvas.columns = num as u32,
                "cellAspect" => canvas.cell_aspect = num,
                "cellPadding" => canvas.padding = num,
                "itemOffsetMode" => {
                    s.offset_policy = match (text.as_str(), &s.offset_policy) {
                        ("orderly", p @ ItemOffsetPolicy::Orderly { .. }) | ("random", p @ ItemOffsetPolicy::Random { .. }) => *p,
                        ("orderly", _) => ItemOffsetPolicy::default(),
                        _ => ItemOffsetPolicy::Random { max_offset: 10.0, max_rotation: 0.0, seed: None },
                    }
                }
                "itemOffsetX" | "itemOffsetY" => match &mut s.offset_policy {
                    ItemOffsetPolicy::Orderly { dx, dy, .. } => *(if name == "itemOffsetX" { dx } else { dy }) = num,
                    _ => return Err(Error::InvalidSpec(alloc::format!("{name} needs orderly item offsets"))),
                },
                "itemMaxOffset" | "itemMaxRotation" => match &mut s.offset_policy {
                    ItemOffsetPolicy::Random { max_offset, max_rotation, .. } => {
                        *(if name == "itemMaxOffset" { max_offset } else { max_rotation }) = num
                    }
                    _ => return Err(Error::InvalidSpec(alloc::format!("{name} needs random item offsets"))),
                },
                "pileReducer" => {
                    s.pile_reducer = match text.as_str() {
                        "mean" => PileReducer::Mean,
                        "min" => PileReducer::Min,
                        "max" => PileReducer::Max,
                        _ => PileReducer::Cover,
                    }
                }
                _ => unreachable!(),
            }
            if canvas != s.canvas {
                canvas.validate()?;
                s.canvas = canvas;
                s.reapply_arrangement()?;
            }
            Ok(())
        })
    }

    /// Current value of a property as a scalar, for reporting.
    pub fn property(&self, name: &str) -> Result<ViewProperty> {
        let def = lookup(name)?;
        let n = |v: f64| ViewProperty::Static(Scalar::Number(v));
        let t = |v: &str| ViewProperty::Static(Scalar::Text(v.to_string()));
        Ok(match (name, &self.offset_policy) {
            ("columns", _) => n(self.canvas.columns as f64),
            ("cellAspect", _) => n(self.canvas.cell_aspect),
            ("cellPadding", _) => n(self.canvas.padding),
            ("itemOffsetMode", ItemOffsetPolicy::Orderly { .. }) => t("orderly"),
            ("itemOffsetMode", _) => t("random"),
            ("itemOffsetX", ItemOffsetPolicy::Orderly { dx, .. }) => n(*dx),
            ("itemOffsetY", ItemOffsetPolicy::Orderly { dy, .. }) => n(*dy),
            ("itemMaxOffset", ItemOffsetPolicy::Random { max_offset, .. }) => n(*max_offset),
            ("itemMaxRotation", ItemOffsetPolicy::Random { max_rotation, .. }) => n(*max_rotation),
            ("pileReducer", _) => t(match self.pile_reducer {
                PileReducer::Cover => "cover",
                PileReducer::Mean => "mean",
                PileReducer::Min => "min",
                PileReducer::Max => "max",
            }),
            _ if def.scope == Scope::Global => n(0.0),
            _ => self.view_config.get(name).cloned().unwrap_or_else(|| default_of(name)),
        })
    }

    /// Resolves every visible pile's style. Pile specifiers run once per
    /// pile, item specifiers once per item.
    pub fn resolve_styles(&self, table: &SpecifierTable) -> Result<BTreeMap<PileId, ResolvedStyle>> {
        self.piles.values().map(|pile| Ok((pile.id, self.resolve_pile(pile, table)?))).collect()
    }

    fn resolve_pile(&self, pile: &Pile, table: &SpecifierTable) -> Result<ResolvedStyle> {
        let pile_value = |name: &str| -> Result<Option<Scalar>> {
            match self.view_config.get(name) {
                None => Ok(None),
                Some(ViewProperty::Static(v)) => Ok(Some(v.clone())),
                Some(ViewProperty::Specifier { specifier }) => match table.get(specifier) {
                    Some(Specifier::Pile(f)) => Ok(Some(f(self, pile))),
                    _ => Err(Error::UnknownSpecifier(specifier.clone())),
                },
            }
        };
        let number = |name: &str, default: f64| -> Result<f64> {
            match pile_value(name)? {
                None => Ok(default),
                Some(v) => self.checked_number(name, pile.id, &v),
            }
        };
        let text = |name: &str| -> Result<Option<String>> { Ok(pile_value(name)?.map(|v| v.to_string())) };

        let scale = number("pileScale", 1.0)?;
        let border_size = number("pileBorderSize", 1.0)?;
        let border_color = text("pileBorderColor")?.unwrap_or_else(|| DEFAULT_BORDER_COLOR.to_string());
        let label = text("pileLabel")?;
        let badge = match text("pileBadgeKey")? {
            Some(key) => Some(self.badge_counts(pile, &key)?),
            None => None,
        };

        let specs = |name: &str| -> Result<Option<ItemSource<'_>>> {
            match self.view_config.get(name) {
                None => Ok(None),
                Some(ViewProperty::Static(v)) => Ok(Some(ItemSource::Static(v.clone()))),
                Some(ViewProperty::Specifier { specifier }) => match table.get(specifier) {
                    Some(Specifier::Item(f)) => Ok(Some(ItemSource::Fn(f.as_ref()))),
                    _ => Err(Error::UnknownSpecifier(specifier.clone())),
                },
            }
        };
        let brightness = specs("itemBrightness")?;
        let tint = specs("itemTint")?;
        let opacity = specs("itemOpacity")?;
        let offsets = item_offsets(pile, &self.offset_policy, self.seed);
        let mut items = Vec::with_capacity(pile.len());
        for (i, (id, offset)) in pile.item_ids.iter().zip(offsets).enumerate() {
            let item = &self.items[id];
            let eval = |src: &Option<ItemSource<'_>>| src.as_ref().map(|s| s.eval(self, item, i, pile));
            let brightness = match eval(&brightness) {
                Some(v) => self.checked_number("itemBrightness", pile.id, &v)?,
                None => 0.0,
            };
            let opacity = match eval(&opacity) {
                Some(v) => self.checked_number("itemOpacity", pile.id, &v)?,
                None => 1.0,
            };
            let tint = eval(&tint).map(|v| v.to_string());
            items.push(ItemStyle { brightness, tint, opacity, offset });
        }
        Ok(ResolvedStyle { scale, border_size, border_color, label, badge, items })
    }

    fn checked_number(&self, name: &str, pile: PileId, v: &Scalar) -> Result<f64> {
        let x = v.as_f64().ok_or_else(|| Error::TypeMismatch { property: name.to_string(), expected: "number" })?;
        if !x.is_finite() {
            return Err(Error::NonFiniteStyle { property: name.to_string(), pile });
        }
        let def = lookup(name)?;
        if check_value(def, v).is_err() {
            return Err(Error::StyleOutOfRange { property: name.to_string(), pile, value: x });
        }
        Ok(x)
    }
}

enum ItemSource<'a> {
    Static(Scalar),
    Fn(&'a ItemFn),
}

impl ItemSource<'_> {
    fn eval(&self, state: &PilingState, item: &Item, index: usize, pile: &Pile) -> Scalar {
        match self {
            ItemSource::Static(v) => v.clone(),
            ItemSource::Fn(f) => f(state, item, index, pile),
        }
    }
}

fn default_of(name: &str) -> ViewProperty {
    match name {
        "pileScale" | "pileBorderSize" | "itemOpacity" => ViewProperty::Static(Scalar::Number(1.0)),
        "itemBrightness" => ViewProperty::Static(Scalar::Number(0.0)),
        "pileBorderColor" => ViewProperty::Static(Scalar::Text(DEFAULT_BORDER_COLOR.to_string())),
        _ => ViewProperty::Static(Scalar::Text(String::new())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::ArrangeBySpec;
    use crate::model::Canvas;
    use core::sync::atomic::{AtomicUsize, Ordering};

    fn state(n: usize) -> PilingState {
        PilingState::new((0..n).map(|_| Item::default()).collect(), Canvas::default(), 1).unwrap()
    }

    fn pile_of(n: usize) -> PilingState {
        let mut s = state(n);
        let ids: Vec<PileId> = (1..n as u64).map(PileId).collect();
        if !ids.is_empty() {
            s.merge_piles(PileId(0), &ids).unwrap();
        }
        s
    }

    #[test]
    fn unknown_property_suggests() {
        let mut s = state(1);
        let e = s.set_property("pileScal", 2.0.into(), &SpecifierTable::new()).unwrap_err();
        assert_eq!(e, Error::UnknownProperty { name: "pileScal".into(), suggestion: "pileScale".into() });
    }

    #[test]
    fn range_checks() {
        let mut s = state(1);
        let t = SpecifierTable::new();
        assert!(matches!(s.set_property("itemBrightness", 2.0.into(), &t), Err(Error::RangeError { .. })));
        assert!(matches!(s.set_property("pileScale", 0.0.into(), &t), Err(Error::RangeError { .. })));
        assert!(matches!(s.set_property("columns", 2.5.into(), &t), Err(Error::RangeError { .. })));
        assert!(matches!(s.set_property("pileLabel", ViewProperty::specifier("nope"), &t), Err(Error::UnknownSpecifier(_))));
        assert_eq!(s.epoch, 0);
    }

    #[test]
    fn columns_drive_the_grid() {
        let mut s = state(13);
        s.arrange_by(ArrangeBySpec::Index { key: None }).unwrap();
        s.set_property("columns", 5.0.into(), &SpecifierTable::new()).unwrap();
        assert_eq!(s.canvas.columns, 5);
        assert_eq!(s.piles[&PileId(12)].position(), s.canvas.cell_center(2, 2));
    }

    #[test]
    fn global_properties_reject_specifiers() {
        let mut s = state(1);
        let t = SpecifierTable::with_builtins();
        assert_eq!(s.set_property("columns", ViewProperty::specifier("scaleByCount"), &t), Err(Error::StaticOnly("columns".into())));
    }

    #[test]
    fn defaults() {
        let s = pile_of(2);
        let styles = s.resolve_styles(&SpecifierTable::new()).unwrap();
        let st = &styles[&PileId(0)];
        assert_eq!((st.scale, st.border_size, st.border_color.as_str()), (1.0, 1.0, DEFAULT_BORDER_COLOR));
        assert!(st.items.iter().all(|i| i.brightness == 0.0 && i.opacity == 1.0));
        assert_eq!(st.items[1].offset, ItemOffset::default());
    }

    #[test]
    fn builtin_specifiers() {
        let mut s = pile_of(4);
        let t = SpecifierTable::with_builtins();
        s.set_property("itemBrightness", ViewProperty::specifier("brightnessByIndex"), &t).unwrap();
        s.set_property("pileScale", ViewProperty::specifier("scaleByCount"), &t).unwrap();
        let st = &s.resolve_styles(&t).unwrap()[&PileId(0)];
        let b: Vec<f64> = st.items.iter().map(|i| i.brightness).collect();
        assert_eq!(b, [0.0, -0.25, -0.5, -0.75]);
        assert_eq!(st.scale, 1.2);
    }

    #[test]
    fn call_counts() {
        let mut s = state(7);
        s.merge_piles(PileId(0), &[PileId(1), PileId(2)]).unwrap();
        let pile_calls = Arc::new(AtomicUsize::new(0));
        let item_calls = Arc::new(AtomicUsize::new(0));
        let mut t = SpecifierTable::new();
        let pc = pile_calls.clone();
        t.register_pile("p", move |_, _| {
            pc.fetch_add(1, Ordering::Relaxed);
            Scalar::Number(1.0)
        });
        let ic = item_calls.clone();
        t.register_item("i", move |_, _, _, _| {
            ic.fetch_add(1, Ordering::Relaxed);
            Scalar::Number(0.5)
        });
        s.set_property("pileScale", ViewProperty::specifier("p"), &t).unwrap();
        s.set_property("itemOpacity", ViewProperty::specifier("i"), &t).unwrap();
        s.resolve_styles(&t).unwrap();
        assert_eq!(pile_calls.load(Ordering::Relaxed), 5);
        assert_eq!(item_calls.load(Ordering::Relaxed), 7);
    }

    #[test]
    fn bad_specifier_output_names_pile() {
        let mut s = state(2);
        let mut t = SpecifierTable::new();
        t.register_pile("nan", |_, _| Scalar::Number(f64::NAN));
        s.set_property("pileScale", ViewProperty::specifier("nan"), &t).unwrap();
        assert_eq!(
            s.resolve_styles(&t).unwrap_err(),
            Error::NonFiniteStyle { property: "pileScale".into(), pile: PileId(0) }
        );
    }

    #[test]
    fn levenshtein_basics() {
        assert_eq!(levenshtein("kitten", "sitting"), 3);
        assert_eq!(levenshtein("", "abc"), 3);
        assert_eq!(levenshtein("same", "same"), 0);
    }
}
