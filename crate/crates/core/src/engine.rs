//! Session wrapper pairing a state with its specifier table, a style cache
//! and delta production.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;

use crate::delta::StateDelta;
use crate::error::{Error, Result};
use crate::interaction::{GestureEvent, GestureOutcome};
use crate::model::PileId;
use crate::state::PilingState;
use crate::view::{ResolvedStyle, SpecifierTable, ViewProperty};

pub type StyleMap = BTreeMap<PileId, ResolvedStyle>;

#[derive(Debug, Clone)]
pub struct Engine {
    state: PilingState,
    specifiers: SpecifierTable,
    styles: Option<(u64, Arc<StyleMap>)>,
}

impl Engine {
    pub fn new(state: PilingState) -> Self {
        Self::with_specifiers(state, SpecifierTable::with_builtins())
    }

    pub fn with_specifiers(state: PilingState, specifiers: SpecifierTable) -> Self {
        Engine { state, specifiers, styles: None }
    }

    pub fn state(&self) -> &PilingState {
        &self.state
    }

    pub fn epoch(&self) -> u64 {
        self.state.epoch
    }

    pub fn specifiers(&self) -> &SpecifierTable {
        &self.specifiers
    }

    /// Replaces the specifier table. Cached styles are dropped.
    pub fn set_specifiers(&mut self, specifiers: SpecifierTable) {
        self.specifiers = specifiers;
        self.styles = None;
    }

    pub fn into_state(self) -> PilingState {
        self.state
    }

    /// Runs an operation as one transaction and reports what changed.
    pub fn apply<F>(&mut self, op: F) -> Result<StateDelta>
    where
        F: FnOnce(&mut PilingState) -> Result<()>,
    {
        let before = self.state.clone();
        op(&mut self.state)?;
        Ok(StateDelta::between(&before, &self.state))
    }

    pub fn set_property(&mut self, name: &str, value: ViewProperty) -> Result<StateDelta> {
        let table = &self.specifiers;
        let before = self.state.clone();
        self.state.set_property(name, value, table)?;
        Ok(StateDelta::between(&before, &self.state))
    }

    pub fn gesture(&mut self, event: &GestureEvent) -> (StateDelta, GestureOutcome) {
        let before = self.state.clone();
        let outcome = self.state.apply_gesture(event);
        (StateDelta::between(&before, &self.state), outcome)
    }

    /// Installs a state computed elsewhere from the snapshot at `read_epoch`,
    /// unless the engine has moved on since.
    pub fn commit_if_current(&mut self, read_epoch: u64, new_state: PilingState) -> Result<StateDelta> {
        if read_epoch != self.state.epoch {
            return Err(Error::StaleEpoch { read: read_epoch, current: self.state.epoch });
        }
        let delta = StateDelta::between(&self.state, &new_state);
        self.state = new_state;
        if self.state.epoch == read_epoch {
            self.state.epoch += 1;
        }
        Ok(StateDelta { epoch: self.state.epoch, ..delta })
    }

    /// Styles for the current epoch, computed at most once per epoch.
    pub fn resolve_styles(&mut self) -> Result<Arc<StyleMap>> {
        if let Some((epoch, styles)) = &self.styles {
            if *epoch == self.state.epoch {
                return Ok(styles.clone());
            }
        }
        let styles = Arc::new(self.state.resolve_styles(&self.specifiers)?);
        self.styles = Some((self.state.epoch, styles.clone()));
        Ok(styles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Canvas, Item};
    use crate::GroupBySpec;

    fn engine() -> Engine {
        let items = (0..6).map(|i| Item::default().with_meta("c", if i % 2 == 0 { "a" } else { "b" })).collect();
        Engine::new(PilingState::new(items, Canvas::default(), 9).unwrap())
    }

    #[test]
    fn stale_results_are_refused() {
        let mut e = engine();
        let read = e.epoch();
        let mut work = e.state().clone();
        work.group_by(&GroupBySpec::Category { key: "c".into() }).unwrap();
        e.apply(|s| s.move_pile(PileId(0), crate::Vec2::new(1.0, 1.0))).unwrap();
        assert_eq!(e.commit_if_current(read, work.clone()), Err(Error::StaleEpoch { read, current: read + 1 }));
        let read = e.epoch();
        let mut work = e.state().clone();
        work.group_by(&GroupBySpec::Category { key: "c".into() }).unwrap();
        let d = e.commit_if_current(read, work).unwrap();
        assert_eq!(d.epoch, read + 1);
        assert_eq!(e.state().piles.len(), 2);
    }

    #[test]
    fn style_cache_follows_epoch() {
        let mut e = engine();
        let a = e.resolve_styles().unwrap();
        let b = e.resolve_styles().unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        e.apply(|s| s.merge_piles(PileId(0), &[PileId(1)])).unwrap();
        let c = e.resolve_styles().unwrap();
        assert_eq!(c.len(), 5);
        e.set_property("pileScale", ViewProperty::specifier("scaleByCount")).unwrap();
        assert_eq!(e.resolve_styles().unwrap()[&PileId(0)].scale, 1.1);
    }
}
