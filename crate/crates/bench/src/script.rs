//! Replay scripts.
//!
//! One command per line: `<timestampMs> <verb> <args...>`. `#` starts a
//! comment. Lines starting with `%` are directives that configure the run:
//!
//! ```text
//! %dataset points:1000
//! %seed 42
//! %repeat 10
//! %canvas 1000 800 10 [aspect]
//! 0    groupBy category cluster
//! 250  arrangeBy data x y
//! 300  merge item:3 item:4
//! ```
//!
//! Piles are referenced by numeric id or as `item:ID`, the pile currently
//! holding that item.

use std::fmt;

use pilecore::aggregation::aggregate_matrices;
use pilecore::{
    AggregateKind, ArrangeBySpec, Canvas, CoordSource, Engine, FeatureSource, GestureEvent, GestureKind,
    GroupBySpec, ItemId, PileId, PilingState, Scalar, SplitBySpec, StateDelta, Vec2, ViewProperty, Zoom,
};

use crate::dataset::DatasetSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PileRef {
    Id(PileId),
    Item(ItemId),
}

impl fmt::Display for PileRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PileRef::Id(id) => write!(f, "{}", id.0),
            PileRef::Item(item) => write!(f, "item:{item}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    ArrangeBy(ArrangeBySpec),
    GroupBy(GroupBySpec),
    SplitBy(SplitBySpec),
    Merge { target: PileRef, sources: Vec<PileRef> },
    Lasso(Vec<Vec2>),
    Move { pile: PileRef, to: Vec2 },
    /// Without a position the event lands on the target pile's position.
    Gesture { kind: GestureKind, at: Option<Vec2>, target: Option<PileRef> },
    Zoom { factor: f64, about: Vec2 },
    Disperse(PileRef),
    Undisperse,
    Browse(PileRef),
    Leave,
    Hover { pile: PileRef, item: ItemId },
    Unhover,
    Set { name: String, value: ViewProperty },
    Representatives { pile: PileRef, k: usize },
    Aggregate { pile: PileRef, kind: AggregateKind },
    Resolve,
}

impl Command {
    /// Latency class the command is reported under.
    pub fn class(&self) -> &'static str {
        match self {
            Command::ArrangeBy(_) => "arrangeBy",
            Command::GroupBy(_) => "groupBy",
            Command::SplitBy(_) => "splitBy",
            Command::Merge { .. } => "merge",
            Command::Lasso(_) => "lasso",
            Command::Move { .. } => "move",
            Command::Gesture { .. } => "gesture",
            Command::Zoom { .. } => "zoom",
            Command::Disperse(_) | Command::Undisperse => "disperse",
            Command::Browse(_) | Command::Leave => "browse",
            Command::Hover { .. } | Command::Unhover => "hover",
            Command::Set { .. } => "set",
            Command::Representatives { .. } => "representatives",
            Command::Aggregate { .. } => "aggregate",
            Command::Resolve => "resolve",
        }
    }

    /// Whether the command runs k-means.
    pub fn clusters(&self) -> bool {
        matches!(self, Command::GroupBy(GroupBySpec::Cluster { .. }) | Command::SplitBy(SplitBySpec::Cluster { .. }))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub number: usize,
    pub time_ms: u64,
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Script {
    pub dataset: Option<DatasetSpec>,
    pub seed: Option<u64>,
    pub repeat: Option<u32>,
    pub canvas: Option<Canvas>,
    pub lines: Vec<Line>,
}

struct Tokens<'a> {
    line: usize,
    rest: std::iter::Peekable<std::str::SplitWhitespace<'a>>,
}

impl<'a> Tokens<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: self.line, message: message.into() })
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        match self.rest.next() {
            Some(t) => Ok(t),
            None => self.err(format!("missing {what}")),
        }
    }

    fn peek(&mut self) -> Option<&'a str> {
        self.rest.peek().copied()
    }

    fn number<T: std::str::FromStr>(&mut self, what: &str) -> Result<T, ParseError> {
        let t = self.next(what)?;
        match t.parse() {
            Ok(v) => Ok(v),
            Err(_) => self.err(format!("{what}: cannot parse {t:?}")),
        }
    }

    fn finite(&mut self, what: &str) -> Result<f64, ParseError> {
        let v: f64 = self.number(what)?;
        if v.is_finite() {
            Ok(v)
        } else {
            self.err(format!("{what} must be finite"))
        }
    }

    fn point(&mut self) -> Result<Vec2, ParseError> {
        Ok(Vec2::new(self.finite("x")?, self.finite("y")?))
    }

    fn optional_number<T: std::str::FromStr>(&mut self) -> Option<T> {
        let v = self.peek()?.parse().ok()?;
        self.rest.next();
        Some(v)
    }

    fn pile(&mut self) -> Result<PileRef, ParseError> {
        let t = self.next("pile reference")?;
        parse_pile(t).map_or_else(|| self.err(format!("bad pile reference {t:?}")), Ok)
    }

    fn done(&mut self) -> Result<(), ParseError> {
        match self.rest.next() {
            None => Ok(()),
            Some(t) => self.err(format!("unexpected argument {t:?}")),
        }
    }

    fn feature_source(&mut self) -> FeatureSource {
        match self.peek().and_then(|t| t.strip_prefix("meta=")) {
            Some(keys) => {
                self.rest.next();
                FeatureSource::Metadata { keys: keys.split(',').map(str::to_string).collect() }
            }
            None => FeatureSource::Features,
        }
    }

    fn coord_source(&mut self) -> Result<CoordSource, ParseError> {
        let first = self.next("coordinate source")?;
        if first == "anchor" {
            return Ok(CoordSource::Anchor);
        }
        Ok(CoordSource::Metadata { x: first.to_string(), y: self.next("y key")?.to_string() })
    }
}

fn parse_pile(t: &str) -> Option<PileRef> {
    match t.strip_prefix("item:") {
        Some(id) if !id.is_empty() => Some(PileRef::Item(ItemId::new(id))),
        Some(_) => None,
        None => t.parse().ok().map(|n| PileRef::Id(PileId(n))),
    }
}

fn parse_value(t: &str) -> ViewProperty {
    if let Some(name) = t.strip_prefix('@') {
        return ViewProperty::specifier(name);
    }
    match t {
        "true" => true.into(),
        "false" => false.into(),
        _ => match t.parse::<f64>() {
            Ok(v) => v.into(),
            Err(_) => ViewProperty::Static(Scalar::Text(t.to_string())),
        },
    }
}

fn parse_command(verb: &str, t: &mut Tokens<'_>) -> Result<Command, ParseError> {
    let cmd = match verb {
        "arrangeBy" => Command::ArrangeBy(match t.next("arrangement type")? {
            "index" => ArrangeBySpec::Index { key: t.rest.next().map(str::to_string) },
            "ij" => ArrangeBySpec::Ij { source: t.coord_source()? },
            "xy" => ArrangeBySpec::Xy { source: t.coord_source()? },
            "uv" => ArrangeBySpec::Uv { source: t.coord_source()? },
            "data" => {
                let keys: Vec<String> = t.rest.by_ref().map(str::to_string).collect();
                if keys.is_empty() {
                    return t.err("data arrangement needs at least one key");
                }
                ArrangeBySpec::Data { keys }
            }
            other => return t.err(format!("unknown arrangement {other:?}")),
        }),
        "groupBy" => Command::GroupBy(match t.next("grouping type")? {
            "overlap" => GroupBySpec::Overlap { reactive: t.peek() == Some("reactive") && t.rest.next().is_some() },
            "distance" => {
                let threshold = t.finite("threshold")?;
                GroupBySpec::Distance { threshold, reactive: t.peek() == Some("reactive") && t.rest.next().is_some() }
            }
            "grid" => GroupBySpec::Grid { columns: t.optional_number() },
            "column" => GroupBySpec::Column { columns: t.optional_number() },
            "row" => GroupBySpec::Row { columns: t.optional_number() },
            "category" => GroupBySpec::Category { key: t.next("category key")?.to_string() },
            "cluster" => {
                let k = t.optional_number();
                GroupBySpec::Cluster { source: t.feature_source(), k }
            }
            other => return t.err(format!("unknown grouping {other:?}")),
        }),
        "splitBy" => Command::SplitBy(match t.next("split type")? {
            "overlap" => SplitBySpec::Overlap,
            "distance" => SplitBySpec::Distance { threshold: t.finite("threshold")? },
            "category" => SplitBySpec::Category { key: t.next("category key")?.to_string() },
            "cluster" => {
                let k = t.optional_number();
                SplitBySpec::Cluster { source: t.feature_source(), k }
            }
            other => return t.err(format!("unknown split {other:?}")),
        }),
        "merge" => {
            let target = t.pile()?;
            let mut sources = vec![t.pile()?];
            while t.peek().is_some() {
                sources.push(t.pile()?);
            }
            Command::Merge { target, sources }
        }
        "lasso" => {
            let mut points = Vec::new();
            while let Some(tok) = t.rest.next() {
                let parsed = tok.split_once(',').and_then(|(x, y)| Some(Vec2::new(x.parse().ok()?, y.parse().ok()?)));
                match parsed {
                    Some(p) if p.is_finite() => points.push(p),
                    _ => return t.err(format!("bad lasso point {tok:?}, expected X,Y")),
                }
            }
            Command::Lasso(points)
        }
        "moveTo" => Command::Move { pile: t.pile()?, to: t.point()? },
        "down" | "move" | "up" | "dblclick" => {
            let kind = match verb {
                "down" => GestureKind::PointerDown,
                "move" => GestureKind::PointerMove,
                "up" => GestureKind::PointerUp,
                _ => GestureKind::DoubleClick,
            };
            let (at, target) = if t.rest.clone().count() == 1 {
                (None, Some(t.pile()?))
            } else {
                let at = t.point()?;
                (Some(at), if t.peek().is_some() { Some(t.pile()?) } else { None })
            };
            Command::Gesture { kind, at, target }
        }
        "wheel" => {
            let factor = t.finite("factor")?;
            Command::Gesture { kind: GestureKind::WheelZoom { factor }, at: Some(t.point()?), target: None }
        }
        "ctx" => match t.next("context action")? {
            "browseSeparately" => Command::Browse(t.pile()?),
            "leave" => Command::Leave,
            other => return t.err(format!("unknown context action {other:?}")),
        },
        "zoom" => {
            let factor = t.finite("factor")?;
            let about = if t.peek().is_some() { t.point()? } else { Vec2::default() };
            Command::Zoom { factor, about }
        }
        "disperse" => Command::Disperse(t.pile()?),
        "undisperse" => Command::Undisperse,
        "browse" => Command::Browse(t.pile()?),
        "leave" => Command::Leave,
        "hover" => Command::Hover { pile: t.pile()?, item: ItemId::new(t.next("item id")?) },
        "unhover" => Command::Unhover,
        "set" => {
            let name = t.next("property name")?.to_string();
            Command::Set { name, value: parse_value(t.next("value")?) }
        }
        "representatives" => Command::Representatives { pile: t.pile()?, k: t.number("k")? },
        "aggregate" => {
            let pile = t.pile()?;
            let kind = match t.next("statistic")? {
                "mean" => AggregateKind::Mean,
                "variance" => AggregateKind::Variance,
                "std" => AggregateKind::Std,
                other => return t.err(format!("unknown statistic {other:?}")),
            };
            Command::Aggregate { pile, kind }
        }
        "resolve" => Command::Resolve,
        other => return t.err(format!("unknown command {other:?}")),
    };
    t.done()?;
    Ok(cmd)
}

fn parse_directive(name: &str, t: &mut Tokens<'_>, script: &mut Script) -> Result<(), ParseError> {
    match name {
        "dataset" => {
            let spec = t.next("dataset")?;
            script.dataset = Some(spec.parse().map_err(|message| ParseError { line: t.line, message })?);
        }
        "seed" => script.seed = Some(t.number("seed")?),
        "repeat" => script.repeat = Some(t.number("repeat count")?),
        "canvas" => {
            let width = t.finite("width")?;
            let height = t.finite("height")?;
            let columns = t.number("columns")?;
            let cell_aspect = t.optional_number().unwrap_or(1.0);
            let canvas = Canvas { width, height, columns, cell_aspect, ..Canvas::default() };
            if let Err(e) = canvas.validate() {
                return t.err(e.to_string());
            }
            script.canvas = Some(canvas);
        }
        other => return t.err(format!("unknown directive %{other}")),
    }
    t.done()
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, ParseError> {
        let mut script = Script::default();
        let mut last_ts = 0;
        for (i, raw) in text.lines().enumerate() {
            let content = raw.split('#').next().unwrap();
            let mut t = Tokens { line: i + 1, rest: content.split_whitespace().peekable() };
            let Some(first) = t.rest.next() else { continue };
            if let Some(name) = first.strip_prefix('%') {
                parse_directive(name, &mut t, &mut script)?;
                continue;
            }
            let time_ms: u64 = match first.parse() {
                Ok(v) => v,
                Err(_) => return t.err(format!("expected a timestamp, got {first:?}")),
            };
            if time_ms < last_ts {
                return t.err("timestamps must not decrease");
            }
            last_ts = time_ms;
            let verb = t.next("command")?;
            let command = parse_command(verb, &mut t)?;
            script.lines.push(Line { number: i + 1, time_ms, command });
        }
        Ok(script)
    }
}

/// What a command produced: the delta for mutations, data for queries.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Delta(StateDelta),
    Items(Vec<ItemId>),
    Matrix(pilecore::MatrixDatum),
    Styles(usize),
}

impl Output {
    pub fn delta(&self) -> Option<&StateDelta> {
        match self {
            Output::Delta(d) => Some(d),
            _ => None,
        }
    }
}

pub fn resolve_pile(state: &PilingState, r: &PileRef) -> pilecore::Result<PileId> {
    match r {
        PileRef::Id(id) => state.pile(*id).map(|p| p.id),
        PileRef::Item(item) => state
            .piles
            .values()
            .find(|p| p.contains(item))
            .map(|p| p.id)
            .ok_or_else(|| pilecore::Error::InvalidSpec(format!("no visible pile holds item {item}"))),
    }
}

/// Applies a mutating command to a state in place. Used directly when the
/// work runs away from the engine, as off-thread clustering does.
pub fn mutate(state: &mut PilingState, command: &Command) -> pilecore::Result<()> {
    match command {
        Command::GroupBy(spec) => state.group_by(spec),
        Command::SplitBy(spec) => state.split_by(spec),
        Command::ArrangeBy(spec) => state.arrange_by(spec.clone()),
        _ => Err(pilecore::Error::InvalidSpec(format!("{} cannot run detached", command.class()))),
    }
}

/// Runs one command against the engine. `matrix_shape` is the shape used to
/// read feature vectors as matrices for `aggregate`.
pub fn execute(
    engine: &mut Engine,
    command: &Command,
    time_ms: u64,
    matrix_shape: (usize, usize),
) -> pilecore::Result<Output> {
    let pile = |engine: &Engine, r: &PileRef| resolve_pile(engine.state(), r);
    let delta = match command {
        Command::ArrangeBy(_) | Command::GroupBy(_) | Command::SplitBy(_) => engine.apply(|s| mutate(s, command))?,
        Command::Merge { target, sources } => {
            let target = pile(engine, target)?;
            let sources = sources.iter().map(|r| pile(engine, r)).collect::<pilecore::Result<Vec<_>>>()?;
            engine.apply(|s| s.merge_piles(target, &sources))?
        }
        Command::Lasso(points) => engine.apply(|s| s.lasso_group(points))?,
        Command::Move { pile: r, to } => {
            let id = pile(engine, r)?;
            engine.apply(|s| s.move_pile(id, *to))?
        }
        Command::Gesture { kind, at, target } => {
            let target = target.as_ref().map(|r| pile(engine, r)).transpose()?;
            let position = match (at, target) {
                (Some(p), _) => *p,
                (None, Some(id)) => engine.state().piles[&id].position(),
                (None, None) => Vec2::default(),
            };
            let mut event = GestureEvent::new(*kind, position, time_ms);
            if let Some(id) = target {
                event = event.on(id);
            }
            let (delta, outcome) = engine.gesture(&event);
            if let Some(e) = outcome.rejected {
                return Err(e);
            }
            delta
        }
        Command::Zoom { factor, about } => {
            let z = engine.state().zoom;
            let zoom = Zoom { scale: z.scale * factor, translate: *about - (*about - z.translate) * *factor };
            engine.apply(|s| s.zoom_update(zoom))?
        }
        Command::Disperse(r) => {
            let id = pile(engine, r)?;
            engine.apply(|s| s.temporary_disperse(id))?
        }
        Command::Undisperse => engine.apply(|s| {
            s.end_temporary_disperse();
            Ok(())
        })?,
        Command::Browse(r) => {
            let id = pile(engine, r)?;
            engine.apply(|s| s.browse_separately(id))?
        }
        Command::Leave => engine.apply(|s| s.leave_layer())?,
        Command::Hover { pile: r, item } => {
            let id = pile(engine, r)?;
            engine.apply(|s| s.hover_preview(id, item))?
        }
        Command::Unhover => engine.apply(|s| {
            s.end_hover();
            Ok(())
        })?,
        Command::Set { name, value } => engine.set_property(name, value.clone())?,
        Command::Representatives { pile: r, k } => {
            let id = pile(engine, r)?;
            let state = engine.state();
            let reps = state.representative_items(&state.piles[&id], &FeatureSource::Features, *k, state.seed)?;
            return Ok(Output::Items(reps));
        }
        Command::Aggregate { pile: r, kind } => {
            let id = pile(engine, r)?;
            let state = engine.state();
            let (rows, cols) = matrix_shape;
            let matrices = state.pile_matrices(&state.piles[&id], rows, cols)?;
            return aggregate_matrices(&matrices, *kind).map(Output::Matrix);
        }
        Command::Resolve => return engine.resolve_styles().map(|styles| Output::Styles(styles.len())),
    };
    Ok(Output::Delta(delta))
}
