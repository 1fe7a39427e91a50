//! Timed replay of scripts.
//!
//! Latency is measured around the engine call only, with no rendering, so the
//! frame rate reported for animated commands is an upper bound set by the
//! engine and is not comparable to frame rates measured in a browser.

use std::collections::BTreeMap;
use std::path::Path;
use std::thread;
use std::time::Instant;

use pilecore::{Engine, PilingState};
use serde::Serialize;

use crate::dataset::DatasetSpec;
use crate::script::{execute, mutate, Command, Script};
use crate::state_file::{format_hash, state_hash};

/// Frame interval used when sampling animation plans.
pub const FRAME_MS: f64 = 1000.0 / 60.0;

pub const CAVEAT: &str = "latencies cover engine transactions only; effective fps is the rate at which the engine \
                          can sample animation frames and excludes rendering";

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub dataset: DatasetSpec,
    pub seed: u64,
    pub repeat: u32,
    /// Run clustering groupBy/splitBy on a worker thread and commit the
    /// result through the engine's epoch check.
    pub off_thread_clustering: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("repeat must be at least 1")]
    NoRepeats,
    #[error("initialization failed: {0}")]
    Init(pilecore::Error),
    #[error("command {index} (line {line}, {class}) failed: {source}")]
    Command { index: usize, line: usize, class: &'static str, source: pilecore::Error },
    #[error("repeats ended in different states: {0:?}")]
    Nondeterministic(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub count: usize,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl Stats {
    /// Population statistics of `samples`, all zero when empty.
    pub fn of(samples: &[f64]) -> Stats {
        let count = samples.len();
        if count == 0 {
            return Stats { count, mean_ms: 0.0, std_ms: 0.0, min_ms: 0.0, max_ms: 0.0 };
        }
        let mean = samples.iter().sum::<f64>() / count as f64;
        let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / count as f64;
        Stats {
            count,
            mean_ms: mean,
            std_ms: var.sqrt(),
            min_ms: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_ms: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub dataset: String,
    pub items: usize,
    pub seed: u64,
    pub repeats: u32,
    pub commands: usize,
    pub off_thread_clustering: bool,
    /// Engine setup time, one sample per repeat.
    pub init: Stats,
    /// Per command class, one sample per repeat: the mean latency of that
    /// class's commands in the run.
    pub classes: BTreeMap<String, Stats>,
    pub animated_commands: usize,
    pub effective_fps: Option<f64>,
    pub state_hash: String,
    pub hashes_identical: bool,
    pub caveat: &'static str,
}

struct RunSamples {
    init_ms: f64,
    per_class: BTreeMap<&'static str, Vec<f64>>,
    frames: usize,
    frame_seconds: f64,
    animated: usize,
}

fn run_once(
    script: &Script,
    opts: &RunOptions,
    items: Vec<pilecore::Item>,
) -> Result<(RunSamples, PilingState), RunError> {
    let canvas = script.canvas.unwrap_or_default();
    let start = Instant::now();
    let mut engine = Engine::new(PilingState::new(items, canvas, opts.seed).map_err(RunError::Init)?);
    engine.resolve_styles().map_err(RunError::Init)?;
    let init_ms = start.elapsed().as_secs_f64() * 1e3;

    let shape = opts.dataset.matrix_shape();
    let mut samples = RunSamples { init_ms, per_class: BTreeMap::new(), frames: 0, frame_seconds: 0.0, animated: 0 };
    for (index, line) in script.lines.iter().enumerate() {
        let fail = |source| RunError::Command { index, line: line.number, class: line.command.class(), source };
        let start = Instant::now();
        let result = if opts.off_thread_clustering && line.command.clusters() {
            detached(&mut engine, &line.command).map(crate::script::Output::Delta)
        } else {
            execute(&mut engine, &line.command, line.time_ms, shape)
        };
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let output = result.map_err(fail)?;
        samples.per_class.entry(line.command.class()).or_default().push(elapsed);

        if let Some(plan) = output.delta().and_then(|d| d.animation_plan.as_ref()) {
            let frames = (plan.duration_ms as f64 / FRAME_MS).ceil() as usize + 1;
            let start = Instant::now();
            for f in 0..frames {
                std::hint::black_box(plan.sample((f as f64 * FRAME_MS / plan.duration_ms.max(1) as f64).min(1.0)));
            }
            samples.frame_seconds += start.elapsed().as_secs_f64();
            samples.frames += frames;
            samples.animated += 1;
        }
    }
    Ok((samples, engine.into_state()))
}

fn detached(engine: &mut Engine, command: &Command) -> pilecore::Result<pilecore::StateDelta> {
    let read = engine.epoch();
    let mut snapshot = engine.state().clone();
    let command = command.clone();
    let worker = thread::spawn(move || mutate(&mut snapshot, &command).map(|_| snapshot));
    let next = worker.join().expect("clustering worker panicked")?;
    engine.commit_if_current(read, next)
}

/// Replays `script` `opts.repeat` times, each from a fresh state. Returns the
/// report and the final state of the last repeat.
pub fn run(script: &Script, opts: &RunOptions) -> Result<(Report, PilingState), RunError> {
    if opts.repeat == 0 {
        return Err(RunError::NoRepeats);
    }
    let items = opts.dataset.items(opts.seed);
    let mut runs = Vec::new();
    let mut hashes = Vec::new();
    let mut last = None;
    for _ in 0..opts.repeat {
        let (samples, state) = run_once(script, opts, items.clone())?;
        hashes.push(format_hash(state_hash(&state)));
        runs.push(samples);
        last = Some(state);
    }
    let hashes_identical = hashes.iter().all(|h| *h == hashes[0]);
    if !hashes_identical {
        return Err(RunError::Nondeterministic(hashes));
    }

    let init: Vec<f64> = runs.iter().map(|r| r.init_ms).collect();
    let mut classes = BTreeMap::new();
    for class in runs[0].per_class.keys() {
        let means: Vec<f64> =
            runs.iter().map(|r| r.per_class[class].iter().sum::<f64>() / r.per_class[class].len() as f64).collect();
        classes.insert(class.to_string(), Stats::of(&means));
    }
    let frames: usize = runs.iter().map(|r| r.frames).sum();
    let seconds: f64 = runs.iter().map(|r| r.frame_seconds).sum();
    let report = Report {
        dataset: opts.dataset.to_string(),
        items: items.len(),
        seed: opts.seed,
        repeats: opts.repeat,
        commands: script.lines.len(),
        off_thread_clustering: opts.off_thread_clustering,
        init: Stats::of(&init),
        classes,
        animated_commands: runs[0].animated,
        effective_fps: (frames > 0).then(|| frames as f64 / seconds.max(1e-9)),
        state_hash: hashes[0].clone(),
        hashes_identical,
        caveat: CAVEAT,
    };
    Ok((report, last.unwrap()))
}

/// Writes one row per command class plus an `init` row.
pub fn write_csv(report: &Report, path: &Path) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["class", "count", "mean_ms", "std_ms", "min_ms", "max_ms"])?;
    let rows = std::iter::once(("init", report.init)).chain(report.classes.iter().map(|(c, s)| (c.as_str(), *s)));
    for (class, s) in rows {
        w.write_record([
            class.to_string(),
            s.count.to_string(),
            s.mean_ms.to_string(),
            s.std_ms.to_string(),
            s.min_ms.to_string(),
            s.max_ms.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(repeat: u32, off_thread: bool) -> RunOptions {
        RunOptions { dataset: "points:60".parse().unwrap(), seed: 7, repeat, off_thread_clustering: off_thread }
    }

    #[test]
    fn stats() {
        let s = Stats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!((s.count, s.mean_ms, s.min_ms, s.max_ms), (4, 2.5, 1.0, 4.0));
        assert!((s.std_ms - 1.25f64.sqrt()).abs() < 1e-12);
        assert_eq!(Stats::of(&[]).count, 0);
    }

    #[test]
    fn empty_script_reports_init_only() {
        let (report, state) = run(&Script::default(), &opts(3, false)).unwrap();
        assert_eq!(report.init.count, 3);
        assert!(report.classes.is_empty());
        assert_eq!(report.effective_fps, None);
        assert_eq!(state.piles.len(), 60);
        assert!(matches!(run(&Script::default(), &opts(0, false)), Err(RunError::NoRepeats)));
    }

    #[test]
    fn off_thread_matches_inline() {
        let script = Script::parse("0 groupBy cluster 4\n10 arrangeBy index\n20 splitBy cluster 2\n30 resolve\n").unwrap();
        let (a, _) = run(&script, &opts(2, false)).unwrap();
        let (b, _) = run(&script, &opts(2, true)).unwrap();
        assert_eq!(a.state_hash, b.state_hash);
        assert_eq!(a.classes["groupBy"].count, 2);
        assert!(a.animated_commands >= 1 && a.effective_fps.is_some());
    }

    #[test]
    fn failing_command_is_located() {
        let script = Script::parse("0 arrangeBy index\n\n5 merge 1 999\n").unwrap();
        match run(&script, &opts(1, false)) {
            Err(RunError::Command { index: 1, line: 3, class: "merge", .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
