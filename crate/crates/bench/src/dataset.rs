//! Deterministic synthetic datasets.
//!
//! `matrix:N` yields N 16x16 matrices in four pattern families; `points:N`
//! yields N 8-dimensional points drawn around five cluster centres. Both
//! carry metadata for category, numeric and coordinate based commands, and
//! an anchor position on the default canvas.

use std::fmt;
use std::str::FromStr;

use pilecore::{Canvas, Item, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const MATRIX_SIDE: usize = 16;
pub const POINT_DIM: usize = 8;
const POINT_CLUSTERS: usize = 5;
const PATTERNS: [&str; 4] = ["block", "stripe", "diagonal", "noise"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Matrix,
    Points,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    pub size: usize,
}

impl fmt::Display for DatasetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DatasetKind::Matrix => "matrix",
            DatasetKind::Points => "points",
        };
        write!(f, "{kind}:{}", self.size)
    }
}

impl FromStr for DatasetSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (kind, size) = s.split_once(':').ok_or_else(|| format!("expected KIND:N, got {s:?}"))?;
        let kind = match kind {
            "matrix" => DatasetKind::Matrix,
            "points" => DatasetKind::Points,
            other => return Err(format!("unknown dataset kind {other:?}")),
        };
        let size = size.parse().map_err(|_| format!("bad dataset size {size:?}"))?;
        Ok(DatasetSpec { kind, size })
    }
}

impl DatasetSpec {
    pub fn items(&self, seed: u64) -> Vec<Item> {
        match self.kind {
            DatasetKind::Matrix => matrices(self.size, seed),
            DatasetKind::Points => points(self.size, seed),
        }
    }

    /// Matrix shape of each item's feature vector.
    pub fn matrix_shape(&self) -> (usize, usize) {
        match self.kind {
            DatasetKind::Matrix => (MATRIX_SIDE, MATRIX_SIDE),
            DatasetKind::Points => (1, POINT_DIM),
        }
    }
}

fn anchor(rng: &mut ChaCha8Rng, canvas: &Canvas) -> Vec2 {
    Vec2::new(rng.random::<f64>() * canvas.width, rng.random::<f64>() * canvas.height)
}

pub fn matrices(n: usize, seed: u64) -> Vec<Item> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let canvas = Canvas::default();
    (0..n)
        .map(|i| {
            let family = rng.random_range(0..PATTERNS.len());
            let offset = rng.random_range(0..MATRIX_SIDE);
            let width = rng.random_range(2..6);
            let mut values = Vec::with_capacity(MATRIX_SIDE * MATRIX_SIDE);
            for r in 0..MATRIX_SIDE {
                for c in 0..MATRIX_SIDE {
                    let on = match family {
                        0 => r.abs_diff(offset) < width && c.abs_diff(offset) < width,
                        1 => (c + offset) % (2 * width) < width,
                        2 => r.abs_diff(c) < width,
                        _ => rng.random::<f64>() < 0.3,
                    };
                    values.push(f64::from(u8::from(on)) + noise.sample(&mut rng));
                }
            }
            let density = values.iter().sum::<f64>() / values.len() as f64;
            Item::new(i.to_string())
                .with_src(format!("matrix:{i}"))
                .with_features(values)
                .with_meta("pattern", PATTERNS[family])
                .with_meta("density", density)
                .with_meta("width", width as f64)
                .with_meta("u", rng.random::<f64>())
                .with_meta("v", rng.random::<f64>())
                .with_anchor(anchor(&mut rng, &canvas))
        })
        .collect()
}

pub fn points(n: usize, seed: u64) -> Vec<Item> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).unwrap();
    let canvas = Canvas::default();
    let centres: Vec<Vec<f64>> =
        (0..POINT_CLUSTERS).map(|_| (0..POINT_DIM).map(|_| rng.random_range(-6.0..6.0)).collect()).collect();
    (0..n)
        .map(|i| {
            let c = rng.random_range(0..POINT_CLUSTERS);
            let features: Vec<f64> = centres[c].iter().map(|m| m + unit.sample(&mut rng)).collect();
            let home = Vec2::new(
                ((features[0] + 10.0) / 20.0).clamp(0.0, 1.0) * canvas.width,
                ((features[1] + 10.0) / 20.0).clamp(0.0, 1.0) * canvas.height,
            );
            Item::new(i.to_string())
                .with_src(format!("point:{i}"))
                .with_meta("cluster", format!("c{c}").as_str())
                .with_meta("x", features[0])
                .with_meta("y", features[1])
                .with_meta("z", features[2])
                .with_meta("u", rng.random::<f64>())
                .with_meta("v", rng.random::<f64>())
                .with_meta("year", rng.random_range(1990..2021) as f64)
                .with_features(features)
                .with_anchor(home)
        })
        .collect()
}
