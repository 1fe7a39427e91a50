//! Exact principal component projection to two dimensions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Projects feature rows into the unit square.
///
/// The built-in implementation is [`PcaEmbedder`]; nonlinear methods can be
/// attached by implementing this trait.
pub trait Embedder {
    fn embed(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec2>>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PcaEmbedder;

impl Embedder for PcaEmbedder {
    fn embed(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec2>> {
        embed_2d(rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Unit-length principal axes, strongest first.
    pub components: Vec<Vec<f64>>,
    /// All covariance eigenvalues (population normalisation), descending.
    pub eigenvalues: Vec<f64>,
}

impl Pca {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Pca> {
        if rows.len() < 2 {
            return Err(Error::EmptyInput);
        }
        let dim = rows[0].len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidSpec("embedding rows must share a non-zero width".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dim];
        for r in rows {
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);

        let mut cov = vec![vec![0.0; dim]; dim];
        for r in rows {
            for a in 0..dim {
                let da = r[a] - mean[a];
                for b in a..dim {
                    cov[a][b] += da * (r[b] - mean[b]);
                }
            }
        }
        for a in 0..dim {
            for b in a..dim {
                cov[a][b] /= n;
                cov[b][a] = cov[a][b];
            }
        }

        let (values, vectors) = symmetric_eigen(cov);
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let eigenvalues = order.iter().map(|&i| values[i]).collect();
        let components = order
            .iter()
            .take(2)
            .map(|&i| {
                let mut axis: Vec<f64> = (0..dim).map(|r| vectors[r][i]).collect();
                orient(&mut axis);
                axis
            })
            .collect();
        Ok(Pca { mean, components, eigenvalues })
    }

    /// Coordinates of `row` along the retained axes.
    pub fn project(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|axis| axis.iter().zip(row).zip(&self.mean).map(|((a, x), m)| a * (x - m)).sum())
            .collect()
    }
}

/// Flips `axis` so its largest-magnitude loading is positive.
fn orient(axis: &mut [f64]) {
    let mut pivot = 0;
    for (i, v) in axis.iter().enumerate() {
        if v.abs() > axis[pivot].abs() {
            pivot = i;
        }
    }
    if axis[pivot] < 0.0 {
        axis.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Cyclic Jacobi rotations. Returns eigenvalues and the eigenvector matrix
/// (eigenvectors in columns).
fn symmetric_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale: f64 = a.iter().flatten().map(|x| x * x).sum();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|p| (0..n).filter(move |&q| q != p).map(move |q| (p, q))).map(|(p, q)| a[p][q] * a[p][q]).sum();
        if off <= 1e-30 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// PCA to two dimensions, then per-axis min-max normalisation into `[0, 1]^2`.
///
/// Axes without spread (rank-deficient input) map to 0.5.
pub fn embed_2d(rows: &[Vec<f64>]) -> Result<Vec<Vec2>> {
    let pca = Pca::fit(rows)?;
    let magnitude = rows.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let tol = 1e-12 * (1.0 + magnitude);
    let scores: Vec<Vec<f64>> = rows.iter().map(|r| pca.project(r)).collect();
    let mut out = vec![Vec2::new(0.5, 0.5); rows.len()];
    for axis in 0..pca.components.len().min(2) {
        let (lo, hi) = scores.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[axis]), hi.max(s[axis])));
        if hi - lo <= tol {
            continue;
        }
        for (p, s) in out.iter_mut().zip(&scores) {
            let v = (s[axis] - lo) / (hi - lo);
            if axis == 0 {
                p.x = v;
            } else {
                p.y = v;
            }
        }
    }
    Ok(out)
}
