//! Seeded Lloyd's k-means with k-means++ initialisation.
//!
//! Euclidean distance on raw (unnormalised) feature vectors. Empty clusters
//! are repaired by moving the point farthest from its centroid into them,
//! so every returned cluster has at least one member.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

/// Iteration cap for Lloyd's loop.
pub const MAX_ITERATIONS: usize = 100;

const KMEANS_STREAM: u64 = 0x6b6d_6561_6e73;

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub assignments: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Within-cluster sum of squares after each update step.
    pub objective_trace: Vec<f64>,
}

impl Clustering {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.centroids.len()];
        for &a in &self.assignments {
            sizes[a] += 1;
        }
        sizes
    }

    /// Member indices per cluster, each ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.centroids.len()];
        for (i, &a) in self.assignments.iter().enumerate() {
            out[a].push(i);
        }
        out
    }
}

/// `max(2, ceil(sqrt(n / 2)))`, computed in exact integer arithmetic.
pub fn default_k(n: usize) -> usize {
    // ceil(sqrt(n/2)) is the smallest k with 2k^2 >= n.
    let mut k = libm::sqrt(n as f64 / 2.0) as usize;
    while 2 * k * k < n {
        k += 1;
    }
    while k > 0 && 2 * (k - 1) * (k - 1) >= n {
        k -= 1;
    }
    k.max(2)
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn within_cluster_ss(vectors: &[Vec<f64>], assignments: &[usize], centroids: &[Vec<f64>]) -> f64 {
    vectors.iter().zip(assignments).map(|(v, &a)| squared_distance(v, &centroids[a])).sum()
}

fn nearest(v: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = squared_distance(v, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

fn plus_plus_init<R: Rng>(vectors: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = vectors.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![vectors[first].clone()];
    let mut d2: Vec<f64> = vectors.iter().map(|v| squared_distance(v, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().enumerate().filter(|(i, _)| !chosen[*i]).map(|(_, d)| *d).sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            let mut last_positive = 0;
            for (i, &d) in d2.iter().enumerate() {
                if chosen[i] || d <= 0.0 {
                    continue;
                }
                last_positive = i;
                acc += d;
                if acc > target {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or(last_positive)
        } else {
            // All remaining points coincide with a centre; pick uniformly among unchosen.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        centroids.push(vectors[pick].clone());
        let c = centroids.last().unwrap();
        for (i, v) in vectors.iter().enumerate() {
            d2[i] = d2[i].min(squared_distance(v, c));
        }
    }
    centroids
}

/// Moves the farthest point of a multi-member cluster into every empty cluster.
fn repair_empty(vectors: &[Vec<f64>], assignments: &mut [usize], centroids: &mut [Vec<f64>]) {
    let k = centroids.len();
    let mut sizes = vec![0usize; k];
    for &a in assignments.iter() {
        sizes[a] += 1;
    }
    for j in 0..k {
        if sizes[j] > 0 {
            continue;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, v) in vectors.iter().enumerate() {
            let a = assignments[i];
            if sizes[a] < 2 {
                continue;
            }
            let d = squared_distance(v, &centroids[a]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        if let Some((i, _)) = best {
            sizes[assignments[i]] -= 1;
            assignments[i] = j;
            sizes[j] = 1;
            centroids[j] = vectors[i].clone();
        }
    }
}

fn update_centroids(vectors: &[Vec<f64>], assignments: &[usize], centroids: &mut [Vec<f64>]) {
    let dim = vectors[0].len();
    let mut sums = vec![vec![0.0; dim]; centroids.len()];
    let mut counts = vec![0usize; centroids.len()];
    for (v, &a) in vectors.iter().zip(assignments) {
        counts[a] += 1;
        for (s, x) in sums[a].iter_mut().zip(v) {
            *s += x;
        }
    }
    for (j, c) in centroids.iter_mut().enumerate() {
        if counts[j] > 0 {
            let inv = 1.0 / counts[j] as f64;
            for (cv, s) in c.iter_mut().zip(&sums[j]) {
                *cv = s * inv;
            }
        }
    }
}

/// Clusters `vectors` into exactly `k` non-empty groups.
///
/// Deterministic for a fixed `seed`. Stops when assignments no longer change
/// or after [`MAX_ITERATIONS`] rounds.
pub fn kmeans(vectors: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering> {
    if k == 0 {
        return Err(Error::InvalidSpec("k must be at least 1".into()));
    }
    if vectors.len() < k {
        return Err(Error::NotEnoughVectors { n: vectors.len(), k });
    }
    let dim = vectors[0].len();
    if vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::InvalidSpec("feature vectors differ in length".into()));
    }
    if vectors.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite);
    }

    let mut rng = rng::stream(seed, KMEANS_STREAM);
    let mut centroids = plus_plus_init(vectors, k, &mut rng);
    let mut assignments: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut next: Vec<usize> = vectors.iter().map(|v| nearest(v, &centroids)).collect();
        repair_empty(vectors, &mut next, &mut centroids);
        update_centroids(vectors, &next, &mut centroids);
        trace.push(within_cluster_ss(vectors, &next, &centroids));
        let converged = next == assignments;
        assignments = next;
        if converged {
            break;
        }
    }

    Ok(Clustering { assignments, centroids, iterations, objective_trace: trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_points() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![10.0, 10.0], vec![10.0, 11.0]]
    }

    #[test]
    fn default_k_matches_formula() {
        let expected = [(4, 2), (8, 2), (50, 5), (200, 10), (2000, 32), (0, 2), (1, 2), (18, 3), (19, 4)];
        for (n, k) in expected {
            assert_eq!(default_k(n), k, "n = {n}");
        }
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let c = kmeans(&four_points(), 4, 3).unwrap();
        let mut a = c.assignments.clone();
        a.sort();
        assert_eq!(a, vec![0, 1, 2, 3]);
    }

    #[test]
    fn duplicate_points_still_fill_every_cluster() {
        let v = vec![vec![1.0], vec![1.0], vec![1.0]];
        let c = kmeans(&v, 3, 9).unwrap();
        assert!(c.cluster_sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn same_seed_same_result() {
        let v = four_points();
        assert_eq!(kmeans(&v, 2, 11).unwrap(), kmeans(&v, 2, 11).unwrap());
    }

    #[test]
    fn rejects_too_few_vectors() {
        assert_eq!(kmeans(&four_points(), 5, 0), Err(Error::NotEnoughVectors { n: 4, k: 5 }));
        assert!(kmeans(&four_points(), 0, 0).is_err());
    }
}
