mod common;

use nalgebra::{DMatrix, SymmetricEigen};
use pilecore::aggregation::{aggregate_matrices, foreshortened_preview, gallery_layout};
use pilecore::geometry::point_in_polygon;
use pilecore::kmeans::{kmeans, within_cluster_ss};
use pilecore::pca::{embed_2d, Pca};
use pilecore::{
    AggregateKind, ArrangeBySpec, FeatureSource, MatrixDatum, PileId, Reducer, SliceAxis, Vec2, Zoom,
};
use proptest::prelude::*;

/// Even-odd test with a ray cast straight down (-y), the mirror image of
/// the production +x ray.
fn downward_ray(p: Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        if (a.x <= p.x) != (b.x <= p.x) {
            let y = a.y + (p.x - a.x) * (b.y - a.y) / (b.x - a.x);
            if y < p.y {
                inside = !inside;
            }
        }
    }
    inside
}

fn on_any_edge(p: Vec2, poly: &[Vec2]) -> bool {
    (0..poly.len()).any(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        let len = a.distance(b).max(1e-12);
        (cross / len).abs() < 1e-6
    })
}

fn point() -> impl Strategy<Value = Vec2> {
    (-10.0..110.0f64, -10.0..110.0f64).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn lasso_agrees_with_downward_ray(poly in prop::collection::vec(point(), 3..12), p in point()) {
        prop_assume!(!on_any_edge(p, &poly));
        prop_assert_eq!(point_in_polygon(p, &poly), downward_ray(p, &poly));
    }
}

#[test]
fn pentagram_centre_is_outside() {
    let star: Vec<Vec2> = (0..5)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 + (i * 2) as f64 * 2.0 * std::f64::consts::PI / 5.0;
            Vec2::new(a.cos(), a.sin())
        })
        .collect();
    assert!(!point_in_polygon(Vec2::new(0.0, 0.0), &star));
    // a point inside a tip is covered once
    assert!(point_in_polygon(Vec2::new(0.0, 0.8), &star));
}

fn rows_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..6).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-50.0..50.0f64, d), 3..30))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pca_matches_nalgebra(rows in rows_strategy()) {
        let n = rows.len();
        let d = rows[0].len();
        let pca = Pca::fit(&rows).unwrap();
        let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let centred = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
        let cov = centred.transpose() * &centred / n as f64;
        let mut reference: Vec<f64> = SymmetricEigen::new(cov.clone()).eigenvalues.iter().copied().collect();
        reference.sort_by(|a, b| b.total_cmp(a));
        let scale = reference[0].abs().max(1.0);
        for (a, b) in pca.eigenvalues.iter().zip(&reference) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{a} vs {b}");
        }
        // residual after projecting onto the top two axes equals the trailing spectrum
        let mut residual = 0.0;
        for r in &rows {
            let proj = pca.project(r);
            let mut back = mean.clone();
            for (c, axis) in pca.components.iter().enumerate() {
                for j in 0..d {
                    back[j] += proj[c] * axis[j];
                }
            }
            residual += r.iter().zip(&back).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
        let trailing: f64 = reference.iter().skip(2).sum::<f64>() * n as f64;
        prop_assert!((residual - trailing).abs() <= 1e-7 * (scale * n as f64), "{residual} vs {trailing}");
    }

    #[test]
    fn embedding_ignores_translation(rows in rows_strategy(), shift in -1000.0..1000.0f64) {
        let a = embed_2d(&rows).unwrap();
        let moved: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x + shift).collect()).collect();
        let b = embed_2d(&moved).unwrap();
        for (p, q) in a.iter().zip(&b) {
            prop_assert!(p.distance(*q) < 1e-6);
            prop_assert!((0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y));
        }
    }

    #[test]
    fn kmeans_objective_never_increases(rows in rows_strategy(), k in 1usize..5, seed in any::<u64>()) {
        prop_assume!(k <= rows.len());
        let c = kmeans(&rows, k, seed).unwrap();
        for w in c.objective_trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        }
        prop_assert!(c.cluster_sizes().iter().all(|&s| s > 0));
        let sse = within_cluster_ss(&rows, &c.assignments, &c.centroids);
        prop_assert!((sse - c.objective_trace.last().copied().unwrap_or(sse)).abs() <= 1e-9 * sse.max(1.0));
    }

    #[test]
    fn kmeans_finds_the_best_split_of_two_blobs(
        a in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..6),
        b in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 2..6),
        seed in any::<u64>(),
    ) {
        let rows: Vec<Vec<f64>> = a.iter().map(|&(x, y)| vec![x, y]).chain(b.iter().map(|&(x, y)| vec![x + 20.0, y])).collect();
        let n = rows.len();
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let assign: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
            let mut cents = vec![vec![0.0; 2]; 2];
            let mut counts = [0.0; 2];
            for (r, &c) in rows.iter().zip(&assign) {
                counts[c] += 1.0;
                cents[c][0] += r[0];
                cents[c][1] += r[1];
            }
            for c in 0..2 {
                cents[c][0] /= counts[c];
                cents[c][1] /= counts[c];
            }
            best = best.min(within_cluster_ss(&rows, &assign, &cents));
        }
        let c = kmeans(&rows, 2, seed).unwrap();
        let sse = within_cluster_ss(&rows, &c.assignments, &c.centroids);
        prop_assert!((sse - best).abs() <= 1e-9 * best.max(1.0), "{sse} vs optimum {best}");
    }
}

fn stack() -> impl Strategy<Value = Vec<MatrixDatum>> {
    (1usize..5, 1usize..5, 1usize..8).prop_flat_map(|(r, c, n)| {
        prop::collection::vec(
            (prop::collection::vec(-1e3..1e3f64, r * c), prop::collection::vec(prop::bool::weighted(0.2), r * c)),
            n,
        )
        .prop_map(move |ms| {
            ms.into_iter().map(|(v, m)| MatrixDatum::new(r, c, v).unwrap().with_mask(m).unwrap()).collect()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn aggregate_properties(ms in stack(), rot in any::<usize>()) {
        let mean = aggregate_matrices(&ms, AggregateKind::Mean).unwrap();
        let var = aggregate_matrices(&ms, AggregateKind::Variance).unwrap();
        let std = aggregate_matrices(&ms, AggregateKind::Std).unwrap();
        let (rows, cols) = ms[0].shape();
        for r in 0..rows {
            for c in 0..cols {
                let cell: Vec<f64> = ms.iter().filter_map(|m| m.get(r, c)).collect();
                match mean.get(r, c) {
                    None => prop_assert!(cell.is_empty()),
                    Some(m) => {
                        let lo = cell.iter().copied().fold(f64::INFINITY, f64::min);
                        let hi = cell.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                        prop_assert!(lo <= m && m <= hi);
                        let v = var.get(r, c).unwrap();
                        let s = std.get(r, c).unwrap();
                        prop_assert!(v >= 0.0);
                        prop_assert!((s * s - v).abs() <= 1e-12 * v.max(f64::MIN_POSITIVE) || v == 0.0 && s == 0.0);
                    }
                }
            }
        }
        let mut shuffled = ms.clone();
        let len = shuffled.len();
        shuffled.rotate_left(rot % len);
        shuffled.reverse();
        for kind in [AggregateKind::Mean, AggregateKind::Variance, AggregateKind::Std] {
            let a = aggregate_matrices(&ms, kind).unwrap();
            let b = aggregate_matrices(&shuffled, kind).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300) || (x - y).abs() < 1e-9);
            }
            prop_assert_eq!(&a.mask, &b.mask);
        }
    }

    #[test]
    fn foreshortening_lengths(ms in stack()) {
        let m = &ms[0];
        for reducer in [Reducer::Mean, Reducer::Max, Reducer::Min] {
            prop_assert_eq!(foreshortened_preview(m, SliceAxis::Rows, reducer).len(), m.cols);
            prop_assert_eq!(foreshortened_preview(m, SliceAxis::Cols, reducer).len(), m.rows);
        }
    }

    #[test]
    fn galleries_tile_the_cover(k in 0usize..12, w in 3u32..500, h in 3u32..500) {
        match gallery_layout(k, w, h) {
            Err(_) => prop_assert!(![1, 2, 3, 4, 6, 8, 9].contains(&k)),
            Ok(slots) => {
                prop_assert_eq!(slots.len(), k);
                prop_assert_eq!(slots.iter().map(|s| s.area()).sum::<u64>(), w as u64 * h as u64);
                for (i, a) in slots.iter().enumerate() {
                    prop_assert!(a.x + a.w <= w && a.y + a.h <= h && a.w > 0 && a.h > 0);
                    for b in &slots[i + 1..] {
                        let disjoint = a.x + a.w <= b.x || b.x + b.w <= a.x || a.y + a.h <= b.y || b.y + b.h <= a.y;
                        prop_assert!(disjoint);
                    }
                }
            }
        }
    }

    #[test]
    fn representatives_are_distinct_members(seed in any::<u64>(), n in 2usize..25, k in 1usize..6) {
        let mut s = common::state(n, seed);
        let ids: Vec<PileId> = s.piles.keys().copied().skip(1).collect();
        s.merge_piles(PileId(0), &ids).unwrap();
        let pile = s.piles[&PileId(0)].clone();
        let reps = s.representative_items(&pile, &FeatureSource::Features, k.min(n), seed).unwrap();
        prop_assert_eq!(reps.len(), k.min(n));
        let mut sorted = reps.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(sorted.len(), reps.len());
        prop_assert!(reps.iter().all(|r| pile.contains(r)));
    }

    #[test]
    fn grid_layout_is_injective_stable_and_bounded(seed in any::<u64>(), n in 1usize..80) {
        let mut s = common::state(n, seed);
        s.arrange_by(ArrangeBySpec::Index { key: Some("v".into()) }).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for p in s.piles.values() {
            prop_assert!(seen.insert((p.x.to_bits(), p.y.to_bits())));
            prop_assert!(p.x >= 0.0 && p.x <= s.canvas.width && p.y >= 0.0 && p.y <= s.canvas.height);
        }
        // equal keys keep ascending pile id order
        let order = |p: &pilecore::Pile| (p.y.to_bits(), p.x.to_bits());
        let piles: Vec<_> = s.piles.values().collect();
        for a in &piles {
            for b in &piles {
                let (va, vb) = (&s.items[a.cover()].metadata["v"], &s.items[b.cover()].metadata["v"]);
                if va == vb && a.id < b.id {
                    prop_assert!((a.y, a.x) < (b.y, b.x), "{:?} {:?}", order(a), order(b));
                }
            }
        }
    }

    #[test]
    fn zoom_update_is_a_fixpoint(seed in any::<u64>(), n in 1usize..40, scale in 0.2..5.0f64, reactive in any::<bool>()) {
        let mut s = common::state(n, seed);
        if reactive {
            s.group_by(&pilecore::GroupBySpec::Overlap { reactive: true }).unwrap();
        }
        let zoom = Zoom { scale, translate: Vec2::new(10.0, -5.0) };
        s.zoom_update(zoom).unwrap();
        let once = s.clone();
        s.zoom_update(zoom).unwrap();
        s.epoch = once.epoch;
        prop_assert_eq!(s, once);
    }
}
