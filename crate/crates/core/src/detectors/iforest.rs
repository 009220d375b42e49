//! Isolation forest with full-depth trees and held-out scoring.
//!
//! Each tree trains on its own subsample, drawn without replacement, and
//! splits on a uniformly random dimension (among dimensions whose values
//! actually vary in the node) at a uniformly random cut, recursing until
//! every leaf is a single point or a set with zero spread in every
//! dimension. There is no height cap and no leaf-size path adjustment: the
//! path length of a point is exactly the number of edges walked to its
//! leaf.
//!
//! Scores normalize the mean path length by the expected path length
//! `c(psi)` of a binary search tree over `psi` points and map it through
//! `2^(-mean / c(psi))`, so scores near 1 mean "isolated almost
//! immediately" and scores near 0.5 and below mean "as deep as a typical
//! nominal point".

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detectors::AnomalyScorer;
use crate::error::{Error, Result};
use crate::point::PointSet;
use crate::seeds;
use crate::Real;

/// Training knobs. The defaults are the reference protocol: 1000 trees,
/// each on a 20% subsample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoForestParams {
    pub n_trees: usize,
    pub subsample_fraction: f64,
}

impl Default for IsoForestParams {
    fn default() -> Self {
        Self {
            n_trees: 1000,
            subsample_fraction: 0.2,
        }
    }
}

impl IsoForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(Error::Config("n_trees must be at least 1".to_string()));
        }
        if !(self.subsample_fraction > 0.0 && self.subsample_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "subsample_fraction must lie in (0, 1], got {}",
                self.subsample_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node<F> {
    Leaf { count: u32 },
    Split { dim: u32, cut: F, left: u32, right: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Tree<F> {
    nodes: Vec<Node<F>>,
}

impl<F: Real> Tree<F> {
    fn path_length(&self, row: &[F]) -> u32 {
        let mut node = 0u32;
        let mut depth = 0u32;
        loop {
            match self.nodes[node as usize] {
                Node::Leaf { .. } => return depth,
                Node::Split { dim, cut, left, right } => {
                    node = if row[dim as usize] <= cut { left } else { right };
                    depth += 1;
                }
            }
        }
    }
}

/// A trained isolation forest. Immutable after training; scoring never
/// mutates, so a forest can be shared across threads freely.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoForest<F> {
    trees: Vec<Tree<F>>,
    /// Sorted training-row indices of each tree's subsample.
    in_bag: Vec<Vec<u32>>,
    dim: usize,
    psi: usize,
    train_len: usize,
    params: IsoForestParams,
    seed: u64,
}

impl<F: Real> IsoForest<F> {
    /// Train on `data`, deriving per-tree generators from `seed` so the
    /// result is identical whether trees are built in parallel or one by
    /// one.
    pub fn train(data: &PointSet<F>, params: &IsoForestParams, seed: u64) -> Result<Self> {
        params.validate()?;
        if data.is_empty() {
            return Err(Error::EmptySample("isolation forest training set"));
        }
        let n = data.n_rows();
        let psi = ((params.subsample_fraction * n as f64).ceil() as usize).clamp(1, n);

        let built: Vec<(Tree<F>, Vec<u32>)> = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seeds::stream_rng(seed, t as u64);
                let mut bag: Vec<u32> = rand::seq::index::sample(&mut rng, n, psi)
                    .into_iter()
                    .map(|i| i as u32)
                    .collect();
                bag.sort_unstable();
                let mut indices = bag.clone();
                let mut nodes = Vec::new();
                build_node(&mut nodes, &mut rng, data, &mut indices);
                (Tree { nodes }, bag)
            })
            .collect();

        let (trees, in_bag) = built.into_iter().unzip();
        Ok(Self {
            trees,
            in_bag,
            dim: data.dim(),
            psi,
            train_len: n,
            params: *params,
            seed,
        })
    }

    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Subsample size each tree trained on.
    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &IsoForestParams {
        &self.params
    }

    /// Sorted training-row indices tree `t` trained on, for audits.
    pub fn subsample_indices(&self, t: usize) -> &[u32] {
        &self.in_bag[t]
    }

    /// Scores for each row of `points`, in row order, using every tree.
    pub fn score_rows(&self, points: &PointSet<F>) -> Result<Vec<F>> {
        if points.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: points.dim(),
            });
        }
        let denom = c_factor(self.psi);
        Ok((0..points.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = points.row(i);
                let total: u64 = self.trees.iter().map(|t| t.path_length(row) as u64).sum();
                score_from_mean_path(total as f64 / self.trees.len() as f64, denom)
            })
            .collect())
    }

    /// Scores for the training rows, each using only the trees whose
    /// subsample excluded that row. `train` must be the point set the
    /// forest was trained on.
    pub fn held_out_rows(&self, train: &PointSet<F>) -> Result<Vec<F>> {
        if train.n_rows() != self.train_len || train.dim() != self.dim {
            return Err(Error::Config(
                "held-out scoring requires the exact training point set".to_string(),
            ));
        }
        let denom = c_factor(self.psi);
        (0..train.n_rows())
            .into_par_iter()
            .map(|i| {
                let row = train.row(i);
                let mut total = 0u64;
                let mut used = 0u64;
                for (t, bag) in self.trees.iter().zip(&self.in_bag) {
                    if bag.binary_search(&(i as u32)).is_err() {
                        total += t.path_length(row) as u64;
                        used += 1;
                    }
                }
                if used == 0 {
                    return Err(Error::NeverHeldOut { row: i });
                }
                Ok(score_from_mean_path(total as f64 / used as f64, denom))
            })
            .collect()
    }
}

impl<F: Real> AnomalyScorer<F> for IsoForest<F> {
    fn score_rows(&self, points: &PointSet<F>) -> Result<Vec<F>> {
        IsoForest::score_rows(self, points)
    }

    fn held_out_rows(&self, train: &PointSet<F>) -> Result<Vec<F>> {
        IsoForest::held_out_rows(self, train)
    }
}

/// Expected path length of an unsuccessful search in a binary search tree
/// over `m` points: `2 * H(m - 1) - 2 * (m - 1) / m`, by exact harmonic
/// summation. `c(1) = 0`, `c(2) = 1`.
pub fn c_factor(m: usize) -> f64 {
    if m <= 1 {
        return 0.0;
    }
    let h: f64 = (1..m).map(|i| (i as f64).recip()).sum();
    2.0 * h - 2.0 * (m - 1) as f64 / m as f64
}

fn score_from_mean_path<F: Real>(mean_path: f64, denom: f64) -> F {
    // A zero mean path means every tree isolated the point at its root
    // (single-leaf trees included, where the normalizer is 0 as well).
    let score = if mean_path == 0.0 {
        1.0
    } else {
        2f64.powf(-mean_path / denom)
    };
    F::narrow(score)
}

/// Build the subtree over `indices`, returning its node id. The parent slot
/// is allocated before the children so the root is always node 0.
fn build_node<F: Real>(
    nodes: &mut Vec<Node<F>>,
    rng: &mut ChaCha8Rng,
    data: &PointSet<F>,
    indices: &mut [u32],
) -> u32 {
    let id = nodes.len() as u32;
    if indices.len() <= 1 {
        nodes.push(Node::Leaf {
            count: indices.len() as u32,
        });
        return id;
    }

    let dim = data.dim();
    let mut lo = vec![F::infinity(); dim];
    let mut hi = vec![F::neg_infinity(); dim];
    for &i in indices.iter() {
        for (d, &v) in data.row(i as usize).iter().enumerate() {
            if v < lo[d] {
                lo[d] = v;
            }
            if v > hi[d] {
                hi[d] = v;
            }
        }
    }
    let spread_dims: Vec<usize> = (0..dim).filter(|&d| hi[d] > lo[d]).collect();
    if spread_dims.is_empty() {
        nodes.push(Node::Leaf {
            count: indices.len() as u32,
        });
        return id;
    }

    let d = spread_dims[rng.random_range(0..spread_dims.len())];
    let (min, max) = (lo[d], hi[d]);
    let mut cut = rng.random_range(min..max);
    // Float rounding can land the cut on the interval edge when the range
    // is a handful of ulps wide; redraw, then fall back to a leaf.
    let mut attempts = 0;
    while cut >= max && attempts < 8 {
        cut = rng.random_range(min..max);
        attempts += 1;
    }
    if cut >= max {
        nodes.push(Node::Leaf {
            count: indices.len() as u32,
        });
        return id;
    }

    // Partition: points at or below the cut go left. The cut lies in
    // [min, max), so both sides are non-empty.
    let mut l = 0;
    let mut r = indices.len();
    while l < r {
        if data.row(indices[l] as usize)[d] <= cut {
            l += 1;
        } else {
            r -= 1;
            indices.swap(l, r);
        }
    }

    nodes.push(Node::Split {
        dim: d as u32,
        cut,
        left: 0,
        right: 0,
    });
    let (left_idx, right_idx) = indices.split_at_mut(l);
    let left = build_node(nodes, rng, data, left_idx);
    let right = build_node(nodes, rng, data, right_idx);
    match &mut nodes[id as usize] {
        Node::Split { left: l, right: r, .. } => {
            *l = left;
            *r = right;
        }
        Node::Leaf { .. } => unreachable!("slot was pushed as a split"),
    }
    id
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_dim(values: &[f64]) -> PointSet<f64> {
        PointSet::from_rows(&values.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn c_factor_reference_values() {
        assert_eq!(c_factor(0), 0.0);
        assert_eq!(c_factor(1), 0.0);
        assert_eq!(c_factor(2), 1.0);
        // c(4) = 2 * (1 + 1/2 + 1/3) - 2 * 3/4.
        assert!((c_factor(4) - (2.0 * (1.0 + 0.5 + 1.0 / 3.0) - 1.5)).abs() < 1e-15);
        // Exact summation, not the asymptotic ln approximation.
        assert!((c_factor(3) - (3.0 - 4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn two_points_score_exactly_half() {
        let data = one_dim(&[0.0, 1.0]);
        let params = IsoForestParams {
            n_trees: 1,
            subsample_fraction: 1.0,
        };
        let f = IsoForest::train(&data, &params, 7).unwrap();
        let scores = f.score_rows(&data).unwrap();
        // One split isolates both points at depth 1; c(2) = 1.
        assert_eq!(scores, vec![0.5, 0.5]);
    }

    #[test]
    fn identical_points_collapse_to_one_leaf_and_score_one() {
        let data = one_dim(&[2.5; 6]);
        let params = IsoForestParams {
            n_trees: 3,
            subsample_fraction: 1.0,
        };
        let f = IsoForest::train(&data, &params, 1).unwrap();
        assert!(f.trees.iter().all(|t| t.nodes.len() == 1));
        assert_eq!(f.score_rows(&data).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn trees_grow_to_full_depth() {
        let data = one_dim(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let params = IsoForestParams {
            n_trees: 20,
            subsample_fraction: 1.0,
        };
        let f = IsoForest::train(&data, &params, 3).unwrap();
        for tree in &f.trees {
            let leaves: Vec<u32> = tree
                .nodes
                .iter()
                .filter_map(|n| match n {
                    Node::Leaf { count } => Some(*count),
                    Node::Split { .. } => None,
                })
                .collect();
            // Distinct values and no height cap: every leaf is one point.
            assert!(leaves.iter().all(|&c| c <= 1));
            assert_eq!(leaves.iter().map(|&c| c as usize).sum::<usize>(), 8);
        }
    }

    #[test]
    fn outliers_score_above_the_cluster() {
        let mut values: Vec<f64> = (0..50).map(|i| i as f64 * 0.01).collect();
        values.push(100.0);
        let data = one_dim(&values);
        let params = IsoForestParams {
            n_trees: 200,
            subsample_fraction: 0.5,
        };
        let f = IsoForest::train(&data, &params, 11).unwrap();
        let scores = f.score_rows(&data).unwrap();
        let outlier = scores[50];
        let cluster_max = scores[..50].iter().cloned().fold(f64::MIN, f64::max);
        assert!(
            outlier > cluster_max,
            "outlier {outlier} vs cluster max {cluster_max}"
        );
    }

    #[test]
    fn training_is_deterministic_in_the_seed() {
        let data = one_dim(&(0..40).map(|i| (i as f64).sin()).collect::<Vec<_>>());
        let params = IsoForestParams {
            n_trees: 16,
            subsample_fraction: 0.4,
        };
        let a = IsoForest::train(&data, &params, 5).unwrap();
        let b = IsoForest::train(&data, &params, 5).unwrap();
        assert_eq!(a, b);
        let c = IsoForest::train(&data, &params, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn held_out_scores_use_only_excluding_trees() {
        let data = one_dim(&(0..30).map(|i| i as f64 * 0.37).collect::<Vec<_>>());
        let params = IsoForestParams {
            n_trees: 40,
            subsample_fraction: 0.3,
        };
        let f = IsoForest::train(&data, &params, 9).unwrap();
        let oob = f.held_out_rows(&data).unwrap();

        // Recompute row 4 by hand from the per-tree bags.
        let row = data.row(4);
        let denom = c_factor(f.psi());
        let mut total = 0u64;
        let mut used = 0u64;
        for (t, bag) in f.trees.iter().zip(&f.in_bag) {
            assert!(bag.windows(2).all(|w| w[0] < w[1]), "bags sorted distinct");
            if !bag.contains(&4) {
                total += t.path_length(row) as u64;
                used += 1;
            }
        }
        assert!(used > 0);
        let expect = 2f64.powf(-(total as f64 / used as f64) / denom);
        assert!((oob[4] - expect).abs() < 1e-15);
    }

    #[test]
    fn full_subsample_leaves_no_held_out_trees() {
        let data = one_dim(&[1.0, 2.0, 3.0]);
        let params = IsoForestParams {
            n_trees: 4,
            subsample_fraction: 1.0,
        };
        let f = IsoForest::train(&data, &params, 2).unwrap();
        assert!(matches!(
            f.held_out_rows(&data),
            Err(Error::NeverHeldOut { row: 0 })
        ));
    }

    #[test]
    fn validation_rejects_bad_inputs() {
        let data = one_dim(&[1.0, 2.0]);
        assert!(IsoForest::train(
            &data,
            &IsoForestParams { n_trees: 0, subsample_fraction: 0.5 },
            1
        )
        .is_err());
        for f in [0.0, -0.1, 1.5] {
            assert!(IsoForest::train(
                &data,
                &IsoForestParams { n_trees: 1, subsample_fraction: f },
                1
            )
            .is_err());
        }
        let empty = PointSet::from_flat(Vec::<f64>::new(), 1).unwrap();
        assert!(matches!(
            IsoForest::train(&empty, &IsoForestParams::default(), 1),
            Err(Error::EmptySample(_))
        ));

        let f = IsoForest::train(&data, &IsoForestParams { n_trees: 2, subsample_fraction: 1.0 }, 1)
            .unwrap();
        let wrong_dim = PointSet::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(
            f.score_rows(&wrong_dim),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn scoring_an_empty_set_yields_no_scores() {
        let data = one_dim(&[1.0, 2.0, 3.0]);
        let f = IsoForest::train(&data, &IsoForestParams { n_trees: 2, subsample_fraction: 0.5 }, 1)
            .unwrap();
        let empty = PointSet::from_flat(Vec::<f64>::new(), 1).unwrap();
        assert_eq!(f.score_rows(&empty).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn serialization_round_trips() {
        let data = one_dim(&(0..25).map(|i| (i as f64 * 0.7).cos()).collect::<Vec<_>>());
        let params = IsoForestParams {
            n_trees: 8,
            subsample_fraction: 0.4,
        };
        let f = IsoForest::train(&data, &params, 13).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: IsoForest<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(f, back);
        assert_eq!(
            f.score_rows(&data).unwrap(),
            back.score_rows(&data).unwrap()
        );
    }

    #[test]
    fn f32_forest_trains_and_scores() {
        let rows: Vec<Vec<f32>> = (0..20).map(|i| vec![i as f32, (i * i) as f32]).collect();
        let data = PointSet::from_rows(&rows).unwrap();
        let f = IsoForest::train(&data, &IsoForestParams { n_trees: 5, subsample_fraction: 0.5 }, 3)
            .unwrap();
        let scores = f.score_rows(&data).unwrap();
        assert_eq!(scores.len(), 20);
        assert!(scores.iter().all(|s| s.is_finite() && *s > 0.0 && *s <= 1.0));
    }
}
