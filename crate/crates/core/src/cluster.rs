//! Agglomerative hierarchical clustering over precomputed dissimilarities.
//!
//! Input matrices only need to be symmetric and nonnegative; no metric
//! assumption is made (the chamfer distance violates the triangle
//! inequality). Merges are tie-broken by the lowest cluster-id pair in fixed
//! row-major order so results are identical across platforms.

use crate::error::{Error, Result};
use crate::metrics::DistanceMatrix;

/// Linkage criterion: inter-cluster dissimilarity during agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    /// Shortest distance over cross pairs.
    Single,
    /// Largest distance over cross pairs.
    Complete,
    /// Unweighted arithmetic mean over all cross pairs.
    Average,
}

/// One agglomeration step: the two cluster ids merged and the height.
///
/// Cluster ids follow the usual stepwise convention: leaves are 0..k-1 and
/// the cluster created by merge number s gets id k + s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

/// A stepwise dendrogram over k leaves: exactly k-1 merges with
/// nondecreasing heights (single, complete, and average linkage are all
/// monotone).
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }
}

/// Agglomerative clustering of a dissimilarity matrix under the chosen
/// linkage. Cluster distances are maintained with the Lance-Williams update
/// for the three supported criteria.
pub fn linkage(d: &DistanceMatrix, method: Linkage) -> Dendrogram {
    let k = d.size();
    if k == 0 {
        return Dendrogram {
            leaves: 0,
            merges: Vec::new(),
        };
    }

    // active[c] = Some(size) while cluster id c exists.
    let mut active: Vec<Option<usize>> = vec![Some(1); k];
    active.resize(2 * k - 1, None);
    // Distances between active clusters, indexed by cluster id.
    let total = 2 * k - 1;
    let mut dist = vec![0.0f64; total * total];
    for i in 0..k {
        for j in 0..k {
            dist[i * total + j] = d.get(i, j);
        }
    }

    let mut merges = Vec::with_capacity(k.saturating_sub(1));
    for step in 0..k.saturating_sub(1) {
        // Lowest-index pair wins ties, scanning row-major.
        let mut best = f64::INFINITY;
        let mut pair = (0usize, 0usize);
        for i in 0..k + step {
            if active[i].is_none() {
                continue;
            }
            for j in (i + 1)..k + step {
                if active[j].is_none() {
                    continue;
                }
                let v = dist[i * total + j];
                if v < best {
                    best = v;
                    pair = (i, j);
                }
            }
        }
        let (a, b) = pair;
        let new_id = k + step;
        let (size_a, size_b) = (active[a].unwrap(), active[b].unwrap());
        merges.push(Merge {
            left: a,
            right: b,
            height: best,
        });

        for c in 0..new_id {
            if active[c].is_none() || c == a || c == b {
                continue;
            }
            let dca = dist[c * total + a];
            let dcb = dist[c * total + b];
            let merged = match method {
                Linkage::Single => dca.min(dcb),
                Linkage::Complete => dca.max(dcb),
                Linkage::Average => {
                    (size_a as f64 * dca + size_b as f64 * dcb) / (size_a + size_b) as f64
                }
            };
            dist[c * total + new_id] = merged;
            dist[new_id * total + c] = merged;
        }
        active[a] = None;
        active[b] = None;
        active[new_id] = Some(size_a + size_b);
    }

    Dendrogram { leaves: k, merges }
}

/// Labels partitioning the leaves into exactly `k_target` clusters by undoing
/// the last merges. Labels are numbered by first appearance in leaf order.
pub fn cut_by_count(dendro: &Dendrogram, k_target: usize) -> Result<Vec<usize>> {
    let k = dendro.leaf_count();
    if k_target < 1 || k_target > k {
        return Err(Error::CutOutOfRange {
            target: k_target,
            leaves: k,
        });
    }
    labels_after_merges(dendro, k - k_target)
}

/// Labels from all merges at height at or below `radius`; leaves never merged
/// under the ceiling stay singletons.
pub fn cut_by_ceiling(dendro: &Dendrogram, radius: f64) -> Vec<usize> {
    let applied = dendro
        .merges()
        .iter()
        .take_while(|m| m.height <= radius)
        .count();
    labels_after_merges(dendro, applied).expect("merge count within range")
}

fn labels_after_merges(dendro: &Dendrogram, applied: usize) -> Result<Vec<usize>> {
    let k = dendro.leaf_count();
    // member_of[c] = representative root for cluster id c after the applied
    // merges.
    let mut root: Vec<usize> = (0..2 * k.max(1) - 1).collect();
    for (step, m) in dendro.merges().iter().take(applied).enumerate() {
        let new_id = k + step;
        let ra = find_root(&mut root, m.left);
        let rb = find_root(&mut root, m.right);
        root[ra] = new_id;
        root[rb] = new_id;
    }
    let mut label_of_root: std::collections::BTreeMap<usize, usize> = Default::default();
    let mut labels = Vec::with_capacity(k);
    for leaf in 0..k {
        let r = find_root(&mut root, leaf);
        let next = label_of_root.len();
        let l = *label_of_root.entry(r).or_insert(next);
        labels.push(l);
    }
    Ok(labels)
}

fn find_root(root: &mut [usize], mut c: usize) -> usize {
    while root[c] != c {
        root[c] = root[root[c]];
        c = root[c];
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from_points(points: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn_symmetric(points.len(), |i, j| (points[i] - points[j]).abs())
    }

    /// Naive O(k^3) agglomeration recomputing every cluster distance from the
    /// original matrix by definition. Independent of the Lance-Williams path.
    fn naive_linkage(d: &DistanceMatrix, method: Linkage) -> Vec<Merge> {
        let k = d.size();
        let mut clusters: Vec<Option<(usize, Vec<usize>)>> =
            (0..k).map(|i| Some((i, vec![i]))).collect();
        let mut merges = Vec::new();
        for step in 0..k.saturating_sub(1) {
            let mut best = f64::INFINITY;
            let mut pair = (0, 0);
            let snapshot: Vec<(usize, usize, Vec<usize>)> = clusters
                .iter()
                .enumerate()
                .filter_map(|(slot, c)| c.as_ref().map(|(id, m)| (slot, *id, m.clone())))
                .collect();
            for x in 0..snapshot.len() {
                for y in (x + 1)..snapshot.len() {
                    let (_, id_a, ref ma) = snapshot[x];
                    let (_, id_b, ref mb) = snapshot[y];
                    let cross: Vec<f64> = ma
                        .iter()
                        .flat_map(|&i| mb.iter().map(move |&j| d.get(i, j)))
                        .collect();
                    let v = match method {
                        Linkage::Single => cross.iter().cloned().fold(f64::INFINITY, f64::min),
                        Linkage::Complete => cross.iter().cloned().fold(0.0, f64::max),
                        Linkage::Average => cross.iter().sum::<f64>() / cross.len() as f64,
                    };
                    // Same tie-break rule as the implementation: lowest id
                    // pair in row-major order. Snapshot order is ascending in
                    // cluster id because new entries append.
                    let (lo, hi) = if id_a < id_b { (id_a, id_b) } else { (id_b, id_a) };
                    if v < best {
                        best = v;
                        pair = (lo, hi);
                    }
                }
            }
            merges.push(Merge {
                left: pair.0,
                right: pair.1,
                height: best,
            });
            let new_id = k + step;
            let mut merged_members = Vec::new();
            for slot in clusters.iter_mut() {
                if let Some((id, members)) = slot {
                    if *id == pair.0 || *id == pair.1 {
                        merged_members.extend(members.iter().copied());
                        *slot = None;
                    }
                }
            }
            merged_members.sort_unstable();
            clusters.push(Some((new_id, merged_members)));
        }
        merges
    }

    #[test]
    fn single_leaf_has_no_merges() {
        let d = DistanceMatrix::zeros(1);
        let dend = linkage(&d, Linkage::Average);
        assert_eq!(dend.leaf_count(), 1);
        assert!(dend.merges().is_empty());
    }

    #[test]
    fn first_merge_is_unique_nearest_pair() {
        let d = matrix_from_points(&[0.0, 1.0, 10.0]);
        for method in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let dend = linkage(&d, method);
            let first = dend.merges()[0];
            assert_eq!((first.left, first.right), (0, 1));
            assert_eq!(first.height, 1.0);
        }
    }

    #[test]
    fn matches_naive_oracle_on_random_matrices() {
        // Deterministic xorshift so the oracle corpus is stable.
        let mut state = 0x9E3779B97F4A7C15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for k in [2usize, 5, 8, 12] {
            for _ in 0..8 {
                let mut d = DistanceMatrix::zeros(k);
                for i in 0..k {
                    for j in (i + 1)..k {
                        d.set(i, j, next() * 10.0);
                    }
                }
                for method in [Linkage::Single, Linkage::Complete, Linkage::Average] {
                    let fast = linkage(&d, method);
                    let slow = naive_linkage(&d, method);
                    assert_eq!(fast.merges().len(), slow.len());
                    for (a, b) in fast.merges().iter().zip(&slow) {
                        assert_eq!((a.left, a.right), (b.left, b.right), "{method:?}");
                        assert!((a.height - b.height).abs() < 1e-9, "{method:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn heights_are_nondecreasing() {
        let d = matrix_from_points(&[0.0, 2.0, 3.0, 7.0, 20.0, 21.5]);
        for method in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let dend = linkage(&d, method);
            for w in dend.merges().windows(2) {
                assert!(w[1].height >= w[0].height);
            }
        }
    }

    #[test]
    fn cut_by_count_extremes() {
        let d = matrix_from_points(&[0.0, 1.0, 10.0, 11.0]);
        let dend = linkage(&d, Linkage::Single);
        let singletons = cut_by_count(&dend, 4).unwrap();
        assert_eq!(singletons, vec![0, 1, 2, 3]);
        let one = cut_by_count(&dend, 1).unwrap();
        assert!(one.iter().all(|&l| l == 0));
    }

    #[test]
    fn cut_by_count_two_obvious_groups() {
        let d = matrix_from_points(&[0.0, 1.0, 10.0, 11.0]);
        for method in [Linkage::Single, Linkage::Complete, Linkage::Average] {
            let dend = linkage(&d, method);
            let labels = cut_by_count(&dend, 2).unwrap();
            assert_eq!(labels[0], labels[1]);
            assert_eq!(labels[2], labels[3]);
            assert_ne!(labels[0], labels[2]);
        }
    }

    #[test]
    fn cut_by_count_out_of_range() {
        let d = matrix_from_points(&[0.0, 1.0]);
        let dend = linkage(&d, Linkage::Single);
        assert!(cut_by_count(&dend, 0).is_err());
        assert!(cut_by_count(&dend, 3).is_err());
    }

    #[test]
    fn cut_by_ceiling_cases() {
        let d = matrix_from_points(&[0.0, 1.0, 10.0]);
        let dend = linkage(&d, Linkage::Single);
        // Below the smallest pairwise distance: all singletons.
        assert_eq!(cut_by_ceiling(&dend, 0.5), vec![0, 1, 2]);
        // Above the largest merge: one cluster.
        assert!(cut_by_ceiling(&dend, 100.0).iter().all(|&l| l == 0));
        // Radius 2: {0,1} together, {10} alone.
        let labels = cut_by_ceiling(&dend, 2.0);
        assert_eq!(labels[0], labels[1]);
        assert_ne!(labels[0], labels[2]);
    }

    #[test]
    fn cut_refinement_is_nested() {
        let d = matrix_from_points(&[0.0, 1.5, 4.0, 9.0, 9.5, 30.0]);
        let dend = linkage(&d, Linkage::Average);
        for k in 2..=6usize {
            let fine = cut_by_count(&dend, k).unwrap();
            let coarse = cut_by_count(&dend, k - 1).unwrap();
            // Every fine cluster maps into exactly one coarse cluster.
            let mut mapping = std::collections::BTreeMap::new();
            for (f, c) in fine.iter().zip(&coarse) {
                let entry = mapping.entry(*f).or_insert(*c);
                assert_eq!(entry, c, "k={k}: fine cluster split across coarse");
            }
        }
    }
}
