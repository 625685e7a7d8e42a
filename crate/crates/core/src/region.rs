//! Region of competence: the `K` nearest training patterns of a query and
//! their normalized inverse-distance weights.

use std::io::Write;

use crate::dataset::Dataset;
use crate::learners::{Ensemble, Regressor};
use crate::{Error, Result};

/// Distances below this count as zero in [`inverse_distance_weights`].
pub const ZERO_DISTANCE: f64 = 1e-12;

/// Exact Euclidean k-NN by brute force. Results are sorted by ascending
/// distance, ties broken by lower row index.
pub fn find_neighbors(x: &[f64], reference: &Dataset, k: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    if x.len() != reference.n_features() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_features(),
            found: x.len(),
        });
    }
    if k == 0 || k > reference.n_instances() {
        return Err(Error::invalid(format!(
            "k = {k} must be between 1 and the reference size {}",
            reference.n_instances()
        )));
    }
    let mut dist: Vec<(f64, usize)> = reference
        .rows()
        .enumerate()
        .map(|(i, row)| {
            let sq: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            (sq, i)
        })
        .collect();
    let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < dist.len() {
        dist.select_nth_unstable_by(k - 1, by_distance);
        dist.truncate(k);
    }
    dist.sort_unstable_by(by_distance);
    Ok(dist.into_iter().map(|(sq, i)| (i, sq.sqrt())).unzip())
}

/// `d_k = (1/dist_k) / sum_j (1/dist_j)`.
///
/// When some distances are (numerically) zero the weights are the limit of
/// that formula: `1/z` on each of the `z` zero-distance entries, `0` elsewhere.
pub fn inverse_distance_weights(distances: &[f64]) -> Vec<f64> {
    let zeros = distances.iter().filter(|&&d| d < ZERO_DISTANCE).count();
    if zeros > 0 {
        let w = 1.0 / zeros as f64;
        return distances
            .iter()
            .map(|&d| if d < ZERO_DISTANCE { w } else { 0.0 })
            .collect();
    }
    let total: f64 = distances.iter().map(|d| d.recip()).sum();
    distances.iter().map(|d| d.recip() / total).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionOfCompetence {
    neighbor_indices: Vec<usize>,
    distances: Vec<f64>,
    d_weights: Vec<f64>,
    observed: Vec<f64>,
    /// Row-major `N x K`: entry `(n, k)` is member `n` evaluated on neighbor `k`.
    member_predictions: Vec<f64>,
    n_members: usize,
}

impl RegionOfCompetence {
    /// Assembles a region from precomputed parts. `member_predictions[n]` holds
    /// member `n`'s outputs on the neighbors in order.
    pub fn from_parts(
        neighbor_indices: Vec<usize>,
        distances: Vec<f64>,
        d_weights: Vec<f64>,
        observed: Vec<f64>,
        member_predictions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = neighbor_indices.len();
        if k == 0 {
            return Err(Error::invalid("region needs at least one neighbor"));
        }
        if distances.len() != k || d_weights.len() != k || observed.len() != k {
            return Err(Error::invalid(format!(
                "region parts disagree on K: {} indices, {} distances, {} weights, {} observed",
                k,
                distances.len(),
                d_weights.len(),
                observed.len()
            )));
        }
        if member_predictions.is_empty() {
            return Err(Error::invalid("region needs at least one member"));
        }
        if let Some(row) = member_predictions.iter().find(|r| r.len() != k) {
            return Err(Error::invalid(format!(
                "member prediction row has {} entries, expected K = {k}",
                row.len()
            )));
        }
        Ok(RegionOfCompetence {
            n_members: member_predictions.len(),
            neighbor_indices,
            distances,
            d_weights,
            observed,
            member_predictions: member_predictions.into_iter().flatten().collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.neighbor_indices.len()
    }

    pub fn n_members(&self) -> usize {
        self.n_members
    }

    pub fn neighbor_indices(&self) -> &[usize] {
        &self.neighbor_indices
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn d_weights(&self) -> &[f64] {
        &self.d_weights
    }

    pub fn observed(&self) -> &[f64] {
        &self.observed
    }

    /// Member `n`'s predictions on the `K` neighbors.
    pub fn member_predictions(&self, n: usize) -> &[f64] {
        let k = self.k();
        &self.member_predictions[n * k..(n + 1) * k]
    }

    /// Writes `rank,neighbor,distance,d_k,observed` rows.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "rank,neighbor,distance,d_k,observed")?;
        for k in 0..self.k() {
            writeln!(
                out,
                "{},{},{},{},{}",
                k + 1,
                self.neighbor_indices[k],
                self.distances[k],
                self.d_weights[k],
                self.observed[k]
            )?;
        }
        Ok(())
    }
}

/// Runs [`find_neighbors`] and [`inverse_distance_weights`], looks up the
/// neighbors' targets and evaluates every ensemble member on every neighbor.
pub fn build_region<M: Regressor>(
    x: &[f64],
    reference: &Dataset,
    ensemble: &Ensemble<M>,
    k: usize,
) -> Result<RegionOfCompetence> {
    if ensemble.n_features() != reference.n_features() {
        return Err(Error::DimensionMismatch {
            expected: reference.n_features(),
            found: ensemble.n_features(),
        });
    }
    let (indices, distances) = find_neighbors(x, reference, k)?;
    let d_weights = inverse_distance_weights(&distances);
    let observed = indices.iter().map(|&i| reference.target(i)).collect();
    let mut member_predictions = Vec::with_capacity(ensemble.len() * k);
    for m in ensemble.members() {
        member_predictions.extend(indices.iter().map(|&i| m.evaluate(reference.row(i))));
    }
    Ok(RegionOfCompetence {
        n_members: ensemble.len(),
        neighbor_indices: indices,
        distances,
        d_weights,
        observed,
        member_predictions,
    })
}

/// Caches every member's prediction on every reference row so that building
/// many regions over one training fold costs a lookup per neighbor instead of
/// a tree traversal.
#[derive(Debug, Clone)]
pub struct RegionBuilder<'a> {
    reference: &'a Dataset,
    n_members: usize,
    /// Row-major `N x n_reference`.
    cache: Vec<f64>,
}

impl<'a> RegionBuilder<'a> {
    pub fn new<M: Regressor>(reference: &'a Dataset, ensemble: &Ensemble<M>) -> Result<Self> {
        if ensemble.n_features() != reference.n_features() {
            return Err(Error::DimensionMismatch {
                expected: reference.n_features(),
                found: ensemble.n_features(),
            });
        }
        let mut cache = Vec::with_capacity(ensemble.len() * reference.n_instances());
        for m in ensemble.members() {
            cache.extend(reference.rows().map(|row| m.evaluate(row)));
        }
        Ok(RegionBuilder {
            reference,
            n_members: ensemble.len(),
            cache,
        })
    }

    pub fn reference(&self) -> &Dataset {
        self.reference
    }

    pub fn build(&self, x: &[f64], k: usize) -> Result<RegionOfCompetence> {
        let (indices, distances) = find_neighbors(x, self.reference, k)?;
        let d_weights = inverse_distance_weights(&distances);
        let observed = indices.iter().map(|&i| self.reference.target(i)).collect();
        let n_ref = self.reference.n_instances();
        let mut member_predictions = Vec::with_capacity(self.n_members * k);
        for n in 0..self.n_members {
            let row = &self.cache[n * n_ref..(n + 1) * n_ref];
            member_predictions.extend(indices.iter().map(|&i| row[i]));
        }
        Ok(RegionOfCompetence {
            n_members: self.n_members,
            neighbor_indices: indices,
            distances,
            d_weights,
            observed,
            member_predictions,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{generate_ensemble, Node, RegressionTree, TreeParams};
    use proptest::prelude::*;

    fn line(xs: &[f64], ys: &[f64]) -> Dataset {
        Dataset::from_rows("t", xs.iter().map(|&x| vec![x]).collect(), ys.to_vec()).unwrap()
    }

    fn constant_tree(v: f64) -> RegressionTree {
        RegressionTree::from_text(&format!("tree n_features=1\n0 leaf {v:?}\n")).unwrap()
    }

    #[test]
    fn neighbors_on_a_line() {
        let d = line(&[0.0, 0.5, 1.0], &[10.0, 20.0, 30.0]);
        let (idx, dist) = find_neighbors(&[0.1], &d, 2).unwrap();
        assert_eq!(idx, vec![0, 1]);
        assert!((dist[0] - 0.1).abs() < 1e-15);
        assert!((dist[1] - 0.4).abs() < 1e-15);

        let (idx, dist) = find_neighbors(&[1.0], &d, 1).unwrap();
        assert_eq!((idx, dist), (vec![2], vec![0.0]));

        // 0.25 is equidistant from rows 0 and 1
        let (idx, _) = find_neighbors(&[0.25], &d, 1).unwrap();
        assert_eq!(idx, vec![0]);
        let (idx, _) = find_neighbors(&[0.75], &d, 3).unwrap();
        assert_eq!(idx, vec![1, 2, 0]);
    }

    #[test]
    fn neighbor_errors() {
        let d = line(&[0.0, 0.5], &[0.0, 1.0]);
        assert!(find_neighbors(&[0.1], &d, 3).is_err());
        assert!(find_neighbors(&[0.1], &d, 0).is_err());
        assert!(matches!(
            find_neighbors(&[0.1, 0.2], &d, 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn weights_examples() {
        let w = inverse_distance_weights(&[1.0, 3.0]);
        assert!((w[0] - 0.75).abs() < 1e-15 && (w[1] - 0.25).abs() < 1e-15);
        assert_eq!(inverse_distance_weights(&[2.0; 4]), vec![0.25; 4]);
        assert_eq!(inverse_distance_weights(&[0.0, 5.0]), vec![1.0, 0.0]);
        assert_eq!(inverse_distance_weights(&[0.0, 5.0, 0.0, 1.0]), vec![0.5, 0.0, 0.5, 0.0]);
        assert_eq!(inverse_distance_weights(&[4.2]), vec![1.0]);
    }

    #[test]
    fn region_of_constant_member() {
        let d = line(&[0.0, 0.5, 1.0, 1.5], &[1.0, 2.0, 3.0, 4.0]);
        let e = Ensemble::from_members(vec![constant_tree(0.7)]).unwrap();
        let r = build_region(&[1.2], &d, &e, 3).unwrap();
        assert_eq!(r.member_predictions(0), &[0.7, 0.7, 0.7]);
        assert_eq!(r.n_members(), 1);

        let d = line(&[0.0, 0.5, 1.0], &[10.0, 20.0, 30.0]);
        let r = build_region(&[0.1], &d, &e, 2).unwrap();
        assert_eq!(r.observed(), &[10.0, 20.0]);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 3);
    }

    #[test]
    fn cached_builder_matches_direct() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.123).fract()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
        let d = line(&xs, &ys);
        let e = generate_ensemble(&d, 5, &TreeParams::default(), 3).unwrap();
        let builder = RegionBuilder::new(&d, &e).unwrap();
        for q in [0.0, 0.31, 0.5, 0.99] {
            assert_eq!(builder.build(&[q], 7).unwrap(), build_region(&[q], &d, &e, 7).unwrap());
        }
        let bad = Ensemble::from_members(vec![RegressionTree::from_text("tree n_features=2\n0 leaf 1.0\n").unwrap()]).unwrap();
        assert!(RegionBuilder::new(&d, &bad).is_err());
        assert!(matches!(constant_tree(1.0).nodes()[0], Node::Leaf { .. }));
    }

    proptest! {
        #[test]
        fn weights_sum_to_one_and_scale_free(
            dists in prop::collection::vec(1e-6f64..10.0, 1..20),
            scale in 1e-3f64..1e3,
        ) {
            let w = inverse_distance_weights(&dists);
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            let scaled: Vec<f64> = dists.iter().map(|d| d * scale).collect();
            for (a, b) in w.iter().zip(inverse_distance_weights(&scaled)) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }

        #[test]
        fn region_invariants(
            pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.0f64..1.0), 5..40),
            q in (0.0f64..1.0, 0.0f64..1.0),
            k in 1usize..5,
        ) {
            let rows: Vec<Vec<f64>> = pts.iter().map(|p| vec![p.0, p.1]).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.2).collect();
            let d = Dataset::from_rows("p", rows.clone(), ys.clone()).unwrap();
            let e = generate_ensemble(&d, 3, &TreeParams::default(), 1).unwrap();
            let x = [q.0, q.1];
            let r = build_region(&x, &d, &e, k).unwrap();
            prop_assert!(r.distances().windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(r.d_weights().windows(2).all(|w| w[0] >= w[1]));
            prop_assert!((r.d_weights().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            for n in 0..3 {
                let expect: Vec<f64> = r.neighbor_indices().iter().map(|&i| e.members()[n].evaluate(d.row(i))).collect();
                prop_assert_eq!(r.member_predictions(n), expect.as_slice());
            }

            // reversing the reference order relabels neighbors only
            let rev_rows: Vec<Vec<f64>> = rows.iter().rev().cloned().collect();
            let rev_ys: Vec<f64> = ys.iter().rev().copied().collect();
            let rev = Dataset::from_rows("p", rev_rows, rev_ys).unwrap();
            let (ia, da) = find_neighbors(&x, &d, k).unwrap();
            let (ib, db) = find_neighbors(&x, &rev, k).unwrap();
            let mut pa: Vec<(u64, u64)> = ia.iter().zip(&da).map(|(&i, dd)| (dd.to_bits(), d.target(i).to_bits())).collect();
            let mut pb: Vec<(u64, u64)> = ib.iter().zip(&db).map(|(&i, dd)| (dd.to_bits(), rev.target(i).to_bits())).collect();
            pa.sort_unstable();
            pb.sort_unstable();
            // a distance tie straddling position k may legitimately pick another row
            let (_, all) = find_neighbors(&x, &d, d.n_instances()).unwrap();
            if k == d.n_instances() || all[k - 1] < all[k] {
                prop_assert_eq!(pa, pb);
            }
        }
    }
}
