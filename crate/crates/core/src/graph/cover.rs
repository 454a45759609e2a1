use super::{ColoredGraph, DistanceTable};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// A subset of centers with pairwise disjoint balls of a blown-up radius
/// that still cover the original neighborhood.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverResult {
    /// Ascending subset of the input set.
    pub centers: Vec<usize>,
    /// `3^exponent * r`.
    pub radius: u32,
    pub exponent: u32,
}

/// Picks `Z ⊆ X` and `R = 3^i r` (`i ≤ |X| - 1`) such that the `R`-balls
/// around `Z` are pairwise disjoint and cover `N_r(X)`.
///
/// Starting from `Z_0 = X`, while two `R_i`-balls meet, `Z_{i+1}` is an
/// inclusion-maximal subset of `Z_i` with disjoint `R_i`-balls, built
/// greedily in ascending id order.
pub fn vitali_cover(graph: &ColoredGraph, centers: &[usize], r: u32) -> Result<CoverResult> {
    vitali_cover_with(&DistanceTable::new(graph), centers, r)
}

pub(crate) fn vitali_cover_with(
    table: &DistanceTable<'_>,
    centers: &[usize],
    r: u32,
) -> Result<CoverResult> {
    if centers.is_empty() {
        return Err(Error::input("cover needs a nonempty center set"));
    }
    if r == 0 {
        return Err(Error::input("cover radius must be at least 1"));
    }
    table.graph().check_tuple(centers)?;
    let mut current: Vec<usize> = centers.to_vec();
    current.sort_unstable();
    current.dedup();

    // Two R-balls are disjoint iff the centers are more than 2R apart.
    let disjoint = |a: usize, b: usize, radius: u64| (table.dist(a, b) as u64) > 2 * radius;

    let mut exponent = 0u32;
    let mut radius = r as u64;
    loop {
        let all_disjoint = current
            .iter()
            .enumerate()
            .all(|(i, &a)| current[i + 1..].iter().all(|&b| disjoint(a, b, radius)));
        if all_disjoint {
            let radius = u32::try_from(radius)
                .map_err(|_| Error::input("cover radius overflows u32"))?;
            return Ok(CoverResult {
                centers: current,
                radius,
                exponent,
            });
        }
        let mut kept: Vec<usize> = Vec::new();
        for &z in &current {
            if kept.iter().all(|&y| disjoint(y, z, radius)) {
                kept.push(z);
            }
        }
        debug_assert!(kept.len() < current.len());
        current = kept;
        exponent += 1;
        radius *= 3;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{ball, Vocabulary};

    fn path(n: usize) -> ColoredGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        ColoredGraph::build(Vocabulary::empty(), n, &edges, &[]).unwrap()
    }

    /// Checks every postcondition with explicit ball sets.
    fn postconditions_hold(g: &ColoredGraph, x: &[usize], r: u32, c: &CoverResult) -> bool {
        let subset = c.centers.iter().all(|z| x.contains(z));
        let form = c.radius == 3u32.pow(c.exponent) * r && (c.exponent as usize) < x.len().max(1);
        let balls: Vec<Vec<usize>> = c
            .centers
            .iter()
            .map(|&z| ball(g, &[z], c.radius).unwrap())
            .collect();
        let disjoint = balls.iter().enumerate().all(|(i, a)| {
            balls[i + 1..]
                .iter()
                .all(|b| a.iter().all(|v| !b.contains(v)))
        });
        let covered = ball(g, &c.centers, c.radius).unwrap();
        let cover = ball(g, x, r).unwrap().iter().all(|v| covered.contains(v));
        subset && form && disjoint && cover
    }

    #[test]
    fn singleton() {
        let g = path(4);
        let c = vitali_cover(&g, &[2], 1).unwrap();
        assert_eq!(c, CoverResult { centers: vec![2], radius: 1, exponent: 0 });
    }

    #[test]
    fn far_apart_pair_is_kept() {
        let g = path(9);
        let c = vitali_cover(&g, &[0, 8], 1).unwrap();
        assert_eq!(c, CoverResult { centers: vec![0, 8], radius: 1, exponent: 0 });
        assert!(postconditions_hold(&g, &[0, 8], 1, &c));
    }

    #[test]
    fn close_pair_blows_up() {
        let g = path(9);
        let c = vitali_cover(&g, &[0, 1], 1).unwrap();
        assert_eq!(c, CoverResult { centers: vec![0], radius: 3, exponent: 1 });
        assert!(postconditions_hold(&g, &[0, 1], 1, &c));
    }

    #[test]
    fn worst_case_chain_uses_all_exponents() {
        // centers at positions 0, 1, 3, 9 on a long path force repeated merging
        let g = path(40);
        let x = [0, 1, 3, 9];
        let c = vitali_cover(&g, &x, 1).unwrap();
        assert!(postconditions_hold(&g, &x, 1, &c));
        assert!((c.exponent as usize) < x.len());
    }

    #[test]
    fn rejects_degenerate_input() {
        let g = path(3);
        assert!(vitali_cover(&g, &[], 1).is_err());
        assert!(vitali_cover(&g, &[0], 0).is_err());
    }
}
