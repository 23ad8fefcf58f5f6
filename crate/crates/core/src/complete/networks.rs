use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::CompleteError;
use crate::dist::EdgeDistribution;
use crate::ext::ExtResistance;
use crate::gw::{FamilyTree, TreeError};
use crate::network::{Edge, ResistorNetwork};
use crate::quotient::UnionFind;
use crate::solve::{try_effective_resistance, SolveError};

/// Two independent family trees; the first is rooted at the source, the second at the sink.
#[derive(Clone, Debug)]
pub struct TreePair {
    pub primary: FamilyTree,
    pub secondary: FamilyTree,
}

/// Both trees' first `depth` generations as one network. Returns the network
/// edges, the id of the secondary root and the vertex count.
fn union_of_trees(trees: &TreePair, depth: usize) -> Result<(Vec<Edge>, usize, usize), TreeError> {
    let mut edges = Vec::new();
    let mut offset = 0;
    let mut ends = [0; 2];
    for (slot, tree) in [&trees.primary, &trees.secondary].into_iter().enumerate() {
        if depth > tree.depth() && !tree.is_extinct() {
            return Err(TreeError::TreeTruncatedBeforeN {
                requested: depth,
                depth: tree.depth(),
            });
        }
        let end = tree.generation_range(depth.min(tree.depth())).end;
        for v in 1..end {
            let p = tree.parent(v).expect("non-root node");
            edges.push(Edge {
                u: offset + p,
                v: offset + v,
                r: tree.resistance(v),
            });
        }
        ends[slot] = offset + end;
        offset += end;
    }
    Ok((edges, ends[0], ends[1]))
}

/// The network made of both trees' first `k` generations plus, for each pair of
/// generation-`k` nodes, an independent model edge (conducting with
/// probability `gamma_n / n`, resistance drawn from `dist`). Non-conducting
/// pairs are left out. `A0` is the primary root, `A1` the secondary root.
pub fn build_n(
    trees: &TreePair,
    k: usize,
    n: usize,
    gamma_n: f64,
    dist: &EdgeDistribution,
    rng: &mut impl Rng,
) -> Result<ResistorNetwork, CompleteError> {
    if n < 1 || !(0.0..=n as f64).contains(&gamma_n) {
        return Err(CompleteError::ParamOutOfRange(format!(
            "gamma(n) = {gamma_n} outside [0, n = {n}]"
        )));
    }
    let (mut edges, offset, total) =
        union_of_trees(trees, k).map_err(|e| CompleteError::ParamOutOfRange(e.to_string()))?;
    let last_a = trees.primary.generation_range(k);
    let last_b = trees.secondary.generation_range(k);
    let pairs = (last_a.len() * last_b.len()) as u64;
    let p = gamma_n / n as f64;
    if p > 0.0 && pairs > 0 {
        let skip = Geometric::new(p).expect("probability in (0, 1]");
        let mut pos = 0u64;
        loop {
            pos = pos.saturating_add(skip.sample(rng));
            if pos >= pairs {
                break;
            }
            let a = last_a.start + (pos / last_b.len() as u64) as usize;
            let b = last_b.start + (pos % last_b.len() as u64) as usize;
            edges.push(Edge {
                u: a,
                v: offset + b,
                r: ExtResistance::finite(dist.sample(rng)),
            });
            pos += 1;
        }
    }
    Ok(ResistorNetwork::new(total, edges, vec![0], vec![offset]).expect("tree union is valid"))
}

/// Root-to-root resistance of a network built by [`build_n`] or [`build_m`].
pub fn rho(net: &ResistorNetwork) -> Result<ExtResistance, SolveError> {
    try_effective_resistance(net)
}

/// Alias of [`rho`] for networks built by [`build_m`].
pub fn script_r(net: &ResistorNetwork) -> Result<ExtResistance, SolveError> {
    try_effective_resistance(net)
}

/// Whether the terminals are joined by a path of finite-resistance edges.
pub fn connected_by_conducting_path(net: &ResistorNetwork) -> bool {
    let (Some(&a), Some(&b)) = (net.a0().first(), net.a1().first()) else {
        return false;
    };
    let mut uf = UnionFind::new(net.num_vertices());
    for set in [net.a0(), net.a1()] {
        for &v in set {
            uf.union(set[0], v);
        }
    }
    for e in net.edges() {
        if e.r.is_finite() {
            uf.union(e.u, e.v);
        }
    }
    uf.find(a) == uf.find(b)
}

/// The comparison network: both trees to generation `depth`, and every pair of
/// generation-`s` nodes that have descendants at generation `depth` joined by
/// one edge of resistance `(|T'_s| + |T''_s|) · bound · ln n / ln gamma`.
pub fn build_m(
    trees: &TreePair,
    depth: usize,
    s: usize,
    bound: f64,
    n: usize,
    gamma: f64,
) -> Result<ResistorNetwork, CompleteError> {
    if s > depth {
        return Err(CompleteError::ParamOutOfRange(format!(
            "s = {s} exceeds depth {depth}"
        )));
    }
    if gamma.is_nan() || gamma <= 1.0 || n < 2 || bound.is_nan() || bound <= 0.0 {
        return Err(CompleteError::ParamOutOfRange(format!(
            "need gamma > 1, n >= 2 and a positive bound (gamma = {gamma}, n = {n}, bound = {bound})"
        )));
    }
    let (mut edges, offset, total) =
        union_of_trees(trees, depth).map_err(|e| CompleteError::ParamOutOfRange(e.to_string()))?;
    let size = |t: &FamilyTree| t.generation_range(s).len();
    let cross = (size(&trees.primary) + size(&trees.secondary)) as f64 * bound * (n as f64).ln()
        / gamma.ln();
    let anchored = |t: &FamilyTree| -> Vec<usize> {
        t.generation_range(s)
            .filter(|&v| t.has_descendant_in(v, depth))
            .collect()
    };
    let a = anchored(&trees.primary);
    let b = anchored(&trees.secondary);
    for &x in &a {
        for &y in &b {
            edges.push(Edge {
                u: x,
                v: offset + y,
                r: ExtResistance::finite(cross),
            });
        }
    }
    Ok(ResistorNetwork::new(total, edges, vec![0], vec![offset]).expect("tree union is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::TrialRng;
    use rand::SeedableRng;

    fn path(len: usize, r: f64) -> FamilyTree {
        let mut counts = vec![1; len];
        counts.push(0);
        FamilyTree::from_child_counts(&counts, &vec![r; len + 1]).unwrap()
    }

    #[test]
    fn empty_generation_gives_infinity() {
        let trees = TreePair {
            primary: path(1, 1.0),
            secondary: path(3, 1.0),
        };
        let mut rng = TrialRng::seed_from_u64(1);
        let net = build_n(
            &trees,
            2,
            10,
            10.0,
            &EdgeDistribution::point(1.0).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(rho(&net).unwrap(), ExtResistance::INFINITY);
        assert!(!connected_by_conducting_path(&net));
    }

    #[test]
    fn singleton_generations_in_series() {
        let trees = TreePair {
            primary: path(2, 1.0),
            secondary: path(2, 2.0),
        };
        let mut rng = TrialRng::seed_from_u64(1);
        // gamma_n = n: the single cross pair always conducts
        let net = build_n(
            &trees,
            2,
            10,
            10.0,
            &EdgeDistribution::point(0.5).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert!((rho(&net).unwrap().value() - (2.0 + 0.5 + 4.0)).abs() < 1e-12);
        assert!(connected_by_conducting_path(&net));
    }

    #[test]
    fn comparison_network_series_case() {
        let trees = TreePair {
            primary: path(3, 1.0),
            secondary: path(3, 1.0),
        };
        let n = 100;
        let net = build_m(&trees, 3, 1, 2.0, n, 2.0).unwrap();
        let cross = 2.0 * 2.0 * (n as f64).ln() / 2f64.ln();
        assert!((script_r(&net).unwrap().value() - (1.0 + cross + 1.0)).abs() < 1e-9);
        // no descendants at the requested depth
        let short = TreePair {
            primary: path(2, 1.0),
            secondary: path(3, 1.0),
        };
        assert_eq!(
            script_r(&build_m(&short, 3, 1, 2.0, n, 2.0).unwrap()).unwrap(),
            ExtResistance::INFINITY
        );
    }
}
