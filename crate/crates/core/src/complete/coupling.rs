use std::collections::{BTreeMap, HashMap, HashSet};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use super::{CompleteError, EdgeLaw, ExplorationLayers};
use crate::dist::BinomialCdf;
use crate::ext::ExtResistance;
use crate::gw::FamilyTree;
use crate::network::VertexId;

/// A vertex of the coupled Galton–Watson tree: either a model vertex, or a
/// fresh label `n + k` (`k ≥ 1`) that lives outside the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CoupledLabel {
    Vertex(VertexId),
    Fresh(u64),
}

/// Output of one run of the coupling.
#[derive(Clone, Debug, Serialize)]
pub struct CoupledTrees {
    #[serde(skip)]
    pub exploration_tree: FamilyTree,
    /// Model vertex behind each node of `exploration_tree`.
    pub exploration_vertices: Vec<VertexId>,
    #[serde(skip)]
    pub branching_tree: FamilyTree,
    pub branching_labels: Vec<CoupledLabel>,
    /// The branching tree is a labelled subtree of the exploration tree.
    pub inclusion: bool,
    /// Offspring counts of branching-tree nodes above the last generation.
    pub offspring: Vec<usize>,
    /// First fresh index not used by this run.
    pub next_fresh: u64,
}

impl CoupledTrees {
    pub fn depth(&self) -> usize {
        self.exploration_tree.depth()
    }

    pub fn exploration_vertex_set(&self) -> HashSet<VertexId> {
        self.exploration_vertices.iter().copied().collect()
    }

    /// Whether every exploration-tree node of depth `d` lies within conducting
    /// distance `d` of the root, i.e. the tree sits inside the full layers.
    pub fn is_within(&self, layers: &ExplorationLayers) -> bool {
        let mut dist = HashMap::new();
        for (k, layer) in layers.layers.iter().enumerate() {
            for &v in layer {
                dist.insert(v, k);
            }
        }
        self.exploration_vertices
            .iter()
            .enumerate()
            .all(|(node, v)| {
                dist.get(v)
                    .is_some_and(|&k| k <= self.exploration_tree.generation_of(node))
            })
    }
}

/// Smallest `m` with `P{Poisson(delta) ≤ m} ≥ v`.
fn poisson_quantile(v: f64, delta: f64) -> u64 {
    let mut term = (-delta).exp();
    let mut acc = term;
    let mut m = 0u64;
    while acc < v {
        m += 1;
        term *= delta / m as f64;
        if acc + term == acc && m as f64 > delta {
            // the CDF has saturated below v through rounding
            break;
        }
        acc += term;
    }
    m
}

/// `Σ_q P{Bin(trials, p) = q} · P{u ≤ r | q}` for the coupling's inverse-CDF step.
/// Equals `P{Poisson(delta) ≤ r}` exactly in exact arithmetic.
pub fn coupling_marginal(trials: u64, p: f64, delta: f64, r: u64) -> f64 {
    let target = crate::dist::poisson_cdf(r, delta);
    let mut beta = BinomialCdf::new(trials, p);
    let mut total = 0.0;
    for q in 0..=trials {
        let lo = beta.cdf(q as i64 - 1);
        if lo >= target {
            break;
        }
        let mass = beta.pmf(q);
        if mass > 0.0 {
            let frac = ((target - lo) / mass).clamp(0.0, 1.0);
            total += mass * frac;
        }
    }
    total
}

/// Runs the coupling from vertex 0 for `m` generations.
pub fn coupled_growth(
    law: &mut EdgeLaw,
    delta: f64,
    m: usize,
    aux: &mut impl Rng,
) -> Result<CoupledTrees, CompleteError> {
    coupled_growth_avoiding(law, 0, &HashSet::new(), delta, m, 1, aux)
}

/// The coupling around `root`, never using vertices of `avoid` in the
/// exploration tree. Fresh labels start at index `fresh_start`.
///
/// Frontiers are processed in ascending label order. A model vertex with `q`
/// available conducting neighbours receives `u = π⁻¹(V)` children, where
/// `V = β(q−1) + U·(β(q) − β(q−1))`, `β` the binomial CDF over the available
/// candidates and `π` the Poisson(`delta`) CDF. Fresh vertices receive
/// Poisson(`delta`) children. Uniforms, Poisson draws and resistances of fresh
/// edges come from `aux`; model edges come from `law`.
pub fn coupled_growth_avoiding(
    law: &mut EdgeLaw,
    root: VertexId,
    avoid: &HashSet<VertexId>,
    delta: f64,
    m: usize,
    fresh_start: u64,
    aux: &mut impl Rng,
) -> Result<CoupledTrees, CompleteError> {
    if !(delta > 1.0 && delta < law.gamma_n()) {
        return Err(CompleteError::ParamOutOfRange(format!(
            "delta = {delta} must lie in (1, gamma(n) = {})",
            law.gamma_n()
        )));
    }
    if m < 1 {
        return Err(CompleteError::ParamOutOfRange(
            "m must be at least 1".into(),
        ));
    }
    let n = law.n();
    let p = law.conducting_probability();
    let y_law = Poisson::new(delta).expect("delta > 1");
    let in_range = |v: VertexId| (1..=n).contains(&v);

    let mut used: HashSet<VertexId> = avoid.iter().copied().filter(|&v| in_range(v)).collect();
    used.insert(root);
    let mut used_in_range = used.iter().filter(|&&v| in_range(v)).count();

    let mut exploration_tree = FamilyTree::root_only();
    let mut exploration_vertices = vec![root];
    let mut branching_tree = FamilyTree::root_only();
    let mut branching_labels = vec![CoupledLabel::Vertex(root)];
    let mut offspring = Vec::new();
    let mut next_fresh = fresh_start;
    let mut tree_edges: HashSet<(VertexId, VertexId)> = HashSet::new();

    for _ in 0..m {
        // exploration step
        let gen = exploration_tree.depth();
        let mut frontier: Vec<VertexId> = exploration_tree
            .generation_range(gen)
            .map(|i| exploration_vertices[i])
            .collect();
        frontier.sort_unstable();
        let mut kids_of: HashMap<VertexId, Vec<(VertexId, ExtResistance)>> = HashMap::new();
        let mut trials_of: HashMap<VertexId, u64> = HashMap::new();
        for &i in &frontier {
            trials_of.insert(i, (n - used_in_range) as u64);
            let kids: Vec<_> = law
                .neighbors(i)
                .iter()
                .copied()
                .filter(|&(w, _)| in_range(w) && !used.contains(&w))
                .collect();
            for &(w, _) in &kids {
                used.insert(w);
                tree_edges.insert((i, w));
            }
            used_in_range += kids.len();
            kids_of.insert(i, kids);
        }
        let mut added = Vec::new();
        exploration_tree.push_generation(|node| {
            let kids = &kids_of[&exploration_vertices[node]];
            added.extend(kids.iter().map(|k| k.0));
            kids.iter().map(|k| k.1)
        });
        exploration_vertices.extend(added);

        // branching step
        let gen = branching_tree.depth();
        let mut frontier: Vec<CoupledLabel> = branching_tree
            .generation_range(gen)
            .map(|i| branching_labels[i])
            .collect();
        frontier.sort_unstable();
        let mut children: BTreeMap<CoupledLabel, Vec<(CoupledLabel, ExtResistance)>> =
            BTreeMap::new();
        for &j in &frontier {
            let mut out = Vec::new();
            let fresh_count = match j {
                CoupledLabel::Vertex(i) => {
                    let kids = &kids_of[&i];
                    let q = kids.len() as u64;
                    let mut beta = BinomialCdf::new(trials_of[&i], p);
                    let lo = beta.cdf(q as i64 - 1);
                    let hi = beta.cdf(q as i64);
                    let v = lo + aux.random::<f64>() * (hi - lo);
                    let u = poisson_quantile(v, delta);
                    out.extend(
                        kids.iter()
                            .take(u.min(q) as usize)
                            .map(|&(w, r)| (CoupledLabel::Vertex(w), r)),
                    );
                    u.saturating_sub(q)
                }
                CoupledLabel::Fresh(_) => y_law.sample(aux) as u64,
            };
            for _ in 0..fresh_count {
                let r = ExtResistance::finite(law.distribution().sample(aux));
                out.push((CoupledLabel::Fresh(next_fresh), r));
                next_fresh += 1;
            }
            children.insert(j, out);
        }
        let mut added = Vec::new();
        branching_tree.push_generation(|node| {
            let kids = &children[&branching_labels[node]];
            offspring.push(kids.len());
            added.extend(kids.iter().map(|k| k.0));
            kids.iter().map(|k| k.1)
        });
        branching_labels.extend(added);
    }

    let inclusion = (1..branching_tree.len()).all(|node| {
        let parent = branching_labels[branching_tree.parent(node).expect("non-root")];
        match (parent, branching_labels[node]) {
            (CoupledLabel::Vertex(a), CoupledLabel::Vertex(b)) => tree_edges.contains(&(a, b)),
            _ => false,
        }
    });

    Ok(CoupledTrees {
        exploration_tree,
        exploration_vertices,
        branching_tree,
        branching_labels,
        inclusion,
        offspring,
        next_fresh,
    })
}

/// Couplings around `0` and around `∞`, the second avoiding every vertex of
/// the first exploration tree and using its own auxiliary stream and fresh labels.
pub fn coupled_pair(
    law: &mut EdgeLaw,
    delta: f64,
    m: usize,
    aux_primary: &mut impl Rng,
    aux_secondary: &mut impl Rng,
) -> Result<(CoupledTrees, CoupledTrees), CompleteError> {
    let first = coupled_growth(law, delta, m, aux_primary)?;
    let avoid = first.exploration_vertex_set();
    let inf = law.infinity();
    let second =
        coupled_growth_avoiding(law, inf, &avoid, delta, m, first.next_fresh, aux_secondary)?;
    Ok((first, second))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{poisson_cdf, EdgeDistribution};
    use crate::seed::TrialRng;
    use rand::SeedableRng;

    #[test]
    fn quantile_inverts_cdf() {
        for delta in [0.5, 1.5, 4.0] {
            for m in 0..12u64 {
                let c = poisson_cdf(m, delta);
                assert_eq!(poisson_quantile(c, delta), m);
                if m > 0 {
                    let below = poisson_cdf(m - 1, delta);
                    assert_eq!(poisson_quantile(0.5 * (below + c), delta), m);
                }
            }
            assert_eq!(poisson_quantile(0.0, delta), 0);
            assert!(poisson_quantile(1.0, delta) < 60);
        }
    }

    #[test]
    fn marginal_identity_small_case() {
        for r in 0..=10 {
            let got = coupling_marginal(95, 2.0 / 100.0, 1.5, r);
            assert!((got - poisson_cdf(r, 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn trees_are_consistent() {
        let dist = EdgeDistribution::uniform(0.5, 1.5).unwrap();
        let mut law = EdgeLaw::new(2000, 2.0, dist, TrialRng::seed_from_u64(4)).unwrap();
        let mut aux = TrialRng::seed_from_u64(5);
        let mut aux2 = TrialRng::seed_from_u64(6);
        let (a, b) = coupled_pair(&mut law, 1.5, 4, &mut aux, &mut aux2).unwrap();
        for t in [&a, &b] {
            assert_eq!(t.exploration_tree.depth(), 4);
            assert_eq!(t.branching_tree.depth(), 4);
            assert_eq!(
                t.offspring.len(),
                t.branching_tree.generation_range(4).start
            );
            assert_eq!(t.branching_labels.len(), t.branching_tree.len());
        }
        let va = a.exploration_vertex_set();
        assert!(b.exploration_vertices.iter().all(|v| !va.contains(v)));
        assert_eq!(b.exploration_vertices[0], law.infinity());
        let layers = super::super::explore_layers(&mut law, 0, 4);
        assert!(a.is_within(&layers));
    }

    #[test]
    fn rejects_bad_delta() {
        let dist = EdgeDistribution::point(1.0).unwrap();
        let mut law = EdgeLaw::new(100, 2.0, dist, TrialRng::seed_from_u64(1)).unwrap();
        let mut aux = TrialRng::seed_from_u64(2);
        assert!(coupled_growth(&mut law, 2.5, 3, &mut aux).is_err());
        assert!(coupled_growth(&mut law, 1.0, 3, &mut aux).is_err());
        assert!(coupled_growth(&mut law, 1.5, 0, &mut aux).is_err());
    }
}
