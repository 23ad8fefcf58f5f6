//! Galton–Watson family trees with edge resistances.
//!
//! Nodes are stored in breadth-first order, so each generation and each
//! sibling group occupies a contiguous index range. A node's label
//! `⟨i₁,…,iₙ⟩` is recovered from parent links and child ranks.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{EdgeDistribution, OffspringLaw};
use crate::ext::ExtResistance;
use crate::network::{Edge, ResistorNetwork};

pub const DEFAULT_NODE_CAP: usize = 200_000;
pub const DEFAULT_DEPTH_CAP: usize = 24;
pub const DEFAULT_STABILIZATION: f64 = 1e-4;

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error(
        "generation {requested} was not realised: the tree is known only to generation {depth}"
    )]
    TreeTruncatedBeforeN { requested: usize, depth: usize },
    #[error("child counts do not describe a tree: {0}")]
    Malformed(String),
    #[error("generation 0 cannot be a sink: the root is the source")]
    RootIsSink,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyTree {
    parent: Vec<u32>,
    child_rank: Vec<u32>,
    /// Resistance of the edge to the parent; the root's entry is unused.
    resistance: Vec<ExtResistance>,
    first_child: Vec<u32>,
    child_count: Vec<u32>,
    /// Generation `g` is `generation_start[g]..generation_start[g + 1]`.
    generation_start: Vec<usize>,
    truncated: bool,
}

/// What happened when a tree was asked to grow one more generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    Grew,
    Extinct,
    NodeCapReached,
}

impl FamilyTree {
    pub fn root_only() -> Self {
        FamilyTree {
            parent: vec![NO_PARENT],
            child_rank: vec![0],
            resistance: vec![ExtResistance::ZERO],
            first_child: vec![0],
            child_count: vec![0],
            generation_start: vec![0, 1],
            truncated: false,
        }
    }

    /// Builds a fully known (hence finite) tree from breadth-first child counts.
    ///
    /// `resistances[v]` is the resistance of the edge above node `v`; entry 0 is ignored.
    pub fn from_child_counts(counts: &[usize], resistances: &[f64]) -> Result<Self, TreeError> {
        let total = 1 + counts.iter().sum::<usize>();
        if counts.len() != total {
            return Err(TreeError::Malformed(format!(
                "{} counts for a tree of {} nodes",
                counts.len(),
                total
            )));
        }
        if resistances.len() != total {
            return Err(TreeError::Malformed("one resistance per node".into()));
        }
        let mut tree = FamilyTree::root_only();
        let mut next = 0usize;
        while !tree.is_extinct() {
            let gen = tree.depth();
            for v in tree.generation_range(gen) {
                let c = counts[v];
                tree.first_child[v] = (tree.parent.len()) as u32;
                tree.child_count[v] = c as u32;
                for rank in 1..=c {
                    let idx = tree.parent.len();
                    let r = ExtResistance::new(resistances[idx])
                        .map_err(|e| TreeError::Malformed(e.to_string()))?;
                    tree.push_node(v, rank, r);
                }
                next += 1;
            }
            tree.generation_start.push(tree.parent.len());
        }
        debug_assert_eq!(next, total);
        Ok(tree)
    }

    fn push_node(&mut self, parent: usize, rank: usize, r: ExtResistance) {
        self.parent.push(parent as u32);
        self.child_rank.push(rank as u32);
        self.resistance.push(r);
        self.first_child.push(0);
        self.child_count.push(0);
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    /// Index of the last generation whose membership is fully known.
    pub fn depth(&self) -> usize {
        self.generation_start.len() - 2
    }

    /// True when the last known generation is empty, so the whole tree is known.
    pub fn is_extinct(&self) -> bool {
        let g = self.depth();
        self.generation_start[g] == self.generation_start[g + 1]
    }

    /// True when growth stopped because of the node cap.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn generation_range(&self, g: usize) -> std::ops::Range<usize> {
        if g > self.depth() {
            let end = self.len();
            return end..end;
        }
        self.generation_start[g]..self.generation_start[g + 1]
    }

    /// `|T_g|`, or `None` if generation `g` was not realised.
    pub fn generation_size(&self, g: usize) -> Option<usize> {
        if g <= self.depth() {
            Some(self.generation_range(g).len())
        } else if self.is_extinct() {
            Some(0)
        } else {
            None
        }
    }

    pub fn generation_of(&self, v: usize) -> usize {
        self.generation_start.partition_point(|&s| s <= v) - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != NO_PARENT).then(|| self.parent[v] as usize)
    }

    pub fn resistance(&self, v: usize) -> ExtResistance {
        self.resistance[v]
    }

    /// Whether `v`'s offspring have been sampled.
    pub fn children_known(&self, v: usize) -> bool {
        self.generation_of(v) < self.depth() || self.is_extinct()
    }

    pub fn children(&self, v: usize) -> std::ops::Range<usize> {
        if !self.children_known(v) {
            return 0..0;
        }
        let s = self.first_child[v] as usize;
        s..s + self.child_count[v] as usize
    }

    pub fn child_count(&self, v: usize) -> Option<usize> {
        self.children_known(v).then(|| self.child_count[v] as usize)
    }

    /// The label `⟨i₁,…,iₙ⟩`; the root is `⟨0⟩`.
    pub fn label(&self, v: usize) -> Vec<u32> {
        if v == 0 {
            return vec![0];
        }
        let mut out = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            out.push(self.child_rank[cur]);
            cur = p;
        }
        out.reverse();
        out
    }

    /// Samples the next generation. Offspring counts are drawn node by node in
    /// index order, each child's resistance right after its parent's count.
    pub fn grow_generation<R: Rng + ?Sized>(
        &mut self,
        law: &OffspringLaw,
        edges: &EdgeDistribution,
        node_cap: usize,
        rng: &mut R,
    ) -> Growth {
        if self.is_extinct() {
            return Growth::Extinct;
        }
        if self.truncated {
            return Growth::NodeCapReached;
        }
        let gen = self.depth();
        let range = self.generation_range(gen);
        let before = self.len();
        for v in range.clone() {
            let c = law.sample(rng);
            if self.len() + c > node_cap {
                self.rollback(before, range);
                self.truncated = true;
                return Growth::NodeCapReached;
            }
            self.first_child[v] = self.len() as u32;
            self.child_count[v] = c as u32;
            for rank in 1..=c {
                let r = ExtResistance::finite(edges.sample(rng));
                self.push_node(v, rank, r);
            }
        }
        self.generation_start.push(self.len());
        if self.is_extinct() {
            Growth::Extinct
        } else {
            Growth::Grew
        }
    }

    /// Appends one generation whose children are supplied by `children(v)` for
    /// each node `v` of the current last generation, in index order.
    pub(crate) fn push_generation<I>(&mut self, mut children: impl FnMut(usize) -> I)
    where
        I: IntoIterator<Item = ExtResistance>,
    {
        let gen = self.depth();
        for v in self.generation_range(gen) {
            self.first_child[v] = self.len() as u32;
            let mut rank = 0;
            for r in children(v) {
                rank += 1;
                self.push_node(v, rank, r);
            }
            self.child_count[v] = rank as u32;
        }
        self.generation_start.push(self.len());
    }

    fn rollback(&mut self, len: usize, parents: std::ops::Range<usize>) {
        self.parent.truncate(len);
        self.child_rank.truncate(len);
        self.resistance.truncate(len);
        self.first_child.truncate(len);
        self.child_count.truncate(len);
        for v in parents {
            self.first_child[v] = 0;
            self.child_count[v] = 0;
        }
    }

    /// For every node `v` of generation `< n`, the resistance between `v` and its
    /// generation-`n` descendants inside `t(v)`, with generation `n` short-circuited.
    /// Nodes of generation `n` get 0. Requires `n <= depth`.
    fn values_to_generation(&self, n: usize) -> Vec<ExtResistance> {
        let end = self.generation_range(n).end;
        let mut value = vec![ExtResistance::ZERO; end];
        for g in (0..n).rev() {
            for v in self.generation_range(g) {
                let s = self.first_child[v] as usize;
                let c = self.child_count[v] as usize;
                value[v] = ExtResistance::parallel_all(
                    (s..s + c).map(|ch| self.resistance[ch].series(value[ch])),
                );
            }
        }
        value
    }

    /// `R(T_[n])`: resistance between the root and generation `n`.
    pub fn truncated_resistance(&self, n: usize) -> Result<ExtResistance, TreeError> {
        if n > self.depth() {
            if self.is_extinct() {
                return Ok(ExtResistance::INFINITY);
            }
            return Err(TreeError::TreeTruncatedBeforeN {
                requested: n,
                depth: self.depth(),
            });
        }
        Ok(self.values_to_generation(n)[0])
    }

    /// Resistance from `v` to its generation-`n` descendants, ∞ if it has none.
    pub fn subtree_resistance(&self, v: usize, n: usize) -> Result<ExtResistance, TreeError> {
        let g = self.generation_of(v);
        if g > n {
            return Ok(ExtResistance::INFINITY);
        }
        if n > self.depth() {
            if self.is_extinct() {
                return Ok(ExtResistance::INFINITY);
            }
            return Err(TreeError::TreeTruncatedBeforeN {
                requested: n,
                depth: self.depth(),
            });
        }
        Ok(self.values_to_generation(n)[v])
    }

    /// Resistance of the unique path from the root to `v`.
    pub fn path_resistance(&self, v: usize) -> ExtResistance {
        let mut total = ExtResistance::ZERO;
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            total = total.series(self.resistance[cur]);
            cur = p;
        }
        total
    }

    /// Whether `v` has at least one descendant in generation `n`.
    pub fn has_descendant_in(&self, v: usize, n: usize) -> bool {
        let g = self.generation_of(v);
        if g > n || n > self.depth() {
            return false;
        }
        let mut lo = v;
        let mut hi = v + 1;
        for _ in g..n {
            let mut nlo = usize::MAX;
            let mut nhi = 0;
            for u in lo..hi {
                let c = self.child_count[u] as usize;
                if c > 0 {
                    let s = self.first_child[u] as usize;
                    nlo = nlo.min(s);
                    nhi = nhi.max(s + c);
                }
            }
            if nlo == usize::MAX {
                return false;
            }
            lo = nlo;
            hi = nhi;
        }
        hi > lo
    }

    /// `T_[n]` as a resistor network: root (vertex 0) is `A0`, generation `n` is `A1`.
    pub fn to_network(&self, n: usize) -> Result<ResistorNetwork, TreeError> {
        if n == 0 {
            return Err(TreeError::RootIsSink);
        }
        if n > self.depth() && !self.is_extinct() {
            return Err(TreeError::TreeTruncatedBeforeN {
                requested: n,
                depth: self.depth(),
            });
        }
        let end = self.generation_range(n.min(self.depth())).end;
        let edges = (1..end)
            .map(|v| Edge {
                u: self.parent[v] as usize,
                v,
                r: self.resistance[v],
            })
            .collect();
        let a1 = self.generation_range(n).collect();
        Ok(ResistorNetwork::new(end, edges, vec![0], a1).expect("tree networks are valid"))
    }

    /// Offspring counts of every node whose children are known.
    pub fn offspring_counts(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter_map(|v| self.child_count(v))
    }

    /// Copy with every edge resistance mapped through `f`.
    pub fn map_resistances(&self, f: impl Fn(ExtResistance) -> ExtResistance) -> FamilyTree {
        let mut out = self.clone();
        for r in out.resistance.iter_mut().skip(1) {
            *r = f(*r);
        }
        out
    }
}

/// Subtree of nodes joined to the root through edges of resistance at most `k`.
pub fn filter_tree(tree: &FamilyTree, k: f64) -> FamilyTree {
    let mut out = FamilyTree::root_only();
    out.truncated = tree.truncated;
    // map from old index to new index for the current generation
    let mut frontier: Vec<(usize, usize)> = vec![(0, 0)];
    for _g in 0..tree.depth() {
        let mut next = Vec::new();
        for &(old, new) in &frontier {
            out.first_child[new] = out.len() as u32;
            let mut rank = 0;
            for ch in tree.children(old) {
                let r = tree.resistance(ch);
                if r.is_finite() && r.value() <= k {
                    rank += 1;
                    let idx = out.len();
                    out.push_node(new, rank, r);
                    next.push((ch, idx));
                }
            }
            out.child_count[new] = rank as u32;
        }
        out.generation_start.push(out.len());
        if next.is_empty() {
            return out;
        }
        frontier = next;
    }
    if tree.is_extinct() {
        out.generation_start.push(out.len());
    }
    out
}

/// `R(e, ε, K)`: every resistance becomes `r + ε` if that is at most `k`, else ∞.
pub fn apply_truncation(tree: &FamilyTree, eps: f64, k: f64) -> FamilyTree {
    assert!(eps >= 0.0 && eps < k, "truncation needs 0 <= eps < K");
    tree.map_resistances(|r| {
        let raised = r.value() + eps;
        if raised <= k {
            ExtResistance::finite(raised)
        } else {
            ExtResistance::INFINITY
        }
    })
}

/// Samples a tree breadth-first to `depth_cap` generations or until the node cap.
pub fn sample_tree<R: Rng + ?Sized>(
    law: &OffspringLaw,
    edges: &EdgeDistribution,
    depth_cap: usize,
    node_cap: usize,
    rng: &mut R,
) -> FamilyTree {
    assert!(node_cap >= 1, "node cap must be positive");
    let mut tree = FamilyTree::root_only();
    while tree.depth() < depth_cap {
        if tree.grow_generation(law, edges, node_cap, rng) != Growth::Grew {
            break;
        }
    }
    tree
}

/// Generation sizes `Z_0..=Z_n` of a Galton–Watson process, without the tree.
pub fn sample_generation_sizes<R: Rng + ?Sized>(
    law: &OffspringLaw,
    n: usize,
    rng: &mut R,
) -> Vec<u64> {
    let mut sizes = vec![1u64];
    for _ in 0..n {
        let z = *sizes.last().unwrap();
        let next = match law {
            OffspringLaw::Poisson { mean, .. } if z > 0 && *mean > 0.0 => {
                use rand_distr::{Distribution, Poisson};
                Poisson::new(mean * z as f64)
                    .expect("finite mean")
                    .sample(rng) as u64
            }
            _ => (0..z).map(|_| law.sample(rng) as u64).sum(),
        };
        sizes.push(next);
    }
    sizes
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPolicy {
    pub depth_cap: usize,
    pub node_cap: usize,
    pub stabilization: f64,
}

impl Default for LimitPolicy {
    fn default() -> Self {
        LimitPolicy {
            depth_cap: DEFAULT_DEPTH_CAP,
            node_cap: DEFAULT_NODE_CAP,
            stabilization: DEFAULT_STABILIZATION,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    /// `R(T_[d])` at the last realised depth `d`; a lower bound for `R(T)`.
    pub value: ExtResistance,
    pub converged: bool,
    /// Growth stopped at the node cap.
    pub censored: bool,
    pub depth: usize,
}

/// Grows one tree lazily and tracks `R(T_[d])` until it stabilises.
///
/// Converged when the tree dies out (value ∞, exact) or when the last two
/// depth increments were both below `policy.stabilization`.
pub fn limit_resistance_estimate<R: Rng + ?Sized>(
    law: &OffspringLaw,
    edges: &EdgeDistribution,
    policy: &LimitPolicy,
    rng: &mut R,
) -> LimitEstimate {
    let mut tree = FamilyTree::root_only();
    let mut history: Vec<f64> = vec![0.0];
    loop {
        if tree.depth() >= policy.depth_cap {
            break;
        }
        match tree.grow_generation(law, edges, policy.node_cap, rng) {
            Growth::Extinct => {
                return LimitEstimate {
                    value: ExtResistance::INFINITY,
                    converged: true,
                    censored: false,
                    depth: tree.depth(),
                }
            }
            Growth::NodeCapReached => break,
            Growth::Grew => {}
        }
        let d = tree.depth();
        let value = tree
            .truncated_resistance(d)
            .expect("depth realised")
            .value();
        history.push(value);
        let k = history.len();
        if k >= 3 && value.is_finite() {
            let inc1 = history[k - 1] - history[k - 2];
            let inc2 = history[k - 2] - history[k - 3];
            if inc1 < policy.stabilization && inc2 < policy.stabilization {
                return LimitEstimate {
                    value: ExtResistance::finite(value),
                    converged: true,
                    censored: false,
                    depth: d,
                };
            }
        }
    }
    let d = tree.depth();
    LimitEstimate {
        value: tree.truncated_resistance(d).expect("depth realised"),
        converged: false,
        censored: tree.is_truncated(),
        depth: d,
    }
}
