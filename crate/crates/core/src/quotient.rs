//! Contraction of zero-resistance classes.

use crate::ext::ExtResistance;
use crate::network::{ResistorNetwork, VertexId};

pub type ClassId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuotientEdge {
    pub a: ClassId,
    pub b: ClassId,
    pub r: ExtResistance,
    /// Index of the originating edge in the source network.
    pub source: usize,
}

/// A network whose vertices are the maximal zero-resistance classes of another.
///
/// Every edge has `r > 0` and joins two distinct classes. Multi-edges are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotientNetwork {
    class_of: Vec<ClassId>,
    num_classes: usize,
    edges: Vec<QuotientEdge>,
    a0: Option<ClassId>,
    a1: Option<ClassId>,
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Merges each terminal set, then every zero-resistance component, into single classes.
///
/// Classes are numbered in order of their smallest vertex.
pub fn quotient(net: &ResistorNetwork) -> QuotientNetwork {
    let n = net.num_vertices();
    let mut uf = UnionFind::new(n);
    for set in [net.a0(), net.a1()] {
        for w in set.windows(2) {
            uf.union(w[0], w[1]);
        }
    }
    for e in net.edges() {
        if e.r.is_zero() {
            uf.union(e.u, e.v);
        }
    }
    let mut class_of_root = vec![usize::MAX; n];
    let mut num_classes = 0;
    let class_of: Vec<ClassId> = (0..n)
        .map(|v| {
            let root = uf.find(v);
            if class_of_root[root] == usize::MAX {
                class_of_root[root] = num_classes;
                num_classes += 1;
            }
            class_of_root[root]
        })
        .collect();
    let edges = net
        .edges()
        .iter()
        .enumerate()
        .filter_map(|(source, e)| {
            let (a, b) = (class_of[e.u], class_of[e.v]);
            (a != b).then_some(QuotientEdge {
                a,
                b,
                r: e.r,
                source,
            })
        })
        .collect();
    QuotientNetwork {
        num_classes,
        edges,
        a0: net.a0().first().map(|&v| class_of[v]),
        a1: net.a1().first().map(|&v| class_of[v]),
        class_of,
    }
}

impl QuotientNetwork {
    /// Builds a quotient network directly from classes and positive-resistance edges.
    ///
    /// Panics if an edge has zero resistance or is internal to a class.
    pub fn from_classes(
        num_classes: usize,
        edges: Vec<(ClassId, ClassId, ExtResistance)>,
        a0: Option<ClassId>,
        a1: Option<ClassId>,
    ) -> Self {
        let edges = edges
            .into_iter()
            .enumerate()
            .map(|(source, (a, b, r))| {
                assert!(
                    a != b && a < num_classes && b < num_classes,
                    "bad quotient edge"
                );
                assert!(!r.is_zero(), "quotient edges have positive resistance");
                QuotientEdge { a, b, r, source }
            })
            .collect();
        QuotientNetwork {
            class_of: (0..num_classes).collect(),
            num_classes,
            edges,
            a0,
            a1,
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_of(&self, v: VertexId) -> ClassId {
        self.class_of[v]
    }

    pub fn class_map(&self) -> &[ClassId] {
        &self.class_of
    }

    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    pub fn a0(&self) -> Option<ClassId> {
        self.a0
    }

    pub fn a1(&self) -> Option<ClassId> {
        self.a1
    }

    /// Conducting (finite-resistance) adjacency with conductances, multi-edges kept.
    pub fn conducting_adjacency(&self) -> Vec<Vec<(ClassId, f64)>> {
        let mut adj = vec![Vec::new(); self.num_classes];
        for e in &self.edges {
            if e.r.is_finite() {
                let c = e.r.conductance();
                adj[e.a].push((e.b, c));
                adj[e.b].push((e.a, c));
            }
        }
        adj
    }

    /// Component label of every class in the conducting subgraph.
    pub fn conducting_components(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.num_classes);
        for e in &self.edges {
            if e.r.is_finite() {
                uf.union(e.a, e.b);
            }
        }
        (0..self.num_classes).map(|c| uf.find(c)).collect()
    }

    /// Resolves a network-level vertex set to the set of classes it touches.
    pub fn classes_of(&self, vertices: &[VertexId]) -> Vec<ClassId> {
        let mut out: Vec<ClassId> = vertices.iter().map(|&v| self.class_of[v]).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_with_zero_edge() {
        // a=0, b=1, c=2
        let net =
            ResistorNetwork::from_triples(3, &[(0, 1, 0.0), (1, 2, 1.0)], &[0], &[2]).unwrap();
        let q = quotient(&net);
        assert_eq!(q.num_classes(), 2);
        assert_eq!(q.class_of(0), q.class_of(1));
        assert_eq!(q.edges().len(), 1);
        assert_eq!(q.edges()[0].r, ExtResistance::finite(1.0));
    }

    #[test]
    fn identity_without_zero_edges() {
        let net = ResistorNetwork::from_triples(
            4,
            &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 3.0), (0, 3, f64::INFINITY)],
            &[0],
            &[3],
        )
        .unwrap();
        let q = quotient(&net);
        assert_eq!(q.num_classes(), 4);
        assert_eq!(q.edges().len(), 4);
        assert_eq!(q.class_map(), &[0, 1, 2, 3]);
    }

    #[test]
    fn zero_edge_between_terminals_merges_them() {
        let net = ResistorNetwork::from_triples(2, &[(0, 1, 0.0)], &[0], &[1]).unwrap();
        let q = quotient(&net);
        assert_eq!(q.num_classes(), 1);
        assert_eq!(q.a0(), q.a1());
        assert!(q.edges().is_empty());
    }

    #[test]
    fn terminal_sets_merge_first() {
        let net = ResistorNetwork::from_triples(4, &[(0, 2, 1.0), (1, 3, 1.0)], &[0, 1], &[2, 3])
            .unwrap();
        let q = quotient(&net);
        assert_eq!(q.num_classes(), 2);
        assert_eq!(q.edges().len(), 2);
        assert_ne!(q.a0(), q.a1());
    }
}
