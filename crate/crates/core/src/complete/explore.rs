use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::EdgeLaw;
use crate::ext::ExtResistance;
use crate::gw::FamilyTree;
use crate::network::VertexId;

/// Breadth-first conducting layers around a root.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExplorationLayers {
    /// `layers[k]`: vertices at conducting distance exactly `k`, ascending.
    pub layers: Vec<Vec<VertexId>>,
    /// First-discovery edges `(parent, child, r)`; a child's parent is its
    /// smallest neighbour in the previous layer.
    pub tree_edges: Vec<(VertexId, VertexId, ExtResistance)>,
}

impl ExplorationLayers {
    pub fn root(&self) -> VertexId {
        self.layers[0][0]
    }

    pub fn depth(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn profile(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.layers.iter().flatten().copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.layers.iter().any(|l| l.binary_search(&v).is_ok())
    }

    pub fn is_disjoint_from(&self, other: &ExplorationLayers) -> bool {
        !self.vertices().any(|v| other.contains(v))
    }

    /// The first-discovery tree as a family tree, with the vertex behind each
    /// tree node. Children of a node are ordered by vertex id.
    pub fn as_tree(&self) -> (FamilyTree, Vec<VertexId>) {
        let mut children: HashMap<VertexId, Vec<(VertexId, ExtResistance)>> = HashMap::new();
        for &(p, c, r) in &self.tree_edges {
            children.entry(p).or_default().push((c, r));
        }
        let mut tree = FamilyTree::root_only();
        let mut vertex_of = vec![self.root()];
        for _ in 0..self.depth() {
            let mut added = Vec::new();
            tree.push_generation(|i| {
                let kids = children
                    .get(&vertex_of[i])
                    .map(Vec::as_slice)
                    .unwrap_or(&[]);
                added.extend(kids.iter().map(|k| k.0));
                kids.iter().map(|k| k.1)
            });
            vertex_of.extend(added);
        }
        (tree, vertex_of)
    }
}

/// Conducting layers `τ_0..=τ_k` around `root`, discovering edges through `law`.
///
/// Only vertices of layers `0..k` are scanned, so the work is proportional to
/// the explored region rather than to `n²`.
pub fn explore_layers(law: &mut EdgeLaw, root: VertexId, k: usize) -> ExplorationLayers {
    let mut seen = HashSet::from([root]);
    let mut layers = vec![vec![root]];
    let mut tree_edges = Vec::new();
    for _ in 0..k {
        let frontier = layers.last().unwrap().clone();
        let mut next = Vec::new();
        for v in frontier {
            for &(w, r) in law.neighbors(v) {
                if seen.insert(w) {
                    next.push(w);
                    tree_edges.push((v, w, r));
                }
            }
        }
        next.sort_unstable();
        layers.push(next);
    }
    ExplorationLayers { layers, tree_edges }
}
