use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::CompleteError;
use crate::dist::EdgeDistribution;
use crate::ext::ExtResistance;
use crate::network::{Edge, ResistorNetwork, VertexId};
use crate::seed::TrialRng;

/// Lazily sampled edge states of one realisation of the model.
///
/// A pair is decided either by a single query or by a *scan* of one of its
/// endpoints, which samples all of that vertex's still-undecided pairs at
/// once with geometric skipping. Every pair is sampled at most once, so any
/// interleaving of queries and scans sees one consistent network.
#[derive(Clone, Debug)]
pub struct EdgeLaw {
    n: usize,
    gamma_n: f64,
    p: f64,
    dist: EdgeDistribution,
    rng: TrialRng,
    scanned: Vec<bool>,
    /// Known conducting neighbours; complete for scanned vertices.
    adjacency: Vec<Vec<(VertexId, ExtResistance)>>,
    /// Pairs decided by single queries.
    memo: HashMap<(VertexId, VertexId), ExtResistance>,
    sampled_pairs: u64,
}

fn key(u: VertexId, v: VertexId) -> (VertexId, VertexId) {
    (u.min(v), u.max(v))
}

impl EdgeLaw {
    pub fn new(
        n: usize,
        gamma_n: f64,
        dist: EdgeDistribution,
        rng: TrialRng,
    ) -> Result<Self, CompleteError> {
        if n < 1 {
            return Err(CompleteError::ParamOutOfRange(
                "n must be at least 1".into(),
            ));
        }
        if !(0.0..=n as f64).contains(&gamma_n) {
            return Err(CompleteError::ParamOutOfRange(format!(
                "gamma(n) = {gamma_n} must lie in [0, {n}]"
            )));
        }
        Ok(EdgeLaw {
            n,
            gamma_n,
            p: gamma_n / n as f64,
            dist,
            rng,
            scanned: vec![false; n + 2],
            adjacency: vec![Vec::new(); n + 2],
            memo: HashMap::new(),
            sampled_pairs: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma_n(&self) -> f64 {
        self.gamma_n
    }

    pub fn conducting_probability(&self) -> f64 {
        self.p
    }

    pub fn distribution(&self) -> &EdgeDistribution {
        &self.dist
    }

    pub fn num_vertices(&self) -> usize {
        self.n + 2
    }

    pub fn infinity(&self) -> VertexId {
        self.n + 1
    }

    /// Number of pairs whose state has been drawn so far, conducting or not,
    /// counting skipped runs of a scan as drawn.
    pub fn sampled_pairs(&self) -> u64 {
        self.sampled_pairs
    }

    /// Shared access to the law's generator, for auxiliary draws that must
    /// come from the same trial stream.
    pub fn rng(&mut self) -> &mut TrialRng {
        &mut self.rng
    }

    fn decided(&self, u: VertexId, v: VertexId) -> Option<ExtResistance> {
        for (a, b) in [(u, v), (v, u)] {
            if self.scanned[a] {
                return Some(
                    self.adjacency[a]
                        .iter()
                        .find(|e| e.0 == b)
                        .map_or(ExtResistance::INFINITY, |e| e.1),
                );
            }
        }
        self.memo.get(&key(u, v)).copied()
    }

    fn draw_resistance(&mut self) -> ExtResistance {
        ExtResistance::finite(self.dist.sample(&mut self.rng))
    }

    fn record_conducting(&mut self, u: VertexId, v: VertexId, r: ExtResistance) {
        self.adjacency[u].push((v, r));
        self.adjacency[v].push((u, r));
    }

    /// Resistance of the edge `{u, v}`, sampling it on first use.
    pub fn query(&mut self, u: VertexId, v: VertexId) -> ExtResistance {
        assert_ne!(u, v, "no self-loops in K_(n+2)");
        if let Some(r) = self.decided(u, v) {
            return r;
        }
        self.sampled_pairs += 1;
        let r = if self.rng.random::<f64>() < self.p {
            let r = self.draw_resistance();
            self.record_conducting(u, v, r);
            r
        } else {
            ExtResistance::INFINITY
        };
        self.memo.insert(key(u, v), r);
        r
    }

    /// All conducting neighbours of `v`, sorted by vertex id.
    pub fn neighbors(&mut self, v: VertexId) -> &[(VertexId, ExtResistance)] {
        if !self.scanned[v] {
            self.scan(v);
        }
        &self.adjacency[v]
    }

    fn scan(&mut self, v: VertexId) {
        let total = self.num_vertices();
        if self.p > 0.0 {
            // positions whose pair is already decided simply discard their draw
            let skip = Geometric::new(self.p).expect("probability in (0, 1]");
            let mut pos: u64 = 0;
            loop {
                let s = skip.sample(&mut self.rng);
                pos = pos.saturating_add(s);
                if pos >= total as u64 {
                    break;
                }
                let w = pos as usize;
                pos += 1;
                if w == v || self.decided(v, w).is_some() {
                    continue;
                }
                let r = self.draw_resistance();
                self.record_conducting(v, w, r);
            }
        }
        self.sampled_pairs += (total - 1) as u64;
        self.scanned[v] = true;
        self.adjacency[v].sort_by_key(|e| e.0);
    }

    /// Decides every pair and returns the conducting edges as a network with
    /// `A0 = {0}` and `A1 = {∞}`, edges ordered by `(min, max)` endpoint.
    pub fn materialize(&mut self) -> ResistorNetwork {
        let total = self.num_vertices();
        for v in 0..total {
            if !self.scanned[v] {
                self.scan(v);
            }
        }
        let mut edges = Vec::new();
        for u in 0..total {
            for &(v, r) in &self.adjacency[u] {
                if u < v {
                    edges.push(Edge { u, v, r });
                }
            }
        }
        let mut labels: Vec<String> = (0..=self.n).map(|v| v.to_string()).collect();
        labels.push("inf".into());
        ResistorNetwork::new(total, edges, vec![0], vec![self.infinity()])
            .expect("model network is valid")
            .with_labels(labels)
    }
}
