//! Random walks on quotient networks.
//!
//! The walk moves from a class to a neighbouring class with probability
//! proportional to the total conductance of the edges joining them. Its
//! hitting probabilities are the Kirchhoff potentials, which gives an
//! independent route to the same numbers as [`crate::solve`].

use std::collections::{BTreeMap, VecDeque};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gw::{FamilyTree, TreeError};
use crate::linalg::solve_general_dense;
use crate::quotient::{quotient, ClassId, QuotientNetwork};
use crate::seed::{purpose, trial_rng};

const DENSE_LIMIT: usize = 2000;

#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("class {0} has no finite-resistance incident edge")]
    IsolatedState(ClassId),
    #[error("target and avoid sets share class {0}")]
    OverlappingSets(ClassId),
    #[error("absorbing-chain system over {unknowns} states did not converge")]
    SingularSystem { unknowns: usize },
    #[error("root-to-node and node-to-horizon resistances are both zero")]
    DegenerateBound,
    #[error("node {node} lies beyond horizon {horizon}")]
    BeyondHorizon { node: usize, horizon: usize },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Row-stochastic transition law of the walk; isolated classes have no row.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Option<Vec<(ClassId, f64)>>>,
}

impl TransitionMatrix {
    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, state: ClassId) -> Result<&[(ClassId, f64)], WalkError> {
        self.rows[state]
            .as_deref()
            .ok_or(WalkError::IsolatedState(state))
    }

    pub fn is_isolated(&self, state: ClassId) -> bool {
        self.rows[state].is_none()
    }

    pub fn probability(&self, from: ClassId, to: ClassId) -> f64 {
        self.rows[from]
            .as_ref()
            .and_then(|r| r.iter().find(|e| e.0 == to).map(|e| e.1))
            .unwrap_or(0.0)
    }
}

pub fn transition_matrix(qnet: &QuotientNetwork) -> TransitionMatrix {
    let mut weights: Vec<BTreeMap<ClassId, f64>> = vec![BTreeMap::new(); qnet.num_classes()];
    for e in qnet.edges() {
        let c = e.r.conductance();
        if c > 0.0 {
            *weights[e.a].entry(e.b).or_default() += c;
            *weights[e.b].entry(e.a).or_default() += c;
        }
    }
    let rows = weights
        .into_iter()
        .map(|w| {
            let total: f64 = w.values().sum();
            (total > 0.0).then(|| w.into_iter().map(|(k, c)| (k, c / total)).collect())
        })
        .collect();
    TransitionMatrix { rows }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Role {
    Free,
    Target,
    Avoid,
}

fn roles(n: usize, target: &[ClassId], avoid: &[ClassId]) -> Result<Vec<Role>, WalkError> {
    let mut role = vec![Role::Free; n];
    for &t in target {
        role[t] = Role::Target;
    }
    for &a in avoid {
        if role[a] == Role::Target {
            return Err(WalkError::OverlappingSets(a));
        }
        role[a] = Role::Avoid;
    }
    Ok(role)
}

/// Probability that the walk from `start` enters `target` before `avoid`.
pub fn hitting_probability(
    qnet: &QuotientNetwork,
    start: ClassId,
    target: &[ClassId],
    avoid: &[ClassId],
) -> Result<f64, WalkError> {
    let role = roles(qnet.num_classes(), target, avoid)?;
    match role[start] {
        Role::Target => return Ok(1.0),
        Role::Avoid => return Ok(0.0),
        Role::Free => {}
    }
    let p = transition_matrix(qnet);
    if p.is_isolated(start) {
        return Ok(0.0);
    }

    // transient states reachable from start without passing through the boundary
    let mut index = vec![usize::MAX; qnet.num_classes()];
    let mut transient = vec![start];
    index[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut reaches_target = false;
    while let Some(s) = queue.pop_front() {
        for &(t, _) in p.row(s)? {
            match role[t] {
                Role::Target => reaches_target = true,
                Role::Avoid => {}
                Role::Free if index[t] == usize::MAX => {
                    index[t] = transient.len();
                    transient.push(t);
                    queue.push_back(t);
                }
                Role::Free => {}
            }
        }
    }
    if !reaches_target {
        return Ok(0.0);
    }

    let m = transient.len();
    let mut rhs = vec![0.0; m];
    for (i, &s) in transient.iter().enumerate() {
        rhs[i] = p
            .row(s)?
            .iter()
            .filter(|e| role[e.0] == Role::Target)
            .map(|e| e.1)
            .sum();
    }
    let h = if m <= DENSE_LIMIT {
        let mut a = DMatrix::<f64>::identity(m, m);
        for (i, &s) in transient.iter().enumerate() {
            for &(t, prob) in p.row(s)? {
                if role[t] == Role::Free {
                    a[(i, index[t])] -= prob;
                }
            }
        }
        solve_general_dense(a, &rhs).map_err(|_| WalkError::SingularSystem { unknowns: m })?
    } else {
        gauss_seidel(&p, &transient, &index, &role, &rhs)?
    };
    Ok(h[0])
}

fn gauss_seidel(
    p: &TransitionMatrix,
    transient: &[ClassId],
    index: &[usize],
    role: &[Role],
    rhs: &[f64],
) -> Result<Vec<f64>, WalkError> {
    let m = transient.len();
    let mut h = vec![0.0; m];
    for _ in 0..200_000 {
        let mut delta: f64 = 0.0;
        for (i, &s) in transient.iter().enumerate() {
            let mut v = rhs[i];
            for &(t, prob) in p.row(s)? {
                if role[t] == Role::Free {
                    v += prob * h[index[t]];
                }
            }
            delta = delta.max((v - h[i]).abs());
            h[i] = v;
        }
        if delta < 1e-15 {
            return Ok(h);
        }
    }
    Err(WalkError::SingularSystem { unknowns: m })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub trials: usize,
    pub hits: usize,
    pub misses: usize,
    /// Trials that neither hit nor missed within the step cap.
    pub cap_hits: usize,
    /// Hit frequency among resolved trials; `None` when nothing resolved.
    pub estimate: Option<f64>,
    pub std_error: f64,
}

impl WalkEstimate {
    pub fn is_valid(&self) -> bool {
        self.estimate.is_some()
    }

    pub fn cap_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.cap_hits as f64 / self.trials as f64
        }
    }
}

enum WalkOutcome {
    Hit,
    Miss,
    Capped,
}

/// Simulates the walk `trials` times with per-trial streams derived from `seed`.
pub fn monte_carlo_walk(
    qnet: &QuotientNetwork,
    start: ClassId,
    target: &[ClassId],
    avoid: &[ClassId],
    trials: usize,
    step_cap: usize,
    seed: u64,
) -> Result<WalkEstimate, WalkError> {
    let role = roles(qnet.num_classes(), target, avoid)?;
    if role[start] != Role::Free {
        let hit = role[start] == Role::Target;
        return Ok(WalkEstimate {
            trials,
            hits: if hit { trials } else { 0 },
            misses: if hit { 0 } else { trials },
            cap_hits: 0,
            estimate: Some(if hit { 1.0 } else { 0.0 }),
            std_error: 0.0,
        });
    }
    let p = transition_matrix(qnet);
    let outcomes: Vec<WalkOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, purpose::WALK, i);
            let mut state = start;
            for _ in 0..step_cap {
                let Ok(row) = p.row(state) else {
                    return WalkOutcome::Capped;
                };
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut next = row[row.len() - 1].0;
                for &(t, prob) in row {
                    acc += prob;
                    if u < acc {
                        next = t;
                        break;
                    }
                }
                state = next;
                match role[state] {
                    Role::Target => return WalkOutcome::Hit,
                    Role::Avoid => return WalkOutcome::Miss,
                    Role::Free => {}
                }
            }
            WalkOutcome::Capped
        })
        .collect();
    let hits = outcomes
        .iter()
        .filter(|o| matches!(o, WalkOutcome::Hit))
        .count();
    let misses = outcomes
        .iter()
        .filter(|o| matches!(o, WalkOutcome::Miss))
        .count();
    let resolved = hits + misses;
    let (estimate, std_error) = if resolved == 0 {
        (None, 0.0)
    } else {
        let f = hits as f64 / resolved as f64;
        (Some(f), (f * (1.0 - f) / resolved as f64).sqrt())
    };
    Ok(WalkEstimate {
        trials,
        hits,
        misses,
        cap_hits: trials - resolved,
        estimate,
        std_error,
    })
}

/// Both sides of the escape bound for node `x` on the tree truncated at generation `horizon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeBound {
    /// Probability that the walk from `x` reaches generation `horizon` before the root.
    pub lhs: f64,
    /// `ρ(x) / (ρ(x) + r)`, with `ρ` the root-to-`x` path resistance and `r` the
    /// resistance from `x` to its generation-`horizon` descendants.
    pub rhs: f64,
    /// `x` has no descendants at the horizon, so `rhs = 0`.
    pub no_descendants: bool,
}

impl EscapeBound {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs >= self.rhs - tol
    }
}

/// Evaluates the escape-probability lower bound on `T_[horizon]` exactly.
pub fn lemma3_bound_check(
    tree: &FamilyTree,
    x: usize,
    horizon: usize,
) -> Result<EscapeBound, WalkError> {
    if tree.generation_of(x) > horizon {
        return Err(WalkError::BeyondHorizon { node: x, horizon });
    }
    let net = tree.to_network(horizon)?;
    let rho = tree.path_resistance(x);
    let r_m = tree.subtree_resistance(x, horizon)?;
    if rho.series(r_m).is_zero() {
        return Err(WalkError::DegenerateBound);
    }
    let q = quotient(&net);
    let lhs = match (q.a0(), q.a1()) {
        (Some(root), Some(sink)) => hitting_probability(&q, q.class_of(x), &[sink], &[root])?,
        _ => 0.0,
    };
    let rhs = if r_m.is_infinite() {
        0.0
    } else if rho.is_infinite() {
        1.0
    } else {
        rho.value() / (rho.value() + r_m.value())
    };
    Ok(EscapeBound {
        lhs,
        rhs,
        no_descendants: r_m.is_infinite(),
    })
}
