//! Kirchhoff potentials and two-terminal effective resistance.

use thiserror::Error;

use crate::ext::ExtResistance;
use crate::linalg::GroundedLaplacian;
use crate::network::ResistorNetwork;
use crate::quotient::{quotient, ClassId, QuotientNetwork};

/// Systems with at most this many unknowns are factored directly; larger ones use CG.
pub const DIRECT_SOLVE_LIMIT: usize = 800;
/// Relative residual target for the iterative solver.
pub const CG_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("both terminal sets lie in one zero-resistance class")]
    SameTerminalClass,
    #[error("a terminal set is empty")]
    EmptyTerminal,
    #[error("linear system over {unknowns} classes did not converge")]
    SingularSystem { unknowns: usize },
}

/// Potentials with boundary values 0 on `Â0` and 1 on `Â1`.
///
/// `None` marks a floating class: its conducting component touches neither terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSolution {
    pub potential: Vec<Option<f64>>,
    /// Largest `|V(v) - weighted mean of neighbours|` over solved interior classes.
    pub residual: f64,
    pub a0: ClassId,
    pub a1: ClassId,
    /// Whether a conducting path joins the terminals.
    pub connected: bool,
}

impl PotentialSolution {
    pub fn at(&self, class: ClassId) -> Option<f64> {
        self.potential[class]
    }
}

pub fn solve_potentials(qnet: &QuotientNetwork) -> Result<PotentialSolution, SolveError> {
    let (a0, a1) = match (qnet.a0(), qnet.a1()) {
        (Some(a0), Some(a1)) => (a0, a1),
        _ => return Err(SolveError::EmptyTerminal),
    };
    if a0 == a1 {
        return Err(SolveError::SameTerminalClass);
    }
    let comp = qnet.conducting_components();
    let (c0, c1) = (comp[a0], comp[a1]);
    let k = qnet.num_classes();
    let mut potential: Vec<Option<f64>> = vec![None; k];

    if c0 != c1 {
        for v in 0..k {
            if comp[v] == c0 {
                potential[v] = Some(0.0);
            } else if comp[v] == c1 {
                potential[v] = Some(1.0);
            }
        }
        return Ok(PotentialSolution {
            potential,
            residual: 0.0,
            a0,
            a1,
            connected: false,
        });
    }

    let adj = qnet.conducting_adjacency();
    let mut index = vec![usize::MAX; k];
    let mut interior = Vec::new();
    for v in 0..k {
        if comp[v] == c0 && v != a0 && v != a1 {
            index[v] = interior.len();
            interior.push(v);
        }
    }
    let m = interior.len();
    let mut diag = vec![0.0; m];
    let mut off = vec![Vec::new(); m];
    let mut rhs = vec![0.0; m];
    for (i, &v) in interior.iter().enumerate() {
        for &(w, c) in &adj[v] {
            diag[i] += c;
            if w == a1 {
                rhs[i] += c;
            } else if w != a0 {
                off[i].push((index[w], c));
            }
        }
    }
    let system = GroundedLaplacian { diag, off };
    let x = if m <= DIRECT_SOLVE_LIMIT {
        system.solve_dense(&rhs)
    } else {
        system.solve_cg(&rhs, CG_TOLERANCE, 20 * m + 1000)
    }
    .map_err(|_| SolveError::SingularSystem { unknowns: m })?;

    potential[a0] = Some(0.0);
    potential[a1] = Some(1.0);
    for (i, &v) in interior.iter().enumerate() {
        potential[v] = Some(x[i]);
    }
    let residual = kirchhoff_residual(&adj, &potential, &interior);
    Ok(PotentialSolution {
        potential,
        residual,
        a0,
        a1,
        connected: true,
    })
}

fn kirchhoff_residual(
    adj: &[Vec<(ClassId, f64)>],
    potential: &[Option<f64>],
    interior: &[ClassId],
) -> f64 {
    interior
        .iter()
        .map(|&v| {
            let (num, den) = adj[v].iter().fold((0.0, 0.0), |(n, d), &(w, c)| {
                (n + c * potential[w].unwrap_or(0.0), d + c)
            });
            (potential[v].unwrap_or(0.0) - num / den).abs()
        })
        .fold(0.0, f64::max)
}

/// Inverse of the current leaving `Â0` under unit voltage.
pub fn resistance_from_potentials(
    qnet: &QuotientNetwork,
    sol: &PotentialSolution,
) -> ExtResistance {
    if !sol.connected {
        return ExtResistance::INFINITY;
    }
    let mut current = 0.0;
    for e in qnet.edges() {
        if !e.r.is_finite() {
            continue;
        }
        let other = if e.a == sol.a0 {
            e.b
        } else if e.b == sol.a0 {
            e.a
        } else {
            continue;
        };
        current += sol.potential[other].unwrap_or(0.0) * e.r.conductance();
    }
    ExtResistance::from_conductance(current.max(0.0))
}

pub fn try_effective_resistance_quotient(
    qnet: &QuotientNetwork,
) -> Result<ExtResistance, SolveError> {
    match (qnet.a0(), qnet.a1()) {
        (Some(a0), Some(a1)) if a0 == a1 => return Ok(ExtResistance::ZERO),
        (Some(_), Some(_)) => {}
        _ => return Ok(ExtResistance::INFINITY),
    }
    let sol = solve_potentials(qnet)?;
    Ok(resistance_from_potentials(qnet, &sol))
}

pub fn try_effective_resistance(net: &ResistorNetwork) -> Result<ExtResistance, SolveError> {
    try_effective_resistance_quotient(&quotient(net))
}

/// Effective resistance between `A0` and `A1`.
///
/// 0 when the terminals share a zero class, ∞ when no conducting path joins them.
/// Panics only if the linear solve fails, which a valid network does not trigger.
pub fn effective_resistance(net: &ResistorNetwork) -> ExtResistance {
    try_effective_resistance(net).expect("effective resistance solve failed")
}
