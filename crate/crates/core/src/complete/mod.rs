//! The random network on `K_{n+2}`.
//!
//! Vertices are `0, 1, …, n` and a far terminal `∞`, stored as id `n + 1`.
//! Each pair conducts independently with probability `γ(n)/n`; a conducting
//! pair draws its resistance from `F`, every other pair has resistance ∞.

mod coupling;
mod edge_law;
mod explore;
mod networks;

pub use coupling::{
    coupled_growth, coupled_growth_avoiding, coupled_pair, coupling_marginal, CoupledLabel,
    CoupledTrees,
};
pub use edge_law::EdgeLaw;
pub use explore::{explore_layers, ExplorationLayers};
pub use networks::{build_m, build_n, connected_by_conducting_path, rho, script_r, TreePair};

use rand::Rng;
use thiserror::Error;

use crate::dist::EdgeDistribution;
use crate::ext::ExtResistance;
use crate::network::{ResistorNetwork, VertexId};
use crate::seed::TrialRng;
use crate::solve::{try_effective_resistance, SolveError};

#[derive(Debug, Error, PartialEq)]
pub enum CompleteError {
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Id of the far terminal `∞` in a network on `K_{n+2}`.
pub fn infinity_vertex(n: usize) -> VertexId {
    n + 1
}

/// Samples every pair of `K_{n+2}` and returns the network with `A0 = {0}`, `A1 = {∞}`.
///
/// Only conducting pairs are stored as edges: an ∞ edge carries no current and
/// leaves every resistance unchanged.
pub fn sample_complete_network(
    n: usize,
    gamma_n: f64,
    dist: &EdgeDistribution,
    rng: &mut impl Rng,
) -> Result<ResistorNetwork, CompleteError> {
    let seed: u64 = rng.random();
    let mut law = EdgeLaw::new(
        n,
        gamma_n,
        dist.clone(),
        <TrialRng as rand::SeedableRng>::seed_from_u64(seed),
    )?;
    Ok(law.materialize())
}

/// `R_n`, the effective resistance between `0` and `∞`.
pub fn compute_rn(net: &ResistorNetwork) -> Result<ExtResistance, CompleteError> {
    Ok(try_effective_resistance(net)?)
}

/// Depth `⌊(3/4)·ln n / ln γ⌋` of the coupled trees.
pub fn m_n(n: usize, gamma: f64) -> Result<usize, CompleteError> {
    if n < 2 {
        return Err(CompleteError::ParamOutOfRange(format!(
            "n = {n} must be at least 2"
        )));
    }
    if gamma.is_nan() || gamma <= 1.0 {
        return Err(CompleteError::ParamOutOfRange(format!(
            "gamma = {gamma} must exceed 1"
        )));
    }
    // small relative slack so exact cases such as n = e^4, gamma = e land on the integer
    let x = 0.75 * (n as f64).ln() / gamma.ln();
    Ok((x * (1.0 + 1e-12)).floor() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn depth_formula() {
        assert_eq!(m_n(1_000_000, 2.0).unwrap(), 14);
        let n = 4f64.exp().round() as usize; // 55, ln 55 = 4.007
        assert_eq!(m_n(n, std::f64::consts::E).unwrap(), 3);
        assert!(m_n(100, 1.0).is_err());
        assert!(m_n(1, 2.0).is_err());
    }

    #[test]
    fn zero_gamma_disconnects() {
        let mut rng = TrialRng::seed_from_u64(1);
        let net =
            sample_complete_network(20, 0.0, &EdgeDistribution::point(1.0).unwrap(), &mut rng)
                .unwrap();
        assert!(net.edges().is_empty());
        assert_eq!(compute_rn(&net).unwrap(), ExtResistance::INFINITY);
    }

    #[test]
    fn full_gamma_is_complete_graph() {
        let mut rng = TrialRng::seed_from_u64(1);
        let n = 10;
        let net = sample_complete_network(
            n,
            n as f64,
            &EdgeDistribution::point(1.0).unwrap(),
            &mut rng,
        )
        .unwrap();
        assert_eq!(net.edges().len(), (n + 2) * (n + 1) / 2);
        let r = compute_rn(&net).unwrap().value();
        assert!((r - 2.0 / (n as f64 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_gamma() {
        let mut rng = TrialRng::seed_from_u64(1);
        let f = EdgeDistribution::point(1.0).unwrap();
        assert!(sample_complete_network(10, 11.0, &f, &mut rng).is_err());
        assert!(sample_complete_network(10, -1.0, &f, &mut rng).is_err());
        assert!(sample_complete_network(0, 0.0, &f, &mut rng).is_err());
    }
}
