use rayon::prelude::*;

use super::{EmpiricalLaw, ExperimentError};
use crate::complete::{compute_rn, EdgeLaw};
use crate::dist::{EdgeDistribution, OffspringLaw};
use crate::ext::ExtResistance;
use crate::gw::{limit_resistance_estimate, LimitPolicy};
use crate::seed::{purpose, trial_rng};

/// Samples of `R_n` in trial order.
#[derive(Clone, Debug)]
pub struct RnSample {
    pub values: Vec<ExtResistance>,
    pub law: EmpiricalLaw,
}

/// Samples of `R' + R''` in trial order.
#[derive(Clone, Debug)]
pub struct LimitSample {
    pub values: Vec<ExtResistance>,
    /// Per trial: the sum is only a lower bound because a finite tree
    /// estimate did not stabilise.
    pub censored: Vec<bool>,
    pub law: EmpiricalLaw,
}

impl LimitSample {
    pub fn censored_fraction(&self) -> f64 {
        self.censored.iter().filter(|&&c| c).count() as f64 / self.values.len().max(1) as f64
    }
}

/// `trials` independent networks on `K_{n+2}`, trial `i` seeded by
/// `(master_seed, NETWORK, index_base + i)`.
pub fn sample_rn_law(
    n: usize,
    gamma_n: f64,
    dist: &EdgeDistribution,
    trials: usize,
    master_seed: u64,
    index_base: u64,
) -> Result<RnSample, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Param("trials must be at least 1".into()));
    }
    let values = (0..trials)
        .into_par_iter()
        .map(|i| {
            let rng = trial_rng(master_seed, purpose::NETWORK, index_base + i as u64);
            let wrap = |source| ExperimentError::Trial { index: i, source };
            let mut law = EdgeLaw::new(n, gamma_n, dist.clone(), rng).map_err(wrap)?;
            compute_rn(&law.materialize()).map_err(wrap)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let law = EmpiricalLaw::from_values(values.iter().copied());
    Ok(RnSample { values, law })
}

/// `trials` samples of the sum of two independent limit-resistance estimates
/// for Poisson(`gamma`) trees. The second tree is skipped when the first one
/// died out, since the sum is then exactly ∞.
pub fn sample_limit_law(
    gamma: f64,
    dist: &EdgeDistribution,
    trials: usize,
    policy: &LimitPolicy,
    master_seed: u64,
) -> Result<LimitSample, ExperimentError> {
    if trials == 0 {
        return Err(ExperimentError::Param("trials must be at least 1".into()));
    }
    let offspring =
        OffspringLaw::poisson(gamma).map_err(|e| ExperimentError::Param(e.to_string()))?;
    let pairs: Vec<(ExtResistance, bool)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, purpose::TREE_PRIMARY, i);
            let first = limit_resistance_estimate(&offspring, dist, policy, &mut rng);
            let exact_inf = |e: &crate::gw::LimitEstimate| e.converged && e.value.is_infinite();
            if exact_inf(&first) {
                return (ExtResistance::INFINITY, false);
            }
            let mut rng = trial_rng(master_seed, purpose::TREE_SECONDARY, i);
            let second = limit_resistance_estimate(&offspring, dist, policy, &mut rng);
            if exact_inf(&second) {
                return (ExtResistance::INFINITY, false);
            }
            (
                first.value.series(second.value),
                !(first.converged && second.converged),
            )
        })
        .collect();
    let values: Vec<_> = pairs.iter().map(|p| p.0).collect();
    let censored = pairs.iter().map(|p| p.1).collect();
    let law = EmpiricalLaw::from_values(values.iter().copied());
    Ok(LimitSample {
        values,
        censored,
        law,
    })
}
