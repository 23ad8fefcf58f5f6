use serde::Serialize;

use super::ExperimentError;
use crate::ext::ExtResistance;

/// Finite samples plus a count of samples equal to ∞.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalLaw {
    finite: Vec<f64>,
    infinite: usize,
}

impl EmpiricalLaw {
    pub fn from_values<I: IntoIterator<Item = ExtResistance>>(values: I) -> Self {
        let mut finite = Vec::new();
        let mut infinite = 0;
        for v in values {
            if v.is_infinite() {
                infinite += 1;
            } else {
                finite.push(v.value());
            }
        }
        finite.sort_by(f64::total_cmp);
        EmpiricalLaw { finite, infinite }
    }

    pub fn total(&self) -> usize {
        self.finite.len() + self.infinite
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn finite_samples(&self) -> &[f64] {
        &self.finite
    }

    pub fn infinity_count(&self) -> usize {
        self.infinite
    }

    pub fn atom_at_infinity(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.infinite as f64 / self.total() as f64
    }

    /// Standard error of the atom estimate.
    pub fn atom_std_error(&self) -> f64 {
        let a = self.atom_at_infinity();
        (a * (1.0 - a) / self.total() as f64).sqrt()
    }

    /// `P{X ≤ x}` under the empirical law, ∞ counted as never below `x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.finite.partition_point(|&v| v <= x) as f64 / self.total() as f64
    }

    /// `P{X ≤ x | X < ∞}`.
    pub fn finite_cdf(&self, x: f64) -> f64 {
        self.finite.partition_point(|&v| v <= x) as f64 / self.finite.len() as f64
    }

    /// Smallest sample `x` with `P{X ≤ x} ≥ p`; ∞ once the finite part is exhausted.
    pub fn quantile(&self, p: f64) -> ExtResistance {
        assert!((0.0..=1.0).contains(&p), "quantile level in [0, 1]");
        let rank = ((p * self.total() as f64).ceil() as usize).max(1);
        match self.finite.get(rank - 1) {
            Some(&v) => ExtResistance::finite(v),
            None => ExtResistance::INFINITY,
        }
    }

    pub fn median(&self) -> ExtResistance {
        self.quantile(0.5)
    }

    pub fn finite_mean(&self) -> Option<f64> {
        (!self.finite.is_empty())
            .then(|| self.finite.iter().sum::<f64>() / self.finite.len() as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsDistance {
    /// Sup-distance between the laws conditioned on finiteness.
    pub ks_finite: f64,
    pub atom_gap: f64,
    /// False when either law has no finite samples; `ks_finite` is then 0.
    pub finite_defined: bool,
}

pub fn ks_distance(a: &EmpiricalLaw, b: &EmpiricalLaw) -> Result<KsDistance, ExperimentError> {
    if a.is_empty() || b.is_empty() {
        return Err(ExperimentError::EmptyLaw);
    }
    let atom_gap = (a.atom_at_infinity() - b.atom_at_infinity()).abs();
    if a.finite.is_empty() || b.finite.is_empty() {
        return Ok(KsDistance {
            ks_finite: 0.0,
            atom_gap,
            finite_defined: false,
        });
    }
    let (na, nb) = (a.finite.len() as f64, b.finite.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup: f64 = 0.0;
    while i < a.finite.len() && j < b.finite.len() {
        let x = a.finite[i].min(b.finite[j]);
        while i < a.finite.len() && a.finite[i] <= x {
            i += 1;
        }
        while j < b.finite.len() && b.finite[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(KsDistance {
        ks_finite: sup,
        atom_gap,
        finite_defined: true,
    })
}
