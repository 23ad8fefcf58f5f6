//! Edge-resistance distributions, offspring laws and a few discrete CDFs.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistError {
    #[error("invalid distribution spec {0:?}; expected point:c, uniform:a,b, exp:rate or discrete:x1:p1,x2:p2,...")]
    Spec(String),
    #[error("invalid parameters: {0}")]
    Params(String),
}

/// Conditional law `F` of a conducting edge's resistance, supported on `[0, ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum EdgeDistribution {
    PointMass { at: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Discrete { atoms: Vec<(f64, f64)> },
}

impl EdgeDistribution {
    pub fn point(at: f64) -> Result<Self, DistError> {
        Self::PointMass { at }.validated()
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self, DistError> {
        Self::Uniform { low, high }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self, DistError> {
        Self::Exponential { rate }.validated()
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self, DistError> {
        Self::Discrete { atoms }.validated()
    }

    fn validated(self) -> Result<Self, DistError> {
        let bad = |m: &str| Err(DistError::Params(m.to_string()));
        match &self {
            Self::PointMass { at } if !(at.is_finite() && *at >= 0.0) => {
                bad("point mass must be finite and >= 0")
            }
            Self::Uniform { low, high }
                if !(low.is_finite() && high.is_finite() && 0.0 <= *low && low <= high) =>
            {
                bad("uniform needs 0 <= low <= high < inf")
            }
            Self::Exponential { rate } if !(rate.is_finite() && *rate > 0.0) => {
                bad("exponential rate must be > 0")
            }
            Self::Discrete { atoms } => {
                if atoms.is_empty() {
                    return bad("discrete law needs at least one atom");
                }
                if atoms
                    .iter()
                    .any(|&(x, p)| !(x.is_finite() && x >= 0.0 && p >= 0.0))
                {
                    return bad("discrete atoms need finite x >= 0 and p >= 0");
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return bad("discrete probabilities must sum to 1");
                }
                Ok(self)
            }
            _ => Ok(self),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        match self {
            Self::PointMass { at } => {
                if x >= *at {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Uniform { low, high } => {
                if x >= *high {
                    1.0
                } else if x < *low {
                    0.0
                } else {
                    (x - low) / (high - low)
                }
            }
            Self::Exponential { rate } => 1.0 - (-rate * x).exp(),
            Self::Discrete { atoms } => atoms.iter().filter(|a| a.0 <= x).map(|a| a.1).sum(),
        }
    }

    /// `F(0)`, the probability that a conducting edge is a short circuit.
    pub fn atom_at_zero(&self) -> f64 {
        self.cdf(0.0)
    }

    /// `∫ x⁻¹ dF(x)`, infinite when `F(0) > 0` or the integral diverges at 0.
    pub fn inverse_mean(&self) -> f64 {
        match self {
            Self::PointMass { at } => 1.0 / at,
            Self::Uniform { low, high } => {
                if *low == 0.0 {
                    f64::INFINITY
                } else if low == high {
                    1.0 / low
                } else {
                    (high / low).ln() / (high - low)
                }
            }
            Self::Exponential { .. } => f64::INFINITY,
            Self::Discrete { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|&(x, p)| if x == 0.0 { f64::INFINITY } else { p / x })
                .sum(),
        }
    }

    /// Right end of the support when it is bounded.
    pub fn support_max(&self) -> Option<f64> {
        match self {
            Self::PointMass { at } => Some(*at),
            Self::Uniform { high, .. } => Some(*high),
            Self::Exponential { .. } => None,
            Self::Discrete { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|a| a.0)
                .reduce(f64::max),
        }
    }

    /// Left end of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            Self::PointMass { at } => *at,
            Self::Uniform { low, .. } => *low,
            Self::Exponential { .. } => 0.0,
            Self::Discrete { atoms } => atoms
                .iter()
                .filter(|a| a.1 > 0.0)
                .map(|a| a.0)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::PointMass { at } => *at,
            Self::Uniform { low, high } => {
                if low == high {
                    *low
                } else {
                    rng.random_range(*low..*high)
                }
            }
            Self::Exponential { rate } => Exp::new(*rate).expect("validated rate").sample(rng),
            Self::Discrete { atoms } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for &(x, p) in atoms {
                    acc += p;
                    if u < acc {
                        return x;
                    }
                }
                atoms
                    .iter()
                    .rev()
                    .find(|a| a.1 > 0.0)
                    .map(|a| a.0)
                    .unwrap_or(atoms[0].0)
            }
        }
    }
}

impl FromStr for EdgeDistribution {
    type Err = DistError;

    /// Parses `point:c`, `uniform:a,b`, `exp:rate` or `discrete:x1:p1,x2:p2,...`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let spec_err = || DistError::Spec(s.to_string());
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| spec_err());
        let (kind, rest) = s.split_once(':').ok_or_else(spec_err)?;
        match kind.trim() {
            "point" => Self::point(num(rest)?),
            "uniform" => {
                let (a, b) = rest.split_once(',').ok_or_else(spec_err)?;
                Self::uniform(num(a)?, num(b)?)
            }
            "exp" => Self::exponential(num(rest)?),
            "discrete" => {
                let atoms = rest
                    .split(',')
                    .map(|pair| {
                        let (x, p) = pair.split_once(':').ok_or_else(spec_err)?;
                        Ok((num(x)?, num(p)?))
                    })
                    .collect::<Result<Vec<_>, DistError>>()?;
                Self::discrete(atoms)
            }
            _ => Err(spec_err()),
        }
    }
}

impl fmt::Display for EdgeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointMass { at } => write!(f, "point:{at}"),
            Self::Uniform { low, high } => write!(f, "uniform:{low},{high}"),
            Self::Exponential { rate } => write!(f, "exp:{rate}"),
            Self::Discrete { atoms } => {
                let parts: Vec<String> = atoms.iter().map(|(x, p)| format!("{x}:{p}")).collect();
                write!(f, "discrete:{}", parts.join(","))
            }
        }
    }
}

/// Offspring distribution of a Galton–Watson process.
#[derive(Clone, Debug)]
pub enum OffspringLaw {
    Poisson {
        mean: f64,
        sampler: Option<Poisson<f64>>,
    },
    /// `pmf[l]` is the probability of `l` children.
    Pmf(Vec<f64>),
}

impl OffspringLaw {
    pub fn poisson(mean: f64) -> Result<Self, DistError> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(DistError::Params(format!(
                "Poisson mean must be finite and >= 0, got {mean}"
            )));
        }
        let sampler = if mean > 0.0 {
            Some(Poisson::new(mean).map_err(|e| DistError::Params(e.to_string()))?)
        } else {
            None
        };
        Ok(OffspringLaw::Poisson { mean, sampler })
    }

    pub fn pmf(pmf: Vec<f64>) -> Result<Self, DistError> {
        if pmf.is_empty() || pmf.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(DistError::Params(
                "pmf entries must be finite and >= 0".into(),
            ));
        }
        if (pmf.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(DistError::Params("pmf must sum to 1".into()));
        }
        Ok(OffspringLaw::Pmf(pmf))
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Poisson { mean, .. } => *mean,
            Self::Pmf(p) => p.iter().enumerate().map(|(l, q)| l as f64 * q).sum(),
        }
    }

    /// Probability generating function `f(s) = Σ p_l s^l`.
    pub fn pgf(&self, s: f64) -> f64 {
        match self {
            Self::Poisson { mean, .. } => (-mean * (1.0 - s)).exp(),
            Self::Pmf(p) => p.iter().rev().fold(0.0, |acc, q| acc * s + q),
        }
    }

    pub fn probability(&self, l: usize) -> f64 {
        match self {
            Self::Poisson { mean, .. } => poisson_pmf(l as u64, *mean),
            Self::Pmf(p) => p.get(l).copied().unwrap_or(0.0),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            Self::Poisson { sampler: None, .. } => 0,
            Self::Poisson {
                sampler: Some(d), ..
            } => d.sample(rng) as usize,
            Self::Pmf(p) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (l, q) in p.iter().enumerate() {
                    acc += q;
                    if u < acc {
                        return l;
                    }
                }
                p.iter().rposition(|q| *q > 0.0).unwrap_or(0)
            }
        }
    }

    /// Smallest fixed point of the generating function in `[0, 1]`.
    ///
    /// Mean at most one (and not the degenerate one-child law) gives `q = 1`;
    /// otherwise the monotone iteration `q ← f(q)` from 0 runs until successive
    /// iterates differ by at most `1e-14`.
    pub fn extinction_probability(&self) -> f64 {
        let degenerate_single_child =
            matches!(self, Self::Pmf(p) if p.get(1).copied().unwrap_or(0.0) == 1.0);
        if degenerate_single_child {
            return 0.0;
        }
        if self.mean() <= 1.0 {
            return 1.0;
        }
        let mut q = 0.0f64;
        for _ in 0..100_000_000u64 {
            let next = self.pgf(q);
            if (next - q).abs() <= 1e-14 {
                return next;
            }
            q = next;
        }
        q
    }
}

pub fn poisson_pmf(k: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (kf * mean.ln() - mean - statrs::function::gamma::ln_gamma(kf + 1.0)).exp()
}

/// `P{Poisson(mean) <= k}` by forward summation.
pub fn poisson_cdf(k: u64, mean: f64) -> f64 {
    let mut term = (-mean).exp();
    let mut acc = term;
    for j in 1..=k {
        term *= mean / j as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// Incrementally evaluated CDF of `Binomial(trials, p)`, for the small arguments
/// the coupling needs.
#[derive(Clone, Debug)]
pub struct BinomialCdf {
    trials: u64,
    p: f64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl BinomialCdf {
    pub fn new(trials: u64, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        BinomialCdf {
            trials,
            p,
            pmf: Vec::new(),
            cdf: Vec::new(),
        }
    }

    fn extend_to(&mut self, x: u64) {
        while (self.pmf.len() as u64) <= x.min(self.trials) {
            let j = self.pmf.len() as u64;
            let next = if self.p == 1.0 {
                if j == self.trials {
                    1.0
                } else {
                    0.0
                }
            } else if j == 0 {
                (self.trials as f64 * (-self.p).ln_1p()).exp()
            } else {
                let prev = self.pmf[j as usize - 1];
                prev * ((self.trials - j + 1) as f64 / j as f64) * (self.p / (1.0 - self.p))
            };
            let acc = self.cdf.last().copied().unwrap_or(0.0) + next;
            self.pmf.push(next);
            self.cdf.push(acc.min(1.0));
        }
    }

    pub fn pmf(&mut self, x: u64) -> f64 {
        if x > self.trials {
            return 0.0;
        }
        self.extend_to(x);
        self.pmf[x as usize]
    }

    /// `β(x)`, with `β(-1) = 0`.
    pub fn cdf(&mut self, x: i64) -> f64 {
        if x < 0 {
            return 0.0;
        }
        let x = x as u64;
        if x >= self.trials {
            return 1.0;
        }
        self.extend_to(x);
        self.cdf[x as usize]
    }
}
