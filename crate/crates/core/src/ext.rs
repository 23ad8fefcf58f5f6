//! Extended nonnegative reals for resistances.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A resistance in `[0, ∞]`.
///
/// Zero and infinity are exact values. `x + ∞ = ∞`, `1/0 = ∞` and `1/∞ = 0`,
/// so series and parallel combination are total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtResistance(f64);

#[derive(Debug, Error, PartialEq)]
pub enum ResistanceError {
    #[error("resistance must be a nonnegative number, got {0}")]
    Negative(f64),
    #[error("resistance is NaN")]
    NaN,
    #[error("cannot parse resistance from {0:?}")]
    Parse(String),
}

impl ExtResistance {
    pub const ZERO: ExtResistance = ExtResistance(0.0);
    pub const INFINITY: ExtResistance = ExtResistance(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self, ResistanceError> {
        if value.is_nan() {
            Err(ResistanceError::NaN)
        } else if value < 0.0 {
            Err(ResistanceError::Negative(value))
        } else {
            // normalise -0.0
            Ok(ExtResistance(value + 0.0))
        }
    }

    /// Panics on negative or NaN input. Use for values that are nonnegative by construction.
    pub fn finite(value: f64) -> Self {
        Self::new(value).expect("invalid resistance")
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// `1/r` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn conductance(self) -> f64 {
        if self.0 == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.0
        }
    }

    /// Resistance of a conductance, again with the total conventions.
    pub fn from_conductance(c: f64) -> Self {
        debug_assert!(c >= 0.0);
        if c == 0.0 {
            Self::INFINITY
        } else {
            ExtResistance::finite(1.0 / c)
        }
    }

    pub fn series(self, other: Self) -> Self {
        ExtResistance(self.0 + other.0)
    }

    pub fn parallel(self, other: Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self::from_conductance(self.conductance() + other.conductance())
    }

    /// Parallel combination of any number of branches; an empty set is an open circuit.
    pub fn parallel_all<I: IntoIterator<Item = ExtResistance>>(branches: I) -> Self {
        let mut total = 0.0;
        for r in branches {
            if r.is_zero() {
                return Self::ZERO;
            }
            total += r.conductance();
        }
        Self::from_conductance(total)
    }
}

pub fn series(a: ExtResistance, b: ExtResistance) -> ExtResistance {
    a.series(b)
}

pub fn parallel(a: ExtResistance, b: ExtResistance) -> ExtResistance {
    a.parallel(b)
}

impl Add for ExtResistance {
    type Output = ExtResistance;

    fn add(self, rhs: Self) -> Self {
        self.series(rhs)
    }
}

impl Eq for ExtResistance {}

impl PartialOrd for ExtResistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtResistance {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl fmt::Display for ExtResistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinite() {
            f.write_str("inf")
        } else {
            fmt::Display::fmt(&self.0, f)
        }
    }
}

impl FromStr for ExtResistance {
    type Err = ResistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(Self::INFINITY);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| ResistanceError::Parse(s.to_string()))?;
        Self::new(v)
    }
}

impl From<ExtResistance> for f64 {
    fn from(r: ExtResistance) -> f64 {
        r.0
    }
}

// JSON has no infinity, so ∞ travels as the string "inf".
impl Serialize for ExtResistance {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.is_infinite() {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for ExtResistance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => ExtResistance::new(v).map_err(serde::de::Error::custom),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}
