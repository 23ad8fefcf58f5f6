//! Random resistor networks on complete graphs and Galton–Watson family trees.
//!
//! The crate is organised bottom-up:
//!
//! - [`ext`], [`network`], [`quotient`], [`solve`]: exact effective resistance of
//!   finite multigraphs whose edge resistances may be `0` or `∞`.
//! - [`walk`]: the random-walk view of potentials (transition matrices, hitting
//!   probabilities) and the escape-probability bound on trees.
//! - [`dist`], [`gw`]: offspring laws, edge-resistance distributions and
//!   Galton–Watson family trees with their resistance recursion.
//! - [`complete`]: the random network on `K_{n+2}`, lazy conducting-layer
//!   exploration, the tree coupling and the auxiliary networks built from
//!   pairs of trees.
//! - [`experiments`]: seeded, parallel Monte Carlo harnesses and reports.

pub mod complete;
pub mod dist;
pub mod experiments;
pub mod ext;
pub mod gw;
mod linalg;
pub mod network;
pub mod quotient;
pub mod seed;
pub mod solve;
pub mod walk;

pub use ext::{parallel, series, ExtResistance};
pub use network::{Edge, ResistorNetwork};
pub use quotient::{quotient, QuotientNetwork};
pub use solve::{
    effective_resistance, solve_potentials, try_effective_resistance, PotentialSolution, SolveError,
};
