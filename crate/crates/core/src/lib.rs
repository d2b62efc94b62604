//! Numerical laboratory for a crypto-nonlocal hidden-variable model of a
//! pair of qubits.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: exact two-qubit predictions used as ground truth.
//! - [`geometry`], [`numerics`], [`mc`]: unit vectors, adaptive quadrature
//!   and root bracketing, and counter-based Monte Carlo streams.
//! - [`ontic`]: the deterministic threshold model, its effective setting,
//!   and the intermediate-level averages.
//! - [`departure`]: the variance of the intermediate average and its bound.
//! - [`logic`]: finite joint distributions and the FR / FW / NS / ST
//!   conditional-independence predicates.

pub mod departure;
pub mod error;
pub mod geometry;
pub mod logic;
pub mod mc;
pub mod numerics;
pub mod ontic;
pub mod quantum;

pub use error::{Error, Result};
pub use geometry::{SphericalCoords, UnitVec3};
pub use quantum::{Outcome, OutcomeDistribution, Setting, TwoQubitState};
