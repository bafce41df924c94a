//! Entanglement and free-energy batteries.
//!
//! The crate computes entanglement monotones on finite-dimensional bipartite
//! states, decides battery-assisted convertibility (a transformation
//! `ρ ⊗ τ → σ ⊗ τ̃` is allowed when the battery's monotone value does not
//! drop), builds the explicit swap protocols and asymptotic rate plans, and
//! provides the thermodynamic counterpart with free-energy batteries.
//!
//! Module map:
//! - [`qmat`]: dense Hermitian linear algebra, entropies and divergences
//! - [`states`]: named states and the JSON state-file format
//! - [`measures`]: entanglement quantifiers, including the relative-entropy
//!   optimizer
//! - [`battery`]: feasibility, swap protocols, rates and bound checks
//! - [`thermo`]: Gibbs states, free energies and the thermal battery
//! - [`dilution`]: self-dilution curves and the embezzlement table
//! - [`numfmt`]: the fixed number format shared by CLI and CSV output
//! - [`cli`]: the `entbat` command-line front end

pub mod battery;
pub mod cli;
pub mod dilution;
pub mod error;
pub mod measures;
pub mod numfmt;
pub mod par;
pub mod qmat;
pub mod random;
pub mod states;
pub mod thermo;

pub use error::{Error, Result};
