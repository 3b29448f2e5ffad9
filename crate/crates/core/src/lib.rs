//! Composite particles with an internal clock, evolving under the low-energy
//! Hamiltonian
//!
//! ```text
//! H = p²/2m + mgx + (1 − p²/2m²c² + gx/c²) H₀ + U_ext(x)
//! ```
//!
//! `H₀` enters only through its eigenvalues, so the joint dynamics splits into
//! one external Hamiltonian per internal level (see [`model::build_blocks`]).
//! The crate provides the classical limit ([`classical`]), quantum propagation
//! and bound-state spectra ([`quantum`]), reduced-state observables
//! ([`observables`]) and the config-driven experiments built on them
//! ([`scenarios`]).

pub mod classical;
pub mod error;
pub mod model;
pub mod numeric;
pub mod observables;
pub mod quantum;
pub mod scenarios;

pub use error::{Error, Result};
pub use num_complex::Complex64;
