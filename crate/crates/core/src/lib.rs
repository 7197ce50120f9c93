//! Desk-scale numerics for quantum energy inequalities.
//!
//! The crate evaluates closed-form and kernel-derived lower bounds on
//! smeared energy densities, realizes negative-energy states in truncated
//! Fock spaces of a 1+1-dimensional scalar field, decides quantum-interest
//! admissibility of energy profiles through Schrödinger-operator positivity,
//! quantizes phase-space symbols in the Weyl calculus, and analyses scaling
//! limits of smeared n-point functionals.
//!
//! Natural units `ħ = c = 1` throughout; Fourier transforms follow
//! `f̂(k) = ∫ f(x) e^{ikx} dx`.

pub mod error;
pub mod fock;
pub mod qei_bounds;
pub mod quadrature;
pub mod quantum_interest;
pub mod sampling;
pub mod scaling;
pub mod special;
pub mod weyl_wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Version string embedded in every JSON artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
