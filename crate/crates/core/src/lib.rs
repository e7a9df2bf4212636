//! Numerical toolkit for the joint estimation of an interferometric phase
//! and the amplitude of phase diffusion.
//!
//! The crate is organised around a small set of building blocks:
//!
//! - [`fock`]: truncated two-mode Fock-space states (N00N, Holland-Burnett,
//!   split photons) and linear optics (beam splitters, mode operators);
//! - [`channels`]: phase shift, phase diffusion and photon loss, together
//!   with analytic state derivatives with respect to the two parameters;
//! - [`estimation`]: symmetric-logarithmic-derivative solver, quantum and
//!   classical Fisher information, precision trade-off metrics;
//! - [`measurements`]: concrete measurement models (equatorial POVMs, the
//!   tunable four-outcome Sagnac POVM, Bell measurement, double homodyne,
//!   photon counting);
//! - [`anneal`]: simulated annealing over projective measurements, mapping
//!   precision frontiers with an optional entanglement-entropy objective;
//! - [`tomo`]: synthetic detector tomography with maximum-likelihood POVM
//!   reconstruction and Monte-Carlo error bars.

pub mod anneal;
pub mod channels;
pub mod error;
pub(crate) mod linalg;
pub mod quadrature;
pub mod estimation;
pub mod fock;
pub mod measurements;
pub mod tomo;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix used throughout.
pub type CMatrix = nalgebra::DMatrix<C64>;
