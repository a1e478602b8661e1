//! Relaxation-rate spectra of an interacting two-qubit system coupled to a
//! thermal single-spin-flip environment.
//!
//! The crate builds the Lindblad Liouvillian of the Ising-coupled pair in a
//! real 16-component representation of the density matrix, diagonalizes it
//! to obtain every relaxation rate and the steady state, propagates
//! entangled initial states to study concurrence sudden death, and solves
//! the secular equation of an exponential memory kernel as a quadratic
//! eigenvalue problem.
//!
//! ```
//! use qubit_relax::prelude::*;
//!
//! let params = ModelParams::reduced(0.9, 0.5);
//! let split = liouvillian(&params);
//! let spectrum = relaxation_spectrum(&split).unwrap();
//! let lambda1 = lambda1_analytic(params.j, params.b, params.t, params.gamma0);
//! assert!(spectrum.modes.iter().any(|m| (m.rate - lambda1).abs() < 1e-10));
//! ```

// Guards such as `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod nonmarkov;
pub mod spectrum;
pub mod superop;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::error::{Error, Result};
    pub use crate::model::{build_hamiltonian, build_jump_operators, thermal_rate, ModelParams, C64};
    pub use crate::spectrum::{lambda1_analytic, lambda1_expression, liouvillian, relaxation_spectrum, steady_state};
    pub use crate::superop::{build_liouvillian, devectorize, vectorize, LiouvillianSplit, RhoVector};
}
