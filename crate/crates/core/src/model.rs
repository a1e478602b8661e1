//! Two-qubit Ising Hamiltonian and the thermal single-spin-flip environment.
//!
//! Basis ordering is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ (indices 0..4 here, 1..4 in the
//! usual physics labels). Energies and temperatures are in units of the
//! coupling J, rates in units of γ0, with ħ = k_B = 1.

use nalgebra::{Complex, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Number of basis states of the two-qubit system.
pub const LEVELS: usize = 4;

/// Physical parameters in reduced units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "Bx")]
    pub bx: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub gamma0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            j: 1.0,
            b: 0.9,
            bx: 0.0,
            t: 0.5,
            gamma0: 1.0,
        }
    }
}

impl ModelParams {
    /// Longitudinal-field model with `J = γ0 = 1`.
    pub fn reduced(b: f64, t: f64) -> Self {
        Self {
            b,
            t,
            ..Self::default()
        }
    }

    pub fn with_bx(mut self, bx: f64) -> Self {
        self.bx = bx;
        self
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j > 0.0 && self.j.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "J must be positive and finite, got {}",
                self.j
            )));
        }
        if !self.b.is_finite() || !self.bx.is_finite() {
            return Err(Error::InvalidParams("B and Bx must be finite".into()));
        }
        // T = +inf is accepted as the infinite-temperature limit.
        if self.t.is_nan() || self.t < 0.0 {
            return Err(Error::InvalidParams(format!("T must be >= 0, got {}", self.t)));
        }
        if !(self.gamma0 > 0.0 && self.gamma0.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma0 must be positive and finite, got {}",
                self.gamma0
            )));
        }
        Ok(())
    }

    /// Diagonal energies of the longitudinal Hamiltonian,
    /// `(−J−B, 0, 0, −J+B)`.
    pub fn energies(&self) -> [f64; LEVELS] {
        [-self.j - self.b, 0.0, 0.0, -self.j + self.b]
    }
}

/// 4×4 Hermitian Hamiltonian in the product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub matrix: Matrix4<C64>,
}

impl Hamiltonian {
    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.matrix - self.matrix.adjoint()).camax() <= tol
    }
}

/// Lindblad operator `√rate |to⟩⟨from|` for a single spin flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpOperator {
    pub from: usize,
    pub to: usize,
    pub rate: f64,
}

impl JumpOperator {
    pub fn matrix(&self) -> Matrix4<C64> {
        let mut m = Matrix4::zeros();
        m[(self.to, self.from)] = C64::new(self.rate.sqrt(), 0.0);
        m
    }

    /// Physics-style label such as `"12"` for the |↑↑⟩ → |↑↓⟩ flip.
    pub fn label(&self) -> String {
        format!("{}{}", self.from + 1, self.to + 1)
    }
}

/// The four pairs of states connected by flipping exactly one spin.
pub const SPIN_FLIP_PAIRS: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];

/// Hamiltonian with the longitudinal part fixed to `diag(−J−B, 0, 0, −J+B)`
/// and an optional transverse term `Bx (s_x ⊗ 1 + 1 ⊗ s_x)` with spin-½
/// operators.
pub fn build_hamiltonian(params: &ModelParams) -> Hamiltonian {
    let e = params.energies();
    let mut m = Matrix4::<C64>::zeros();
    for (k, &ek) in e.iter().enumerate() {
        m[(k, k)] = C64::new(ek, 0.0);
    }
    if params.bx != 0.0 {
        let off = C64::new(0.5 * params.bx, 0.0);
        for &(a, b) in &SPIN_FLIP_PAIRS {
            m[(a, b)] = off;
            m[(b, a)] = off;
        }
    }
    Hamiltonian { matrix: m }
}

/// Detailed-balance transition rate for an energy change
/// `delta_e = E_final − E_initial`:
/// `γ0 · exp(−ΔE/2T) / cosh(ΔE/2T)`.
///
/// Evaluated as `2γ0 / (1 + exp(ΔE/T))`, which stays finite for any
/// `ΔE/T`. At `T = 0` the analytic limit is returned: 0 uphill, γ0 for
/// degenerate levels, 2γ0 downhill.
pub fn thermal_rate(delta_e: f64, t: f64, gamma0: f64) -> f64 {
    if t == 0.0 {
        return if delta_e > 0.0 {
            0.0
        } else if delta_e < 0.0 {
            2.0 * gamma0
        } else {
            gamma0
        };
    }
    2.0 * gamma0 / (1.0 + (delta_e / t).exp())
}

/// The eight single-spin-flip jump operators (both directions of every
/// pair in [`SPIN_FLIP_PAIRS`]).
///
/// Rates always use the longitudinal energies; a transverse field only
/// enters the Hamiltonian.
pub fn build_jump_operators(params: &ModelParams) -> Vec<JumpOperator> {
    let e = params.energies();
    let mut ops = Vec::with_capacity(8);
    for &(a, b) in &SPIN_FLIP_PAIRS {
        for (from, to) in [(a, b), (b, a)] {
            ops.push(JumpOperator {
                from,
                to,
                rate: thermal_rate(e[to] - e[from], params.t, params.gamma0),
            });
        }
    }
    ops
}

/// Rate of the operator taking `from → to`, or `None` if the two states are
/// not connected by a single spin flip.
pub fn rate_between(ops: &[JumpOperator], from: usize, to: usize) -> Option<f64> {
    ops.iter().find(|v| v.from == from && v.to == to).map(|v| v.rate)
}
