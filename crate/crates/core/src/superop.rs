//! Real vectorization of 4×4 density matrices and the Liouvillian matrix.
//!
//! A density matrix is stored as 16 real numbers: the four populations
//! followed by `(Re ρ_ab, Im ρ_ab)` for the upper-triangle pairs in
//! row-major order (12, 13, 14, 23, 24, 34). The equation of motion
//! `ρ̇ = −i[H, ρ] + Σ (V ρ V† − ½{V†V, ρ})` then becomes `ṙ = M r` with a
//! real 16×16 matrix `M`, kept split into its coherent and dissipative
//! parts.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::error::{Error, Result};
use crate::model::{Hamiltonian, JumpOperator, C64, LEVELS};

/// Length of the real state vector.
pub const DIM: usize = LEVELS * LEVELS;

/// Upper-triangle pairs in storage order.
pub const COHERENCE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Tolerance used when checking Hermiticity of an input matrix.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Position of `Re ρ_ab` in the vector (the imaginary part follows it).
pub fn coherence_index(a: usize, b: usize) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let k = COHERENCE_PAIRS
        .iter()
        .position(|&p| p == (a, b))
        .expect("coherence pair must be off-diagonal");
    LEVELS + 2 * k
}

/// Short name of vector component `i`: `p11`..`p44`, `re12`, `im12`, ...
pub fn component_name(i: usize) -> String {
    if i < LEVELS {
        return format!("p{0}{0}", i + 1);
    }
    let (a, b) = COHERENCE_PAIRS[(i - LEVELS) / 2];
    let part = if (i - LEVELS).is_multiple_of(2) { "re" } else { "im" };
    format!("{part}{}{}", a + 1, b + 1)
}

/// Density matrix in the real 16-component layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoVector(pub [f64; DIM]);

impl RhoVector {
    pub fn zeros() -> Self {
        Self([0.0; DIM])
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let arr: [f64; DIM] = v
            .try_into()
            .map_err(|_| Error::Dimension(format!("expected {DIM} components, got {}", v.len())))?;
        Ok(Self(arr))
    }

    pub fn from_dvector(v: &DVector<f64>) -> Result<Self> {
        Self::from_slice(v.as_slice())
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0[..LEVELS].iter().sum()
    }

    pub fn population(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// `ρ_ab` as a complex number, for any `a != b`.
    pub fn coherence(&self, a: usize, b: usize) -> C64 {
        let i = coherence_index(a, b);
        let z = C64::new(self.0[i], self.0[i + 1]);
        if a < b {
            z
        } else {
            z.conj()
        }
    }

    pub fn set_coherence(&mut self, a: usize, b: usize, value: C64) {
        let i = coherence_index(a, b);
        let z = if a < b { value } else { value.conj() };
        self.0[i] = z.re;
        self.0[i + 1] = z.im;
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|x| *x *= factor);
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for RhoVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for RhoVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl fmt::Display for RhoVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}={:.6e}", component_name(i), x)?;
        }
        Ok(())
    }
}

/// Largest entry of `|ρ − ρ†|`.
pub fn hermiticity_deviation(rho: &Matrix4<C64>) -> f64 {
    (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Pack a Hermitian 4×4 matrix into the real layout.
pub fn vectorize(rho: &Matrix4<C64>) -> Result<RhoVector> {
    let deviation = hermiticity_deviation(rho);
    let scale = rho.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if deviation > HERMITIAN_TOL * scale {
        return Err(Error::NotHermitian {
            deviation,
            tolerance: HERMITIAN_TOL,
        });
    }
    let mut v = RhoVector::zeros();
    for k in 0..LEVELS {
        v[k] = rho[(k, k)].re;
    }
    for &(a, b) in &COHERENCE_PAIRS {
        v.set_coherence(a, b, rho[(a, b)]);
    }
    Ok(v)
}

/// Inverse of [`vectorize`]; the result is Hermitian by construction.
pub fn devectorize(v: &RhoVector) -> Matrix4<C64> {
    let mut rho = Matrix4::<C64>::zeros();
    for k in 0..LEVELS {
        rho[(k, k)] = C64::new(v[k], 0.0);
    }
    for &(a, b) in &COHERENCE_PAIRS {
        let z = v.coherence(a, b);
        rho[(a, b)] = z;
        rho[(b, a)] = z.conj();
    }
    rho
}

/// The Liouvillian `M = hamiltonian + dissipative` acting on [`RhoVector`].
#[derive(Debug, Clone, PartialEq)]
pub struct LiouvillianSplit {
    pub hamiltonian: DMatrix<f64>,
    pub dissipative: DMatrix<f64>,
}

impl LiouvillianSplit {
    pub fn total(&self) -> DMatrix<f64> {
        &self.hamiltonian + &self.dissipative
    }

    pub fn apply(&self, v: &RhoVector) -> RhoVector {
        let out = self.total() * v.to_dvector();
        RhoVector::from_dvector(&out).expect("Liouvillian is 16x16")
    }
}

/// Column-stacking index of `ρ_ij` in the complex `vec(ρ)`.
fn vec_index(i: usize, j: usize) -> usize {
    i + LEVELS * j
}

/// Change of basis from column-stacked complex `vec(ρ)` to the real layout,
/// and its inverse.
fn real_basis() -> (DMatrix<C64>, DMatrix<C64>) {
    let half = C64::new(0.5, 0.0);
    let i_half = C64::new(0.0, 0.5);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let mut to_real = DMatrix::<C64>::zeros(DIM, DIM);
    let mut from_real = DMatrix::<C64>::zeros(DIM, DIM);
    for k in 0..LEVELS {
        to_real[(k, vec_index(k, k))] = one;
        from_real[(vec_index(k, k), k)] = one;
    }
    for &(a, b) in &COHERENCE_PAIRS {
        let re = coherence_index(a, b);
        let im = re + 1;
        let ab = vec_index(a, b);
        let ba = vec_index(b, a);
        // Re ρ_ab = (ρ_ab + ρ_ba)/2, Im ρ_ab = (ρ_ab − ρ_ba)/(2i)
        to_real[(re, ab)] = half;
        to_real[(re, ba)] = half;
        to_real[(im, ab)] = -i_half;
        to_real[(im, ba)] = i_half;
        from_real[(ab, re)] = one;
        from_real[(ab, im)] = i;
        from_real[(ba, re)] = one;
        from_real[(ba, im)] = -i;
    }
    (to_real, from_real)
}

fn to_dmatrix(m: &Matrix4<C64>) -> DMatrix<C64> {
    DMatrix::from_iterator(LEVELS, LEVELS, m.iter().copied())
}

/// Project a complex superoperator (acting on column-stacked `vec(ρ)`) onto
/// the real layout. Superoperators that preserve Hermiticity map to real
/// matrices; the discarded imaginary part is rounding noise.
fn realify(superop: &DMatrix<C64>) -> DMatrix<f64> {
    let (to_real, from_real) = real_basis();
    let m = to_real * superop * from_real;
    m.map(|z| z.re)
}

/// Assemble the Liouvillian from Kronecker-product superoperators, using
/// `vec(A ρ B) = (Bᵀ ⊗ A) vec(ρ)`.
pub fn build_liouvillian(h: &Hamiltonian, jumps: &[JumpOperator]) -> LiouvillianSplit {
    let id = DMatrix::<C64>::identity(LEVELS, LEVELS);
    let hm = to_dmatrix(&h.matrix);
    let minus_i = C64::new(0.0, -1.0);
    let coherent = (id.kronecker(&hm) - hm.transpose().kronecker(&id)) * minus_i;

    let mut dissipator = DMatrix::<C64>::zeros(DIM, DIM);
    for v in jumps {
        if v.rate == 0.0 {
            continue;
        }
        let vm = to_dmatrix(&v.matrix());
        let vdv = vm.adjoint() * &vm;
        dissipator += vm.conjugate().kronecker(&vm);
        dissipator -= id.kronecker(&vdv) * C64::new(0.5, 0.0);
        dissipator -= vdv.transpose().kronecker(&id) * C64::new(0.5, 0.0);
    }

    LiouvillianSplit {
        hamiltonian: realify(&coherent),
        dissipative: realify(&dissipator),
    }
}

/// Right-hand side of the Lindblad equation evaluated directly in 4×4
/// complex arithmetic.
pub fn lindblad_rhs(h: &Hamiltonian, jumps: &[JumpOperator], rho: &Matrix4<C64>) -> Matrix4<C64> {
    let i = C64::new(0.0, 1.0);
    let mut out = (h.matrix * rho - rho * h.matrix) * (-i);
    for v in jumps {
        let vm = v.matrix();
        let vd = vm.adjoint();
        let vdv = vd * vm;
        out += vm * rho * vd - (vdv * rho + rho * vdv) * C64::new(0.5, 0.0);
    }
    out
}
