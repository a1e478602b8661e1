//! Dense kernels on small real matrices: nonsymmetric eigendecomposition,
//! null spaces, the matrix exponential and quadratic eigenvalue problems.
//!
//! The eigensolver takes the real Schur form, rotates
//! its 2×2 blocks into a complex triangular form and back-substitutes for
//! the eigenvectors. Every returned pair is checked against
//! `‖A v − λ v‖ ≤ 1e-9 ‖A‖`.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, Schur};

use crate::error::{Error, Result};
use crate::model::C64;

/// Relative residual bound enforced on every eigenpair.
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;

/// Relative threshold below which a singular value counts as zero.
pub const NULL_TOL: f64 = 1e-10;

/// Schur deflation thresholds tried in turn, in units of machine epsilon.
const SCHUR_DEFLATION: [f64; 3] = [1.0, 4.0, 16.0];

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: C64,
    /// Unit 2-norm; the largest component is real and positive.
    pub vector: DVector<C64>,
}

impl EigenPair {
    /// `‖A v − λ v‖₂` for a real matrix `A`.
    pub fn residual(&self, a: &DMatrix<f64>) -> f64 {
        let av = a.map(|x| C64::new(x, 0.0)) * &self.vector;
        (av - &self.vector * self.value).norm()
    }

    pub fn rate(&self) -> f64 {
        -self.value.re
    }
}

/// Descending real part, ties broken by ascending imaginary part.
pub fn eigen_order(a: &C64, b: &C64) -> Ordering {
    b.re.partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then(a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

pub fn frobenius(a: &DMatrix<f64>) -> f64 {
    a.norm()
}

fn check_square(a: &DMatrix<f64>) -> Result<usize> {
    let n = a.nrows();
    if n == 0 || n != a.ncols() {
        return Err(Error::Dimension(format!(
            "expected a non-empty square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Dimension("matrix has non-finite entries".into()));
    }
    Ok(n)
}

/// Parlett–Reinsch balancing with power-of-two scalings (exact in floating
/// point). Returns `D⁻¹ A D` and the diagonal of `D`.
fn balance(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let mut b = a.clone();
    let mut d = vec![1.0; n];
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += b[(j, i)].abs();
                    r += b[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c >= g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    b[(j, i)] *= f;
                    b[(i, j)] /= f;
                }
            }
        }
        if done {
            return (b, d);
        }
    }
}

/// Eigenvalues of a real 2×2 block, conjugate-exact when complex.
fn block_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> (C64, C64) {
    let half_tr = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let disc = half_diff * half_diff + b * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (C64::new(half_tr + r, 0.0), C64::new(half_tr - r, 0.0))
    } else {
        let r = (-disc).sqrt();
        (C64::new(half_tr, r), C64::new(half_tr, -r))
    }
}

/// Rotate the 2×2 diagonal blocks of a real quasi-triangular Schur factor
/// into complex upper-triangular form, accumulating the rotations into `z`.
fn triangularize(t: &mut DMatrix<C64>, z: &mut DMatrix<C64>, blocks: &[usize]) {
    let n = t.nrows();
    for &k in blocks.iter().rev() {
        let m = k + 1;
        let (mu, _) = block_eigenvalues(t[(k, k)].re, t[(k, m)].re, t[(m, k)].re, t[(m, m)].re);
        let mu = mu - t[(m, m)];
        let sub = t[(m, k)];
        let r = (mu.norm_sqr() + sub.norm_sqr()).sqrt();
        if r == 0.0 {
            continue;
        }
        let c = mu / r;
        let s = sub / r;
        // G = [[c̄, s], [−s, c]]
        for j in k..n {
            let x = t[(k, j)];
            let y = t[(m, j)];
            t[(k, j)] = c.conj() * x + s * y;
            t[(m, j)] = -s * x + c * y;
        }
        // right-multiply by Gᴴ = [[c, −s̄], [s̄, c̄]]
        for i in 0..=m {
            let x = t[(i, k)];
            let y = t[(i, m)];
            t[(i, k)] = x * c + y * s.conj();
            t[(i, m)] = -x * s.conj() + y * c.conj();
        }
        for i in 0..n {
            let x = z[(i, k)];
            let y = z[(i, m)];
            z[(i, k)] = x * c + y * s.conj();
            z[(i, m)] = -x * s.conj() + y * c.conj();
        }
        t[(m, k)] = C64::new(0.0, 0.0);
    }
}

/// Eigenvector of the upper-triangular `t` for its `k`-th diagonal entry.
fn triangular_eigenvector(t: &DMatrix<C64>, k: usize, value: C64, small: f64) -> DVector<C64> {
    let mut x = DVector::<C64>::zeros(t.nrows());
    x[k] = C64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let mut s = C64::new(0.0, 0.0);
        for j in i + 1..=k {
            s += t[(i, j)] * x[j];
        }
        let mut d = t[(i, i)] - value;
        if d.norm() < small {
            d = C64::new(small, 0.0);
        }
        x[i] = -s / d;
        let big = x[i].norm();
        if big > 1e150 {
            x /= C64::new(big, 0.0);
        }
    }
    x
}

fn normalize_phase(v: &mut DVector<C64>) {
    let norm = v.norm();
    if norm > 0.0 {
        *v /= C64::new(norm, 0.0);
    }
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].norm() > v[best].norm() * (1.0 + 1e-12) {
            best = i;
        }
    }
    let phase = v[best] / C64::new(v[best].norm(), 0.0);
    if phase.norm() > 0.0 {
        *v /= phase;
        v[best] = C64::new(v[best].re, 0.0);
    }
}

/// Real Schur factorization `A = Q T Qᵀ`, with the diagonal balancing
/// scale (all ones unless the unbalanced iteration failed).
fn real_schur(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>, Vec<f64>)> {
    let n = check_square(a)?;
    let max_iter = 200 * n;
    // Balancing can blow up the normwise residual when entries span many
    // decades (underflowing thermal rates), so it is only a fallback for
    // non-convergence. The QR sweep can also stall at a deflation threshold
    // of exactly one ulp, so a few slightly looser thresholds are tried.
    let attempt = |m: &DMatrix<f64>| {
        SCHUR_DEFLATION
            .iter()
            .find_map(|&eps| Schur::try_new(m.clone(), eps * f64::EPSILON, max_iter))
    };
    if let Some(schur) = attempt(a) {
        let (q, t) = schur.unpack();
        return Ok((q, t, vec![1.0; n]));
    }
    let (balanced, scale) = balance(a);
    let schur = attempt(&balanced).ok_or(Error::NoConvergence {
        dim: n,
        iterations: max_iter,
    })?;
    let (q, t) = schur.unpack();
    Ok((q, t, scale))
}

/// Eigenvalues of a quasi-triangular Schur factor, the conjugate partner of
/// each slot, and the starting rows of its 2×2 blocks.
fn quasi_triangular_eigenvalues(t: &DMatrix<f64>) -> (Vec<C64>, Vec<Option<usize>>, Vec<usize>) {
    let n = t.nrows();
    let mut blocks = Vec::new();
    let mut values = vec![C64::new(0.0, 0.0); n];
    let mut partner: Vec<Option<usize>> = vec![None; n];
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (l1, l2) = block_eigenvalues(t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            if l1.im != 0.0 {
                partner[i] = Some(i + 1);
                partner[i + 1] = Some(i);
            }
            values[i] = l1;
            values[i + 1] = l2;
            blocks.push(i);
            i += 2;
        } else {
            values[i] = C64::new(t[(i, i)], 0.0);
            i += 1;
        }
    }
    (values, partner, blocks)
}

/// Full eigendecomposition of a real nonsymmetric matrix.
///
/// Complex eigenvalues come in exact conjugate pairs with conjugate
/// eigenvectors. The result is sorted with [`eigen_order`].
pub fn eig_real_nonsymmetric(a: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = check_square(a)?;
    let (q, t_real, scale) = real_schur(a)?;
    let (values, partner, blocks) = quasi_triangular_eigenvalues(&t_real);

    let mut t = t_real.map(|x| C64::new(x, 0.0));
    let mut z = q.map(|x| C64::new(x, 0.0));
    triangularize(&mut t, &mut z, &blocks);

    let t_norm = t.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let small = (f64::EPSILON * t_norm).max(f64::MIN_POSITIVE);

    let mut pairs: Vec<Option<EigenPair>> = vec![None; n];
    for k in 0..n {
        if pairs[k].is_some() {
            continue;
        }
        // For a conjugate pair, solve at whichever diagonal slot carries the
        // positive-imaginary value and conjugate for the partner.
        let (value, slot) = match partner[k] {
            Some(p) => {
                let pos = if values[k].im > 0.0 { values[k] } else { values[p] };
                let slot = if t[(k, k)].im > 0.0 { k } else { p };
                (pos, slot)
            }
            None => (values[k], k),
        };
        let x = triangular_eigenvector(&t, slot, t[(slot, slot)], small);
        let mut v = &z * x;
        for (vi, di) in v.iter_mut().zip(&scale) {
            *vi *= C64::new(*di, 0.0);
        }
        normalize_phase(&mut v);
        match partner[k] {
            Some(p) => {
                let conj = EigenPair {
                    value: value.conj(),
                    vector: v.map(|c| c.conj()),
                };
                pairs[k] = Some(EigenPair { value, vector: v });
                pairs[p] = Some(conj);
            }
            None => pairs[k] = Some(EigenPair { value, vector: v }),
        }
    }

    let mut pairs: Vec<EigenPair> = pairs.into_iter().map(|p| p.expect("filled")).collect();
    pairs.sort_by(|x, y| eigen_order(&x.value, &y.value));

    let bound = EIG_RESIDUAL_TOL * frobenius(a).max(f64::MIN_POSITIVE);
    for (index, p) in pairs.iter().enumerate() {
        let residual = p.residual(a);
        if !(residual <= bound) {
            return Err(Error::Residual { index, residual, bound });
        }
    }
    Ok(pairs)
}

/// Eigenvalues only, in [`eigen_order`].
///
/// Taken straight from the Schur factor, so no eigenvector is formed and no
/// residual is checked; this stays reliable on defective clusters.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<C64>> {
    let (_, t, _) = real_schur(a)?;
    let (mut values, _, _) = quasi_triangular_eigenvalues(&t);
    values.sort_by(eigen_order);
    Ok(values)
}

/// Null space of a real square matrix, from its singular value
/// decomposition.
#[derive(Debug, Clone)]
pub struct NullSpace {
    /// Orthonormal basis; `basis[0]` pairs with the smallest singular value.
    pub basis: Vec<DVector<f64>>,
    pub singular_values: Vec<f64>,
}

impl NullSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.basis[0]
    }
}

/// Unit vectors spanning `{v : ‖A v‖ ≤ 1e-10 ‖A‖}` (numerically).
pub fn null_vector(a: &DMatrix<f64>) -> Result<NullSpace> {
    let n = check_square(a)?;
    let norm = frobenius(a);
    let tol = NULL_TOL * norm.max(f64::MIN_POSITIVE);
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[x]
            .partial_cmp(&svd.singular_values[y])
            .unwrap_or(Ordering::Equal)
    });
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let basis: Vec<DVector<f64>> = order
        .iter()
        .take_while(|&&k| svd.singular_values[k] <= tol)
        .map(|&k| {
            let mut v = v_t.row(k).transpose().into_owned();
            // fix the sign: largest component positive
            let imax = v.iamax();
            if v[imax] < 0.0 {
                v.neg_mut();
            }
            v
        })
        .collect();
    if basis.is_empty() {
        return Err(Error::NoNullSpace {
            smallest: singular_values[0],
            tolerance: tol,
        });
    }
    Ok(NullSpace { basis, singular_values })
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a * 2f64.powi(-squarings);
    let b = &PADE13;
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9]) + &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8]) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &id * b[0];

    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// A root `s` of `det(A₂ s² + A₁ s + A₀) = 0` with its right vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QepRoot {
    pub value: C64,
    pub vector: DVector<C64>,
}

impl QepRoot {
    pub fn residual(&self, a2: &DMatrix<f64>, a1: &DMatrix<f64>, a0: &DMatrix<f64>) -> f64 {
        let s = self.value;
        let cplx = |m: &DMatrix<f64>| m.map(|x| C64::new(x, 0.0));
        let p = cplx(a2) * (s * s) + cplx(a1) * s + cplx(a0);
        (p * &self.vector).norm()
    }

    /// Normalization used in the backward-error bound.
    pub fn residual_scale(&self, a2: &DMatrix<f64>, a1: &DMatrix<f64>, a0: &DMatrix<f64>) -> f64 {
        let s = self.value.norm();
        a2.norm() * s * s + a1.norm() * s + a0.norm()
    }
}

/// Companion matrix `[[0, I], [−A₂⁻¹A₀, −A₂⁻¹A₁]]` of the quadratic
/// pencil `A₂ s² + A₁ s + A₀`.
fn companion(a2: &DMatrix<f64>, a1: &DMatrix<f64>, a0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = check_square(a2)?;
    if check_square(a1)? != n || check_square(a0)? != n {
        return Err(Error::Dimension("QEP coefficients differ in size".into()));
    }
    let inv = a2.clone().lu().try_inverse().ok_or(Error::SingularLeading)?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularLeading);
    }
    let mut c = DMatrix::<f64>::zeros(2 * n, 2 * n);
    c.view_mut((0, n), (n, n)).copy_from(&DMatrix::<f64>::identity(n, n));
    c.view_mut((n, 0), (n, n)).copy_from(&-(&inv * a0));
    c.view_mut((n, n), (n, n)).copy_from(&-(&inv * a1));
    Ok(c)
}

/// The `2n` roots of `det(A₂ s² + A₁ s + A₀) = 0`, without vectors.
pub fn qep_eigenvalues(a2: &DMatrix<f64>, a1: &DMatrix<f64>, a0: &DMatrix<f64>) -> Result<Vec<C64>> {
    eigenvalues(&companion(a2, a1, a0)?)
}

/// Solve the quadratic eigenproblem by companion linearization
/// `[[0, I], [−A₂⁻¹A₀, −A₂⁻¹A₁]] z = s z`, `z = (v, s v)`.
pub fn solve_qep(a2: &DMatrix<f64>, a1: &DMatrix<f64>, a0: &DMatrix<f64>) -> Result<Vec<QepRoot>> {
    let n = a2.nrows();
    let companion = companion(a2, a1, a0)?;
    let pairs = eig_real_nonsymmetric(&companion)?;
    Ok(pairs
        .into_iter()
        .map(|p| {
            let s = p.value;
            let top = p.vector.rows(0, n).into_owned();
            let mut v = if s.norm() > 1.0 {
                p.vector.rows(n, n).into_owned() / s
            } else {
                top
            };
            normalize_phase(&mut v);
            QepRoot { value: s, vector: v }
        })
        .collect())
}

/// Distance below which two matching candidates count as tied.
pub const MATCH_TIE_TOL: f64 = 1e-12;

/// Result of matching one set of roots onto another.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `next` reordered so that entry `i` continues `prev[i]`.
    pub ordered: Vec<C64>,
    /// `perm[i]` is the index into `next` assigned to `prev[i]`.
    pub perm: Vec<usize>,
    /// Some assignment had a competing candidate within [`MATCH_TIE_TOL`].
    pub ambiguous: bool,
}

/// Greedy global nearest-neighbour bijection between two root sets.
///
/// All pairwise distances are sorted and pairs are accepted shortest first,
/// ties resolved by index order so the outcome is deterministic.
pub fn match_nearest(prev: &[C64], next: &[C64]) -> Result<Matching> {
    let n = prev.len();
    if next.len() != n {
        return Err(Error::Dimension(format!(
            "cannot match {} roots onto {}",
            n,
            next.len()
        )));
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (i, a) in prev.iter().enumerate() {
        for (j, b) in next.iter().enumerate() {
            pairs.push(((a - b).norm(), i, j));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    let mut ambiguous = false;
    for &(d, i, j) in &pairs {
        if perm[i] != usize::MAX || taken[j] {
            continue;
        }
        let rival = (0..n)
            .filter(|&k| k != j && !taken[k])
            .any(|k| ((prev[i] - next[k]).norm() - d).abs() <= MATCH_TIE_TOL);
        ambiguous |= rival;
        perm[i] = j;
        taken[j] = true;
    }
    Ok(Matching {
        ordered: perm.iter().map(|&j| next[j]).collect(),
        perm,
        ambiguous,
    })
}
