//! Secular equation of an exponential memory kernel.
//!
//! With `K(t) = e^{−t/τ}/τ` the Laplace-domain equation
//! `det(sI − M_H − K(s) M_L) = 0` becomes, after multiplying through by
//! `τ s + 1`, the quadratic eigenproblem
//! `τ s² I + s (I − τ M_H) − (M_H + M_L) = 0` with 32 roots. Sixteen of them
//! continue the Markovian eigenvalues as `τ → 0` and the other sixteen run
//! off like `−1/τ`.
//!
//! Whenever `M_L` is singular the cleared polynomial also vanishes at the
//! kernel pole `s = −1/τ`, once per null direction of `M_L`. Those roots are
//! reported in the kernel branch and flagged as pole artifacts; the secular
//! determinant itself is undefined there.
//!
//! Positivity of the non-Markovian dynamics is not certified. For some
//! kernels the density matrix may lose positivity.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, match_nearest, qep_eigenvalues};
use crate::model::C64;
use crate::spectrum::{check_dim, ZERO_RATE};
use crate::superop::{LiouvillianSplit, DIM};

/// Largest multiplicative step in τ between two continuation points.
pub const CONTINUATION_RATIO: f64 = 1.02;
/// Relative smallest singular value below which a root passes substitution.
pub const SUBSTITUTION_TOL: f64 = 1e-7;
/// Relative distance to `−1/τ` below which a root is a pole artifact.
pub const POLE_TOL: f64 = 1e-8;

/// Shape of the memory kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum KernelKind {
    /// `K(t) = e^{−t/τ}/τ`, Laplace transform `1/(τ s + 1)`.
    Exponential,
    /// `K(t) ∝ t^{−exponent}`. Its transform has a branch cut and no finite
    /// linearization, so it is rejected.
    PowerLaw { exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub kind: KernelKind,
    pub tau_m: f64,
}

impl KernelSpec {
    pub fn exponential(tau_m: f64) -> Self {
        Self {
            kind: KernelKind::Exponential,
            tau_m,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tau_m.is_finite() || self.tau_m < 0.0 {
            return Err(Error::InvalidParams(format!(
                "memory time must be finite and >= 0, got {}",
                self.tau_m
            )));
        }
        match self.kind {
            KernelKind::Exponential => Ok(()),
            KernelKind::PowerLaw { exponent } => Err(Error::UnsupportedKernel(format!(
                "power-law kernel (exponent {exponent}) has no rational Laplace transform, \
                 so the secular equation is transcendental without simple poles"
            ))),
        }
    }
}

/// `K(s) = 1/(τ s + 1)`.
pub fn kernel_laplace(spec: &KernelSpec, s: C64) -> Result<C64> {
    spec.validate()?;
    let denom = s * spec.tau_m + 1.0;
    if denom.norm() <= f64::EPSILON * (1.0 + (s * spec.tau_m).norm()) {
        return Err(Error::KernelPole { re: s.re, im: s.im });
    }
    Ok(denom.inv())
}

/// Roots of the secular equation at one memory time.
#[derive(Debug, Clone, PartialEq)]
pub struct SecularRootSet {
    pub tau_m: f64,
    /// Continuations of the Markovian eigenvalues.
    pub physical: Vec<C64>,
    /// Roots diverging like `−1/τ`; empty at `τ = 0`.
    pub kernel_branch: Vec<C64>,
    /// Physical root closest to `s = 0`.
    pub zero_mode: C64,
    /// A branch assignment on the way here had a tie.
    pub ambiguous: bool,
}

impl SecularRootSet {
    fn new(tau_m: f64, physical: Vec<C64>, kernel_branch: Vec<C64>, ambiguous: bool) -> Self {
        let zero_mode = physical
            .iter()
            .copied()
            .min_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        Self {
            tau_m,
            physical,
            kernel_branch,
            zero_mode,
            ambiguous,
        }
    }

    pub fn all_roots(&self) -> Vec<C64> {
        self.physical.iter().chain(&self.kernel_branch).copied().collect()
    }

    /// `−Re s` of the physical roots, in branch order.
    pub fn physical_rates(&self) -> Vec<f64> {
        self.physical.iter().map(|s| -s.re).collect()
    }

    pub fn nonzero_physical_rates(&self) -> Vec<f64> {
        self.physical_rates().into_iter().filter(|r| *r > ZERO_RATE).collect()
    }

    /// Max minus min of the nonzero physical rates.
    pub fn rate_spread(&self) -> f64 {
        let r = self.nonzero_physical_rates();
        if r.is_empty() {
            return 0.0;
        }
        let (lo, hi) = r.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
        hi - lo
    }

    pub fn is_pole_artifact(&self, s: C64) -> bool {
        is_pole_artifact(s, self.tau_m)
    }

    pub fn pole_artifacts(&self) -> usize {
        self.kernel_branch.iter().filter(|s| self.is_pole_artifact(**s)).count()
    }
}

pub fn is_pole_artifact(s: C64, tau_m: f64) -> bool {
    tau_m > 0.0 && (s * tau_m + 1.0).norm() <= POLE_TOL
}

/// The three coefficients `(A₂, A₁, A₀)` of the cleared secular equation.
pub fn qep_coefficients(split: &LiouvillianSplit, tau_m: f64) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let id = DMatrix::<f64>::identity(DIM, DIM);
    let a2 = &id * tau_m;
    let a1 = &id - &split.hamiltonian * tau_m;
    let a0 = -split.total();
    (a2, a1, a0)
}

fn qep_roots(split: &LiouvillianSplit, tau_m: f64) -> Result<Vec<C64>> {
    let (a2, a1, a0) = qep_coefficients(split, tau_m);
    qep_eigenvalues(&a2, &a1, &a0)
}

/// Split freshly computed roots by magnitude; valid only while `1/τ` is far
/// above the Markovian spectral radius.
fn classify_separated(tau_m: f64, roots: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let (kernel, physical) = sorted.split_at(DIM);
    check_heuristic(tau_m, physical, kernel)?;
    Ok((physical.to_vec(), kernel.to_vec()))
}

/// Kernel roots must sit left of `−0.5/τ` and physical roots right of it.
fn check_heuristic(tau_m: f64, physical: &[C64], kernel: &[C64]) -> Result<()> {
    let cut = -0.5 / tau_m;
    let kernel_ok = kernel.iter().filter(|s| s.re < cut).count();
    let physical_ok = physical.iter().filter(|s| s.re >= cut).count();
    if kernel_ok != DIM || physical_ok != DIM {
        return Err(Error::Classification {
            physical: physical_ok + (DIM - kernel_ok),
            kernel: kernel_ok + (DIM - physical_ok),
        });
    }
    Ok(())
}

/// Memory time small enough for the magnitude split to be unambiguous.
fn separated_tau(split: &LiouvillianSplit) -> Result<f64> {
    let radius = eigenvalues(&split.total())?.iter().fold(0.0f64, |m, s| m.max(s.norm()));
    Ok(1e-4 / (1.0 + radius))
}

fn markov_set(split: &LiouvillianSplit) -> Result<SecularRootSet> {
    Ok(SecularRootSet::new(
        0.0,
        eigenvalues(&split.total())?,
        Vec::new(),
        false,
    ))
}

/// Continuation state: 32 roots with the first 16 physical.
#[derive(Clone)]
struct Branches {
    tau_m: f64,
    roots: Vec<C64>,
    ambiguous: bool,
}

impl Branches {
    fn start(split: &LiouvillianSplit, tau_m: f64) -> Result<Self> {
        let (physical, kernel) = classify_separated(tau_m, &qep_roots(split, tau_m)?)?;
        Ok(Self {
            tau_m,
            roots: physical.into_iter().chain(kernel).collect(),
            ambiguous: false,
        })
    }

    fn set(&self) -> SecularRootSet {
        SecularRootSet::new(
            self.tau_m,
            self.roots[..DIM].to_vec(),
            self.roots[DIM..].to_vec(),
            self.ambiguous,
        )
    }

    /// Follow the roots to `target` through geometric substeps.
    fn advance(&mut self, split: &LiouvillianSplit, target: f64) -> Result<()> {
        self.ambiguous = false;
        if target <= self.tau_m {
            return Ok(());
        }
        let steps = ((target / self.tau_m).ln() / CONTINUATION_RATIO.ln()).ceil().max(1.0) as usize;
        let ratio = (target / self.tau_m).powf(1.0 / steps as f64);
        let taus: Vec<f64> = (1..=steps)
            .map(|k| {
                if k == steps {
                    target
                } else {
                    self.tau_m * ratio.powi(k as i32)
                }
            })
            .collect();
        let solved = taus
            .par_iter()
            .map(|&tau| qep_roots(split, tau))
            .collect::<Result<Vec<_>>>()?;
        for (tau, roots) in taus.into_iter().zip(solved) {
            let m = match_nearest(&self.roots, &roots)?;
            self.roots = m.ordered;
            self.ambiguous |= m.ambiguous;
            self.tau_m = tau;
        }
        Ok(())
    }
}

/// All 32 roots at one memory time, classified by continuation from a
/// memory time where the two branches are far apart. `τ = 0` returns the
/// Markovian spectrum with an empty kernel branch.
pub fn secular_roots(split: &LiouvillianSplit, spec: &KernelSpec) -> Result<SecularRootSet> {
    spec.validate()?;
    check_dim(split)?;
    if spec.tau_m == 0.0 {
        return markov_set(split);
    }
    let start = separated_tau(split)?;
    let mut branches = Branches::start(split, spec.tau_m.min(start))?;
    branches.advance(split, spec.tau_m)?;
    Ok(branches.set())
}

/// Root sets along an increasing τ grid with stable branch identity:
/// `physical[i]` at every grid point continues the same branch.
pub fn tau_sweep(split: &LiouvillianSplit, tau_grid: &[f64]) -> Result<Vec<SecularRootSet>> {
    check_dim(split)?;
    let first = *tau_grid
        .first()
        .ok_or_else(|| Error::InvalidParams("tau grid is empty".into()))?;
    if !(first > 0.0 && first <= 1e-3) {
        return Err(Error::InvalidParams(format!(
            "tau grid must start in (0, 1e-3], got {first}"
        )));
    }
    if tau_grid.windows(2).any(|w| !(w[1] > w[0])) || tau_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParams(
            "tau grid must be finite and strictly increasing".into(),
        ));
    }
    let start = separated_tau(split)?;
    let mut branches = Branches::start(split, first.min(start))?;
    let mut out = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        branches.advance(split, tau)?;
        out.push(branches.set());
    }
    Ok(out)
}

/// Secular matrix `sI − M_H − K(s) M_L`.
pub fn secular_matrix(split: &LiouvillianSplit, spec: &KernelSpec, s: C64) -> Result<DMatrix<C64>> {
    let k = kernel_laplace(spec, s)?;
    let cplx = |m: &DMatrix<f64>| m.map(|x| C64::new(x, 0.0));
    Ok(DMatrix::<C64>::identity(DIM, DIM) * s - cplx(&split.hamiltonian) - cplx(&split.dissipative) * k)
}

/// `det(sI − M_H − K(s) M_L)`.
pub fn secular_determinant(split: &LiouvillianSplit, spec: &KernelSpec, s: C64) -> Result<C64> {
    Ok(secular_matrix(split, spec, s)?.lu().determinant())
}

/// `σ_min(A) / ‖A‖₂`. Since `|det A| = ∏ σ_i`, this is the determinant
/// test with a tolerance that is invariant under scaling of `A` and of its
/// individual columns.
pub fn relative_singularity(a: &DMatrix<C64>) -> f64 {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// How a root was verified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Substitution {
    /// `σ_min / ‖A‖₂` of the substituted matrix.
    pub singularity: f64,
    /// The root sits on the kernel pole, so the cleared matrix
    /// `(τ s + 1)(sI − M_H) − M_L` was used.
    pub cleared: bool,
}

impl Substitution {
    pub fn passes(&self) -> bool {
        self.singularity <= SUBSTITUTION_TOL
    }
}

/// Substitute `s` back into the secular equation, independently of the
/// quadratic eigenproblem.
pub fn substitute(split: &LiouvillianSplit, spec: &KernelSpec, s: C64) -> Result<Substitution> {
    spec.validate()?;
    if is_pole_artifact(s, spec.tau_m) {
        let cplx = |m: &DMatrix<f64>| m.map(|x| C64::new(x, 0.0));
        let shifted = DMatrix::<C64>::identity(DIM, DIM) * s - cplx(&split.hamiltonian);
        let cleared = shifted * (s * spec.tau_m + 1.0) - cplx(&split.dissipative);
        return Ok(Substitution {
            singularity: relative_singularity(&cleared),
            cleared: true,
        });
    }
    Ok(Substitution {
        singularity: relative_singularity(&secular_matrix(split, spec, s)?),
        cleared: false,
    })
}

/// `true` if the series has its maximum strictly inside and above both ends.
pub fn has_interior_maximum(series: &[f64]) -> bool {
    if series.len() < 3 {
        return false;
    }
    let (k, max) =
        series.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, x)| if x > acc.1 { (i, x) } else { acc },
        );
    let margin = 1e-9 * (1.0 + max.abs());
    k > 0 && k + 1 < series.len() && max > series[0] + margin && max > series[series.len() - 1] + margin
}

/// `−Re s` of physical branch `i` along a sweep.
pub fn branch_rates(sweep: &[SecularRootSet], i: usize) -> Vec<f64> {
    sweep.iter().map(|set| -set.physical[i].re).collect()
}

/// Physical branches whose rate has an interior maximum (a cusp).
pub fn cusp_branches(sweep: &[SecularRootSet]) -> Vec<usize> {
    let n = sweep.first().map_or(0, |s| s.physical.len());
    (0..n)
        .filter(|&i| has_interior_maximum(&branch_rates(sweep, i)))
        .collect()
}

/// A real root of a tracked branch merging with another real root into a
/// conjugate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collision {
    /// Bracket around the merge, a few ulps wide.
    pub tau_lo: f64,
    pub tau_hi: f64,
    /// Tracked root at `tau_lo`.
    pub root: f64,
    /// The root that becomes its conjugate, at `tau_lo`.
    pub partner: f64,
    pub partner_is_physical: bool,
    /// Tracked root at `tau_hi`.
    pub merged: C64,
}

impl Collision {
    pub fn gap(&self) -> f64 {
        (self.root - self.partner).abs()
    }
}

/// Follow physical `branch` from `from` up to `tau_hi` and bisect for the
/// memory time at which it leaves the real axis. `None` if it is not real
/// at the start or still real at `tau_hi`.
pub fn locate_collision(
    split: &LiouvillianSplit,
    from: &SecularRootSet,
    branch: usize,
    tau_hi: f64,
) -> Result<Option<Collision>> {
    if branch >= from.physical.len() || from.kernel_branch.len() != DIM {
        return Err(Error::InvalidParams(format!("no tracked physical branch {branch}")));
    }
    if !(tau_hi > from.tau_m) {
        return Err(Error::InvalidParams(format!(
            "tau_hi {tau_hi} must exceed {}",
            from.tau_m
        )));
    }
    let mut lo = Branches {
        tau_m: from.tau_m,
        roots: from.all_roots(),
        ambiguous: false,
    };
    if lo.roots[branch].im != 0.0 {
        return Ok(None);
    }
    let mut hi = lo.clone();
    hi.advance(split, tau_hi)?;
    if hi.roots[branch].im == 0.0 {
        return Ok(None);
    }
    while hi.tau_m - lo.tau_m > 1e-14 * hi.tau_m {
        let mut mid = lo.clone();
        mid.advance(split, 0.5 * (lo.tau_m + hi.tau_m))?;
        if mid.roots[branch].im == 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let merged = hi.roots[branch];
    let partner = (0..hi.roots.len())
        .filter(|&j| j != branch)
        .min_by(|&a, &b| {
            (hi.roots[a] - merged.conj())
                .norm()
                .total_cmp(&(hi.roots[b] - merged.conj()).norm())
        })
        .expect("32 roots");
    Ok(Some(Collision {
        tau_lo: lo.tau_m,
        tau_hi: hi.tau_m,
        root: lo.roots[branch].re,
        partner: lo.roots[partner].re,
        partner_is_physical: partner < DIM,
        merged,
    }))
}
