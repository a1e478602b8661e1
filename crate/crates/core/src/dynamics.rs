//! Time evolution, concurrence and entanglement sudden death.

use nalgebra::{Matrix4, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::expm;
use crate::model::{ModelParams, C64};
use crate::spectrum::{gibbs_populations, lambda1_analytic, liouvillian};
use crate::superop::{devectorize, LiouvillianSplit, RhoVector};

/// Default search horizon for sudden death, in units of 1/γ0.
pub const DEFAULT_HORIZON: f64 = 1e4;
/// Trace drift tolerated along a trajectory.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted as positive semidefinite.
pub const POSITIVITY_TOL: f64 = -1e-9;

/// How the `ρ14` coherence of the X-shaped initial state is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Coherence {
    /// `ρ14 = √(ρ11 ρ44)`, the largest value compatible with positivity.
    Saturated,
    /// `ρ14 = ½` regardless of positivity.
    PaperLiteral,
    /// A given real value, checked for positivity.
    Value(f64),
}

/// State sampled along a trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RhoVector>,
    pub concurrence: Vec<f64>,
}

/// Largest `ρ14` for which the X state with Gibbs populations stays
/// positive semidefinite.
pub fn positivity_bound(params: &ModelParams) -> f64 {
    let p = gibbs_populations(params);
    (p[0] * p[3]).sqrt()
}

/// X-shaped state: Gibbs populations, `ρ14 = ρ41 = rho14`, no other
/// coherences. Fails if `|rho14| > ½` or the state is not positive.
pub fn xstate_initial(params: &ModelParams, rho14: f64) -> Result<RhoVector> {
    params.validate()?;
    if !(rho14.abs() <= 0.5) {
        return Err(Error::InvalidParams(format!("|rho14| must be <= 1/2, got {rho14}")));
    }
    let bound = positivity_bound(params);
    if rho14.abs() > bound * (1.0 + 1e-12) {
        let p = gibbs_populations(params);
        // smallest eigenvalue of the (1,4) block
        let half_sum = 0.5 * (p[0] + p[3]);
        let half_diff = 0.5 * (p[0] - p[3]);
        let min_eigenvalue = half_sum - (half_diff * half_diff + rho14 * rho14).sqrt();
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(xstate_unchecked(params, rho14))
}

fn xstate_unchecked(params: &ModelParams, rho14: f64) -> RhoVector {
    let mut v = RhoVector::zeros();
    for (k, p) in gibbs_populations(params).iter().enumerate() {
        v[k] = *p;
    }
    v.set_coherence(0, 3, C64::new(rho14, 0.0));
    v
}

/// X-shaped initial state for a [`Coherence`] choice. Only
/// [`Coherence::PaperLiteral`] skips the positivity check.
pub fn xstate_for(params: &ModelParams, choice: Coherence) -> Result<RhoVector> {
    match choice {
        Coherence::Saturated => xstate_initial(params, positivity_bound(params)),
        Coherence::PaperLiteral => {
            params.validate()?;
            Ok(xstate_unchecked(params, 0.5))
        }
        Coherence::Value(x) => xstate_initial(params, x),
    }
}

fn spin_flip() -> Matrix4<C64> {
    // σy ⊗ σy
    let mut y = Matrix4::<C64>::zeros();
    y[(0, 3)] = C64::new(-1.0, 0.0);
    y[(1, 2)] = C64::new(1.0, 0.0);
    y[(2, 1)] = C64::new(1.0, 0.0);
    y[(3, 0)] = C64::new(-1.0, 0.0);
    y
}

/// Smallest eigenvalue of a Hermitian 4×4 matrix.
pub fn min_eigenvalue(rho: &Matrix4<C64>) -> f64 {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Wootters concurrence `max(0, √e1 − √e2 − √e3 − √e4)`, with `e_i` the
/// eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)` in descending order.
///
/// The `e_i` are taken from the Hermitian matrix `√ρ ρ̃ √ρ`, which has the
/// same spectrum; `ρ` must be a density matrix.
pub fn concurrence(rho: &Matrix4<C64>) -> f64 {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let sqrt_vals = eig.eigenvalues.map(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let u = &eig.eigenvectors;
    let sqrt_rho = u * Matrix4::from_diagonal(&sqrt_vals) * u.adjoint();

    let y = spin_flip();
    let tilde = y * rho.conjugate() * y;
    let r = sqrt_rho * tilde * sqrt_rho;
    let r = (r + r.adjoint()) * C64::new(0.5, 0.0);
    let mut roots: Vec<f64> = SymmetricEigen::new(r)
        .eigenvalues
        .iter()
        .map(|&e| e.max(0.0).sqrt())
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    (roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0)
}

/// Closed-form concurrence of an X state,
/// `2 max(0, |ρ14| − √(ρ22 ρ33), |ρ23| − √(ρ11 ρ44))`.
///
/// Used for the `ρ14 = ½` initial state, which is not a valid density
/// matrix and so falls outside [`concurrence`].
pub fn concurrence_xstate(v: &RhoVector) -> f64 {
    let p = |k: usize| v[k].max(0.0);
    let outer = v.coherence(0, 3).norm() - (p(1) * p(2)).sqrt();
    let inner = v.coherence(1, 2).norm() - (p(0) * p(3)).sqrt();
    2.0 * outer.max(inner).max(0.0)
}

/// `exp(M t) ρ0` for each requested time, without any validity checks.
pub fn propagate_states(split: &LiouvillianSplit, rho0: &RhoVector, times: &[f64]) -> Vec<RhoVector> {
    let m = split.total();
    let r0 = rho0.to_dvector();
    times
        .par_iter()
        .map(|&t| {
            let out = expm(&(&m * t)) * &r0;
            RhoVector::from_dvector(&out).expect("16 components")
        })
        .collect()
}

/// Propagate a density matrix and evaluate its concurrence at each time.
/// Every state must keep unit trace and stay positive semidefinite.
pub fn propagate(split: &LiouvillianSplit, rho0: &RhoVector, times: &[f64]) -> Result<Trajectory> {
    let initial = devectorize(rho0);
    let min0 = min_eigenvalue(&initial);
    if min0 < POSITIVITY_TOL {
        return Err(Error::NotPositive { min_eigenvalue: min0 });
    }
    if (rho0.trace() - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidParams(format!("initial trace {} != 1", rho0.trace())));
    }
    let states = propagate_states(split, rho0, times);
    let mut values = Vec::with_capacity(states.len());
    for s in &states {
        let rho = devectorize(s);
        let min = min_eigenvalue(&rho);
        if min < POSITIVITY_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        values.push(concurrence(&rho));
    }
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        concurrence: values,
    })
}

/// Outcome of a sudden-death search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeathTime {
    At(f64),
    /// Concurrence still positive at the horizon.
    NoneWithin(f64),
}

impl DeathTime {
    pub fn time(&self) -> Option<f64> {
        match *self {
            DeathTime::At(t) => Some(t),
            DeathTime::NoneWithin(_) => None,
        }
    }
}

/// Sudden-death time from the closed form and from the propagated
/// trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuddenDeath {
    /// `ln(|ρ14| / √(ρ22 ρ33)) / λ1`
    pub closed_form: DeathTime,
    /// Bisection on `|ρ14(t)| − √(ρ22(t) ρ33(t))` along `exp(M t) ρ0`.
    pub propagated: DeathTime,
}

fn entanglement_margin(v: &RhoVector) -> f64 {
    v.coherence(0, 3).norm() - (v[1].max(0.0) * v[2].max(0.0)).sqrt()
}

/// Sudden-death time of the X-shaped initial state for `Bx = 0`.
pub fn sudden_death_time(params: &ModelParams, choice: Coherence, horizon: f64) -> Result<SuddenDeath> {
    if params.bx != 0.0 {
        return Err(Error::InvalidParams(
            "sudden-death search needs Bx = 0 (X states)".into(),
        ));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let rho0 = xstate_for(params, choice)?;
    let coherence = rho0.coherence(0, 3).norm();
    let floor = (rho0[1] * rho0[2]).sqrt();
    let lambda1 = lambda1_analytic(params.j, params.b, params.t, params.gamma0);

    let closed_form = if coherence <= floor {
        DeathTime::At(0.0)
    } else if floor == 0.0 || lambda1 == 0.0 {
        DeathTime::NoneWithin(horizon)
    } else {
        let t = (coherence / floor).ln() / lambda1;
        if t <= horizon {
            DeathTime::At(t)
        } else {
            DeathTime::NoneWithin(horizon)
        }
    };

    let m = liouvillian(params).total();
    let r0 = rho0.to_dvector();
    let margin_at = |t: f64| {
        let v = RhoVector::from_dvector(&(expm(&(&m * t)) * &r0)).expect("16 components");
        entanglement_margin(&v)
    };
    let propagated = if entanglement_margin(&rho0) <= 0.0 {
        DeathTime::At(0.0)
    } else if margin_at(horizon) > 0.0 {
        DeathTime::NoneWithin(horizon)
    } else {
        let (mut lo, mut hi) = (0.0, horizon);
        while hi - lo > 1e-13 * hi {
            let mid = 0.5 * (lo + hi);
            if margin_at(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        DeathTime::At(0.5 * (lo + hi))
    };

    Ok(SuddenDeath {
        closed_form,
        propagated,
    })
}

/// Concurrence on a temperature × time grid.
#[derive(Debug, Clone)]
pub struct PhaseDiagram {
    pub temperatures: Vec<f64>,
    pub times: Vec<f64>,
    /// `values[i][k]` is `C(temperatures[i], times[k])`.
    pub values: Vec<Vec<f64>>,
}

/// Concurrence of the propagated X state over a `(T, t)` grid, with the
/// closed X-state formula (valid for the `ρ14 = ½` choice as well).
pub fn concurrence_phase_diagram(
    params: &ModelParams,
    choice: Coherence,
    temperatures: &[f64],
    times: &[f64],
) -> Result<PhaseDiagram> {
    if temperatures.is_empty() || times.is_empty() {
        return Err(Error::InvalidParams("phase diagram grids must be non-empty".into()));
    }
    let values = temperatures
        .par_iter()
        .map(|&t| {
            let p = params.with_temperature(t);
            let rho0 = xstate_for(&p, choice)?;
            let states = propagate_states(&liouvillian(&p), &rho0, times);
            Ok(states.iter().map(concurrence_xstate).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(PhaseDiagram {
        temperatures: temperatures.to_vec(),
        times: times.to_vec(),
        values,
    })
}

/// Bell state `(|↑↑⟩ + |↓↓⟩)/√2`.
pub fn bell_state() -> Matrix4<C64> {
    let mut rho = Matrix4::<C64>::zeros();
    for &(a, b) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
        rho[(a, b)] = C64::new(0.5, 0.0);
    }
    rho
}
