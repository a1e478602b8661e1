//! Relaxation rates, mode labels and the steady state of the Liouvillian.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{eig_real_nonsymmetric, null_vector};
use crate::model::{build_hamiltonian, build_jump_operators, ModelParams, C64, LEVELS};
use crate::superop::{build_liouvillian, component_name, LiouvillianSplit, RhoVector, COHERENCE_PAIRS, DIM};

/// Relative tolerance separating exactly degenerate rates.
pub const EXACT_GROUP_TOL: f64 = 1e-8;
/// Relative tolerance for grouping rates the way they appear in plots.
pub const FIGURE_GROUP_TOL: f64 = 1e-3;
/// Rates below this (in units of γ0) are treated as zero.
pub const ZERO_RATE: f64 = 1e-9;
/// A component contributes to a mode label above this fraction of the
/// largest amplitude.
pub const LABEL_THRESHOLD: f64 = 0.1;

/// Liouvillian of the full model.
pub fn liouvillian(params: &ModelParams) -> LiouvillianSplit {
    build_liouvillian(&build_hamiltonian(params), &build_jump_operators(params))
}

/// One eigenmode of the Liouvillian.
#[derive(Debug, Clone)]
pub struct Mode {
    pub value: C64,
    /// `−Re λ`
    pub rate: f64,
    /// `Im λ`
    pub frequency: f64,
    /// Indices of the dominant [`RhoVector`] components.
    pub components: Vec<usize>,
    pub label: String,
    /// Index into [`SpectrumResult::groups`].
    pub group: usize,
    pub vector: DVector<C64>,
}

impl Mode {
    pub fn is_supported_on(&self, components: &[usize]) -> bool {
        self.components.iter().all(|c| components.contains(c))
    }
}

/// Modes sharing a relaxation rate within a tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGroup {
    /// Mean rate of the members.
    pub rate: f64,
    /// Indices into [`SpectrumResult::modes`].
    pub members: Vec<usize>,
}

/// Zero-eigenvalue sector of the Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyState {
    /// Unit-trace state; when the kernel is degenerate this is one element
    /// of [`basis`](Self::basis).
    pub state: RhoVector,
    /// Unit-trace (where possible) kernel basis.
    pub basis: Vec<RhoVector>,
}

impl SteadyState {
    pub fn kernel_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_unique(&self) -> bool {
        self.basis.len() == 1
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    /// Sorted by descending `Re λ` (ascending rate).
    pub modes: Vec<Mode>,
    pub steady_state: SteadyState,
    /// Coarse grouping ([`FIGURE_GROUP_TOL`]), ascending rate.
    pub groups: Vec<RateGroup>,
}

impl SpectrumResult {
    pub fn rates(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.rate).collect()
    }

    pub fn groups_with(&self, rel_tol: f64) -> Vec<RateGroup> {
        group_rates(&self.rates(), rel_tol)
    }

    /// Rates of the groups whose rate exceeds [`ZERO_RATE`].
    pub fn nonzero_group_rates(&self) -> Vec<f64> {
        self.groups.iter().map(|g| g.rate).filter(|&r| r > ZERO_RATE).collect()
    }

    /// Modes whose dominant components are `Re ρ_ab`/`Im ρ_ab` only.
    pub fn coherence_modes(&self, a: usize, b: usize) -> Vec<&Mode> {
        let i = crate::superop::coherence_index(a, b);
        self.modes.iter().filter(|m| m.is_supported_on(&[i, i + 1])).collect()
    }

    /// Smallest rate once one steady-state mode is set aside.
    pub fn slowest_decay_rate(&self) -> f64 {
        self.modes.get(1).map_or(f64::INFINITY, |m| m.rate)
    }
}

/// Partition rates into clusters: neighbours (after sorting) closer than
/// `rel_tol · max(|a|, |b|)` or [`ZERO_RATE`] share a group. Groups are
/// returned in ascending rate order.
pub fn group_rates(rates: &[f64], rel_tol: f64) -> Vec<RateGroup> {
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut prev: Option<f64> = None;
    for k in order {
        let r = rates[k];
        let joins = prev.is_some_and(|p| {
            let gap = r - p;
            gap <= ZERO_RATE || gap <= rel_tol * r.abs().max(p.abs())
        });
        if joins {
            groups.last_mut().expect("non-empty").push(k);
        } else {
            groups.push(vec![k]);
        }
        prev = Some(r);
    }
    groups
        .into_iter()
        .map(|members| RateGroup {
            rate: members.iter().map(|&k| rates[k]).sum::<f64>() / members.len() as f64,
            members,
        })
        .collect()
}

fn dominant_components(v: &DVector<C64>) -> Vec<usize> {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (0..v.len()).filter(|&i| v[i].norm() >= LABEL_THRESHOLD * max).collect()
}

/// `"pop"`, `"rho14"`, `"rho12+rho13"`, `"pop+rho23"`, ...
pub fn mode_label(components: &[usize]) -> String {
    let mut parts = Vec::new();
    if components.iter().any(|&c| c < LEVELS) {
        parts.push("pop".to_string());
    }
    for (k, &(a, b)) in COHERENCE_PAIRS.iter().enumerate() {
        let re = LEVELS + 2 * k;
        if components.contains(&re) || components.contains(&(re + 1)) {
            parts.push(format!("rho{}{}", a + 1, b + 1));
        }
    }
    parts.join("+")
}

/// Names of the dominant components, e.g. `["re14", "im14"]`.
pub fn component_names(components: &[usize]) -> Vec<String> {
    components.iter().map(|&c| component_name(c)).collect()
}

/// Eigen-decompose `M` and attach labels and coarse groups.
pub fn relaxation_spectrum(split: &LiouvillianSplit) -> Result<SpectrumResult> {
    let m = split.total();
    let pairs = eig_real_nonsymmetric(&m)?;
    let rates: Vec<f64> = pairs.iter().map(|p| -p.value.re).collect();
    let groups = group_rates(&rates, FIGURE_GROUP_TOL);
    let mut group_of = vec![0; rates.len()];
    for (g, grp) in groups.iter().enumerate() {
        for &k in &grp.members {
            group_of[k] = g;
        }
    }
    let modes = pairs
        .into_iter()
        .enumerate()
        .map(|(k, p)| {
            let components = dominant_components(&p.vector);
            Mode {
                value: p.value,
                rate: -p.value.re,
                frequency: p.value.im,
                label: mode_label(&components),
                components,
                group: group_of[k],
                vector: p.vector,
            }
        })
        .collect();
    Ok(SpectrumResult {
        modes,
        steady_state: steady_state(split)?,
        groups,
    })
}

fn unit_trace(v: &DVector<f64>) -> RhoVector {
    let mut r = RhoVector::from_dvector(v).expect("16 components");
    let tr = r.trace();
    if tr.abs() > 1e-12 {
        r = r.scaled(1.0 / tr);
    }
    r
}

/// Zero mode of `M`, normalized to unit trace. A degenerate kernel (the
/// `T = 0`, `|B| < J` metastable case) is reported through
/// [`SteadyState::basis`].
pub fn steady_state(split: &LiouvillianSplit) -> Result<SteadyState> {
    let ns = null_vector(&split.total())?;
    let basis: Vec<RhoVector> = ns.basis.iter().map(unit_trace).collect();
    let state = basis
        .iter()
        .find(|b| (b.trace() - 1.0).abs() < 1e-12)
        .copied()
        .unwrap_or(basis[0]);
    Ok(SteadyState { state, basis })
}

/// Gibbs populations `(1, e^{−(J+B)/T}, e^{−(J+B)/T}, e^{−2B/T}) / Z`,
/// evaluated relative to the lowest level so that no weight overflows.
pub fn gibbs_populations(params: &ModelParams) -> [f64; LEVELS] {
    let e = params.energies();
    let emin = e.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w = [0.0; LEVELS];
    for k in 0..LEVELS {
        w[k] = if params.t == 0.0 {
            if e[k] == emin {
                1.0
            } else {
                0.0
            }
        } else {
            (-(e[k] - emin) / params.t).exp()
        };
    }
    let z: f64 = w.iter().sum();
    w.map(|x| x / z)
}

/// `1 − sinh(J/T) / (cosh(B/T) + cosh(J/T))`, evaluated in a form that does
/// not overflow for small `T`. `T = 0` returns the limit (0, ½ or 1 for
/// `|B|` below, at or above `J`).
pub fn lambda1_expression(j: f64, b: f64, t: f64) -> f64 {
    let b = b.abs();
    if t == 0.0 {
        return if b < j {
            0.0
        } else if b == j {
            0.5
        } else {
            1.0
        };
    }
    let a = j / t;
    let c = b / t;
    let m = a.max(c);
    let num = (c - m).exp() + (-c - m).exp() + 2.0 * (-a - m).exp();
    let den = (a - m).exp() + (-a - m).exp() + (c - m).exp() + (-c - m).exp();
    num / den
}

/// Decoherence rate of `ρ14`: `2γ0 · lambda1_expression(J, B, T)`.
pub fn lambda1_analytic(j: f64, b: f64, t: f64, gamma0: f64) -> f64 {
    2.0 * gamma0 * lambda1_expression(j, b, t)
}

/// Spectrum at one transverse field.
#[derive(Debug, Clone)]
pub struct FieldPoint {
    pub bx: f64,
    pub eigenvalues: Vec<C64>,
    /// Number of coarse rate groups.
    pub group_count: usize,
}

impl FieldPoint {
    pub fn rates(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| -z.re).collect()
    }

    /// Smallest rate other than the steady-state mode.
    pub fn slowest_decay_rate(&self) -> f64 {
        self.eigenvalues.get(1).map_or(f64::INFINITY, |z| -z.re)
    }
}

/// Spectrum versus transverse field `Bx`; jump rates stay at their
/// `Bx = 0` values.
pub fn rate_vs_field_sweep(params: &ModelParams, bx_grid: &[f64]) -> Result<Vec<FieldPoint>> {
    params.validate()?;
    bx_grid
        .par_iter()
        .map(|&bx| {
            let spec = relaxation_spectrum(&liouvillian(&params.with_bx(bx)))?;
            Ok(FieldPoint {
                bx,
                group_count: spec.groups.len(),
                eigenvalues: spec.modes.iter().map(|m| m.value).collect(),
            })
        })
        .collect()
}

/// Eigenvalues of `M` (in [`crate::linalg::eigen_order`]) for each
/// parameter set, computed in parallel.
pub fn spectra(params: &[ModelParams]) -> Result<Vec<Vec<C64>>> {
    params
        .par_iter()
        .map(|p| {
            p.validate()?;
            crate::linalg::eigenvalues(&liouvillian(p).total())
        })
        .collect()
}

pub(crate) fn check_dim(split: &LiouvillianSplit) -> Result<()> {
    if split.hamiltonian.shape() != (DIM, DIM) || split.dissipative.shape() != (DIM, DIM) {
        return Err(Error::Dimension("Liouvillian must be 16x16".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grouping_respects_tolerances() {
        let r = [0.0, 1e-12, 2.0, 2.0 + 1e-9, 2.001, 4.0];
        let g = group_rates(&r, EXACT_GROUP_TOL);
        assert_eq!(g.len(), 4);
        let g = group_rates(&r, FIGURE_GROUP_TOL);
        assert_eq!(g.len(), 3);
        assert_eq!(g[1].members, vec![2, 3, 4]);
    }

    #[test]
    fn labels() {
        assert_eq!(mode_label(&[0, 3]), "pop");
        assert_eq!(mode_label(&[8, 9]), "rho14");
        assert_eq!(mode_label(&[4, 7]), "rho12+rho13");
        assert_eq!(mode_label(&[1, 10]), "pop+rho23");
    }

    #[test]
    fn lambda1_limits() {
        assert_eq!(lambda1_expression(1.0, 0.9, f64::INFINITY), 1.0);
        assert!((lambda1_expression(1.0, 0.9, 1e6) - 1.0).abs() < 1e-6);
        assert!((lambda1_expression(1.0, 1.0, 1e-3) - 0.5).abs() < 1e-12);
        let small = lambda1_expression(1.0, 0.9, 0.01);
        assert!((small / (-10.0f64).exp() - 1.0).abs() < 1e-3, "{small}");
        assert_eq!(lambda1_expression(1.0, 0.9, 0.0), 0.0);
        assert_eq!(lambda1_expression(1.0, 1.0, 0.0), 0.5);
        assert_eq!(lambda1_expression(1.0, 1.1, 0.0), 1.0);
    }

    #[test]
    fn lambda1_matches_direct_formula_where_it_is_safe() {
        for &(b, t) in &[(0.5, 0.3), (0.9, 1.0), (1.1, 5.0), (2.0, 0.7)] {
            let direct = 1.0 - (1.0f64 / t).sinh() / ((b / t).cosh() + (1.0f64 / t).cosh());
            assert!((lambda1_expression(1.0, b, t) - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn gibbs_weights() {
        let p = gibbs_populations(&ModelParams::reduced(0.9, 1.0));
        let w = [1.0, (-1.9f64).exp(), (-1.9f64).exp(), (-1.8f64).exp()];
        let z: f64 = w.iter().sum();
        for k in 0..4 {
            assert!((p[k] - w[k] / z).abs() < 1e-15);
        }
        assert_eq!(gibbs_populations(&ModelParams::reduced(0.9, 0.0)), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(gibbs_populations(&ModelParams::reduced(0.9, f64::INFINITY)), [0.25; 4]);
    }

    #[test]
    fn zero_temperature_kernel_is_degenerate_below_crossing() {
        let ss = steady_state(&liouvillian(&ModelParams::reduced(0.9, 0.0))).unwrap();
        assert_eq!(ss.kernel_dim(), 2);
        assert!(!ss.is_unique());
        let ss = steady_state(&liouvillian(&ModelParams::reduced(1.1, 0.0))).unwrap();
        assert_eq!(ss.kernel_dim(), 1);
        assert!((ss.state[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn low_temperature_steady_state_is_ground_state() {
        let ss = steady_state(&liouvillian(&ModelParams::reduced(0.9, 0.02))).unwrap();
        assert!(ss.is_unique());
        assert!((ss.state[0] - 1.0).abs() < 1e-12);
        for k in 1..DIM {
            assert!(ss.state[k].abs() < 1e-12);
        }
    }

    #[test]
    fn high_temperature_steady_state_is_maximally_mixed() {
        let ss = steady_state(&liouvillian(&ModelParams::reduced(0.9, 1e6))).unwrap();
        for k in 0..4 {
            assert!((ss.state[k] - 0.25).abs() < 1e-6);
        }
        let ss = steady_state(&liouvillian(&ModelParams::reduced(0.9, f64::INFINITY))).unwrap();
        for k in 0..4 {
            assert!((ss.state[k] - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn spectrum_at_intermediate_temperature() {
        let p = ModelParams::reduced(0.9, 0.5);
        let spec = relaxation_spectrum(&liouvillian(&p)).unwrap();
        assert_eq!(spec.modes.len(), 16);
        assert!(spec.modes[0].rate.abs() < 1e-12);
        assert!(spec.modes.iter().all(|m| m.rate > -1e-10));
        let l1 = lambda1_analytic(1.0, 0.9, 0.5, 1.0);
        let coh = spec.coherence_modes(0, 3);
        assert_eq!(coh.len(), 2);
        for m in coh {
            assert!((m.rate - l1).abs() < 1e-10);
            assert!((m.frequency.abs() - 1.8).abs() < 1e-10);
            assert_eq!(m.label, "rho14");
        }
        let zero_groups = spec.groups.iter().filter(|g| g.rate.abs() < ZERO_RATE).count();
        assert_eq!(zero_groups, 1);
        let ss = spec.steady_state.state;
        assert!((ss[1] - ss[2]).abs() < 1e-14);
    }

    #[test]
    fn field_sweep_keeps_order() {
        let grid = [0.0, 0.1, 0.2, 0.3];
        let pts = rate_vs_field_sweep(&ModelParams::reduced(0.9, 0.0), &grid).unwrap();
        let got: Vec<f64> = pts.iter().map(|p| p.bx).collect();
        assert_eq!(got, grid);
    }
}
