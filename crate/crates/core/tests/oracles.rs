//! Independent cross-checks: the 16×16 Liouvillian against direct 4×4
//! arithmetic, exponential propagation against an adaptive Runge–Kutta
//! integrator, and the spectrum against hand bookkeeping of the rates.

mod common;

use nalgebra::{DMatrix, Matrix4};
use qubit_relax::dynamics::propagate_states;
use qubit_relax::model::{build_hamiltonian, build_jump_operators, ModelParams, C64, SPIN_FLIP_PAIRS};
use qubit_relax::spectrum::{liouvillian, relaxation_spectrum};
use qubit_relax::superop::{build_liouvillian, devectorize, lindblad_rhs, vectorize};
use rand::Rng;

fn random_params(rng: &mut rand::rngs::StdRng, transverse: bool) -> ModelParams {
    ModelParams {
        j: rng.gen_range(0.5..1.5),
        b: rng.gen_range(0.0..2.0),
        bx: if transverse { rng.gen_range(-0.5..0.5) } else { 0.0 },
        t: rng.gen_range(0.01..3.0),
        gamma0: rng.gen_range(0.2..2.0),
    }
}

fn max_abs(m: &Matrix4<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn superoperator_matches_direct_rhs() {
    let mut rng = common::rng(11);
    for k in 0..100 {
        let params = random_params(&mut rng, k % 2 == 1);
        let h = build_hamiltonian(&params);
        let jumps = build_jump_operators(&params);
        let split = build_liouvillian(&h, &jumps);
        let rho = common::random_density(&mut rng);
        let direct = lindblad_rhs(&h, &jumps, &rho);
        let via_super = devectorize(&split.apply(&vectorize(&rho).unwrap()));
        let err = max_abs(&(direct - via_super));
        assert!(err <= 1e-12, "state {k}: |Lρ − M vec ρ| = {err:e}");
    }
}

#[test]
fn exponential_matches_runge_kutta() {
    let mut rng = common::rng(23);
    for k in 0..20 {
        let params = random_params(&mut rng, k % 3 == 0);
        let h = build_hamiltonian(&params);
        let jumps = build_jump_operators(&params);
        let split = build_liouvillian(&h, &jumps);
        let rho0 = common::random_density(&mut rng);
        let t_end = rng.gen_range(0.5..3.0);
        let reference = common::dopri5(|r| lindblad_rhs(&h, &jumps, r), rho0, t_end, 1e-12, 1e-14);
        let out = propagate_states(&split, &vectorize(&rho0).unwrap(), &[t_end]);
        let err = max_abs(&(devectorize(&out[0]) - reference));
        assert!(err <= 1e-8, "state {k}, t = {t_end}: deviation {err:e}");
    }
}

/// Eigenvalues expected from rate bookkeeping alone: each coherence
/// `ρ_ab` decays at `(Γa + Γb)/2` while rotating at `Ea − Eb`, and the
/// populations relax through the classical master-equation matrix.
fn bookkeeping_spectrum(params: &ModelParams) -> Vec<C64> {
    let e = params.energies();
    let jumps = build_jump_operators(params);
    let mut w = DMatrix::<f64>::zeros(4, 4);
    let mut out_rate = [0.0; 4];
    for v in &jumps {
        w[(v.to, v.from)] += v.rate;
        out_rate[v.from] += v.rate;
    }
    for k in 0..4 {
        w[(k, k)] -= out_rate[k];
    }
    let mut values: Vec<C64> = w.complex_eigenvalues().iter().copied().collect();
    for a in 0..4 {
        for b in (a + 1)..4 {
            let decay = -(out_rate[a] + out_rate[b]) / 2.0;
            let freq = e[a] - e[b];
            values.push(C64::new(decay, freq));
            values.push(C64::new(decay, -freq));
        }
    }
    values
}

/// Largest distance in an optimal-ish pairing of two multisets
/// (greedy nearest, which is exact once the sets agree to tolerance).
fn multiset_distance(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for x in a {
        let (j, d) = b
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, y)| (j, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

#[test]
fn spectrum_matches_rate_bookkeeping() {
    let mut rng = common::rng(5);
    let mut cases: Vec<ModelParams> = (0..30).map(|_| random_params(&mut rng, false)).collect();
    cases.push(ModelParams::reduced(0.9, 1e-3));
    cases.push(ModelParams::reduced(1.1, 1e-3));
    cases.push(ModelParams::reduced(0.9, 0.0));
    cases.push(ModelParams::reduced(1.1, 0.0));
    for params in cases {
        let spec = relaxation_spectrum(&liouvillian(&params)).unwrap();
        let computed: Vec<C64> = spec.modes.iter().map(|m| m.value).collect();
        let expected = bookkeeping_spectrum(&params);
        let d = multiset_distance(&computed, &expected);
        assert!(d <= 1e-9, "{params:?}: spectra differ by {d:e}");
    }
}

#[test]
fn single_flips_connect_each_level_to_two_others() {
    for level in 0..4 {
        let n = SPIN_FLIP_PAIRS
            .iter()
            .filter(|(a, b)| *a == level || *b == level)
            .count();
        assert_eq!(n, 2);
    }
}

#[test]
fn middle_coherence_rate_jumps_across_level_crossing() {
    let rate = |b: f64| {
        let spec = relaxation_spectrum(&liouvillian(&ModelParams::reduced(b, 0.0))).unwrap();
        let modes = spec.coherence_modes(1, 2);
        assert_eq!(modes.len(), 2, "B = {b}");
        modes[0].rate
    };
    let below = rate(1.0 - 1e-6);
    let above = rate(1.0 + 1e-6);
    assert!((below - 4.0).abs() < 1e-9, "below: {below}");
    assert!((above - 2.0).abs() < 1e-9, "above: {above}");
}

#[test]
fn population_mode_at_four_gamma_is_continuous_across_crossing() {
    for b in [1.0 - 1e-6, 1.0 + 1e-6] {
        let spec = relaxation_spectrum(&liouvillian(&ModelParams::reduced(b, 0.0))).unwrap();
        let hit = spec
            .modes
            .iter()
            .any(|m| (m.rate - 4.0).abs() < 1e-5 && m.frequency.abs() < 1e-12 && m.is_supported_on(&[0, 1, 2, 3]));
        assert!(hit, "B = {b}: no population mode at 4γ0");
    }
}
