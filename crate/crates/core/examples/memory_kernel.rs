//! Secular roots of an exponential memory kernel: the Markovian limit, the
//! cusp at intermediate memory times and the bunching of rates at long ones.

use qubit_relax::linalg::eigenvalues;
use qubit_relax::nonmarkov::{cusp_branches, secular_roots, substitute, tau_sweep, KernelSpec};
use qubit_relax::prelude::*;

pub fn run_example() -> Result<()> {
    let split = liouvillian(&ModelParams::reduced(0.9, 0.5));
    let markov = eigenvalues(&split.total())?;
    for tau in [1e-2, 1e-4, 1e-6] {
        let spec = KernelSpec::exponential(tau);
        let set = secular_roots(&split, &spec)?;
        let dist = set
            .physical
            .iter()
            .map(|s| markov.iter().map(|m| (m - s).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        let worst = set
            .all_roots()
            .iter()
            .map(|s| substitute(&split, &spec, *s).map(|r| r.singularity))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "tau = {tau:e}: distance to Markov {dist:.2e}, |zero root| {:.1e}, pole artifacts {}, worst substitution {worst:.1e}",
            set.zero_mode.norm(),
            set.pole_artifacts()
        );
    }

    for b in [0.9, 1.1] {
        let split = liouvillian(&ModelParams::reduced(b, 0.0));
        let grid: Vec<f64> = (0..60).map(|k| 10f64.powf(-3.0 + 4.0 * k as f64 / 59.0)).collect();
        let sweep = tau_sweep(&split, &grid)?;
        let first = sweep[0].rate_spread();
        let last = sweep[sweep.len() - 1].rate_spread();
        println!(
            "B = {b}, T = 0: cusps on branches {:?}; rate spread {first:.3} -> {last:.3} ({:.1}x)",
            cusp_branches(&sweep),
            first / last
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
