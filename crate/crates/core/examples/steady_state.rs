//! Steady state of the Liouvillian compared with the Gibbs populations, and
//! the twofold degenerate null space at zero temperature below B = J.

use qubit_relax::prelude::*;
use qubit_relax::spectrum::gibbs_populations;

pub fn run_example() -> Result<()> {
    for (b, t) in [(0.9, 0.1), (1.1, 1.0), (0.9, 10.0)] {
        let params = ModelParams::reduced(b, t);
        let ss = steady_state(&liouvillian(&params))?;
        let gibbs = gibbs_populations(&params);
        let err = (0..4).map(|k| (ss.state[k] - gibbs[k]).abs()).fold(0.0, f64::max);
        println!("B = {b}, T = {t}: populations {:?}", &ss.state.0[..4]);
        println!(
            "  max deviation from Gibbs {err:.2e}, kernel dimension {}",
            ss.kernel_dim()
        );
    }

    let cold = steady_state(&liouvillian(&ModelParams::reduced(0.9, 0.0)))?;
    println!(
        "T = 0, B = 0.9: kernel dimension {}, unique = {}",
        cold.kernel_dim(),
        cold.is_unique()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
