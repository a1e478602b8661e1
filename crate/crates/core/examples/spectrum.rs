//! Relaxation-rate spectrum below and above the level crossing at B = J.
//!
//! Run with `cargo run --example spectrum`.

use qubit_relax::prelude::*;
use qubit_relax::spectrum::EXACT_GROUP_TOL;

pub fn run_example() -> Result<()> {
    for b in [0.9, 1.1] {
        let params = ModelParams::reduced(b, 1e-3);
        let spectrum = relaxation_spectrum(&liouvillian(&params))?;
        println!("B = {b} J, T = 1e-3 J");
        for m in &spectrum.modes {
            println!("  rate {:>8.5}  freq {:>8.5}  {}", m.rate, m.frequency, m.label);
        }
        let groups: Vec<String> = spectrum
            .groups_with(EXACT_GROUP_TOL)
            .iter()
            .map(|g| format!("{:.6} (x{})", g.rate, g.members.len()))
            .collect();
        println!("  groups: {}", groups.join(", "));
    }

    // the rho14 coherence decays at lambda1 for every field and temperature
    let params = ModelParams::reduced(0.9, 0.5);
    let spectrum = relaxation_spectrum(&liouvillian(&params))?;
    let lambda1 = lambda1_analytic(params.j, params.b, params.t, params.gamma0);
    let rho14 = spectrum.coherence_modes(0, 3);
    println!("lambda1 = {lambda1:.12}, rho14 mode rate = {:.12}", rho14[0].rate);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
