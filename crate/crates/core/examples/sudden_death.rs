//! Entanglement sudden death of the thermal X state: closed form against
//! bisection on the propagated trajectory, for both choices of the initial
//! coherence.

use qubit_relax::dynamics::{sudden_death_time, Coherence, DEFAULT_HORIZON};
use qubit_relax::prelude::*;

pub fn run_example() -> Result<()> {
    println!(
        "{:>6} {:>6} {:>14} {:>14} {:>14}",
        "B", "T", "rho14", "closed form", "propagated"
    );
    for (b, t) in [(1.1, 0.05), (1.1, 0.5), (1.1, 2.0), (0.9, 0.05), (0.9, 0.015)] {
        let params = ModelParams::reduced(b, t);
        for (name, choice) in [("saturated", Coherence::Saturated), ("1/2", Coherence::PaperLiteral)] {
            let sd = sudden_death_time(&params, choice, DEFAULT_HORIZON)?;
            let show = |d: Option<f64>| d.map_or("none".to_string(), |x| format!("{x:.6}"));
            println!(
                "{b:>6} {t:>6} {name:>14} {:>14} {:>14}",
                show(sd.closed_form.time()),
                show(sd.propagated.time())
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
