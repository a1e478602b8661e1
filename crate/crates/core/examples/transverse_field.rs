//! A transverse field mixes the zero-temperature metastable states below
//! B = J and opens a finite slowest decay rate.

use qubit_relax::prelude::*;
use qubit_relax::spectrum::rate_vs_field_sweep;

pub fn run_example() -> Result<()> {
    let params = ModelParams::reduced(0.9, 0.0);
    let grid: Vec<f64> = (0..=6).map(|k| 0.05 * k as f64).collect();
    for point in rate_vs_field_sweep(&params, &grid)? {
        println!(
            "Bx = {:.2}: slowest decay {:.4e}, {} rate groups",
            point.bx,
            point.slowest_decay_rate(),
            point.group_count
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
