//! Propagate a Bell state with the matrix exponential and watch its
//! concurrence vanish in finite time.

use qubit_relax::dynamics::{bell_state, propagate};
use qubit_relax::prelude::*;

pub fn run_example() -> Result<()> {
    let params = ModelParams::reduced(1.1, 0.3);
    let rho0 = vectorize(&bell_state())?;
    let times: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let traj = propagate(&liouvillian(&params), &rho0, &times)?;
    for ((t, c), s) in traj.times.iter().zip(&traj.concurrence).zip(&traj.states) {
        println!("t = {t:.1}: C = {c:.6}, trace = {:.15}", s.trace());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
