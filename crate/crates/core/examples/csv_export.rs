//! Build a run configuration in code, save it as JSON and write the
//! resulting CSV, as the command-line tool would.

use qubit_relax::cli::{render, run, Command, RunConfig, Scale, SweepSpec, SweepVar};
use qubit_relax::prelude::*;

pub fn run_example() -> std::result::Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut config = RunConfig::new(ModelParams::reduced(1.1, 0.0), Command::Sweep);
    config.sweep = Some(SweepSpec {
        var: SweepVar::TauM,
        from: 1e-3,
        to: 10.0,
        steps: 12,
        scale: Scale::Log,
    });
    config.output = Some(dir.path().join("tau_sweep.csv"));
    std::fs::write(dir.path().join("tau_sweep.json"), config.to_json())?;
    run(&config).map_err(|e| e.to_string())?;

    let csv = std::fs::read_to_string(dir.path().join("tau_sweep.csv"))?;
    for line in csv.lines().take(6) {
        println!("{}", &line[..line.len().min(110)]);
    }
    config.output = None;
    assert_eq!(render(&config).map_err(|e| e.to_string())?, csv);
    Ok(())
}

#[allow(dead_code)]
fn main() -> std::result::Result<(), Box<dyn std::error::Error>> {
    run_example()
}
