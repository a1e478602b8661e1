//! Command-line front end.
//!
//! Every command writes one table, either as CSV with `#` header lines or
//! as JSON. Settings come from an optional JSON config file, and flags on
//! the command line override it. Exit status is 0 on success, 1 for usage
//! or configuration errors and 2 for numerical failures.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    bell_state, concurrence, concurrence_phase_diagram, concurrence_xstate, min_eigenvalue, propagate_states,
    xstate_for, Coherence, POSITIVITY_TOL,
};
use crate::error::Error;
use crate::linalg::{eigenvalues, match_nearest};
use crate::model::{ModelParams, C64};
use crate::nonmarkov::tau_sweep;
use crate::spectrum::{gibbs_populations, liouvillian, relaxation_spectrum, steady_state};
use crate::superop::{component_name, devectorize, vectorize, DIM};

const UNITS: &str =
    "reduced units J = 1, gamma0 = 1: B, Bx, T in J; rates and frequencies in gamma0; t and tau_M in 1/gamma0";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    SteadyState,
    Evolve,
    ConcurrenceMap,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::SteadyState => "steady-state",
            Command::Evolve => "evolve",
            Command::ConcurrenceMap => "concurrence-map",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum SweepVar {
    #[serde(rename = "T")]
    #[value(name = "T")]
    T,
    #[serde(rename = "B")]
    #[value(name = "B")]
    B,
    #[serde(rename = "Bx")]
    #[value(name = "Bx")]
    Bx,
    #[serde(rename = "tau_M")]
    #[value(name = "tau_M")]
    TauM,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::T => "T",
            SweepVar::B => "B",
            SweepVar::Bx => "Bx",
            SweepVar::TauM => "tau_M",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Scale {
    pub fn name(self) -> &'static str {
        match self {
            Scale::Linear => "linear",
            Scale::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub scale: Scale,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.steps < 2 {
            return Err(format!("sweep needs steps >= 2, got {}", self.steps));
        }
        if !(self.from.is_finite() && self.to.is_finite() && self.from < self.to) {
            return Err(format!(
                "sweep needs finite from < to, got {} .. {}",
                self.from, self.to
            ));
        }
        if self.scale == Scale::Log && self.from <= 0.0 {
            return Err(format!("log spacing needs from > 0, got {}", self.from));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = self.steps - 1;
        (0..=n)
            .map(|k| {
                let x = k as f64 / n as f64;
                if k == n {
                    return self.to;
                }
                match self.scale {
                    Scale::Linear => self.from + (self.to - self.from) * x,
                    Scale::Log => self.from * (self.to / self.from).powf(x),
                }
            })
            .collect()
    }
}

/// Options of `evolve` and `concurrence-map`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DynamicsSpec {
    /// `saturated`, `literal` or a number.
    #[serde(with = "coherence_text")]
    pub rho14: Coherence,
    pub initial: Initial,
    pub tmax: f64,
    pub nt: usize,
    #[serde(rename = "Tmin")]
    pub t_min: f64,
    #[serde(rename = "Tmax")]
    pub t_max: f64,
    #[serde(rename = "nT")]
    pub n_t: usize,
}

impl Default for DynamicsSpec {
    fn default() -> Self {
        Self {
            rho14: Coherence::Saturated,
            initial: Initial::Xstate,
            tmax: 20.0,
            nt: 201,
            t_min: 0.05,
            t_max: 2.0,
            n_t: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Initial {
    /// Gibbs populations plus a `ρ14` coherence.
    #[default]
    Xstate,
    /// `(|↑↑⟩ + |↓↓⟩)/√2`.
    Bell,
}

mod coherence_text {
    use super::{parse_coherence, Coherence};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(c: &Coherence, s: S) -> Result<S::Ok, S::Error> {
        match c {
            Coherence::Saturated => s.serialize_str("saturated"),
            Coherence::PaperLiteral => s.serialize_str("literal"),
            Coherence::Value(x) => s.serialize_str(&format!("{x:e}")),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Coherence, D::Error> {
        let text = String::deserialize(d)?;
        parse_coherence(&text).map_err(serde::de::Error::custom)
    }
}

pub fn parse_coherence(text: &str) -> Result<Coherence, String> {
    match text {
        "saturated" => Ok(Coherence::Saturated),
        "literal" => Ok(Coherence::PaperLiteral),
        other => other
            .parse::<f64>()
            .map(Coherence::Value)
            .map_err(|_| format!("rho14 must be `saturated`, `literal` or a number, got `{other}`")),
    }
}

/// Fully resolved run settings. User files are parsed strictly through a
/// separate layout, so unknown keys are rejected there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub model: ModelParams,
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub dynamics: DynamicsSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(model: ModelParams, command: Command) -> Self {
        Self {
            model,
            command,
            sweep: None,
            dynamics: DynamicsSpec::default(),
            output: None,
            format: Format::Csv,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn validate(&self) -> Result<(), String> {
        self.model.validate().map_err(|e| e.to_string())?;
        match self.command {
            Command::Sweep => self
                .sweep
                .as_ref()
                .ok_or_else(|| "sweep needs --var, --from, --to and --steps".to_string())?
                .validate(),
            Command::Evolve | Command::ConcurrenceMap => {
                let d = &self.dynamics;
                if !(d.tmax > 0.0 && d.tmax.is_finite()) || d.nt < 2 {
                    return Err(format!(
                        "time grid needs tmax > 0 and nt >= 2, got {} / {}",
                        d.tmax, d.nt
                    ));
                }
                if self.command == Command::ConcurrenceMap
                    && !(d.t_min > 0.0 && d.t_min < d.t_max && d.t_max.is_finite() && d.n_t >= 2)
                {
                    return Err(format!(
                        "temperature grid needs 0 < Tmin < Tmax and nT >= 2, got {} .. {} / {}",
                        d.t_min, d.t_max, d.n_t
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Config file layout; every key is optional so flags can fill the rest.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(rename = "J")]
    j: Option<f64>,
    #[serde(rename = "B")]
    b: Option<f64>,
    #[serde(rename = "Bx")]
    bx: Option<f64>,
    #[serde(rename = "T")]
    t: Option<f64>,
    gamma0: Option<f64>,
    command: Option<Command>,
    sweep: Option<SweepSpec>,
    dynamics: Option<DynamicsSpec>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Parser)]
#[command(
    name = "qubit-relax",
    version,
    about = "Relaxation spectra and entanglement dynamics of two coupled qubits"
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// All 16 Liouvillian eigenvalues with rates, groups and labels.
    Spectrum(Common),
    /// Null vector of the Liouvillian against the Gibbs populations.
    SteadyState(Common),
    /// Propagate an initial state and record its concurrence.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dynamics: DynamicsArgs,
    },
    /// Concurrence of the X state on a temperature × time grid.
    ConcurrenceMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        dynamics: DynamicsArgs,
    },
    /// Track relaxation-rate branches along one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Run whatever command the config file names.
    Run(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Exchange coupling (default 1).
    #[arg(long = "J", allow_negative_numbers = true)]
    j: Option<f64>,
    /// Longitudinal field (default 0.9).
    #[arg(long = "B", allow_negative_numbers = true)]
    b: Option<f64>,
    /// Transverse field (default 0).
    #[arg(long = "Bx", allow_negative_numbers = true)]
    bx: Option<f64>,
    /// Bath temperature (default 0.5).
    #[arg(long = "T", allow_negative_numbers = true)]
    t: Option<f64>,
    /// Bare spin-flip rate (default 1).
    #[arg(long)]
    gamma0: Option<f64>,
    /// Output file, written atomically; standard output if omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Output format (default csv).
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write the resolved configuration as JSON to this file.
    #[arg(long)]
    save_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DynamicsArgs {
    /// `saturated` (√(ρ11ρ44)), `literal` (½) or a number.
    #[arg(long, value_parser = parse_coherence)]
    rho14: Option<Coherence>,
    /// Initial state for `evolve` (default xstate).
    #[arg(long, value_enum)]
    initial: Option<Initial>,
    /// Last time point (default 20).
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of time points from 0 to `tmax` (default 201).
    #[arg(long)]
    nt: Option<usize>,
    /// Lowest temperature of the concurrence map (default 0.05).
    #[arg(long = "Tmin")]
    t_min: Option<f64>,
    /// Highest temperature of the concurrence map (default 2).
    #[arg(long = "Tmax")]
    t_max: Option<f64>,
    /// Number of temperatures in the map (default 20).
    #[arg(long = "nT")]
    n_t: Option<usize>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Swept parameter.
    #[arg(long, value_enum)]
    var: Option<SweepVar>,
    /// First grid value.
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    /// Last grid value.
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
    /// Space the grid logarithmically.
    #[arg(long)]
    log: bool,
}

/// Failure of a CLI run, mapped onto the exit status.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::UnsupportedKernel(_) => CliError::Usage(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

fn load_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

fn resolve(
    command: Option<Command>,
    common: &Common,
    dynamics: Option<&DynamicsArgs>,
    sweep: Option<&SweepArgs>,
) -> Result<RunConfig, CliError> {
    let file = match &common.config {
        Some(p) => load_file(p)?,
        None => ConfigFile::default(),
    };
    let defaults = ModelParams::default();
    let model = ModelParams {
        j: common.j.or(file.j).unwrap_or(defaults.j),
        b: common.b.or(file.b).unwrap_or(defaults.b),
        bx: common.bx.or(file.bx).unwrap_or(defaults.bx),
        t: common.t.or(file.t).unwrap_or(defaults.t),
        gamma0: common.gamma0.or(file.gamma0).unwrap_or(defaults.gamma0),
    };
    let command = command
        .or(file.command)
        .ok_or_else(|| CliError::Usage("no command given on the command line or in the config".into()))?;

    let mut dyn_spec = file.dynamics.unwrap_or_default();
    if let Some(d) = dynamics {
        dyn_spec.rho14 = d.rho14.unwrap_or(dyn_spec.rho14);
        dyn_spec.initial = d.initial.unwrap_or(dyn_spec.initial);
        dyn_spec.tmax = d.tmax.unwrap_or(dyn_spec.tmax);
        dyn_spec.nt = d.nt.unwrap_or(dyn_spec.nt);
        dyn_spec.t_min = d.t_min.unwrap_or(dyn_spec.t_min);
        dyn_spec.t_max = d.t_max.unwrap_or(dyn_spec.t_max);
        dyn_spec.n_t = d.n_t.unwrap_or(dyn_spec.n_t);
    }

    let mut sweep_spec = file.sweep;
    if let Some(s) = sweep {
        let base = sweep_spec;
        let var = s.var.or(base.map(|b| b.var));
        let from = s.from.or(base.map(|b| b.from));
        let to = s.to.or(base.map(|b| b.to));
        let steps = s.steps.or(base.map(|b| b.steps));
        let scale = if s.log {
            Scale::Log
        } else {
            base.map_or(Scale::Linear, |b| b.scale)
        };
        sweep_spec = match (var, from, to, steps) {
            (Some(var), Some(from), Some(to), Some(steps)) => Some(SweepSpec {
                var,
                from,
                to,
                steps,
                scale,
            }),
            (None, None, None, None) => None,
            _ => {
                return Err(CliError::Usage(
                    "sweep needs all of --var, --from, --to, --steps".into(),
                ))
            }
        };
    }

    let config = RunConfig {
        model,
        command,
        sweep: sweep_spec,
        dynamics: dyn_spec,
        output: common.output.clone().or(file.output),
        format: common.format.or(file.format).unwrap_or_default(),
    };
    config.validate().map_err(CliError::Usage)?;
    Ok(config)
}

/// One output cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A result table with its metadata.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub command: String,
    pub params: ModelParams,
    /// Extra `key: value` header entries.
    pub notes: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "# qubit-relax {}", self.command);
        let _ = writeln!(out, "# units: {UNITS}");
        let _ = writeln!(
            out,
            "# params: J={:.16e} B={:.16e} Bx={:.16e} T={:.16e} gamma0={:.16e}",
            p.j, p.b, p.bx, p.t, p.gamma0
        );
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "# columns: {}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("finite table");
        s.push('\n');
        s
    }
}

fn table(command: Command, params: &ModelParams, columns: &[&str]) -> Table {
    Table {
        command: command.name().into(),
        params: *params,
        notes: Vec::new(),
        columns: columns.iter().map(|c| c.to_string()).collect(),
        rows: Vec::new(),
    }
}

fn spectrum_table(config: &RunConfig) -> Result<Table, CliError> {
    let spec = relaxation_spectrum(&liouvillian(&config.model))?;
    let mut t = table(
        Command::Spectrum,
        &config.model,
        &["index", "re", "im", "rate", "frequency", "group_id", "label"],
    );
    for (i, m) in spec.modes.iter().enumerate() {
        t.rows.push(vec![
            Cell::Int(i as i64),
            Cell::Num(m.value.re),
            Cell::Num(m.value.im),
            Cell::Num(m.rate),
            Cell::Num(m.frequency),
            Cell::Int(m.group as i64),
            Cell::Text(m.label.clone()),
        ]);
    }
    Ok(t)
}

fn steady_state_table(config: &RunConfig) -> Result<Table, CliError> {
    let ss = steady_state(&liouvillian(&config.model))?;
    let gibbs = gibbs_populations(&config.model);
    let mut t = table(Command::SteadyState, &config.model, &["component", "value", "gibbs"]);
    t.notes.push(("kernel_dim".into(), ss.kernel_dim().to_string()));
    for k in 0..DIM {
        let g = if k < gibbs.len() { gibbs[k] } else { 0.0 };
        t.rows.push(vec![
            Cell::Text(component_name(k)),
            Cell::Num(ss.state[k]),
            Cell::Num(g),
        ]);
    }
    Ok(t)
}

fn time_grid(d: &DynamicsSpec) -> Vec<f64> {
    SweepSpec {
        var: SweepVar::T,
        from: 0.0,
        to: d.tmax,
        steps: d.nt,
        scale: Scale::Linear,
    }
    .grid()
}

fn evolve_table(config: &RunConfig) -> Result<Table, CliError> {
    let d = &config.dynamics;
    let rho0 = match d.initial {
        Initial::Xstate => xstate_for(&config.model, d.rho14)?,
        Initial::Bell => vectorize(&bell_state())?,
    };
    let times = time_grid(d);
    let states = propagate_states(&liouvillian(&config.model), &rho0, &times);
    let physical = min_eigenvalue(&devectorize(&rho0)) >= POSITIVITY_TOL;

    let mut columns = vec!["t".to_string()];
    columns.extend((0..DIM).map(component_name));
    columns.push("concurrence".into());
    let mut t = table(Command::Evolve, &config.model, &[]);
    t.columns = columns;
    let initial = match d.initial {
        Initial::Xstate => "xstate",
        Initial::Bell => "bell",
    };
    t.notes.push(("initial".into(), initial.into()));
    t.notes.push((
        "concurrence".into(),
        if physical {
            "wootters"
        } else {
            "x-state formula (initial state not positive)"
        }
        .into(),
    ));
    for (time, s) in times.iter().zip(&states) {
        let c = if physical {
            concurrence(&devectorize(s))
        } else {
            concurrence_xstate(s)
        };
        let mut row = vec![Cell::Num(*time)];
        row.extend(s.0.iter().map(|x| Cell::Num(*x)));
        row.push(Cell::Num(c));
        t.rows.push(row);
    }
    Ok(t)
}

fn concurrence_map_table(config: &RunConfig) -> Result<Table, CliError> {
    let d = &config.dynamics;
    let temps = SweepSpec {
        var: SweepVar::T,
        from: d.t_min,
        to: d.t_max,
        steps: d.n_t,
        scale: Scale::Linear,
    }
    .grid();
    let times = time_grid(d);
    let map = concurrence_phase_diagram(&config.model, d.rho14, &temps, &times)?;
    let mut t = table(Command::ConcurrenceMap, &config.model, &["T", "t", "C"]);
    for (temp, row) in map.temperatures.iter().zip(&map.values) {
        for (time, c) in map.times.iter().zip(row) {
            t.rows.push(vec![Cell::Num(*temp), Cell::Num(*time), Cell::Num(*c)]);
        }
    }
    Ok(t)
}

fn with_var(params: &ModelParams, var: SweepVar, x: f64) -> ModelParams {
    let mut p = *params;
    match var {
        SweepVar::T => p.t = x,
        SweepVar::B => p.b = x,
        SweepVar::Bx => p.bx = x,
        SweepVar::TauM => {}
    }
    p
}

fn sweep_table(config: &RunConfig) -> Result<Table, CliError> {
    let spec = config.sweep.expect("validated");
    let grid = spec.grid();
    let mut branches: Vec<(Vec<C64>, bool)> = Vec::with_capacity(grid.len());
    if spec.var == SweepVar::TauM {
        for set in tau_sweep(&liouvillian(&config.model), &grid)? {
            branches.push((set.physical, set.ambiguous));
        }
    } else {
        let points = grid
            .iter()
            .map(|&x| {
                let p = with_var(&config.model, spec.var, x);
                p.validate()?;
                eigenvalues(&liouvillian(&p).total())
            })
            .collect::<crate::Result<Vec<_>>>()?;
        let mut prev: Option<Vec<C64>> = None;
        for roots in points {
            let (ordered, ambiguous) = match &prev {
                None => (roots, false),
                Some(p) => {
                    let m = match_nearest(p, &roots)?;
                    (m.ordered, m.ambiguous)
                }
            };
            prev = Some(ordered.clone());
            branches.push((ordered, ambiguous));
        }
    }

    let width = branches.first().map_or(0, |b| b.0.len());
    let mut columns = vec![spec.var.name().to_string()];
    for i in 0..width {
        columns.push(format!("rate_{i}"));
        columns.push(format!("freq_{i}"));
    }
    columns.push("ambiguous".into());
    let mut t = table(Command::Sweep, &config.model, &[]);
    t.columns = columns;
    t.notes.push((
        "sweep".into(),
        format!(
            "var={} from={:.16e} to={:.16e} steps={} scale={}",
            spec.var.name(),
            spec.from,
            spec.to,
            spec.steps,
            spec.scale.name()
        ),
    ));
    for (x, (roots, ambiguous)) in grid.iter().zip(&branches) {
        let mut row = vec![Cell::Num(*x)];
        for s in roots {
            row.push(Cell::Num(-s.re));
            row.push(Cell::Num(s.im));
        }
        row.push(Cell::Int(*ambiguous as i64));
        t.rows.push(row);
    }
    Ok(t)
}

/// Compute the table a configuration asks for.
pub fn compute(config: &RunConfig) -> Result<Table, CliError> {
    config.validate().map_err(CliError::Usage)?;
    match config.command {
        Command::Spectrum => spectrum_table(config),
        Command::SteadyState => steady_state_table(config),
        Command::Evolve => evolve_table(config),
        Command::ConcurrenceMap => concurrence_map_table(config),
        Command::Sweep => sweep_table(config),
    }
}

/// Render the output of a configuration as text.
pub fn render(config: &RunConfig) -> Result<String, CliError> {
    let t = compute(config)?;
    Ok(match config.format {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json(),
    })
}

/// Write `contents` through a temporary file in the same directory, then
/// rename it into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Run a configuration, writing to its output path or standard output.
pub fn run(config: &RunConfig) -> Result<(), CliError> {
    let text = render(config)?;
    match &config.output {
        Some(path) => {
            write_atomic(path, &text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}"))),
    }
}

fn parse_and_run<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version; a closed pipe is not an error here
            let _ = std::io::stdout().write_all(e.render().to_string().as_bytes());
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            let text = text.trim_end().strip_prefix("error: ").unwrap_or(text.trim_end());
            return Err(CliError::Usage(text.to_string()));
        }
    };
    let (config, save) = match &cli.command {
        CliCommand::Spectrum(c) => (resolve(Some(Command::Spectrum), c, None, None)?, &c.save_config),
        CliCommand::SteadyState(c) => (resolve(Some(Command::SteadyState), c, None, None)?, &c.save_config),
        CliCommand::Evolve { common, dynamics } => (
            resolve(Some(Command::Evolve), common, Some(dynamics), None)?,
            &common.save_config,
        ),
        CliCommand::ConcurrenceMap { common, dynamics } => (
            resolve(Some(Command::ConcurrenceMap), common, Some(dynamics), None)?,
            &common.save_config,
        ),
        CliCommand::Sweep { common, sweep } => (
            resolve(Some(Command::Sweep), common, None, Some(sweep))?,
            &common.save_config,
        ),
        CliCommand::Run(c) => (resolve(None, c, None, None)?, &c.save_config),
    };
    if let Some(path) = save {
        write_atomic(path, &(config.to_json() + "\n"))
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    run(&config)
}

/// Entry point of the `qubit-relax` binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_and_run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(command: Command) -> RunConfig {
        RunConfig::new(ModelParams::reduced(0.9, 0.5), command)
    }

    #[test]
    fn grids() {
        let s = SweepSpec {
            var: SweepVar::T,
            from: 0.01,
            to: 5.0,
            steps: 200,
            scale: Scale::Log,
        };
        let g = s.grid();
        assert_eq!(g.len(), 200);
        assert_eq!(g[0], 0.01);
        assert_eq!(g[199], 5.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(SweepSpec { from: 0.0, ..s }.validate().is_err());
        assert!(SweepSpec { steps: 1, ..s }.validate().is_err());
        assert!(SweepSpec { from: 6.0, ..s }.validate().is_err());
    }

    #[test]
    fn spectrum_csv_layout() {
        let csv = render(&config(Command::Spectrum)).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# qubit-relax spectrum"));
        assert!(lines.contains(&"# columns: index,re,im,rate,frequency,group_id,label"));
        let data: Vec<&str> = lines.iter().copied().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 16);
        assert_eq!(data[0].split(',').count(), 7);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(Cell::Num(0.1).csv(), "1.0000000000000001e-1");
        assert_eq!(Cell::Num(-2.0).csv(), "-2.0000000000000000e0");
        let x: f64 = Cell::Num(std::f64::consts::PI).csv().parse().unwrap();
        assert_eq!(x, std::f64::consts::PI);
    }

    #[test]
    fn config_round_trip() {
        let mut c = config(Command::Sweep);
        c.sweep = Some(SweepSpec {
            var: SweepVar::TauM,
            from: 1e-3,
            to: 10.0,
            steps: 5,
            scale: Scale::Log,
        });
        c.dynamics.rho14 = Coherence::Value(0.25);
        let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_list_valid_ones() {
        let err = serde_json::from_str::<ConfigFile>(r#"{"J": 1, "Bz": 2}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("Bz"));
        assert!(err.contains("gamma0"));
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::InvalidParams("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(Error::SingularLeading).exit_code(), 2);
        let mut bad = config(Command::Spectrum);
        bad.model.j = -1.0;
        assert_eq!(compute(&bad).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn paper_literal_evolution_uses_x_formula() {
        let mut c = config(Command::Evolve);
        c.dynamics.rho14 = Coherence::PaperLiteral;
        c.dynamics.nt = 3;
        let t = compute(&c).unwrap();
        assert!(t.notes.iter().any(|(_, v)| v.starts_with("x-state")));
    }
}
