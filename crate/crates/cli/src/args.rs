//! Command-line surface and its resolution into a [`RunConfig`].

use std::path::PathBuf;

use berrylab_core::{BasisLabel, CouplingKind, ModelParams, Subsystem};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(
    name = "berrylab",
    version,
    about = "Geometric-phase experiments on a driven two-qubit system"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Berry connection over the zero-coupling pair
    Connection(Common),
    /// Wilson loop and its invariants
    Holonomy(Common),
    /// Abelian Berry phase of an instantaneous eigenstate
    Berry(Common),
    /// Schrodinger evolution around the loop
    Evolve(Common),
    /// Fidelity and phase as the coupling is lowered
    Breakdown(Common),
    /// Subsystem phase from Bloch-sphere areas
    Mixed(Common),
    /// Any of the above over the parameter grids
    Sweep {
        #[arg(long, value_enum)]
        target: Command,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Connection,
    Holonomy,
    Berry,
    Evolve,
    Breakdown,
    Mixed,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Connection => "connection",
            Command::Holonomy => "holonomy",
            Command::Berry => "berry",
            Command::Evolve => "evolve",
            Command::Breakdown => "breakdown",
            Command::Mixed => "mixed",
            Command::Sweep => "sweep",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Command::Connection => &[
                "theta", "phi", "a11_re", "a11_im", "a12_re", "a12_im", "a21_re", "a21_im",
                "a22_re", "a22_im", "max_dev",
            ],
            Command::Holonomy => &[
                "theta",
                "eigenphase_1",
                "eigenphase_2",
                "trace_re",
                "trace_im",
                "single_spin_phase",
                "max_dev",
            ],
            Command::Berry => &[
                "theta",
                "g",
                "omega",
                "level",
                "gamma",
                "raw_unwrapped",
                "n_points",
                "discretization_estimate",
            ],
            Command::Evolve => &[
                "theta",
                "g",
                "omega",
                "ratio",
                "total",
                "dynamical",
                "geometric",
                "final_fidelity",
                "min_fidelity",
                "loop_duration",
            ],
            Command::Breakdown => &[
                "theta",
                "omega",
                "g",
                "ratio",
                "final_fidelity",
                "min_fidelity",
                "geometric",
                "loop_duration",
            ],
            Command::Mixed => &[
                "theta",
                "g",
                "subsystem",
                "p_plus",
                "omega_plus",
                "omega_minus",
                "gamma",
                "weight_variation",
                "gamma_unwrapped",
            ],
            Command::Sweep => &[],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A list of values: comma-separated numbers and `start:stop:n` ranges.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let mut out = Vec::new();
    for item in s.split(',') {
        let item = item.trim();
        let parts: Vec<&str> = item.split(':').collect();
        match parts.as_slice() {
            [x] => out.push(parse_number(x)?),
            [a, b, n] => {
                let (a, b) = (parse_number(a)?, parse_number(b)?);
                let n: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad range count `{n}`"))?;
                match n {
                    0 => return Err(format!("empty range `{item}`")),
                    1 => out.push(a),
                    _ => out.extend((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64)),
                }
            }
            _ => return Err(format!("expected a number or start:stop:n, got `{item}`")),
        }
    }
    Ok(Grid(out))
}

fn parse_number(s: &str) -> Result<f64, String> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: `{s}`"))?;
    if !x.is_finite() {
        return Err(format!("not finite: `{s}`"));
    }
    Ok(x)
}

fn parse_subsystem(s: &str) -> Result<Subsystem, String> {
    s.parse::<u8>()
        .ok()
        .and_then(Subsystem::from_id)
        .ok_or_else(|| format!("expected 1 or 2, got `{s}`"))
}

/// Column pair for a plot file, written `X:Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
}

fn parse_plot(s: &str) -> Result<PlotSpec, String> {
    match s.split_once(':') {
        Some((x, y)) if !x.is_empty() && !y.is_empty() => Ok(PlotSpec {
            x: x.to_string(),
            y: y.to_string(),
        }),
        _ => Err(format!("expected X:Y, got `{s}`")),
    }
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Field polar angle(s), radians
    #[arg(long, value_parser = parse_grid, default_value = "1.5707963267948966")]
    pub theta: Grid,
    /// Coupling strength(s)
    #[arg(long, value_parser = parse_grid, default_value = "0")]
    pub g: Grid,
    /// Field strength
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Rotation rate(s) of the field
    #[arg(long, value_parser = parse_grid, default_value = "0.001")]
    pub omega: Grid,
    #[arg(long, default_value = "xx-minus-yy")]
    pub coupling: CouplingKind,
    /// Azimuths at which to sample the connection
    #[arg(long, value_parser = parse_grid, default_value = "0")]
    pub phi: Grid,
    /// Finite-difference step for the connection
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
    /// Loop discretization (path points or Wilson-loop steps)
    #[arg(long, default_value_t = 2000)]
    pub points: usize,
    /// RK4 steps per loop; chosen from the Hamiltonian norm when absent
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub loops: usize,
    /// Level index, ascending energy; defaults to the level of the first zero-coupling state
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long, value_parser = parse_subsystem, default_value = "2")]
    pub subsystem: Subsystem,
    #[arg(long, default_value = "reply")]
    pub basis: BasisLabel,
    /// Output file; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads for grid evaluation
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write `X:Y` columns as a two-column data file (repeatable)
    #[arg(long, value_parser = parse_plot)]
    pub plot: Vec<PlotSpec>,
}

/// Fully resolved run description; embedded in every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Command whose table is produced; differs from `command` for sweeps.
    pub target: Command,
    /// The first grid point.
    pub params: ModelParams,
    pub thetas: Vec<f64>,
    pub gs: Vec<f64>,
    pub omegas: Vec<f64>,
    pub phis: Vec<f64>,
    pub fd_step: f64,
    pub n_points: usize,
    pub steps_per_loop: Option<usize>,
    pub loops: usize,
    pub level: Option<usize>,
    pub subsystem: Subsystem,
    pub basis: BasisLabel,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub jobs: Option<usize>,
    pub plots: Vec<PlotSpec>,
}

/// Malformed input: names the offending flag.
#[derive(Debug)]
pub struct UsageError {
    pub flag: &'static str,
    pub message: String,
}

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid value for --{}: {}", self.flag, self.message)
    }
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, UsageError> {
        let (command, target, c) = match cli.command {
            Cmd::Connection(c) => (Command::Connection, Command::Connection, c),
            Cmd::Holonomy(c) => (Command::Holonomy, Command::Holonomy, c),
            Cmd::Berry(c) => (Command::Berry, Command::Berry, c),
            Cmd::Evolve(c) => (Command::Evolve, Command::Evolve, c),
            Cmd::Breakdown(c) => (Command::Breakdown, Command::Breakdown, c),
            Cmd::Mixed(c) => (Command::Mixed, Command::Mixed, c),
            Cmd::Sweep { target, common } => (Command::Sweep, target, common),
        };
        let usage = |flag, message: String| UsageError { flag, message };
        if target == Command::Sweep {
            return Err(usage("target", "a sweep cannot target itself".into()));
        }
        for (flag, grid) in [
            ("theta", &c.theta),
            ("g", &c.g),
            ("omega", &c.omega),
            ("phi", &c.phi),
        ] {
            if grid.0.is_empty() {
                return Err(usage(flag, "empty grid".into()));
            }
        }
        let params = ModelParams {
            theta: c.theta.0[0],
            g: c.g.0[0],
            b_field: c.b,
            omega: c.omega.0[0],
            coupling: c.coupling,
        };
        for &theta in &c.theta.0 {
            for &g in &c.g.0 {
                for &omega in &c.omega.0 {
                    let p = ModelParams {
                        theta,
                        g,
                        omega,
                        ..params
                    };
                    if let Err(berrylab_core::Error::InvalidParameter {
                        name,
                        value,
                        reason,
                    }) = p.validate()
                    {
                        return Err(usage(name, format!("{value} {reason}")));
                    }
                }
            }
        }
        if c.points < 16 {
            return Err(usage(
                "points",
                format!("{} is below the minimum of 16", c.points),
            ));
        }
        if c.loops == 0 {
            return Err(usage("loops", "need at least one loop".into()));
        }
        if let Some(level) = c.level {
            if level > 3 {
                return Err(usage("level", format!("{level} is not in 0..=3")));
            }
        }
        if c.jobs == Some(0) {
            return Err(usage("jobs", "need at least one worker".into()));
        }
        let columns = target.columns();
        for plot in &c.plot {
            for col in [&plot.x, &plot.y] {
                if !columns.contains(&col.as_str()) {
                    return Err(usage(
                        "plot",
                        format!(
                            "unknown column `{col}` for {} (have {})",
                            target.name(),
                            columns.join(",")
                        ),
                    ));
                }
            }
        }
        Ok(Self {
            command,
            target,
            params,
            thetas: c.theta.0,
            gs: c.g.0,
            omegas: c.omega.0,
            phis: c.phi.0,
            fd_step: c.h,
            n_points: c.points,
            steps_per_loop: c.steps,
            loops: c.loops,
            level: c.level,
            subsystem: c.subsystem,
            basis: c.basis,
            output_path: c.out,
            format: c.format,
            jobs: c.jobs,
            plots: c.plot,
        })
    }
}
