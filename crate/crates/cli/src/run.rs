//! Grid evaluation: one or more table rows per parameter point.

use std::f64::consts::TAU;

use berrylab_core::abelian::{berry_phase, smooth_eigenpath, StatePath};
use berrylab_core::angle::{phase_distance, wrap_pi};
use berrylab_core::dynamics::{
    breakdown_point, default_steps_per_loop, evolve_loop, initial_eigenstate, phase_report,
};
use berrylab_core::holonomy::{
    basis_fn, connection_analytic, connection_numeric, primed_connection_matrix,
    reply_connection_matrix, wilson_loop, Connection,
};
use berrylab_core::mixed::{reduced_bloch_path, subsystem_phase};
use berrylab_core::model::{basis, level_map, BasisLabel, Member, ModelParams};
use berrylab_core::Result;
use rayon::prelude::*;

use crate::args::{Command, RunConfig};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub command: Command,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let idx = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| &r[idx]).collect())
    }
}

/// Parameter points in output order: theta outermost, then g, then omega.
/// Breakdown tables list g from largest to smallest.
pub fn grid_points(config: &RunConfig) -> Vec<ModelParams> {
    let mut gs = config.gs.clone();
    if config.target == Command::Breakdown {
        gs.sort_by(|a, b| b.total_cmp(a));
    }
    let mut out = Vec::new();
    for &theta in &config.thetas {
        if config.target == Command::Breakdown {
            for &omega in &config.omegas {
                for &g in &gs {
                    out.push(ModelParams {
                        theta,
                        g,
                        omega,
                        ..config.params
                    });
                }
            }
        } else {
            for &g in &gs {
                for &omega in &config.omegas {
                    out.push(ModelParams {
                        theta,
                        g,
                        omega,
                        ..config.params
                    });
                }
            }
        }
    }
    out
}

/// Evaluates every grid point, in parallel when `jobs` allows. Rows keep
/// grid order; the first failing point (in that order) is reported.
pub fn run_table(config: &RunConfig) -> Result<Table> {
    let points = grid_points(config);
    let eval = |p: &ModelParams| evaluate(config, p);
    let results: Vec<Result<Vec<Vec<Cell>>>> = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool.install(|| points.par_iter().map(eval).collect()),
        Err(_) => points.iter().map(eval).collect(),
    };
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(Table {
        command: config.target,
        columns: config.target.columns().to_vec(),
        rows,
    })
}

fn resolved_level(config: &RunConfig, p: &ModelParams) -> Result<usize> {
    match config.level {
        Some(level) => Ok(level),
        None => Ok(level_map(p)?.psi_a),
    }
}

fn evaluate(config: &RunConfig, p: &ModelParams) -> Result<Vec<Vec<Cell>>> {
    match config.target {
        Command::Connection => connection_rows(config, p),
        Command::Holonomy => holonomy_row(config, p).map(|r| vec![r]),
        Command::Berry => berry_row(config, p).map(|r| vec![r]),
        Command::Evolve => evolve_row(config, p).map(|r| vec![r]),
        Command::Breakdown => breakdown_row(config, p).map(|r| vec![r]),
        Command::Mixed => mixed_row(config, p).map(|r| vec![r]),
        Command::Sweep => unreachable!("sweeps are resolved to their target"),
    }
}

fn closed_form(label: BasisLabel, theta: f64) -> berrylab_core::ComplexMatrix {
    match label {
        BasisLabel::ReplyBasis => reply_connection_matrix(theta),
        BasisLabel::PrimedBasis => primed_connection_matrix(theta),
    }
}

fn connection_rows(config: &RunConfig, p: &ModelParams) -> Result<Vec<Vec<Cell>>> {
    let basis = basis_fn(config.basis, p.theta);
    let exact = closed_form(config.basis, p.theta);
    config
        .phis
        .iter()
        .map(|&phi| {
            let a = connection_numeric(basis.as_ref(), phi, config.fd_step)?;
            let mut row: Vec<Cell> = vec![p.theta.into(), phi.into()];
            for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                row.push(a[(i, j)].re.into());
                row.push(a[(i, j)].im.into());
            }
            row.push(a.max_abs_diff(&exact).into());
            Ok(row)
        })
        .collect()
}

fn holonomy_row(config: &RunConfig, p: &ModelParams) -> Result<Vec<Cell>> {
    let conn = match config.basis {
        BasisLabel::ReplyBasis => connection_analytic(p.theta),
        BasisLabel::PrimedBasis => {
            Connection::from_basis(basis_fn(config.basis, p.theta), config.fd_step)?
        }
    };
    let h = wilson_loop(&conn, config.n_points)?;
    let single = wrap_pi(TAU * (0.5 * p.theta).cos().powi(2));
    let max_dev = h
        .eigenphases
        .iter()
        .map(|&e| phase_distance(e, single))
        .fold(0.0, f64::max);
    Ok(vec![
        p.theta.into(),
        h.eigenphases[0].into(),
        h.eigenphases[1].into(),
        h.trace.re.into(),
        h.trace.im.into(),
        single.into(),
        max_dev.into(),
    ])
}

fn berry_row(config: &RunConfig, p: &ModelParams) -> Result<Vec<Cell>> {
    let level = resolved_level(config, p)?;
    let r = berry_phase(&smooth_eigenpath(p, level, config.n_points)?)?;
    Ok(vec![
        p.theta.into(),
        p.g.into(),
        p.omega.into(),
        level.into(),
        r.gamma.into(),
        r.raw_unwrapped.into(),
        r.n_points.into(),
        r.discretization_estimate.into(),
    ])
}

fn evolve_row(config: &RunConfig, p: &ModelParams) -> Result<Vec<Cell>> {
    let level = resolved_level(config, p)?;
    let psi0 = initial_eigenstate(p, level)?;
    let steps = config
        .steps_per_loop
        .unwrap_or_else(|| default_steps_per_loop(p, &psi0));
    let r = phase_report(&evolve_loop(p, &psi0, level, config.loops, steps)?)?;
    Ok(vec![
        p.theta.into(),
        p.g.into(),
        p.omega.into(),
        r.adiabaticity_ratio.into(),
        r.total_phase.into(),
        r.dynamical_phase.into(),
        r.geometric_phase.into(),
        r.final_fidelity.into(),
        r.min_fidelity.into(),
        r.loop_duration.into(),
    ])
}

fn breakdown_row(config: &RunConfig, p: &ModelParams) -> Result<Vec<Cell>> {
    let level = resolved_level(config, p)?;
    let row = breakdown_point(p, level, p.g, config.steps_per_loop)?;
    Ok(vec![
        p.theta.into(),
        p.omega.into(),
        row.g.into(),
        row.ratio.into(),
        row.report.final_fidelity.into(),
        row.report.min_fidelity.into(),
        row.report.geometric_phase.into(),
        row.report.loop_duration.into(),
    ])
}

/// At zero coupling the path is the chosen zero-coupling basis state;
/// otherwise the exact eigenstate of the level.
fn mixed_path(config: &RunConfig, p: &ModelParams) -> Result<StatePath> {
    let level = resolved_level(config, p)?;
    if p.g == 0.0 {
        let member = if level == level_map(p)?.psi_b {
            Member::B
        } else {
            Member::A
        };
        let (label, theta) = (config.basis, p.theta);
        StatePath::from_fn(config.n_points, |phi| {
            basis(label, theta, phi).member(member).clone()
        })
    } else {
        smooth_eigenpath(p, level, config.n_points)
    }
}

fn mixed_row(config: &RunConfig, p: &ModelParams) -> Result<Vec<Cell>> {
    let bp = reduced_bloch_path(&mixed_path(config, p)?, config.subsystem)?;
    let r = subsystem_phase(&bp)?;
    Ok(vec![
        p.theta.into(),
        p.g.into(),
        (config.subsystem.id() as usize).into(),
        r.p_plus.into(),
        r.omega_plus.principal.into(),
        r.omega_minus.principal.into(),
        r.gamma.into(),
        r.weight_variation.into(),
        r.gamma_unwrapped.into(),
    ])
}
