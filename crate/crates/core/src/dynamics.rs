//! Time evolution around the field loop, `phi(t) = omega t`.
//!
//! The integrator is classic fixed-step RK4. It advances
//! `psi~(t) = exp(i E0 t) psi(t)` under `H - E0`, with `E0 = <psi0|H(0)|psi0>`.
//! That shift is a c-number, so states differ from the lab frame only by a
//! known global phase, but the tracked eigencomponent no longer oscillates
//! at `E0` and RK4's phase error on it vanishes. Long adiabatic loops
//! depend on this.
//!
//! Phase bookkeeping over a closed loop of duration `T`:
//!
//! ```text
//! total      = arg <psi(0)|psi(T)>
//! dynamical  = -int_0^T <psi|H|psi> dt
//! geometric  = total - dynamical   (mod 2 pi)
//! ```

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, ComplexMatrix, StateVector, C64, DEGENERACY_GAP};
use crate::model::{hamiltonian, ModelParams};

/// Target bound on `||H - E0|| dt` for default step counts.
pub const STEP_NORM_BOUND: f64 = 0.05;
/// Floor for default step counts.
pub const MIN_DEFAULT_STEPS: usize = 20_000;
/// Hard minimum accepted by [`evolve_loop`].
pub const MIN_STEPS_PER_LOOP: usize = 1000;
/// Norm drift that aborts integration.
pub const NORM_ABORT: f64 = 1e-6;
/// States are stored at roughly this many points per loop.
pub const SAMPLES_PER_LOOP: usize = 2048;

type Vec4 = [C64; 4];
type Mat4 = [[C64; 4]; 4];

/// A stored run. `states` and the per-sample quantities are recorded on a
/// subsampled grid; `dynamical_phase` is accumulated on the full step grid.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `<psi|H(t)|psi>` at each stored time.
    pub energy_expect: Vec<f64>,
    /// `-int_0^t <psi|H|psi> dt` (trapezoid on every integration step).
    pub dynamical_phase: Vec<f64>,
    pub params: ModelParams,
    pub level: usize,
    pub loops: usize,
    pub steps_per_loop: usize,
    /// `max_t | ||psi(t)|| - 1 |` over every integration step.
    pub max_norm_drift: f64,
    /// The c-number `E0` removed during integration.
    pub energy_offset: f64,
}

impl Trajectory {
    pub fn period(&self) -> f64 {
        TAU / self.params.omega
    }

    pub fn duration(&self) -> f64 {
        *self.times.last().expect("non-empty trajectory")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport {
    pub total_phase: f64,
    pub dynamical_phase: f64,
    /// On `(-pi, pi]`.
    pub geometric_phase: f64,
    /// Overlap of the final state with the instantaneous eigenspace of the
    /// tracked level.
    pub final_fidelity: f64,
    /// Smallest such overlap over the stored samples.
    pub min_fidelity: f64,
    /// `|omega / (g sin theta)|`, infinite where the gap closes.
    pub adiabaticity_ratio: f64,
    /// Wall-clock length of the run, `loops * 2 pi / omega`.
    pub loop_duration: f64,
}

/// `|omega / (g sin theta)|`.
pub fn adiabaticity_ratio(params: &ModelParams) -> Result<f64> {
    let sin_theta = params.theta.sin();
    if params.g == 0.0 || sin_theta.abs() < 1e-12 {
        return Err(Error::AdiabaticityUndefined {
            g: params.g,
            sin_theta,
        });
    }
    Ok((params.omega / (params.g * sin_theta)).abs())
}

/// Eigenvector of `level` (ascending) of `H(phi = 0)`.
pub fn initial_eigenstate(params: &ModelParams, level: usize) -> Result<StateVector> {
    let eig = herm_eig(&hamiltonian(params, 0.0))?;
    eig.eigenvectors
        .get(level)
        .cloned()
        .ok_or(Error::LevelOutOfRange { level, dim: 4 })
}

fn frame_energy(params: &ModelParams, psi0: &StateVector) -> f64 {
    psi0.expectation(&hamiltonian(params, 0.0)).re
}

/// Default resolution: `||H - E0|| dt <= 0.05`, at least 20 000 steps.
pub fn default_steps_per_loop(params: &ModelParams, psi0: &StateVector) -> usize {
    let bound = params.hamiltonian_norm_bound() + frame_energy(params, psi0).abs();
    let steps = (TAU / params.omega * bound / STEP_NORM_BOUND).ceil();
    MIN_DEFAULT_STEPS.max(steps as usize)
}

/// `H(phi) - E0 = a0 + cos(phi) ac + sin(phi) as`.
struct Generator {
    a0: Mat4,
    ac: Mat4,
    as_: Mat4,
}

impl Generator {
    fn new(params: &ModelParams, offset: f64) -> Self {
        let to_mat = |m: &ComplexMatrix| {
            let mut out = [[C64::new(0.0, 0.0); 4]; 4];
            for (i, row) in out.iter_mut().enumerate() {
                for (j, x) in row.iter_mut().enumerate() {
                    *x = m[(i, j)];
                }
            }
            out
        };
        // H is affine in (cos phi, sin phi); recover the three pieces exactly
        // from samples so the generator cannot drift from `hamiltonian`.
        let h0 = hamiltonian(params, 0.0);
        let hq = hamiltonian(params, std::f64::consts::FRAC_PI_2);
        let hpi = hamiltonian(params, std::f64::consts::PI);
        let a0 = (&h0 + &hpi).scale_real(0.5);
        let ac = (&h0 - &hpi).scale_real(0.5);
        let as_ = &hq - &a0;
        let mut a0 = to_mat(&a0);
        for (i, row) in a0.iter_mut().enumerate() {
            row[i] -= C64::new(offset, 0.0);
        }
        Self {
            a0,
            ac: to_mat(&ac),
            as_: to_mat(&as_),
        }
    }

    fn at(&self, phi: f64) -> Mat4 {
        let (s, c) = phi.sin_cos();
        let mut h = self.a0;
        for ((row, rc), rs) in h.iter_mut().zip(&self.ac).zip(&self.as_) {
            for ((x, xc), xs) in row.iter_mut().zip(rc).zip(rs) {
                *x += xc * c + xs * s;
            }
        }
        h
    }
}

/// `-i H psi`.
#[inline]
fn deriv(h: &Mat4, psi: &Vec4) -> Vec4 {
    let mut out = [C64::new(0.0, 0.0); 4];
    for i in 0..4 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..4 {
            acc += h[i][j] * psi[j];
        }
        out[i] = C64::new(acc.im, -acc.re);
    }
    out
}

#[inline]
fn axpy(psi: &Vec4, k: &Vec4, a: f64) -> Vec4 {
    let mut out = *psi;
    for i in 0..4 {
        out[i] += k[i] * a;
    }
    out
}

#[inline]
fn norm(psi: &Vec4) -> f64 {
    psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

// <psi| (H - E0) |psi> given k = -i (H - E0) psi.
#[inline]
fn shifted_energy(psi: &Vec4, k: &Vec4) -> f64 {
    psi.iter()
        .zip(k)
        .map(|(p, d)| (p.conj() * C64::new(-d.im, d.re)).re)
        .sum()
}

/// Integrates `i d/dt psi = H(omega t) psi` over `loops` full loops with
/// `steps_per_loop` RK4 steps each. The norm is checked but never
/// renormalized.
pub fn evolve_loop(
    params: &ModelParams,
    psi0: &StateVector,
    level: usize,
    loops: usize,
    steps_per_loop: usize,
) -> Result<Trajectory> {
    params.validate()?;
    if psi0.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: psi0.dim(),
        });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm: psi0.norm() });
    }
    if level >= 4 {
        return Err(Error::LevelOutOfRange { level, dim: 4 });
    }
    if steps_per_loop < MIN_STEPS_PER_LOOP {
        return Err(Error::TooFewTimeSteps {
            got: steps_per_loop,
            min: MIN_STEPS_PER_LOOP,
        });
    }
    let loops = loops.max(1);

    let offset = frame_energy(params, psi0);
    let gen = Generator::new(params, offset);
    let omega = params.omega;
    let period = TAU / omega;
    let dt = period / steps_per_loop as f64;
    let total_steps = loops * steps_per_loop;
    let stride = (steps_per_loop / SAMPLES_PER_LOOP).max(1);

    let mut psi: Vec4 = [
        psi0.amps()[0],
        psi0.amps()[1],
        psi0.amps()[2],
        psi0.amps()[3],
    ];
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        energy_expect: Vec::new(),
        dynamical_phase: Vec::new(),
        params: *params,
        level,
        loops,
        steps_per_loop,
        max_norm_drift: 0.0,
        energy_offset: offset,
    };

    let mut k1 = deriv(&gen.at(0.0), &psi);
    let mut e_start = shifted_energy(&psi, &k1);
    let mut shifted_dynamical = 0.0;
    let record = |traj: &mut Trajectory, t: f64, psi: &Vec4, e: f64, d: f64| {
        let frame = C64::from_polar(1.0, -offset * t);
        traj.times.push(t);
        traj.states.push(StateVector::from_raw(
            psi.iter().map(|z| z * frame).collect(),
        ));
        traj.energy_expect.push(e + offset);
        traj.dynamical_phase.push(d - offset * t);
    };
    record(&mut traj, 0.0, &psi, e_start, 0.0);

    for step in 0..total_steps {
        let t = step as f64 * dt;
        let t_next = (step + 1) as f64 * dt;
        let h_mid = gen.at(omega * (t + 0.5 * dt));
        let h_end = gen.at(omega * t_next);

        let k2 = deriv(&h_mid, &axpy(&psi, &k1, 0.5 * dt));
        let k3 = deriv(&h_mid, &axpy(&psi, &k2, 0.5 * dt));
        let k4 = deriv(&h_end, &axpy(&psi, &k3, dt));
        for i in 0..4 {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }

        let drift = (norm(&psi) - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if drift > NORM_ABORT {
            return Err(Error::NormDrift {
                step: step + 1,
                drift,
                dt,
            });
        }

        k1 = deriv(&h_end, &psi);
        let e_end = shifted_energy(&psi, &k1);
        shifted_dynamical -= 0.5 * (e_start + e_end) * dt;
        e_start = e_end;

        if (step + 1) % stride == 0 || step + 1 == total_steps {
            record(&mut traj, t_next, &psi, e_end, shifted_dynamical);
        }
    }
    Ok(traj)
}

/// Overlap of `psi` with the eigenspace of `level` of `H(phi)`; the whole
/// degenerate cluster counts when the level is degenerate.
fn level_fidelity(params: &ModelParams, level: usize, phi: f64, psi: &StateVector) -> Result<f64> {
    let eig = herm_eig(&hamiltonian(params, phi))?;
    let e = eig.eigenvalues[level];
    Ok(eig
        .eigenvalues
        .iter()
        .zip(&eig.eigenvectors)
        .filter(|(x, _)| (*x - e).abs() < DEGENERACY_GAP)
        .map(|(_, v)| v.inner(psi).norm_sqr())
        .sum())
}

pub fn phase_report(traj: &Trajectory) -> Result<PhaseReport> {
    let period = traj.period();
    let duration = traj.duration();
    let loops = duration / period;
    if traj.states.len() < 2 || (loops - loops.round()).abs() > 1e-9 || loops.round() < 1.0 {
        return Err(Error::NonIntegerLoops);
    }
    let psi0 = &traj.states[0];
    let psi_t = traj.states.last().expect("non-empty");
    let total_phase = psi0.inner(psi_t).arg();
    let dynamical_phase = *traj.dynamical_phase.last().expect("non-empty");
    let geometric_phase = wrap_pi(total_phase - dynamical_phase);

    let omega = traj.params.omega;
    let mut min_fidelity = f64::INFINITY;
    let mut final_fidelity = 0.0;
    for (t, psi) in traj.times.iter().zip(&traj.states) {
        let f = level_fidelity(&traj.params, traj.level, omega * t, psi)?;
        min_fidelity = min_fidelity.min(f);
        final_fidelity = f;
    }
    let adiabaticity_ratio = adiabaticity_ratio(&traj.params).unwrap_or(f64::INFINITY);

    Ok(PhaseReport {
        total_phase,
        dynamical_phase,
        geometric_phase,
        final_fidelity,
        min_fidelity,
        adiabaticity_ratio,
        loop_duration: duration,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    pub g: f64,
    pub ratio: f64,
    pub report: PhaseReport,
}

/// Evolves the `level` eigenstate for one loop at each coupling, largest
/// `g` first. `steps_per_loop = None` picks [`default_steps_per_loop`].
pub fn breakdown_sweep(
    base: &ModelParams,
    level: usize,
    g_values: &[f64],
    steps_per_loop: Option<usize>,
) -> Result<Vec<BreakdownRow>> {
    let mut gs = g_values.to_vec();
    for &g in &gs {
        if g.is_nan() || g <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                reason: "breakdown sweep needs g > 0",
            });
        }
    }
    gs.sort_by(|a, b| b.total_cmp(a));
    gs.into_iter()
        .map(|g| breakdown_point(base, level, g, steps_per_loop))
        .collect()
}

/// One row of [`breakdown_sweep`].
pub fn breakdown_point(
    base: &ModelParams,
    level: usize,
    g: f64,
    steps_per_loop: Option<usize>,
) -> Result<BreakdownRow> {
    let params = base.with_g(g);
    params.validate()?;
    let ratio = adiabaticity_ratio(&params)?;
    let psi0 = initial_eigenstate(&params, level)?;
    let steps = steps_per_loop.unwrap_or_else(|| default_steps_per_loop(&params, &psi0));
    let traj = evolve_loop(&params, &psi0, level, 1, steps)?;
    Ok(BreakdownRow {
        g,
        ratio,
        report: phase_report(&traj)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::{berry_phase, smooth_eigenpath};
    use crate::angle::phase_distance;
    use crate::model::CouplingKind;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_6, PI};

    fn params(theta: f64, g: f64, omega: f64) -> ModelParams {
        ModelParams::new(theta, g, 1.0, omega, CouplingKind::XxMinusYy).unwrap()
    }

    fn up_up() -> StateVector {
        StateVector::new(vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn ratio_examples() {
        assert!((adiabaticity_ratio(&params(FRAC_PI_2, 0.1, 0.01)).unwrap() - 0.1).abs() < 1e-15);
        assert!((adiabaticity_ratio(&params(FRAC_PI_6, 0.1, 0.01)).unwrap() - 0.2).abs() < 1e-14);
        assert!(adiabaticity_ratio(&params(1.0, 0.0, 0.5)).is_err());
        assert!(adiabaticity_ratio(&params(0.0, 0.1, 0.5)).is_err());
        assert!(adiabaticity_ratio(&params(PI, 0.1, 0.5)).is_err());
    }

    #[test]
    fn stationary_state() {
        let p = params(0.0, 0.0, 0.05);
        let psi0 = up_up();
        let traj = evolve_loop(&p, &psi0, 3, 1, 2000).unwrap();
        let t = traj.duration();
        let want = psi0.with_phase(-0.5 * t);
        let got = traj.states.last().unwrap();
        for (a, b) in got.amps().iter().zip(want.amps()) {
            assert!((a - b).norm() < 1e-8);
        }
        let r = phase_report(&traj).unwrap();
        assert!(phase_distance(r.geometric_phase, 0.0) < 1e-6);
        assert!((r.final_fidelity - 1.0).abs() < 1e-12);
        assert!(r.adiabaticity_ratio.is_infinite());
    }

    #[test]
    fn adiabatic_run_follows_level() {
        let g = 0.25;
        let p = params(FRAC_PI_2, g, 1e-3 * g);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        let steps = default_steps_per_loop(&p, &psi0);
        let traj = evolve_loop(&p, &psi0, 3, 1, steps).unwrap();
        assert!(traj.max_norm_drift <= 1e-8);
        let r = phase_report(&traj).unwrap();
        assert!(r.final_fidelity >= 0.999, "fidelity {}", r.final_fidelity);
        let berry = berry_phase(&smooth_eigenpath(&p, 3, 4000).unwrap()).unwrap();
        assert!(
            phase_distance(r.geometric_phase, berry.gamma) < 1e-2,
            "{} vs {}",
            r.geometric_phase,
            berry.gamma
        );
        let identity = wrap_pi(r.total_phase - r.dynamical_phase - r.geometric_phase);
        assert!(identity.abs() <= 1e-10);
    }

    #[test]
    fn phases_converged_at_reference_resolution() {
        let p = params(1.0, 0.2, 0.01);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        let steps = default_steps_per_loop(&p, &psi0);
        let a = phase_report(&evolve_loop(&p, &psi0, 3, 1, steps).unwrap()).unwrap();
        let b = phase_report(&evolve_loop(&p, &psi0, 3, 1, 2 * steps).unwrap()).unwrap();
        assert!(phase_distance(a.total_phase, b.total_phase) <= 1e-6);
        assert!((a.dynamical_phase - b.dynamical_phase).abs() <= 1e-6);
        assert!(phase_distance(a.geometric_phase, b.geometric_phase) <= 1e-6);
    }

    #[test]
    fn rk4_is_fourth_order() {
        // Non-adiabatic on purpose so the state actually moves.
        let p = params(1.0, 0.25, 0.2);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        let final_state = |n| {
            evolve_loop(&p, &psi0, 3, 1, n)
                .unwrap()
                .states
                .last()
                .unwrap()
                .clone()
        };
        let reference = final_state(8000);
        let err = |n: usize| {
            let s = final_state(n);
            s.amps()
                .iter()
                .zip(reference.amps())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt()
        };
        let (e1, e2) = (err(1000), err(2000));
        let exponent = (e1 / e2).log2();
        assert!(exponent >= 3.7, "exponent {exponent} ({e1:e}, {e2:e})");
    }

    #[test]
    fn global_phase_of_initial_state_is_irrelevant() {
        let p = params(1.2, 0.3, 0.05);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        let a = phase_report(&evolve_loop(&p, &psi0, 3, 1, 20000).unwrap()).unwrap();
        let b =
            phase_report(&evolve_loop(&p, &psi0.with_phase(1.234), 3, 1, 20000).unwrap()).unwrap();
        assert!(phase_distance(a.geometric_phase, b.geometric_phase) <= 1e-9);
        assert!(phase_distance(a.total_phase, b.total_phase) <= 1e-9);
    }

    #[test]
    fn norm_drift_aborts() {
        // dt ~ 6 with ||H|| ~ 1: RK4 is unstable.
        let p = params(1.0, 0.25, 1e-3);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        assert!(matches!(
            evolve_loop(&p, &psi0, 3, 1, 1000),
            Err(Error::NormDrift { .. })
        ));
    }

    #[test]
    fn invalid_inputs() {
        let p = params(1.0, 0.25, 0.1);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        assert!(matches!(
            evolve_loop(&p, &psi0, 3, 1, 999),
            Err(Error::TooFewTimeSteps { .. })
        ));
        assert!(matches!(
            evolve_loop(&p, &psi0, 4, 1, 1000),
            Err(Error::LevelOutOfRange { .. })
        ));
        let qubit = StateVector::up();
        assert!(evolve_loop(&p, &qubit, 3, 1, 1000).is_err());

        let mut traj = evolve_loop(&p, &psi0, 3, 1, 4000).unwrap();
        let keep = traj.times.len() / 2;
        traj.times.truncate(keep);
        traj.states.truncate(keep);
        traj.dynamical_phase.truncate(keep);
        assert!(matches!(phase_report(&traj), Err(Error::NonIntegerLoops)));
    }

    #[test]
    fn multiple_loops() {
        let p = params(FRAC_PI_2, 0.25, 0.01);
        let psi0 = initial_eigenstate(&p, 3).unwrap();
        let traj = evolve_loop(&p, &psi0, 3, 2, 20000).unwrap();
        assert!((traj.duration() - 2.0 * TAU / 0.01).abs() < 1e-6);
        let r = phase_report(&traj).unwrap();
        let one = phase_report(&evolve_loop(&p, &psi0, 3, 1, 20000).unwrap()).unwrap();
        // Two adiabatic loops accumulate about twice the geometric phase.
        assert!(phase_distance(r.geometric_phase, 2.0 * one.geometric_phase) < 2e-2);
    }

    /// Rotating-frame oracle for the effective two-level problem of spin 2:
    /// `H' = g sin(theta) sx + (omega/2) sz`, started in the `sx = +1` state.
    fn effective_fidelity(ratio: f64, t_over_period: f64) -> f64 {
        let sin2_beta = 0.25 * ratio * ratio / (1.0 + 0.25 * ratio * ratio);
        let rabi = PI * (1.0 + 4.0 / (ratio * ratio)).sqrt();
        1.0 - sin2_beta * (rabi * t_over_period).sin().powi(2)
    }

    #[test]
    fn fidelity_matches_rotating_frame_oracle() {
        let omega = 1e-3;
        for ratio in [1.0, 5.0, 10.0] {
            let p = params(FRAC_PI_2, omega / ratio, omega);
            let psi0 = initial_eigenstate(&p, 3).unwrap();
            let r = phase_report(
                &evolve_loop(&p, &psi0, 3, 1, default_steps_per_loop(&p, &psi0)).unwrap(),
            )
            .unwrap();
            let want_final = effective_fidelity(ratio, 1.0);
            let sin2_beta = 0.25 * ratio * ratio / (1.0 + 0.25 * ratio * ratio);
            assert!(
                (r.final_fidelity - want_final).abs() < 5e-3,
                "ratio {ratio}: {} vs {want_final}",
                r.final_fidelity
            );
            assert!(
                (r.min_fidelity - (1.0 - sin2_beta)).abs() < 5e-3,
                "ratio {ratio}: min {}",
                r.min_fidelity
            );
        }
    }

    #[test]
    fn sweep_rows_descend_in_g() {
        let base = params(FRAC_PI_2, 0.0, 0.05);
        let rows = breakdown_sweep(&base, 3, &[0.05, 0.5], Some(20000)).unwrap();
        assert_eq!(
            rows.iter().map(|r| r.g).collect::<Vec<_>>(),
            vec![0.5, 0.05]
        );
        assert!(breakdown_sweep(&base, 3, &[0.1, 0.0], None).is_err());
    }
}
