//! Abelian Berry phases around the `phi` loop.
//!
//! The loop phase is the discrete Bargmann invariant
//! `gamma = -arg prod_k <psi_k|psi_{k+1}>` with the path closed back onto
//! its first point. It is independent of the phase of every sample, so no
//! derivative of the states is ever taken.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::error::{Error, Result};
use crate::linalg::{herm_eig, StateVector};
use crate::model::{basis_factors, hamiltonian, level_gap, BasisLabel, Member, ModelParams};

/// Closure tolerance on the ray overlap `|<psi_N|psi_0>|`.
pub const CLOSURE_TOL: f64 = 1e-6;
/// Minimum gap, in units of `B`, for a level to count as non-degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gauge {
    /// Consecutive overlaps are real and positive.
    ParallelTransport,
    Raw,
}

/// States sampled on `0 = phi_0 < ... < phi_N = 2 pi`.
#[derive(Clone, Debug)]
pub struct StatePath {
    phis: Vec<f64>,
    states: Vec<StateVector>,
    gauge: Gauge,
}

/// `N + 1` equally spaced points with `phi_0 = 0` and `phi_N = 2 pi` exactly.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    let mut phis: Vec<f64> = (0..=n).map(|k| TAU * k as f64 / n as f64).collect();
    phis[n] = TAU;
    phis
}

impl StatePath {
    pub fn new(phis: Vec<f64>, states: Vec<StateVector>, gauge: Gauge) -> Result<Self> {
        if phis.len() < 3 || phis.len() != states.len() {
            return Err(Error::MalformedPath(format!(
                "need matching phi grid and states with at least 3 points (got {} and {})",
                phis.len(),
                states.len()
            )));
        }
        if phis[0] != 0.0 || (phis[phis.len() - 1] - TAU).abs() > 1e-12 {
            return Err(Error::MalformedPath("grid must run from 0 to 2 pi".into()));
        }
        if phis.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::MalformedPath(
                "grid must be strictly ascending".into(),
            ));
        }
        let dim = states[0].dim();
        for s in &states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: s.dim(),
                });
            }
            if (s.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::NotNormalized { norm: s.norm() });
            }
        }
        if gauge == Gauge::ParallelTransport {
            for (k, w) in states.windows(2).enumerate() {
                let ov = w[0].inner(&w[1]);
                if ov.im.abs() > 1e-9 || ov.re <= 0.0 {
                    return Err(Error::MalformedPath(format!(
                        "overlap {k} -> {} is not real positive: {ov}",
                        k + 1
                    )));
                }
            }
        }
        Ok(Self {
            phis,
            states,
            gauge,
        })
    }

    /// Samples `f` on [`uniform_grid`]`(n)` in the raw gauge.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> StateVector) -> Result<Self> {
        let phis = uniform_grid(n);
        let states = phis.iter().map(|&p| f(p)).collect();
        Self::new(phis, states, Gauge::Raw)
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    /// Number of segments `N`.
    pub fn n_segments(&self) -> usize {
        self.phis.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// Multiplies sample `k` by `exp(i alpha(k))`; the result is raw gauge.
    pub fn regauge(&self, alpha: impl Fn(usize) -> f64) -> Self {
        Self {
            phis: self.phis.clone(),
            states: self
                .states
                .iter()
                .enumerate()
                .map(|(k, s)| s.with_phase(alpha(k)))
                .collect(),
            gauge: Gauge::Raw,
        }
    }

    /// Rephases every sample so consecutive overlaps are real positive.
    /// All the loop phase then sits in `<psi_N|psi_0>`.
    pub fn parallel_transport(&self) -> Result<Self> {
        let mut states = Vec::with_capacity(self.states.len());
        states.push(self.states[0].clone());
        for s in &self.states[1..] {
            let prev = states.last().expect("non-empty");
            let ov = prev.inner(s);
            if ov.norm() < 1e-12 {
                return Err(Error::MalformedPath(
                    "consecutive samples are orthogonal; path undersampled".into(),
                ));
            }
            states.push(s.scaled(ov.conj() / ov.norm()));
        }
        Self::new(self.phis.clone(), states, Gauge::ParallelTransport)
    }

    /// Every second sample, keeping both endpoints. `None` when `N` is odd
    /// or too small.
    pub fn coarsened(&self) -> Option<Self> {
        let n = self.n_segments();
        if !n.is_multiple_of(2) || n < 4 {
            return None;
        }
        let pick = |v: &[StateVector]| v.iter().step_by(2).cloned().collect::<Vec<_>>();
        Some(Self {
            phis: self.phis.iter().step_by(2).copied().collect(),
            states: pick(&self.states),
            gauge: Gauge::Raw,
        })
    }

    /// Elementwise tensor product of two paths on the same grid.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        if self.phis != other.phis {
            return Err(Error::MalformedPath(
                "factor paths use different grids".into(),
            ));
        }
        let states = self
            .states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.kron(b))
            .collect();
        Self::new(self.phis.clone(), states, Gauge::Raw)
    }
}

/// Loop phase of a closed path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerryResult {
    /// Gauge-invariant phase on `(-pi, pi]`.
    pub gamma: f64,
    /// `-sum_k arg <psi_k|psi_{k+1}>` before reduction; depends on the
    /// gauge of the samples only through multiples of `2 pi`.
    pub raw_unwrapped: f64,
    pub n_points: usize,
    /// `gamma(N) - gamma(N/2)` on the every-other-sample path, `NaN` when
    /// `N` is odd.
    pub discretization_estimate: f64,
}

fn closure_check(path: &StatePath) -> Result<()> {
    let states = path.states();
    let overlap = states[states.len() - 1].inner(&states[0]).norm();
    if overlap < 1.0 - CLOSURE_TOL {
        return Err(Error::OpenPath { overlap });
    }
    Ok(())
}

fn loop_phase(states: &[StateVector]) -> f64 {
    let n = states.len();
    let mut raw = 0.0;
    for k in 0..n {
        let next = &states[(k + 1) % n];
        raw -= states[k].inner(next).arg();
    }
    raw
}

pub fn berry_phase(path: &StatePath) -> Result<BerryResult> {
    closure_check(path)?;
    let raw_unwrapped = loop_phase(path.states());
    let gamma = wrap_pi(raw_unwrapped);
    let discretization_estimate = match path.coarsened() {
        Some(coarse) => wrap_pi(gamma - loop_phase(coarse.states())),
        None => f64::NAN,
    };
    Ok(BerryResult {
        gamma,
        raw_unwrapped,
        n_points: path.n_segments(),
        discretization_estimate,
    })
}

/// Instantaneous eigenvector of level `level` (ascending order) sampled on
/// `N + 1` points around the loop, in parallel-transport gauge.
///
/// Fails where the level's gap drops below `1e-6 B`, in particular
/// everywhere at `g = 0`.
pub fn smooth_eigenpath(params: &ModelParams, level: usize, n_points: usize) -> Result<StatePath> {
    params.validate()?;
    if level >= 4 {
        return Err(Error::LevelOutOfRange { level, dim: 4 });
    }
    let threshold = DEGENERACY_THRESHOLD * params.b_field;
    let phis = uniform_grid(n_points);
    let mut states = Vec::with_capacity(phis.len());
    for &phi in &phis {
        let eig = herm_eig(&hamiltonian(params, phi))?;
        let gap = level_gap(&eig.eigenvalues, level)?;
        if gap < threshold {
            return Err(Error::DegenerateLevel {
                level,
                phi,
                gap,
                threshold,
            });
        }
        states.push(eig.eigenvectors[level].clone());
    }
    StatePath::new(phis, states, Gauge::Raw)?.parallel_transport()
}

/// Loop phases of the two tensor factors of a zero-coupling basis state and
/// of the composite product path.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitPhase {
    pub first: BerryResult,
    pub second: BerryResult,
    pub composite: BerryResult,
}

pub fn product_split_phase(
    theta: f64,
    label: BasisLabel,
    member: Member,
    n_points: usize,
) -> Result<SplitPhase> {
    let first = StatePath::from_fn(n_points, |phi| basis_factors(label, member, theta, phi).0)?;
    let second = StatePath::from_fn(n_points, |phi| basis_factors(label, member, theta, phi).1)?;
    let composite = first.kron(&second)?;
    Ok(SplitPhase {
        first: berry_phase(&first)?,
        second: berry_phase(&second)?,
        composite: berry_phase(&composite)?,
    })
}
