//! Geometric phase of a single qubit inside the composite system.
//!
//! The reduced state of one qubit is a point `r` in the Bloch ball. Its two
//! eigenvectors sit at `+r/|r|` and `-r/|r|` on the unit sphere. Each of
//! those closed paths picks up the spin-1/2 phase `-Omega/2`, and the
//! subsystem phase is the spectral-weight average
//! `gamma = p+ (-Omega+/2) + p- (-Omega-/2)`.
//!
//! Solid angles are evaluated through the Bargmann invariant of coherent
//! states, so they are the exact areas of the geodesic polygons through
//! the samples.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::abelian::{berry_phase, uniform_grid, Gauge, StatePath};
use crate::angle::{wrap_2pi, wrap_pi};
use crate::error::{Error, Result};
use crate::linalg::{
    partial_trace_unchecked, pauli_x, pauli_y, pauli_z, validate_density, ComplexMatrix,
    StateVector, Subsystem, C64,
};

/// Bloch vectors shorter than this cannot be prolonged.
pub const MIN_BLOCH_LENGTH: f64 = 1e-8;
/// Allowed spread of the spectral weights along a loop.
pub const WEIGHT_TOLERANCE: f64 = 1e-4;
/// Areas this close to `-2 pi` are reported as `+2 pi`. Great circles land
/// on the branch cut and roundoff would otherwise pick the side.
pub const BRANCH_SNAP: f64 = 1e-9;

pub type Vec3 = [f64; 3];

fn length(r: &Vec3) -> f64 {
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Spin-1/2 ket pointing along the unit vector `n`.
pub fn coherent_state(n: &Vec3) -> StateVector {
    let polar = n[2].clamp(-1.0, 1.0).acos();
    let azimuth = n[1].atan2(n[0]);
    let (s, c) = (0.5 * polar).sin_cos();
    StateVector::from_raw(vec![C64::new(c, 0.0), C64::from_polar(s, azimuth)])
}

/// Spectral data of a qubit density matrix.
#[derive(Clone, Debug)]
pub struct BlochDecomposition {
    /// `(p+, p-)` with `p+ >= p-`.
    pub p: (f64, f64),
    pub r: Vec3,
    /// Eigenkets for `p+` and `p-`, along `+r` and `-r`.
    pub kets: (StateVector, StateVector),
}

fn bloch_vector(rho: &ComplexMatrix) -> Vec3 {
    [
        (rho * &pauli_x()).trace().re,
        (rho * &pauli_y()).trace().re,
        (rho * &pauli_z()).trace().re,
    ]
}

fn decompose_unchecked(rho: &ComplexMatrix) -> Result<BlochDecomposition> {
    let r = bloch_vector(rho);
    let len = length(&r);
    if len < MIN_BLOCH_LENGTH {
        return Err(Error::ProlongationUndefined { length: len });
    }
    let n = [r[0] / len, r[1] / len, r[2] / len];
    let anti = [-n[0], -n[1], -n[2]];
    Ok(BlochDecomposition {
        p: (0.5 * (1.0 + len), 0.5 * (1.0 - len)),
        r,
        kets: (coherent_state(&n), coherent_state(&anti)),
    })
}

/// `rho = p+ |+><+| + p- |-><-|` with `r = tr(rho sigma)`.
pub fn bloch_decompose(rho: &ComplexMatrix) -> Result<BlochDecomposition> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: rho.dim(),
        });
    }
    validate_density(rho)?;
    decompose_unchecked(rho)
}

/// Reduced-state trajectory of one qubit around the loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochPath {
    pub phis: Vec<f64>,
    pub r: Vec<Vec3>,
    /// `(p+, p-)` per point.
    pub p: Vec<(f64, f64)>,
    pub subsystem: Subsystem,
}

impl BlochPath {
    /// Builds a path from Bloch vectors on a uniform grid, e.g. for
    /// synthetic tests. The last point closes the loop.
    pub fn from_vectors(r: Vec<Vec3>, subsystem: Subsystem) -> Result<Self> {
        if r.len() < 3 {
            return Err(Error::MalformedPath(format!(
                "need at least 3 points, got {}",
                r.len()
            )));
        }
        let p = r
            .iter()
            .map(|v| {
                let len = length(v);
                if len > 1.0 + 1e-9 {
                    Err(Error::MalformedPath(format!(
                        "Bloch vector of length {len} outside the ball"
                    )))
                } else {
                    Ok((0.5 * (1.0 + len), 0.5 * (1.0 - len)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            phis: uniform_grid(r.len() - 1),
            r,
            p,
            subsystem,
        })
    }

    /// `max_k |p+_k - mean(p+)|` over the distinct samples.
    pub fn weight_variation(&self) -> f64 {
        let (mean, _) = self.mean_weights();
        self.distinct()
            .iter()
            .map(|(p, _)| (p - mean).abs())
            .fold(0.0, f64::max)
    }

    /// Loop-averaged `(p+, p-)`.
    pub fn mean_weights(&self) -> (f64, f64) {
        let d = self.distinct();
        let mean = d.iter().map(|(p, _)| p).sum::<f64>() / d.len() as f64;
        (mean, 1.0 - mean)
    }

    // The endpoint repeats the start.
    fn distinct(&self) -> &[(f64, f64)] {
        &self.p[..self.p.len() - 1]
    }
}

/// Partial trace of every point of a closed two-qubit path.
pub fn reduced_bloch_path(path: &StatePath, subsystem: Subsystem) -> Result<BlochPath> {
    if path.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: path.dim(),
        });
    }
    let states = path.states();
    let overlap = states[0].inner(&states[states.len() - 1]).norm();
    if overlap < 1.0 - crate::abelian::CLOSURE_TOL {
        return Err(Error::OpenPath { overlap });
    }
    let mut r = Vec::with_capacity(states.len());
    let mut p = Vec::with_capacity(states.len());
    for (phi, psi) in path.phis().iter().zip(states) {
        let rho = partial_trace_unchecked(&psi.projector(), subsystem);
        let d = decompose_unchecked(&rho).map_err(|err| match err {
            Error::ProlongationUndefined { length } => {
                Error::DegenerateReducedState { phi: *phi, length }
            }
            other => other,
        })?;
        r.push(d.r);
        p.push(d.p);
    }
    Ok(BlochPath {
        phis: path.phis().to_vec(),
        r,
        p,
        subsystem,
    })
}

/// Unit-sphere paths of the two eigenvectors, `(r/|r|, -r/|r|)`.
pub fn prolong(bp: &BlochPath) -> Result<(Vec<Vec3>, Vec<Vec3>)> {
    let mut plus = Vec::with_capacity(bp.r.len());
    let mut minus = Vec::with_capacity(bp.r.len());
    for r in &bp.r {
        let len = length(r);
        if len < MIN_BLOCH_LENGTH {
            return Err(Error::ProlongationUndefined { length: len });
        }
        plus.push([r[0] / len, r[1] / len, r[2] / len]);
        minus.push([-r[0] / len, -r[1] / len, -r[2] / len]);
    }
    Ok((plus, minus))
}

/// Signed solid angle of a closed path on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidAngle {
    /// On `(-2 pi, 2 pi]`.
    pub principal: f64,
    /// Accumulated step by step along the path with kets that are smooth
    /// away from the south pole. Loops around the south pole therefore
    /// come out near `4 pi` rather than near zero.
    pub unwrapped: f64,
    /// `(unwrapped - principal) / 4 pi`.
    pub winding: i64,
}

/// Area enclosed by `points` (counter-clockwise seen from outside is
/// positive). The last point must repeat the first, and consecutive points
/// must be less than `pi/2` apart.
pub fn solid_angle(points: &[Vec3]) -> Result<SolidAngle> {
    if points.len() < 3 {
        return Err(Error::MalformedPath(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    for (k, w) in points.windows(2).enumerate() {
        let angle = dot(&w[0], &w[1]).clamp(-1.0, 1.0).acos();
        if angle >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Undersampled {
                index: k,
                next: k + 1,
                angle,
            });
        }
    }
    let states = points.iter().map(coherent_state).collect();
    let path = StatePath::new(uniform_grid(points.len() - 1), states, Gauge::Raw)?;
    let berry = berry_phase(&path)?;
    let unwrapped = -2.0 * berry.raw_unwrapped;
    let mut principal = wrap_2pi(unwrapped);
    if principal <= -TAU + BRANCH_SNAP {
        principal += 2.0 * TAU;
    }
    let winding = ((unwrapped - principal) / (2.0 * TAU)).round() as i64;
    Ok(SolidAngle {
        principal,
        unwrapped,
        winding,
    })
}

// Same convention as the areas: the edge of `(-pi, pi]` goes to `+pi`.
fn snap_upper(gamma: f64) -> f64 {
    if gamma <= -PI + BRANCH_SNAP {
        gamma + TAU
    } else {
        gamma
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedPhaseResult {
    pub omega_plus: SolidAngle,
    pub omega_minus: SolidAngle,
    pub p_plus: f64,
    pub p_minus: f64,
    /// On `(-pi, pi]`, from the principal areas.
    pub gamma: f64,
    /// Same sum from the unwrapped areas, not reduced.
    pub gamma_unwrapped: f64,
    pub weight_variation: f64,
}

pub fn subsystem_phase(bp: &BlochPath) -> Result<MixedPhaseResult> {
    let weight_variation = bp.weight_variation();
    if weight_variation > WEIGHT_TOLERANCE {
        return Err(Error::WeightVariation {
            variation: weight_variation,
            tolerance: WEIGHT_TOLERANCE,
        });
    }
    let (plus, minus) = prolong(bp)?;
    let omega_plus = solid_angle(&plus)?;
    let omega_minus = solid_angle(&minus)?;
    let (p_plus, p_minus) = bp.mean_weights();
    let weighted = |a: f64, b: f64| p_plus * (-0.5 * a) + p_minus * (-0.5 * b);
    Ok(MixedPhaseResult {
        omega_plus,
        omega_minus,
        p_plus,
        p_minus,
        gamma: snap_upper(wrap_pi(weighted(
            omega_plus.principal,
            omega_minus.principal,
        ))),
        gamma_unwrapped: weighted(omega_plus.unwrapped, omega_minus.unwrapped),
        weight_variation,
    })
}
