//! The composite two-qubit system: spin 1 feels a field of strength `B`
//! along `n(theta, phi)`, spin 2 feels no field, and the two are coupled
//! with strength `g`:
//!
//! ```text
//! H(phi) = (B/2) n(theta, phi) . sigma1 (x) I  +  g C(kind)
//! ```
//!
//! Units: hbar = 1 and energies in units of `B` (default 1).

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    herm_eig, pauli_x, pauli_y, pauli_z, tensor_product, ComplexMatrix, StateVector, C64,
};

/// Two-spin coupling operator `C` in `H = ... + g C`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `sx sx - sy sy`
    #[default]
    XxMinusYy,
    /// `sx sx + sy sy + sz sz`
    Heisenberg,
    /// `sz sz`
    Ising,
    /// `sx sx + sy sy`
    Xy,
}

impl CouplingKind {
    pub const ALL: [CouplingKind; 4] = [
        CouplingKind::XxMinusYy,
        CouplingKind::Heisenberg,
        CouplingKind::Ising,
        CouplingKind::Xy,
    ];

    /// Diagonal exchange constants `(Jx, Jy, Jz)`.
    pub fn exchange(self) -> [f64; 3] {
        match self {
            CouplingKind::XxMinusYy => [1.0, -1.0, 0.0],
            CouplingKind::Heisenberg => [1.0, 1.0, 1.0],
            CouplingKind::Ising => [0.0, 0.0, 1.0],
            CouplingKind::Xy => [1.0, 1.0, 0.0],
        }
    }

    /// Spectral norm of `C`.
    pub fn operator_norm(self) -> f64 {
        match self {
            CouplingKind::XxMinusYy | CouplingKind::Xy => 2.0,
            CouplingKind::Heisenberg => 3.0,
            CouplingKind::Ising => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CouplingKind::XxMinusYy => "xx-minus-yy",
            CouplingKind::Heisenberg => "heisenberg",
            CouplingKind::Ising => "ising",
            CouplingKind::Xy => "xy",
        }
    }
}

impl fmt::Display for CouplingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CouplingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        CouplingKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown coupling kind '{s}' (expected xx-minus-yy, heisenberg, ising or xy)"
                )
            })
    }
}

/// Physical configuration of one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Polar angle of the field, radians in `[0, pi]`.
    pub theta: f64,
    /// Coupling strength, `>= 0`.
    pub g: f64,
    /// Field strength `B`, `> 0`.
    pub b_field: f64,
    /// Angular velocity of the field rotation, `> 0`.
    pub omega: f64,
    pub coupling: CouplingKind,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_2,
            g: 0.0,
            b_field: 1.0,
            omega: 1e-3,
            coupling: CouplingKind::XxMinusYy,
        }
    }
}

impl ModelParams {
    pub fn new(
        theta: f64,
        g: f64,
        b_field: f64,
        omega: f64,
        coupling: CouplingKind,
    ) -> Result<Self> {
        let p = Self {
            theta,
            g,
            b_field,
            omega,
            coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return bad("theta", self.theta, "must lie in [0, pi]");
        }
        if !self.g.is_finite() || self.g < 0.0 {
            return bad("g", self.g, "must be finite and >= 0");
        }
        if !self.b_field.is_finite() || self.b_field <= 0.0 {
            return bad("b", self.b_field, "must be finite and > 0");
        }
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return bad("omega", self.omega, "must be finite and > 0");
        }
        Ok(())
    }

    pub fn with_g(self, g: f64) -> Self {
        Self { g, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_omega(self, omega: f64) -> Self {
        Self { omega, ..self }
    }

    /// Upper bound on the spectral norm of `H(phi)`.
    pub fn hamiltonian_norm_bound(&self) -> f64 {
        0.5 * self.b_field + self.g * self.coupling.operator_norm()
    }
}

/// Unit vector `(sin t cos p, sin t sin p, cos t)`.
pub fn field_direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

fn pauli_vector() -> [ComplexMatrix; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// `n . sigma` for a real 3-vector.
pub fn bloch_operator(n: [f64; 3]) -> ComplexMatrix {
    let s = pauli_vector();
    let mut m = ComplexMatrix::zeros(2);
    for (a, sa) in s.iter().enumerate() {
        m = &m + &sa.scale_real(n[a]);
    }
    m
}

/// The 4x4 coupling operator `C(kind) = sum_a J_a sigma_a (x) sigma_a`.
pub fn coupling_operator(kind: CouplingKind) -> ComplexMatrix {
    let s = pauli_vector();
    let mut c = ComplexMatrix::zeros(4);
    for (a, j) in kind.exchange().into_iter().enumerate() {
        if j != 0.0 {
            c = &c + &tensor_product(&s[a], &s[a]).scale_real(j);
        }
    }
    c
}

pub fn hamiltonian(params: &ModelParams, phi: f64) -> ComplexMatrix {
    let field = bloch_operator(field_direction(params.theta, phi)).scale_real(0.5 * params.b_field);
    let h = tensor_product(&field, &ComplexMatrix::identity(2));
    if params.g == 0.0 {
        return h;
    }
    &h + &coupling_operator(params.coupling).scale_real(params.g)
}

/// Generator `G` of the loop symmetry `H(phi) = R(phi) H(0) R(phi)^dagger`
/// with `R(phi) = exp(-i phi G)`.
///
/// The field term rotates with `sz` of spin 1. For the `U(1)`-invariant
/// couplings spin 2 co-rotates, `G = (sz1 + sz2) / 2`. The
/// `sx sx - sy sy` coupling only conserves `sz1 - sz2`, so spin 2
/// counter-rotates: `G = (sz1 - sz2) / 2`.
pub fn rotation_generator(kind: CouplingKind) -> ComplexMatrix {
    let z1 = tensor_product(&pauli_z(), &ComplexMatrix::identity(2));
    let z2 = tensor_product(&ComplexMatrix::identity(2), &pauli_z());
    let sign = match kind {
        CouplingKind::XxMinusYy => -1.0,
        _ => 1.0,
    };
    (&z1 + &z2.scale_real(sign)).scale_real(0.5)
}

/// The spin-1 state `cos(theta/2) e^{-i phi} |up> + sin(theta/2) |down>`,
/// aligned with the field.
pub fn aligned_spin(theta: f64, phi: f64) -> StateVector {
    let (s, c) = (0.5 * theta).sin_cos();
    StateVector::from_raw(vec![C64::from_polar(c, -phi), C64::new(s, 0.0)])
}

/// `(|down> + sign e^{i phi} |up>) / sqrt 2`.
pub fn rotating_spin(phi: f64, sign: f64) -> StateVector {
    StateVector::from_raw(vec![
        C64::from_polar(sign * FRAC_1_SQRT_2, phi),
        C64::new(FRAC_1_SQRT_2, 0.0),
    ])
}

/// Which of the two zero-coupling bases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisLabel {
    /// Spin 2 in `(|down> +- e^{i phi}|up>)/sqrt 2`.
    ReplyBasis,
    /// Spin 2 in `|up>` or `|down>`.
    PrimedBasis,
}

impl BasisLabel {
    pub fn name(self) -> &'static str {
        match self {
            BasisLabel::ReplyBasis => "reply",
            BasisLabel::PrimedBasis => "primed",
        }
    }
}

impl FromStr for BasisLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reply" | "reply_basis" => Ok(BasisLabel::ReplyBasis),
            "primed" | "primed_basis" => Ok(BasisLabel::PrimedBasis),
            _ => Err(format!("unknown basis '{s}' (expected reply or primed)")),
        }
    }
}

/// Member `a` or `b` of a degenerate pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Member {
    A,
    B,
}

impl Member {
    pub fn name(self) -> &'static str {
        match self {
            Member::A => "a",
            Member::B => "b",
        }
    }
}

/// Two orthonormal product eigenvectors of the `+B/2` level at `g = 0`.
#[derive(Clone, Debug)]
pub struct DegeneratePair {
    pub psi_a: StateVector,
    pub psi_b: StateVector,
    pub label: BasisLabel,
}

impl DegeneratePair {
    pub fn member(&self, m: Member) -> &StateVector {
        match m {
            Member::A => &self.psi_a,
            Member::B => &self.psi_b,
        }
    }

    pub fn to_vec(&self) -> Vec<StateVector> {
        vec![self.psi_a.clone(), self.psi_b.clone()]
    }
}

/// The tensor factors `(spin 1, spin 2)` of a basis member.
pub fn basis_factors(
    label: BasisLabel,
    member: Member,
    theta: f64,
    phi: f64,
) -> (StateVector, StateVector) {
    let first = aligned_spin(theta, phi);
    let second = match (label, member) {
        (BasisLabel::ReplyBasis, Member::A) => rotating_spin(phi, 1.0),
        (BasisLabel::ReplyBasis, Member::B) => rotating_spin(phi, -1.0),
        (BasisLabel::PrimedBasis, Member::A) => StateVector::up(),
        (BasisLabel::PrimedBasis, Member::B) => StateVector::down(),
    };
    (first, second)
}

fn pair(label: BasisLabel, theta: f64, phi: f64) -> DegeneratePair {
    let build = |m| {
        let (a, b) = basis_factors(label, m, theta, phi);
        a.kron(&b)
    };
    DegeneratePair {
        psi_a: build(Member::A),
        psi_b: build(Member::B),
        label,
    }
}

/// `|Psi_{a,b}> = (cos(theta/2) e^{-i phi}|up> + sin(theta/2)|down>) (x) (|down> +- e^{i phi}|up>)/sqrt 2`.
pub fn degenerate_basis(theta: f64, phi: f64) -> DegeneratePair {
    pair(BasisLabel::ReplyBasis, theta, phi)
}

/// `|Psi'_{a,b}> = (cos(theta/2) e^{-i phi}|up> + sin(theta/2)|down>) (x) |up>, |down>`.
pub fn primed_basis(theta: f64, phi: f64) -> DegeneratePair {
    pair(BasisLabel::PrimedBasis, theta, phi)
}

pub fn basis(label: BasisLabel, theta: f64, phi: f64) -> DegeneratePair {
    pair(label, theta, phi)
}

/// First-order effective operator `M` on spin 2, `H_eff = g M`, obtained by
/// projecting `C` onto the spin-1 state aligned with the field:
/// `M = sum_a J_a n_a sigma_a`.
pub fn effective_coupling_operator(theta: f64, phi: f64, kind: CouplingKind) -> ComplexMatrix {
    let n = field_direction(theta, phi);
    let j = kind.exchange();
    bloch_operator([j[0] * n[0], j[1] * n[1], j[2] * n[2]])
}

/// Smallest distance from level `level` to any other eigenvalue of `H(phi)`.
pub fn spectral_gap(params: &ModelParams, phi: f64, level: usize) -> Result<f64> {
    let eig = herm_eig(&hamiltonian(params, phi))?;
    level_gap(&eig.eigenvalues, level)
}

pub(crate) fn level_gap(eigenvalues: &[f64], level: usize) -> Result<f64> {
    let e = *eigenvalues.get(level).ok_or(Error::LevelOutOfRange {
        level,
        dim: eigenvalues.len(),
    })?;
    Ok(eigenvalues
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != level)
        .map(|(_, x)| (x - e).abs())
        .fold(f64::INFINITY, f64::min))
}

/// Ascending-eigenvalue indices that the zero-coupling states `Psi_a` and
/// `Psi_b` connect to, resolved at `phi = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelMap {
    pub psi_a: usize,
    pub psi_b: usize,
    pub overlap_a: f64,
    pub overlap_b: f64,
    /// Coupling at which the map was resolved.
    pub g_ref: f64,
}

/// Resolves [`LevelMap`] with the run's own coupling, or `1e-3 B` when
/// `g = 0` (where the levels are degenerate and any labeling is a choice).
pub fn level_map(params: &ModelParams) -> Result<LevelMap> {
    let g_ref = if params.g > 0.0 {
        params.g
    } else {
        1e-3 * params.b_field
    };
    let eig = herm_eig(&hamiltonian(&params.with_g(g_ref), 0.0))?;
    let reply = degenerate_basis(params.theta, 0.0);
    let best = |psi: &StateVector| {
        eig.eigenvectors
            .iter()
            .map(|v| v.inner(psi).norm_sqr())
            .enumerate()
            .fold(
                (0, -1.0),
                |acc, (i, o)| if o > acc.1 { (i, o) } else { acc },
            )
    };
    let (psi_a, overlap_a) = best(&reply.psi_a);
    let (psi_b, overlap_b) = best(&reply.psi_b);
    Ok(LevelMap {
        psi_a,
        psi_b,
        overlap_a,
        overlap_b,
        g_ref,
    })
}

/// Orthogonal projector onto the span of the given vectors (assumed orthonormal).
pub fn span_projector(vectors: &[StateVector]) -> ComplexMatrix {
    let n = vectors[0].dim();
    vectors
        .iter()
        .fold(ComplexMatrix::zeros(n), |acc, v| &acc + &v.projector())
}
