//! Dense complex linear algebra for the 2- and 4-dimensional spaces of a
//! two-qubit system.
//!
//! Basis convention: `|up> = (1, 0)`, `|down> = (0, 1)`, and a composite
//! index is `2 * i1 + i2` with `i = 0` for up. Everything here is a pure
//! function of its inputs.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Hermiticity tolerance accepted by the decompositions.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Unit-norm tolerance for [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from `dim * dim` row-major entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M^dagger|` elementwise.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Frobenius distance of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        (&(&self.adjoint() * self) - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        assert_eq!(v.len(), n, "dimension mismatch");
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `<u| M |v>`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        u.iter().zip(self.apply(v)).map(|(a, b)| a.conj() * b).sum()
    }

    fn check_hermitian(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * self.frobenius_norm().max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim;
        assert_eq!(n, rhs.dim, "dimension mismatch");
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already unit norm (within [`NORM_TOL`]).
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if amps.is_empty() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    pub(crate) fn from_raw(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn up() -> Self {
        Self {
            amps: vec![ONE, ZERO],
        }
    }

    pub fn down() -> Self {
        Self {
            amps: vec![ZERO, ONE],
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amps(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn scaled(&self, z: C64) -> Self {
        Self {
            amps: self.amps.iter().map(|a| a * z).collect(),
        }
    }

    /// Multiplies by the global phase `exp(i alpha)`.
    pub fn with_phase(&self, alpha: f64) -> Self {
        self.scaled(C64::from_polar(1.0, alpha))
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    /// `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        m
    }

    pub fn expectation(&self, op: &ComplexMatrix) -> C64 {
        op.sandwich(&self.amps, &self.amps)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

impl HermEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(lambda)) V^dagger`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (lambda, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            let w = f(*lambda);
            let a = v.amps();
            for i in 0..n {
                let ai = a[i] * w;
                for j in 0..n {
                    out[(i, j)] += ai * a[j].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| C64::new(l, 0.0))
    }
}

/// Kronecker product, ordered (subsystem 1) x (subsystem 2).
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (m, n) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(m * n);
    for i1 in 0..m {
        for j1 in 0..m {
            let x = a[(i1, j1)];
            for i2 in 0..n {
                for j2 in 0..n {
                    out[(i1 * n + i2, j1 * n + j2)] = x * b[(i2, j2)];
                }
            }
        }
    }
    out
}

/// One of the two qubits of the composite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
}

impl Subsystem {
    pub fn id(self) -> u8 {
        match self {
            Subsystem::One => 1,
            Subsystem::Two => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(Subsystem::One),
            2 => Some(Subsystem::Two),
            _ => None,
        }
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id())
    }
}

/// Reduced density matrix of the kept qubit.
///
/// `rho` must be a valid two-qubit density matrix: Hermitian, unit trace
/// and positive semidefinite down to a `-1e-10` eigenvalue floor.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> Result<ComplexMatrix> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    validate_density(rho)?;
    Ok(partial_trace_unchecked(rho, keep))
}

pub(crate) fn partial_trace_unchecked(rho: &ComplexMatrix, keep: Subsystem) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            out[(i, j)] = (0..2)
                .map(|k| match keep {
                    Subsystem::One => rho[(2 * i + k, 2 * j + k)],
                    Subsystem::Two => rho[(2 * k + i, 2 * k + j)],
                })
                .sum();
        }
    }
    out
}

/// Checks Hermiticity, unit trace and positivity of a density matrix.
pub fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    let deviation = rho.hermiticity_deviation();
    if deviation > 1e-10 {
        return Err(Error::NotHermitian { deviation });
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(Error::BadTrace { trace: trace.re });
    }
    let eig = herm_eig(&rho.hermitian_part())?;
    let min_eigenvalue = eig.eigenvalues[0];
    if min_eigenvalue < -1e-10 {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Inside a degenerate cluster (gap below
/// [`DEGENERACY_GAP`]) vectors are ordered by the index of their first
/// nonzero amplitude, then by its magnitude descending. Every eigenvector
/// has its first nonzero amplitude real and positive.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermEig> {
    h.check_hermitian()?;
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= JACOBI_TOL * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut pairs: Vec<(f64, Vec<C64>)> = (0..n)
        .map(|j| {
            let mut col: Vec<C64> = (0..n).map(|i| v[(i, j)]).collect();
            fix_phase(&mut col);
            (a[(j, j)].re, col)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    order_clusters(&mut pairs);

    let (eigenvalues, eigenvectors) = pairs
        .into_iter()
        .map(|(l, col)| (l, StateVector::from_raw(col)))
        .unzip();
    Ok(HermEig {
        eigenvalues,
        eigenvectors,
    })
}

// Zeroes a[p][q] with G = S R, S = diag(1, e^{-i alpha}) making the pivot
// real and R a real Jacobi rotation.
fn jacobi_rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let n = a.dim();
    let b = a[(p, q)];
    let b_abs = b.norm();
    if b_abs < 1e-300 {
        return;
    }
    let phase = b / b_abs;
    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * b_abs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let pc = phase.conj();
    let g = [[C64::new(c, 0.0), C64::new(s, 0.0)], [pc * (-s), pc * c]];

    for k in 0..n {
        let (x, y) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = x * g[0][0] + y * g[1][0];
        a[(k, q)] = x * g[0][1] + y * g[1][1];
        let (x, y) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = x * g[0][0] + y * g[1][0];
        v[(k, q)] = x * g[0][1] + y * g[1][1];
    }
    for k in 0..n {
        let (x, y) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g[0][0].conj() * x + g[1][0].conj() * y;
        a[(q, k)] = g[0][1].conj() * x + g[1][1].conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

const AMPLITUDE_FLOOR: f64 = 1e-10;

fn first_nonzero(v: &[C64]) -> usize {
    v.iter()
        .position(|z| z.norm() > AMPLITUDE_FLOOR)
        .unwrap_or(0)
}

fn fix_phase(v: &mut [C64]) {
    let k = first_nonzero(v);
    let z = v[k];
    if z.norm() > 0.0 {
        let rot = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= rot;
        }
        v[k] = C64::new(v[k].re, 0.0);
    }
}

fn order_clusters(pairs: &mut [(f64, Vec<C64>)]) {
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|x, y| {
                let (ix, iy) = (first_nonzero(&x.1), first_nonzero(&y.1));
                ix.cmp(&iy)
                    .then_with(|| y.1[iy].norm().total_cmp(&x.1[ix].norm()))
            });
        }
        start = end;
    }
}

/// `exp(i s A)` for Hermitian `A`, via its spectral decomposition.
pub fn expm_i_hermitian(a: &ComplexMatrix, s: f64) -> Result<ComplexMatrix> {
    let eig = herm_eig(a)?;
    Ok(eig.reconstruct_with(|l| C64::from_polar(1.0, s * l)))
}

/// Eigenvalues of a unitary matrix, each normalized onto the unit circle.
///
/// The Hermitian and anti-Hermitian parts of a normal matrix commute, so one
/// Hermitian combination of them shares the eigenvectors of `U`; the
/// eigenvalues are then Rayleigh quotients. This stays accurate when `U` is
/// (nearly) a multiple of the identity, where the characteristic polynomial
/// loses half the digits.
pub fn unitary_eigenvalues(u: &ComplexMatrix) -> Result<Vec<C64>> {
    // Irrational mixing weight; degenerate only on a measure-zero set.
    const KAPPA: f64 = 0.618_033_988_749_894_8;
    let adj = u.adjoint();
    let re_part = (u + &adj).scale_real(0.5);
    let im_part = (u - &adj).scale(C64::new(0.0, -0.5));
    let mix = &re_part + &im_part.scale_real(KAPPA);
    let eig = herm_eig(&mix.hermitian_part())?;
    Ok(eig
        .eigenvectors
        .iter()
        .map(|v| {
            let z = v.expectation(u);
            z / z.norm()
        })
        .collect())
}
