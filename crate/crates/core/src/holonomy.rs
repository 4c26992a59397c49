//! Non-Abelian connection over the degenerate `+B/2` level at `g = 0` and
//! its Wilson loop.
//!
//! Conventions: `A_xy = i <Psi_x| d/dphi |Psi_y>`, coefficients transport as
//! `dc/dphi = i A c`, and the loop is the ordered product
//! `U = exp(i A(phi_{N-1}) dphi) ... exp(i A(phi_0) dphi)` with later `phi`
//! on the left. Only the spectrum and trace of `U` survive a change of
//! basis; `U` itself transforms by conjugation with the basis change at the
//! base point.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::angle::wrap_pi;
use crate::error::{Error, Result};
use crate::linalg::{expm_i_hermitian, unitary_eigenvalues, ComplexMatrix, StateVector, C64, I};
use crate::model::{basis, BasisLabel};

/// A `phi`-dependent list of orthonormal vectors spanning the subspace.
pub type BasisFn = Arc<dyn Fn(f64) -> Vec<StateVector> + Send + Sync>;
/// A `phi`-dependent `k x k` unitary change of basis.
pub type GaugeFn = Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>;

const GRAM_TOL: f64 = 1e-8;
const GAUGE_TOL: f64 = 1e-10;
const GAUGE_CHECK_POINTS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    AnalyticReply,
    NumericFromBasis,
}

/// Matrix-valued connection `A(phi)` of rank `k`.
#[derive(Clone)]
pub struct Connection {
    rank: usize,
    provenance: Provenance,
    sampler: Arc<dyn Fn(f64) -> ComplexMatrix + Send + Sync>,
}

impl std::fmt::Debug for Connection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Connection")
            .field("rank", &self.rank)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl Connection {
    /// A `phi`-independent connection.
    pub fn constant(a: ComplexMatrix, provenance: Provenance) -> Result<Self> {
        let deviation = a.hermiticity_deviation();
        if deviation > 1e-14 {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            rank: a.dim(),
            provenance,
            sampler: Arc::new(move |_| a.clone()),
        })
    }

    /// Central-difference connection of a basis, checked orthonormal on a
    /// grid around the loop.
    pub fn from_basis(basis: BasisFn, step: f64) -> Result<Self> {
        check_step(step)?;
        let mut rank = 0;
        for k in 0..GAUGE_CHECK_POINTS {
            let vs = basis(TAU * k as f64 / GAUGE_CHECK_POINTS as f64);
            check_orthonormal(&vs)?;
            rank = vs.len();
        }
        Ok(Self {
            rank,
            provenance: Provenance::NumericFromBasis,
            sampler: Arc::new(move |phi| central_difference(basis.as_ref(), phi, step)),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn sample(&self, phi: f64) -> ComplexMatrix {
        (self.sampler)(phi)
    }
}

/// `A = [[c - 1/2, 1/2], [1/2, c - 1/2]]` with `c = cos^2(theta/2)`, the
/// closed form for the reply basis; constant in `phi`.
pub fn connection_analytic(theta: f64) -> Connection {
    Connection::constant(reply_connection_matrix(theta), Provenance::AnalyticReply)
        .expect("closed form is Hermitian")
}

pub fn reply_connection_matrix(theta: f64) -> ComplexMatrix {
    let d = (0.5 * theta).cos().powi(2) - 0.5;
    ComplexMatrix::from_real(2, &[d, 0.5, 0.5, d]).expect("2x2")
}

/// Closed form for the primed basis: only spin 1 winds, `A = cos^2(theta/2) I`.
pub fn primed_connection_matrix(theta: f64) -> ComplexMatrix {
    ComplexMatrix::identity(2).scale_real((0.5 * theta).cos().powi(2))
}

/// The zero-coupling basis of the given kind at fixed `theta`, as a function of `phi`.
pub fn basis_fn(label: BasisLabel, theta: f64) -> BasisFn {
    Arc::new(move |phi| basis(label, theta, phi).to_vec())
}

fn check_step(step: f64) -> Result<()> {
    if !(1e-6..=1e-2).contains(&step) {
        return Err(Error::StepOutOfRange { step });
    }
    Ok(())
}

fn check_orthonormal(vs: &[StateVector]) -> Result<()> {
    let mut deviation: f64 = 0.0;
    for (i, a) in vs.iter().enumerate() {
        for (j, b) in vs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            deviation = deviation.max((a.inner(b) - want).norm());
        }
    }
    if vs.is_empty() || deviation > GRAM_TOL {
        return Err(Error::NonOrthonormalBasis { deviation });
    }
    Ok(())
}

fn central_difference(
    basis: &(dyn Fn(f64) -> Vec<StateVector> + Send + Sync),
    phi: f64,
    h: f64,
) -> ComplexMatrix {
    let here = basis(phi);
    let plus = basis(phi + h);
    let minus = basis(phi - h);
    let k = here.len();
    let mut a = ComplexMatrix::zeros(k);
    for x in 0..k {
        for y in 0..k {
            let d: C64 = here[x]
                .amps()
                .iter()
                .zip(plus[y].amps().iter().zip(minus[y].amps()))
                .map(|(u, (p, m))| u.conj() * (p - m))
                .sum();
            a[(x, y)] = I * d / (2.0 * h);
        }
    }
    a.hermitian_part()
}

/// `A_xy = i <Psi_x(phi)| (Psi_y(phi + h) - Psi_y(phi - h)) / 2h>`, symmetrized
/// to its Hermitian part.
pub fn connection_numeric(
    basis: &(dyn Fn(f64) -> Vec<StateVector> + Send + Sync),
    phi: f64,
    step: f64,
) -> Result<ComplexMatrix> {
    check_step(step)?;
    check_orthonormal(&basis(phi))?;
    Ok(central_difference(basis, phi, step))
}

/// Loop transport `U` with its gauge invariants.
#[derive(Clone, Debug)]
pub struct Holonomy {
    pub u: ComplexMatrix,
    /// Arguments of the eigenvalues of `u` on `(-pi, pi]`, ascending.
    pub eigenphases: Vec<f64>,
    pub trace: C64,
    pub n_steps: usize,
}

impl Holonomy {
    pub fn from_unitary(u: ComplexMatrix, n_steps: usize) -> Result<Self> {
        let mut eigenphases: Vec<f64> = unitary_eigenvalues(&u)?
            .into_iter()
            .map(|z| wrap_pi(z.arg()))
            .collect();
        eigenphases.sort_by(f64::total_cmp);
        let trace = u.trace();
        Ok(Self {
            u,
            eigenphases,
            trace,
            n_steps,
        })
    }
}

/// Path-ordered exponential of `i A` around the loop in `n_steps` equal steps.
pub fn wilson_loop(conn: &Connection, n_steps: usize) -> Result<Holonomy> {
    if n_steps < 16 {
        return Err(Error::TooFewSteps(n_steps));
    }
    let dphi = TAU / n_steps as f64;
    let mut u = ComplexMatrix::identity(conn.rank());
    for k in 0..n_steps {
        let step = expm_i_hermitian(&conn.sample(dphi * k as f64), dphi)?;
        u = &step * &u;
    }
    Holonomy::from_unitary(u, n_steps)
}

/// The measurable part of a holonomy: sorted eigenphases and trace.
pub fn holonomy_invariants(h: &Holonomy) -> (Vec<f64>, C64) {
    (h.eigenphases.clone(), h.trace)
}

/// New basis `|Psi~_x> = sum_y omega_yx |Psi_y>`.
///
/// `omega` must be unitary at every `phi` and periodic; both are checked on
/// a grid of sample points.
pub fn gauge_transform(basis: BasisFn, omega: GaugeFn) -> Result<BasisFn> {
    for k in 0..=GAUGE_CHECK_POINTS {
        let phi = TAU * k as f64 / GAUGE_CHECK_POINTS as f64;
        let deviation = omega(phi).unitarity_deviation();
        if deviation > GAUGE_TOL {
            return Err(Error::NonUnitaryGauge { phi, deviation });
        }
    }
    let deviation = omega(TAU).max_abs_diff(&omega(0.0));
    if deviation > GAUGE_TOL {
        return Err(Error::NonPeriodicGauge { deviation });
    }
    Ok(Arc::new(move |phi| {
        let old = basis(phi);
        let w = omega(phi);
        let dim = old[0].dim();
        (0..old.len())
            .map(|x| {
                let mut amps = vec![C64::new(0.0, 0.0); dim];
                for (y, v) in old.iter().enumerate() {
                    let c = w[(y, x)];
                    for (a, b) in amps.iter_mut().zip(v.amps()) {
                        *a += c * b;
                    }
                }
                StateVector::from_raw(amps)
            })
            .collect()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{multiset_distance, phase_distance};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn single_spin_phase(theta: f64) -> f64 {
        TAU * (0.5 * theta).cos().powi(2)
    }

    #[test]
    fn analytic_examples() {
        let r = |x: f64| C64::new(x, 0.0);
        let a = connection_analytic(FRAC_PI_2).sample(0.3);
        assert!(
            a.max_abs_diff(&ComplexMatrix::from_real(2, &[0.0, 0.5, 0.5, 0.0]).unwrap()) < 1e-15
        );
        let a = connection_analytic(0.0).sample(0.0);
        assert!(a.max_abs_diff(&ComplexMatrix::from_vec(2, vec![r(0.5); 4]).unwrap()) < 1e-15);
        let a = connection_analytic(PI).sample(0.0);
        let want = ComplexMatrix::from_real(2, &[-0.5, 0.5, 0.5, -0.5]).unwrap();
        assert!(a.max_abs_diff(&want) < 1e-15);
        assert_eq!(
            connection_analytic(1.0).provenance(),
            Provenance::AnalyticReply
        );
    }

    #[test]
    fn numeric_matches_closed_forms() {
        let reply = basis_fn(BasisLabel::ReplyBasis, FRAC_PI_2);
        let a = connection_numeric(reply.as_ref(), 0.0, 1e-4).unwrap();
        assert!(a.max_abs_diff(&reply_connection_matrix(FRAC_PI_2)) <= 1e-7);
        let primed = basis_fn(BasisLabel::PrimedBasis, FRAC_PI_2);
        let a = connection_numeric(primed.as_ref(), 0.0, 1e-4).unwrap();
        let want = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(a.max_abs_diff(&want) <= 1e-7);
    }

    #[test]
    fn numeric_connection_is_phi_independent() {
        for label in [BasisLabel::ReplyBasis, BasisLabel::PrimedBasis] {
            let b = basis_fn(label, 1.1);
            let samples: Vec<ComplexMatrix> = (0..7)
                .map(|k| connection_numeric(b.as_ref(), k as f64, 1e-4).unwrap())
                .collect();
            for x in &samples {
                for y in &samples {
                    assert!(x.max_abs_diff(y) <= 1e-7);
                }
            }
        }
    }

    #[test]
    fn numeric_error_is_second_order_in_step() {
        for theta in [0.3, 1.7, 2.9] {
            let b = basis_fn(BasisLabel::ReplyBasis, theta);
            for h in [1e-2, 1e-3, 1e-4] {
                let a = connection_numeric(b.as_ref(), 0.8, h).unwrap();
                assert!(a.max_abs_diff(&reply_connection_matrix(theta)) <= 10.0 * h * h);
            }
        }
    }

    #[test]
    fn numeric_rejects_bad_input() {
        let b = basis_fn(BasisLabel::ReplyBasis, 1.0);
        assert!(matches!(
            connection_numeric(b.as_ref(), 0.0, 1e-1),
            Err(Error::StepOutOfRange { .. })
        ));
        assert!(matches!(
            connection_numeric(b.as_ref(), 0.0, 1e-8),
            Err(Error::StepOutOfRange { .. })
        ));
        let dup: BasisFn = Arc::new(|phi| {
            let v = basis(BasisLabel::ReplyBasis, 1.0, phi).psi_a;
            vec![v.clone(), v]
        });
        assert!(matches!(
            connection_numeric(dup.as_ref(), 0.0, 1e-4),
            Err(Error::NonOrthonormalBasis { .. })
        ));
        assert!(Connection::from_basis(dup, 1e-4).is_err());
    }

    #[test]
    fn wilson_loop_examples() {
        let h = wilson_loop(&connection_analytic(FRAC_PI_2), 1024).unwrap();
        assert!(h.u.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-12);
        assert!((h.trace + 2.0).norm() < 1e-12);
        for p in &h.eigenphases {
            assert!(phase_distance(*p, PI) < 1e-12);
        }

        let zero =
            Connection::constant(ComplexMatrix::zeros(2), Provenance::AnalyticReply).unwrap();
        let h = wilson_loop(&zero, 16).unwrap();
        assert_eq!(h.u, ComplexMatrix::identity(2));

        for theta in [0.2, 1.0, 2.0, 3.1] {
            let h = wilson_loop(&connection_analytic(theta), 64).unwrap();
            for p in &h.eigenphases {
                assert!(phase_distance(*p, single_spin_phase(theta)) < 1e-10);
            }
        }
        assert!(matches!(
            wilson_loop(&zero, 15),
            Err(Error::TooFewSteps(15))
        ));
    }

    #[test]
    fn constant_connection_closed_form() {
        for theta in [0.0, 0.7, 2.4] {
            let a = reply_connection_matrix(theta);
            let exact = expm_i_hermitian(&a, TAU).unwrap();
            let h = wilson_loop(&connection_analytic(theta), 1024).unwrap();
            assert!((&h.u - &exact).frobenius_norm() <= 1e-8);
            assert!(h.u.unitarity_deviation() <= 1e-9);
        }
    }

    #[test]
    fn invariants_examples() {
        let h = Holonomy::from_unitary(ComplexMatrix::identity(2).scale_real(-1.0), 0).unwrap();
        let (phases, trace) = holonomy_invariants(&h);
        assert_eq!(phases, vec![PI, PI]);
        assert_eq!(trace, C64::new(-2.0, 0.0));

        for theta in [0.4, 1.3, 2.6] {
            let h = wilson_loop(&connection_analytic(theta), 256).unwrap();
            let want = C64::from_polar(2.0, single_spin_phase(theta));
            assert!((h.trace - want).norm() < 1e-10);
        }
    }

    #[test]
    fn reply_and_primed_invariants_agree() {
        for theta in [0.3, FRAC_PI_2, 2.5] {
            let a = Connection::from_basis(basis_fn(BasisLabel::ReplyBasis, theta), 1e-5).unwrap();
            let b = Connection::from_basis(basis_fn(BasisLabel::PrimedBasis, theta), 1e-5).unwrap();
            let ha = wilson_loop(&a, 256).unwrap();
            let hb = wilson_loop(&b, 256).unwrap();
            assert!(multiset_distance(&ha.eigenphases, &hb.eigenphases) <= 1e-8);
            assert!((ha.trace - hb.trace).norm() <= 1e-8);
        }
    }

    fn su2(alpha: f64, beta: f64, gamma: f64) -> ComplexMatrix {
        let (s, c) = alpha.sin_cos();
        ComplexMatrix::from_vec(
            2,
            vec![
                C64::from_polar(c, beta),
                C64::from_polar(s, gamma),
                -C64::from_polar(s, -gamma),
                C64::from_polar(c, -beta),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_gauge_leaves_basis_unchanged() {
        let b = basis_fn(BasisLabel::ReplyBasis, 0.9);
        let same = gauge_transform(b.clone(), Arc::new(|_| ComplexMatrix::identity(2))).unwrap();
        for phi in [0.0, 2.0, 4.0] {
            for (x, y) in b(phi).iter().zip(same(phi)) {
                assert_eq!(x, &y);
            }
        }
    }

    #[test]
    fn constant_gauge_conjugates_the_loop() {
        let theta = 0.9;
        let v = su2(0.4, 0.3, -1.2);
        let vv = v.clone();
        let b = basis_fn(BasisLabel::ReplyBasis, theta);
        let mixed = gauge_transform(b.clone(), Arc::new(move |_| vv.clone())).unwrap();
        let conn = Connection::from_basis(mixed, 1e-5).unwrap();
        // Connection entries change: A -> V^dagger A V.
        let a_new = conn.sample(0.0);
        let a_old = reply_connection_matrix(theta);
        let conj = &(&v.adjoint() * &a_old) * &v;
        assert!(a_new.max_abs_diff(&conj) < 1e-9);
        assert!(a_new.max_abs_diff(&a_old) > 0.1);

        let u_old = wilson_loop(&Connection::from_basis(b, 1e-5).unwrap(), 256).unwrap();
        let u_new = wilson_loop(&conn, 256).unwrap();
        let similar = &(&v.adjoint() * &u_old.u) * &v;
        assert!(u_new.u.max_abs_diff(&similar) < 1e-8);
        assert!(multiset_distance(&u_new.eigenphases, &u_old.eigenphases) < 1e-8);
    }

    #[test]
    fn winding_gauge() {
        // omega(phi) = diag(1, e^{i phi}) shifts A_bb by -1 and rotates the
        // off-diagonal entries. With omega(0) = I the loop matrix itself is
        // unchanged: U -> omega(2 pi)^dagger U omega(0) = U.
        let theta = 1.3;
        let b = basis_fn(BasisLabel::ReplyBasis, theta);
        let wind: GaugeFn = Arc::new(|phi| {
            ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, phi)])
        });
        let wound = gauge_transform(b.clone(), wind).unwrap();
        let conn = Connection::from_basis(wound, 1e-5).unwrap();
        let a = conn.sample(0.0);
        let a0 = reply_connection_matrix(theta);
        assert!((a[(1, 1)].re - (a0[(1, 1)].re - 1.0)).abs() < 1e-9);
        assert!(a.max_abs_diff(&conn.sample(1.0)) > 0.1);

        // Once A depends on phi the ordered product carries an O(dphi^2) error.
        let h_old = wilson_loop(&Connection::from_basis(b, 1e-5).unwrap(), 256).unwrap();
        let errs: Vec<f64> = [512, 1024, 2048]
            .into_iter()
            .map(|n| {
                let h_new = wilson_loop(&conn, n).unwrap();
                assert!(h_new.u.unitarity_deviation() < 1e-9);
                let phase_err = multiset_distance(&h_new.eigenphases, &h_old.eigenphases);
                phase_err.max(h_new.u.max_abs_diff(&h_old.u))
            })
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] > 3.5, "{errs:?}");
        }
        assert!(errs[2] < 2e-6);
    }

    #[test]
    fn gauge_validation() {
        let b = basis_fn(BasisLabel::ReplyBasis, 1.0);
        let not_unitary: GaugeFn = Arc::new(|_| ComplexMatrix::identity(2).scale_real(1.1));
        assert!(matches!(
            gauge_transform(b.clone(), not_unitary),
            Err(Error::NonUnitaryGauge { .. })
        ));
        let half_wind: GaugeFn = Arc::new(|phi| {
            ComplexMatrix::from_diagonal(&[C64::new(1.0, 0.0), C64::from_polar(1.0, 0.5 * phi)])
        });
        assert!(matches!(
            gauge_transform(b, half_wind),
            Err(Error::NonPeriodicGauge { .. })
        ));
    }
}
