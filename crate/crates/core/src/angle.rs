//! Branch handling for angles.

use std::f64::consts::{PI, TAU};

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

/// Reduces an angle to `(-2 pi, 2 pi]`, the principal branch for solid angles.
pub fn wrap_2pi(x: f64) -> f64 {
    let r = (x + TAU).rem_euclid(2.0 * TAU) - TAU;
    if r <= -TAU {
        r + 2.0 * TAU
    } else {
        r
    }
}

/// Distance between two angles modulo `period`, in `[0, period / 2]`.
pub fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Distance modulo `2 pi`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    circular_distance(a, b, TAU)
}

/// Sorted-multiset distance between two phase lists, compared modulo `2 pi`.
///
/// Each list is reduced to `(-pi, pi]` and sorted; the cyclic shift that
/// best aligns them is used, so a pair straddling the branch cut still
/// matches.
pub fn multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "multisets of different size");
    let mut a: Vec<f64> = a.iter().map(|&x| wrap_pi(x)).collect();
    let mut b: Vec<f64> = b.iter().map(|&x| wrap_pi(x)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let n = a.len();
    (0..n.max(1))
        .map(|shift| {
            (0..n)
                .map(|i| phase_distance(a[i], b[(i + shift) % n]))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_branches() {
        assert_eq!(wrap_pi(PI), PI);
        assert_eq!(wrap_pi(-PI), PI);
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(-0.5) + 0.5).abs() < 1e-15);
        assert_eq!(wrap_2pi(TAU), TAU);
        assert_eq!(wrap_2pi(-TAU), TAU);
        assert!((wrap_2pi(3.0 * PI) + PI).abs() < 1e-15);
    }

    #[test]
    fn multiset_across_cut() {
        assert!(multiset_distance(&[PI - 1e-12, 0.3], &[0.3, -PI + 1e-12]) < 1e-11);
        assert!(multiset_distance(&[0.1, 0.2], &[0.1, 0.3]) > 0.09);
    }
}
