//! Routh–Hurwitz stability of a real drift matrix, cross-checked against its
//! eigenvalues.

use nalgebra::DMatrix;
use serde::Serialize;

/// `|max Re λ| ≤ MARGINAL_TOLERANCE · ‖A‖` counts as marginal.
pub const MARGINAL_TOLERANCE: f64 = 1e-8;

/// Outcome of the Routh test in floating point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouthVerdict {
    Stable,
    Unstable,
    /// A first-column entry is smaller than its rounding-error bound, as
    /// happens for nearly undamped, nearly degenerate oscillators.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub routh: RouthVerdict,
    /// Largest real part of the spectrum.
    pub max_real_part: f64,
    /// Frobenius norm of the drift, the scale for `marginal`.
    pub norm: f64,
    pub marginal: bool,
    /// A decisive Routh verdict agrees with the eigenvalue sign (true when
    /// marginal or indeterminate).
    pub consistent: bool,
}

impl Stability {
    /// Routh verdict; the eigenvalue sign only when Routh is indeterminate.
    pub fn is_stable(&self) -> bool {
        !self.marginal
            && match self.routh {
                RouthVerdict::Stable => true,
                RouthVerdict::Unstable => false,
                RouthVerdict::Indeterminate => self.max_real_part < 0.0,
            }
    }
}

/// Characteristic polynomial `det(λI − A)`, ascending coefficients, monic.
/// Reduces to upper Hessenberg form and applies La Budde's recurrence.
pub fn characteristic_polynomial(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let h = a.clone().hessenberg().h();
    // p[k] is the characteristic polynomial of the leading k×k block
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    for i in 0..n {
        // (λ − h_ii) p_i
        let prev = &p[i];
        let mut next = vec![0.0; i + 2];
        for (d, c) in prev.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= h[(i, i)] * c;
        }
        let mut sub = 1.0;
        for m in 1..=i {
            sub *= h[(i - m + 1, i - m)];
            let coef = h[(i - m, i)] * sub;
            for (d, c) in p[i - m].iter().enumerate() {
                next[d] -= coef * c;
            }
        }
        p.push(next);
    }
    p.pop().unwrap()
}

/// Routh test on a polynomial given by ascending coefficients.
///
/// Each array entry carries a first-order rounding bound. Coefficients are
/// taken to be accurate to `4nε · C(n,k) · ρ^(n−k)`, with ρ the root-size
/// bound `max |c_k/c_n|^(1/(n−k))`, which is the accuracy of a characteristic
/// polynomial computed from a matrix of spectral scale ρ.
pub fn routh_hurwitz(ascending: &[f64]) -> RouthVerdict {
    let desc: Vec<f64> = ascending.iter().rev().copied().collect();
    let degree = match desc.len() {
        0 => return RouthVerdict::Indeterminate,
        n => n - 1,
    };
    if desc[0] == 0.0 {
        return RouthVerdict::Indeterminate;
    }
    let sign = desc[0].signum();
    let lead = desc[0].abs();
    let rho = (1..=degree)
        .map(|k| (desc[k].abs() / lead).powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    let mut binom = 1.0;
    let err: Vec<f64> = (0..=degree)
        .map(|k| {
            let e = 4.0 * (degree + 1) as f64 * f64::EPSILON * binom * lead * rho.powi(k as i32);
            binom = binom * (degree - k) as f64 / (k + 1) as f64;
            e
        })
        .collect();
    let width = degree / 2 + 1;
    let row = |offset: usize| {
        let mut r: Vec<(f64, f64)> = (offset..=degree)
            .step_by(2)
            .map(|k| (desc[k] * sign, err[k]))
            .collect();
        r.resize(width + 1, (0.0, 0.0));
        r
    };
    let (mut prev, mut cur) = (row(0), row(1));
    let mut indeterminate = false;
    for _ in 1..=degree {
        let (c0, e0) = cur[0];
        if c0.abs() <= e0 {
            indeterminate = true;
            break;
        }
        if c0 < 0.0 {
            return RouthVerdict::Unstable;
        }
        let (p0, ep0) = prev[0];
        let mut next = vec![(0.0, 0.0); width + 1];
        for j in 0..width {
            let (p1, ep1) = prev[j + 1];
            let (c1, ec1) = cur[j + 1];
            let value = p1 - p0 * c1 / c0;
            let rounding = f64::EPSILON * (p1.abs() + (p0 * c1 / c0).abs());
            let propagated =
                ep1 + (ep0 * c1.abs() + p0.abs() * ec1) / c0 + (p0 * c1 / c0).abs() * e0 / c0;
            next[j] = (value, rounding + propagated);
        }
        prev = std::mem::replace(&mut cur, next);
    }
    if indeterminate {
        RouthVerdict::Indeterminate
    } else {
        RouthVerdict::Stable
    }
}

pub fn max_real_part(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|l| l.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn check_stability(a: &DMatrix<f64>) -> Stability {
    let routh = routh_hurwitz(&characteristic_polynomial(a));
    let max_real_part = max_real_part(a);
    let norm = a.norm();
    let marginal = max_real_part.abs() <= MARGINAL_TOLERANCE * norm;
    let consistent = marginal
        || match routh {
            RouthVerdict::Stable => max_real_part < 0.0,
            RouthVerdict::Unstable => max_real_part >= 0.0,
            RouthVerdict::Indeterminate => true,
        };
    Stability {
        routh,
        max_real_part,
        norm,
        marginal,
        consistent,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
        let mut p = vec![1.0];
        for r in roots {
            let mut next = vec![0.0; p.len() + 1];
            for (d, c) in p.iter().enumerate() {
                next[d + 1] += c;
                next[d] -= r * c;
            }
            p = next;
        }
        p
    }

    #[test]
    fn polynomial_of_companion_and_triangular() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 0.0, 4.0, 5.0, 0.0, 0.0, 6.0]);
        let p = characteristic_polynomial(&a);
        let expected = poly_from_roots(&[1.0, 4.0, 6.0]);
        for (x, y) in p.iter().zip(&expected) {
            assert!((x - y).abs() < 1e-12);
        }
        let rot = DMatrix::from_row_slice(2, 2, &[-0.1, 1.0, -1.0, -0.1]);
        let p = characteristic_polynomial(&rot);
        assert!((p[0] - 1.01).abs() < 1e-14 && (p[1] - 0.2).abs() < 1e-14 && p[2] == 1.0);
    }

    #[test]
    fn routh_known_cases() {
        use RouthVerdict::*;
        assert_eq!(
            routh_hurwitz(&poly_from_roots(&[-1.0, -2.0, -3.0, -0.5])),
            Stable
        );
        assert_eq!(
            routh_hurwitz(&poly_from_roots(&[-1.0, -2.0, 0.3])),
            Unstable
        );
        // s² + 1: undamped oscillator
        assert_ne!(routh_hurwitz(&[1.0, 0.0, 1.0]), Stable);
        // s³ + s² + 2s + 8 has a right half-plane pair
        assert_eq!(routh_hurwitz(&[8.0, 2.0, 1.0, 1.0]), Unstable);
        // s³ + 2s² + 3s + 1 is Hurwitz
        assert_eq!(routh_hurwitz(&[1.0, 3.0, 2.0, 1.0]), Stable);
        assert_eq!(routh_hurwitz(&[2.0, 1.0]), Stable);
        assert_eq!(routh_hurwitz(&[-2.0, 1.0]), Unstable);
    }

    #[test]
    fn nearly_undamped_pair_is_indeterminate() {
        // two identical oscillators with γ = 10⁻⁶: Hurwitz minors scale as γ⁴
        let g = 1e-6;
        let mut p = vec![1.0];
        for _ in 0..2 {
            let q = [1.0, g, 1.0];
            let mut next = vec![0.0; p.len() + 2];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in q.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            p = next;
        }
        assert_eq!(routh_hurwitz(&p), RouthVerdict::Indeterminate);
        // moderate damping stays decisive
        let p = poly_from_roots(&[-0.1, -0.1, -0.2, -0.2]);
        assert_eq!(routh_hurwitz(&p), RouthVerdict::Stable);
    }

    #[test]
    fn marginal_is_flagged() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let s = check_stability(&a);
        assert!(s.marginal && !s.is_stable() && s.consistent);
    }

    proptest! {
        #[test]
        fn routh_agrees_with_eigenvalues(entries in prop::collection::vec(-1.0f64..1.0, 64), shift in -1.5f64..0.5) {
            let mut a = DMatrix::from_vec(8, 8, entries);
            for k in 0..8 {
                a[(k, k)] += shift;
            }
            let s = check_stability(&a);
            prop_assume!(s.max_real_part.abs() > 1e-6);
            prop_assert!(s.consistent, "{:?}", s);
        }
    }
}
