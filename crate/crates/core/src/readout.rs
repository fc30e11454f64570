//! Two probe modes coupled quadratically to the objects read out the
//! collective mechanical quadratures.
//!
//! With probe detunings Δ± = ±Ω and κ ≫ 𝒢̃±, the outputs follow
//!
//! ```text
//! a₊_out = −i c₊ (x̄₁ b₁ + x̄₂ b₂) + a₊_in
//! a₋_out = −i c₋ (x̄₁ b₁† − x̄₂ b₂†) + a₋_in
//! ```
//!
//! where `c± = √2 𝒢̃±/κ` is the gain of an output mode integrated over a
//! detection window 1/κ. In quadratures, with `Q± = x̄₁x₁ ± x̄₂x₂` and
//! `P± = x̄₁p₁ ± x̄₂p₂`:
//!
//! ```text
//! X₊ = c₊P₊   Y₊ = −c₊Q₊   X₋ = −c₋P₋   Y₋ = −c₋Q₋
//! ```
//!
//! plus vacuum input noise, so `W = M V Mᵀ + ½I`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Mat4;

/// Minimum κ/𝒢̃ for the outputs to follow the mechanics adiabatically.
pub const ADIABATIC_RATIO: f64 = 10.0;
/// Singular values below this fraction of the largest are unidentifiable.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    /// Probe amplitude decay rate κ.
    pub linewidth: f64,
    /// Enhanced quadratic couplings `[𝒢̃₊, 𝒢̃₋]`.
    pub coupling: [f64; 2],
    /// Classical positions `[⟨x₁⟩, ⟨x₂⟩]` in zero-point units.
    pub position: [f64; 2],
    /// `[Δ₊, Δ₋]`.
    pub detuning: [f64; 2],
}

impl ProbeSpec {
    /// Probe on the mechanical sidebands, Δ± = ±Ω.
    pub fn sideband(linewidth: f64, coupling: [f64; 2], position: [f64; 2], omega: f64) -> Self {
        ProbeSpec {
            linewidth,
            coupling,
            position,
            detuning: [omega, -omega],
        }
    }

    pub fn validate(&self, omega: f64) -> Result<()> {
        if !(self.linewidth > 0.0) {
            return Err(Error::InvalidConfig(
                "probe linewidth must be positive".into(),
            ));
        }
        for g in self.coupling {
            let ratio = self.linewidth / g.abs();
            if !(ratio >= ADIABATIC_RATIO) {
                return Err(Error::NotAdiabatic(ratio));
            }
        }
        let expected = [omega, -omega];
        for (d, e) in self.detuning.iter().zip(expected) {
            if (d - e).abs() > 1e-9 * omega.abs() {
                return Err(Error::InvalidConfig(format!(
                    "probe detunings must be ±Ω = ±{omega}, got {d}"
                )));
            }
        }
        Ok(())
    }

    pub fn gain(&self) -> [f64; 2] {
        self.coupling
            .map(|g| std::f64::consts::SQRT_2 * g / self.linewidth)
    }

    /// Rows `(X₊, Y₊, X₋, Y₋)`, columns `(x₁, p₁, x₂, p₂)`.
    pub fn measurement_matrix(&self) -> Mat4 {
        let [cp, cm] = self.gain();
        let [x1, x2] = self.position;
        Mat4::new(
            0.0,
            cp * x1,
            0.0,
            cp * x2, //
            -cp * x1,
            0.0,
            -cp * x2,
            0.0, //
            0.0,
            -cm * x1,
            0.0,
            cm * x2, //
            -cm * x1,
            0.0,
            cm * x2,
            0.0,
        )
    }
}

/// Symmetrized covariance of `(X₊, Y₊, X₋, Y₋)`.
pub fn output_observables(v: &Mat4, probe: &ProbeSpec, omega: f64) -> Result<Mat4> {
    probe.validate(omega)?;
    let m = probe.measurement_matrix();
    Ok(m * v * m.transpose() + Mat4::identity() * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    pub covariance: Mat4,
    /// Ratio of extreme singular values of the moment map.
    pub condition_number: f64,
}

/// Upper-triangle index pairs of a symmetric 4×4 matrix.
const ENTRIES: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];
const NAMES: [&str; 4] = ["x1", "p1", "x2", "p2"];

/// Linear map from the ten independent mechanical moments to the sixteen
/// output moments (signal part).
fn moment_map(m: &Mat4) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(16, 10);
    for (col, &(k, l)) in ENTRIES.iter().enumerate() {
        for a in 0..4 {
            for b in 0..4 {
                let mut c = m[(a, k)] * m[(b, l)];
                if k != l {
                    c += m[(a, l)] * m[(b, k)];
                }
                out[(4 * a + b, col)] = c;
            }
        }
    }
    out
}

/// Least-squares inversion of the output moments back to the mechanical
/// covariance.
pub fn reconstruct_mech_cov(w: &Mat4, probe: &ProbeSpec, omega: f64) -> Result<Reconstruction> {
    probe.validate(omega)?;
    let map = moment_map(&probe.measurement_matrix());
    let svd = map.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > RANK_TOLERANCE * smax) {
        return Err(Error::Unidentifiable(unidentifiable(&svd, smax)));
    }
    let signal = w - Mat4::identity() * 0.5;
    let rhs = DVector::from_iterator(16, (0..16).map(|r| signal[(r / 4, r % 4)]));
    let sol = svd.solve(&rhs, 0.0).map_err(|_| Error::Singular)?;
    let mut v = Mat4::zeros();
    for (col, &(k, l)) in ENTRIES.iter().enumerate() {
        v[(k, l)] = sol[col];
        v[(l, k)] = sol[col];
    }
    Ok(Reconstruction {
        covariance: v,
        condition_number: smax / smin,
    })
}

fn unidentifiable(svd: &nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>, smax: f64) -> String {
    let vt = svd.v_t.as_ref().expect("computed with V");
    let mut names = Vec::new();
    for (s, row) in svd.singular_values.iter().zip(vt.row_iter()) {
        if *s <= RANK_TOLERANCE * smax {
            for (col, &(k, l)) in ENTRIES.iter().enumerate() {
                let name = format!("V[{},{}]", NAMES[k], NAMES[l]);
                if row[col].abs() > 1e-8 && !names.contains(&name) {
                    names.push(name);
                }
            }
        }
    }
    names.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{eta_min, symplectic_form};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn probe(x1: f64, x2: f64) -> ProbeSpec {
        ProbeSpec::sideband(1.0, [0.05, 0.07], [x1, x2], 1.0)
    }

    /// Output moments assembled from complex ladder moments
    /// ⟨b_j b_k⟩, ⟨b_j† b_k⟩ instead of the real-quadrature map.
    fn oracle(v: &Mat4, p: &ProbeSpec) -> Mat4 {
        let i = Complex64::i();
        let s2 = std::f64::consts::SQRT_2;
        // b_j = (x_j + i p_j)/√2 as a row over (x1, p1, x2, p2)
        let b = |j: usize| {
            let mut r = [Complex64::new(0.0, 0.0); 4];
            r[2 * j] = Complex64::new(1.0 / s2, 0.0);
            r[2 * j + 1] = i / s2;
            r
        };
        let conj = |r: [Complex64; 4]| r.map(|z| z.conj());
        let add = |a: [Complex64; 4], b: [Complex64; 4], f: Complex64, g: Complex64| {
            let mut r = [Complex64::new(0.0, 0.0); 4];
            for k in 0..4 {
                r[k] = f * a[k] + g * b[k];
            }
            r
        };
        let [cp, cm] = p.gain();
        let [x1, x2] = p.position;
        let one = Complex64::new(1.0, 0.0);
        // signal parts of a₊_out and a₋_out
        let ap = add(b(0), b(1), -i * cp * x1, -i * cp * x2);
        let am = add(
            conj(b(0)),
            conj(b(1)),
            -i * cm * x1 * one,
            i * cm * x2 * one,
        );
        // X = (a + a†)/√2, Y = (a − a†)/(i√2)
        let quad = |a: [Complex64; 4]| {
            let x = add(a, conj(a), one / s2, one / s2);
            let y = add(a, conj(a), one / (i * s2), -one / (i * s2));
            (x.map(|z| z.re), y.map(|z| z.re))
        };
        let (xp, yp) = quad(ap);
        let (xm, ym) = quad(am);
        let rows = [xp, yp, xm, ym];
        let mut w = Mat4::identity() * 0.5;
        for r in 0..4 {
            for c in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        w[(r, c)] += rows[r][k] * v[(k, l)] * rows[c][l];
                    }
                }
            }
        }
        w
    }

    fn two_mode_squeezed(r: f64) -> Mat4 {
        let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        Mat4::new(
            c, 0.0, s, 0.0, 0.0, c, 0.0, -s, s, 0.0, c, 0.0, 0.0, -s, 0.0, c,
        )
    }

    #[test]
    fn vacuum_without_coupling_is_vacuum() {
        let p = ProbeSpec::sideband(1.0, [1e-9, 1e-9], [1.0, 1.0], 1.0);
        let w = output_observables(&(Mat4::identity() * 0.5), &p, 1.0).unwrap();
        assert!((w - Mat4::identity() * 0.5).norm() < 1e-17);
    }

    #[test]
    fn matches_ladder_operator_oracle() {
        let p = probe(1.3, -0.7);
        let v = two_mode_squeezed(0.6);
        let w = output_observables(&v, &p, 1.0).unwrap();
        assert!((w - oracle(&v, &p)).norm() < 1e-14);
    }

    #[test]
    fn decoupled_second_object() {
        let p = probe(1.0, 0.0);
        let v = two_mode_squeezed(0.6);
        let m = p.measurement_matrix();
        assert!(m.column(2).norm() == 0.0 && m.column(3).norm() == 0.0);
        let w = output_observables(&v, &p, 1.0).unwrap();
        let local = Mat4::from_diagonal(&nalgebra::Vector4::new(v[(0, 0)], v[(1, 1)], 0.0, 0.0));
        assert!((w - oracle(&local, &p)).norm() < 1e-14);
    }

    #[test]
    fn vacuum_round_trip() {
        let p = probe(1.0, 1.0);
        let v = Mat4::identity() * 0.5;
        let w = output_observables(&v, &p, 1.0).unwrap();
        let r = reconstruct_mech_cov(&w, &p, 1.0).unwrap();
        assert!((r.covariance - v).norm() < 1e-12);
    }

    #[test]
    fn missing_position_is_unidentifiable() {
        let p = probe(0.0, 1.0);
        let w = Mat4::identity();
        match reconstruct_mech_cov(&w, &p, 1.0) {
            Err(Error::Unidentifiable(which)) => {
                assert!(which.contains("x1") && which.contains("p1"), "{which}");
                assert!(!which.contains("V[x2,x2]"), "{which}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn probe_validation() {
        let p = ProbeSpec::sideband(1.0, [0.2, 0.05], [1.0, 1.0], 1.0);
        assert!(matches!(p.validate(1.0), Err(Error::NotAdiabatic(_))));
        let p = ProbeSpec {
            detuning: [1.0, 1.0],
            ..probe(1.0, 1.0)
        };
        assert!(matches!(p.validate(1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn condition_grows_with_imbalance() {
        let mut last = 0.0;
        for ratio in [1.0, 1.5, 2.0, 4.0, 10.0] {
            let c = reconstruct_mech_cov(&Mat4::identity(), &probe(ratio, 1.0), 1.0)
                .unwrap()
                .condition_number;
            assert!(c > last, "{ratio}: {c} <= {last}");
            last = c;
        }
        let a = reconstruct_mech_cov(&Mat4::identity(), &probe(1.0, 3.0), 1.0)
            .unwrap()
            .condition_number;
        let b = reconstruct_mech_cov(&Mat4::identity(), &probe(3.0, 1.0), 1.0)
            .unwrap()
            .condition_number;
        assert!((a - b).abs() < 1e-9 * a);
    }

    proptest! {
        #[test]
        fn round_trip(h in prop::collection::vec(-0.5f64..0.5, 16), n1 in 0.0f64..5.0, n2 in 0.0f64..5.0,
                      x1 in 0.5f64..2.0, x2 in -2.0f64..-0.5) {
            let mut hm = Mat4::from_column_slice(&h);
            hm = 0.5 * (hm + hm.transpose());
            let sigma = Mat4::from_column_slice(symplectic_form(2).as_slice());
            let s = (sigma * hm).exp();
            let v = s * Mat4::from_diagonal(&nalgebra::Vector4::new(n1 + 0.5, n1 + 0.5, n2 + 0.5, n2 + 0.5)) * s.transpose();
            let p = probe(x1, x2);
            let w = output_observables(&v, &p, 1.0).unwrap();
            let r = reconstruct_mech_cov(&w, &p, 1.0).unwrap();
            prop_assert!((r.covariance - v).norm() < 1e-9 * v.norm());
            let (a, b) = (eta_min(&v).unwrap(), eta_min(&r.covariance).unwrap());
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
