use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::{
    amplitude_quadrature as xq, momentum as pm, phase_quadrature as yq, position as ps, Mat8,
};
use crate::meanfield::WorkingPoint;
use crate::rates::RateModel;

/// Drift matrix of the fluctuations about `wp`.
pub fn build_drift(model: &RateModel, wp: &WorkingPoint) -> Mat8 {
    let mut a = Mat8::zeros();
    for j in 0..2 {
        let m = &model.mechanics[j];
        a[(ps(j), pm(j))] = m.frequency;
        a[(pm(j), ps(j))] = -wp.frequency[j];
        a[(pm(j), pm(j))] = -m.damping;
    }
    for i in 0..2 {
        let (kappa, delta) = (model.optics[i].linewidth, wp.detuning[i]);
        a[(xq(i), xq(i))] = -kappa;
        a[(yq(i), yq(i))] = -kappa;
        a[(xq(i), yq(i))] = delta;
        a[(yq(i), xq(i))] = -delta;
        for j in 0..2 {
            let g = wp.coupling[i][j];
            a[(pm(j), xq(i))] = -SQRT_2 * g.re;
            a[(pm(j), yq(i))] = -SQRT_2 * g.im;
            a[(xq(i), ps(j))] = SQRT_2 * g.im;
            a[(yq(i), ps(j))] = -SQRT_2 * g.re;
        }
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionModel {
    /// `(2n̄ + 1)(γ + Γ)` on each momentum.
    #[default]
    Exact,
    /// `2 k_B T/ħΩ · (γ + Γ)`.
    HighTemperature,
}

pub fn build_diffusion(model: &RateModel, kind: DiffusionModel) -> Mat8 {
    let mut d = Mat8::zeros();
    for j in 0..2 {
        let m = &model.mechanics[j];
        let weight = match kind {
            DiffusionModel::Exact => 2.0 * m.occupancy + 1.0,
            DiffusionModel::HighTemperature => 2.0 * m.thermal_ratio,
        };
        d[(pm(j), pm(j))] = weight * (m.damping + m.recoil);
    }
    for i in 0..2 {
        let k = model.optics[i].linewidth;
        d[(xq(i), xq(i))] = k;
        d[(yq(i), yq(i))] = k;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::steady_means;
    use crate::rates::{Drive, Mechanics, Optics};
    use nalgebra::{Complex, DMatrix};

    pub(crate) fn model(fraction: f64) -> RateModel {
        let mech = Mechanics {
            frequency: 1.0,
            damping: 1e-6,
            recoil: 1.2e-6,
            occupancy: 188.9,
            thermal_ratio: 189.4,
        };
        let gl = 9.24e-5;
        let e0 = 4757.0;
        RateModel {
            mechanics: [mech; 2],
            optics: [
                Optics {
                    linewidth: 9.73e-3,
                    linear: [-gl, -gl],
                    quadratic: [0.0; 2],
                },
                Optics {
                    linewidth: 9.73e-3,
                    linear: [-gl, gl],
                    quadratic: [0.0; 2],
                },
            ],
            drive: Drive {
                cw: [fraction * e0; 2],
                modulation: [0.0; 2],
                detuning: [1.0; 2],
                modulation_frequency: 0.0,
            },
        }
    }

    /// Drift from a brute-force linearization of the mean-field equations.
    fn numerical_drift(model: &RateModel, bare: [f64; 2], wp: &WorkingPoint) -> Mat8 {
        use crate::meanfield::derivative;
        // state order of the mean-field vector → fluctuation order
        let to_u = [4usize, 5, 6, 7, 0, 1, 2, 3];
        let y0 = wp.state();
        let mut jac = Mat8::zeros();
        for c in 0..8 {
            let h = 1e-6 * y0[c].abs().max(1.0);
            let mut yp = y0;
            let mut ym = y0;
            yp[c] += h;
            ym[c] -= h;
            let col =
                (derivative(model, bare, 0.0, &yp) - derivative(model, bare, 0.0, &ym)) / (2.0 * h);
            for r in 0..8 {
                jac[(to_u[r], to_u[c])] = col[r];
            }
        }
        // (Re a, Im a) = (X, Y)/√2 is an orthogonal rescaling of the same block,
        // so the Jacobian is unchanged apart from the x ↔ a cross blocks.
        for i in 0..2 {
            for j in 0..2 {
                for q in [xq(i), yq(i)] {
                    jac[(q, ps(j))] *= SQRT_2;
                    jac[(q, pm(j))] *= SQRT_2;
                    jac[(ps(j), q)] /= SQRT_2;
                    jac[(pm(j), q)] /= SQRT_2;
                }
            }
        }
        jac
    }

    #[test]
    fn drift_is_the_mean_field_jacobian() {
        let mut m = model(0.1);
        m.optics[0].quadratic = [3e-9, -2e-9];
        m.optics[1].quadratic = [1e-9, 4e-9];
        let s = steady_means(&m).unwrap();
        let exact = build_drift(&m, &s.working_point);
        let numeric = numerical_drift(&m, s.bare_detuning, &s.working_point);
        let err = (exact - numeric).abs().max();
        assert!(err < 1e-7 * exact.abs().max(), "{err}\n{exact}\n{numeric}");
    }

    #[test]
    fn undriven_drift_is_block_diagonal() {
        let m = model(0.0);
        let s = steady_means(&m).unwrap();
        let a = build_drift(&m, &s.working_point);
        for r in 0..4 {
            for c in 4..8 {
                assert_eq!(a[(r, c)], 0.0);
                assert_eq!(a[(c, r)], 0.0);
            }
        }
        let eig = DMatrix::from_iterator(8, 8, a.iter().copied()).complex_eigenvalues();
        let mut found = 0;
        for l in eig.iter() {
            if (l - Complex::new(-9.73e-3, 1.0)).norm() < 1e-9
                || (l - Complex::new(-9.73e-3, -1.0)).norm() < 1e-9
            {
                found += 1;
            }
        }
        assert_eq!(found, 4);
    }

    #[test]
    fn diffusion_variants() {
        let m = model(0.1);
        let exact = build_diffusion(&m, DiffusionModel::Exact);
        let hot = build_diffusion(&m, DiffusionModel::HighTemperature);
        assert!((exact[(1, 1)] - (2.0 * 188.9 + 1.0) * 2.2e-6).abs() < 1e-15);
        assert!((hot[(3, 3)] - 2.0 * 189.4 * 2.2e-6).abs() < 1e-15);
        assert_eq!(exact[(4, 4)], 9.73e-3);
        assert_eq!(exact[(7, 7)], 9.73e-3);
        assert!((exact.trace() - exact[(1, 1)] - exact[(3, 3)] - 4.0 * 9.73e-3).abs() < 1e-15);
    }
}
