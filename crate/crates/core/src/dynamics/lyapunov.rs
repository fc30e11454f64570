//! Steady-state covariance from `A V + V Aᵀ + D = 0`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::stability::{check_stability, Stability};
use super::Mat8;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyCovariance {
    pub covariance: Mat8,
    pub stability: Stability,
    /// `‖A V + V Aᵀ + D‖ / ‖D‖`.
    pub residual: f64,
}

pub fn lyapunov_residual(a: &Mat8, d: &Mat8, v: &Mat8) -> f64 {
    (a * v + v * a.transpose() + d).norm() / d.norm().max(f64::MIN_POSITIVE)
}

/// Solves the Lyapunov equation in Kronecker form with one step of iterative
/// refinement. Unstable or marginal drifts are rejected.
pub fn steady_covariance(a: &Mat8, d: &Mat8) -> Result<SteadyCovariance> {
    let dyn_a = DMatrix::from_column_slice(8, 8, a.as_slice());
    let stability = check_stability(&dyn_a);
    if !stability.is_stable() {
        return Err(Error::Unstable {
            margin: stability.max_real_part,
        });
    }
    let eye = DMatrix::<f64>::identity(8, 8);
    let op = eye.kronecker(&dyn_a) + dyn_a.kronecker(&eye);
    let lu = op.clone().lu();
    let rhs = -DVector::from_column_slice(d.as_slice());
    let mut x = lu.solve(&rhs).ok_or(Error::Singular)?;
    let r = &rhs - &op * &x;
    x += lu.solve(&r).ok_or(Error::Singular)?;
    let v = Mat8::from_column_slice(x.as_slice());
    let covariance = 0.5 * (v + v.transpose());
    let residual = lyapunov_residual(a, d, &covariance);
    Ok(SteadyCovariance {
        covariance,
        stability,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::drift::{build_diffusion, build_drift, DiffusionModel};
    use crate::gaussian::is_physical;
    use crate::meanfield::steady_means;
    use crate::rates::{Drive, Mechanics, Optics, RateModel};

    fn model(fraction: f64) -> RateModel {
        let mech = Mechanics {
            frequency: 1.0,
            damping: 1e-6,
            recoil: 1.2e-6,
            occupancy: 188.9,
            thermal_ratio: 189.4,
        };
        let gl = 9.24e-5;
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
                cw: [fraction * 4757.0; 2],
                modulation: [0.0; 2],
                detuning: [1.0; 2],
                modulation_frequency: 0.0,
            },
        }
    }

    #[test]
    fn decoupled_thermal_state() {
        let m = model(0.0);
        let s = steady_means(&m).unwrap();
        let a = build_drift(&m, &s.working_point);
        let d = build_diffusion(&m, DiffusionModel::Exact);
        let v = steady_covariance(&a, &d).unwrap();
        assert!(v.residual < 1e-12);
        for k in 4..8 {
            assert!((v.covariance[(k, k)] - 0.5).abs() < 1e-12);
        }
        // ⟨x²⟩ + ⟨p²⟩ = (2n̄+1)(γ+Γ)/γ for damping on p only
        let nx = v.covariance[(0, 0)] + v.covariance[(1, 1)];
        let expected = (2.0 * 188.9 + 1.0) * 2.2e-6 / 1e-6;
        assert!((nx - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn strongly_driven_steady_state_is_physical() {
        let m = model(0.1);
        let s = steady_means(&m).unwrap();
        let a = build_drift(&m, &s.working_point);
        let d = build_diffusion(&m, DiffusionModel::Exact);
        let v = steady_covariance(&a, &d).unwrap();
        assert!(v.residual < 1e-10, "{}", v.residual);
        assert!(v.stability.consistent);
        assert!(is_physical(
            &nalgebra::DMatrix::from_column_slice(8, 8, v.covariance.as_slice()),
            1e-9
        ));
        // every mode, including the optical ones, is cooled well below n̄_th
        assert!(v.covariance[(0, 0)] < 1.0);
    }

    #[test]
    fn unstable_drift_is_rejected() {
        let mut a = Mat8::identity() * -1.0;
        a[(3, 3)] = 0.1;
        let d = Mat8::identity();
        assert!(matches!(
            steady_covariance(&a, &d),
            Err(Error::Unstable { .. })
        ));
    }
}
