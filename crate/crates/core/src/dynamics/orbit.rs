//! Periodic (quasi-steady) covariance orbits under modulated drives.

use serde::Serialize;

use super::evolve::{evolve_covariance, DriftSchedule, Trajectory};
use super::Mat8;
use crate::error::{Error, Result};

/// Period-to-period change below which the orbit counts as settled.
pub const ORBIT_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct Orbit {
    pub periods: usize,
    /// `‖V(t + T) − V(t)‖ / ‖V(t + T)‖` over the final period.
    pub change: f64,
    /// Samples over the final period, both ends included.
    pub samples: Trajectory,
}

/// Integrates whole periods of `steps_per_period` steps until the covariance
/// repeats to within `tolerance`. Unmodulated drives pass τ as the period.
#[allow(clippy::too_many_arguments)]
pub fn quasi_steady_orbit(
    schedule: &mut dyn DriftSchedule,
    diffusion: &Mat8,
    v0: &Mat8,
    period: f64,
    steps_per_period: u64,
    max_periods: usize,
    tolerance: f64,
) -> Result<Orbit> {
    let dt = period / steps_per_period as f64;
    let mut v = *v0;
    let mut change = f64::INFINITY;
    for n in 0..max_periods {
        let t0 = n as f64 * period;
        let samples = evolve_covariance(schedule, diffusion, t0, &v, dt, steps_per_period, 1)?;
        let end = *samples.last().expect("non-empty").1;
        change = (end - v).norm() / end.norm();
        v = end;
        if change < tolerance {
            return Ok(Orbit {
                periods: n + 1,
                change,
                samples,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_periods,
        residual: change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve::ConstantDrift;
    use crate::meanfield::WorkingPoint;
    use num_complex::Complex64;

    fn damped(rate: f64) -> ConstantDrift {
        let wp = WorkingPoint {
            time: 0.0,
            amplitude: [Complex64::new(0.0, 0.0); 2],
            position: [0.0; 2],
            momentum: [0.0; 2],
            detuning: [0.0; 2],
            coupling: [[Complex64::new(0.0, 0.0); 2]; 2],
            frequency: [1.0; 2],
        };
        ConstantDrift {
            drift: Mat8::identity() * -rate,
            working_point: wp,
        }
    }

    #[test]
    fn settles_on_fixed_point() {
        let mut s = damped(0.5);
        let d = Mat8::identity();
        let orbit =
            quasi_steady_orbit(&mut s, &d, &(Mat8::identity() * 0.1), 1.0, 100, 100, 1e-6).unwrap();
        assert!(orbit.change < 1e-6);
        assert_eq!(orbit.samples.len(), 101);
        assert!((orbit.samples.covariances[100][(0, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn reports_non_convergence() {
        let mut s = damped(1e-4);
        let d = Mat8::identity();
        let r = quasi_steady_orbit(&mut s, &d, &(Mat8::identity() * 0.1), 1.0, 10, 5, 1e-3);
        assert!(matches!(r, Err(Error::NotConverged { iterations: 5, .. })));
    }
}
