//! Time-dependent covariance integration, `dV/dt = A(t) V + V A(t)ᵀ + D`.

use std::collections::VecDeque;

use serde::Serialize;

use super::drift::build_drift;
use super::Mat8;
use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::meanfield::{quasi_static, MeanFieldStepper, SteadyMeans, WorkingPoint};
use crate::rates::RateModel;

/// `‖V‖ > BLOW_UP_FACTOR · ‖V₀‖` aborts an evolution.
pub const BLOW_UP_FACTOR: f64 = 1e6;

/// Source of the drift matrix along a run. Queries arrive in non-decreasing
/// time order up to the current RK4 stage.
pub trait DriftSchedule {
    fn working_point(&mut self, t: f64) -> WorkingPoint;
    fn drift(&mut self, t: f64) -> Mat8;
}

/// Time-independent drift (CW drive).
#[derive(Debug, Clone)]
pub struct ConstantDrift {
    pub drift: Mat8,
    pub working_point: WorkingPoint,
}

impl ConstantDrift {
    pub fn new(model: &RateModel, wp: WorkingPoint) -> Self {
        ConstantDrift {
            drift: build_drift(model, &wp),
            working_point: wp,
        }
    }
}

impl DriftSchedule for ConstantDrift {
    fn working_point(&mut self, t: f64) -> WorkingPoint {
        WorkingPoint {
            time: t,
            ..self.working_point
        }
    }

    fn drift(&mut self, _t: f64) -> Mat8 {
        self.drift
    }
}

/// Drift linearized about the mean-field trajectory, which is integrated
/// lazily on a grid of half the covariance step so that every RK4 stage
/// falls on a grid point.
#[derive(Debug, Clone)]
pub struct MeanFieldDrift {
    model: RateModel,
    stepper: MeanFieldStepper,
    grid: f64,
    recent: VecDeque<(u64, WorkingPoint)>,
}

impl MeanFieldDrift {
    /// `dt` is the covariance step; the means are stepped at `dt/2`.
    pub fn new(model: &RateModel, steady: &SteadyMeans, dt: f64) -> Self {
        let grid = 0.5 * dt;
        let stepper = MeanFieldStepper::new(
            *model,
            steady.bare_detuning,
            steady.working_point.state(),
            grid,
        );
        let mut recent = VecDeque::with_capacity(4);
        recent.push_back((0, stepper.working_point()));
        MeanFieldDrift {
            model: *model,
            stepper,
            grid,
            recent,
        }
    }
}

impl DriftSchedule for MeanFieldDrift {
    fn working_point(&mut self, t: f64) -> WorkingPoint {
        let k = (t / self.grid).round() as u64;
        while self.stepper.index() < k {
            self.stepper.advance();
            if self.recent.len() == 4 {
                self.recent.pop_front();
            }
            self.recent
                .push_back((self.stepper.index(), self.stepper.working_point()));
        }
        self.recent
            .iter()
            .find(|(i, _)| *i == k)
            .map(|(_, wp)| *wp)
            .expect("mean-field schedule queried out of order")
    }

    fn drift(&mut self, t: f64) -> Mat8 {
        let wp = self.working_point(t);
        build_drift(&self.model, &wp)
    }
}

/// Drift with positions and detunings frozen at the CW point and cavity
/// amplitudes following the drive.
#[derive(Debug, Clone)]
pub struct QuasiStaticDrift {
    model: RateModel,
    steady: SteadyMeans,
}

impl QuasiStaticDrift {
    pub fn new(model: &RateModel, steady: &SteadyMeans) -> Self {
        QuasiStaticDrift {
            model: *model,
            steady: *steady,
        }
    }
}

impl DriftSchedule for QuasiStaticDrift {
    fn working_point(&mut self, t: f64) -> WorkingPoint {
        quasi_static(&self.model, &self.steady, t)
    }

    fn drift(&mut self, t: f64) -> Mat8 {
        let wp = self.working_point(t);
        build_drift(&self.model, &wp)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub covariances: Vec<Mat8>,
}

impl Trajectory {
    pub fn last(&self) -> Option<(f64, &Mat8)> {
        self.times.last().copied().zip(self.covariances.last())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Advances `v` by one RK4 step.
pub fn covariance_step(
    schedule: &mut dyn DriftSchedule,
    diffusion: &Mat8,
    t: f64,
    v: &Mat8,
    dt: f64,
) -> Mat8 {
    let next = rk4_step(
        |s, m: &Mat8| {
            let a = schedule.drift(s);
            a * m + m * a.transpose() + diffusion
        },
        t,
        v,
        dt,
    );
    0.5 * (next + next.transpose())
}

/// Integrates `steps` steps of `dt` from `(t0, v0)`, recording the initial
/// state and every `sample_every`-th step.
pub fn evolve_covariance(
    schedule: &mut dyn DriftSchedule,
    diffusion: &Mat8,
    t0: f64,
    v0: &Mat8,
    dt: f64,
    steps: u64,
    sample_every: u64,
) -> Result<Trajectory> {
    let sample_every = sample_every.max(1);
    let limit = BLOW_UP_FACTOR * v0.norm().max(f64::MIN_POSITIVE);
    let mut out = Trajectory::default();
    out.times.push(t0);
    out.covariances.push(*v0);
    let mut v = *v0;
    for n in 0..steps {
        let t = t0 + n as f64 * dt;
        v = covariance_step(schedule, diffusion, t, &v, dt);
        let t_next = t0 + (n + 1) as f64 * dt;
        let norm = v.norm();
        if !norm.is_finite() || norm > limit {
            return Err(Error::BlowUp { time: t_next });
        }
        if (n + 1) % sample_every == 0 {
            out.times.push(t_next);
            out.covariances.push(v);
        }
    }
    Ok(out)
}
