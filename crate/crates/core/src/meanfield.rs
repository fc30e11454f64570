//! Classical (coherent) amplitudes of the two control modes and the two
//! mechanical oscillators, and the working point they define.
//!
//! The mean-field equations are
//!
//! ```text
//! d⟨x_j⟩/dt = Ω_j ⟨p_j⟩
//! d⟨p_j⟩/dt = −Ω_j ⟨x_j⟩ − γ_j ⟨p_j⟩ − Σ_i |⟨a_i⟩|² (𝒢ˡ_ij + 2𝒢ᑫ_ij ⟨x_j⟩)
//! d⟨a_i⟩/dt = −(κ_i + iΔ_i) ⟨a_i⟩ + E_i(t),   Δ_i = δ_i + Σ_j (𝒢ˡ_ij ⟨x_j⟩ + 𝒢ᑫ_ij ⟨x_j⟩²)
//! ```
//!
//! The state vector packs `(Re a₁, Im a₁, Re a₂, Im a₂, x₁, p₁, x₂, p₂)`.

use nalgebra::SVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::rates::RateModel;

pub type MeanVector = SVector<f64, 8>;

pub const FIXED_POINT_DAMPING: f64 = 0.5;
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITERATIONS: usize = 10_000;
/// Relative change tolerated when the step is halved.
pub const STEP_HALVING_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkingPoint {
    pub time: f64,
    pub amplitude: [Complex64; 2],
    pub position: [f64; 2],
    pub momentum: [f64; 2],
    /// Effective detunings Δ_i.
    pub detuning: [f64; 2],
    /// Effective couplings `coupling[i][j] = G_ij`.
    pub coupling: [[Complex64; 2]; 2],
    /// Shifted frequencies Ω̃_j.
    pub frequency: [f64; 2],
}

pub fn pack(amplitude: [Complex64; 2], position: [f64; 2], momentum: [f64; 2]) -> MeanVector {
    MeanVector::from([
        amplitude[0].re,
        amplitude[0].im,
        amplitude[1].re,
        amplitude[1].im,
        position[0],
        momentum[0],
        position[1],
        momentum[1],
    ])
}

fn unpack(y: &MeanVector) -> ([Complex64; 2], [f64; 2], [f64; 2]) {
    (
        [Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3])],
        [y[4], y[6]],
        [y[5], y[7]],
    )
}

pub fn effective_detuning(model: &RateModel, bare: [f64; 2], x: [f64; 2]) -> [f64; 2] {
    [0, 1].map(|i| {
        let o = &model.optics[i];
        bare[i]
            + (0..2)
                .map(|j| o.linear[j] * x[j] + o.quadratic[j] * x[j] * x[j])
                .sum::<f64>()
    })
}

impl WorkingPoint {
    pub fn from_state(model: &RateModel, bare: [f64; 2], y: &MeanVector, time: f64) -> Self {
        let (a, x, p) = unpack(y);
        let detuning = effective_detuning(model, bare, x);
        let coupling = [0, 1].map(|i| {
            let o = &model.optics[i];
            [0, 1].map(|j| a[i] * (o.linear[j] + 2.0 * o.quadratic[j] * x[j]))
        });
        let frequency = [0, 1].map(|j| {
            model.mechanics[j].frequency
                + 2.0
                    * (0..2)
                        .map(|i| a[i].norm_sqr() * model.optics[i].quadratic[j])
                        .sum::<f64>()
        });
        WorkingPoint {
            time,
            amplitude: a,
            position: x,
            momentum: p,
            detuning,
            coupling,
            frequency,
        }
    }

    pub fn state(&self) -> MeanVector {
        pack(self.amplitude, self.position, self.momentum)
    }

    /// Largest |G_ij|.
    pub fn max_coupling(&self) -> f64 {
        self.coupling
            .iter()
            .flatten()
            .map(|g| g.norm())
            .fold(0.0, f64::max)
    }
}

/// Right-hand side of the mean-field equations at time `t`.
pub fn derivative(model: &RateModel, bare: [f64; 2], t: f64, y: &MeanVector) -> MeanVector {
    let (a, x, p) = unpack(y);
    let delta = effective_detuning(model, bare, x);
    let mut da = [Complex64::new(0.0, 0.0); 2];
    for i in 0..2 {
        let k = model.optics[i].linewidth;
        da[i] = -Complex64::new(k, delta[i]) * a[i] + model.drive.amplitude(i, t);
    }
    let mut dx = [0.0; 2];
    let mut dp = [0.0; 2];
    for j in 0..2 {
        let m = &model.mechanics[j];
        let force: f64 = (0..2)
            .map(|i| {
                let o = &model.optics[i];
                a[i].norm_sqr() * (o.linear[j] + 2.0 * o.quadratic[j] * x[j])
            })
            .sum();
        dx[j] = m.frequency * p[j];
        dp[j] = -m.frequency * x[j] - m.damping * p[j] - force;
    }
    pack(da, dx, dp)
}

/// Largest component of the mean-field residual relative to the size of the
/// terms that make it up.
pub fn relative_residual(model: &RateModel, bare: [f64; 2], t: f64, y: &MeanVector) -> f64 {
    let f = derivative(model, bare, t, y);
    let (a, x, p) = unpack(y);
    let delta = effective_detuning(model, bare, x);
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let k = model.optics[i].linewidth;
        let scale = (k.abs() + delta[i].abs()) * a[i].norm() + model.drive.amplitude(i, t).abs();
        let r = Complex64::new(f[2 * i], f[2 * i + 1]).norm();
        if r > 0.0 {
            worst = worst.max(r / scale.max(f64::MIN_POSITIVE));
        }
    }
    for j in 0..2 {
        let m = &model.mechanics[j];
        let force: f64 = (0..2)
            .map(|i| {
                (a[i].norm_sqr()
                    * (model.optics[i].linear[j] + 2.0 * model.optics[i].quadratic[j] * x[j]))
                    .abs()
            })
            .sum();
        let sx = (m.frequency * p[j]).abs();
        let sp = (m.frequency * x[j]).abs() + (m.damping * p[j]).abs() + force;
        for (r, s) in [(f[4 + 2 * j], sx), (f[5 + 2 * j], sp)] {
            if r != 0.0 {
                worst = worst.max(r.abs() / s.max(f64::MIN_POSITIVE));
            }
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyMeans {
    pub working_point: WorkingPoint,
    /// Bare laser detunings δ_i that realise the targeted effective Δ_i.
    pub bare_detuning: [f64; 2],
    pub residual: f64,
}

/// CW fixed point for the targeted effective detunings (modulation ignored).
///
/// With Δ_i prescribed the cavity amplitudes are explicit,
/// `⟨a_i⟩ = E_i/(κ_i + iΔ_i)`; the positions follow from the force balance
/// `Ω̃_j ⟨x_j⟩ = −Σ_i |⟨a_i⟩|² 𝒢ˡ_ij`, and δ_i is back-computed.
pub fn steady_means(model: &RateModel) -> Result<SteadyMeans> {
    let cw = model.with_drive(model.drive.cw_only());
    let a = [0, 1].map(|i| {
        Complex64::new(cw.drive.cw[i], 0.0)
            / Complex64::new(cw.optics[i].linewidth, cw.drive.detuning[i])
    });
    let x = [0, 1].map(|j| {
        let stiff = cw.mechanics[j].frequency
            + 2.0
                * (0..2)
                    .map(|i| a[i].norm_sqr() * cw.optics[i].quadratic[j])
                    .sum::<f64>();
        let push: f64 = (0..2)
            .map(|i| a[i].norm_sqr() * cw.optics[i].linear[j])
            .sum();
        -push / stiff
    });
    let shift = effective_detuning(&cw, [0.0; 2], x);
    let bare = [0, 1].map(|i| cw.drive.detuning[i] - shift[i]);
    let y = pack(a, x, [0.0; 2]);
    let residual = relative_residual(&cw, bare, 0.0, &y);
    if !(residual < FIXED_POINT_TOLERANCE) {
        return Err(Error::NotConverged {
            iterations: 0,
            residual,
        });
    }
    Ok(SteadyMeans {
        working_point: WorkingPoint::from_state(&cw, bare, &y, 0.0),
        bare_detuning: bare,
        residual,
    })
}

/// CW fixed point for given bare detunings, by damped iteration on the
/// positions. Returns the working point and the number of iterations used.
pub fn solve_fixed_point(model: &RateModel, bare: [f64; 2]) -> Result<(WorkingPoint, usize)> {
    let cw = model.with_drive(model.drive.cw_only());
    let amplitudes = |x: [f64; 2]| {
        let delta = effective_detuning(&cw, bare, x);
        [0, 1].map(|i| {
            Complex64::new(cw.drive.cw[i], 0.0) / Complex64::new(cw.optics[i].linewidth, delta[i])
        })
    };
    let update = |x: [f64; 2]| {
        let a = amplitudes(x);
        [0, 1].map(|j| {
            let push: f64 = (0..2)
                .map(|i| a[i].norm_sqr() * cw.optics[i].linear[j])
                .sum();
            let stiff = cw.mechanics[j].frequency
                + 2.0
                    * (0..2)
                        .map(|i| a[i].norm_sqr() * cw.optics[i].quadratic[j])
                        .sum::<f64>();
            -push / stiff
        })
    };
    let mut x = [0.0; 2];
    let mut change = f64::INFINITY;
    for it in 1..=FIXED_POINT_MAX_ITERATIONS {
        let target = update(x);
        let next =
            [0, 1].map(|j| (1.0 - FIXED_POINT_DAMPING) * x[j] + FIXED_POINT_DAMPING * target[j]);
        let scale = next
            .iter()
            .chain(target.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        change = (0..2).map(|j| (target[j] - x[j]).abs()).fold(0.0, f64::max)
            / scale.max(f64::MIN_POSITIVE);
        x = next;
        if scale == 0.0 || change < FIXED_POINT_TOLERANCE {
            // one undamped polish step
            x = update(x);
            let y = pack(amplitudes(x), x, [0.0; 2]);
            let residual = relative_residual(&cw, bare, 0.0, &y);
            if residual < FIXED_POINT_TOLERANCE {
                return Ok((WorkingPoint::from_state(&cw, bare, &y, 0.0), it));
            }
        }
    }
    Err(Error::NotConverged {
        iterations: FIXED_POINT_MAX_ITERATIONS,
        residual: change,
    })
}

/// Fixed-step RK4 integrator of the mean-field equations.
#[derive(Debug, Clone)]
pub struct MeanFieldStepper {
    model: RateModel,
    bare: [f64; 2],
    step: f64,
    index: u64,
    state: MeanVector,
}

impl MeanFieldStepper {
    pub fn new(model: RateModel, bare: [f64; 2], initial: MeanVector, step: f64) -> Self {
        MeanFieldStepper {
            model,
            bare,
            step,
            index: 0,
            state: initial,
        }
    }

    pub fn time(&self) -> f64 {
        self.index as f64 * self.step
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn state(&self) -> &MeanVector {
        &self.state
    }

    pub fn working_point(&self) -> WorkingPoint {
        WorkingPoint::from_state(&self.model, self.bare, &self.state, self.time())
    }

    pub fn advance(&mut self) {
        let (m, b) = (&self.model, self.bare);
        self.state = rk4_step(
            |t, y| derivative(m, b, t, y),
            self.time(),
            &self.state,
            self.step,
        );
        self.index += 1;
    }
}

fn run(model: &RateModel, bare: [f64; 2], initial: MeanVector, dt: f64, steps: u64) -> MeanVector {
    let mut s = MeanFieldStepper::new(*model, bare, initial, dt);
    for _ in 0..steps {
        s.advance();
    }
    s.state
}

/// Integrates over `steps` steps of `dt` and compares with the same span at
/// `dt/2`. Returns the relative change.
pub fn step_halving_change(
    model: &RateModel,
    bare: [f64; 2],
    initial: MeanVector,
    dt: f64,
    steps: u64,
) -> f64 {
    let coarse = run(model, bare, initial, dt, steps);
    let fine = run(model, bare, initial, 0.5 * dt, 2 * steps);
    (coarse - fine).norm() / fine.norm().max(initial.norm()).max(f64::MIN_POSITIVE)
}

/// Densely sampled mean-field trajectory from `initial` (usually the CW
/// fixed point) over `[0, t_end]`, emitting every `stride`-th step.
pub fn integrate_means(
    model: &RateModel,
    bare: [f64; 2],
    initial: &WorkingPoint,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<WorkingPoint>> {
    let steps = (t_end / dt).round() as u64;
    // check a window of at least one drive period (or one τ) at half step
    let period = if model.drive.modulation_frequency != 0.0 {
        2.0 * std::f64::consts::PI / model.drive.modulation_frequency.abs()
    } else {
        model.tau()
    };
    let check_steps = ((2.0 * period / dt).ceil() as u64).min(steps).max(1);
    let change = step_halving_change(model, bare, initial.state(), dt, check_steps);
    if !(change < STEP_HALVING_TOLERANCE) {
        return Err(Error::StepTooLarge {
            relative_change: change,
        });
    }
    let mut stepper = MeanFieldStepper::new(*model, bare, initial.state(), dt);
    let stride = stride.max(1) as u64;
    let mut out = Vec::with_capacity((steps / stride + 1) as usize);
    out.push(stepper.working_point());
    for _ in 0..steps {
        stepper.advance();
        if stepper.index().is_multiple_of(stride) {
            out.push(stepper.working_point());
        }
    }
    Ok(out)
}

/// Quasi-static working point: the cavity amplitudes follow the drive
/// instantaneously, `⟨a_i(t)⟩ = ⟨a_i⟩_CW · E_i(t)/E_i⁽⁰⁾`, while positions and
/// detunings stay at their CW values.
pub fn quasi_static(model: &RateModel, steady: &SteadyMeans, t: f64) -> WorkingPoint {
    let wp = &steady.working_point;
    let a = [0, 1].map(|i| {
        let cw = model.drive.cw[i];
        if cw == 0.0 {
            wp.amplitude[i]
        } else {
            wp.amplitude[i] * (model.drive.amplitude(i, t) / cw)
        }
    });
    let mut out = WorkingPoint::from_state(
        model,
        steady.bare_detuning,
        &pack(a, wp.position, wp.momentum),
        t,
    );
    out.detuning = wp.detuning;
    out
}
