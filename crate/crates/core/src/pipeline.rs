//! End-to-end runs on a scenario: steady state, modulated evolution, the
//! effective mechanical coupling, sweeps and probe readout.
//!
//! Everything runs in units where Ω₁ = 1; reports convert rates and times
//! back to SI.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    build_diffusion, build_drift,
    evolve::{covariance_step, BLOW_UP_FACTOR},
    steady_covariance, ConstantDrift, DiffusionModel, DriftSchedule, Mat8, MeanFieldDrift,
    QuasiStaticDrift, RouthVerdict,
};
use crate::effective::{
    effective_j, modulation_harmonics, reduced_two_mode_evolve, resonance_advisor, rwa_classify,
    Harmonics, JFormula, ProcessTag, ReducedModel,
};
use crate::error::{Error, Result};
use crate::gaussian::{
    analyze, mechanical_block, symplectic_spectrum, EntanglementReport, LogBase, Mat4,
};
use crate::integrate::max_step;
use crate::meanfield::{
    steady_means, step_halving_change, MeanFieldStepper, SteadyMeans, WorkingPoint,
    STEP_HALVING_TOLERANCE,
};
use crate::model::{derive, Amplitude, DerivedParams, Frequency, SystemConfig};
use crate::rates::RateModel;
use crate::readout::{output_observables, reconstruct_mech_cov, ProbeSpec};
use crate::scenario::{MeanFieldMode, Numerics, ProbeConfig, SweepSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct RunOptions {
    pub diffusion: DiffusionModel,
    pub jformula: JFormula,
    pub meanfield: MeanFieldMode,
    pub log_base: LogBase,
}

impl From<&Numerics> for RunOptions {
    fn from(n: &Numerics) -> Self {
        RunOptions {
            diffusion: n.diffusion,
            jformula: n.jformula,
            meanfield: n.meanfield,
            log_base: n.log_base,
        }
    }
}

/// A derived system in normalized units together with its CW fixed point.
#[derive(Debug, Clone)]
pub struct System {
    pub derived: DerivedParams,
    /// Ω₁ in rad/s, the internal unit of rate.
    pub unit: f64,
    pub model: RateModel,
    pub steady: SteadyMeans,
}

impl System {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        let derived = derive(config)?;
        let unit = derived.trap_frequency[0];
        let model = RateModel::from_derived(&derived).rescaled(unit);
        let steady = steady_means(&model)?;
        Ok(System {
            derived,
            unit,
            model,
            steady,
        })
    }

    pub fn linewidth(&self) -> [f64; 2] {
        [
            self.model.optics[0].linewidth,
            self.model.optics[1].linewidth,
        ]
    }

    /// Largest |G_ij|/κ_i at the CW point.
    pub fn coupling_ratio(&self) -> f64 {
        let wp = &self.steady.working_point;
        (0..2)
            .flat_map(|i| {
                wp.coupling[i]
                    .iter()
                    .map(move |g| g.norm() / self.model.optics[i].linewidth)
            })
            .fold(0.0, f64::max)
    }

    pub fn drift(&self) -> Mat8 {
        build_drift(&self.model, &self.steady.working_point)
    }

    pub fn diffusion(&self, kind: DiffusionModel) -> Mat8 {
        build_diffusion(&self.model, kind)
    }

    /// CW steady covariance (normalized units).
    pub fn steady_covariance(
        &self,
        kind: DiffusionModel,
    ) -> Result<crate::dynamics::SteadyCovariance> {
        steady_covariance(&self.drift(), &self.diffusion(kind))
    }
}

/// Smallest symplectic eigenvalue of the full covariance.
pub fn min_symplectic(v: &Mat8) -> Result<f64> {
    let nu = symplectic_spectrum(&DMatrix::from_column_slice(8, 8, v.as_slice()))?;
    Ok(nu[0])
}

fn rows(m: &Mat8) -> Vec<Vec<f64>> {
    (0..8)
        .map(|r| (0..8).map(|c| m[(r, c)]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyReport {
    pub stable: bool,
    /// −max Re λ(A), rad/s.
    pub stability_margin: f64,
    pub routh: RouthVerdict,
    pub routh_consistent: bool,
    pub eta_min: f64,
    pub log_negativity: f64,
    pub entangled: bool,
    pub nbar: [f64; 2],
    pub thermal_nbar: [f64; 2],
    pub lyapunov_residual: f64,
    pub min_symplectic_eigenvalue: f64,
    /// Bare laser detunings δ_i realising the requested Δ_i, rad/s.
    pub bare_detuning: [f64; 2],
    pub effective_detuning: [f64; 2],
    pub mean_position: [f64; 2],
    pub shifted_frequency: [f64; 2],
    pub max_coupling_over_linewidth: f64,
    pub trap_frequency: [f64; 2],
    pub warnings: Vec<String>,
    pub readout: Option<ReadoutReport>,
    /// 8×8 covariance in `(x₁, p₁, x₂, p₂, X₁, Y₁, X₂, Y₂)` order.
    pub covariance: Vec<Vec<f64>>,
}

pub fn run_steady(
    sys: &System,
    opts: &RunOptions,
    probe: Option<&ProbeConfig>,
) -> Result<SteadyReport> {
    let solved = sys.steady_covariance(opts.diffusion)?;
    let v = solved.covariance;
    let report = analyze(&mechanical_block(&v), opts.log_base)?;
    let wp = &sys.steady.working_point;
    let readout = probe
        .map(|p| run_readout(sys, p, &mechanical_block(&v), opts.log_base))
        .transpose()?;
    Ok(SteadyReport {
        stable: solved.stability.is_stable(),
        stability_margin: -solved.stability.max_real_part * sys.unit,
        routh: solved.stability.routh,
        routh_consistent: solved.stability.consistent,
        eta_min: report.eta_min,
        log_negativity: report.log_negativity,
        entangled: report.entangled(),
        nbar: report.occupation,
        thermal_nbar: sys.derived.thermal_occupancy,
        lyapunov_residual: solved.residual,
        min_symplectic_eigenvalue: min_symplectic(&v)?,
        bare_detuning: sys.steady.bare_detuning.map(|d| d * sys.unit),
        effective_detuning: wp.detuning.map(|d| d * sys.unit),
        mean_position: wp.position,
        shifted_frequency: wp.frequency.map(|w| w * sys.unit),
        max_coupling_over_linewidth: sys.coupling_ratio(),
        trap_frequency: sys.derived.trap_frequency,
        warnings: sys.derived.warnings.clone(),
        readout,
        covariance: rows(&v),
    })
}

/// Step size and run length for a modulated (or CW) evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepPlan {
    /// Drive period, or τ without modulation (normalized units).
    pub period: f64,
    pub steps_per_period: u64,
    pub dt: f64,
    pub periods: u64,
}

impl StepPlan {
    pub fn new(sys: &System, numerics: &Numerics) -> Self {
        let m = &sys.model;
        let wp = &sys.steady.working_point;
        let extra = [
            wp.frequency[0],
            wp.frequency[1],
            wp.detuning[0],
            wp.detuning[1],
        ];
        let dt_max = max_step(m.fastest_rate(&extra)) * numerics.dt_factor;
        let period = if m.drive.is_modulated() {
            2.0 * PI / m.drive.modulation_frequency.abs()
        } else {
            m.tau()
        };
        let steps_per_period = (period / dt_max).ceil() as u64;
        let periods = ((numerics.t_max_tau * m.tau()) / period).round().max(1.0) as u64;
        StepPlan {
            period,
            steps_per_period,
            dt: period / steps_per_period as f64,
            periods,
        }
    }

    pub fn total_steps(&self) -> u64 {
        self.periods * self.steps_per_period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub t_over_tau: f64,
    pub eta_min: f64,
    #[serde(rename = "E_N")]
    pub log_negativity: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

impl SeriesRow {
    fn new(t: f64, tau: f64, r: &EntanglementReport) -> Self {
        SeriesRow {
            t_over_tau: t / tau,
            eta_min: r.eta_min,
            log_negativity: r.log_negativity,
            nbar1: r.occupation[0],
            nbar2: r.occupation[1],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub converged: bool,
    /// `‖V(t_end) − V(t_end − T)‖ / ‖V(t_end)‖`.
    pub change: f64,
    pub min_eta: f64,
    pub max_log_negativity: f64,
    pub mean_nbar: [f64; 2],
    pub entangled: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveReport {
    pub modulated: bool,
    pub modulation_frequency: f64,
    pub tau: f64,
    pub dt: f64,
    pub steps: u64,
    pub initial: SeriesRow,
    pub orbit: OrbitSummary,
    pub min_symplectic_eigenvalue: f64,
    pub readout: Option<ReadoutReport>,
    pub series: Vec<SeriesRow>,
    /// Covariances over the final period, every step, both ends included.
    #[serde(skip)]
    pub orbit_samples: Vec<Mat8>,
    /// Mechanical blocks at the series rows.
    #[serde(skip)]
    pub series_blocks: Vec<Mat4>,
}

fn schedule_for(sys: &System, mode: MeanFieldMode, dt: f64) -> Box<dyn DriftSchedule> {
    if !sys.model.drive.is_modulated() {
        return Box::new(ConstantDrift::new(&sys.model, sys.steady.working_point));
    }
    match mode {
        MeanFieldMode::Ode => Box::new(MeanFieldDrift::new(&sys.model, &sys.steady, dt)),
        MeanFieldMode::Quasistatic => Box::new(QuasiStaticDrift::new(&sys.model, &sys.steady)),
    }
}

/// Evolves from the CW steady state under the full (modulated) drive.
pub fn run_evolve(
    sys: &System,
    numerics: &Numerics,
    sample_every_tau: f64,
    opts: &RunOptions,
    probe: Option<&ProbeConfig>,
) -> Result<EvolveReport> {
    let plan = StepPlan::new(sys, numerics);
    let tau = sys.model.tau();
    let d = sys.diffusion(opts.diffusion);
    let v0 = sys.steady_covariance(opts.diffusion)?.covariance;

    if sys.model.drive.is_modulated() && opts.meanfield == MeanFieldMode::Ode {
        let check = 2 * plan.steps_per_period;
        let change = step_halving_change(
            &sys.model,
            sys.steady.bare_detuning,
            sys.steady.working_point.state(),
            plan.dt * 0.5,
            check,
        );
        if !(change < STEP_HALVING_TOLERANCE) {
            return Err(Error::StepTooLarge {
                relative_change: change,
            });
        }
    }

    let mut schedule = schedule_for(sys, opts.meanfield, plan.dt);
    let stride = ((sample_every_tau * tau / plan.dt).round() as u64).max(1);
    let total = plan.total_steps();
    let orbit_start = total - plan.steps_per_period;
    let limit = BLOW_UP_FACTOR * v0.norm();

    let mut series = Vec::new();
    let mut blocks = Vec::new();
    let mut min_nu = min_symplectic(&v0)?;
    let first = mechanical_block(&v0);
    series.push(SeriesRow::new(0.0, tau, &analyze(&first, opts.log_base)?));
    blocks.push(first);

    let mut orbit = Vec::with_capacity(plan.steps_per_period as usize + 1);
    let mut v = v0;
    for n in 0..total {
        v = covariance_step(schedule.as_mut(), &d, n as f64 * plan.dt, &v, plan.dt);
        let k = n + 1;
        let t = k as f64 * plan.dt;
        let norm = v.norm();
        if !norm.is_finite() || norm > limit {
            return Err(Error::BlowUp { time: t / sys.unit });
        }
        if k >= orbit_start {
            orbit.push(v);
        }
        if k % stride == 0 || k == total {
            let block = mechanical_block(&v);
            series.push(SeriesRow::new(t, tau, &analyze(&block, opts.log_base)?));
            blocks.push(block);
            min_nu = min_nu.min(min_symplectic(&v)?);
        }
    }
    if orbit_start == 0 {
        orbit.insert(0, v0);
    }

    let mut orbit_eta = f64::INFINITY;
    let mut orbit_en: f64 = 0.0;
    let mut nbar_sum = [0.0; 2];
    let n = orbit.len() - 1;
    for (k, v) in orbit.iter().enumerate() {
        let r = analyze(&mechanical_block(v), opts.log_base)?;
        orbit_eta = orbit_eta.min(r.eta_min);
        orbit_en = orbit_en.max(r.log_negativity);
        if k < n {
            nbar_sum[0] += r.occupation[0];
            nbar_sum[1] += r.occupation[1];
        }
        min_nu = min_nu.min(min_symplectic(v)?);
    }
    let v_end = orbit[n];
    let change = (v_end - orbit[0]).norm() / v_end.norm();
    let initial = series[0];
    let readout = probe
        .map(|p| run_readout(sys, p, &mechanical_block(&v_end), opts.log_base))
        .transpose()?;
    Ok(EvolveReport {
        modulated: sys.model.drive.is_modulated(),
        modulation_frequency: sys.model.drive.modulation_frequency * sys.unit,
        tau: tau / sys.unit,
        dt: plan.dt / sys.unit,
        steps: plan.total_steps(),
        initial,
        orbit: OrbitSummary {
            converged: change < numerics.orbit_tolerance,
            change,
            min_eta: orbit_eta,
            max_log_negativity: orbit_en,
            mean_nbar: nbar_sum.map(|s| s / n as f64),
            entangled: orbit_eta < 0.5,
        },
        min_symplectic_eigenvalue: min_nu,
        readout,
        series,
        orbit_samples: orbit,
        series_blocks: blocks,
    })
}

/// Mean-field working points over one drive period of the asymptotic orbit,
/// both ends included.
pub fn periodic_means(
    sys: &System,
    steps_per_period: u64,
    max_periods: usize,
) -> Result<Vec<WorkingPoint>> {
    let m = &sys.model;
    let period = 2.0 * PI / m.drive.modulation_frequency.abs();
    let dt = period / steps_per_period as f64;
    let mut stepper = MeanFieldStepper::new(
        *m,
        sys.steady.bare_detuning,
        sys.steady.working_point.state(),
        dt,
    );
    let mut change = f64::INFINITY;
    for _ in 0..max_periods {
        let start = *stepper.state();
        for _ in 0..steps_per_period {
            stepper.advance();
        }
        change = (stepper.state() - start).norm() / stepper.state().norm();
        if change < 1e-10 {
            let mut out = vec![stepper.working_point()];
            for _ in 0..steps_per_period {
                stepper.advance();
                out.push(stepper.working_point());
            }
            return Ok(out);
        }
    }
    Err(Error::NotConverged {
        iterations: max_periods,
        residual: change,
    })
}

pub const MAX_MEAN_PERIODS: usize = 200_000;

/// Harmonics of J_jl (normalized units) for `j ≤ l`.
pub fn coupling_harmonics(
    sys: &System,
    numerics: &Numerics,
    formula: JFormula,
) -> Result<[[Harmonics; 2]; 2]> {
    let kappa = sys.linewidth();
    if !sys.model.drive.is_modulated() {
        let j = effective_j(&sys.steady.working_point, kappa, formula).j;
        return Ok([0, 1].map(|a| [0, 1].map(|b| Harmonics::constant(j[a][b]))));
    }
    let plan = StepPlan::new(sys, numerics);
    let wps = periodic_means(sys, plan.steps_per_period, MAX_MEAN_PERIODS)?;
    let times: Vec<f64> = wps.iter().map(|w| w.time).collect();
    let js: Vec<[[f64; 2]; 2]> = wps
        .iter()
        .map(|w| effective_j(w, kappa, formula).j)
        .collect();
    let mut out = [[Harmonics::default(); 2]; 2];
    for a in 0..2 {
        for b in a..2 {
            let values: Vec<f64> = js.iter().map(|j| j[a][b]).collect();
            out[a][b] =
                modulation_harmonics(&times, &values, sys.model.drive.modulation_frequency)?;
            out[b][a] = out[a][b];
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub j: usize,
    pub l: usize,
    /// rad/s.
    pub j0: f64,
    pub j1: f64,
    pub j2: f64,
    pub residual: f64,
    pub processes: Vec<ProcessTag>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EffectiveReport {
    pub formula: JFormula,
    /// J_jl at the CW point, rad/s.
    pub cw_coupling: [[f64; 2]; 2],
    pub pairs: Vec<PairReport>,
    pub sum_frequency: f64,
    pub half_frequency: f64,
    pub modulation_frequency: f64,
    pub max_coupling_over_linewidth: f64,
    pub weak_coupling: bool,
}

pub fn run_effective(
    sys: &System,
    numerics: &Numerics,
    opts: &RunOptions,
) -> Result<EffectiveReport> {
    let wp = &sys.steady.working_point;
    let cw = effective_j(wp, sys.linewidth(), opts.jformula);
    let h = coupling_harmonics(sys, numerics, opts.jformula)?;
    let adv = resonance_advisor(wp.frequency);
    let cutoff = ReducedModel::default_cutoff(wp.frequency);
    let wd = if sys.model.drive.is_modulated() {
        sys.model.drive.modulation_frequency
    } else {
        0.0
    };
    let u = sys.unit;
    let pairs = [(0, 0), (0, 1), (1, 1)]
        .iter()
        .map(|&(j, l)| {
            let mut processes = rwa_classify(j, l, wp.frequency, wd, cutoff);
            for p in &mut processes {
                p.detuning *= u;
            }
            let x = &h[j][l];
            PairReport {
                j: j + 1,
                l: l + 1,
                j0: x.amplitude(0) * x.constant.signum() * u,
                j1: x.amplitude(1) * u,
                j2: x.amplitude(2) * u,
                residual: x.residual,
                processes,
            }
        })
        .collect();
    Ok(EffectiveReport {
        formula: opts.jformula,
        cw_coupling: cw.j.map(|r| r.map(|v| v * u)),
        pairs,
        sum_frequency: adv.sum * u,
        half_frequency: adv.half * u,
        modulation_frequency: wd * u,
        max_coupling_over_linewidth: sys.coupling_ratio(),
        weak_coupling: !cw.strong_coupling,
    })
}

/// Reduced two-oscillator model of `sys` (normalized units).
pub fn reduced_model(sys: &System, numerics: &Numerics, opts: &RunOptions) -> Result<ReducedModel> {
    let coupling = coupling_harmonics(sys, numerics, opts.jformula)?;
    let wp = &sys.steady.working_point;
    let mech = &sys.model.mechanics;
    Ok(ReducedModel {
        coupling,
        frequency: wp.frequency,
        damping: [
            mech[0].damping + mech[0].recoil,
            mech[1].damping + mech[1].recoil,
        ],
        occupancy: [mech[0].occupancy, mech[1].occupancy],
        modulation_frequency: if sys.model.drive.is_modulated() {
            sys.model.drive.modulation_frequency
        } else {
            0.0
        },
        cutoff: ReducedModel::default_cutoff(wp.frequency),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelComparison {
    pub modulation_ratio: f64,
    pub max_coupling_over_linewidth: f64,
    pub full_min_eta: f64,
    pub reduced_min_eta: f64,
    pub full_converged: bool,
}

impl ModelComparison {
    pub fn agree(&self) -> bool {
        (self.full_min_eta < 0.5) == (self.reduced_min_eta < 0.5)
    }
}

/// Quasi-steady η_min of the full and the reduced model over the last drive
/// period of a run of `numerics.t_max_tau`.
pub fn compare_reduced(
    sys: &System,
    numerics: &Numerics,
    opts: &RunOptions,
) -> Result<ModelComparison> {
    let full = run_evolve(sys, numerics, numerics.t_max_tau, opts, None)?;
    let reduced = reduced_model(sys, numerics, opts)?;
    let plan = StepPlan::new(sys, numerics);
    let v0 = mechanical_block(&sys.steady_covariance(opts.diffusion)?.covariance);
    let traj = reduced_two_mode_evolve(&reduced, &v0, plan.dt, plan.total_steps(), 1)?;
    let tail = &traj.covariances[traj.covariances.len() - 1 - plan.steps_per_period as usize..];
    let mut reduced_min = f64::INFINITY;
    for v in tail {
        reduced_min = reduced_min.min(crate::gaussian::eta_min(v)?);
    }
    let m = &sys.model;
    Ok(ModelComparison {
        modulation_ratio: m.drive.modulation_frequency
            / (m.mechanics[0].frequency + m.mechanics[1].frequency),
        max_coupling_over_linewidth: sys.coupling_ratio(),
        full_min_eta: full.orbit.min_eta,
        reduced_min_eta: reduced_min,
        full_converged: full.orbit.converged,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReadoutReport {
    pub outputs: [[f64; 4]; 4],
    pub condition_number: f64,
    pub eta_min: f64,
    pub reconstructed_eta_min: f64,
    pub max_relative_error: f64,
}

/// Probe readout of a mechanical block, and its reconstruction.
pub fn run_readout(
    sys: &System,
    cfg: &ProbeConfig,
    v: &Mat4,
    base: LogBase,
) -> Result<ReadoutReport> {
    let probe = probe_spec(sys, cfg);
    let omega = sys.model.mechanics[0].frequency;
    let w = output_observables(v, &probe, omega)?;
    let rec = reconstruct_mech_cov(&w, &probe, omega)?;
    let truth = analyze(v, base)?;
    let back = analyze(&rec.covariance, base)?;
    Ok(ReadoutReport {
        outputs: [0, 1, 2, 3].map(|r| [0, 1, 2, 3].map(|c| w[(r, c)])),
        condition_number: rec.condition_number,
        eta_min: truth.eta_min,
        reconstructed_eta_min: back.eta_min,
        max_relative_error: (rec.covariance - v).abs().max() / v.abs().max(),
    })
}

pub fn probe_spec(sys: &System, cfg: &ProbeConfig) -> ProbeSpec {
    let u = sys.unit;
    let omega = sys.model.mechanics[0].frequency;
    ProbeSpec {
        linewidth: cfg.linewidth / u,
        coupling: cfg.coupling.map(|g| g / u),
        position: cfg.position.unwrap_or(sys.steady.working_point.position),
        detuning: cfg
            .detuning
            .map(|d| d.map(|x| x / u))
            .unwrap_or([omega, -omega]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub cw_fraction: Option<f64>,
    pub detuning_ratio: Option<f64>,
    pub modulation_ratio: Option<f64>,
    pub status: &'static str,
    pub stable: bool,
    pub eta_min: f64,
    #[serde(rename = "E_N")]
    pub log_negativity: f64,
    pub nbar1: f64,
    pub nbar2: f64,
}

pub fn status_of(e: &Error) -> &'static str {
    match e {
        Error::InvalidConfig(_) | Error::Parse(_) => "invalid",
        Error::Unstable { .. } | Error::BlowUp { .. } => "unstable",
        Error::NotConverged { .. } => "not-converged",
        _ => "error",
    }
}

fn sweep_point(
    base: &SystemConfig,
    point: (Option<f64>, Option<f64>, Option<f64>),
    numerics: &Numerics,
    opts: &RunOptions,
) -> SweepRow {
    let (cw, det, md) = point;
    let mut cfg = *base;
    for c in &mut cfg.drive.controls {
        if let Some(f) = cw {
            c.cw = Amplitude::TrapFraction(f);
        }
        if let Some(r) = det {
            c.detuning = Frequency::MechanicalRatio(r);
        }
    }
    if let Some(r) = md {
        cfg.drive.modulation_frequency = Frequency::SumRatio(r);
    }
    let nan = f64::NAN;
    let mut row = SweepRow {
        cw_fraction: cw,
        detuning_ratio: det,
        modulation_ratio: md,
        status: "ok",
        stable: false,
        eta_min: nan,
        log_negativity: nan,
        nbar1: nan,
        nbar2: nan,
    };
    let result = System::new(&cfg).and_then(|sys| {
        if md.is_some() {
            let r = run_evolve(&sys, numerics, numerics.t_max_tau, opts, None)?;
            if !r.orbit.converged {
                return Err(Error::NotConverged {
                    iterations: numerics.t_max_tau as usize,
                    residual: r.orbit.change,
                });
            }
            Ok((
                r.orbit.min_eta,
                r.orbit.max_log_negativity,
                r.orbit.mean_nbar,
            ))
        } else {
            let r = run_steady(&sys, opts, None)?;
            Ok((r.eta_min, r.log_negativity, r.nbar))
        }
    });
    match result {
        Ok((eta, en, nbar)) => {
            row.stable = true;
            row.eta_min = eta;
            row.log_negativity = en;
            row.nbar1 = nbar[0];
            row.nbar2 = nbar[1];
        }
        Err(e) => row.status = status_of(&e),
    }
    row
}

/// Cartesian product of the sweep axes, evaluated in parallel. Rows come
/// back in grid order with `cw_fraction` varying fastest.
pub fn run_sweep(
    base: &SystemConfig,
    sweep: &SweepSpec,
    numerics: &Numerics,
    opts: &RunOptions,
) -> Vec<SweepRow> {
    let axis = |g: &Option<crate::scenario::Grid>| -> Vec<Option<f64>> {
        g.as_ref()
            .map(|g| g.values().into_iter().map(Some).collect())
            .unwrap_or_else(|| vec![None])
    };
    let mut points = Vec::new();
    for md in axis(&sweep.modulation_ratio) {
        for det in axis(&sweep.detuning_ratio) {
            for cw in axis(&sweep.cw_fraction) {
                points.push((cw, det, md));
            }
        }
    }
    points
        .par_iter()
        .map(|p| sweep_point(base, *p, numerics, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Placement;
    use crate::scenario::{Grid, Scenario};
    use std::path::PathBuf;

    fn shipped(name: &str) -> Scenario {
        let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("../../scenarios")
            .join(format!("{name}.toml"));
        Scenario::load(&path).unwrap()
    }

    fn options() -> RunOptions {
        RunOptions::default()
    }

    /// Swaps the two objects, and the two control modes' quadratures with
    /// the given signs.
    fn swap(signs: [f64; 2]) -> Mat8 {
        let mut p = Mat8::zeros();
        for (a, b) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            p[(a, b)] = 1.0;
        }
        for k in 4..8 {
            p[(k, k)] = signs[(k - 4) / 2];
        }
        p
    }

    fn assert_swap_symmetric(sys: &System, p: &Mat8) {
        let a = sys.drift();
        let d = sys.diffusion(DiffusionModel::Exact);
        let v = sys
            .steady_covariance(DiffusionModel::Exact)
            .unwrap()
            .covariance;
        assert!((p * a * p.transpose() - a).norm() <= 1e-12 * a.norm());
        assert!((p * d * p.transpose() - d).norm() <= 1e-12 * d.norm());
        assert!((p * v * p.transpose() - v).norm() <= 1e-9 * v.norm());
    }

    #[test]
    fn label_swap_symmetry() {
        // reference placement: mode 2 couples to x₂ with opposite sign
        let s = shipped("fig1_cw");
        let sys = System::new(&s.system()).unwrap();
        assert_swap_symmetric(&sys, &swap([1.0, -1.0]));

        let mut cfg = s.system();
        cfg.cavity.placement = Placement::Phases([[0.6, 0.6], [0.9, 0.9]]);
        let sys = System::new(&cfg).unwrap();
        assert!(sys.derived.quadratic_coupling[0][0] != 0.0);
        assert_swap_symmetric(&sys, &swap([1.0, 1.0]));
    }

    #[test]
    fn step_plan_fits_whole_periods() {
        let s = shipped("fig2_sum");
        let sys = System::new(&s.system()).unwrap();
        let plan = StepPlan::new(&sys, &s.numerics);
        assert!((plan.dt * plan.steps_per_period as f64 - plan.period).abs() < 1e-12 * plan.period);
        assert!(plan.dt <= max_step(sys.model.fastest_rate(&[])) * (1.0 + 1e-12));
        assert_eq!(plan.periods, 800);
    }

    #[test]
    fn unmodulated_series_is_flat() {
        let mut s = shipped("fig1_cw");
        s.numerics.t_max_tau = 20.0;
        let sys = System::new(&s.system()).unwrap();
        let steady = run_steady(&sys, &options(), None).unwrap();
        let r = run_evolve(&sys, &s.numerics, 1.0, &options(), None).unwrap();
        assert_eq!(r.series.len(), 21);
        for row in &r.series {
            assert!((row.eta_min - steady.eta_min).abs() < 1e-9);
        }
        assert!(r.orbit.converged);
    }

    #[test]
    fn off_resonant_modulation_stays_separable() {
        let mut s = shipped("fig2_sum");
        s.drive.modulation_frequency = Frequency::SumRatio(0.37);
        let sys = System::new(&s.system()).unwrap();
        let r = run_evolve(&sys, &s.numerics, 1.0, &options(), None).unwrap();
        assert!(r.orbit.converged);
        assert!(r.orbit.min_eta >= 0.5, "{}", r.orbit.min_eta);
    }

    #[test]
    fn zero_drive_is_thermal() {
        let mut s = shipped("fig1_cw");
        for c in &mut s.drive.controls {
            c.cw = Amplitude::TrapFraction(0.0);
        }
        let sys = System::new(&s.system()).unwrap();
        let r = run_steady(&sys, &options(), None).unwrap();
        let d = &sys.derived;
        // the trap field still heats through recoil; nothing cools
        let heated = (d.thermal_occupancy[0] + 0.5) * (d.gas_damping[0] + d.recoil[0])
            / d.gas_damping[0]
            - 0.5;
        assert!((r.nbar[0] - heated).abs() < 1e-8 * heated);
        assert!(r.eta_min > 100.0);

        for o in &mut s.objects {
            o.recoil_scale = 1e-12;
        }
        let sys = System::new(&s.system()).unwrap();
        let r = run_steady(&sys, &options(), None).unwrap();
        for j in 0..2 {
            assert!((r.nbar[j] - r.thermal_nbar[j]).abs() < 1e-8 * r.thermal_nbar[j]);
        }
    }

    #[test]
    fn unstable_drive_reports_margin() {
        let mut s = shipped("fig1_cw");
        for c in &mut s.drive.controls {
            c.detuning = Frequency::MechanicalRatio(-1.0);
        }
        let sys = System::new(&s.system()).unwrap();
        match run_steady(&sys, &options(), None) {
            Err(Error::Unstable { margin }) => assert!(margin > 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn steady_readout_round_trip() {
        let s = shipped("fig1_cw");
        let sys = System::new(&s.system()).unwrap();
        let u = sys.unit;
        let probe = ProbeConfig {
            linewidth: 0.5 * u,
            coupling: [0.02 * u, 0.03 * u],
            position: Some([3.0, 1.5]),
            detuning: None,
        };
        let r = run_steady(&sys, &options(), Some(&probe))
            .unwrap()
            .readout
            .unwrap();
        assert!(r.max_relative_error < 1e-9);
        assert!((r.eta_min - r.reconstructed_eta_min).abs() < 1e-9);

        // the symmetric mean field leaves x₂ = 0, which hides object 2
        let probe = ProbeConfig {
            position: None,
            ..probe
        };
        assert!(matches!(
            run_steady(&sys, &options(), Some(&probe)),
            Err(Error::Unidentifiable(_))
        ));
    }

    #[test]
    fn sweep_marks_bad_points() {
        let s = shipped("fig2_sum");
        let sweep = SweepSpec {
            cw_fraction: Some(Grid::Values(vec![0.05, 0.1])),
            ..Default::default()
        };
        let mut numerics = s.numerics;
        numerics.t_max_tau = 4.0;
        let rows = run_sweep(&s.system(), &sweep, &numerics, &options());
        assert_eq!(rows[0].status, "invalid");
        assert!(rows[0].eta_min.is_nan());
        assert_eq!(rows[1].status, "ok");
        assert!(rows[1].stable);
    }

    #[test]
    fn effective_report_flags_strong_coupling() {
        let s = shipped("fig2_sum");
        let sys = System::new(&s.system()).unwrap();
        let r = run_effective(&sys, &s.numerics, &options()).unwrap();
        assert!(!r.weak_coupling);
        assert!((r.sum_frequency - 2.0 * sys.unit).abs() < 1e-6 * sys.unit);
        let cross = &r.pairs[1];
        assert!(cross.j1 > cross.j2);
        assert!(cross
            .processes
            .iter()
            .any(|p| p.resonant && p.harmonic != 0));
    }
}
