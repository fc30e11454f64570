//! Adiabatically eliminated mechanical model.
//!
//! Eliminating the control modes leaves a direct coupling
//!
//! ```text
//! J_jl = Σ_i [κ_i Im(G_ij G_il*) + Δ_i Re(G_ij G_il*)] / (κ_i² + Δ_i²)^p
//! ```
//!
//! between the mechanical coordinates, with `p = 2` in the printed form and
//! `p = 1` for the single-power form. In the slowly varying frame
//! `β_j = b_j e^{iΩ̃_j t}` the mechanics obey
//!
//! ```text
//! dβ_j/dt = i Σ_l J_jl(t) [β_l e^{i(Ω̃_j − Ω̃_l)t} + β_l* e^{i(Ω̃_j + Ω̃_l)t}]
//! ```
//!
//! plus local damping and noise. Each (j, l) pair enters once; the pair
//! (l, j) is the same physical process seen from the other oscillator.

use std::f64::consts::PI;

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Mat4;
use crate::integrate::rk4_step;
use crate::meanfield::WorkingPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JFormula {
    /// Squared denominator `(κ² + Δ²)²`.
    #[default]
    Printed,
    /// `(κ² + Δ²)`, the form that follows from eliminating the cavity at DC.
    SinglePower,
}

/// Fraction of min Ω̃ below which a rotating term counts as resonant.
pub const RWA_CUTOFF_FRACTION: f64 = 0.25;
/// Relative mismatch tolerated between the two ends of a sampled period.
pub const PERIODICITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCoupling {
    pub j: [[f64; 2]; 2],
    /// Some `|G_ij| ≥ κ_i`: adiabatic elimination is not justified.
    pub strong_coupling: bool,
}

pub fn effective_j(wp: &WorkingPoint, linewidth: [f64; 2], formula: JFormula) -> EffectiveCoupling {
    let mut j = [[0.0; 2]; 2];
    for i in 0..2 {
        let (k, d) = (linewidth[i], wp.detuning[i]);
        let denom = match formula {
            JFormula::Printed => (k * k + d * d).powi(2),
            JFormula::SinglePower => k * k + d * d,
        };
        for (a, row) in j.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                let prod = wp.coupling[i][a] * wp.coupling[i][b].conj();
                *v += (k * prod.im + d * prod.re) / denom;
            }
        }
    }
    let strong_coupling = (0..2).any(|i| wp.coupling[i].iter().any(|g| g.norm() >= linewidth[i]));
    EffectiveCoupling { j, strong_coupling }
}

/// Fourier content of a periodic signal at 0, ω_D and 2ω_D.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Harmonics {
    pub constant: f64,
    /// Cosine coefficients of `cos(kω_D t)`, k = 1, 2.
    pub cosine: [f64; 2],
    /// Sine coefficients of `sin(kω_D t)`, k = 1, 2.
    pub sine: [f64; 2],
    /// RMS of what the three harmonics leave unexplained, relative to the
    /// RMS of the signal.
    pub residual: f64,
}

impl Harmonics {
    pub fn constant(value: f64) -> Self {
        Harmonics {
            constant: value,
            ..Default::default()
        }
    }

    /// |J⁽ᵏ⁾| for k = 0, 1, 2.
    pub fn amplitude(&self, k: usize) -> f64 {
        match k {
            0 => self.constant.abs(),
            1 | 2 => self.cosine[k - 1].hypot(self.sine[k - 1]),
            _ => 0.0,
        }
    }

    /// Coefficient of `e^{imω_D t}`, m ∈ −2..=2.
    pub fn complex(&self, m: i32) -> Complex64 {
        match m {
            0 => Complex64::new(self.constant, 0.0),
            1 | 2 => 0.5 * Complex64::new(self.cosine[m as usize - 1], -self.sine[m as usize - 1]),
            -1 | -2 => {
                0.5 * Complex64::new(self.cosine[(-m) as usize - 1], self.sine[(-m) as usize - 1])
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    pub fn evaluate(&self, omega: f64, t: f64) -> f64 {
        self.constant
            + (1..=2)
                .map(|k| {
                    let ph = k as f64 * omega * t;
                    self.cosine[k - 1] * ph.cos() + self.sine[k - 1] * ph.sin()
                })
                .sum::<f64>()
    }
}

/// Projects one period of uniformly spaced samples (both ends included) on
/// the first two harmonics of `omega`.
pub fn modulation_harmonics(times: &[f64], values: &[f64], omega: f64) -> Result<Harmonics> {
    let n = values.len();
    if n < 8 || times.len() != n || omega == 0.0 {
        return Err(Error::InvalidConfig(
            "harmonic projection needs ≥ 8 samples and ω_D ≠ 0".into(),
        ));
    }
    let period = 2.0 * PI / omega.abs();
    let span = times[n - 1] - times[0];
    if (span - period).abs() > 1e-9 * period {
        return Err(Error::InvalidConfig(format!(
            "samples span {span}, expected one period {period}"
        )));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mismatch = (values[n - 1] - values[0]).abs() / scale.max(f64::MIN_POSITIVE);
    if mismatch > PERIODICITY_TOLERANCE {
        return Err(Error::NotPeriodic(mismatch));
    }
    let body = &values[..n - 1];
    let m = body.len() as f64;
    let mut h = Harmonics {
        constant: body.iter().sum::<f64>() / m,
        ..Default::default()
    };
    for k in 1..=2 {
        let (mut c, mut s) = (0.0, 0.0);
        for (t, v) in times.iter().zip(body) {
            let ph = k as f64 * omega * t;
            c += v * ph.cos();
            s += v * ph.sin();
        }
        h.cosine[k - 1] = 2.0 * c / m;
        h.sine[k - 1] = 2.0 * s / m;
    }
    let (mut err, mut total) = (0.0, 0.0);
    for (t, v) in times.iter().zip(body) {
        err += (v - h.evaluate(omega, *t)).powi(2);
        total += v * v;
    }
    h.residual = if total > 0.0 {
        (err / total).sqrt()
    } else {
        0.0
    };
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonantFrequencies {
    pub sum: f64,
    pub half: f64,
}

/// Modulation frequencies that make two-mode squeezing resonant through the
/// first (`sum`) and second (`half`) harmonic of J.
pub fn resonance_advisor(frequency: [f64; 2]) -> ResonantFrequencies {
    let sum = frequency[0] + frequency[1];
    ResonantFrequencies {
        sum,
        half: 0.5 * sum,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    FrequencyShift,
    SingleModeSqueeze,
    Hopping,
    TwoModeSqueeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProcessTag {
    pub process: Process,
    /// Harmonic m of J (multiplying `e^{imω_D t}`) closest to resonance.
    pub harmonic: i32,
    /// Residual rotation frequency of the term in the slow frame.
    pub detuning: f64,
    pub resonant: bool,
}

fn harmonics_present(omega_d: f64) -> &'static [i32] {
    if omega_d == 0.0 {
        &[0]
    } else {
        &[-2, -1, 0, 1, 2]
    }
}

/// Rotating-wave screening of the processes coupling oscillators `j` and `l`.
pub fn rwa_classify(
    j: usize,
    l: usize,
    frequency: [f64; 2],
    omega_d: f64,
    cutoff: f64,
) -> Vec<ProcessTag> {
    let (direct, conjugate) = if j == l {
        (Process::FrequencyShift, Process::SingleModeSqueeze)
    } else {
        (Process::Hopping, Process::TwoModeSqueeze)
    };
    let base = [
        (direct, frequency[j] - frequency[l]),
        (conjugate, frequency[j] + frequency[l]),
    ];
    base.iter()
        .map(|&(process, nu)| {
            let (harmonic, detuning) = harmonics_present(omega_d)
                .iter()
                .map(|&m| (m, nu + m as f64 * omega_d))
                .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .expect("at least one harmonic");
            ProcessTag {
                process,
                harmonic,
                detuning,
                resonant: detuning.abs() <= cutoff,
            }
        })
        .collect()
}

/// Parameters of the reduced two-oscillator model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedModel {
    /// Harmonics of J_jl; only `j ≤ l` entries are read.
    pub coupling: [[Harmonics; 2]; 2],
    /// Ω̃_j, the frame rotation.
    pub frequency: [f64; 2],
    /// Local energy damping γ_j + Γ_j.
    pub damping: [f64; 2],
    pub occupancy: [f64; 2],
    pub modulation_frequency: f64,
    pub cutoff: f64,
}

#[derive(Debug, Clone, Copy)]
struct Term {
    j: usize,
    l: usize,
    conjugate: bool,
    amplitude: Complex64,
    frequency: f64,
}

impl ReducedModel {
    pub fn default_cutoff(frequency: [f64; 2]) -> f64 {
        RWA_CUTOFF_FRACTION * frequency[0].min(frequency[1])
    }

    /// Retained rotating terms `i c_m e^{iνt}` acting on β_l (or β_l*) in the
    /// equation for β_j.
    fn terms(&self) -> Vec<Term> {
        let mut out = Vec::new();
        let w = self.frequency;
        for j in 0..2 {
            for l in 0..2 {
                let h = self.coupling[j.min(l)][j.max(l)];
                for &m in harmonics_present(self.modulation_frequency) {
                    let c = h.complex(m);
                    if c == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for (conjugate, base) in [(false, w[j] - w[l]), (true, w[j] + w[l])] {
                        let nu = base + m as f64 * self.modulation_frequency;
                        if nu.abs() <= self.cutoff {
                            out.push(Term {
                                j,
                                l,
                                conjugate,
                                amplitude: Complex64::i() * c,
                                frequency: nu,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Real drift in `(X₁, P₁, X₂, P₂)` of the slow frame, `β = (X + iP)/√2`.
    fn drift(&self, terms: &[Term], t: f64) -> Matrix4<f64> {
        let mut direct = [[Complex64::new(0.0, 0.0); 2]; 2];
        let mut conj = [[Complex64::new(0.0, 0.0); 2]; 2];
        for term in terms {
            let v = term.amplitude * Complex64::from_polar(1.0, term.frequency * t);
            if term.conjugate {
                conj[term.j][term.l] += v;
            } else {
                direct[term.j][term.l] += v;
            }
        }
        let mut r = Matrix4::zeros();
        for j in 0..2 {
            for l in 0..2 {
                let (m, n) = (direct[j][l], conj[j][l]);
                r[(2 * j, 2 * l)] = (m + n).re;
                r[(2 * j, 2 * l + 1)] = -(m - n).im;
                r[(2 * j + 1, 2 * l)] = (m + n).im;
                r[(2 * j + 1, 2 * l + 1)] = (m - n).re;
            }
            r[(2 * j, 2 * j)] -= 0.5 * self.damping[j];
            r[(2 * j + 1, 2 * j + 1)] -= 0.5 * self.damping[j];
        }
        r
    }

    fn diffusion(&self) -> Matrix4<f64> {
        let d = |j: usize| (2.0 * self.occupancy[j] + 1.0) * self.damping[j] * 0.5;
        Matrix4::from_diagonal(&Vector4::new(d(0), d(0), d(1), d(1)))
    }

    /// Terms that survive the rotating-wave screening, as process tags.
    pub fn retained(&self) -> Vec<(usize, usize, Process, f64)> {
        self.terms()
            .iter()
            .filter(|t| t.j <= t.l)
            .map(|t| {
                let p = match (t.j == t.l, t.conjugate) {
                    (true, false) => Process::FrequencyShift,
                    (true, true) => Process::SingleModeSqueeze,
                    (false, false) => Process::Hopping,
                    (false, true) => Process::TwoModeSqueeze,
                };
                (t.j, t.l, p, t.frequency)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    pub covariances: Vec<Mat4>,
}

/// Integrates the reduced model from `v0` (lab-frame mechanical covariance at
/// t = 0, which coincides with the slow frame there) for `steps` RK4 steps.
pub fn reduced_two_mode_evolve(
    model: &ReducedModel,
    v0: &Mat4,
    dt: f64,
    steps: u64,
    sample_every: u64,
) -> Result<ReducedTrajectory> {
    let terms = model.terms();
    let d = model.diffusion();
    let sample_every = sample_every.max(1);
    let limit = 1e6 * v0.norm().max(f64::MIN_POSITIVE);
    let mut out = ReducedTrajectory {
        times: vec![0.0],
        covariances: vec![*v0],
    };
    let mut v = *v0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let next = rk4_step(
            |s, m: &Mat4| {
                let a = model.drift(&terms, s);
                a * m + m * a.transpose() + d
            },
            t,
            &v,
            dt,
        );
        v = 0.5 * (next + next.transpose());
        let t_next = (n + 1) as f64 * dt;
        if !v.norm().is_finite() || v.norm() > limit {
            return Err(Error::BlowUp { time: t_next });
        }
        if (n + 1) % sample_every == 0 {
            out.times.push(t_next);
            out.covariances.push(v);
        }
    }
    Ok(out)
}
