//! The linearizable model expressed purely in rates.
//!
//! Everything downstream of [`crate::model`] works with [`RateModel`]. All of
//! its fields are angular rates (or dimensionless), so the whole model can be
//! rescaled to a convenient time unit with [`RateModel::rescaled`]. The
//! pipeline uses Ω₁ = 1.

use serde::Serialize;

use crate::model::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mechanics {
    /// Trap frequency Ω_j.
    pub frequency: f64,
    /// Gas/tether damping γ_j.
    pub damping: f64,
    /// Recoil diffusion rate Γ_j.
    pub recoil: f64,
    /// n̄_th,j.
    pub occupancy: f64,
    /// k_B T / ħΩ_j.
    pub thermal_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optics {
    /// Amplitude decay rate κ_i.
    pub linewidth: f64,
    /// 𝒢ˡ_ij for j = 1, 2.
    pub linear: [f64; 2],
    /// 𝒢ᑫ_ij for j = 1, 2.
    pub quadratic: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Drive {
    pub cw: [f64; 2],
    pub modulation: [f64; 2],
    /// Effective detuning Δ_i targeted at the CW fixed point.
    pub detuning: [f64; 2],
    pub modulation_frequency: f64,
}

impl Drive {
    /// `E_i(t) = E⁽⁰⁾ + E⁽¹⁾ cos(ω_D t)`.
    pub fn amplitude(&self, i: usize, t: f64) -> f64 {
        self.cw[i] + self.modulation[i] * (self.modulation_frequency * t).cos()
    }

    pub fn is_modulated(&self) -> bool {
        self.modulation_frequency != 0.0 && self.modulation.iter().any(|m| *m != 0.0)
    }

    /// Same drive with the modulation switched off.
    pub fn cw_only(&self) -> Drive {
        Drive {
            modulation: [0.0; 2],
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateModel {
    pub mechanics: [Mechanics; 2],
    pub optics: [Optics; 2],
    pub drive: Drive,
}

impl RateModel {
    pub fn from_derived(p: &DerivedParams) -> Self {
        let mechanics = [0, 1].map(|j| Mechanics {
            frequency: p.trap_frequency[j],
            damping: p.gas_damping[j],
            recoil: p.recoil[j],
            occupancy: p.thermal_occupancy[j],
            thermal_ratio: p.thermal_ratio[j],
        });
        let optics = [0, 1].map(|i| Optics {
            linewidth: p.linewidth[i + 1],
            linear: p.linear_coupling[i],
            quadratic: p.quadratic_coupling[i],
        });
        let d = &p.drive;
        RateModel {
            mechanics,
            optics,
            drive: Drive {
                cw: d.cw,
                modulation: d.modulation,
                detuning: d.detuning,
                modulation_frequency: d.modulation_frequency,
            },
        }
    }

    /// Expresses every rate in units of `unit` (rad/s), i.e. divides by it.
    pub fn rescaled(&self, unit: f64) -> Self {
        let s = 1.0 / unit;
        RateModel {
            mechanics: self.mechanics.map(|m| Mechanics {
                frequency: m.frequency * s,
                damping: m.damping * s,
                recoil: m.recoil * s,
                ..m
            }),
            optics: self.optics.map(|o| Optics {
                linewidth: o.linewidth * s,
                linear: o.linear.map(|v| v * s),
                quadratic: o.quadratic.map(|v| v * s),
            }),
            drive: Drive {
                cw: self.drive.cw.map(|v| v * s),
                modulation: self.drive.modulation.map(|v| v * s),
                detuning: self.drive.detuning.map(|v| v * s),
                modulation_frequency: self.drive.modulation_frequency * s,
            },
        }
    }

    pub fn with_drive(&self, drive: Drive) -> Self {
        RateModel { drive, ..*self }
    }

    /// τ = 4π / (Ω₁ + Ω₂), the natural time unit of the modulated runs.
    pub fn tau(&self) -> f64 {
        4.0 * std::f64::consts::PI / (self.mechanics[0].frequency + self.mechanics[1].frequency)
    }

    /// Largest rate the integrators must resolve.
    pub fn fastest_rate(&self, extra: &[f64]) -> f64 {
        self.mechanics
            .iter()
            .map(|m| m.frequency)
            .chain(self.optics.iter().map(|o| o.linewidth))
            .chain(self.drive.detuning.iter().map(|d| d.abs()))
            .chain(std::iter::once(self.drive.modulation_frequency.abs()))
            .chain(extra.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
    }
}
