//! Scenario files: a TOML description of one system plus numerics, outputs
//! and optional probe and sweep sections.
//!
//! Physical inputs are SI (rates in rad/s) or expressed relative to the
//! system (fractions of the trap drive, multiples of Ω₁ or Ω₁ + Ω₂).
//! Unknown keys are rejected at every level.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::DiffusionModel;
use crate::effective::JFormula;
use crate::error::{Error, Result};
use crate::gaussian::LogBase;
use crate::model::{
    derive, CavityGeometry, DerivedParams, DriveSpec, Environment, ObjectSpec, SystemConfig,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeanFieldMode {
    /// Integrate the mean-field equations alongside the covariance.
    #[default]
    Ode,
    /// Cavity amplitudes follow the drive instantaneously; positions frozen.
    Quasistatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Multiplies the largest stable step `2π / (200 · fastest rate)`; ≤ 1.
    pub dt_factor: f64,
    /// Run length in units of τ = 4π/(Ω₁ + Ω₂).
    pub t_max_tau: f64,
    /// Period-to-period change accepted as quasi-steady.
    pub orbit_tolerance: f64,
    pub diffusion: DiffusionModel,
    pub jformula: JFormula,
    pub meanfield: MeanFieldMode,
    pub log_base: LogBase,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            dt_factor: 1.0,
            t_max_tau: 400.0,
            orbit_tolerance: 1e-3,
            diffusion: DiffusionModel::Exact,
            jformula: JFormula::Printed,
            meanfield: MeanFieldMode::Ode,
            log_base: LogBase::Natural,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub directory: Option<String>,
    pub format: OutputFormat,
    /// Spacing of time-series rows, in τ.
    pub sample_every_tau: f64,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            directory: None,
            format: OutputFormat::Csv,
            sample_every_tau: 0.5,
        }
    }
}

/// Probe modes for the quadrature readout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// κ of the probe modes, rad/s.
    pub linewidth: f64,
    /// `[𝒢̃₊, 𝒢̃₋]`, rad/s.
    pub coupling: [f64; 2],
    /// `[⟨x₁⟩, ⟨x₂⟩]` seen by the probes, zero-point units. Defaults to the
    /// CW mean-field positions.
    #[serde(default)]
    pub position: Option<[f64; 2]>,
    /// `[Δ₊, Δ₋]`, rad/s. Defaults to `[Ω₁, −Ω₁]`.
    #[serde(default)]
    pub detuning: Option<[f64; 2]>,
}

/// A list of values, or an evenly spaced range with both ends included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Values(v) => v.clone(),
            Grid::Range {
                start,
                stop,
                points,
            } => match points {
                0 => vec![],
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        }
    }
}

/// Sweep axes. Missing axes keep the scenario value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    /// CW amplitude of both controls as a fraction of the trap drive E₀.
    pub cw_fraction: Option<Grid>,
    /// Effective detuning of both controls in units of Ω₁.
    pub detuning_ratio: Option<Grid>,
    /// ω_D in units of Ω₁ + Ω₂. Points on this axis run the time evolution.
    pub modulation_ratio: Option<Grid>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    pub objects: [ObjectSpec; 2],
    pub cavity: CavityGeometry,
    pub environment: Environment,
    pub drive: DriveSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub probe: Option<ProbeConfig>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

impl Scenario {
    /// Parses and validates, including every model-level check.
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            objects: self.objects,
            cavity: self.cavity,
            environment: self.environment,
            drive: self.drive,
        }
    }

    pub fn validate(&self) -> Result<DerivedParams> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let n = &self.numerics;
        if !(n.dt_factor > 0.0 && n.dt_factor <= 1.0) {
            return Err(Error::InvalidConfig(
                "numerics.dt_factor must lie in (0, 1]".into(),
            ));
        }
        if !(n.t_max_tau > 0.0) || !(n.orbit_tolerance > 0.0) {
            return Err(Error::InvalidConfig(
                "numerics.t_max_tau and orbit_tolerance must be positive".into(),
            ));
        }
        if !(self.output.sample_every_tau > 0.0) {
            return Err(Error::InvalidConfig(
                "output.sample_every_tau must be positive".into(),
            ));
        }
        if let Some(p) = &self.probe {
            if !(p.linewidth > 0.0) {
                return Err(Error::InvalidConfig(
                    "probe.linewidth must be positive".into(),
                ));
            }
        }
        if let Some(sw) = &self.sweep {
            for (name, g) in [
                ("cw_fraction", &sw.cw_fraction),
                ("detuning_ratio", &sw.detuning_ratio),
                ("modulation_ratio", &sw.modulation_ratio),
            ] {
                if let Some(g) = g {
                    let v = g.values();
                    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidConfig(format!(
                            "sweep.{name} must hold finite values"
                        )));
                    }
                }
            }
        }
        derive(&self.system())
    }
}
