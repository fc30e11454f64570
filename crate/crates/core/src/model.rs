//! Physical scenario description and the derived rates and couplings.
//!
//! Index conventions: optical modes are `i = 0` (trap), `1`, `2` (control);
//! objects are `j = 1, 2` but stored zero-based. Arrays over control modes
//! (`[_; 2]`) hold modes 1 and 2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{C, HBAR, K_B};
use crate::error::{Error, Result};

/// Mode waist (m) that makes a 15 mW trap drive produce Ω/2π = 11 MHz for the
/// reference silica microdisk (20 µm × 150 nm, ε = 2.1, ρ = 2201 kg/m³) in a
/// 1 mm cavity of effective finesse 7×10⁵ at 1064 nm.
///
/// Reproduced by [`calibrate_mode_waist`]; see the unit tests.
pub const CALIBRATED_MODE_WAIST: f64 = 1.439_283_759_283_125_8e-5;

/// Lamb–Dicke bound enforced on `k_i · x_zp,j`.
pub const LAMB_DICKE_LIMIT: f64 = 1e-3;

/// Control drives stronger than this fraction of the trap drive trigger a warning.
pub const WEAK_CONTROL_FRACTION: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectShape {
    Microdisk { diameter: f64, thickness: f64 },
    Nanosphere { radius: f64 },
}

/// How the mass of an object is determined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassSpec {
    /// kg/m³, multiplied by the geometric volume.
    Density(f64),
    /// kg, used verbatim.
    Override(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub shape: ObjectShape,
    pub permittivity: f64,
    pub mass: MassSpec,
    pub mechanical_q: f64,
    /// Multiplies the recoil heating rate; 1.0 is the bare free-space value.
    #[serde(default = "unit_scale")]
    pub recoil_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl ObjectSpec {
    pub fn volume(&self) -> f64 {
        match self.shape {
            ObjectShape::Microdisk {
                diameter,
                thickness,
            } => PI * 0.25 * diameter * diameter * thickness,
            ObjectShape::Nanosphere { radius } => 4.0 / 3.0 * PI * radius.powi(3),
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(self.shape, ObjectShape::Nanosphere { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let lengths: &[f64] = match &self.shape {
            ObjectShape::Microdisk {
                diameter,
                thickness,
            } => &[*diameter, *thickness],
            ObjectShape::Nanosphere { radius } => &[*radius],
        };
        if lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidConfig(
                "object dimensions must be positive".into(),
            ));
        }
        if !(self.permittivity > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "relative permittivity must exceed 1, got {}",
                self.permittivity
            )));
        }
        match self.mass {
            MassSpec::Density(rho) if !(rho > 0.0) => {
                return Err(Error::InvalidConfig("density must be positive".into()))
            }
            MassSpec::Override(m) if !(m > 0.0) => {
                return Err(Error::InvalidConfig(
                    "mass override must be positive".into(),
                ))
            }
            _ => {}
        }
        if !(self.mechanical_q > 0.0) {
            return Err(Error::InvalidConfig(
                "mechanical quality factor must be positive".into(),
            ));
        }
        if !(self.recoil_scale > 0.0 && self.recoil_scale <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "recoil_scale must lie in (0, 1], got {}",
                self.recoil_scale
            )));
        }
        Ok(())
    }
}

/// Where the objects sit relative to the control-mode standing waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// `phases[i][j]`: phase of object `j` in control mode `i` (rad).
    Phases([[f64; 2]; 2]),
    /// Object 2 sits `separation` trap wavelengths from object 1; the phases of
    /// object 1 in each control mode are given.
    Antinodes { separation: i64, first: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityGeometry {
    pub length: f64,
    pub trap_wavelength: f64,
    pub control_wavelengths: [f64; 2],
    pub mode_waist: f64,
    /// Effective finesse of modes 0, 1, 2.
    pub finesse: [f64; 3],
    pub placement: Placement,
}

impl CavityGeometry {
    pub fn wavelength(&self, mode: usize) -> f64 {
        match mode {
            0 => self.trap_wavelength,
            i => self.control_wavelengths[i - 1],
        }
    }

    pub fn wavenumber(&self, mode: usize) -> f64 {
        2.0 * PI / self.wavelength(mode)
    }

    /// Cavity resonance frequency of `mode`, rad/s.
    pub fn optical_frequency(&self, mode: usize) -> f64 {
        2.0 * PI * C / self.wavelength(mode)
    }

    /// Gaussian-mode volume `π w₀² L / 4`.
    pub fn mode_volume(&self) -> f64 {
        PI * self.mode_waist * self.mode_waist * self.length / 4.0
    }

    /// `phases[i][j]` for the two control modes.
    pub fn control_phases(&self) -> [[f64; 2]; 2] {
        match self.placement {
            Placement::Phases(p) => p,
            Placement::Antinodes { separation, first } => {
                let mut p = [[0.0; 2]; 2];
                for i in 0..2 {
                    p[i][0] = first[i];
                    p[i][1] = first[i]
                        + phase_geometry(separation, self.wavenumber(i + 1), self.trap_wavelength);
                }
                p
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.length,
            self.trap_wavelength,
            self.control_wavelengths[0],
            self.control_wavelengths[1],
            self.mode_waist,
        ];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "cavity length, wavelengths and waist must be positive".into(),
            ));
        }
        if self.finesse.iter().any(|f| !(*f > 1.0)) {
            return Err(Error::InvalidConfig("finesse must exceed 1".into()));
        }
        if let Placement::Antinodes { separation, .. } = self.placement {
            let phases = self.control_phases();
            for (i, row) in phases.iter().enumerate() {
                let expected =
                    phase_geometry(separation, self.wavenumber(i + 1), self.trap_wavelength);
                if (row[1] - row[0] - expected).abs() > 1e-12 * expected.abs().max(1.0) {
                    return Err(Error::InvalidConfig(
                        "antinode phase relation violated".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Environment {
    /// K.
    pub temperature: f64,
    /// mbar; informational only.
    #[serde(default)]
    pub pressure: Option<f64>,
    /// kg; informational only.
    #[serde(default)]
    pub air_molecule_mass: Option<f64>,
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidConfig("temperature must be positive".into()));
        }
        Ok(())
    }

    /// Mean thermal speed of the residual gas, when its molecular mass is known.
    pub fn mean_gas_speed(&self) -> Option<f64> {
        self.air_molecule_mass
            .map(|m| (3.0 * K_B * self.temperature / m).sqrt())
    }
}

/// Amplitude of a cavity drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Amplitude {
    /// Amplitude rate `E`, s⁻¹.
    Rate(f64),
    /// Input power, W; converted with `E = √(2Pκ/ħω)`.
    Power(f64),
    /// Fraction of the trap drive amplitude `E₀`.
    TrapFraction(f64),
}

/// An angular frequency given either absolutely or relative to the system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Frequency {
    /// rad/s.
    Rate(f64),
    /// Multiple of the trap frequency Ω₁ of object 1.
    MechanicalRatio(f64),
    /// Multiple of Ω₁ + Ω₂.
    SumRatio(f64),
}

impl Frequency {
    pub fn resolve(&self, omega: [f64; 2]) -> f64 {
        match *self {
            Frequency::Rate(w) => w,
            Frequency::MechanicalRatio(r) => r * omega[0],
            Frequency::SumRatio(r) => r * (omega[0] + omega[1]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlDrive {
    /// Constant part `E⁽⁰⁾`.
    pub cw: Amplitude,
    /// Modulation depth `E⁽¹⁾` of `E(t) = E⁽⁰⁾ + E⁽¹⁾ cos(ω_D t)`.
    pub modulation: Amplitude,
    /// Effective detuning Δ targeted at the CW fixed point.
    pub detuning: Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Trap mode, driven on resonance.
    pub trap: Amplitude,
    pub controls: [ControlDrive; 2],
    /// ω_D, shared by all modulated modes. Irrelevant when nothing is modulated.
    pub modulation_frequency: Frequency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub objects: [ObjectSpec; 2],
    pub cavity: CavityGeometry,
    pub environment: Environment,
    pub drive: DriveSpec,
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        for o in &self.objects {
            o.validate()?;
        }
        self.cavity.validate()?;
        self.environment.validate()
    }
}

/// Drive amplitudes and frequencies in rad/s, after unit resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedDrive {
    pub trap: f64,
    pub cw: [f64; 2],
    pub modulation: [f64; 2],
    pub detuning: [f64; 2],
    pub modulation_frequency: f64,
}

impl ResolvedDrive {
    pub fn is_modulated(&self) -> bool {
        self.modulation.iter().any(|m| *m != 0.0) && self.modulation_frequency != 0.0
    }
}

/// All physical rates and couplings of the model, SI units (rates in rad/s).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedParams {
    pub volume: [f64; 2],
    pub mass: [f64; 2],
    pub optical_frequency: [f64; 3],
    pub wavenumber: [f64; 3],
    pub mode_volume: f64,
    /// κ_i for modes 0, 1, 2.
    pub linewidth: [f64; 3],
    /// g_ij for modes 0, 1, 2.
    pub bare_coupling: [[f64; 2]; 3],
    pub control_phases: [[f64; 2]; 2],
    /// 𝒢ˡ_ij, control modes only.
    pub linear_coupling: [[f64; 2]; 2],
    /// 𝒢ᑫ_ij, control modes only.
    pub quadratic_coupling: [[f64; 2]; 2],
    pub trap_photons: f64,
    pub trap_frequency: [f64; 2],
    pub zero_point: [f64; 2],
    pub gas_damping: [f64; 2],
    pub recoil: [f64; 2],
    pub thermal_occupancy: [f64; 2],
    /// k_B T / ħΩ_j, kept for the high-temperature diffusion variant.
    pub thermal_ratio: [f64; 2],
    pub drive: ResolvedDrive,
    pub warnings: Vec<String>,
}

pub fn derive_mass(obj: &ObjectSpec) -> f64 {
    match obj.mass {
        MassSpec::Density(rho) => rho * obj.volume(),
        MassSpec::Override(m) => m,
    }
}

fn polarizability_factor(obj: &ObjectSpec) -> f64 {
    let eps = obj.permittivity;
    if obj.is_sphere() {
        1.5 * (eps - 1.0) / (eps + 2.0)
    } else {
        0.5 * (eps - 1.0)
    }
}

/// Single-photon dispersive coupling g_ij (rad/s) of object `obj` to `mode`.
pub fn bare_coupling(obj: &ObjectSpec, geom: &CavityGeometry, mode: usize) -> f64 {
    obj.volume() / geom.mode_volume() * polarizability_factor(obj) * geom.optical_frequency(mode)
}

/// Ω_j = √(2ħk₀² g₀ⱼ |⟨a₀⟩|² / m_j).
pub fn trap_frequency(g0: f64, k0: f64, mass: f64, trap_photons: f64) -> f64 {
    (2.0 * HBAR * k0 * k0 * g0 * trap_photons / mass).sqrt()
}

pub fn zero_point_motion(mass: f64, omega: f64) -> f64 {
    (HBAR / (2.0 * mass * omega)).sqrt()
}

/// Linear and quadratic couplings `(𝒢ˡ, 𝒢ᑫ)` from the expansion of the
/// standing-wave potential around the trap minimum.
pub fn lamb_dicke_couplings(g: f64, k: f64, x_zp: f64, phase: f64) -> (f64, f64) {
    let kx = k * x_zp;
    let linear = -std::f64::consts::SQRT_2 * kx * g * (2.0 * phase).sin();
    let quadratic = 2.0 * kx * kx * g * (2.0 * phase).cos();
    (linear, quadratic)
}

/// Momentum diffusion rate Γ_j from scattered trap photons, including
/// `recoil_scale`.
pub fn recoil_rate(obj: &ObjectSpec, geom: &CavityGeometry, omega: f64) -> f64 {
    let eps = obj.permittivity;
    let bare = if obj.is_sphere() {
        let lambda = geom.trap_wavelength;
        2.0 * PI * PI / 5.0 * (eps - 1.0) / (eps + 2.0) * obj.volume() / lambda.powi(3) * omega
    } else {
        geom.trap_wavelength / (4.0 * geom.length) * geom.mode_volume() / obj.volume() * omega
            / (geom.finesse[0] * (eps - 1.0))
    };
    bare * obj.recoil_scale
}

/// Bose–Einstein occupation at frequency `omega` (rad/s) and temperature `t` (K).
pub fn thermal_occupancy(omega: f64, temperature: f64) -> f64 {
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

/// Amplitude decay rate κ = πc / (2 L F).
pub fn cavity_linewidth(finesse: f64, length: f64) -> f64 {
    PI * C / (2.0 * length * finesse)
}

pub fn gas_damping(omega: f64, q: f64) -> f64 {
    omega / q
}

/// Phase difference φ_i2 − φ_i1 for objects `n` trap wavelengths apart.
pub fn phase_geometry(n: i64, k_i: f64, trap_wavelength: f64) -> f64 {
    n as f64 * k_i * trap_wavelength
}

/// Smallest `n ∈ [1, n_max]` whose phase difference modulo π is closest to
/// `target` (taken modulo π).
pub fn find_antinode_separation(
    k_i: f64,
    trap_wavelength: f64,
    target: f64,
    n_max: i64,
) -> Option<i64> {
    let target = target.rem_euclid(PI);
    (1..=n_max)
        .map(|n| {
            let d = phase_geometry(n, k_i, trap_wavelength).rem_euclid(PI) - target;
            // distance on the circle of circumference π
            (n, d.abs().min(PI - d.abs()))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(n, _)| n)
}

/// Intracavity amplitude rate from input power: `E = √(2Pκ/ħω_L)`.
pub fn drive_amplitude_from_power(power: f64, linewidth: f64, laser_frequency: f64) -> f64 {
    (2.0 * power * linewidth / (HBAR * laser_frequency)).sqrt()
}

/// Mode waist that produces trap frequency `target_omega` for object `obj`
/// under a trap drive of `trap_power`. Ω scales as 1/w₀ at fixed power, so a
/// single evaluation at a reference waist pins the root.
pub fn calibrate_mode_waist(
    obj: &ObjectSpec,
    geom: &CavityGeometry,
    trap_power: f64,
    target_omega: f64,
) -> f64 {
    let omega_at = |w: f64| {
        let g = CavityGeometry {
            mode_waist: w,
            ..*geom
        };
        let kappa = cavity_linewidth(g.finesse[0], g.length);
        let e0 = drive_amplitude_from_power(trap_power, kappa, g.optical_frequency(0));
        let photons = (e0 / kappa).powi(2);
        trap_frequency(
            bare_coupling(obj, &g, 0),
            g.wavenumber(0),
            derive_mass(obj),
            photons,
        )
    };
    // Bisection on log w; the bracket spans 1 µm..1 cm.
    let (mut lo, mut hi) = (1e-6_f64.ln(), 1e-2_f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if omega_at(mid.exp()) > target_omega {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

fn resolve_amplitude(
    a: Amplitude,
    linewidth: f64,
    laser_frequency: f64,
    trap: Option<f64>,
) -> Result<f64> {
    let v = match a {
        Amplitude::Rate(e) => e,
        Amplitude::Power(p) => {
            if p < 0.0 {
                return Err(Error::InvalidConfig(
                    "drive power must be non-negative".into(),
                ));
            }
            drive_amplitude_from_power(p, linewidth, laser_frequency)
        }
        Amplitude::TrapFraction(f) => match trap {
            Some(e0) => f * e0,
            None => {
                return Err(Error::InvalidConfig(
                    "the trap drive cannot be given as a fraction of itself".into(),
                ))
            }
        },
    };
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "drive amplitude must be non-negative, got {v}"
        )));
    }
    Ok(v)
}

/// Computes every derived quantity and enforces the model's validity checks.
pub fn derive(config: &SystemConfig) -> Result<DerivedParams> {
    config.validate()?;
    let cav = &config.cavity;
    let objs = &config.objects;
    let mut warnings = Vec::new();

    let volume = [objs[0].volume(), objs[1].volume()];
    let mass = [derive_mass(&objs[0]), derive_mass(&objs[1])];
    let optical_frequency = [0, 1, 2].map(|i| cav.optical_frequency(i));
    let wavenumber = [0, 1, 2].map(|i| cav.wavenumber(i));
    let linewidth = [0, 1, 2].map(|i| cavity_linewidth(cav.finesse[i], cav.length));
    let bare = [0, 1, 2].map(|i| {
        [
            bare_coupling(&objs[0], cav, i),
            bare_coupling(&objs[1], cav, i),
        ]
    });

    let trap = resolve_amplitude(config.drive.trap, linewidth[0], optical_frequency[0], None)?;
    if trap == 0.0 {
        return Err(Error::InvalidConfig("trap drive must be nonzero".into()));
    }
    let trap_photons = (trap / linewidth[0]).powi(2);
    let omega = [0, 1].map(|j| trap_frequency(bare[0][j], wavenumber[0], mass[j], trap_photons));
    let zero_point = [0, 1].map(|j| zero_point_motion(mass[j], omega[j]));

    let phases = cav.control_phases();
    let mut linear = [[0.0; 2]; 2];
    let mut quadratic = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let k = wavenumber[i + 1];
            let kx = k * zero_point[j];
            if kx >= LAMB_DICKE_LIMIT {
                return Err(Error::InvalidConfig(format!(
                    "Lamb-Dicke condition violated: k{}·x_zp{} = {kx:.3e}",
                    i + 1,
                    j + 1
                )));
            }
            let (l, q) = lamb_dicke_couplings(bare[i + 1][j], k, zero_point[j], phases[i][j]);
            let s = (2.0 * phases[i][j]).sin().abs();
            let c = (2.0 * phases[i][j]).cos().abs();
            if s >= 10.0 * kx * c && q.abs() > l.abs() {
                return Err(Error::InvalidConfig(format!(
                    "quadratic coupling exceeds linear coupling away from an antinode (mode {}, object {})",
                    i + 1,
                    j + 1
                )));
            }
            linear[i][j] = l;
            quadratic[i][j] = q;
        }
    }

    let gas = [0, 1].map(|j| gas_damping(omega[j], objs[j].mechanical_q));
    let recoil = [0, 1].map(|j| recoil_rate(&objs[j], cav, omega[j]));
    let temp = config.environment.temperature;
    let thermal_occupancy_ = [0, 1].map(|j| thermal_occupancy(omega[j], temp));
    let thermal_ratio = [0, 1].map(|j| K_B * temp / (HBAR * omega[j]));

    let mut cw = [0.0; 2];
    let mut modulation = [0.0; 2];
    let mut detuning = [0.0; 2];
    for i in 0..2 {
        let d = &config.drive.controls[i];
        cw[i] = resolve_amplitude(d.cw, linewidth[i + 1], optical_frequency[i + 1], Some(trap))?;
        modulation[i] = resolve_amplitude(
            d.modulation,
            linewidth[i + 1],
            optical_frequency[i + 1],
            Some(trap),
        )?;
        detuning[i] = d.detuning.resolve(omega);
        if modulation[i] > 0.0 && modulation[i] >= cw[i] {
            return Err(Error::InvalidConfig(format!(
                "control {}: modulation depth must stay below the CW amplitude",
                i + 1
            )));
        }
        if cw[i] + modulation[i] > WEAK_CONTROL_FRACTION * trap {
            warnings.push(format!(
                "control {} drive exceeds {WEAK_CONTROL_FRACTION} of the trap drive; the trap may be perturbed",
                i + 1
            ));
        }
    }
    let drive = ResolvedDrive {
        trap,
        cw,
        modulation,
        detuning,
        modulation_frequency: config.drive.modulation_frequency.resolve(omega),
    };

    Ok(DerivedParams {
        volume,
        mass,
        optical_frequency,
        wavenumber,
        mode_volume: cav.mode_volume(),
        linewidth,
        bare_coupling: bare,
        control_phases: phases,
        linear_coupling: linear,
        quadratic_coupling: quadratic,
        trap_photons,
        trap_frequency: omega,
        zero_point,
        gas_damping: gas,
        recoil,
        thermal_occupancy: thermal_occupancy_,
        thermal_ratio,
        drive,
        warnings,
    })
}

/// Silica microdisk of the reference design: 20 µm × 150 nm, ε = 2.1,
/// ρ = 2201 kg/m³, Q_m = 10⁶.
pub fn reference_microdisk() -> ObjectSpec {
    ObjectSpec {
        shape: ObjectShape::Microdisk {
            diameter: 20e-6,
            thickness: 150e-9,
        },
        permittivity: 2.1,
        mass: MassSpec::Density(2201.0),
        mechanical_q: 1e6,
        recoil_scale: 1.0,
    }
}

/// Silica nanosphere of 100 nm radius, Q_m = 3×10⁸.
pub fn reference_nanosphere() -> ObjectSpec {
    ObjectSpec {
        shape: ObjectShape::Nanosphere { radius: 100e-9 },
        permittivity: 2.1,
        mass: MassSpec::Density(2201.0),
        mechanical_q: 3e8,
        recoil_scale: 1.0,
    }
}

/// 1 mm cavity at 1064 nm, F_eff = 7×10⁵, calibrated waist, optimal phases
/// φ₁₁ = φ₁₂ = φ₂₁ = −φ₂₂ = π/4.
pub fn reference_cavity() -> CavityGeometry {
    let q = PI / 4.0;
    CavityGeometry {
        length: 1e-3,
        trap_wavelength: 1064e-9,
        control_wavelengths: [1064e-9, 1064e-9],
        mode_waist: CALIBRATED_MODE_WAIST,
        finesse: [7e5; 3],
        placement: Placement::Phases([[q, q], [q, -q]]),
    }
}
