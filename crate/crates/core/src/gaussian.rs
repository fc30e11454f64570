//! Gaussian-state analysis of covariance matrices in `(x₁, p₁, x₂, p₂, …)`
//! ordering with vacuum variance ½.

use nalgebra::{DMatrix, Matrix4};
use serde::{Deserialize, Serialize};

use crate::dynamics::Mat8;
use crate::error::{Error, Result};

/// Relative tolerance for the ±ν pairing of the spectrum of ΣV.
pub const PAIRING_TOLERANCE: f64 = 1e-9;
/// Relative asymmetry accepted in an input covariance.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;

pub type Mat4 = Matrix4<f64>;

/// Two-object block `(x₁, p₁, x₂, p₂)` of the full covariance.
pub fn mechanical_block(v: &Mat8) -> Mat4 {
    v.fixed_view::<4, 4>(0, 0).into_owned()
}

pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        s[(2 * k, 2 * k + 1)] = 1.0;
        s[(2 * k + 1, 2 * k)] = -1.0;
    }
    s
}

fn validate(v: &DMatrix<f64>) -> Result<()> {
    let asym = (v - v.transpose()).norm() / v.norm().max(f64::MIN_POSITIVE);
    if !(asym <= SYMMETRY_TOLERANCE) {
        return Err(Error::NotSymmetric(asym));
    }
    if v.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(())
}

/// Symplectic eigenvalues ν₁ ≤ … ≤ ν_n, the moduli of the eigenvalues of ΣV.
pub fn symplectic_spectrum(v: &DMatrix<f64>) -> Result<Vec<f64>> {
    validate(v)?;
    let n = v.nrows() / 2;
    let sv = symplectic_form(n) * v;
    let mut moduli: Vec<f64> = sv.complex_eigenvalues().iter().map(|l| l.norm()).collect();
    moduli.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(n);
    for pair in moduli.chunks(2) {
        let mismatch = (pair[0] - pair[1]).abs() / pair[1].max(f64::MIN_POSITIVE);
        if !(mismatch <= PAIRING_TOLERANCE) {
            return Err(Error::Pairing(mismatch));
        }
        out.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(out)
}

/// Robertson–Schrödinger uncertainty: every symplectic eigenvalue ≥ ½.
pub fn is_physical(v: &DMatrix<f64>, tolerance: f64) -> bool {
    symplectic_spectrum(v)
        .map(|nu| nu.iter().all(|x| *x >= 0.5 - tolerance))
        .unwrap_or(false)
}

/// Partial transpose with respect to the second object (p₂ → −p₂).
pub fn partial_transpose(v: &Mat4) -> Mat4 {
    let p = Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
    p * v * p
}

/// Smallest symplectic eigenvalue of the partially transposed two-object
/// covariance. The state is entangled iff η_min < ½.
pub fn eta_min(v: &Mat4) -> Result<f64> {
    let pt = partial_transpose(v);
    let spectrum = symplectic_spectrum(&DMatrix::from_column_slice(4, 4, pt.as_slice()))?;
    Ok(spectrum[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

/// `E_N = max(0, −log(2η_min))`.
pub fn log_negativity(eta: f64, base: LogBase) -> f64 {
    let e = (-(2.0 * eta).ln()).max(0.0);
    match base {
        LogBase::Natural => e,
        LogBase::Two => e / std::f64::consts::LN_2,
    }
}

/// `n̄_j = (V_xjxj + V_pjpj − 1)/2`.
pub fn phonon_occupation(v: &Mat4, j: usize) -> f64 {
    0.5 * (v[(2 * j, 2 * j)] + v[(2 * j + 1, 2 * j + 1)] - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub eta_min: f64,
    pub log_negativity: f64,
    pub occupation: [f64; 2],
}

impl EntanglementReport {
    pub fn entangled(&self) -> bool {
        self.eta_min < 0.5
    }
}

pub fn analyze(v: &Mat4, base: LogBase) -> Result<EntanglementReport> {
    let eta = eta_min(v)?;
    Ok(EntanglementReport {
        eta_min: eta,
        log_negativity: log_negativity(eta, base),
        occupation: [phonon_occupation(v, 0), phonon_occupation(v, 1)],
    })
}
