//! Linearized fluctuation dynamics.
//!
//! Fluctuations are ordered `u = (x₁, p₁, x₂, p₂, X₁, Y₁, X₂, Y₂)` with
//! `[x, p] = i`, optical quadratures `δa = (X + iY)/√2` and vacuum variance ½.
//! The symmetrized covariance `V_kl = ½⟨{u_k, u_l}⟩` obeys
//! `dV/dt = A V + V Aᵀ + D`.

pub mod drift;
pub mod evolve;
pub mod lyapunov;
pub mod orbit;
pub mod stability;

use nalgebra::SMatrix;

pub type Mat8 = SMatrix<f64, 8, 8>;

pub use drift::{build_diffusion, build_drift, DiffusionModel};
pub use evolve::{
    evolve_covariance, ConstantDrift, DriftSchedule, MeanFieldDrift, QuasiStaticDrift, Trajectory,
};
pub use lyapunov::{steady_covariance, SteadyCovariance};
pub use orbit::{quasi_steady_orbit, Orbit};
pub use stability::{check_stability, RouthVerdict, Stability};

/// Index of x_j in the state vector.
pub const fn position(j: usize) -> usize {
    2 * j
}

/// Index of p_j.
pub const fn momentum(j: usize) -> usize {
    2 * j + 1
}

/// Index of X_i.
pub const fn amplitude_quadrature(i: usize) -> usize {
    4 + 2 * i
}

/// Index of Y_i.
pub const fn phase_quadrature(i: usize) -> usize {
    5 + 2 * i
}
