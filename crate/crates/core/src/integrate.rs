//! Classical fourth-order Runge–Kutta stepping for any state that forms a
//! vector space over `f64` (nalgebra vectors and matrices qualify).

use std::ops::{Add, Mul};

pub fn rk4_step<Y, F>(mut f: F, t: f64, y: &Y, h: f64) -> Y
where
    Y: Clone + Add<Output = Y> + Mul<f64, Output = Y>,
    F: FnMut(f64, &Y) -> Y,
{
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &(y.clone() + k1.clone() * (0.5 * h)));
    let k3 = f(t + 0.5 * h, &(y.clone() + k2.clone() * (0.5 * h)));
    let k4 = f(t + h, &(y.clone() + k3.clone() * h));
    y.clone() + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Largest step allowed by the resolution rule `dt ≤ 2π / (200 · max_rate)`.
pub fn max_step(max_rate: f64) -> f64 {
    2.0 * std::f64::consts::PI / (200.0 * max_rate)
}
