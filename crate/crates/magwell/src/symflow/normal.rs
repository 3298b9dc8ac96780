use serde::{Deserialize, Serialize};

use super::integrate::{midpoint_step, yoshida_step, Integrator};
use super::FlowError;
use crate::fieldlab::Vec2;

/// Orientation of the slow pair: `ẋ₂ = σ ∂K/∂ξ₂`, `ξ̇₂ = −σ ∂K/∂x₂`. The
/// chart `(q₁, Ψ)` carries `B dq₁∧dq₂ = dx₂∧dξ₂`, opposite to the fast pair.
pub const SLOW_ORIENTATION: f64 = -1.0;

/// Point in normal coordinates: `z₁ = x₁ + iξ₁` stored as `(x₁, ξ₁)`, and the
/// slow pair `z₂ = (x₂, ξ₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPoint {
    pub z1: Vec2,
    pub z2: Vec2,
}

impl NormalPoint {
    pub fn action(&self) -> f64 {
        self.z1[0] * self.z1[0] + self.z1[1] * self.z1[1]
    }
}

/// A normal form `K(I, z₂)` with `I = |z₁|²`.
pub trait SlowHamiltonian {
    /// `(K, ∂K/∂I, ∂K/∂x₂, ∂K/∂ξ₂)`.
    fn k_and_derivatives(&self, action: f64, z2: Vec2) -> [f64; 4];

    fn in_domain(&self, _z2: Vec2) -> bool {
        true
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalTrajectory {
    pub times: Vec<f64>,
    pub points: Vec<NormalPoint>,
    pub energy: Vec<f64>,
    pub step: f64,
}

/// Flow of `K`: `I` is frozen, `z₂` follows the Hamiltonian `K(I, ·)` and
/// `z₁` turns by the phase `θ̇ = −2 ∂K/∂I`, integrated at the same midpoint
/// stages as `z₂` so that the product structure of the flow is exact.
pub fn integrate_k<K: SlowHamiltonian + ?Sized>(
    nf: &K,
    z0: NormalPoint,
    t_end: f64,
    dt: f64,
    method: Integrator,
    stride: usize,
) -> Result<NormalTrajectory, FlowError> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(FlowError::InvalidStep { dt });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(FlowError::InvalidHorizon { t_end });
    }
    let action = z0.action();
    let rhs = |y: &[f64; 3]| {
        let d = nf.k_and_derivatives(action, [y[0], y[1]]);
        [SLOW_ORIENTATION * d[3], -SLOW_ORIENTATION * d[2], -2.0 * d[1]]
    };
    let steps = (t_end / dt.abs()).round().max(1.0) as usize;
    let stride = stride.max(1);
    let mut out = NormalTrajectory {
        times: Vec::with_capacity(steps / stride + 2),
        points: Vec::with_capacity(steps / stride + 2),
        energy: Vec::with_capacity(steps / stride + 2),
        step: dt,
    };
    let push = |out: &mut NormalTrajectory, t: f64, y: &[f64; 3]| {
        let (s, c) = y[2].sin_cos();
        let z1 = [c * z0.z1[0] - s * z0.z1[1], s * z0.z1[0] + c * z0.z1[1]];
        out.times.push(t);
        out.energy.push(nf.k_and_derivatives(action, [y[0], y[1]])[0]);
        out.points.push(NormalPoint { z1, z2: [y[0], y[1]] });
    };
    let mut y = [z0.z2[0], z0.z2[1], 0.0];
    push(&mut out, 0.0, &y);
    for n in 1..=steps {
        let t = n as f64 * dt;
        let next = match method {
            Integrator::ImplicitMidpoint | Integrator::Boris => midpoint_step(&rhs, &y, dt),
            Integrator::Composition4 => yoshida_step(&rhs, &y, dt),
        };
        y = next.ok_or(FlowError::NonConvergent { t })?;
        if !nf.in_domain([y[0], y[1]]) || !y.iter().all(|v| v.is_finite()) {
            return Err(FlowError::LeftChart { t });
        }
        if n % stride == 0 || n == steps {
            push(&mut out, t, &y);
        }
    }
    Ok(out)
}
