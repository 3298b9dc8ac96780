use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::FlowError;
use crate::fieldlab::{hamiltonian, MagneticField, PhaseState, VectorPotential};

/// Convergence threshold of the implicit stage, relative to `1 + |y|∞`.
pub const FIXED_POINT_TOL: f64 = 1e-13;
pub const MAX_FIXED_POINT_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Integrator {
    ImplicitMidpoint,
    Boris,
    /// Order-4 triple-jump composition of the implicit midpoint rule.
    Composition4,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::ImplicitMidpoint => "implicit_midpoint",
            Integrator::Boris => "boris",
            Integrator::Composition4 => "composition4",
        })
    }
}

impl FromStr for Integrator {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "implicit_midpoint" | "midpoint" => Ok(Integrator::ImplicitMidpoint),
            "boris" => Ok(Integrator::Boris),
            "composition4" => Ok(Integrator::Composition4),
            other => Err(format!("unknown integrator '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub energy: Vec<f64>,
    pub integrator: Integrator,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory has its initial state")
    }

    /// `max |H(t) − H(0)| / H(0)`, or the absolute drift when `H(0) = 0`.
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy[0];
        let worst = self.energy.iter().map(|h| (h - h0).abs()).fold(0.0, f64::max);
        if h0 > 0.0 {
            worst / h0
        } else {
            worst
        }
    }
}

/// One implicit midpoint step `y₁ = y₀ + h f((y₀ + y₁)/2)` by fixed-point
/// iteration. `None` when the iteration does not settle.
pub fn midpoint_step<const D: usize, F>(f: &F, y: &[f64; D], h: f64) -> Option<[f64; D]>
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut k = f(y);
    for _ in 0..MAX_FIXED_POINT_ITERS {
        let mut mid = *y;
        for i in 0..D {
            mid[i] += 0.5 * h * k[i];
        }
        let k_new = f(&mid);
        let change = (0..D).fold(0.0f64, |m, i| m.max((h * (k_new[i] - k[i])).abs()));
        k = k_new;
        if !change.is_finite() {
            return None;
        }
        if change <= FIXED_POINT_TOL * scale {
            let mut out = *y;
            for i in 0..D {
                out[i] += h * k[i];
            }
            return Some(out);
        }
    }
    None
}

const CBRT2: f64 = 1.259_921_049_894_873_2;
pub(crate) const YOSHIDA_OUTER: f64 = 1.0 / (2.0 - CBRT2);
pub(crate) const YOSHIDA_INNER: f64 = -CBRT2 / (2.0 - CBRT2);

/// Triple-jump composition of [`midpoint_step`], symmetric and of order 4.
pub fn yoshida_step<const D: usize, F>(f: &F, y: &[f64; D], h: f64) -> Option<[f64; D]>
where
    F: Fn(&[f64; D]) -> [f64; D],
{
    let a = midpoint_step(f, y, YOSHIDA_OUTER * h)?;
    let b = midpoint_step(f, &a, YOSHIDA_INNER * h)?;
    midpoint_step(f, &b, YOSHIDA_OUTER * h)
}

/// Hamilton's equations `q̇ = 2(p − A)`, `ṗ = 2 ᵗ(∂A)(p − A)`.
fn hamilton_rhs(pot: &VectorPotential, y: &[f64; 4]) -> [f64; 4] {
    let q = [y[0], y[1]];
    let a = pot.eval(q);
    let j = pot.jac(q);
    let w = [y[2] - a[0], y[3] - a[1]];
    [
        2.0 * w[0],
        2.0 * w[1],
        2.0 * (w[0] * j[0][0] + w[1] * j[1][0]),
        2.0 * (w[0] * j[0][1] + w[1] * j[1][1]),
    ]
}

/// Drift-kick-drift Boris step on `q̈ = 2B(q̇₂, −q̇₁)`: the velocity is turned
/// by `−2 atan(B dt)` with `B` taken at the half-step position.
fn boris_step(field: &MagneticField, pot: &VectorPotential, y: &[f64; 4], h: f64) -> [f64; 4] {
    let a0 = pot.eval([y[0], y[1]]);
    let v = [2.0 * (y[2] - a0[0]), 2.0 * (y[3] - a0[1])];
    let half = [y[0] + 0.5 * h * v[0], y[1] + 0.5 * h * v[1]];
    let t = field.eval(half) * h;
    let (c, s) = ((1.0 - t * t) / (1.0 + t * t), 2.0 * t / (1.0 + t * t));
    let v1 = [c * v[0] + s * v[1], -s * v[0] + c * v[1]];
    let q1 = [half[0] + 0.5 * h * v1[0], half[1] + 0.5 * h * v1[1]];
    let a1 = pot.eval(q1);
    [q1[0], q1[1], a1[0] + 0.5 * v1[0], a1[1] + 0.5 * v1[1]]
}

pub fn integrate_h(
    field: &MagneticField,
    pot: &VectorPotential,
    s0: PhaseState,
    t_end: f64,
    dt: f64,
    method: Integrator,
) -> Result<Trajectory, FlowError> {
    integrate_h_with(field, pot, s0, t_end, dt, method, 1)
}

/// Integrates `φ_H^t` up to `t_end`, recording every `stride`-th step (and the
/// final state). A negative `dt` runs the flow backward.
pub fn integrate_h_with(
    field: &MagneticField,
    pot: &VectorPotential,
    s0: PhaseState,
    t_end: f64,
    dt: f64,
    method: Integrator,
    stride: usize,
) -> Result<Trajectory, FlowError> {
    if !(dt.is_finite() && dt != 0.0) {
        return Err(FlowError::InvalidStep { dt });
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(FlowError::InvalidHorizon { t_end });
    }
    let limit = 0.1 / field.max_on_domain();
    if dt.abs() > limit * (1.0 + 1e-12) {
        return Err(FlowError::StepTooLarge { dt: dt.abs(), limit });
    }
    let stride = stride.max(1);
    let steps = (t_end / dt.abs()).round().max(1.0) as usize;
    let domain = field.domain_box();
    let rhs = |y: &[f64; 4]| hamilton_rhs(pot, y);

    let cap = steps / stride + 2;
    let mut traj = Trajectory {
        times: Vec::with_capacity(cap),
        states: Vec::with_capacity(cap),
        energy: Vec::with_capacity(cap),
        integrator: method,
        step: dt,
    };
    let mut y = s0.to_array();
    let record = |traj: &mut Trajectory, t: f64, y: &[f64; 4]| {
        let s = PhaseState::from_array(*y);
        traj.times.push(t);
        traj.energy.push(hamiltonian(pot, &s));
        traj.states.push(s);
    };
    record(&mut traj, 0.0, &y);
    for n in 1..=steps {
        let t = n as f64 * dt;
        let next = match method {
            Integrator::ImplicitMidpoint => midpoint_step(&rhs, &y, dt),
            Integrator::Composition4 => yoshida_step(&rhs, &y, dt),
            Integrator::Boris => Some(boris_step(field, pot, &y, dt)),
        };
        y = next.ok_or(FlowError::NonConvergent { t })?;
        if !domain.contains([y[0], y[1]]) || !y.iter().all(|v| v.is_finite()) {
            return Err(FlowError::LeftDomain { t, q: [y[0], y[1]] });
        }
        if n % stride == 0 || n == steps {
            record(&mut traj, t, &y);
        }
    }
    Ok(traj)
}
