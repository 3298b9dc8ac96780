use serde::{Deserialize, Serialize};

use super::integrate::Trajectory;
use crate::fieldlab::{hamiltonian, MagneticField, PhaseState, Vec2, VectorPotential};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidingRecord {
    pub center: Vec2,
    pub radius: f64,
    pub action: f64,
    pub field_at_center: f64,
}

/// `c = q + J q̇ / (2B(q))` with `J(v) = (v₂, −v₁)`, radius `|q̇|/(2B)` and
/// action `H/B(c)`. For constant `B` the centre is exact.
pub fn guiding_center(field: &MagneticField, pot: &VectorPotential, s: &PhaseState) -> GuidingRecord {
    let a = pot.eval(s.q);
    let v = [2.0 * (s.p[0] - a[0]), 2.0 * (s.p[1] - a[1])];
    let b = field.eval(s.q);
    let center = [s.q[0] + v[1] / (2.0 * b), s.q[1] - v[0] / (2.0 * b)];
    let field_at_center = field.eval(center);
    GuidingRecord {
        center,
        radius: v[0].hypot(v[1]) / (2.0 * b.abs()),
        action: hamiltonian(pot, s) / field_at_center,
        field_at_center,
    }
}

/// `max_t |B(c(t)) − B(c(0))|` along a trajectory.
pub fn level_set_deviation(field: &MagneticField, pot: &VectorPotential, traj: &Trajectory) -> f64 {
    let b0 = guiding_center(field, pot, &traj.states[0]).field_at_center;
    traj.states
        .iter()
        .map(|s| (guiding_center(field, pot, s).field_at_center - b0).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorEvent {
    pub time: f64,
    pub center: Vec2,
}

/// Turning points of the guiding-centre drift: sign changes of the
/// cyclotron-averaged drift velocity projected on the initial drift
/// direction. Drifts slower than `1e−8` count as no motion.
pub fn mirror_points(field: &MagneticField, pot: &VectorPotential, traj: &Trajectory) -> Vec<MirrorEvent> {
    let n = traj.len();
    if n < 3 {
        return Vec::new();
    }
    let dt = (traj.times[n - 1] - traj.times[0]) / (n - 1) as f64;
    let centers: Vec<Vec2> = traj
        .states
        .iter()
        .map(|s| guiding_center(field, pot, s).center)
        .collect();
    // One cyclotron period is π/B; average over it with a running window.
    let b_ref = field.eval(centers[0]);
    let window = ((std::f64::consts::PI / b_ref.abs()) / dt.abs()).round().max(1.0) as usize;
    if n <= 2 * window + 2 {
        return Vec::new();
    }
    let mut prefix = vec![[0.0; 2]; n + 1];
    for (i, c) in centers.iter().enumerate() {
        prefix[i + 1] = [prefix[i][0] + c[0], prefix[i][1] + c[1]];
    }
    let smooth: Vec<Vec2> = (0..=n - window)
        .map(|i| {
            let w = window as f64;
            [(prefix[i + window][0] - prefix[i][0]) / w, (prefix[i + window][1] - prefix[i][1]) / w]
        })
        .collect();
    let vel: Vec<Vec2> = smooth
        .windows(window + 1)
        .map(|w| {
            let span = window as f64 * dt;
            [(w[window][0] - w[0][0]) / span, (w[window][1] - w[0][1]) / span]
        })
        .collect();
    let speed_max = vel.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
    if speed_max < 1e-8 {
        return Vec::new();
    }
    let dir = match vel.iter().find(|v| v[0].hypot(v[1]) > 0.1 * speed_max) {
        Some(v) => {
            let norm = v[0].hypot(v[1]);
            [v[0] / norm, v[1] / norm]
        }
        None => return Vec::new(),
    };
    let threshold = 1e-3 * speed_max;
    let mut events = Vec::new();
    let mut sign = 0.0f64;
    for (i, v) in vel.iter().enumerate() {
        let proj = v[0] * dir[0] + v[1] * dir[1];
        if proj.abs() < threshold {
            continue;
        }
        let s = proj.signum();
        if sign != 0.0 && s != sign {
            // Index in the raw series at the centre of both averaging windows.
            let k = (i + window).min(n - 1);
            events.push(MirrorEvent {
                time: traj.times[k],
                center: centers[k],
            });
        }
        sign = s;
    }
    events
}
