use serde::{Deserialize, Serialize};

use super::integrate::Trajectory;
use super::normal::{NormalPoint, NormalTrajectory};
use super::FlowError;
use crate::fieldlab::PhaseState;

/// A symplectic change of variables between normal coordinates and `T*ℝ²`.
pub trait NormalChart {
    fn to_phase(&self, z: &NormalPoint) -> Result<PhaseState, FlowError>;
    fn from_phase(&self, s: &PhaseState) -> Result<NormalPoint, FlowError>;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Divergence {
    pub times: Vec<f64>,
    pub distance: Vec<f64>,
}

impl Divergence {
    /// `sup_t d(t)` over the grid.
    pub fn max(&self) -> f64 {
        self.distance.iter().copied().fold(0.0, f64::max)
    }

    pub fn at_end(&self) -> f64 {
        self.distance.last().copied().unwrap_or(0.0)
    }
}

/// `d(t) = |φ_H^t(s) − Φ(φ_K^t(Φ⁻¹ s))|` in the Euclidean norm of `ℝ⁴`,
/// sampled on the common time grid.
pub fn compare_flows<C: NormalChart + ?Sized>(
    traj_h: &Trajectory,
    traj_k: &NormalTrajectory,
    transform: &C,
) -> Result<Divergence, FlowError> {
    if traj_h.times.len() != traj_k.times.len() {
        return Err(FlowError::MismatchedGrids);
    }
    for (a, b) in traj_h.times.iter().zip(&traj_k.times) {
        if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
            return Err(FlowError::MismatchedGrids);
        }
    }
    let mut distance = Vec::with_capacity(traj_h.len());
    for (s, z) in traj_h.states.iter().zip(&traj_k.points) {
        distance.push(s.distance(&transform.to_phase(z)?));
    }
    Ok(Divergence {
        times: traj_h.times.clone(),
        distance,
    })
}
