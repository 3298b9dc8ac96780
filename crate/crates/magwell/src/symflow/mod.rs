//! Classical dynamics of `H(q, p) = |p − A(q)|²`: time integration, guiding
//! centres, the flow of a normal form `K(|z₁|², z₂)` and the distance between
//! the two flows.

mod compare;
mod csv;
mod guiding;
mod integrate;
mod normal;

use thiserror::Error;

use crate::fieldlab::{FieldError, Vec2};

pub use compare::{compare_flows, Divergence, NormalChart};
pub use csv::{trajectory_csv, CSV_HEADER};
pub use guiding::{guiding_center, level_set_deviation, mirror_points, GuidingRecord, MirrorEvent};
pub use integrate::{
    integrate_h, integrate_h_with, midpoint_step, yoshida_step, Integrator, Trajectory,
    FIXED_POINT_TOL, MAX_FIXED_POINT_ITERS,
};
pub use normal::{integrate_k, NormalPoint, NormalTrajectory, SlowHamiltonian, SLOW_ORIENTATION};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("time step {dt:e} must be positive and finite")]
    InvalidStep { dt: f64 },
    #[error("final time {t_end} must be positive and finite")]
    InvalidHorizon { t_end: f64 },
    #[error("time step {dt:e} exceeds 0.1/max|B| = {limit:e}")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("implicit stage did not converge at t = {t}")]
    NonConvergent { t: f64 },
    #[error("trajectory left the domain at t = {t}, q = ({}, {})", q[0], q[1])]
    LeftDomain { t: f64, q: Vec2 },
    #[error("slow variables left the chart domain at t = {t}")]
    LeftChart { t: f64 },
    #[error("trajectories are sampled on different time grids")]
    MismatchedGrids,
    #[error("transform failed: {0}")]
    Transform(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}
