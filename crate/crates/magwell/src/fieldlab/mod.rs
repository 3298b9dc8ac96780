//! Magnetic field models, vector potentials, the zero-energy surface
//! `Σ = {p = A(q)}` with its symplectic normal frame, and the Darboux chart
//! of `Σ`.

mod chart;
mod field;
mod frame;
mod potential;

use thiserror::Error;

pub use chart::DarbouxChart;
pub use field::{Confinement, FieldMinimum, FieldSpec, MagneticField, Mat2, Rect, Vec2};
pub use frame::{
    frame_at, hamiltonian, omega, sigma_embed, sigma_tangents, transversal_hessian,
    transversal_hessian_with_step, PhaseState, SymplecticFrame, HESSIAN_STEP,
};
pub use potential::{Gauge, VectorPotential};

use crate::numeric::QuadratureError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field vanishes at ({}, {})", q[0], q[1])]
    Vanishing { q: Vec2 },
    #[error("field changes sign near ({}, {})", q[0], q[1])]
    SignChange { q: Vec2 },
    #[error("invalid field descriptor: {0}")]
    InvalidSpec(String),
    #[error("symmetric gauge requires a constant field")]
    SymmetricGaugeNeedsConstant,
    #[error("custom gauge must be built with VectorPotential::custom")]
    CustomGaugeNeedsClosure,
    #[error("curl of A differs from B by {residual:e}")]
    CurlMismatch { residual: f64 },
    #[error("quadrature failed: {0}")]
    Quadrature(QuadratureError),
    #[error("point ({}, {}) lies outside the field domain", q[0], q[1])]
    OutsideDomain { q: Vec2 },
    #[error("finite-difference step {step:e} is too small")]
    StepUnderflow { step: f64 },
    #[error("B has no non-degenerate minimum (best point ({}, {}))", q[0], q[1])]
    DegenerateMinimum { q: Vec2 },
}
