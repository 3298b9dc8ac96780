//! Quantum side: the magnetic Laplacian `(−iħ∇ − A)²` on a Dirichlet grid,
//! shift-invert Lanczos on a banded `LDLᴴ` factorization, the 1D Weyl
//! quantizer for the effective band operator, and counting, localization
//! and gap diagnostics.

mod analysis;
mod banded;
mod grid;
mod lanczos;
mod laplacian;
mod spectrum;
mod weyl;

use thiserror::Error;

pub use analysis::{counting_function, gap_statistics, localization_profile, mean, weighted_sublevel_area};
pub use banded::{BandLdl, BandMatrix};
pub use grid::{Grid1, Grid2};
pub use laplacian::{second_difference_weights, LaplacianOptions, MagneticLaplacian, LINK_QUADRATURE_NODES};
pub use spectrum::{
    eigenpairs_below, inertia_count, lowest_eigenpairs, lowest_eigenpairs_with, DiscreteOperator, EigenOptions,
    GridInfo, OperatorKind, SpectralResult, ITERATIONS_PER_EIGENVALUE, LANCZOS_TOL, MIN_ITERATIONS, REFINEMENT, RESIDUAL_BOUND,
    SAFETY_FACTOR, SHIFT_FRACTION,
};
pub use weyl::{weyl_quantize_1d, WeylOperator};

use crate::fieldlab::{FieldError, MagneticField, Rect, VectorPotential};

/// Smallest number of interior nodes per side.
pub const MIN_GRID: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("ħ must be positive and finite, got {0}")]
    InvalidHbar(f64),
    #[error("grid has {n} nodes per side, at least {min} are required")]
    GridTooSmall { n: usize, min: usize },
    #[error("stencil order {0} is not one of 2, 4, 6, 8")]
    UnsupportedOrder(usize),
    #[error("box too small: well region comes within {distance:.3e} of the boundary, margin {required:.3e} required")]
    BoxTooSmall { distance: f64, required: f64 },
    #[error("zero pivot at row {index} of the shifted factorization")]
    SingularPivot { index: usize },
    #[error("no positive definite shift found below {shift}")]
    SingularShift { shift: f64 },
    #[error("Lanczos did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    NonConvergent { iterations: usize, worst_residual: f64 },
    #[error("requested {k} eigenpairs of a {dim}-dimensional operator")]
    InvalidCount { k: usize, dim: usize },
    #[error("symbol aliased: its minimum on the phase-space boundary is {boundary_min}, below the cap {cap}")]
    Aliasing { boundary_min: f64, cap: f64 },
    #[error("vector has length {found}, grid has {expected} nodes")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("eigenvector is not normalized (|ψ|² sums to {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("sublevel set is not star-shaped along angle {angle}")]
    NotStarShaped { angle: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// [`MagneticLaplacian::assemble`] wrapped as a [`DiscreteOperator`].
pub fn assemble_magnetic_laplacian(
    field: &MagneticField,
    potential: &VectorPotential,
    hbar: f64,
    rect: Rect,
    n: usize,
    options: LaplacianOptions,
) -> Result<DiscreteOperator, SpecError> {
    Ok(MagneticLaplacian::assemble(field, potential, hbar, rect, n, options)?.into())
}
