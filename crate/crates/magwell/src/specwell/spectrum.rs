use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::BandLdl;
use super::grid::{Grid1, Grid2};
use super::lanczos::{self, norm};
use super::laplacian::MagneticLaplacian;
use super::weyl::WeylOperator;
use super::SpecError;

/// Residual bound `‖Mv − λv‖ ≤ RESIDUAL_BOUND·‖v‖` for returned pairs.
pub const RESIDUAL_BOUND: f64 = 1e-8;
/// Lanczos convergence tolerance relative to the largest Ritz value.
pub const LANCZOS_TOL: f64 = 1e-10;
/// Iteration cap per requested eigenvalue.
pub const ITERATIONS_PER_EIGENVALUE: usize = 50;
/// Floor of the iteration cap, for small `k` next to clustered spectra
/// (edge states crowding a Landau level).
pub const MIN_ITERATIONS: usize = 300;
/// Refinement factor of the grid used for the discretization estimate.
pub const REFINEMENT: f64 = 1.5;
/// Safety factor on the two-grid Richardson estimate (grid convergence
/// index); the observed order is not verified with only two grids.
pub const SAFETY_FACTOR: f64 = 3.0;
/// The shift sits at this fraction of `ħ·min B`, below `λ₁` by the
/// diamagnetic inequality.
pub const SHIFT_FRACTION: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    MagneticLaplacian2d,
    Weyl1d,
}

/// A Hermitian operator on a finite grid.
#[derive(Debug, Clone)]
pub enum DiscreteOperator {
    MagneticLaplacian2d(MagneticLaplacian),
    Weyl1d(WeylOperator),
}

impl DiscreteOperator {
    pub fn kind(&self) -> OperatorKind {
        match self {
            DiscreteOperator::MagneticLaplacian2d(_) => OperatorKind::MagneticLaplacian2d,
            DiscreteOperator::Weyl1d(_) => OperatorKind::Weyl1d,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DiscreteOperator::MagneticLaplacian2d(op) => op.dim(),
            DiscreteOperator::Weyl1d(op) => op.dim(),
        }
    }

    pub fn hbar(&self) -> f64 {
        match self {
            DiscreteOperator::MagneticLaplacian2d(op) => op.hbar(),
            DiscreteOperator::Weyl1d(op) => op.hbar(),
        }
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        match self {
            DiscreteOperator::MagneticLaplacian2d(op) => op.apply(x, y),
            DiscreteOperator::Weyl1d(op) => op.apply(x, y),
        }
    }

    pub fn grid_info(&self) -> GridInfo {
        match self {
            DiscreteOperator::MagneticLaplacian2d(op) => GridInfo::Square(*op.grid()),
            DiscreteOperator::Weyl1d(op) => GridInfo::Line(*op.grid()),
        }
    }
}

impl From<MagneticLaplacian> for DiscreteOperator {
    fn from(op: MagneticLaplacian) -> Self {
        DiscreteOperator::MagneticLaplacian2d(op)
    }
}

impl From<WeylOperator> for DiscreteOperator {
    fn from(op: WeylOperator) -> Self {
        DiscreteOperator::Weyl1d(op)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridInfo {
    Square(Grid2),
    Line(Grid1),
}

/// Sorted eigenpairs with residuals and, when a refined grid was solved,
/// `3·|λ_j(n) − λ_j(1.5n)|/(1 − 1.5^{−order})` (two-grid Richardson
/// estimate of the error at `n` with a safety factor) as the discretization
/// error estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralResult {
    pub kind: OperatorKind,
    pub hbar: f64,
    pub grid: GridInfo,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
    pub residual_norms: Vec<f64>,
    pub discretization_error_estimate: Option<Vec<f64>>,
    pub iterations: usize,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Largest discretization estimate, or 0 when none was computed.
    pub fn max_discretization_error(&self) -> f64 {
        self.discretization_error_estimate
            .as_ref()
            .map_or(0.0, |e| e.iter().fold(0.0, |a, b| a.max(*b)))
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Solve again on a grid refined by [`REFINEMENT`] for the error estimate.
    pub refine: bool,
    pub keep_vectors: bool,
    /// Shift for shift-invert; defaults to `SHIFT_FRACTION·ħ·min B`.
    pub shift: Option<f64>,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            refine: true,
            keep_vectors: true,
            shift: None,
            seed: 0x5eed,
        }
    }
}

/// The `k` smallest eigenpairs with default options.
pub fn lowest_eigenpairs(op: &DiscreteOperator, k: usize) -> Result<SpectralResult, SpecError> {
    lowest_eigenpairs_with(op, k, &EigenOptions::default())
}

pub fn lowest_eigenpairs_with(op: &DiscreteOperator, k: usize, opts: &EigenOptions) -> Result<SpectralResult, SpecError> {
    if k == 0 || k > op.dim() {
        return Err(SpecError::InvalidCount { k, dim: op.dim() });
    }
    match op {
        DiscreteOperator::Weyl1d(w) => w.lowest(k, opts.keep_vectors),
        DiscreteOperator::MagneticLaplacian2d(lap) => {
            let mut result = laplacian_lowest(lap, k, opts)?;
            if opts.refine {
                let n_fine = (lap.grid().n as f64 * REFINEMENT).round() as usize;
                let fine = lap.regrid(n_fine)?;
                let fine_opts = EigenOptions {
                    refine: false,
                    keep_vectors: false,
                    ..*opts
                };
                let fine_result = laplacian_lowest(&fine, k, &fine_opts)?;
                // With error ∝ n^{−order} the coarse error is the difference
                // divided by 1 − (n/n_fine)^order.
                let ratio = lap.grid().n as f64 / n_fine as f64;
                let richardson = SAFETY_FACTOR / (1.0 - ratio.powi(lap.options().order as i32));
                result.discretization_error_estimate = Some(
                    result
                        .eigenvalues
                        .iter()
                        .zip(&fine_result.eigenvalues)
                        .map(|(a, b)| richardson * (a - b).abs())
                        .collect(),
                );
            }
            Ok(result)
        }
    }
}

fn default_shift(lap: &MagneticLaplacian) -> f64 {
    SHIFT_FRACTION * lap.hbar() * lap.b_floor()
}

/// Factors `H − shift`, lowering the shift until the factorization is
/// positive definite.
fn positive_factor(lap: &MagneticLaplacian, shift: f64) -> Result<(BandLdl, f64), SpecError> {
    let mut s = shift;
    for _ in 0..8 {
        match BandLdl::factor(lap.lower_band(s)) {
            Ok(f) if f.negative_count() == 0 => return Ok((f, s)),
            _ => s = if s > 0.0 { 0.5 * s } else { s - lap.hbar() * lap.b_floor() },
        }
    }
    Err(SpecError::SingularShift { shift })
}

fn laplacian_lowest(lap: &MagneticLaplacian, k: usize, opts: &EigenOptions) -> Result<SpectralResult, SpecError> {
    let (factor, shift) = positive_factor(lap, opts.shift.unwrap_or_else(|| default_shift(lap)))?;
    let dim = lap.dim();
    let max_iter = (ITERATIONS_PER_EIGENVALUE * k).max(MIN_ITERATIONS);
    let out = lanczos::largest(
        |x| {
            let mut y = x.to_vec();
            factor.solve_in_place(&mut y);
            y
        },
        dim,
        k,
        max_iter,
        LANCZOS_TOL * 1e-2,
        opts.seed,
    );
    // θ = 1/(λ − shift), so the largest θ are the smallest λ.
    let mut pairs: Vec<(f64, Vec<Complex64>)> = out
        .values
        .iter()
        .zip(out.vectors)
        .map(|(t, v)| (shift + 1.0 / t, v))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut residual_norms = Vec::with_capacity(k);
    let mut scratch = vec![Complex64::new(0.0, 0.0); dim];
    for (lambda, v) in &pairs {
        lap.apply(v, &mut scratch);
        for (s, x) in scratch.iter_mut().zip(v) {
            *s -= x * *lambda;
        }
        residual_norms.push(norm(&scratch) / norm(v));
    }
    let worst = residual_norms.iter().fold(0.0f64, |a, b| a.max(*b));
    if !out.converged || worst > RESIDUAL_BOUND || pairs.len() < k {
        return Err(SpecError::NonConvergent {
            iterations: out.iterations,
            worst_residual: worst,
        });
    }
    let eigenvalues = pairs.iter().map(|p| p.0).collect();
    let eigenvectors = opts.keep_vectors.then(|| pairs.into_iter().map(|p| p.1).collect());
    Ok(SpectralResult {
        kind: OperatorKind::MagneticLaplacian2d,
        hbar: lap.hbar(),
        grid: GridInfo::Square(*lap.grid()),
        eigenvalues,
        eigenvectors,
        residual_norms,
        discretization_error_estimate: None,
        iterations: out.iterations,
    })
}

/// Number of eigenvalues below `threshold`, from the inertia of
/// `H − threshold` (no eigenvectors needed).
pub fn inertia_count(op: &DiscreteOperator, threshold: f64) -> Result<usize, SpecError> {
    match op {
        DiscreteOperator::MagneticLaplacian2d(lap) => {
            let f = BandLdl::factor(lap.lower_band(threshold))?;
            Ok(f.negative_count())
        }
        DiscreteOperator::Weyl1d(w) => Ok(w.eigenvalues().iter().filter(|v| **v < threshold).count()),
    }
}

/// Every eigenpair below `upper`: the count comes from [`inertia_count`],
/// the pairs from shift-invert Lanczos.
pub fn eigenpairs_below(op: &DiscreteOperator, upper: f64, opts: &EigenOptions) -> Result<SpectralResult, SpecError> {
    let k = inertia_count(op, upper)?;
    if k == 0 {
        return Ok(SpectralResult {
            kind: op.kind(),
            hbar: op.hbar(),
            grid: op.grid_info(),
            eigenvalues: Vec::new(),
            eigenvectors: opts.keep_vectors.then(Vec::new),
            residual_norms: Vec::new(),
            discretization_error_estimate: None,
            iterations: 0,
        });
    }
    lowest_eigenpairs_with(op, k, opts)
}
