use std::f64::consts::PI;

use num_complex::Complex64;

use super::grid::Grid2;
use super::spectrum::SpectralResult;
use super::SpecError;
use crate::fieldlab::{MagneticField, Vec2};
use crate::numeric::{gauss_legendre, monotone_root};

/// Number of eigenvalues `≤ threshold`. The threshold must lie below the
/// largest computed eigenvalue unless the result holds every eigenvalue up
/// to it (as [`super::eigenpairs_below`] guarantees).
pub fn counting_function(result: &SpectralResult, threshold: f64) -> usize {
    result.eigenvalues.iter().filter(|v| **v <= threshold).count()
}

/// `Σ |ψ|²` over nodes with `B(q) > threshold`, for `Σ|ψ|² = 1`.
pub fn localization_profile(
    eigvec: &[Complex64],
    grid: &Grid2,
    field: &MagneticField,
    threshold: f64,
) -> Result<f64, SpecError> {
    if eigvec.len() != grid.len() {
        return Err(SpecError::DimensionMismatch {
            expected: grid.len(),
            found: eigvec.len(),
        });
    }
    let total: f64 = eigvec.iter().map(|c| c.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(SpecError::NotNormalized { norm_sq: total });
    }
    Ok(eigvec
        .iter()
        .enumerate()
        .filter(|(i, _)| field.eval(grid.point(*i)) > threshold)
        .map(|(_, c)| c.norm_sqr())
        .sum())
}

/// Sorted consecutive differences of the eigenvalues inside `[lo, hi]`.
pub fn gap_statistics(result: &SpectralResult, window: (f64, f64)) -> Vec<f64> {
    let mut inside: Vec<f64> = result
        .eigenvalues
        .iter()
        .copied()
        .filter(|v| *v >= window.0 && *v <= window.1)
        .collect();
    inside.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = inside.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_by(f64::total_cmp);
    gaps
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Angles and radial nodes of [`weighted_sublevel_area`].
const POLAR_ANGLES: usize = 256;
const RADIAL_NODES: usize = 24;

/// `∬_{B ≤ level} B dq` for a sublevel set star-shaped about `center`, by
/// the trapezoidal rule in angle and Gauss–Legendre in radius. `max_radius`
/// bounds the radial search.
pub fn weighted_sublevel_area(field: &MagneticField, center: Vec2, level: f64, max_radius: f64) -> Result<f64, SpecError> {
    if field.eval(center) > level {
        return Ok(0.0);
    }
    let (nodes, weights) = gauss_legendre(RADIAL_NODES);
    let mut total = 0.0;
    let mut guess = 0.5 * max_radius;
    for a in 0..POLAR_ANGLES {
        let theta = 2.0 * PI * a as f64 / POLAR_ANGLES as f64;
        let dir = [theta.cos(), theta.sin()];
        let along = |r: f64| -> (f64, f64) {
            let q = [center[0] + r * dir[0], center[1] + r * dir[1]];
            let g = field.grad(q);
            (field.eval(q) - level, g[0] * dir[0] + g[1] * dir[1])
        };
        let radius = monotone_root(along, 0.0, max_radius, guess).ok_or(SpecError::NotStarShaped { angle: theta })?;
        guess = radius;
        let radial: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(t, w)| {
                let r = 0.5 * radius * (t + 1.0);
                w * field.eval([center[0] + r * dir[0], center[1] + r * dir[1]]) * r
            })
            .sum::<f64>()
            * 0.5
            * radius;
        total += radial;
    }
    Ok(total * 2.0 * PI / POLAR_ANGLES as f64)
}
