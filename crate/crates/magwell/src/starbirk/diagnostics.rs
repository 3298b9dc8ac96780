use super::transform::{ClassicalNormalForm, TruncatedTransform};
use super::StarError;
use crate::fieldlab::{hamiltonian, Vec2};
use crate::numeric::loglog_slope;
use crate::symflow::{NormalPoint, SLOW_ORIENTATION};

/// `|H∘Φ_N − K_N|` at `z₁ = r(cos θ, sin θ)` for each `r`, slow point fixed.
pub fn ray_residuals(
    transform: &TruncatedTransform,
    normal_form: &ClassicalNormalForm,
    z2: Vec2,
    angle: f64,
    radii: &[f64],
) -> Result<Vec<f64>, StarError> {
    let pot = transform.base().potential();
    radii
        .iter()
        .map(|&r| {
            let z = NormalPoint {
                z1: [r * angle.cos(), r * angle.sin()],
                z2,
            };
            let s = transform.forward(&z)?;
            Ok((hamiltonian(pot, &s) - normal_form.value(r * r, z2)).abs())
        })
        .collect()
}

/// Log-log slope of the residuals against the radii.
pub fn decay_exponent(radii: &[f64], residuals: &[f64]) -> f64 {
    loglog_slope(radii, residuals)
}

/// Largest entry of `J P Jᵀ − P_phase`, with `J` the central-difference
/// Jacobian of `Φ_N` at `z`, `P` the Poisson matrix of the normal
/// coordinates and `P_phase` the canonical one on `T*ℝ²`.
pub fn symplecticity_defect(transform: &TruncatedTransform, z: &NormalPoint, step: f64) -> Result<f64, StarError> {
    let flat = [z.z1[0], z.z1[1], z.z2[0], z.z2[1]];
    let mut jac = [[0.0; 4]; 4];
    for k in 0..4 {
        let eval = |sign: f64| -> Result<[f64; 4], StarError> {
            let mut v = flat;
            v[k] += sign * step;
            let p = NormalPoint {
                z1: [v[0], v[1]],
                z2: [v[2], v[3]],
            };
            Ok(transform.forward(&p)?.to_array())
        };
        let (plus, minus) = (eval(1.0)?, eval(-1.0)?);
        for row in 0..4 {
            jac[row][k] = (plus[row] - minus[row]) / (2.0 * step);
        }
    }
    // ẋ₁ = ∂_{ξ₁}, ẋ₂ = σ ∂_{ξ₂} on the normal side; q̇ = ∂_p on the phase side.
    let mut normal = [[0.0; 4]; 4];
    normal[0][1] = 1.0;
    normal[1][0] = -1.0;
    normal[2][3] = SLOW_ORIENTATION;
    normal[3][2] = -SLOW_ORIENTATION;
    let mut phase = [[0.0; 4]; 4];
    phase[0][2] = 1.0;
    phase[1][3] = 1.0;
    phase[2][0] = -1.0;
    phase[3][1] = -1.0;
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let mut v = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    v += jac[i][a] * normal[a][b] * jac[j][b];
                }
            }
            worst = worst.max((v - phase[i][j]).abs());
        }
    }
    Ok(worst)
}
