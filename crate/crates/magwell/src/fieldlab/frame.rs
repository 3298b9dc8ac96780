use serde::{Deserialize, Serialize};

use super::field::{Mat2, MagneticField, Vec2};
use super::potential::VectorPotential;
use super::FieldError;

/// Point `(q, p)` of `T*ℝ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub q: Vec2,
    pub p: Vec2,
}

impl PhaseState {
    pub fn new(q: Vec2, p: Vec2) -> Self {
        PhaseState { q, p }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.q[0], self.q[1], self.p[0], self.p[1]]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        PhaseState {
            q: [a[0], a[1]],
            p: [a[2], a[3]],
        }
    }

    pub fn distance(&self, other: &PhaseState) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(&b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }
}

/// Tangent vectors `u₁, v₁` at `j(q)`, laid out as `(Q₁, Q₂, P₁, P₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymplecticFrame {
    pub u1: [f64; 4],
    pub v1: [f64; 4],
}

/// `ω((Q,P),(Q',P')) = ⟨P,Q'⟩ − ⟨P',Q⟩`.
pub fn omega(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a[2] * b[0] + a[3] * b[1] - b[2] * a[0] - b[3] * a[1]
}

pub fn hamiltonian(pot: &VectorPotential, s: &PhaseState) -> f64 {
    let a = pot.eval(s.q);
    let d0 = s.p[0] - a[0];
    let d1 = s.p[1] - a[1];
    d0 * d0 + d1 * d1
}

/// `j(q) = (q, A(q))`, the point of `Σ = H⁻¹(0)` above `q`.
pub fn sigma_embed(pot: &VectorPotential, q: Vec2) -> PhaseState {
    PhaseState { q, p: pot.eval(q) }
}

/// `Tj(e_k) = (e_k, T_qA e_k)`, spanning the tangent plane of `Σ`.
pub fn sigma_tangents(pot: &VectorPotential, q: Vec2) -> [[f64; 4]; 2] {
    let j = pot.jac(q);
    [
        [1.0, 0.0, j[0][0], j[1][0]],
        [0.0, 1.0, j[0][1], j[1][1]],
    ]
}

/// `u₁ = (e₁, ᵗT_qA e₁)/√|B|`, `v₁ = (√|B|/B)(e₂, ᵗT_qA e₂)`.
pub fn frame_at(field: &MagneticField, pot: &VectorPotential, q: Vec2) -> SymplecticFrame {
    let b = field.eval(q);
    let j = pot.jac(q);
    let su = 1.0 / b.abs().sqrt();
    let sv = b.abs().sqrt() / b;
    SymplecticFrame {
        u1: [su, 0.0, su * j[0][0], su * j[0][1]],
        v1: [0.0, sv, sv * j[1][0], sv * j[1][1]],
    }
}

/// Default finite-difference step for [`transversal_hessian`].
pub const HESSIAN_STEP: f64 = 1e-4;

pub fn transversal_hessian(
    field: &MagneticField,
    pot: &VectorPotential,
    q: Vec2,
) -> Result<Mat2, FieldError> {
    transversal_hessian_with_step(field, pot, q, HESSIAN_STEP)
}

/// Second derivatives of `H` at `j(q)` along `u₁, v₁` by central differences.
pub fn transversal_hessian_with_step(
    field: &MagneticField,
    pot: &VectorPotential,
    q: Vec2,
    step: f64,
) -> Result<Mat2, FieldError> {
    let scale = 1.0 + q[0].abs().max(q[1].abs());
    if !(step > 1e-7 * scale) {
        return Err(FieldError::StepUnderflow { step });
    }
    let base = sigma_embed(pot, q).to_array();
    let frame = frame_at(field, pot, q);
    let dirs = [frame.u1, frame.v1];
    let h_at = |s: f64, a: usize, t: f64, b: usize| -> f64 {
        let mut z = base;
        for k in 0..4 {
            z[k] += s * dirs[a][k] + t * dirs[b][k];
        }
        hamiltonian(pot, &PhaseState::from_array(z))
    };
    let h0 = h_at(0.0, 0, 0.0, 0);
    let mut m = [[0.0; 2]; 2];
    for a in 0..2 {
        m[a][a] = (h_at(step, a, 0.0, a) - 2.0 * h0 + h_at(-step, a, 0.0, a)) / (step * step);
    }
    let mixed = (h_at(step, 0, step, 1) - h_at(step, 0, -step, 1) - h_at(-step, 0, step, 1)
        + h_at(-step, 0, -step, 1))
        / (4.0 * step * step);
    m[0][1] = mixed;
    m[1][0] = mixed;
    Ok(m)
}
