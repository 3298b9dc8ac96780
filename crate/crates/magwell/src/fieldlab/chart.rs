use super::field::{MagneticField, Vec2};
use super::FieldError;
use crate::numeric::{adaptive_simpson, monotone_root};
use crate::poly::Poly2;

const QUAD_TOL: f64 = 1e-12;

/// The chart `g(q) = (x₂, ξ₂) = (q₁, Ψ(q))`, `Ψ(q) = ∫₀^{q₂} B(q₁, s) ds`.
///
/// It pulls `dξ₂ ∧ dx₂` back to `B dq₁ ∧ dq₂`, i.e. it is a Darboux chart for
/// the form that `Σ = {p = A(q)}` inherits.
#[derive(Debug, Clone)]
pub struct DarbouxChart {
    field: MagneticField,
    psi: Option<Poly2>,
    psi_1: Option<Poly2>,
}

impl DarbouxChart {
    pub fn new(field: &MagneticField) -> Self {
        let psi = field.polynomial_form().map(|b| b.integral_y());
        let psi_1 = psi.as_ref().map(|p| p.d_x());
        DarbouxChart {
            field: field.clone(),
            psi,
            psi_1,
        }
    }

    pub fn field(&self) -> &MagneticField {
        &self.field
    }

    /// `Ψ` as a polynomial, for polynomial fields.
    pub fn psi_polynomial(&self) -> Option<&Poly2> {
        self.psi.as_ref()
    }

    pub fn psi(&self, q: Vec2) -> Result<f64, FieldError> {
        match &self.psi {
            Some(p) => Ok(p.eval(q[0], q[1])),
            None => adaptive_simpson(|s| self.field.eval([q[0], s]), 0.0, q[1], QUAD_TOL)
                .map_err(FieldError::Quadrature),
        }
    }

    /// `∂Ψ/∂q₁ = ∫₀^{q₂} ∂₁B(q₁, s) ds`.
    pub fn psi_q1(&self, q: Vec2) -> Result<f64, FieldError> {
        match &self.psi_1 {
            Some(p) => Ok(p.eval(q[0], q[1])),
            None => adaptive_simpson(|s| self.field.grad([q[0], s])[0], 0.0, q[1], QUAD_TOL)
                .map_err(FieldError::Quadrature),
        }
    }

    pub fn forward(&self, q: Vec2) -> Result<Vec2, FieldError> {
        Ok([q[0], self.psi(q)?])
    }

    /// Inverse by monotone root-finding in `q₂` inside the field's domain.
    pub fn inverse(&self, z2: Vec2) -> Result<Vec2, FieldError> {
        let dom = self.field.domain_box();
        let x = z2[0];
        if x < dom.min[0] || x > dom.max[0] {
            return Err(FieldError::OutsideDomain { q: [x, f64::NAN] });
        }
        let target = z2[1];
        let eval = |y: f64| -> (f64, f64) {
            let q = [x, y];
            let v = self.psi(q).unwrap_or(f64::NAN);
            (v - target, self.field.eval(q))
        };
        let guess = target / self.field.eval([x, 0.0]);
        let y = monotone_root(eval, dom.min[1], dom.max[1], guess)
            .ok_or(FieldError::OutsideDomain { q: [x, f64::NAN] })?;
        Ok([x, y])
    }

    /// Determinant of `dg`, which equals `B(q)`.
    pub fn jac_det(&self, q: Vec2) -> f64 {
        self.field.eval(q)
    }
}
