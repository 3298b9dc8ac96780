use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::{Mat2, MagneticField, Rect, Vec2};
use super::FieldError;
use crate::numeric::adaptive_simpson;
use crate::poly::Poly2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gauge {
    /// `A = (0, ∫₀^{q₁} B(s, q₂) ds)`.
    LandauX,
    /// `A = (−B₀q₂/2, B₀q₁/2)`, constant fields only.
    Symmetric,
    Custom,
}

impl fmt::Display for Gauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gauge::LandauX => "landau_x",
            Gauge::Symmetric => "symmetric",
            Gauge::Custom => "custom",
        };
        f.write_str(s)
    }
}

type VecFn = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
type MatFn = Arc<dyn Fn(Vec2) -> Mat2 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Polynomial { a1: Poly2, a2: Poly2 },
    Quadrature(MagneticField),
    Custom { eval: VecFn, jac: MatFn },
}

/// Vector potential `A` with `∂₁A₂ − ∂₂A₁ = B`.
#[derive(Clone)]
pub struct VectorPotential {
    repr: Repr,
    gauge: Gauge,
}

impl fmt::Debug for VectorPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorPotential")
            .field("gauge", &self.gauge)
            .finish()
    }
}

const QUAD_TOL: f64 = 1e-13;
const CURL_TOL: f64 = 1e-9;
const VERIFY_GRID: usize = 21;

impl VectorPotential {
    pub fn build(field: &MagneticField, gauge: Gauge) -> Result<Self, FieldError> {
        let repr = match gauge {
            Gauge::LandauX => match field.polynomial_form() {
                Some(b) => Repr::Polynomial {
                    a1: Poly2::zero(),
                    a2: b.integral_x(),
                },
                None => Repr::Quadrature(field.clone()),
            },
            Gauge::Symmetric => {
                if !field.is_constant() {
                    return Err(FieldError::SymmetricGaugeNeedsConstant);
                }
                let b0 = field.eval([0.0, 0.0]);
                Repr::Polynomial {
                    a1: Poly2::from_terms(&[(0, 1, -0.5 * b0)]),
                    a2: Poly2::from_terms(&[(1, 0, 0.5 * b0)]),
                }
            }
            Gauge::Custom => return Err(FieldError::CustomGaugeNeedsClosure),
        };
        let pot = VectorPotential { repr, gauge };
        pot.verify(field)?;
        Ok(pot)
    }

    /// User-supplied potential; the curl condition is verified on a grid.
    pub fn custom<E, J>(field: &MagneticField, eval: E, jac: J) -> Result<Self, FieldError>
    where
        E: Fn(Vec2) -> Vec2 + Send + Sync + 'static,
        J: Fn(Vec2) -> Mat2 + Send + Sync + 'static,
    {
        let pot = VectorPotential {
            repr: Repr::Custom {
                eval: Arc::new(eval),
                jac: Arc::new(jac),
            },
            gauge: Gauge::Custom,
        };
        pot.verify(field)?;
        Ok(pot)
    }

    fn verify(&self, field: &MagneticField) -> Result<(), FieldError> {
        let worst = self.curl_residual(field, &field.domain_box(), VERIFY_GRID);
        if worst > CURL_TOL {
            return Err(FieldError::CurlMismatch { residual: worst });
        }
        Ok(())
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn eval(&self, q: Vec2) -> Vec2 {
        match &self.repr {
            Repr::Polynomial { a1, a2 } => [a1.eval(q[0], q[1]), a2.eval(q[0], q[1])],
            Repr::Quadrature(field) => {
                let a2 = adaptive_simpson(|s| field.eval([s, q[1]]), 0.0, q[0], QUAD_TOL)
                    .unwrap_or(f64::NAN);
                [0.0, a2]
            }
            Repr::Custom { eval, .. } => eval(q),
        }
    }

    /// `T_qA` with entries `[i][j] = ∂_j A_i`.
    pub fn jac(&self, q: Vec2) -> Mat2 {
        match &self.repr {
            Repr::Polynomial { a1, a2 } => [
                [a1.d_x().eval(q[0], q[1]), a1.d_y().eval(q[0], q[1])],
                [a2.d_x().eval(q[0], q[1]), a2.d_y().eval(q[0], q[1])],
            ],
            Repr::Quadrature(field) => {
                let dy = adaptive_simpson(|s| field.grad([s, q[1]])[1], 0.0, q[0], QUAD_TOL)
                    .unwrap_or(f64::NAN);
                [[0.0, 0.0], [field.eval(q), dy]]
            }
            Repr::Custom { jac, .. } => jac(q),
        }
    }

    /// Polynomial components `(A₁, A₂)` when available.
    pub fn polynomial_form(&self) -> Option<(Poly2, Poly2)> {
        match &self.repr {
            Repr::Polynomial { a1, a2 } => Some((a1.clone(), a2.clone())),
            _ => None,
        }
    }

    /// Largest `|∂₁A₂ − ∂₂A₁ − B| / (1+|B|)` over an `n × n` grid of `rect`.
    pub fn curl_residual(&self, field: &MagneticField, rect: &Rect, n: usize) -> f64 {
        rect.grid(n)
            .into_iter()
            .map(|q| {
                let j = self.jac(q);
                let b = field.eval(q);
                (j[1][0] - j[0][1] - b).abs() / (1.0 + b.abs())
            })
            .fold(0.0, f64::max)
    }
}
