//! Semiclassical Birkhoff normal form near the zero-energy surface.
//!
//! Symbols live in [`FormalSeries`]: polynomials in `z = x₁ + iξ₁`, `z̄`, `ħ`
//! with Taylor jets in the slow variables `z₂ = (x₂, ξ₂)` around a basepoint.
//! The product is the Weyl–Moyal product in all four variables, normalized by
//! `iħ⁻¹ ad_{|z₁|²} = {|z₁|², ·}` with the bracket
//! `{f, g} = ∂_{ξ₁}f ∂_{x₁}g − ∂_{x₁}f ∂_{ξ₁}g + σ(∂_{ξ₂}f ∂_{x₂}g − ∂_{x₂}f ∂_{ξ₂}g)`
//! and `σ = SLOW_ORIENTATION`. In complex notation
//! `{z z̄, z^α z̄^β} = 2i(β − α) z^α z̄^β` and `z ⋆ z̄ − z̄ ⋆ z = 2ħ`.
//!
//! The pipeline is [`BaseMap`] (an exactly symplectic chart in which
//! `z₁ = 0` is `Σ`), the Weyl symbol of the magnetic Laplacian in those
//! coordinates ([`series_from_hamiltonian`]), [`birkhoff`], and
//! [`reorder_star_powers`]. The classical parts of the generators give the
//! numerical map [`TruncatedTransform`].

mod birkhoff;
mod diagnostics;
mod hamiltonian;
mod jet;
mod reorder;
mod series;
mod transform;

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

pub use birkhoff::{action_commutator, birkhoff, nonresonant_size, BirkhoffOutput};
pub use diagnostics::{decay_exponent, ray_residuals, symplecticity_defect};
pub use hamiltonian::{series_from_hamiltonian, BaseMap};
pub use jet::{Tps, TpsBasis};
pub use reorder::{
    classical_coefficients, eigenvalue_expansion, expand_star_powers, reorder_star_powers, star_powers,
    EigenCoefficients, StarCoefficients,
};
pub use series::{Basis, FormalSeries, Monomial, SlowJet};
pub use transform::{classical_polynomial, ClassicalNormalForm, TruncatedTransform, FLOW_SUBSTEPS};

use crate::fieldlab::{FieldError, MagneticField, Vec2, VectorPotential};

/// Default truncation `(N₁, N₂)`.
pub const DEFAULT_ORDERS: (usize, usize) = (8, 6);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StarError {
    #[error("Taylor jets need a polynomial field")]
    JetUnavailable,
    #[error("B vanishes at the basepoint")]
    ZeroDivisor,
    #[error("fast truncation order {order} is below 2")]
    OrderTooLow { order: usize },
    #[error("requested order {requested} exceeds the computed order {available}")]
    OrderTooHigh { requested: usize, available: usize },
    #[error("series has terms of degree below 2 (size {residual:e})")]
    NotNormalized { residual: f64 },
    #[error("series is not resonant (non-resonant size {residual:e})")]
    NotResonant { residual: f64 },
    #[error("Hessian of B at the minimum is degenerate (det {det})")]
    DegenerateHessian { det: f64 },
    #[error("basepoint is not the minimum of B (B_min {expected}, leading coefficient {found})")]
    BasepointNotMinimum { expected: f64, found: f64 },
    #[error("generator flow left its domain")]
    FlowEscaped,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Everything the normal-form computation produces for one field.
#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub orders: (usize, usize),
    pub base: BaseMap,
    /// Weyl symbol of the magnetic Laplacian in base coordinates.
    pub hamiltonian: FormalSeries,
    pub birkhoff: BirkhoffOutput,
    /// Star-power coefficients of the full normal form.
    pub star: StarCoefficients,
}

impl NormalFormResult {
    /// Runs the pipeline at truncation `(N₁, N₂)` around `base_q`.
    pub fn compute(
        field: &MagneticField,
        potential: &VectorPotential,
        base_q: Vec2,
        orders: (usize, usize),
    ) -> Result<Self, StarError> {
        let base = BaseMap::new(field, potential, base_q)?;
        let hamiltonian = series_from_hamiltonian(&base, orders.0, orders.1)?;
        let birkhoff = birkhoff(&hamiltonian)?;
        let star = reorder_star_powers(&birkhoff.normal_form)?;
        Ok(NormalFormResult {
            orders,
            base,
            hamiltonian,
            birkhoff,
            star,
        })
    }

    /// Around the minimum of `B`, or the centre of the domain when `B` has
    /// no non-degenerate minimum (e.g. constant fields).
    pub fn at_default_basepoint(
        field: &MagneticField,
        potential: &VectorPotential,
        orders: (usize, usize),
    ) -> Result<Self, StarError> {
        let q = match field.minimum() {
            Ok(m) => m.point,
            Err(_) => {
                let d = field.domain_box();
                [0.5 * (d.min[0] + d.max[0]), 0.5 * (d.min[1] + d.max[1])]
            }
        };
        Self::compute(field, potential, q, orders)
    }

    pub fn kappa(&self) -> &FormalSeries {
        &self.birkhoff.kappa
    }

    pub fn normal_form(&self) -> &FormalSeries {
        &self.birkhoff.normal_form
    }

    pub fn basepoint(&self) -> Vec2 {
        self.base.basepoint()
    }

    pub fn eigen_coefficients(&self) -> Result<EigenCoefficients, StarError> {
        eigenvalue_expansion(&self.star, self.base.field())
    }

    fn check_order(&self, order: usize) -> Result<(), StarError> {
        if order > self.orders.0 {
            return Err(StarError::OrderTooHigh {
                requested: order,
                available: self.orders.0,
            });
        }
        if order < 2 {
            return Err(StarError::OrderTooLow { order });
        }
        Ok(())
    }

    /// `K_N`: the classical normal form truncated at fast degree `order`.
    /// Slow motion is trusted within `slow_radius` of the basepoint.
    pub fn classical_normal_form(&self, order: usize, slow_radius: f64) -> Result<ClassicalNormalForm, StarError> {
        self.check_order(order)?;
        Ok(ClassicalNormalForm::new(
            self.basepoint(),
            &classical_coefficients(self.normal_form()),
            order,
            slow_radius,
        ))
    }

    /// `Φ_N`: the degree-2 generators and `τ₃, …, τ_order`.
    pub fn build_transform(&self, order: usize) -> Result<TruncatedTransform, StarError> {
        self.check_order(order)?;
        let mut gens: Vec<&FormalSeries> = self.birkhoff.quadratic_generators.iter().collect();
        gens.extend(
            self.birkhoff
                .generators
                .iter()
                .filter(|(d, _)| *d <= order)
                .map(|(_, g)| g),
        );
        Ok(TruncatedTransform::new(
            self.base.clone(),
            transform::generator_polynomials(&gens),
            order,
        ))
    }

    /// Serializable summary with stable key order.
    pub fn report(&self) -> NormalFormReport {
        let series_map = |s: &FormalSeries| -> BTreeMap<String, [f64; 2]> {
            s.terms().map(|(m, c)| (m.to_string(), [c.re, c.im])).collect()
        };
        let jet_map = |j: &SlowJet| -> BTreeMap<String, f64> {
            reorder::jet_real(j)
                .into_iter()
                .map(|(g, c)| (format!("x{}xi{}", g[0], g[1]), c))
                .collect()
        };
        NormalFormReport {
            field: self.base.field().spec().map(|s| s.to_string()).unwrap_or_else(|| "custom".into()),
            fast_order: self.orders.0,
            slow_order: self.orders.1,
            basepoint: self.basepoint(),
            base_q: self.base.base_q(),
            kappa: series_map(self.kappa()),
            generators: self
                .birkhoff
                .generators
                .iter()
                .map(|(d, g)| (format!("tau{d}"), series_map(g)))
                .collect(),
            star_coeffs: self
                .star
                .coeffs
                .iter()
                .map(|((l, m), j)| (format!("l{l}m{m}"), jet_map(j)))
                .collect(),
            eig_coeffs: self.eigen_coefficients().ok(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormReport {
    pub field: String,
    pub fast_order: usize,
    pub slow_order: usize,
    pub basepoint: Vec2,
    pub base_q: Vec2,
    pub kappa: BTreeMap<String, [f64; 2]>,
    pub generators: BTreeMap<String, BTreeMap<String, [f64; 2]>>,
    pub star_coeffs: BTreeMap<String, BTreeMap<String, f64>>,
    pub eig_coeffs: Option<EigenCoefficients>,
}
