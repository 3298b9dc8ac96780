use std::sync::Arc;

use super::jet::{Tps, TpsBasis};
use super::series::{Basis, FormalSeries};
use super::StarError;
use crate::fieldlab::{DarbouxChart, MagneticField, PhaseState, Vec2, VectorPotential};
use crate::poly::Ring;
use crate::symflow::NormalPoint;

/// Exactly symplectic chart from `(x₁, ξ₁, x₂, ξ₂)` to `T*ℝ²`.
///
/// With `(x̃, ξ̃) = (ξ₁, −x₁)`, `a = √B⁰ x̃ − Ψ₁⁰ ξ̃/√B⁰`, `b = ξ̃/√B⁰`:
/// `q = g⁻¹(x₂ − b, ξ₂ + a)` and the kinetic momentum is
/// `π = (a + Ψ₁(q) b, B(q) b)`, `p = A(q) + π`. Here `Ψ₁ = ∂Ψ/∂q₁` and the
/// superscript `0` marks values at the basepoint. The plane `z₁ = 0` goes to
/// `Σ`, and at the basepoint the fast plane is normalized so that the
/// quadratic part of `H` is `B⁰ |z₁|²`.
#[derive(Debug, Clone)]
pub struct BaseMap {
    chart: DarbouxChart,
    potential: VectorPotential,
    base_q: Vec2,
    basepoint: Vec2,
    b0: f64,
    psi1_0: f64,
}

impl BaseMap {
    pub fn new(field: &MagneticField, potential: &VectorPotential, base_q: Vec2) -> Result<Self, StarError> {
        let chart = DarbouxChart::new(field);
        let basepoint = chart.forward(base_q)?;
        let b0 = field.eval(base_q);
        if b0 <= 0.0 {
            return Err(StarError::ZeroDivisor);
        }
        let psi1_0 = chart.psi_q1(base_q)?;
        Ok(BaseMap {
            chart,
            potential: potential.clone(),
            base_q,
            basepoint,
            b0,
            psi1_0,
        })
    }

    pub fn chart(&self) -> &DarbouxChart {
        &self.chart
    }

    pub fn field(&self) -> &MagneticField {
        self.chart.field()
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.potential
    }

    /// `q` of the basepoint.
    pub fn base_q(&self) -> Vec2 {
        self.base_q
    }

    /// `z₂⁰ = g(q⁰)`.
    pub fn basepoint(&self) -> Vec2 {
        self.basepoint
    }

    fn fast_pair(&self, z1: Vec2) -> (f64, f64) {
        let sb = self.b0.sqrt();
        let (xt, xit) = (z1[1], -z1[0]);
        (sb * xt - self.psi1_0 * xit / sb, xit / sb)
    }

    pub fn forward(&self, z: &NormalPoint) -> Result<PhaseState, StarError> {
        let (a, b) = self.fast_pair(z.z1);
        let q = self.chart.inverse([z.z2[0] - b, z.z2[1] + a])?;
        let psi1 = self.chart.psi_q1(q)?;
        let bq = self.field().eval(q);
        let pot = self.potential.eval(q);
        Ok(PhaseState::new(q, [pot[0] + a + psi1 * b, pot[1] + bq * b]))
    }

    pub fn inverse(&self, s: &PhaseState) -> Result<NormalPoint, StarError> {
        let pot = self.potential.eval(s.q);
        let pi = [s.p[0] - pot[0], s.p[1] - pot[1]];
        let b = pi[1] / self.field().eval(s.q);
        let a = pi[0] - self.chart.psi_q1(s.q)? * b;
        let g = self.chart.forward(s.q)?;
        let sb = self.b0.sqrt();
        let xit = sb * b;
        let xt = (a + self.psi1_0 * b) / sb;
        Ok(NormalPoint {
            z1: [-xit, xt],
            z2: [g[0] + b, g[1] - a],
        })
    }

    /// Jets of the kinetic momenta `π₁, π₂` as functions of
    /// `(x₁, ξ₁, δx₂, δξ₂)`. The inverse chart is expanded by Newton's
    /// method on power series, which needs `B` and `Ψ` as polynomials.
    pub fn kinetic_jets(&self, fast_order: usize, slow_order: usize) -> Result<[Tps; 2], StarError> {
        let field = self.field();
        let bpoly = field.polynomial_form().ok_or(StarError::JetUnavailable)?;
        let psi = self.chart.psi_polynomial().ok_or(StarError::JetUnavailable)?.clone();
        let psi1 = psi.d_x();
        let basis = TpsBasis::new(fast_order, slow_order);
        let var = |k| Tps::variable(&basis, k);
        let sb = self.b0.sqrt();
        let (xt, xit) = (var(1), var(0).scale(-1.0));
        let a = xt.scale(sb).add_ref(&xit.scale(-self.psi1_0 / sb));
        let b = xit.scale(1.0 / sb);
        let q1 = var(2).add_scalar(self.basepoint[0]).add_ref(&b.scale(-1.0));
        let target = a.add_ref(&var(3)).add_scalar(self.basepoint[1]);
        let mut q2 = Tps::constant(&basis, self.base_q[1]);
        let sweeps = 2 * (fast_order + slow_order) + 8;
        let mut settled = false;
        for _ in 0..sweeps {
            let resid = psi.eval_ring(&q1, &q2).sub(&target);
            let inv = bpoly
                .eval_ring(&q1, &q2)
                .recip()
                .ok_or(StarError::ZeroDivisor)?;
            let step = resid.mul_ref(&inv);
            q2 = q2.sub(&step);
            if step.max_abs() <= 1e-15 * (1.0 + q2.max_abs()) {
                settled = true;
                break;
            }
        }
        if !settled {
            return Err(StarError::JetUnavailable);
        }
        let t1 = a.add_ref(&psi1.eval_ring(&q1, &q2).mul_ref(&b));
        let t2 = bpoly.eval_ring(&q1, &q2).mul_ref(&b);
        Ok([t1, t2])
    }
}

/// Weyl symbol of `(−iħ∇ − A)²` in the coordinates of [`BaseMap`], as
/// `π₁ ⋆ π₁ + π₂ ⋆ π₂`, expanded to fast order `N₁` and slow order `N₂`
/// around the basepoint. Its `ħ⁰` part is `H ∘ Φ̃`.
pub fn series_from_hamiltonian(
    base: &BaseMap,
    fast_order: usize,
    slow_order: usize,
) -> Result<FormalSeries, StarError> {
    if fast_order < 2 {
        return Err(StarError::OrderTooLow { order: fast_order });
    }
    let basis = Basis::new(fast_order, slow_order);
    let [t1, t2] = base.kinetic_jets(fast_order - 1, slow_order)?;
    Ok(weyl_square_sum(&basis, &t1, &t2))
}

fn weyl_square_sum(basis: &Arc<Basis>, t1: &Tps, t2: &Tps) -> FormalSeries {
    let s1 = t1.to_series(basis);
    let s2 = t2.to_series(basis);
    s1.star(&s1).add(&s2.star(&s2))
}
