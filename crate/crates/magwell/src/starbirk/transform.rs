use std::collections::BTreeMap;

use num_complex::Complex64;

use super::hamiltonian::BaseMap;
use super::jet::binomial;
use super::series::{FormalSeries, SlowJet};
use super::StarError;
use crate::fieldlab::{PhaseState, Vec2};
use crate::poly::SparsePoly;
use crate::symflow::{yoshida_step, FlowError, NormalChart, NormalPoint, SlowHamiltonian, SLOW_ORIENTATION};

/// Classical (`ħ⁰`) part of a series as a real polynomial in
/// `(x₁, ξ₁, δx₂, δξ₂)`, expanding `z^α z̄^β = (x₁ + iξ₁)^α (x₁ − iξ₁)^β`.
pub fn classical_polynomial(s: &FormalSeries) -> SparsePoly {
    let mut acc: BTreeMap<[u8; 4], Complex64> = BTreeMap::new();
    let i = Complex64::new(0.0, 1.0);
    for (m, c) in s.terms() {
        if m.hbar != 0 {
            continue;
        }
        let (a, b) = (m.alpha as usize, m.beta as usize);
        for p in 0..=a {
            for r in 0..=b {
                // x^{p} (iξ)^{a−p} from the first factor, x^{r} (−iξ)^{b−r} from the second.
                let w = binomial(a, p) * binomial(b, r);
                let phase = i.powu((a - p) as u32) * (-i).powu((b - r) as u32);
                let key = [(p + r) as u8, (a + b - p - r) as u8, m.slow[0], m.slow[1]];
                *acc.entry(key).or_insert(Complex64::new(0.0, 0.0)) += c * phase * w;
            }
        }
    }
    let mut poly = SparsePoly::new(4);
    let scale = acc.values().map(|c| c.norm()).fold(0.0, f64::max);
    for (e, c) in acc {
        if c.re.abs() > 1e-15 * scale {
            poly.add_term(&e, c.re);
        }
    }
    poly
}

fn jet_polynomial(j: &SlowJet) -> SparsePoly {
    let mut poly = SparsePoly::new(2);
    for (g, c) in j.terms() {
        poly.add_term(&[g[0] as u8, g[1] as u8], c.re);
    }
    poly
}

/// Numerically evaluable truncated normal-form map
/// `Φ_N = Φ̃ ∘ φ_{χ₁} ∘ … ∘ φ_{τ₃} ∘ … ∘ φ_{τ_N}`, each `φ` the time-one
/// flow of the classical part of a generator.
#[derive(Debug, Clone)]
pub struct TruncatedTransform {
    base: BaseMap,
    generators: Vec<SparsePoly>,
    order: usize,
    substeps: usize,
}

/// Time-one flows are integrated with this many order-4 composition steps.
pub const FLOW_SUBSTEPS: usize = 16;

impl TruncatedTransform {
    pub fn new(base: BaseMap, generators: Vec<SparsePoly>, order: usize) -> Self {
        TruncatedTransform {
            base,
            generators,
            order,
            substeps: FLOW_SUBSTEPS,
        }
    }

    pub fn base(&self) -> &BaseMap {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    fn flow(&self, g: &SparsePoly, y: [f64; 4], time: f64) -> Result<[f64; 4], StarError> {
        let rhs = |v: &[f64; 4]| {
            let (_, d) = g.eval_grad(v);
            [d[1], -d[0], SLOW_ORIENTATION * d[3], -SLOW_ORIENTATION * d[2]]
        };
        let h = time / self.substeps as f64;
        let mut y = y;
        for _ in 0..self.substeps {
            y = yoshida_step(&rhs, &y, h).ok_or(StarError::FlowEscaped)?;
        }
        Ok(y)
    }

    fn to_local(&self, z: &NormalPoint) -> [f64; 4] {
        let b = self.base.basepoint();
        [z.z1[0], z.z1[1], z.z2[0] - b[0], z.z2[1] - b[1]]
    }

    fn from_local(&self, y: [f64; 4]) -> NormalPoint {
        let b = self.base.basepoint();
        NormalPoint {
            z1: [y[0], y[1]],
            z2: [y[2] + b[0], y[3] + b[1]],
        }
    }

    /// Normal coordinates after the generator flows, before [`BaseMap`].
    pub fn pre_base(&self, z: &NormalPoint) -> Result<NormalPoint, StarError> {
        let mut y = self.to_local(z);
        for g in self.generators.iter().rev() {
            y = self.flow(g, y, 1.0)?;
        }
        Ok(self.from_local(y))
    }

    pub fn forward(&self, z: &NormalPoint) -> Result<PhaseState, StarError> {
        self.base.forward(&self.pre_base(z)?)
    }

    pub fn inverse(&self, s: &PhaseState) -> Result<NormalPoint, StarError> {
        let mut y = self.to_local(&self.base.inverse(s)?);
        for g in &self.generators {
            y = self.flow(g, y, -1.0)?;
        }
        Ok(self.from_local(y))
    }
}

impl NormalChart for TruncatedTransform {
    fn to_phase(&self, z: &NormalPoint) -> Result<PhaseState, FlowError> {
        self.forward(z).map_err(|e| FlowError::Transform(e.to_string()))
    }

    fn from_phase(&self, s: &PhaseState) -> Result<NormalPoint, FlowError> {
        self.inverse(s).map_err(|e| FlowError::Transform(e.to_string()))
    }
}

pub(crate) fn generator_polynomials(gens: &[&FormalSeries]) -> Vec<SparsePoly> {
    gens.iter()
        .map(|g| classical_polynomial(g))
        .filter(|p| !p.is_empty())
        .collect()
}

/// `K_N(I, z₂) = Σ_{2m ≤ N} c_{0,m}(z₂ − z₂⁰) I^m`.
#[derive(Debug, Clone)]
pub struct ClassicalNormalForm {
    basepoint: Vec2,
    coeffs: Vec<SparsePoly>,
    slow_radius: f64,
}

impl ClassicalNormalForm {
    pub fn new(basepoint: Vec2, jets: &[SlowJet], order: usize, slow_radius: f64) -> Self {
        let coeffs = jets
            .iter()
            .enumerate()
            .map(|(m, j)| if 2 * m <= order { jet_polynomial(j) } else { SparsePoly::new(2) })
            .collect();
        ClassicalNormalForm {
            basepoint,
            coeffs,
            slow_radius,
        }
    }

    pub fn basepoint(&self) -> Vec2 {
        self.basepoint
    }

    pub fn value(&self, action: f64, z2: Vec2) -> f64 {
        self.k_and_derivatives(action, z2)[0]
    }
}

impl SlowHamiltonian for ClassicalNormalForm {
    fn k_and_derivatives(&self, action: f64, z2: Vec2) -> [f64; 4] {
        let d = [z2[0] - self.basepoint[0], z2[1] - self.basepoint[1]];
        let mut out = [0.0; 4];
        // `pow` is I^m and `lower` is I^{m−1}.
        let (mut pow, mut lower) = (1.0, 0.0);
        for (m, c) in self.coeffs.iter().enumerate() {
            if !c.is_empty() {
                let (v, g) = c.eval_grad(&d);
                out[0] += v * pow;
                out[1] += m as f64 * v * lower;
                out[2] += g[0] * pow;
                out[3] += g[1] * pow;
            }
            lower = pow;
            pow *= action;
        }
        out
    }

    fn in_domain(&self, z2: Vec2) -> bool {
        let d = [z2[0] - self.basepoint[0], z2[1] - self.basepoint[1]];
        d[0].hypot(d[1]) <= self.slow_radius
    }
}
