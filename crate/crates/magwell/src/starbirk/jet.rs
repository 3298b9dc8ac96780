use std::sync::Arc;

use num_complex::Complex64;

use super::series::{Basis, FormalSeries, Monomial};
use crate::poly::Ring;

/// Index set of a [`Tps`]: `(e₁, e₂, s₁, s₂)` exponents of
/// `(x₁, ξ₁, δx₂, δξ₂)` with `e₁ + e₂ ≤ F` and `s₁ + s₂ ≤ S`.
#[derive(Debug)]
pub struct TpsBasis {
    fast_order: usize,
    slow_order: usize,
    exps: Vec<[u8; 4]>,
    lookup: Vec<u32>,
}

impl TpsBasis {
    pub fn new(fast_order: usize, slow_order: usize) -> Arc<Self> {
        let (f, s) = (fast_order, slow_order);
        let mut exps = Vec::new();
        let mut lookup = vec![u32::MAX; (f + 1).pow(2) * (s + 1).pow(2)];
        for df in 0..=f {
            for e1 in (0..=df).rev() {
                for ds in 0..=s {
                    for s1 in (0..=ds).rev() {
                        let e = [e1, df - e1, s1, ds - s1];
                        lookup[Self::slot(f, s, e)] = exps.len() as u32;
                        exps.push([e[0] as u8, e[1] as u8, e[2] as u8, e[3] as u8]);
                    }
                }
            }
        }
        Arc::new(TpsBasis {
            fast_order,
            slow_order,
            exps,
            lookup,
        })
    }

    fn slot(f: usize, s: usize, e: [usize; 4]) -> usize {
        ((e[0] * (f + 1) + e[1]) * (s + 1) + e[2]) * (s + 1) + e[3]
    }

    fn index(&self, e: [usize; 4]) -> Option<usize> {
        if e[0] + e[1] > self.fast_order || e[2] + e[3] > self.slow_order {
            return None;
        }
        let i = self.lookup[Self::slot(self.fast_order, self.slow_order, e)];
        (i != u32::MAX).then_some(i as usize)
    }
}

/// Truncated real power series in `(x₁, ξ₁, δx₂, δξ₂)`.
#[derive(Debug, Clone)]
pub struct Tps {
    basis: Arc<TpsBasis>,
    coeffs: Vec<f64>,
}

impl Tps {
    pub fn zero(basis: &Arc<TpsBasis>) -> Self {
        Tps {
            basis: Arc::clone(basis),
            coeffs: vec![0.0; basis.exps.len()],
        }
    }

    pub fn constant(basis: &Arc<TpsBasis>, c: f64) -> Self {
        let mut t = Self::zero(basis);
        t.coeffs[0] = c;
        t
    }

    /// The coordinate function `k` (0: `x₁`, 1: `ξ₁`, 2: `δx₂`, 3: `δξ₂`).
    pub fn variable(basis: &Arc<TpsBasis>, k: usize) -> Self {
        let mut t = Self::zero(basis);
        let mut e = [0; 4];
        e[k] = 1;
        if let Some(i) = basis.index(e) {
            t.coeffs[i] = 1.0;
        }
        t
    }

    pub fn coeff(&self, e: [usize; 4]) -> f64 {
        self.basis.index(e).map_or(0.0, |i| self.coeffs[i])
    }

    pub fn constant_term(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn sub(&self, other: &Self) -> Self {
        Tps {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// `1/self` by Newton's iteration; `None` for a vanishing constant term.
    pub fn recip(&self) -> Option<Self> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return None;
        }
        let mut y = Tps::constant(&self.basis, 1.0 / c0);
        let mut correct = 1;
        while correct <= self.basis.fast_order + self.basis.slow_order {
            let corr = self.mul_ref(&y).scale(-1.0).add_scalar(2.0);
            y = y.mul_ref(&corr);
            correct *= 2;
        }
        Some(y)
    }

    /// Evaluates at `(x₁, ξ₁, δx₂, δξ₂)`.
    pub fn eval(&self, x: [f64; 4]) -> f64 {
        self.basis
            .exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, c)| {
                (0..4).fold(*c, |acc, k| acc * x[k].powi(e[k] as i32))
            })
            .sum()
    }

    /// Rewrites `x₁ = (z + z̄)/2`, `ξ₁ = (z − z̄)/(2i)` and collects into a
    /// [`FormalSeries`] without `ħ`.
    pub fn to_series(&self, basis: &Arc<Basis>) -> FormalSeries {
        let mut out = FormalSeries::zero(basis);
        for (e, &c) in self.basis.exps.iter().zip(&self.coeffs) {
            if c == 0.0 {
                continue;
            }
            let (e1, e2) = (e[0] as usize, e[1] as usize);
            let slow = [e[2] as usize, e[3] as usize];
            // x₁^{e1} ξ₁^{e2} = 2^{-e1} (−i/2)^{e2} Σ C(e1,p) C(e2,r) (−1)^{e2−r} z^{p+r} z̄^{e1+e2−p−r}
            let pre = Complex64::new(c * 0.5f64.powi(e1 as i32), 0.0)
                * Complex64::new(0.0, -0.5).powu(e2 as u32);
            for p in 0..=e1 {
                for r in 0..=e2 {
                    let sign = if (e2 - r) % 2 == 1 { -1.0 } else { 1.0 };
                    let w = binomial(e1, p) * binomial(e2, r) * sign;
                    let alpha = p + r;
                    let beta = e1 + e2 - alpha;
                    out.add_term(Monomial::new(alpha, beta, 0, slow), pre * w);
                }
            }
        }
        out
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Ring for Tps {
    fn scalar_like(&self, c: f64) -> Self {
        Tps::constant(&self.basis, c)
    }

    fn add_ref(&self, other: &Self) -> Self {
        Tps {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let basis = &self.basis;
        let mut out = vec![0.0; basis.exps.len()];
        let live_b: Vec<usize> = (0..other.coeffs.len()).filter(|&i| other.coeffs[i] != 0.0).collect();
        for (ia, &ca) in self.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let ea = basis.exps[ia];
            for &ib in &live_b {
                let eb = basis.exps[ib];
                let e = [
                    (ea[0] + eb[0]) as usize,
                    (ea[1] + eb[1]) as usize,
                    (ea[2] + eb[2]) as usize,
                    (ea[3] + eb[3]) as usize,
                ];
                if let Some(ir) = basis.index(e) {
                    out[ir] += ca * other.coeffs[ib];
                }
            }
        }
        Tps {
            basis: Arc::clone(basis),
            coeffs: out,
        }
    }

    fn add_scalar(&self, c: f64) -> Self {
        let mut t = self.clone();
        t.coeffs[0] += c;
        t
    }

    fn scale(&self, c: f64) -> Self {
        Tps {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }
}
