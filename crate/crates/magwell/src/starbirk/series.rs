use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::symflow::SLOW_ORIENTATION;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `z^α z̄^β ħ^l δx₂^{γ₁} δξ₂^{γ₂}` with `z = x₁ + iξ₁` and `δ` the offset
/// from the basepoint of the slow variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: u8,
    pub beta: u8,
    pub hbar: u8,
    pub slow: [u8; 2],
}

impl Monomial {
    pub fn new(alpha: usize, beta: usize, hbar: usize, slow: [usize; 2]) -> Self {
        Monomial {
            alpha: alpha as u8,
            beta: beta as u8,
            hbar: hbar as u8,
            slow: [slow[0] as u8, slow[1] as u8],
        }
    }

    /// `α + β + 2l`.
    pub fn fast_degree(&self) -> usize {
        self.alpha as usize + self.beta as usize + 2 * self.hbar as usize
    }

    pub fn slow_degree(&self) -> usize {
        self.slow[0] as usize + self.slow[1] as usize
    }

    /// In the kernel of `ad_{|z₁|²}`.
    pub fn is_resonant(&self) -> bool {
        self.alpha == self.beta
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "z{}zb{}h{}x{}xi{}",
            self.alpha, self.beta, self.hbar, self.slow[0], self.slow[1]
        )
    }
}

/// One `(a-slow, b-slow, result-slow, weight)` entry of a slow bidifferential
/// kernel.
type SlowTriple = (u16, u16, u16, f64);

/// Index set of a [`FormalSeries`]: fast part `α + β + 2l ≤ N₁`, slow part
/// `γ₁ + γ₂ ≤ N₂`. Shared between series through an [`Arc`].
#[derive(Debug)]
pub struct Basis {
    fast_order: usize,
    slow_order: usize,
    fast: Vec<[u8; 3]>,
    slow: Vec<[u8; 2]>,
    fast_lookup: Vec<u32>,
    slow_lookup: Vec<u32>,
    /// `slow_kernels[k][m]`: pairs contracted by `∂_{x₂}^k ∂_{ξ₂}^m` on the
    /// left and `∂_{ξ₂}^k ∂_{x₂}^m` on the right.
    slow_kernels: Vec<Vec<Vec<SlowTriple>>>,
}

const NONE: u32 = u32::MAX;

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

impl Basis {
    pub fn new(fast_order: usize, slow_order: usize) -> Arc<Self> {
        let n1 = fast_order;
        let mut fast = Vec::new();
        let dims = (n1 + 1, n1 + 1, n1 / 2 + 1);
        let mut fast_lookup = vec![NONE; dims.0 * dims.1 * dims.2];
        for deg in 0..=n1 {
            for l in 0..=deg / 2 {
                let ab = deg - 2 * l;
                for alpha in (0..=ab).rev() {
                    let beta = ab - alpha;
                    fast_lookup[(alpha * dims.1 + beta) * dims.2 + l] = fast.len() as u32;
                    fast.push([alpha as u8, beta as u8, l as u8]);
                }
            }
        }
        let n2 = slow_order;
        let mut slow = Vec::new();
        let mut slow_lookup = vec![NONE; (n2 + 1) * (n2 + 1)];
        for deg in 0..=n2 {
            for g1 in (0..=deg).rev() {
                slow_lookup[g1 * (n2 + 1) + deg - g1] = slow.len() as u32;
                slow.push([g1 as u8, (deg - g1) as u8]);
            }
        }
        // Adjoints of two slow functions reach k + m = N₁/2 + 1.
        let max_km = n1 / 2 + 1;
        let mut slow_kernels = vec![vec![Vec::new(); max_km + 1]; max_km + 1];
        for k in 0..=max_km {
            for m in 0..=max_km - k {
                let mut triples = Vec::new();
                for (ia, ga) in slow.iter().enumerate() {
                    let (a1, a2) = (ga[0] as usize, ga[1] as usize);
                    if a1 < k || a2 < m {
                        continue;
                    }
                    for (ib, gb) in slow.iter().enumerate() {
                        let (b1, b2) = (gb[0] as usize, gb[1] as usize);
                        if b2 < k || b1 < m {
                            continue;
                        }
                        let r1 = a1 - k + b1 - m;
                        let r2 = a2 - m + b2 - k;
                        if r1 + r2 > n2 {
                            continue;
                        }
                        let w = falling(a1, k) * falling(a2, m) * falling(b2, k) * falling(b1, m)
                            / (factorial(k) * factorial(m));
                        let ir = slow_lookup[r1 * (n2 + 1) + r2];
                        triples.push((ia as u16, ib as u16, ir as u16, w));
                    }
                }
                slow_kernels[k][m] = triples;
            }
        }
        Arc::new(Basis {
            fast_order,
            slow_order,
            fast,
            slow,
            fast_lookup,
            slow_lookup,
            slow_kernels,
        })
    }

    pub fn fast_order(&self) -> usize {
        self.fast_order
    }

    pub fn slow_order(&self) -> usize {
        self.slow_order
    }

    pub fn len(&self) -> usize {
        self.fast.len() * self.slow.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_fast(&self) -> usize {
        self.fast.len()
    }

    pub fn n_slow(&self) -> usize {
        self.slow.len()
    }

    pub fn fast_index(&self, alpha: usize, beta: usize, hbar: usize) -> Option<usize> {
        let n1 = self.fast_order;
        if alpha + beta + 2 * hbar > n1 {
            return None;
        }
        let idx = self.fast_lookup[(alpha * (n1 + 1) + beta) * (n1 / 2 + 1) + hbar];
        (idx != NONE).then_some(idx as usize)
    }

    pub fn slow_index(&self, g: [usize; 2]) -> Option<usize> {
        let n2 = self.slow_order;
        if g[0] + g[1] > n2 {
            return None;
        }
        Some(self.slow_lookup[g[0] * (n2 + 1) + g[1]] as usize)
    }

    pub fn index(&self, m: Monomial) -> Option<usize> {
        let f = self.fast_index(m.alpha as usize, m.beta as usize, m.hbar as usize)?;
        let s = self.slow_index([m.slow[0] as usize, m.slow[1] as usize])?;
        Some(f * self.slow.len() + s)
    }

    pub fn monomial(&self, idx: usize) -> Monomial {
        let f = self.fast[idx / self.slow.len()];
        let s = self.slow[idx % self.slow.len()];
        Monomial {
            alpha: f[0],
            beta: f[1],
            hbar: f[2],
            slow: s,
        }
    }

    pub fn fast_exponents(&self, f: usize) -> [usize; 3] {
        let e = self.fast[f];
        [e[0] as usize, e[1] as usize, e[2] as usize]
    }

    pub fn slow_exponents(&self, s: usize) -> [usize; 2] {
        let e = self.slow[s];
        [e[0] as usize, e[1] as usize]
    }

    fn fast_degree(&self, f: usize) -> usize {
        let e = self.fast[f];
        e[0] as usize + e[1] as usize + 2 * e[2] as usize
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    /// `a ⋆ b`.
    Product,
    /// `iħ⁻¹(a ⋆ b − b ⋆ a)`: odd orders only, doubled, one `ħ` removed.
    Adjoint,
}

/// Truncated formal series in `z, z̄, ħ` and the slow offsets, with complex
/// coefficients over a shared [`Basis`].
#[derive(Clone)]
pub struct FormalSeries {
    basis: Arc<Basis>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (m, c) in self.terms() {
            list.entry(&m.to_string(), &c);
        }
        list.finish()
    }
}

impl PartialEq for FormalSeries {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) && self.coeffs == other.coeffs
    }
}

impl FormalSeries {
    pub fn zero(basis: &Arc<Basis>) -> Self {
        FormalSeries {
            basis: Arc::clone(basis),
            coeffs: vec![ZERO; basis.len()],
        }
    }

    pub fn constant(basis: &Arc<Basis>, c: f64) -> Self {
        Self::monomial(basis, Monomial::new(0, 0, 0, [0, 0]), Complex64::new(c, 0.0))
    }

    /// A single monomial; zero if it lies beyond the truncation.
    pub fn monomial(basis: &Arc<Basis>, m: Monomial, c: Complex64) -> Self {
        let mut s = Self::zero(basis);
        if let Some(i) = basis.index(m) {
            s.coeffs[i] = c;
        }
        s
    }

    /// `|z₁|² = z z̄ = x₁² + ξ₁²`.
    pub fn action(basis: &Arc<Basis>) -> Self {
        Self::monomial(basis, Monomial::new(1, 1, 0, [0, 0]), Complex64::new(1.0, 0.0))
    }

    /// `x₁ = (z + z̄)/2`.
    pub fn x1(basis: &Arc<Basis>) -> Self {
        let h = Complex64::new(0.5, 0.0);
        let mut s = Self::monomial(basis, Monomial::new(1, 0, 0, [0, 0]), h);
        s.add_term(Monomial::new(0, 1, 0, [0, 0]), h);
        s
    }

    /// `ξ₁ = (z − z̄)/(2i)`.
    pub fn xi1(basis: &Arc<Basis>) -> Self {
        let h = Complex64::new(0.0, -0.5);
        let mut s = Self::monomial(basis, Monomial::new(1, 0, 0, [0, 0]), h);
        s.add_term(Monomial::new(0, 1, 0, [0, 0]), -h);
        s
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn coeff(&self, m: Monomial) -> Complex64 {
        self.basis.index(m).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn set(&mut self, m: Monomial, c: Complex64) {
        let i = self.basis.index(m).expect("monomial inside truncation");
        self.coeffs[i] = c;
    }

    pub fn add_term(&mut self, m: Monomial, c: Complex64) {
        if let Some(i) = self.basis.index(m) {
            self.coeffs[i] += c;
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Non-zero terms in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != ZERO)
            .map(|(i, c)| (self.basis.monomial(i), *c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_basis(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.basis, &other.basis),
            "series over different bases"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_basis(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        FormalSeries {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_basis(other);
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        FormalSeries {
            basis: Arc::clone(&self.basis),
            coeffs,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        FormalSeries {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_basis(other);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
    }

    /// Keeps the terms selected by `keep`.
    pub fn filter<F: Fn(Monomial) -> bool>(&self, keep: F) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            if *c != ZERO && !keep(self.basis.monomial(i)) {
                *c = ZERO;
            }
        }
        out
    }

    /// Homogeneous part of fast degree `d`.
    pub fn degree_part(&self, d: usize) -> Self {
        self.filter(|m| m.fast_degree() == d)
    }

    /// The `ħ⁰` part.
    pub fn classical(&self) -> Self {
        self.filter(|m| m.hbar == 0)
    }

    pub fn resonant_part(&self) -> Self {
        self.filter(|m| m.is_resonant())
    }

    /// Lowest fast degree carrying a non-zero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.terms().map(|(m, _)| m.fast_degree()).min()
    }

    /// The slow jet multiplying `z^α z̄^β ħ^l`.
    pub fn slow_block(&self, alpha: usize, beta: usize, hbar: usize) -> SlowJet {
        let ns = self.basis.n_slow();
        match self.basis.fast_index(alpha, beta, hbar) {
            Some(f) => SlowJet {
                basis: Arc::clone(&self.basis),
                coeffs: self.coeffs[f * ns..(f + 1) * ns].to_vec(),
            },
            None => SlowJet::zero(&self.basis),
        }
    }

    pub fn set_slow_block(&mut self, alpha: usize, beta: usize, hbar: usize, jet: &SlowJet) {
        let ns = self.basis.n_slow();
        let f = self
            .basis
            .fast_index(alpha, beta, hbar)
            .expect("block inside truncation");
        self.coeffs[f * ns..(f + 1) * ns].copy_from_slice(&jet.coeffs);
    }

    /// Multiplies every coefficient jet by the slow jet `c` (ordinary product;
    /// functions of the slow variables alone commute with everything fast).
    pub fn mul_slow(&self, c: &SlowJet) -> Self {
        let ns = self.basis.n_slow();
        let mut out = Self::zero(&self.basis);
        for f in 0..self.basis.n_fast() {
            let block = &self.coeffs[f * ns..(f + 1) * ns];
            if block.iter().all(|v| *v == ZERO) {
                continue;
            }
            let prod = slow_product(&self.basis, block, &c.coeffs);
            out.coeffs[f * ns..(f + 1) * ns].copy_from_slice(&prod);
        }
        out
    }

    /// Moyal product `self ⋆ other`.
    pub fn star(&self, other: &Self) -> Self {
        self.bidiff(other, Mode::Product)
    }

    /// `ad_self other = iħ⁻¹[self, other]⋆`, computed directly from the odd
    /// orders of the Moyal expansion so that no division by `ħ` occurs.
    pub fn ad(&self, other: &Self) -> Self {
        self.bidiff(other, Mode::Adjoint)
    }

    /// `e^{ad_self} h = Σ ad_selfᵏ h / k!`. The sum terminates at the
    /// truncation whenever `self` raises the filtration, which holds for all
    /// generators used here; a hard cap guards the rest.
    pub fn lie_exp(&self, h: &Self) -> Self {
        let cap = 2 * (self.basis.fast_order + self.basis.slow_order) + 4;
        let mut total = h.clone();
        let mut term = h.clone();
        for k in 1..=cap {
            term = self.ad(&term).scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.is_zero() {
                break;
            }
            total.add_assign(&term);
        }
        total
    }

    fn bidiff(&self, other: &Self, mode: Mode) -> Self {
        self.check_basis(other);
        let basis = &self.basis;
        let n1 = basis.fast_order;
        let ns = basis.n_slow();
        let sigma = SLOW_ORIENTATION;
        let half_i = Complex64::new(0.0, 0.5 * sigma);
        let mut out = vec![ZERO; basis.len()];
        let live = |s: &Self| -> Vec<usize> {
            (0..basis.n_fast())
                .filter(|&f| s.coeffs[f * ns..(f + 1) * ns].iter().any(|c| *c != ZERO))
                .collect()
        };
        let fa_live = live(self);
        let fb_live = live(other);
        let max_km = n1 / 2 + 1;
        let mut phase = vec![vec![ZERO; max_km + 1]; max_km + 1];
        for k in 0..=max_km {
            for m in 0..=max_km - k {
                phase[k][m] = half_i.powu(k as u32) * (-half_i).powu(m as u32);
            }
        }
        let two_i = Complex64::new(0.0, 2.0);
        for &fa in &fa_live {
            let [aa, ba, la] = basis.fast_exponents(fa);
            let da = basis.fast_degree(fa);
            let block_a = &self.coeffs[fa * ns..(fa + 1) * ns];
            for &fb in &fb_live {
                let [ab, bb, lb] = basis.fast_exponents(fb);
                let db = basis.fast_degree(fb);
                let base = da + db;
                let block_b = &other.coeffs[fb * ns..(fb + 1) * ns];
                for i in 0..=aa.min(bb) {
                    for j in 0..=ba.min(ab) {
                        let cf = falling(aa, i) * falling(bb, i) * falling(ba, j) * falling(ab, j)
                            / (factorial(i) * factorial(j))
                            * if j % 2 == 1 { -1.0 } else { 1.0 };
                        let alpha = aa + ab - i - j;
                        let beta = ba + bb - i - j;
                        for k in 0..=max_km {
                            for m in 0..=max_km - k {
                                let n = i + j + k + m;
                                let (l, scalar) = match mode {
                                    Mode::Product => {
                                        if base + 2 * (k + m) > n1 {
                                            continue;
                                        }
                                        (la + lb + n, phase[k][m] * cf)
                                    }
                                    Mode::Adjoint => {
                                        if n % 2 == 0 || base + 2 * (k + m) > n1 + 2 {
                                            continue;
                                        }
                                        (la + lb + n - 1, phase[k][m] * cf * two_i)
                                    }
                                };
                                let Some(fr) = basis.fast_index(alpha, beta, l) else {
                                    continue;
                                };
                                let dst = &mut out[fr * ns..(fr + 1) * ns];
                                for &(sa, sb, sr, w) in &basis.slow_kernels[k][m] {
                                    let x = block_a[sa as usize];
                                    if x == ZERO {
                                        continue;
                                    }
                                    let y = block_b[sb as usize];
                                    if y == ZERO {
                                        continue;
                                    }
                                    dst[sr as usize] += scalar * w * x * y;
                                }
                            }
                        }
                    }
                }
            }
        }
        FormalSeries {
            basis: Arc::clone(basis),
            coeffs: out,
        }
    }
}

fn slow_product(basis: &Basis, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; basis.n_slow()];
    for &(sa, sb, sr, w) in &basis.slow_kernels[0][0] {
        let x = a[sa as usize];
        if x == ZERO {
            continue;
        }
        out[sr as usize] += w * x * b[sb as usize];
    }
    out
}

/// Taylor jet in the slow offsets `(δx₂, δξ₂)` up to the basis' slow order.
#[derive(Clone)]
pub struct SlowJet {
    basis: Arc<Basis>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for SlowJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.coeffs.iter()).finish()
    }
}

impl SlowJet {
    pub fn zero(basis: &Arc<Basis>) -> Self {
        SlowJet {
            basis: Arc::clone(basis),
            coeffs: vec![ZERO; basis.n_slow()],
        }
    }

    pub fn constant(basis: &Arc<Basis>, c: Complex64) -> Self {
        let mut j = Self::zero(basis);
        j.coeffs[0] = c;
        j
    }

    pub fn coeff(&self, g: [usize; 2]) -> Complex64 {
        self.basis.slow_index(g).map_or(ZERO, |i| self.coeffs[i])
    }

    pub fn value_at_base(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(exponents, coefficient)` for every slot of the jet.
    pub fn terms(&self) -> impl Iterator<Item = ([usize; 2], Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| (self.basis.slow_exponents(i), *c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        SlowJet {
            basis: Arc::clone(&self.basis),
            coeffs: slow_product(&self.basis, &self.coeffs, &other.coeffs),
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SlowJet {
            basis: Arc::clone(&self.basis),
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Multiplicative inverse by Newton's iteration `y ← y(2 − c y)`;
    /// `None` when the constant term vanishes.
    pub fn inverse(&self) -> Option<Self> {
        let c0 = self.coeffs[0];
        if c0 == ZERO {
            return None;
        }
        let mut y = SlowJet::constant(&self.basis, 1.0 / c0);
        let two = SlowJet::constant(&self.basis, Complex64::new(2.0, 0.0));
        // Each sweep doubles the number of correct orders.
        let mut correct = 1;
        while correct <= self.basis.slow_order {
            let cy = self.mul(&y);
            let corr = SlowJet {
                basis: Arc::clone(&self.basis),
                coeffs: two.coeffs.iter().zip(&cy.coeffs).map(|(a, b)| a - b).collect(),
            };
            y = y.mul(&corr);
            correct *= 2;
        }
        Some(y)
    }

    /// Evaluates the jet at the offset `δ`.
    pub fn eval(&self, delta: [f64; 2]) -> Complex64 {
        self.terms()
            .map(|(g, c)| c * delta[0].powi(g[0] as i32) * delta[1].powi(g[1] as i32))
            .sum()
    }
}
