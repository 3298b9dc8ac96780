//! Dense bivariate polynomials with real coefficients.

use serde::{Deserialize, Serialize};

/// Minimal commutative ring interface used to evaluate polynomials on
/// plain floats and on truncated power series alike.
pub trait Ring: Clone {
    fn scalar_like(&self, c: f64) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn add_scalar(&self, c: f64) -> Self;
    fn scale(&self, c: f64) -> Self;
}

impl Ring for f64 {
    fn scalar_like(&self, c: f64) -> Self {
        c
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn add_scalar(&self, c: f64) -> Self {
        self + c
    }
    fn scale(&self, c: f64) -> Self {
        self * c
    }
}

/// `sum c[i][j] x^i y^j`, stored as a rectangular table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly2 {
    coeffs: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { coeffs: vec![vec![0.0]] }
    }

    pub fn constant(c: f64) -> Self {
        Poly2 {
            coeffs: vec![vec![c]],
        }
    }

    /// Builds a polynomial from `(i, j, c)` triples meaning `c x^i y^j`.
    /// Repeated exponents are summed.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let nx = terms.iter().map(|t| t.0).max().unwrap_or(0) + 1;
        let ny = terms.iter().map(|t| t.1).max().unwrap_or(0) + 1;
        let mut coeffs = vec![vec![0.0; ny]; nx];
        for &(i, j, c) in terms {
            coeffs[i][j] += c;
        }
        Poly2 { coeffs }.trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().iter().all(|&c| c == 0.0) {
            self.coeffs.pop();
        }
        let ny = self
            .coeffs
            .iter()
            .map(|row| row.iter().rposition(|&c| c != 0.0).map_or(1, |k| k + 1))
            .max()
            .unwrap_or(1);
        for row in &mut self.coeffs {
            row.resize(ny, 0.0);
        }
        self
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|row| row.get(j))
            .copied()
            .unwrap_or(0.0)
    }

    /// Nonzero terms as `(i, j, c)`.
    pub fn terms(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c != 0.0 {
                    out.push((i, j, c));
                }
            }
        }
        out
    }

    pub fn degree_x(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree_y(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    pub fn total_degree(&self) -> usize {
        self.terms().iter().map(|t| t.0 + t.1).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms().iter().all(|t| t.0 == 0 && t.1 == 0)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.coeffs.iter().rev() {
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    /// Horner evaluation on any [`Ring`].
    pub fn eval_ring<T: Ring>(&self, x: &T, y: &T) -> T {
        let mut acc = x.scalar_like(0.0);
        for row in self.coeffs.iter().rev() {
            let mut inner = x.scalar_like(0.0);
            for &c in row.iter().rev() {
                inner = inner.mul_ref(y).add_scalar(c);
            }
            acc = acc.mul_ref(x).add_ref(&inner);
        }
        acc
    }

    pub fn d_x(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Poly2::zero();
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, row)| row.iter().map(|&c| c * (i + 1) as f64).collect())
            .collect();
        Poly2 { coeffs }.trimmed()
    }

    pub fn d_y(&self) -> Self {
        if self.coeffs[0].len() == 1 {
            return Poly2::zero();
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                row[1..]
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| c * (j + 1) as f64)
                    .collect()
            })
            .collect();
        Poly2 { coeffs }.trimmed()
    }

    /// `x ↦ ∫_0^x p(s, y) ds`.
    pub fn integral_x(&self) -> Self {
        let ny = self.coeffs[0].len();
        let mut coeffs = vec![vec![0.0; ny]];
        for (i, row) in self.coeffs.iter().enumerate() {
            coeffs.push(row.iter().map(|&c| c / (i + 1) as f64).collect());
        }
        Poly2 { coeffs }.trimmed()
    }

    /// `y ↦ ∫_0^y p(x, s) ds`.
    pub fn integral_y(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| {
                let mut r = vec![0.0];
                r.extend(row.iter().enumerate().map(|(j, &c)| c / (j + 1) as f64));
                r
            })
            .collect();
        Poly2 { coeffs }.trimmed()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|row| row.iter().map(|&c| c * s).collect())
            .collect();
        Poly2 { coeffs }.trimmed()
    }

    pub fn add(&self, other: &Poly2) -> Self {
        let mut terms = self.terms();
        terms.extend(other.terms());
        if terms.is_empty() {
            return Poly2::zero();
        }
        Poly2::from_terms(&terms)
    }
}

/// Real polynomial in an arbitrary number of variables, stored as a list of
/// monomials. Used for fast numerical evaluation of generating Hamiltonians.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparsePoly {
    nvars: usize,
    exps: Vec<Vec<u8>>,
    coeffs: Vec<f64>,
}

impl SparsePoly {
    pub fn new(nvars: usize) -> Self {
        SparsePoly {
            nvars,
            exps: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Adds `c * prod x_k^{e_k}`, merging with an existing identical monomial.
    pub fn add_term(&mut self, exps: &[u8], c: f64) {
        debug_assert_eq!(exps.len(), self.nvars);
        if c == 0.0 {
            return;
        }
        if let Some(k) = self.exps.iter().position(|e| e == exps) {
            self.coeffs[k] += c;
        } else {
            self.exps.push(exps.to_vec());
            self.coeffs.push(c);
        }
    }

    pub fn max_exponent(&self) -> usize {
        self.exps
            .iter()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0) as usize
    }

    fn powers(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let m = self.max_exponent();
        x.iter()
            .map(|&v| {
                let mut p = Vec::with_capacity(m + 1);
                let mut acc = 1.0;
                for _ in 0..=m {
                    p.push(acc);
                    acc *= v;
                }
                p
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let pw = self.powers(x);
        self.exps
            .iter()
            .zip(&self.coeffs)
            .map(|(e, &c)| {
                e.iter()
                    .enumerate()
                    .fold(c, |acc, (k, &ek)| acc * pw[k][ek as usize])
            })
            .sum()
    }

    /// Value and gradient.
    pub fn eval_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let pw = self.powers(x);
        let mut val = 0.0;
        let mut grad = vec![0.0; self.nvars];
        for (e, &c) in self.exps.iter().zip(&self.coeffs) {
            let mut term = c;
            for (k, &ek) in e.iter().enumerate() {
                term *= pw[k][ek as usize];
            }
            val += term;
            for k in 0..self.nvars {
                let ek = e[k] as usize;
                if ek == 0 {
                    continue;
                }
                let mut d = c * ek as f64;
                for (l, &el) in e.iter().enumerate() {
                    let p = if l == k { el as usize - 1 } else { el as usize };
                    d *= pw[l][p];
                }
                grad[k] += d;
            }
        }
        (val, grad)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig2() -> Poly2 {
        Poly2::from_terms(&[
            (0, 0, 2.0),
            (2, 0, 1.0),
            (0, 2, 1.0),
            (3, 0, 1.0 / 3.0),
            (4, 0, 1.0 / 20.0),
        ])
    }

    #[test]
    fn eval_matches_direct_formula() {
        let p = fig2();
        let (x, y) = (0.7f64, -1.3f64);
        let direct = 2.0 + x * x + y * y + x * x * x / 3.0 + x.powi(4) / 20.0;
        assert!((p.eval(x, y) - direct).abs() < 1e-14);
        assert!((p.eval_ring(&x, &y) - direct).abs() < 1e-14);
    }

    #[test]
    fn derivatives_and_integrals_are_inverse() {
        let p = Poly2::from_terms(&[(1, 2, 3.0), (0, 0, 1.5), (3, 1, -0.25)]);
        let back = p.integral_x().d_x();
        assert_eq!(back, p);
        let back = p.integral_y().d_y();
        assert_eq!(back, p);
        assert_eq!(p.integral_y().eval(0.3, 0.0), 0.0);
    }

    #[test]
    fn sparse_gradient_matches_finite_differences() {
        let mut s = SparsePoly::new(3);
        s.add_term(&[2, 1, 0], 1.5);
        s.add_term(&[0, 3, 2], -0.5);
        s.add_term(&[1, 0, 1], 2.0);
        let x = [0.3, -0.8, 1.1];
        let (_, g) = s.eval_grad(&x);
        let h = 1e-6;
        for k in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (s.eval(&xp) - s.eval(&xm)) / (2.0 * h);
            assert!((fd - g[k]).abs() < 1e-8);
        }
    }
}
