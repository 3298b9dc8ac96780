use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::grid::Grid1;
use super::spectrum::{GridInfo, OperatorKind, SpectralResult};
use super::SpecError;

/// Dense Hermitian matrix of a 1D Weyl quantization.
#[derive(Debug, Clone)]
pub struct WeylOperator {
    grid: Grid1,
    hbar: f64,
    matrix: DMatrix<Complex64>,
}

/// Symbol values above the cap are compressed smoothly into
/// `[cap, cap + width)` by `cap + width·tanh((f − cap)/width)`, with
/// `width = cap/10`; values up to the cap pass unchanged.
fn saturate(f: f64, cap: f64) -> f64 {
    let width = 0.1 * cap.abs().max(1e-300);
    if !f.is_finite() {
        return cap + width;
    }
    if f <= cap {
        f
    } else {
        cap + width * ((f - cap) / width).tanh()
    }
}

/// Discrete Weyl quantization of `symbol(x, ξ)` on the cell-centred grid.
///
/// With `ξ_k = 2πħk/(nh)` for `−n/2 ≤ k < n/2` the matrix is
/// `M_{jl} = n⁻¹ Σ_k e^{2πik(j−l)/n} f((x_j + x_l)/2, ξ_k)`, which reproduces
/// multiplication operators exactly and functions of `ξ` on band-limited
/// vectors. The symbol is saturated above `cap` so that the wrap-around of
/// the momentum grid sees an almost constant symbol; the phase-space box must therefore enclose
/// `{f < cap}`, otherwise the symbol is aliased and an error is returned.
/// Non-finite symbol values (e.g. outside a chart) count as `+∞`.
pub fn weyl_quantize_1d<F>(symbol: F, hbar: f64, grid: Grid1, cap: f64) -> Result<WeylOperator, SpecError>
where
    F: Fn(f64, f64) -> f64,
{
    if !(hbar > 0.0) {
        return Err(SpecError::InvalidHbar(hbar));
    }
    let n = grid.n;
    if n < 2 {
        return Err(SpecError::GridTooSmall { n, min: 2 });
    }
    let h = grid.spacing();
    let dxi = 2.0 * PI * hbar / (n as f64 * h);
    let ks: Vec<i64> = (0..n as i64).map(|k| k - n as i64 / 2).collect();
    // Symbol table at the 2n − 1 midpoints.
    let mut table = vec![0.0; (2 * n - 1) * n];
    let mut boundary_min = f64::INFINITY;
    for m in 0..2 * n - 1 {
        let x = grid.lo + (m as f64 * 0.5 + 0.5) * h;
        for (c, &k) in ks.iter().enumerate() {
            let raw = symbol(x, k as f64 * dxi);
            let raw = if raw.is_finite() { raw } else { f64::INFINITY };
            if m == 0 || m == 2 * n - 2 || c == 0 || c == n - 1 {
                boundary_min = boundary_min.min(raw);
            }
            table[m * n + c] = saturate(raw, cap);
        }
    }
    if boundary_min < cap {
        return Err(SpecError::Aliasing { boundary_min, cap });
    }
    let roots: Vec<Complex64> = (0..n).map(|r| Complex64::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)).collect();
    let mut matrix = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        for l in 0..=j {
            let row = &table[(j + l) * n..(j + l + 1) * n];
            let d = (j as i64 - l as i64).rem_euclid(n as i64);
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, &k) in ks.iter().enumerate() {
                let r = (k * d).rem_euclid(n as i64) as usize;
                acc += roots[r] * row[c];
            }
            acc /= n as f64;
            matrix[(j, l)] = acc;
            matrix[(l, j)] = acc.conj();
        }
    }
    for j in 0..n {
        matrix[(j, j)].im = 0.0;
    }
    Ok(WeylOperator { grid, hbar, matrix })
}

impl WeylOperator {
    pub fn grid(&self) -> &Grid1 {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        self.grid.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.dim();
        for (j, out) in y.iter_mut().enumerate().take(n) {
            *out = (0..n).map(|l| self.matrix[(j, l)] * x[l]).sum();
        }
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    pub(crate) fn lowest(&self, k: usize, keep_vectors: bool) -> Result<SpectralResult, SpecError> {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        order.truncate(k);
        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        let mut residual_norms = Vec::with_capacity(k);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.dim()];
        for &i in &order {
            let lambda = eig.eigenvalues[i];
            let v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
            self.apply(&v, &mut scratch);
            let res = scratch
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * lambda).norm_sqr())
                .sum::<f64>()
                .sqrt();
            values.push(lambda);
            residual_norms.push(res);
            vectors.push(v);
        }
        Ok(SpectralResult {
            kind: OperatorKind::Weyl1d,
            hbar: self.hbar,
            grid: GridInfo::Line(self.grid),
            eigenvalues: values,
            eigenvectors: keep_vectors.then_some(vectors),
            residual_norms,
            discretization_error_estimate: None,
            iterations: 0,
        })
    }
}
