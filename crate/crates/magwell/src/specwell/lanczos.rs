use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::rng::Lcg64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Two passes of classical Gram–Schmidt against `basis`.
fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
}

fn random_unit(dim: usize, rng: &mut Lcg64, basis: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    for _ in 0..4 {
        let mut v: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)))
            .collect();
        orthogonalize(&mut v, basis);
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

/// Ritz pairs for the largest eigenvalues of a Hermitian operator.
pub(crate) struct LanczosOutcome {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
    pub iterations: usize,
    pub converged: bool,
}

/// Lanczos with full reorthogonalization for the `k` algebraically largest
/// eigenvalues of `op`. A Ritz pair counts as converged when
/// `|β_m s_m| ≤ tol·max|θ|`. On breakdown the iteration continues from a
/// fresh random vector orthogonal to the basis, which lets it pick up
/// further copies of (near-)degenerate eigenvalues.
pub(crate) fn largest<F>(mut op: F, dim: usize, k: usize, max_iter: usize, tol: f64, seed: u64) -> LanczosOutcome
where
    F: FnMut(&[Complex64]) -> Vec<Complex64>,
{
    let k = k.min(dim);
    let max_iter = max_iter.min(dim).max(k);
    let mut rng = Lcg64::new(seed);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut v = random_unit(dim, &mut rng, &basis).expect("non-empty space");
    let mut next_check = k + 10;
    let mut last: Option<(Vec<f64>, DMatrix<f64>)> = None;
    let mut converged = false;
    while basis.len() < max_iter {
        let mut w = op(&v);
        let a = dot(&v, &w).re;
        for (x, y) in w.iter_mut().zip(&v) {
            *x -= a * y;
        }
        basis.push(v);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = norm(&w);
        let m = basis.len();
        let done = m >= max_iter;
        if m >= next_check || done || m == dim {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta);
            let top = theta.iter().fold(0.0f64, |acc, t| acc.max(t.abs()));
            let ok = (0..k.min(m)).all(|i| (b * s[(m - 1, i)]).abs() <= tol * top) && m >= k;
            last = Some((theta, s));
            if ok || m == dim {
                converged = ok || m == dim;
                break;
            }
            next_check = m + (m / 8).max(10);
        }
        if done {
            break;
        }
        if b <= 1e-10 * alpha.iter().fold(0.0f64, |acc, t| acc.max(t.abs())) {
            match random_unit(dim, &mut rng, &basis) {
                Some(fresh) => {
                    v = fresh;
                    beta.push(0.0);
                }
                None => break,
            }
        } else {
            w.iter_mut().for_each(|x| *x /= b);
            v = w;
            beta.push(b);
        }
    }
    let (theta, s) = match last {
        Some(pair) if pair.0.len() == basis.len() => pair,
        _ => tridiagonal_eigen(&alpha, &beta[..alpha.len().saturating_sub(1)]),
    };
    let m = basis.len();
    let take = k.min(m);
    let mut vectors = Vec::with_capacity(take);
    for i in 0..take {
        let mut y = vec![ZERO; dim];
        for (j, b) in basis.iter().enumerate() {
            let c = s[(j, i)];
            if c != 0.0 {
                for (t, x) in y.iter_mut().zip(b) {
                    *t += x * c;
                }
            }
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|x| *x /= ny);
        vectors.push(y);
    }
    LanczosOutcome {
        values: theta[..take].to_vec(),
        vectors,
        iterations: m,
        converged,
    }
}

/// Eigen-decomposition of the real symmetric tridiagonal matrix, sorted by
/// decreasing eigenvalue; column `i` of the second result is the `i`-th
/// eigenvector.
fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::<f64>::zeros(m, m);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}
