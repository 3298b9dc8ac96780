use num_complex::Complex64;

use super::SpecError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Lower band of a Hermitian matrix, stored by column: slot `(j, k)` holds
/// the entry in row `j + k`, column `j`, for `k ≤ width`.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    dim: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(dim: usize, width: usize) -> Self {
        BandMatrix {
            dim,
            width,
            data: vec![ZERO; dim * (width + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, col: usize, k: usize) -> Complex64 {
        self.data[col * (self.width + 1) + k]
    }

    pub fn set(&mut self, col: usize, k: usize, v: Complex64) {
        self.data[col * (self.width + 1) + k] = v;
    }

    /// `y = A x` using Hermitian symmetry.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.iter_mut().for_each(|v| *v = ZERO);
        let stride = self.width + 1;
        for j in 0..self.dim {
            let col = &self.data[j * stride..(j + 1) * stride];
            y[j] += col[0] * x[j];
            for k in 1..=self.width.min(self.dim - 1 - j) {
                y[j + k] += col[k] * x[j];
                y[j] += col[k].conj() * x[j + k];
            }
        }
    }
}

/// `A = L D Lᴴ` with unit lower-triangular banded `L` and real diagonal `D`,
/// computed without pivoting. For a shifted Hermitian matrix the number of
/// negative pivots is the number of eigenvalues below the shift (Sylvester's
/// law of inertia).
#[derive(Debug, Clone)]
pub struct BandLdl {
    factor: BandMatrix,
    diag: Vec<f64>,
}

impl BandLdl {
    pub fn factor(mut a: BandMatrix) -> Result<Self, SpecError> {
        let (dim, width) = (a.dim, a.width);
        let stride = width + 1;
        let scale = (0..dim).map(|j| a.get(j, 0).re.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut diag = vec![0.0; dim];
        let mut scaled = vec![ZERO; stride];
        for j in 0..dim {
            let d = a.data[j * stride].re;
            if d.abs() <= 1e-14 * scale {
                return Err(SpecError::SingularPivot { index: j });
            }
            diag[j] = d;
            let reach = width.min(dim - 1 - j);
            // l_k = A(j+k, j)/d; the trailing block gets A(j+b, j+a) −= l_b d conj(l_a).
            for k in 1..=reach {
                let v = a.data[j * stride + k] / d;
                a.data[j * stride + k] = v;
                scaled[k] = v;
            }
            for p in 1..=reach {
                let ca = scaled[p].conj() * d;
                if ca == ZERO {
                    continue;
                }
                let base = (j + p) * stride;
                let target = &mut a.data[base..base + (reach - p + 1)];
                for (t, l) in target.iter_mut().zip(&scaled[p..=reach]) {
                    *t -= l * ca;
                }
            }
            a.data[j * stride] = Complex64::new(1.0, 0.0);
        }
        Ok(BandLdl { factor: a, diag })
    }

    /// Number of negative pivots.
    pub fn negative_count(&self) -> usize {
        self.diag.iter().filter(|d| **d < 0.0).count()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.diag
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let (dim, width) = (self.factor.dim, self.factor.width);
        let stride = width + 1;
        let data = &self.factor.data;
        for j in 0..dim {
            let xj = x[j];
            if xj == ZERO {
                continue;
            }
            let reach = width.min(dim - 1 - j);
            let col = &data[j * stride + 1..j * stride + 1 + reach];
            for (t, l) in x[j + 1..j + 1 + reach].iter_mut().zip(col) {
                *t -= l * xj;
            }
        }
        for (v, d) in x.iter_mut().zip(&self.diag) {
            *v /= *d;
        }
        for j in (0..dim).rev() {
            let reach = width.min(dim - 1 - j);
            let col = &data[j * stride + 1..j * stride + 1 + reach];
            let mut acc = x[j];
            for (t, l) in x[j + 1..j + 1 + reach].iter().zip(col) {
                acc -= l.conj() * t;
            }
            x[j] = acc;
        }
    }
}
