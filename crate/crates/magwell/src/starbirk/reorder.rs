use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::series::{Basis, FormalSeries, Monomial, SlowJet};
use super::StarError;
use crate::fieldlab::MagneticField;

/// `(|z₁|²)^{⋆m}` for `m = 0..=max_m`.
pub fn star_powers(basis: &Arc<Basis>, max_m: usize) -> Vec<FormalSeries> {
    let action = FormalSeries::action(basis);
    let mut out = vec![FormalSeries::constant(basis, 1.0)];
    for m in 1..=max_m {
        let next = out[m - 1].star(&action);
        out.push(next);
    }
    out
}

fn hbar_shift(s: &FormalSeries, l: usize) -> FormalSeries {
    let mut out = FormalSeries::zero(s.basis());
    for (m, c) in s.terms() {
        out.add_term(Monomial::new(m.alpha as usize, m.beta as usize, m.hbar as usize + l, [m.slow[0] as usize, m.slow[1] as usize]), c);
    }
    out
}

/// Coefficients `c*_{l,m}(z₂)` in `κ = Σ ħ^l c*_{l,m}(z₂) (|z₁|²)^{⋆m}`.
#[derive(Debug, Clone)]
pub struct StarCoefficients {
    pub coeffs: BTreeMap<(usize, usize), SlowJet>,
}

impl StarCoefficients {
    pub fn get(&self, l: usize, m: usize) -> Option<&SlowJet> {
        self.coeffs.get(&(l, m))
    }

    /// `c*_{l,m}` at the basepoint, real part.
    pub fn at_base(&self, l: usize, m: usize) -> f64 {
        self.get(l, m).map_or(0.0, |j| j.value_at_base().re)
    }
}

/// Triangular change of basis from plain powers `|z₁|^{2m}` to star powers,
/// highest `m` first. Fails if the input has non-resonant terms.
pub fn reorder_star_powers(kappa: &FormalSeries) -> Result<StarCoefficients, StarError> {
    let basis = kappa.basis().clone();
    let n1 = basis.fast_order();
    let scale = kappa.max_abs();
    let nonres = kappa.filter(|m| !m.is_resonant()).max_abs();
    if nonres > 1e-10 * scale.max(1.0) {
        return Err(StarError::NotResonant { residual: nonres });
    }
    let powers = star_powers(&basis, n1 / 2);
    let mut residual = kappa.filter(|m| m.is_resonant());
    let mut coeffs = BTreeMap::new();
    for m in (0..=n1 / 2).rev() {
        for l in 0..=(n1 - 2 * m) / 2 {
            let c = residual.slow_block(m, m, l);
            if c.coeffs().iter().all(|v| v.norm() == 0.0) {
                continue;
            }
            let term = hbar_shift(&powers[m], l).mul_slow(&c);
            residual = residual.sub(&term);
            coeffs.insert((l, m), c);
        }
    }
    let left = residual.max_abs();
    assert!(
        left <= 1e-10 * scale.max(1.0),
        "star-power reordering left {left:e}"
    );
    Ok(StarCoefficients { coeffs })
}

/// Inverse of [`reorder_star_powers`].
pub fn expand_star_powers(star: &StarCoefficients, basis: &Arc<Basis>) -> FormalSeries {
    let max_m = star.coeffs.keys().map(|(_, m)| *m).max().unwrap_or(0);
    let powers = star_powers(basis, max_m);
    let mut out = FormalSeries::zero(basis);
    for (&(l, m), c) in &star.coeffs {
        out.add_assign(&hbar_shift(&powers[m], l).mul_slow(c));
    }
    out
}

/// Low-lying eigenvalue expansion `λ_j ≈ ħ B_min + ħ²(c₁(2j − 1) + c₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenCoefficients {
    pub b_min: f64,
    pub c0: f64,
    pub c1: f64,
}

impl EigenCoefficients {
    pub fn predict(&self, hbar: f64, j: usize) -> f64 {
        hbar * self.b_min + hbar * hbar * (self.c1 * (2 * j - 1) as f64 + self.c0)
    }
}

/// Reads off the expansion from the star coefficients of the full normal
/// form. On the lowest Landau band `(|z₁|²)^{⋆m}` acts as `ħ^m`, so the band
/// symbol is `Σ ħ^{l+m} c*_{l,m}(z₂)`. Its `ħ` part `c*_{0,1} = B∘g⁻¹` gives
/// `B_min` and, through the harmonic approximation at the minimum,
/// `c₁ = √det B″ / (2 B_min)`. The `ħ²` part evaluated at the minimum is
/// `c₀ = c*_{0,2} + c*_{1,1} + c*_{2,0}`; `c*_{2,0}` carries the `ħ²` from
/// reordering and from the Weyl symbol of the magnetic Laplacian.
pub fn eigenvalue_expansion(
    star: &StarCoefficients,
    field: &MagneticField,
) -> Result<EigenCoefficients, StarError> {
    let min = field.minimum()?;
    let det = min.hessian[0][0] * min.hessian[1][1] - min.hessian[0][1] * min.hessian[1][0];
    if !(det > 0.0) {
        return Err(StarError::DegenerateHessian { det });
    }
    let b_min = min.value;
    let leading = star.at_base(0, 1);
    if (leading - b_min).abs() > 1e-8 * b_min {
        return Err(StarError::BasepointNotMinimum {
            expected: b_min,
            found: leading,
        });
    }
    Ok(EigenCoefficients {
        b_min,
        c0: star.at_base(0, 2) + star.at_base(1, 1) + star.at_base(2, 0),
        c1: det.sqrt() / (2.0 * b_min),
    })
}

/// Plain-power coefficients of the classical normal form:
/// `K(z₂, I) = Σ_m c_{0,m}(z₂) I^m = I f(z₂, I)`.
pub fn classical_coefficients(normal_form: &FormalSeries) -> Vec<SlowJet> {
    let n1 = normal_form.basis().fast_order();
    (0..=n1 / 2).map(|m| normal_form.slow_block(m, m, 0)).collect()
}

pub(crate) fn jet_real(j: &SlowJet) -> Vec<([usize; 2], f64)> {
    j.terms().filter(|(_, c)| *c != Complex64::new(0.0, 0.0)).map(|(g, c)| (g, c.re)).collect()
}
