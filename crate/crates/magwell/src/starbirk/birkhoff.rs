use num_complex::Complex64;

use super::series::{FormalSeries, Monomial, SlowJet};
use super::StarError;

/// Generators and normal form produced by [`birkhoff`].
#[derive(Debug, Clone)]
pub struct BirkhoffOutput {
    /// Degree-2 generators that diagonalize the quadratic part away from the
    /// basepoint, in order of application.
    pub quadratic_generators: Vec<FormalSeries>,
    /// `(d, τ_d)` for `d = 3..=N₁`, in order of application.
    pub generators: Vec<(usize, FormalSeries)>,
    /// `c(z₂)` in the quadratic part `c(z₂)|z₁|²` of the normal form.
    pub leading: SlowJet,
    /// The full normal form `c(z₂)|z₁|² + κ`.
    pub normal_form: FormalSeries,
    /// Terms of degree ≥ 3 of the normal form.
    pub kappa: FormalSeries,
}

/// Generator solving `ad_{c|z₁|²} χ = −N` for the non-resonant part `N` of
/// fast degree `d`: `χ_{αβ} = N_{αβ} c⁻¹ / (2i(β − α))`.
fn homological(series: &FormalSeries, d: usize, inv: &SlowJet) -> FormalSeries {
    let mut gen = FormalSeries::zero(series.basis());
    for l in 0..=d / 2 {
        let ab = d - 2 * l;
        for alpha in 0..=ab {
            let beta = ab - alpha;
            if alpha == beta {
                continue;
            }
            let block = series.slow_block(alpha, beta, l);
            if block.coeffs().iter().all(|c| c.norm() == 0.0) {
                continue;
            }
            let div = Complex64::new(0.0, 2.0 * (beta as f64 - alpha as f64));
            gen.set_slow_block(alpha, beta, l, &block.mul(inv).scale(1.0 / div));
        }
    }
    gen
}

fn clear_nonresonant(series: &mut FormalSeries, d: usize) {
    let zero = SlowJet::zero(series.basis());
    for l in 0..=d / 2 {
        let ab = d - 2 * l;
        for alpha in 0..=ab {
            let beta = ab - alpha;
            if alpha != beta {
                series.set_slow_block(alpha, beta, l, &zero);
            }
        }
    }
}

/// Semiclassical Birkhoff normalization of `H⁰ + γ`.
///
/// The quadratic part is first brought to `c(z₂)|z₁|²` by degree-2 Lie
/// transforms, then for `d = 3..=N₁` the non-resonant degree-`d` part is
/// removed by `e^{iħ⁻¹ad_{τ_d}}`. What remains is resonant, i.e. a series in
/// `|z₁|²`, `ħ` and `z₂`. Conjugations use the Moyal adjoint action, so the
/// result is exact at the truncation up to round-off.
pub fn birkhoff(series: &FormalSeries) -> Result<BirkhoffOutput, StarError> {
    let basis = series.basis().clone();
    let n1 = basis.fast_order();
    let n2 = basis.slow_order();
    let scale = series.max_abs().max(f64::MIN_POSITIVE);
    let low = series.filter(|m| m.fast_degree() < 2).max_abs();
    if low > 1e-12 * scale {
        return Err(StarError::NotNormalized { residual: low });
    }
    let mut h = series.filter(|m| m.fast_degree() >= 2);

    let mut quadratic_generators = Vec::new();
    for _ in 0..=n2 + 2 {
        let leading = h.slow_block(1, 1, 0);
        let inv = leading.inverse().ok_or(StarError::ZeroDivisor)?;
        let chi = homological(&h.classical(), 2, &inv);
        // Round-off sized corrections would only add noise.
        if chi.max_abs() <= 1e-14 * scale {
            break;
        }
        h = chi.lie_exp(&h);
        quadratic_generators.push(chi);
    }
    clear_nonresonant(&mut h, 2);

    let leading = h.slow_block(1, 1, 0);
    let inv = leading.inverse().ok_or(StarError::ZeroDivisor)?;
    let mut generators = Vec::new();
    for d in 3..=n1 {
        let tau = homological(&h, d, &inv);
        if !tau.is_zero() {
            h = tau.lie_exp(&h);
        }
        clear_nonresonant(&mut h, d);
        generators.push((d, tau));
    }
    let kappa = h.filter(|m| m.fast_degree() >= 3);
    Ok(BirkhoffOutput {
        quadratic_generators,
        generators,
        leading,
        normal_form: h,
        kappa,
    })
}

/// `max |coeff|` of `iħ⁻¹[a, |z₁|²]⋆`; zero exactly when `a` is resonant.
pub fn action_commutator(a: &FormalSeries) -> f64 {
    FormalSeries::action(a.basis()).ad(a).max_abs()
}

/// Largest coefficient among the monomials `z^α z̄^β` with `α ≠ β`.
pub fn nonresonant_size(a: &FormalSeries) -> f64 {
    a.filter(|m: Monomial| !m.is_resonant()).max_abs()
}
