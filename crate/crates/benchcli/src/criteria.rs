//! The nine acceptance criteria. Each one runs on the fixed field it names
//! (the unit constant field or fig2 in the Landau gauge); the numeric
//! parameters come from the configuration, whose defaults are the stated
//! ones.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use magwell::fieldlab::{Gauge, MagneticField};
use magwell::numeric::{linear_fit, loglog_slope};
use magwell::rng::Lcg64;
use magwell::specwell::{
    counting_function, eigenpairs_below, gap_statistics, inertia_count, localization_profile, mean,
    weighted_sublevel_area, EigenOptions,
};
use magwell::starbirk::{
    action_commutator, decay_exponent, expand_star_powers, ray_residuals, symplecticity_defect, Basis, FormalSeries,
    Monomial, NormalFormResult,
};
use magwell::symflow::{guiding_center, integrate_h_with, level_set_deviation, Integrator, NormalPoint};
use num_complex::Complex64;
use serde::Serialize;

use crate::compute::{compare_flow_orders, solve, square_grid, Setup, AREA_SEARCH_RADIUS, SLOW_RADIUS};
use crate::config::ExperimentConfig;
use crate::{numerical, BenchError};

/// One reported number with its acceptance interval. Informational values
/// have no bounds and always pass.
#[derive(Debug, Clone, Serialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    /// The lower bound itself fails.
    pub exclusive: bool,
    pub pass: bool,
}

impl Metric {
    fn bounded(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>, exclusive: bool) -> Self {
        let above = |lo: f64| if exclusive { value > lo } else { value >= lo };
        let pass = value.is_finite() && lower.is_none_or(above) && upper.is_none_or(|hi| value <= hi);
        Metric {
            name: name.into(),
            value,
            lower,
            upper,
            exclusive,
            pass,
        }
    }

    pub fn range(name: impl Into<String>, value: f64, lower: f64, upper: f64) -> Self {
        Self::bounded(name, value, Some(lower), Some(upper), false)
    }

    pub fn at_least(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::bounded(name, value, Some(lower), None, false)
    }

    pub fn greater_than(name: impl Into<String>, value: f64, lower: f64) -> Self {
        Self::bounded(name, value, Some(lower), None, true)
    }

    pub fn at_most(name: impl Into<String>, value: f64, upper: f64) -> Self {
        Self::bounded(name, value, None, Some(upper), false)
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Metric {
            name: name.into(),
            value,
            lower: None,
            upper: None,
            exclusive: false,
            pass: true,
        }
    }

    /// `[lo, hi]`, `>= lo`, `> lo`, `<= hi` or `-`.
    pub fn tolerance(&self) -> String {
        let num = |v: f64| {
            if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
                format!("{}", (v * 1e6).round() / 1e6)
            } else {
                format!("{v:e}")
            }
        };
        match (self.lower, self.upper) {
            (Some(lo), Some(hi)) => format!("[{}, {}]", num(lo), num(hi)),
            (Some(lo), None) => format!("{} {}", if self.exclusive { ">" } else { ">=" }, num(lo)),
            (None, Some(hi)) => format!("<= {}", num(hi)),
            (None, None) => "-".into(),
        }
    }
}

/// Result of one criterion. The wall-clock time is kept out of the JSON so
/// that reports are byte-identical across runs.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub title: &'static str,
    pub metrics: Vec<Metric>,
    pub pass: bool,
    pub budget_seconds: f64,
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn within_budget(&self) -> bool {
        self.seconds <= self.budget_seconds
    }

    pub fn summary_line(&self) -> String {
        let failed: Vec<&str> = self.metrics.iter().filter(|m| !m.pass).map(|m| m.name.as_str()).collect();
        let mut line = format!(
            "criterion {} {}: {} ({:.1} s, budget {} s)",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.seconds,
            self.budget_seconds
        );
        if !failed.is_empty() {
            line.push_str(&format!(" failed: {}", failed.join(", ")));
        }
        line
    }
}

pub struct Criterion {
    pub id: usize,
    pub title: &'static str,
    pub budget_seconds: f64,
    run: fn(&ExperimentConfig) -> Result<Vec<Metric>, BenchError>,
}

impl Criterion {
    pub fn evaluate(&self, cfg: &ExperimentConfig) -> Result<CriterionOutcome, BenchError> {
        let start = Instant::now();
        let metrics = (self.run)(cfg)?;
        Ok(CriterionOutcome {
            id: self.id,
            title: self.title,
            pass: metrics.iter().all(|m| m.pass),
            metrics,
            budget_seconds: self.budget_seconds,
            seconds: start.elapsed().as_secs_f64(),
        })
    }
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        title: "constant-field exactness",
        budget_seconds: 10.0,
        run: constant_field_exactness,
    },
    Criterion {
        id: 2,
        title: "level-set drift",
        budget_seconds: 120.0,
        run: level_set_drift,
    },
    Criterion {
        id: 3,
        title: "normal-form residual order",
        budget_seconds: 60.0,
        run: residual_order,
    },
    Criterion {
        id: 4,
        title: "flow-comparison order",
        budget_seconds: 300.0,
        run: flow_comparison_order,
    },
    Criterion {
        id: 5,
        title: "low-lying eigenvalue expansion",
        budget_seconds: 900.0,
        run: eigenvalue_expansion,
    },
    Criterion {
        id: 6,
        title: "effective-operator agreement",
        budget_seconds: 300.0,
        run: effective_operator,
    },
    Criterion {
        id: 7,
        title: "algebraic exactness",
        budget_seconds: 30.0,
        run: algebraic_exactness,
    },
    Criterion {
        id: 8,
        title: "counting and localization",
        budget_seconds: 600.0,
        run: counting_and_localization,
    },
    Criterion {
        id: 9,
        title: "gap scaling",
        budget_seconds: 600.0,
        run: gap_scaling,
    },
];

pub fn criterion(id: usize) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

/// The criteria selected by `cfg.criteria`, in order; `progress` sees each
/// outcome as it completes.
pub fn run_all(
    cfg: &ExperimentConfig,
    mut progress: impl FnMut(&CriterionOutcome),
) -> Result<Vec<CriterionOutcome>, BenchError> {
    CRITERIA
        .iter()
        .filter(|c| cfg.criteria.contains(&c.id))
        .map(|c| {
            let outcome = c.evaluate(cfg)?;
            progress(&outcome);
            Ok(outcome)
        })
        .collect()
}

fn fig2_normal_form(setup: &Setup, cfg: &ExperimentConfig) -> Result<NormalFormResult, BenchError> {
    NormalFormResult::at_default_basepoint(&setup.field, &setup.potential, (cfg.fast_order, cfg.slow_order))
        .map_err(numerical("normal form"))
}

fn hbar_label(hbar: f64) -> String {
    format!("hbar={hbar}")
}

/// `B₀ = 1`, `|q̇₀| = 1`: radius `1/2`, period `π`, conserved energy.
fn constant_field_exactness(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let field = MagneticField::constant(1.0).map_err(numerical("field"))?;
    let setup = Setup::new(field, Gauge::LandauX)?;
    let s0 = setup.with_velocity([0.0, 0.0], [1.0, 0.0]);
    let center = guiding_center(&setup.field, &setup.potential, &s0).center;
    let traj = integrate_h_with(
        &setup.field,
        &setup.potential,
        s0,
        cfg.t_end,
        cfg.dt,
        Integrator::Composition4,
        1,
    )
    .map_err(numerical("flow of H"))?;
    let mut radius_error: f64 = 0.0;
    let mut turned = 0.0;
    let mut previous: Option<f64> = None;
    for s in &traj.states {
        let d = [s.q[0] - center[0], s.q[1] - center[1]];
        radius_error = radius_error.max((d[0].hypot(d[1]) - 0.5).abs());
        let angle = d[1].atan2(d[0]);
        if let Some(prev) = previous {
            let mut step = angle - prev;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            turned += step;
        }
        previous = Some(angle);
    }
    let elapsed = traj.times[traj.len() - 1] - traj.times[0];
    let period = 2.0 * PI * elapsed / turned.abs();
    Ok(vec![
        Metric::at_most("radius error", radius_error, 1e-6),
        Metric::range("period", period, PI - 1e-6, PI + 1e-6),
        Metric::at_most("relative energy drift", traj.relative_energy_drift(), 1e-8),
    ])
}

/// Slope of `log max|B(c(t)) − B(c(0))|` against `log E`, `E = |q̇|/2`.
fn level_set_drift(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let mut metrics = Vec::new();
    let mut deviations = Vec::new();
    for &amp in &cfg.amplitudes {
        let s0 = setup.with_velocity(cfg.start, [0.0, 2.0 * amp]);
        let traj = integrate_h_with(&setup.field, &setup.potential, s0, cfg.t_end, cfg.dt, cfg.integrator, 1)
            .map_err(numerical("flow of H"))?;
        let dev = level_set_deviation(&setup.field, &setup.potential, &traj);
        metrics.push(Metric::info(format!("deviation E={amp}"), dev));
        deviations.push(dev);
    }
    metrics.push(Metric::range("slope", loglog_slope(&cfg.amplitudes, &deviations), 1.7, 2.3));
    Ok(metrics)
}

/// Decay of `|H∘Φ_N − K_N|` along `z₁`-rays and symplecticity of `Φ_N`.
fn residual_order(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let nf = fig2_normal_form(&setup, cfg)?;
    let radii: Vec<f64> = (0..=cfg.ray_halvings)
        .map(|k| cfg.ray_radius / 2f64.powi(k as i32))
        .collect();
    let mut metrics = Vec::new();
    for &order in &cfg.orders {
        let transform = nf.build_transform(order).map_err(numerical("transform"))?;
        let k = nf.classical_normal_form(order, SLOW_RADIUS).map_err(numerical("normal form"))?;
        let mut exponent = f64::INFINITY;
        for &angle in &cfg.ray_angles {
            let res = ray_residuals(&transform, &k, nf.basepoint(), angle, &radii).map_err(numerical("residuals"))?;
            exponent = exponent.min(decay_exponent(&radii, &res));
        }
        metrics.push(Metric::at_least(format!("exponent N={order}"), exponent, order as f64 + 0.7));
        let mut rng = Lcg64::new(cfg.seed);
        let base = nf.basepoint();
        let mut defect: f64 = 0.0;
        for _ in 0..cfg.symplectic_points {
            let z = NormalPoint {
                z1: [rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2)],
                z2: [base[0] + rng.uniform(-0.2, 0.2), base[1] + rng.uniform(-0.2, 0.2)],
            };
            defect = defect.max(symplecticity_defect(&transform, &z, 1e-5).map_err(numerical("symplecticity"))?);
        }
        metrics.push(Metric::at_most(format!("symplecticity defect N={order}"), defect, 1e-6));
    }
    Ok(metrics)
}

/// Empirical order of `d(T)` in `ε`, per `N`.
fn flow_comparison_order(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let rows = compare_flow_orders(&setup, cfg)?;
    let mut metrics = Vec::new();
    let mut previous: Option<f64> = None;
    for &order in &cfg.orders {
        let finals: Vec<f64> = rows
            .iter()
            .filter(|r| r.order == order)
            .map(|r| r.final_distance())
            .collect();
        for (eps, d) in cfg.flow_energies.iter().zip(&finals) {
            metrics.push(Metric::info(format!("d(T) N={order} eps={eps}"), *d));
        }
        let rate = loglog_slope(&cfg.flow_energies, &finals);
        metrics.push(Metric::at_least(
            format!("order N={order}"),
            rate,
            (order as f64 - 1.0) / 2.0 - 0.3,
        ));
        if let Some(prev) = previous {
            metrics.push(Metric::greater_than(format!("order increase to N={order}"), rate - prev, 0.0));
        }
        previous = Some(rate);
    }
    Ok(metrics)
}

/// `λ_j ≈ 2ħ + ħ²(c₁(2j − 1) + c₀)` on fig2.
fn eigenvalue_expansion(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let coeffs = fig2_normal_form(&setup, cfg)?
        .eigen_coefficients()
        .map_err(numerical("eigenvalue coefficients"))?;
    let mut metrics = vec![Metric::info("c1", coeffs.c1), Metric::info("c0", coeffs.c0)];
    let mut first = Vec::new();
    let mut residual = Vec::new();
    for &hbar in &cfg.hbars {
        let op = setup.well_operator(hbar, cfg)?;
        let r = solve(&op, cfg.eigen_count, true, false, cfg.seed)?;
        let base = hbar * coeffs.b_min;
        let js: Vec<f64> = (1..=r.len()).map(|j| (2 * j - 1) as f64).collect();
        let scaled: Vec<f64> = r.eigenvalues.iter().map(|l| (l - base) / (hbar * hbar)).collect();
        let slope = linear_fit(&js, &scaled).0;
        metrics.push(Metric::info(format!("lambda_1 {}", hbar_label(hbar)), r.eigenvalues[0]));
        metrics.push(Metric::info(
            format!("discretization estimate {}", hbar_label(hbar)),
            r.max_discretization_error(),
        ));
        metrics.push(Metric::range(
            format!("c1 slope {}", hbar_label(hbar)),
            slope,
            0.95 * coeffs.c1,
            1.05 * coeffs.c1,
        ));
        first.push(r.eigenvalues[0] - base);
        residual.push(r.eigenvalues[0] - coeffs.predict(hbar, 1));
    }
    metrics.push(Metric::range("exponent a", loglog_slope(&cfg.hbars, &first), 1.9, 2.1));
    metrics.push(Metric::at_least(
        "residual exponent",
        loglog_slope(&cfg.hbars, &residual),
        2.5,
    ));
    Ok(metrics)
}

/// `C = max_j |λ_j − ħμ_j|/ħ²` at `ħ` and `ħ/2`.
fn effective_operator(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let mut constants = Vec::new();
    for hbar in [cfg.weyl_hbar, 0.5 * cfg.weyl_hbar] {
        let mu = setup.band_eigenvalues(hbar, cfg)?;
        let op = setup.well_operator(hbar, cfg)?;
        let r = solve(&op, cfg.weyl_count, false, false, cfg.seed)?;
        let c = r
            .eigenvalues
            .iter()
            .zip(&mu)
            .map(|(l, m)| (l - hbar * m).abs() / (hbar * hbar))
            .fold(0.0, f64::max);
        constants.push(c);
    }
    Ok(vec![
        Metric::info(format!("C {}", hbar_label(cfg.weyl_hbar)), constants[0]),
        Metric::info(format!("C {}", hbar_label(0.5 * cfg.weyl_hbar)), constants[1]),
        Metric::range("C ratio under halving", constants[1] / constants[0], 2.0 / 3.0, 1.5),
    ])
}

/// Random series on the monomials accepted by `keep`.
fn random_series(basis: &Arc<Basis>, rng: &mut Lcg64, keep: impl Fn(Monomial) -> bool) -> FormalSeries {
    let mut s = FormalSeries::zero(basis);
    for i in 0..basis.len() {
        let m = basis.monomial(i);
        if keep(m) && rng.next_f64() < 0.6 {
            s.add_term(m, Complex64::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)));
        }
    }
    s
}

/// Exact coefficient identities of the formal calculus at `(N₁, N₂)`.
fn algebraic_exactness(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let mut rng = Lcg64::new(cfg.seed);
    let degrees = [(2usize, 3usize), (3, 3), (2, 4), (4, 4), (3, 5)];
    // Graded without slow variables, filtered with them.
    let mut violations = 0usize;
    for slow in [0, cfg.slow_order] {
        let basis = Basis::new(cfg.fast_order, slow);
        for (da, db) in degrees {
            let a = random_series(&basis, &mut rng, |m| m.fast_degree() == da);
            let b = random_series(&basis, &mut rng, |m| m.fast_degree() == db);
            violations += a
                .star(&b)
                .terms()
                .filter(|(m, _)| m.fast_degree() < da + db || (slow == 0 && m.fast_degree() != da + db))
                .count();
        }
    }
    let basis = Basis::new(cfg.fast_order, cfg.slow_order);
    let action = FormalSeries::action(&basis);
    let mut ad_defect: f64 = 0.0;
    for i in 0..basis.len() {
        let m = basis.monomial(i);
        let single = FormalSeries::monomial(&basis, m, Complex64::new(1.0, 0.0));
        let bracket = Complex64::new(0.0, 2.0 * (m.beta as f64 - m.alpha as f64));
        ad_defect = ad_defect.max(action.ad(&single).sub(&single.scale(bracket)).max_abs());
    }
    let setup = Setup::fig2();
    let nf = fig2_normal_form(&setup, cfg)?;
    let resonant = nf.normal_form().resonant_part();
    let back = expand_star_powers(&nf.star, resonant.basis());
    let round_trip = back.sub(&resonant).max_abs() / resonant.max_abs().max(1.0);
    Ok(vec![
        Metric::at_most("grading violations", violations as f64, 0.0),
        Metric::at_most("ad defect", ad_defect, 0.0),
        Metric::at_most("[kappa, action] star commutator", action_commutator(nf.kappa()), 0.0),
        Metric::at_most("star-power round trip", round_trip, 1e-12),
    ])
}

/// Weyl-law ratio, ground-state localization and the diamagnetic bound.
fn counting_and_localization(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let area = weighted_sublevel_area(&setup.field, [0.0, 0.0], cfg.level, AREA_SEARCH_RADIUS)
        .map_err(numerical("sublevel area"))?;
    let mut metrics = vec![Metric::info("weighted sublevel area", area)];
    for &hbar in &cfg.hbars {
        let op = setup.counting_operator(hbar, cfg)?;
        let count = inertia_count(&op, cfg.level * hbar).map_err(numerical("inertia"))?;
        metrics.push(Metric::info(format!("N(level) {}", hbar_label(hbar)), count as f64));
        metrics.push(Metric::range(
            format!("counting ratio {}", hbar_label(hbar)),
            count as f64 * 2.0 * PI * hbar / area,
            0.8,
            1.2,
        ));
    }
    let op = setup.counting_operator(cfg.localization_hbar, cfg)?;
    let ground = solve(&op, 1, false, true, cfg.seed)?;
    let vector = ground
        .eigenvectors
        .as_ref()
        .and_then(|v| v.first())
        .ok_or_else(|| BenchError::Numerical("missing ground state".into()))?;
    let mass = localization_profile(vector, &square_grid(&op)?, &setup.field, cfg.level)
        .map_err(numerical("localization"))?;
    metrics.push(Metric::at_most(
        format!("mass outside sublevel {}", hbar_label(cfg.localization_hbar)),
        mass,
        1e-6,
    ));
    let b_min = setup.b_min();
    for &hbar in &cfg.hbars {
        let op = setup.well_operator(hbar, cfg)?;
        let r = solve(&op, 1, true, false, cfg.seed)?;
        // λ₁ − (ħ min B − estimate) must be non-negative.
        metrics.push(Metric::at_least(
            format!("diamagnetic margin {}", hbar_label(hbar)),
            r.eigenvalues[0] - (hbar * b_min - r.max_discretization_error()),
            0.0,
        ));
    }
    Ok(metrics)
}

/// Mean consecutive gap near `level·ħ` against `ħ`.
fn gap_scaling(cfg: &ExperimentConfig) -> Result<Vec<Metric>, BenchError> {
    let setup = Setup::fig2();
    let opts = EigenOptions {
        refine: false,
        keep_vectors: false,
        seed: cfg.seed,
        ..Default::default()
    };
    let mut metrics = Vec::new();
    let mut gaps = Vec::new();
    for &hbar in &cfg.hbars {
        let op = setup.counting_operator(hbar, cfg)?;
        let (lo, hi) = ((cfg.level - cfg.gap_window) * hbar, (cfg.level + cfg.gap_window) * hbar);
        let r = eigenpairs_below(&op, hi, &opts).map_err(numerical("eigensolver"))?;
        let window = gap_statistics(&r, (lo, hi));
        let g = mean(&window).ok_or_else(|| BenchError::Numerical(format!("fewer than two eigenvalues in the window at hbar={hbar}")))?;
        metrics.push(Metric::info(format!("eigenvalues in window {}", hbar_label(hbar)), (window.len() + 1) as f64));
        metrics.push(Metric::info(format!("mean gap {}", hbar_label(hbar)), g));
        gaps.push(g);
        let below = counting_function(&r, hi);
        metrics.push(Metric::info(format!("eigenvalues below window top {}", hbar_label(hbar)), below as f64));
    }
    metrics.push(Metric::range("gap exponent b", loglog_slope(&cfg.hbars, &gaps), 1.7, 2.3));
    Ok(metrics)
}
