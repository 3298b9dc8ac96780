//! Set-ups shared by the experiments and the acceptance criteria.

use magwell::fieldlab::{DarbouxChart, Gauge, MagneticField, PhaseState, Rect, Vec2, VectorPotential};
use magwell::specwell::{
    assemble_magnetic_laplacian, lowest_eigenpairs_with, weyl_quantize_1d, DiscreteOperator, EigenOptions, Grid1,
    GridInfo, Grid2, LaplacianOptions, SpectralResult,
};
use magwell::starbirk::NormalFormResult;
use magwell::symflow::{compare_flows, integrate_h_with, integrate_k, Integrator};

use crate::config::ExperimentConfig;
use crate::{numerical, BenchError};

/// Radius of trust for the slow variables of `K_N` around the basepoint.
pub const SLOW_RADIUS: f64 = 1.5;
/// Radius bound for the sublevel-area quadrature.
pub const AREA_SEARCH_RADIUS: f64 = 3.0;

pub struct Setup {
    pub field: MagneticField,
    pub potential: VectorPotential,
}

impl Setup {
    pub fn new(field: MagneticField, gauge: Gauge) -> Result<Self, BenchError> {
        let potential = VectorPotential::build(&field, gauge).map_err(numerical("vector potential"))?;
        Ok(Setup { field, potential })
    }

    pub fn fig2() -> Self {
        Self::new(MagneticField::fig2(), Gauge::LandauX).expect("the Landau gauge exists for every field")
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Self, BenchError> {
        let field = MagneticField::from_spec(&cfg.field).map_err(|e| BenchError::Config(format!("field: {e}")))?;
        let potential = VectorPotential::build(&field, cfg.gauge).map_err(|e| BenchError::Config(format!("gauge: {e}")))?;
        Ok(Setup { field, potential })
    }

    /// State at `q` with velocity `v`: `p = A(q) + v/2`.
    pub fn with_velocity(&self, q: Vec2, v: Vec2) -> PhaseState {
        let a = self.potential.eval(q);
        PhaseState::new(q, [a[0] + 0.5 * v[0], a[1] + 0.5 * v[1]])
    }

    /// Smallest value of `B`: the non-degenerate minimum, or `B(0)` when
    /// there is none (constant fields).
    pub fn b_min(&self) -> f64 {
        self.field.minimum().map(|m| m.value).unwrap_or_else(|_| self.field.eval([0.0, 0.0]))
    }

    /// State of energy `ε` whose guiding centre is `center`: the velocity
    /// `(0, 2√ε)` is placed at `q = center − (2√ε/(2B(q)), 0)`.
    pub fn state_around(&self, center: Vec2, energy: f64) -> PhaseState {
        let speed = 2.0 * energy.sqrt();
        let mut q1 = center[0];
        for _ in 0..60 {
            q1 = center[0] - speed / (2.0 * self.field.eval([q1, center[1]]));
        }
        self.with_velocity([q1, center[1]], [0.0, speed])
    }

    /// Magnetic Laplacian on `[−box_scale·√ħ, box_scale·√ħ]²`.
    pub fn well_operator(&self, hbar: f64, cfg: &ExperimentConfig) -> Result<DiscreteOperator, BenchError> {
        let options = LaplacianOptions {
            order: cfg.stencil_order,
            ..Default::default()
        };
        let rect = Rect::square(cfg.box_scale * hbar.sqrt());
        assemble_magnetic_laplacian(&self.field, &self.potential, hbar, rect, cfg.grid_n, options)
            .map_err(numerical("magnetic Laplacian"))
    }

    /// Magnetic Laplacian on `[−count_half_width, count_half_width]²` with
    /// spacing at most `spacing_factor·√(ħ/level)`.
    pub fn counting_operator(&self, hbar: f64, cfg: &ExperimentConfig) -> Result<DiscreteOperator, BenchError> {
        let options = LaplacianOptions {
            order: cfg.count_stencil_order,
            ..Default::default()
        };
        let spacing = cfg.spacing_factor * (hbar / cfg.level).sqrt();
        let n = ((2.0 * cfg.count_half_width / spacing).ceil() as usize).saturating_sub(1);
        assemble_magnetic_laplacian(
            &self.field,
            &self.potential,
            hbar,
            Rect::square(cfg.count_half_width),
            n,
            options,
        )
        .map_err(numerical("magnetic Laplacian"))
    }

    /// `μ_j`: eigenvalues of the Weyl quantization of `B∘g⁻¹` with
    /// semiclassical parameter `ħ`, sorted.
    pub fn band_eigenvalues(&self, hbar: f64, cfg: &ExperimentConfig) -> Result<Vec<f64>, BenchError> {
        let chart = DarbouxChart::new(&self.field);
        let symbol = |x: f64, xi: f64| {
            chart
                .inverse([x, xi])
                .map(|q| self.field.eval(q))
                .unwrap_or(f64::INFINITY)
        };
        let n = (3.0 * cfg.weyl_momentum / (std::f64::consts::PI * hbar)).ceil() as usize;
        let grid = Grid1::new(-cfg.weyl_half_width, cfg.weyl_half_width, n);
        let op = weyl_quantize_1d(symbol, hbar, grid, cfg.weyl_cap).map_err(numerical("Weyl quantization"))?;
        Ok(op.eigenvalues())
    }
}

pub fn solve(op: &DiscreteOperator, k: usize, refine: bool, keep_vectors: bool, seed: u64) -> Result<SpectralResult, BenchError> {
    let opts = EigenOptions {
        refine,
        keep_vectors,
        seed,
        ..Default::default()
    };
    lowest_eigenpairs_with(op, k, &opts).map_err(numerical("eigensolver"))
}

pub fn square_grid(op: &DiscreteOperator) -> Result<Grid2, BenchError> {
    match op.grid_info() {
        GridInfo::Square(g) => Ok(g),
        GridInfo::Line(_) => Err(BenchError::Numerical("expected a two-dimensional grid".into())),
    }
}

/// `d(t)` between the flow of `H` from [`Setup::state_around`] and the flow
/// of `K_N` mapped through `Φ_N`, for one order and energy.
pub struct FlowComparison {
    pub order: usize,
    pub energy: f64,
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
}

impl FlowComparison {
    /// `d(T)` at the final time.
    pub fn final_distance(&self) -> f64 {
        *self.distances.last().expect("at least the initial sample")
    }
}

pub fn compare_flow_orders(setup: &Setup, cfg: &ExperimentConfig) -> Result<Vec<FlowComparison>, BenchError> {
    let nf = NormalFormResult::compute(
        &setup.field,
        &setup.potential,
        cfg.flow_center,
        (cfg.fast_order, cfg.slow_order),
    )
    .map_err(numerical("normal form"))?;
    let reference: Vec<_> = cfg
        .flow_energies
        .iter()
        .map(|&energy| {
            let s0 = setup.state_around(cfg.flow_center, energy);
            integrate_h_with(
                &setup.field,
                &setup.potential,
                s0,
                cfg.flow_t_end,
                cfg.flow_dt,
                Integrator::Composition4,
                cfg.flow_stride,
            )
            .map(|t| (energy, s0, t))
            .map_err(numerical("flow of H"))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for &order in &cfg.orders {
        let transform = nf.build_transform(order).map_err(numerical("transform"))?;
        let k = nf.classical_normal_form(order, SLOW_RADIUS).map_err(numerical("normal form"))?;
        for (energy, s0, th) in &reference {
            let z0 = transform.inverse(s0).map_err(numerical("inverse transform"))?;
            let tk = integrate_k(&k, z0, cfg.flow_t_end, cfg.flow_dt, Integrator::Composition4, cfg.flow_stride)
                .map_err(numerical("flow of K"))?;
            let d = compare_flows(th, &tk, &transform).map_err(numerical("flow comparison"))?;
            out.push(FlowComparison {
                order,
                energy: *energy,
                times: d.times,
                distances: d.distance,
            });
        }
    }
    Ok(out)
}
