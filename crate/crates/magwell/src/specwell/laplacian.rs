use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::banded::BandMatrix;
use super::grid::Grid2;
use super::SpecError;
use crate::fieldlab::{MagneticField, Rect, VectorPotential};
use crate::numeric::gauss_legendre;

/// Gauss–Legendre nodes per grid segment for the link integrals of `A`.
pub const LINK_QUADRATURE_NODES: usize = 8;

/// Central second-difference weights `c₀, c₁, …, c_r` of the given even order.
pub fn second_difference_weights(order: usize) -> Result<Vec<f64>, SpecError> {
    Ok(match order {
        2 => vec![-2.0, 1.0],
        4 => vec![-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
        6 => vec![-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0],
        8 => vec![-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0],
        _ => return Err(SpecError::UnsupportedOrder(order)),
    })
}

/// Assembly settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianOptions {
    /// Stencil order: 2 gives the 5-point scheme.
    pub order: usize,
    /// When set, the sublevel set `{B ≤ level}` must keep the margin
    /// `2√(ħ/min B)` from the box boundary.
    pub well_level: Option<f64>,
    /// Forces every link phase to 1 (free Laplacian).
    pub free: bool,
}

impl Default for LaplacianOptions {
    fn default() -> Self {
        LaplacianOptions {
            order: 2,
            well_level: None,
            free: false,
        }
    }
}

/// `(−iħ∇ − A)²` on a Dirichlet grid.
///
/// Along each grid line the kinetic term is gauge-transformed to the free
/// one: with `θ` a primitive of the tangential component of `A` along the
/// line, a hop from node `j` to node `i` carries `e^{i(θ_i − θ_j)/ħ}`, the
/// Peierls factor `exp(−(i/ħ)∫_i^j A·dl)`. The primitive is accumulated from
/// Gauss–Legendre integrals over single grid segments, so hops of every
/// length see exactly additive phases and gauge changes act as a diagonal
/// unitary.
#[derive(Debug, Clone)]
pub struct MagneticLaplacian {
    grid: Grid2,
    hbar: f64,
    options: LaplacianOptions,
    weights: Vec<f64>,
    /// Free second difference along one grid line, `(column, weight)` per row.
    line: Vec<Vec<(usize, f64)>>,
    /// `e^{iθ/ħ}` along lines of constant `q₂` and of constant `q₁`.
    phase: [Vec<Complex64>; 2],
    /// `ħ²/h²` per axis.
    scale: [f64; 2],
    field: MagneticField,
    potential: VectorPotential,
    b_floor: f64,
}

impl MagneticLaplacian {
    pub fn assemble(
        field: &MagneticField,
        potential: &VectorPotential,
        hbar: f64,
        rect: Rect,
        n: usize,
        options: LaplacianOptions,
    ) -> Result<Self, SpecError> {
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(SpecError::InvalidHbar(hbar));
        }
        if n < super::MIN_GRID {
            return Err(SpecError::GridTooSmall { n, min: super::MIN_GRID });
        }
        let weights = second_difference_weights(options.order)?;
        let line = line_stencil(&weights, n);
        let grid = Grid2::new(rect, n);
        let mut b_floor = f64::INFINITY;
        for idx in 0..grid.len() {
            b_floor = b_floor.min(field.eval(grid.point(idx)));
        }
        if let Some(level) = options.well_level {
            check_margin(field, &rect, hbar, level, b_floor)?;
        }
        let phase = if options.free {
            [vec![Complex64::new(1.0, 0.0); grid.len()], vec![Complex64::new(1.0, 0.0); grid.len()]]
        } else {
            line_phases(&grid, potential, hbar)
        };
        let scale = [
            hbar * hbar / (grid.spacing[0] * grid.spacing[0]),
            hbar * hbar / (grid.spacing[1] * grid.spacing[1]),
        ];
        Ok(MagneticLaplacian {
            grid,
            hbar,
            options,
            weights,
            line,
            phase,
            scale,
            field: field.clone(),
            potential: potential.clone(),
            b_floor,
        })
    }

    /// Same operator on a grid with `n` nodes per side.
    pub fn regrid(&self, n: usize) -> Result<Self, SpecError> {
        Self::assemble(&self.field, &self.potential, self.hbar, self.grid.rect, n, self.options)
    }

    pub fn grid(&self) -> &Grid2 {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn options(&self) -> &LaplacianOptions {
        &self.options
    }

    pub fn field(&self) -> &MagneticField {
        &self.field
    }

    pub fn potential(&self) -> &VectorPotential {
        &self.potential
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    /// Smallest `B` over the grid nodes.
    pub fn b_floor(&self) -> f64 {
        self.b_floor
    }

    /// Stencil half-width.
    pub fn reach(&self) -> usize {
        self.weights.len() - 1
    }

    /// Half-bandwidth in the row-major ordering.
    pub fn bandwidth(&self) -> usize {
        self.reach() * self.grid.n
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let n = self.grid.n;
        let [p1, p2] = &self.phase;
        let [s1, s2] = self.scale;
        for i2 in 0..n {
            for i1 in 0..n {
                let i = i2 * n + i1;
                let mut side1 = Complex64::new(0.0, 0.0);
                for &(j, w) in &self.line[i1] {
                    let k = i2 * n + j;
                    side1 += p1[k].conj() * x[k] * w;
                }
                let mut side2 = Complex64::new(0.0, 0.0);
                for &(j, w) in &self.line[i2] {
                    let k = j * n + i1;
                    side2 += p2[k].conj() * x[k] * w;
                }
                y[i] = -(p1[i] * side1 * s1 + p2[i] * side2 * s2);
            }
        }
    }

    /// Lower band of `H − shift·I`: entry `(i + k, i)` for `k ≤ bandwidth`.
    pub fn lower_band(&self, shift: f64) -> BandMatrix {
        let n = self.grid.n;
        let mut band = BandMatrix::zeros(self.dim(), self.bandwidth());
        let [p1, p2] = &self.phase;
        let [s1, s2] = self.scale;
        for i2 in 0..n {
            for i1 in 0..n {
                let i = i2 * n + i1;
                band.set(i, 0, Complex64::new(-shift, 0.0));
            }
        }
        for i2 in 0..n {
            for i1 in 0..n {
                let i = i2 * n + i1;
                for &(j, w) in self.line[i1].iter().filter(|(j, _)| *j >= i1) {
                    // Row i2·n + j, column i.
                    let k = i2 * n + j;
                    let v = band.get(i, k - i) - p1[k] * p1[i].conj() * (s1 * w);
                    band.set(i, k - i, v);
                }
                for &(j, w) in self.line[i2].iter().filter(|(j, _)| *j >= i2) {
                    let k = j * n + i1;
                    let v = band.get(i, k - i) - p2[k] * p2[i].conj() * (s2 * w);
                    band.set(i, k - i, v);
                }
            }
        }
        band
    }
}

/// The centred second difference on `n` interior nodes with Dirichlet walls
/// one spacing beyond either end. Stencil points past a wall are odd images
/// of interior nodes, which keeps wide stencils consistent up to the wall and
/// the matrix symmetric; the 5-point scheme never reaches past the wall.
fn line_stencil(weights: &[f64], n: usize) -> Vec<Vec<(usize, f64)>> {
    let n_signed = n as i64;
    (0..n_signed)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = vec![(i as usize, weights[0])];
            let mut add = |j: usize, w: f64| match row.iter_mut().find(|e| e.0 == j) {
                Some(e) => e.1 += w,
                None => row.push((j, w)),
            };
            for (d, &w) in weights.iter().enumerate().skip(1) {
                for t in [i - d as i64, i + d as i64] {
                    if (0..n_signed).contains(&t) {
                        add(t as usize, w);
                        continue;
                    }
                    // Walls sit at −1 and n; the image of t is 2·wall − t.
                    let image = if t < 0 { -2 - t } else { 2 * n_signed - t };
                    if (0..n_signed).contains(&image) {
                        add(image as usize, -w);
                    }
                }
            }
            row.sort_by_key(|e| e.0);
            row
        })
        .collect()
}

/// Accumulates `θ` along every grid line and returns `e^{iθ/ħ}`.
fn line_phases(grid: &Grid2, potential: &VectorPotential, hbar: f64) -> [Vec<Complex64>; 2] {
    let (nodes, gw) = gauss_legendre(LINK_QUADRATURE_NODES);
    let n = grid.n;
    let segment = |from: [f64; 2], to: [f64; 2], axis: usize| -> f64 {
        let half = [(to[0] - from[0]) * 0.5, (to[1] - from[1]) * 0.5];
        let mid = [(to[0] + from[0]) * 0.5, (to[1] + from[1]) * 0.5];
        let len = 2.0 * half[axis].abs();
        nodes
            .iter()
            .zip(&gw)
            .map(|(t, wt)| {
                let q = [mid[0] + t * half[0], mid[1] + t * half[1]];
                wt * potential.eval(q)[axis]
            })
            .sum::<f64>()
            * 0.5
            * len
    };
    let mut theta1 = vec![0.0; grid.len()];
    let mut theta2 = vec![0.0; grid.len()];
    for i2 in 0..n {
        for i1 in 1..n {
            let i = grid.index(i1, i2);
            theta1[i] = theta1[i - 1] + segment([grid.x(i1 - 1), grid.y(i2)], [grid.x(i1), grid.y(i2)], 0);
        }
    }
    for i1 in 0..n {
        for i2 in 1..n {
            let i = grid.index(i1, i2);
            theta2[i] = theta2[i - n] + segment([grid.x(i1), grid.y(i2 - 1)], [grid.x(i1), grid.y(i2)], 1);
        }
    }
    let to_phase = |t: &Vec<f64>| t.iter().map(|v| Complex64::from_polar(1.0, v / hbar)).collect();
    [to_phase(&theta1), to_phase(&theta2)]
}

/// Checks that `{B ≤ level}` stays `2√(ħ/B_min)` away from the boundary,
/// sampling the boundary strip on a fine lattice.
fn check_margin(field: &MagneticField, rect: &Rect, hbar: f64, level: f64, b_floor: f64) -> Result<(), SpecError> {
    let margin = 2.0 * (hbar / b_floor).sqrt();
    let samples = 200;
    let mut closest = f64::INFINITY;
    for i in 0..=samples {
        for j in 0..=samples {
            let q = [
                rect.min[0] + rect.width() * i as f64 / samples as f64,
                rect.min[1] + rect.height() * j as f64 / samples as f64,
            ];
            if field.eval(q) <= level {
                let dist = (q[0] - rect.min[0])
                    .min(rect.max[0] - q[0])
                    .min(q[1] - rect.min[1])
                    .min(rect.max[1] - q[1]);
                closest = closest.min(dist);
            }
        }
    }
    if closest < margin {
        return Err(SpecError::BoxTooSmall {
            distance: closest,
            required: margin,
        });
    }
    Ok(())
}
