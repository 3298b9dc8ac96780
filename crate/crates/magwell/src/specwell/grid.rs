use serde::{Deserialize, Serialize};

use crate::fieldlab::{Rect, Vec2};

/// Interior nodes of a Dirichlet box: `x_i = x₀ + (i + 1)h` for `i < n`, so
/// the boundary nodes `i = −1` and `i = n` carry the zero condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2 {
    pub rect: Rect,
    pub n: usize,
    pub spacing: [f64; 2],
}

impl Grid2 {
    pub fn new(rect: Rect, n: usize) -> Self {
        let spacing = [rect.width() / (n + 1) as f64, rect.height() / (n + 1) as f64];
        Grid2 { rect, n, spacing }
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major index, `i1` running fastest.
    pub fn index(&self, i1: usize, i2: usize) -> usize {
        i2 * self.n + i1
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.n, idx / self.n)
    }

    pub fn x(&self, i1: usize) -> f64 {
        self.rect.min[0] + (i1 + 1) as f64 * self.spacing[0]
    }

    pub fn y(&self, i2: usize) -> f64 {
        self.rect.min[1] + (i2 + 1) as f64 * self.spacing[1]
    }

    pub fn point(&self, idx: usize) -> Vec2 {
        let (i1, i2) = self.coords(idx);
        [self.x(i1), self.y(i2)]
    }

    /// Area weight of one node.
    pub fn cell_area(&self) -> f64 {
        self.spacing[0] * self.spacing[1]
    }
}

/// Cell-centred periodic grid `x_j = lo + (j + ½)h`, `h = (hi − lo)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1 {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1 {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Grid1 { lo, hi, n }
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.lo + (j as f64 + 0.5) * self.spacing()
    }

    /// Largest resolved momentum `πħ/h`.
    pub fn nyquist(&self, hbar: f64) -> f64 {
        std::f64::consts::PI * hbar / self.spacing()
    }
}
