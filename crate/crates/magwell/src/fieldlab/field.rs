use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::FieldError;
use crate::poly::Poly2;

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// Axis-aligned rectangle `[min.0, max.0] × [min.1, max.1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn square(half_width: f64) -> Self {
        Rect {
            min: [-half_width, -half_width],
            max: [half_width, half_width],
        }
    }

    pub fn centered(center: Vec2, half_width: f64) -> Self {
        Rect {
            min: [center[0] - half_width, center[1] - half_width],
            max: [center[0] + half_width, center[1] + half_width],
        }
    }

    pub fn contains(&self, q: Vec2) -> bool {
        q[0] >= self.min[0] && q[0] <= self.max[0] && q[1] >= self.min[1] && q[1] <= self.max[1]
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    /// Regular `n × n` grid of points including the corners.
    pub fn grid(&self, n: usize) -> Vec<Vec2> {
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = i as f64 / (n - 1) as f64;
                let t = j as f64 / (n - 1) as f64;
                pts.push([
                    self.min[0] + s * self.width(),
                    self.min[1] + t * self.height(),
                ]);
            }
        }
        pts
    }
}

/// `B ≥ lower_bound` whenever `|q| ≥ radius`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confinement {
    pub lower_bound: f64,
    pub radius: f64,
}

/// Field descriptors accepted by [`MagneticField::from_spec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FieldSpec {
    Constant(f64),
    /// `(i, j, c)` meaning `c x^i y^j`.
    Polynomial(Vec<(usize, usize, f64)>),
    /// `B = sum_k c_k r^{2k}`.
    Radial(Vec<f64>),
    /// `B = 2 + x² + y² + x³/3 + x⁴/20`.
    Fig2,
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldSpec::Constant(b) => write!(f, "constant {b}"),
            FieldSpec::Fig2 => write!(f, "fig2"),
            FieldSpec::Radial(c) => {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "radial {}", parts.join(", "))
            }
            FieldSpec::Polynomial(t) => {
                let parts: Vec<String> = t.iter().map(|(i, j, c)| format!("{i},{j}:{c}")).collect();
                write!(f, "polynomial {}", parts.join("; "))
            }
        }
    }
}

type ScalarFn = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Profile {
    Polynomial {
        b: Poly2,
        bx: Poly2,
        by: Poly2,
        bxx: Poly2,
        bxy: Poly2,
        byy: Poly2,
    },
    Sampled(ScalarFn),
}

/// Scalar magnetic field `B(q)` on the plane, oriented so that `B > 0`.
#[derive(Clone)]
pub struct MagneticField {
    profile: Profile,
    sign: f64,
    domain: Rect,
    confinement: Option<Confinement>,
    spec: Option<FieldSpec>,
}

impl fmt::Debug for MagneticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MagneticField")
            .field("spec", &self.spec)
            .field("flipped", &self.flipped())
            .field("domain", &self.domain)
            .field("confinement", &self.confinement)
            .finish()
    }
}

/// Location and second-order data of the minimum of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMinimum {
    pub point: Vec2,
    pub value: f64,
    pub hessian: Mat2,
}

const SAMPLING_GRID: usize = 65;

impl MagneticField {
    pub fn from_spec(spec: &FieldSpec) -> Result<Self, FieldError> {
        let mut field = match spec {
            FieldSpec::Constant(b0) => Self::polynomial(Poly2::constant(*b0), None)?,
            FieldSpec::Polynomial(terms) => {
                if terms.is_empty() {
                    return Err(FieldError::InvalidSpec("empty polynomial".into()));
                }
                Self::polynomial(Poly2::from_terms(terms), None)?
            }
            FieldSpec::Radial(c) => {
                if c.is_empty() {
                    return Err(FieldError::InvalidSpec("empty radial profile".into()));
                }
                let mut terms = Vec::new();
                for (k, &ck) in c.iter().enumerate() {
                    for i in 0..=k {
                        let binom = binomial(k, i) as f64;
                        terms.push((2 * i, 2 * (k - i), ck * binom));
                    }
                }
                Self::polynomial(Poly2::from_terms(&terms), None)?
            }
            FieldSpec::Fig2 => Self::fig2(),
        };
        field.spec = Some(spec.clone());
        Ok(field)
    }

    pub fn constant(b0: f64) -> Result<Self, FieldError> {
        Self::from_spec(&FieldSpec::Constant(b0))
    }

    /// The well `B = 2 + x² + y² + x³/3 + x⁴/20`, confining with
    /// `B ≥ 6` for `|q| ≥ 3` (since `1 + x/3 + x²/20 ≥ 4/9`).
    pub fn fig2() -> Self {
        let b = Poly2::from_terms(&[
            (0, 0, 2.0),
            (2, 0, 1.0),
            (0, 2, 1.0),
            (3, 0, 1.0 / 3.0),
            (4, 0, 1.0 / 20.0),
        ]);
        let conf = Confinement {
            lower_bound: 6.0,
            radius: 3.0,
        };
        let mut f = Self::polynomial(b, Some(conf)).expect("fig2 field is positive");
        f.spec = Some(FieldSpec::Fig2);
        f
    }

    /// Polynomial field with analytic derivatives.
    pub fn polynomial(b: Poly2, confinement: Option<Confinement>) -> Result<Self, FieldError> {
        let bx = b.d_x();
        let by = b.d_y();
        let profile = Profile::Polynomial {
            bxx: bx.d_x(),
            bxy: bx.d_y(),
            byy: by.d_y(),
            b,
            bx,
            by,
        };
        Self::finish(profile, confinement)
    }

    /// Field given by a closure; derivatives come from fourth-order central
    /// differences with step `1e-4·(1+|q|)`.
    pub fn from_fn<F>(f: F, domain: Rect, confinement: Option<Confinement>) -> Result<Self, FieldError>
    where
        F: Fn(Vec2) -> f64 + Send + Sync + 'static,
    {
        let mut field = Self::finish_with_domain(Profile::Sampled(Arc::new(f)), confinement, domain)?;
        field.spec = None;
        Ok(field)
    }

    fn finish(profile: Profile, confinement: Option<Confinement>) -> Result<Self, FieldError> {
        let domain = match confinement {
            Some(c) => Rect::square(c.radius + 1.0),
            None => Rect::square(5.0),
        };
        Self::finish_with_domain(profile, confinement, domain)
    }

    fn finish_with_domain(
        profile: Profile,
        confinement: Option<Confinement>,
        domain: Rect,
    ) -> Result<Self, FieldError> {
        let mut field = MagneticField {
            profile,
            sign: 1.0,
            domain,
            confinement,
            spec: None,
        };
        let mut seen_pos = false;
        let mut seen_neg = false;
        for q in domain.grid(SAMPLING_GRID) {
            let v = field.raw(q);
            if !v.is_finite() || v == 0.0 {
                return Err(FieldError::Vanishing { q });
            }
            if v > 0.0 {
                seen_pos = true;
            } else {
                seen_neg = true;
            }
            if seen_pos && seen_neg {
                return Err(FieldError::SignChange { q });
            }
        }
        if seen_neg {
            field.sign = -1.0;
        }
        Ok(field)
    }

    /// Replaces the working domain and re-validates the sign condition.
    pub fn with_domain(self, domain: Rect) -> Result<Self, FieldError> {
        let spec = self.spec.clone();
        let sign = self.sign;
        let mut f = Self::finish_with_domain(self.profile, self.confinement, domain)?;
        f.spec = spec;
        f.sign *= sign;
        Ok(f)
    }

    fn raw(&self, q: Vec2) -> f64 {
        match &self.profile {
            Profile::Polynomial { b, .. } => b.eval(q[0], q[1]),
            Profile::Sampled(f) => f(q),
        }
    }

    pub fn eval(&self, q: Vec2) -> f64 {
        self.sign * self.raw(q)
    }

    pub fn grad(&self, q: Vec2) -> Vec2 {
        match &self.profile {
            Profile::Polynomial { bx, by, .. } => [
                self.sign * bx.eval(q[0], q[1]),
                self.sign * by.eval(q[0], q[1]),
            ],
            Profile::Sampled(_) => {
                let h = fd_step(q);
                [
                    self.sign * d1(|t| self.raw([q[0] + t, q[1]]), h),
                    self.sign * d1(|t| self.raw([q[0], q[1] + t]), h),
                ]
            }
        }
    }

    pub fn hess(&self, q: Vec2) -> Mat2 {
        match &self.profile {
            Profile::Polynomial { bxx, bxy, byy, .. } => {
                let xy = self.sign * bxy.eval(q[0], q[1]);
                [
                    [self.sign * bxx.eval(q[0], q[1]), xy],
                    [xy, self.sign * byy.eval(q[0], q[1])],
                ]
            }
            Profile::Sampled(_) => {
                let h = fd_step(q);
                let xx = d2(|t| self.raw([q[0] + t, q[1]]), h);
                let yy = d2(|t| self.raw([q[0], q[1] + t]), h);
                let xy = d1(|s| d1(|t| self.raw([q[0] + s, q[1] + t]), h), h);
                [
                    [self.sign * xx, self.sign * xy],
                    [self.sign * xy, self.sign * yy],
                ]
            }
        }
    }

    /// Polynomial representation (orientation applied), when available.
    pub fn polynomial_form(&self) -> Option<Poly2> {
        match &self.profile {
            Profile::Polynomial { b, .. } => Some(b.scaled(self.sign)),
            Profile::Sampled(_) => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(&self.profile, Profile::Polynomial { b, .. } if b.is_constant())
    }

    pub fn domain_box(&self) -> Rect {
        self.domain
    }

    pub fn confinement(&self) -> Option<Confinement> {
        self.confinement
    }

    /// True when the input field was negative and has been flipped.
    pub fn flipped(&self) -> bool {
        self.sign < 0.0
    }

    pub fn spec(&self) -> Option<&FieldSpec> {
        self.spec.as_ref()
    }

    /// Maximum of `B` over a sampling grid of the domain.
    pub fn max_on_domain(&self) -> f64 {
        self.domain
            .grid(SAMPLING_GRID)
            .into_iter()
            .map(|q| self.eval(q))
            .fold(f64::MIN, f64::max)
    }

    /// Global minimum of `B` on the domain: best grid sample refined by
    /// Newton's method on `∇B = 0`.
    pub fn minimum(&self) -> Result<FieldMinimum, FieldError> {
        let mut best = self.domain.min;
        let mut best_val = f64::INFINITY;
        for q in self.domain.grid(2 * SAMPLING_GRID + 1) {
            let v = self.eval(q);
            if v < best_val {
                best_val = v;
                best = q;
            }
        }
        let mut q = best;
        for _ in 0..100 {
            let g = self.grad(q);
            let h = self.hess(q);
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
            let dy = (-h[1][0] * g[0] + h[0][0] * g[1]) / det;
            q = [q[0] - dx, q[1] - dy];
            if dx.abs().max(dy.abs()) < 1e-15 {
                break;
            }
        }
        let hessian = self.hess(q);
        let det = hessian[0][0] * hessian[1][1] - hessian[0][1] * hessian[1][0];
        let scale = hessian[0][0].abs().max(hessian[1][1].abs()).max(1e-300);
        if det <= 1e-10 * scale * scale || hessian[0][0] <= 0.0 || !self.domain.contains(q) {
            return Err(FieldError::DegenerateMinimum { q });
        }
        Ok(FieldMinimum {
            point: q,
            value: self.eval(q),
            hessian,
        })
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn fd_step(q: Vec2) -> f64 {
    1e-4 * (1.0 + (q[0] * q[0] + q[1] * q[1]).sqrt())
}

fn d1<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
}

fn d2<F: Fn(f64) -> f64>(f: F, h: f64) -> f64 {
    (-f(2.0 * h) + 16.0 * f(h) - 30.0 * f(0.0) + 16.0 * f(-h) - f(-2.0 * h)) / (12.0 * h * h)
}
