//! Checkerboard weight and the saddle-point fields `u₂`, `v`, `b₂ = ∇^⊥v`.
//!
//! All fields vanish at the origin; [`Point2::is_origin`] flags that point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::quadrature::GaussRule;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x1: f64,
    pub x2: f64,
}

impl Point2 {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Point2 { x1, x2 }
    }

    pub fn is_origin(&self) -> bool {
        self.x1 == 0.0 && self.x2 == 0.0
    }

    pub fn norm(&self) -> f64 {
        self.x1.hypot(self.x2)
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(x: [f64; 2]) -> Self {
        Point2::new(x[0], x[1])
    }
}

/// 1 on the vertical cones `|x₁| < |x₂|`, 0 on the closed horizontal cones.
#[inline]
pub fn eval_weight(x: Point2) -> u8 {
    (x.x1.abs() < x.x2.abs()) as u8
}

/// Cubic smoothstep from 0 at `lo = 1/4` to 1 at `hi = 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaCutoff {
    pub lo: f64,
    pub hi: f64,
}

impl Default for ThetaCutoff {
    fn default() -> Self {
        ThetaCutoff { lo: 0.25, hi: 0.5 }
    }
}

impl ThetaCutoff {
    #[inline]
    fn tau(&self, s: f64) -> f64 {
        ((s - self.lo) / (self.hi - self.lo)).clamp(0.0, 1.0)
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        let t = self.tau(s);
        t * t * (3.0 - 2.0 * t)
    }

    #[inline]
    pub fn derivative(&self, s: f64) -> f64 {
        let t = self.tau(s);
        6.0 * t * (1.0 - t) / (self.hi - self.lo)
    }

    /// `sup |θ'|`, attained at the midpoint of the transition.
    pub fn max_slope(&self) -> f64 {
        1.5 / (self.hi - self.lo)
    }
}

#[inline]
fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SaddleFields {
    pub theta: ThetaCutoff,
}

impl SaddleFields {
    /// `u₂ = ½ sgn(x₂) θ(|x₂|/|x₁|)`.
    #[inline]
    pub fn u2(&self, x: Point2) -> f64 {
        if x.x2 == 0.0 {
            return 0.0;
        }
        let rho = if x.x1 == 0.0 {
            f64::INFINITY
        } else {
            x.x2.abs() / x.x1.abs()
        };
        0.5 * sgn(x.x2) * self.theta.value(rho)
    }

    /// `v = ½ sgn(x₁) θ(|x₁|/|x₂|)`, the stream function of `b₂`.
    #[inline]
    pub fn v(&self, x: Point2) -> f64 {
        self.u2(Point2::new(x.x2, x.x1))
    }

    #[inline]
    pub fn grad_u2(&self, x: Point2) -> [f64; 2] {
        if x.x1 == 0.0 || x.x2 == 0.0 {
            return [0.0, 0.0];
        }
        let ax1 = x.x1.abs();
        let ax2 = x.x2.abs();
        let dth = self.theta.derivative(ax2 / ax1);
        if dth == 0.0 {
            return [0.0, 0.0];
        }
        [
            -0.5 * sgn(x.x2) * dth * ax2 * sgn(x.x1) / (ax1 * ax1),
            0.5 * dth / ax1,
        ]
    }

    /// `b₂ = ∇^⊥ v = (−∂₂v, ∂₁v)`.
    #[inline]
    pub fn b2(&self, x: Point2) -> [f64; 2] {
        // ∇v is ∇u₂ with the coordinates swapped.
        let g = self.grad_u2(Point2::new(x.x2, x.x1));
        let dv = [g[1], g[0]];
        [-dv[1], dv[0]]
    }

    /// Matrix potential `A₂ = [[0, −v], [v, 0]]` with row divergence `b₂`.
    pub fn a2(&self, x: Point2) -> [[f64; 2]; 2] {
        let v = self.v(x);
        [[0.0, -v], [v, 0.0]]
    }
}

/// `∫_{∂Ω} (b₂·ν) u₂ dS` by composite two-point Gauss–Legendre with
/// `n_quad` nodes per side. Returns the four side contributions in the
/// order bottom, right, top, left.
pub fn boundary_flux_by_side(n_quad: usize) -> [f64; 4] {
    let f = SaddleFields::default();
    let rule = GaussRule::new(2);
    let panels = (n_quad / 2).max(1);
    let h = 2.0 / panels as f64;
    let side = |pt: &dyn Fn(f64) -> (Point2, [f64; 2])| -> f64 {
        let mut acc = 0.0;
        for k in 0..panels {
            let a = -1.0 + k as f64 * h;
            acc += rule.integrate(a, a + h, |s| {
                let (x, nu) = pt(s);
                let b = f.b2(x);
                (b[0] * nu[0] + b[1] * nu[1]) * f.u2(x)
            });
        }
        acc
    };
    [
        side(&|s| (Point2::new(s, -1.0), [0.0, -1.0])),
        side(&|s| (Point2::new(1.0, s), [1.0, 0.0])),
        side(&|s| (Point2::new(s, 1.0), [0.0, 1.0])),
        side(&|s| (Point2::new(-1.0, s), [-1.0, 0.0])),
    ]
}

pub fn boundary_flux(n_quad: usize) -> f64 {
    boundary_flux_by_side(n_quad).iter().sum()
}

/// Max of `|∇u₂|·|b₂|` over uniform random points of Ω.
pub fn disjoint_support_audit(n_samples: usize, seed: u64) -> f64 {
    let f = SaddleFields::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let x = Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g = f.grad_u2(x);
        let b = f.b2(x);
        worst = worst.max(g[0].hypot(g[1]) * b[0].hypot(b[1]));
    }
    worst
}

/// `∫_Ω b₂·∇φ` for the bump `φ(x) = (1 − |x−c|²/R²)³₊`.
///
/// The integral is taken in polar coordinates over the four thin cones
/// that carry `b₂`, where `r·b₂` depends on the angle only.
pub fn solenoidal_residual(center: [f64; 2], radius: f64) -> f64 {
    let f = SaddleFields::default();
    let ang = GaussRule::new(24);
    let rad = GaussRule::new(8);
    let grad_phi = |x: [f64; 2]| -> [f64; 2] {
        let dx = [x[0] - center[0], x[1] - center[1]];
        let q = 1.0 - (dx[0] * dx[0] + dx[1] * dx[1]) / (radius * radius);
        if q <= 0.0 {
            return [0.0, 0.0];
        }
        let c = -6.0 * q * q / (radius * radius);
        [c * dx[0], c * dx[1]]
    };
    let r_max = center[0].hypot(center[1]) + radius;
    // Radial panels refined where the bump boundary crosses.
    let r_lo = (center[0].hypot(center[1]) - radius).max(0.0);
    let n_panels = 64;
    // Cones |x₁|/|x₂| ∈ [1/4, 1/2] around each vertical half-axis.
    let (c_lo, c_hi) = ((2.0f64).atan(), (4.0f64).atan());
    let mut total = 0.0;
    for base in [0.0, std::f64::consts::PI] {
        for (a, b) in [
            (c_lo, c_hi),
            (std::f64::consts::PI - c_hi, std::f64::consts::PI - c_lo),
        ] {
            let (a, b) = (base + a, base + b);
            for (phi, wphi) in ang.on(a, b) {
                let (s, c) = phi.sin_cos();
                let h = (r_max - r_lo) / n_panels as f64;
                for k in 0..n_panels {
                    let r0 = r_lo + k as f64 * h;
                    for (r, wr) in rad.on(r0, r0 + h) {
                        let x = [r * c, r * s];
                        let bv = f.b2(Point2::new(x[0], x[1]));
                        let g = grad_phi(x);
                        total += wphi * wr * r * (bv[0] * g[0] + bv[1] * g[1]);
                    }
                }
            }
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldRow {
    pub x1: f64,
    pub x2: f64,
    pub a: u8,
    pub u2: f64,
    pub grad_u2: f64,
    pub b2: f64,
}

/// Cell-centred samples on an `n × n` grid of Ω (the origin is never a node).
pub fn sample_fields(n: usize) -> Vec<FieldRow> {
    let f = SaddleFields::default();
    let h = 2.0 / n as f64;
    let mut rows = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let x = Point2::new(-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
            let g = f.grad_u2(x);
            let b = f.b2(x);
            rows.push(FieldRow {
                x1: x.x1,
                x2: x.x2,
                a: eval_weight(x),
                u2: f.u2(x),
                grad_u2: g[0].hypot(g[1]),
                b2: b[0].hypot(b[1]),
            });
        }
    }
    rows
}
