use serde::{Deserialize, Serialize};

use crate::geometry::{Point2, SaddleFields};

/// `E = η(|x|) u₂(x)` with a radial smoothstep `η` equal to 1 on
/// `|x| ≤ inner` and 0 on `|x| ≥ outer`. It vanishes on `∂Ω` and carries
/// the jump of `u₂` at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enrichment {
    pub inner: f64,
    pub outer: f64,
    pub fields: SaddleFields,
}

impl Default for Enrichment {
    fn default() -> Self {
        Enrichment {
            inner: 0.25,
            outer: 0.5,
            fields: SaddleFields::default(),
        }
    }
}

impl Enrichment {
    fn eta(&self, r: f64) -> (f64, f64) {
        if r <= self.inner {
            return (1.0, 0.0);
        }
        if r >= self.outer {
            return (0.0, 0.0);
        }
        let h = self.outer - self.inner;
        let s = (r - self.inner) / h;
        (1.0 - s * s * (3.0 - 2.0 * s), -6.0 * s * (1.0 - s) / h)
    }

    pub fn value(&self, x: Point2) -> f64 {
        let (eta, _) = self.eta(x.norm());
        if eta == 0.0 {
            0.0
        } else {
            eta * self.fields.u2(x)
        }
    }

    pub fn grad(&self, x: Point2) -> [f64; 2] {
        let r = x.norm();
        let (eta, deta) = self.eta(r);
        if eta == 0.0 && deta == 0.0 {
            return [0.0, 0.0];
        }
        let g = self.fields.grad_u2(x);
        let u = self.fields.u2(x);
        let s = if r > 0.0 { u * deta / r } else { 0.0 };
        [eta * g[0] + s * x.x1, eta * g[1] + s * x.x2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_differences() {
        let e = Enrichment::default();
        for x in [[0.1, 0.03], [0.3, 0.1], [-0.2, 0.35], [0.33, -0.12], [0.05, -0.3]] {
            let p = Point2::new(x[0], x[1]);
            let g = e.grad(p);
            let h = 1e-7;
            let d1 = (e.value(Point2::new(x[0] + h, x[1])) - e.value(Point2::new(x[0] - h, x[1]))) / (2.0 * h);
            let d2 = (e.value(Point2::new(x[0], x[1] + h)) - e.value(Point2::new(x[0], x[1] - h))) / (2.0 * h);
            assert!((g[0] - d1).abs() < 1e-6 && (g[1] - d2).abs() < 1e-6, "{x:?}");
        }
    }

    #[test]
    fn vanishes_outside_half_disk() {
        let e = Enrichment::default();
        assert_eq!(e.value(Point2::new(0.0, 0.6)), 0.0);
        assert_eq!(e.value(Point2::new(0.0, 0.2)), 0.5);
        assert_eq!(e.value(Point2::new(0.0, -0.2)), -0.5);
    }
}
