use serde::{Deserialize, Serialize};

use super::OrliczFunction;
use crate::error::{Error, Result};

/// A point of a discretized field: location, value and quadrature weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: [f64; 2],
    pub value: f64,
    pub weight: f64,
}

/// Anything that can act as a (possibly x-dependent) Orlicz integrand.
pub trait Modular {
    fn density(&self, x: [f64; 2], t: f64) -> f64;

    fn modular(&self, samples: &[Sample], scale: f64) -> f64 {
        samples
            .iter()
            .map(|s| s.weight * self.density(s.x, s.value.abs() / scale))
            .sum()
    }
}

impl Modular for OrliczFunction {
    fn density(&self, _x: [f64; 2], t: f64) -> f64 {
        self.value(t)
    }
}

const SCALE_MAX: f64 = 1e12;
const REL_TOL: f64 = 1e-10;

/// Luxemburg norm `inf{λ > 0 : ∫ Φ(x, |f|/λ) ≤ 1}` by bracketing and bisection.
pub fn luxemburg_norm<M: Modular + ?Sized>(samples: &[Sample], phi: &M) -> Result<f64> {
    for s in samples {
        if !(s.weight > 0.0 && s.weight.is_finite()) {
            return Err(Error::Domain(format!(
                "quadrature weight must be positive, got {}",
                s.weight
            )));
        }
        if !s.value.is_finite() {
            return Err(Error::Domain("field values must be finite".into()));
        }
    }
    if samples.iter().all(|s| s.value == 0.0) {
        return Ok(0.0);
    }
    let m = |lam: f64| phi.modular(samples, lam);
    let mut hi = 1.0;
    while !(m(hi) <= 1.0) {
        hi *= 2.0;
        if hi > SCALE_MAX {
            return Err(Error::NormOverflow(SCALE_MAX));
        }
    }
    let mut lo = hi;
    while m(lo) <= 1.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    while hi - lo > REL_TOL * 1e-2 * hi {
        let mid = 0.5 * (lo + hi);
        if m(mid) <= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_field(v: f64, n: usize) -> Vec<Sample> {
        // Midpoint grid on (-1,1)², total weight 4.
        let h = 2.0 / n as f64;
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                out.push(Sample {
                    x: [-1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h],
                    value: v,
                    weight: h * h,
                });
            }
        }
        out
    }

    #[test]
    fn quadratic_unit_field_has_norm_two() {
        let f = OrliczFunction::pure_power(2.0, 1.0).unwrap();
        let n = luxemburg_norm(&constant_field(1.0, 8), &f).unwrap();
        assert_relative_eq!(n, 2.0, max_relative = 1e-10);
    }

    #[test]
    fn zero_field_has_zero_norm() {
        let f = OrliczFunction::log_power(2.0, 1.0).unwrap();
        assert_eq!(luxemburg_norm(&constant_field(0.0, 4), &f).unwrap(), 0.0);
    }

    #[test]
    fn modular_at_norm_is_one() {
        let f = OrliczFunction::log_power(2.0, 1.0).unwrap();
        let field = constant_field(3.0, 6);
        let n = luxemburg_norm(&field, &f).unwrap();
        let m = f.modular(&field, n);
        assert!((m - 1.0).abs() < 1e-6, "modular {m}");
    }
}
