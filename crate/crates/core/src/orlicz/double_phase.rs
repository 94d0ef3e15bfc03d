use serde::{Deserialize, Serialize};

use super::{log_grid, LogPower, Modular, OrliczFunction};
use crate::error::{Error, Result};
use crate::geometry::{eval_weight, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Weight {
    /// 1 on the vertical cones `|x₁| < |x₂|`, 0 elsewhere.
    Checkerboard,
    Constant(f64),
}

impl Weight {
    #[inline]
    pub fn at(&self, x: [f64; 2]) -> f64 {
        match self {
            Weight::Checkerboard => eval_weight(Point2::new(x[0], x[1])) as f64,
            Weight::Constant(a) => *a,
        }
    }

    /// Mean of the weight over any disk centred at the origin.
    pub fn angular_mean(&self) -> f64 {
        match self {
            Weight::Checkerboard => 0.5,
            Weight::Constant(a) => *a,
        }
    }
}

/// `Φ(x, t) = φ(t) + a(x) ψ(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublePhase {
    pub phi: OrliczFunction,
    pub psi: OrliczFunction,
    pub weight: Weight,
}

impl DoublePhase {
    pub fn new(phi: OrliczFunction, psi: OrliczFunction, weight: Weight) -> Result<Self> {
        if let Weight::Constant(a) = weight {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Domain(format!("weight must lie in [0, 1], got {a}")));
            }
        }
        Ok(DoublePhase { phi, psi, weight })
    }

    /// Checkerboard pair with `φ = t² log^{−β}(e+t)` and `ψ = t² log^{α}(e+t)`.
    pub fn log_pair(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(
            LogPower::new(2.0, -beta)?.into(),
            LogPower::new(2.0, alpha)?.into(),
            Weight::Checkerboard,
        )
    }

    #[inline]
    pub fn value_in_phase(&self, a: f64, t: f64) -> f64 {
        let v = self.phi.value(t);
        if a == 0.0 {
            v
        } else {
            v + a * self.psi.value(t)
        }
    }

    #[inline]
    pub fn derivative_in_phase(&self, a: f64, t: f64) -> f64 {
        let v = self.phi.derivative(t);
        if a == 0.0 {
            v
        } else {
            v + a * self.psi.derivative(t)
        }
    }

    /// `(Φ'(t)/t, Φ''(t))` in phase `a`.
    #[inline]
    pub fn curvatures_in_phase(&self, a: f64, t: f64) -> (f64, f64) {
        let (c1, c2) = self.phi.curvatures(t);
        if a == 0.0 {
            (c1, c2)
        } else {
            let (d1, d2) = self.psi.curvatures(t);
            (c1 + a * d1, c2 + a * d2)
        }
    }

    pub fn value(&self, x: [f64; 2], t: f64) -> f64 {
        self.value_in_phase(self.weight.at(x), t)
    }

    pub fn derivative(&self, x: [f64; 2], t: f64) -> f64 {
        self.derivative_in_phase(self.weight.at(x), t)
    }

    /// `(c₃, c₄)` with `φ ≤ c₃ ψ + c₄` on the sampled grid:
    /// `c₃ = sup_{t≥1} φ/ψ`, `c₄ = sup_{t≤1} φ`.
    pub fn growth_constants(&self) -> (f64, f64) {
        let c3 = log_grid(1.0, 1e12, 400)
            .into_iter()
            .map(|t| self.phi.value(t) / self.psi.value(t))
            .fold(0.0, f64::max);
        let c4 = log_grid(1e-8, 1.0, 200)
            .into_iter()
            .map(|t| self.phi.value(t))
            .fold(0.0, f64::max);
        (c3, c4)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(DoublePhase {
            phi: self.phi.scaled(c)?,
            psi: self.psi.scaled(c)?,
            weight: self.weight,
        })
    }
}

impl Modular for DoublePhase {
    fn density(&self, x: [f64; 2], t: f64) -> f64 {
        self.value(x, t)
    }
}
