//! N-functions: evaluation, conjugates, Luxemburg norms and growth estimates.
//!
//! Log-power integrands follow the convention `t^p log^γ(e+t)` without a
//! `1/p` prefactor. Positive factors never change a classification or the
//! sign of a gap, so they are carried as an explicit `scale`.

mod conjugate;
mod double_phase;
mod growth;
mod log_power;
mod norm;
mod tabulated;

pub use conjugate::{conjugate_log_power, conjugate_numeric, young_gap, ConjugateClass};
pub use double_phase::{DoublePhase, Weight};
pub use growth::{delta2_estimate, growth_indices, log_grid, nabla2_estimate, zygmund_exponents};
pub use log_power::{Knot, LogPower};
pub use norm::{luxemburg_norm, Modular, Sample};
pub use tabulated::TabulatedConjugate;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Largest accepted argument.
pub const T_MAX: f64 = 1e300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PurePowerParams", into = "PurePowerParams")]
pub struct PurePower {
    p: f64,
    coef: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PurePowerParams {
    p: f64,
    #[serde(default = "one")]
    coef: f64,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<PurePowerParams> for PurePower {
    type Error = Error;
    fn try_from(v: PurePowerParams) -> Result<Self> {
        PurePower::new(v.p, v.coef)
    }
}

impl From<PurePower> for PurePowerParams {
    fn from(v: PurePower) -> Self {
        PurePowerParams {
            p: v.p,
            coef: v.coef,
        }
    }
}

impl PurePower {
    pub fn new(p: f64, coef: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!(
                "power exponent must exceed 1, got {p}"
            )));
        }
        if !(coef.is_finite() && coef > 0.0) {
            return Err(Error::Domain(format!(
                "coefficient must be positive, got {coef}"
            )));
        }
        Ok(PurePower { p, coef })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn coef(&self) -> f64 {
        self.coef
    }

    /// Exact Legendre transform, `coef* s^{p'}`.
    pub fn conjugate(&self) -> PurePower {
        let p = self.p;
        let q = p / (p - 1.0);
        let coef = (p - 1.0) / p * (self.coef * p).powf(-1.0 / (p - 1.0));
        PurePower { p: q, coef }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OrliczFunction {
    LogPower(LogPower),
    PurePower(PurePower),
    TabulatedConjugate(TabulatedConjugate),
}

impl From<LogPower> for OrliczFunction {
    fn from(f: LogPower) -> Self {
        OrliczFunction::LogPower(f)
    }
}

impl From<PurePower> for OrliczFunction {
    fn from(f: PurePower) -> Self {
        OrliczFunction::PurePower(f)
    }
}

impl From<TabulatedConjugate> for OrliczFunction {
    fn from(f: TabulatedConjugate) -> Self {
        OrliczFunction::TabulatedConjugate(f)
    }
}

impl OrliczFunction {
    pub fn log_power(p: f64, gamma: f64) -> Result<Self> {
        Ok(LogPower::new(p, gamma)?.into())
    }

    pub fn pure_power(p: f64, coef: f64) -> Result<Self> {
        Ok(PurePower::new(p, coef)?.into())
    }

    /// Checked evaluation.
    pub fn eval(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.value(t))
    }

    /// Checked evaluation of the derivative.
    pub fn eval_derivative(&self, t: f64) -> Result<f64> {
        check_arg(t)?;
        Ok(self.derivative(t))
    }

    /// Unchecked evaluation for hot loops; t must be finite and nonnegative.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::LogPower(f) => f.value(t),
            OrliczFunction::PurePower(f) => {
                if t <= 0.0 {
                    0.0
                } else {
                    f.coef * t.powf(f.p)
                }
            }
            OrliczFunction::TabulatedConjugate(f) => f.value(t),
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::LogPower(f) => f.derivative(t),
            OrliczFunction::PurePower(f) => {
                if t <= 0.0 {
                    0.0
                } else {
                    f.coef * f.p * t.powf(f.p - 1.0)
                }
            }
            OrliczFunction::TabulatedConjugate(f) => f.derivative(t),
        }
    }

    /// `(f'(t)/t, f''(t))`, using the t → 0 limit below 1e-12.
    #[inline]
    pub fn curvatures(&self, t: f64) -> (f64, f64) {
        match self {
            OrliczFunction::LogPower(f) => f.curvatures(t),
            OrliczFunction::PurePower(f) => {
                let t = t.max(1e-12);
                let b = f.coef * f.p * t.powf(f.p - 2.0);
                (b, b * (f.p - 1.0))
            }
            OrliczFunction::TabulatedConjugate(f) => f.curvatures(t),
        }
    }

    /// `ln f(y·eᵘ) − k·u` given `ln y`, without forming `y·eᵘ` when that
    /// would overflow or lose the cancellation between the two terms.
    pub fn ln_value_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        match self {
            OrliczFunction::LogPower(f) => f.ln_value_shift(ln_y, u, k),
            OrliczFunction::PurePower(f) => f.coef.ln() + f.p * ln_y + (f.p - k) * u,
            OrliczFunction::TabulatedConjugate(f) => f.ln_value_shift(ln_y, u, k),
        }
    }

    /// `ln f'(y·eᵘ) − k·u`, the derivative analogue of [`Self::ln_value_shift`].
    pub fn ln_derivative_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        match self {
            OrliczFunction::LogPower(f) => f.ln_derivative_shift(ln_y, u, k),
            OrliczFunction::PurePower(f) => {
                (f.coef * f.p).ln() + (f.p - 1.0) * ln_y + (f.p - 1.0 - k) * u
            }
            OrliczFunction::TabulatedConjugate(f) => f.ln_derivative_shift(ln_y, u, k),
        }
    }

    /// The same function multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::Domain(format!(
                "scale factor must be positive, got {c}"
            )));
        }
        Ok(match self {
            OrliczFunction::LogPower(f) => f.scaled(c)?.into(),
            OrliczFunction::PurePower(f) => PurePower::new(f.p, f.coef * c)?.into(),
            OrliczFunction::TabulatedConjugate(f) => f.scaled(c).into(),
        })
    }

    /// Solves `f'(t) = s` by bisection in `ln t` over `[1e-12, 1e12]`.
    pub fn inverse_derivative(&self, s: f64) -> Result<f64> {
        ensure_finite("slope", s)?;
        if s <= 0.0 {
            return Ok(0.0);
        }
        let (lo, hi) = (conjugate::T_LO, conjugate::T_HI);
        if self.derivative(hi) < s {
            return Err(Error::UnboundedConjugate { slope: s, lo, hi });
        }
        if self.derivative(lo) >= s {
            return Ok(lo);
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        for _ in 0..conjugate::MAX_BISECTIONS {
            let m = 0.5 * (a + b);
            if self.derivative(m.exp()) < s {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-15 {
                break;
            }
        }
        Ok((0.5 * (a + b)).exp())
    }
}

fn check_arg(t: f64) -> Result<()> {
    ensure_finite("argument", t)?;
    if t < 0.0 {
        return Err(Error::Domain(format!(
            "argument must be nonnegative, got {t}"
        )));
    }
    if t > T_MAX {
        return Err(Error::Domain(format!("argument {t:e} exceeds {T_MAX:e}")));
    }
    Ok(())
}
