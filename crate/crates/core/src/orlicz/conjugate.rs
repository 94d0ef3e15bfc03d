use num_rational::Ratio;

use super::{LogPower, OrliczFunction, TabulatedConjugate};
use crate::error::{ensure_finite, Error, Result};

pub(crate) const T_LO: f64 = 1e-12;
pub(crate) const T_HI: f64 = 1e12;
pub(crate) const MAX_BISECTIONS: usize = 200;

const TABLE_NODES: usize = 512;
const TABLE_S_LO: f64 = 1e-6;
const TABLE_S_HI: f64 = 1e20;

/// Closed-form conjugate of a log-power function.
///
/// Only the growth class is exact: the returned function agrees with the
/// Legendre transform up to bounded multiplicative factors in value and
/// argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugateClass {
    pub function: LogPower,
}

fn to_ratio(x: f64) -> Result<Ratio<i64>> {
    Ratio::approximate_float(x)
        .ok_or_else(|| Error::Domain(format!("exponent {x} has no rational representation")))
}

fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `(p, γ) ↦ (p/(p−1), γ/(1−p))`, computed in rational arithmetic so that
/// applying it twice returns the input exponents.
pub fn conjugate_log_power(p: f64, gamma: f64) -> Result<ConjugateClass> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Domain(format!(
            "conjugate exponent needs p > 1, got {p}"
        )));
    }
    ensure_finite("gamma", gamma)?;
    let pr = to_ratio(p)?;
    let gr = to_ratio(gamma)?;
    let one = Ratio::from_integer(1);
    let pc = pr / (pr - one);
    let gc = gr / (one - pr);
    Ok(ConjugateClass {
        function: LogPower::new(ratio_to_f64(pc), ratio_to_f64(gc))?,
    })
}

/// `sup_t (s t − f(t))` via the stationarity condition `f'(t) = s`.
pub fn conjugate_numeric(f: &OrliczFunction, s: f64) -> Result<f64> {
    ensure_finite("s", s)?;
    if s < 0.0 {
        return Err(Error::Domain(format!(
            "conjugate argument must be nonnegative, got {s}"
        )));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let t = f.inverse_derivative(s)?;
    Ok((s * t - f.value(t)).max(0.0))
}

/// `Ψ(t) + Ψ*(s) − t s`, nonnegative by Young's inequality.
pub fn young_gap(f: &OrliczFunction, t: f64, s: f64) -> Result<f64> {
    let ft = f.eval(t)?;
    let fs = conjugate_numeric(f, s)?;
    Ok(ft + fs - t * s)
}

impl TabulatedConjugate {
    /// Tabulates `f*` on 512 log-spaced slopes.
    pub fn of(f: &OrliczFunction) -> Result<Self> {
        let s_hi = TABLE_S_HI.min(0.5 * f.derivative(T_HI));
        if !(s_hi > TABLE_S_LO * 10.0) {
            return Err(Error::Evaluation(
                "derivative range too small to tabulate".into(),
            ));
        }
        let (a, b) = (TABLE_S_LO.ln(), s_hi.ln());
        let mut nodes = Vec::with_capacity(TABLE_NODES);
        for i in 0..TABLE_NODES {
            let s = (a + (b - a) * i as f64 / (TABLE_NODES - 1) as f64).exp();
            let t = f.inverse_derivative(s)?;
            let v = s * t - f.value(t);
            if v > 0.0 && t > 0.0 {
                nodes.push([s, v, t]);
            }
        }
        TabulatedConjugate::from_nodes(nodes)
    }
}
