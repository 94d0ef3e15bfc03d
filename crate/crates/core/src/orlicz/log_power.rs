use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const E: f64 = std::f64::consts::E;

/// Convex replacement used on `[0, t0]` when `t^p log^γ(e+t)` fails to be
/// convex near the origin: `A t² + B t^m` (or `A t^m` when `two_term` is
/// false), matching value and slope at `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub t0: f64,
    pub a: f64,
    pub b: f64,
    pub m: f64,
    two_term: bool,
}

impl Knot {
    fn value(&self, t: f64) -> f64 {
        if self.two_term {
            self.a * t * t + self.b * t.powf(self.m)
        } else {
            self.a * t.powf(self.m)
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if self.two_term {
            2.0 * self.a * t + self.m * self.b * t.powf(self.m - 1.0)
        } else {
            self.m * self.a * t.powf(self.m - 1.0)
        }
    }

    /// (f'(t)/t, f''(t)) on the substitute.
    fn curvatures(&self, t: f64) -> (f64, f64) {
        let m = self.m;
        if self.two_term {
            let tm = t.powf(m - 2.0);
            (
                2.0 * self.a + m * self.b * tm,
                2.0 * self.a + m * (m - 1.0) * self.b * tm,
            )
        } else {
            let tm = t.max(1e-300).powf(m - 2.0);
            (m * self.a * tm, m * (m - 1.0) * self.a * tm)
        }
    }
}

/// `scale · t^p · log^γ(e + t)`, convexified near zero when necessary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LogPowerParams", into = "LogPowerParams")]
pub struct LogPower {
    p: f64,
    gamma: f64,
    scale: f64,
    knot: Option<Knot>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LogPowerParams {
    p: f64,
    gamma: f64,
    #[serde(default = "one", skip_serializing_if = "is_one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

fn is_one(x: &f64) -> bool {
    *x == 1.0
}

impl TryFrom<LogPowerParams> for LogPower {
    type Error = Error;
    fn try_from(v: LogPowerParams) -> Result<Self> {
        LogPower::with_scale(v.p, v.gamma, v.scale)
    }
}

impl From<LogPower> for LogPowerParams {
    fn from(v: LogPower) -> Self {
        LogPowerParams {
            p: v.p,
            gamma: v.gamma,
            scale: v.scale,
        }
    }
}

/// ln ln(e + t) from ln t, stable for huge and tiny t.
pub(crate) fn ln_log_e_plus(ln_t: f64) -> f64 {
    if ln_t > 36.0 {
        (ln_t + (E * (-ln_t).exp()).ln_1p()).ln()
    } else {
        (ln_t.exp() / E).ln_1p().ln_1p()
    }
}

/// (ln(e+t), t / ((e+t) ln(e+t))) from ln t.
fn log_terms(ln_t: f64) -> (f64, f64) {
    let big_l = if ln_t > 36.0 {
        ln_t + (E * (-ln_t).exp()).ln_1p()
    } else {
        1.0 + (ln_t.exp() / E).ln_1p()
    };
    let frac = 1.0 / (1.0 + E * (-ln_t).exp());
    (big_l, frac / big_l)
}

impl LogPower {
    pub fn new(p: f64, gamma: f64) -> Result<Self> {
        Self::with_scale(p, gamma, 1.0)
    }

    pub fn with_scale(p: f64, gamma: f64, scale: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Domain(format!(
                "log-power exponent p must exceed 1, got {p}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::Domain(format!(
                "log exponent must be finite, got {gamma}"
            )));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Domain(format!(
                "scale must be positive, got {scale}"
            )));
        }
        let mut f = LogPower {
            p,
            gamma,
            scale,
            knot: None,
        };
        if gamma < 0.0 {
            f.knot = f.find_knot();
        }
        Ok(f)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn knot(&self) -> Option<Knot> {
        self.knot
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::with_scale(self.p, self.gamma, self.scale * c)
    }

    /// Local index q(t) = t f'(t) / f(t) of the raw formula.
    fn index(&self, ln_t: f64) -> f64 {
        let (_, w) = log_terms(ln_t);
        self.p + self.gamma * w
    }

    /// Sign-carrying second derivative factor of the raw formula,
    /// f'' = (f/t²)·[q² − p − γ(1+L)W²].
    fn raw_convexity_factor(&self, t: f64) -> f64 {
        let (big_l, w) = log_terms(t.ln());
        let q = self.p + self.gamma * w;
        q * q - self.p - self.gamma * (1.0 + big_l) * w * w
    }

    fn raw_value(&self, t: f64) -> f64 {
        if t <= 1e8 {
            let big_l = 1.0 + (t / E).ln_1p();
            self.scale * t.powf(self.p) * big_l.powf(self.gamma)
        } else {
            let ln_t = t.ln();
            (self.p * ln_t + self.gamma * ln_log_e_plus(ln_t) + self.scale.ln()).exp()
        }
    }

    fn find_knot(&self) -> Option<Knot> {
        // Scan a log grid for the last point where the raw formula is concave.
        let n = 4000;
        let (lo, hi) = (1e-8_f64.ln(), 1e12_f64.ln());
        let mut last_bad = None;
        for i in 0..=n {
            let ln_t = lo + (hi - lo) * i as f64 / n as f64;
            if self.raw_convexity_factor(ln_t.exp()) < 0.0 {
                last_bad = Some(i);
            }
        }
        let i = last_bad?;
        let target = 1.5_f64.min(0.5 * (1.0 + self.p));
        let step = (hi - lo) / n as f64;
        let mut ln_t = lo + step * (i + 1) as f64;
        // Refine the inflection point, then walk to the first index above target.
        let mut a = ln_t - step;
        let mut b = ln_t;
        for _ in 0..60 {
            let mid = 0.5 * (a + b);
            if self.raw_convexity_factor(mid.exp()) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        ln_t = b;
        if self.index(ln_t) < target {
            let mut a = ln_t;
            let mut b = ln_t + 1.0;
            while self.index(b) < target {
                b += 1.0;
            }
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if self.index(mid) < target {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            ln_t = b;
        }
        let t0 = ln_t.exp();
        let f0 = self.raw_value(t0) / self.scale;
        let q = self.index(ln_t);
        if q >= 1.5 {
            let m = q.max(3.0);
            Some(Knot {
                t0,
                a: f0 * (m - q) / ((m - 2.0) * t0 * t0),
                b: f0 * (q - 2.0) / ((m - 2.0) * t0.powf(m)),
                m,
                two_term: true,
            })
        } else {
            Some(Knot {
                t0,
                a: f0 / t0.powf(q),
                b: 0.0,
                m: q,
                two_term: false,
            })
        }
    }

    pub(crate) fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.knot {
            Some(k) if t < k.t0 => self.scale * k.value(t),
            _ => self.raw_value(t),
        }
    }

    pub(crate) fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if let Some(k) = self.knot {
            if t < k.t0 {
                return self.scale * k.derivative(t);
            }
        }
        let ln_t = t.ln();
        let (big_l, w) = log_terms(ln_t);
        let q = self.p + self.gamma * w;
        if t <= 1e8 {
            self.scale * t.powf(self.p - 1.0) * big_l.powf(self.gamma) * q
        } else {
            ((self.p - 1.0) * ln_t + self.gamma * big_l.ln() + q.ln() + self.scale.ln()).exp()
        }
    }

    /// (f'(t)/t, f''(t)), with t clamped away from zero.
    pub(crate) fn curvatures(&self, t: f64) -> (f64, f64) {
        let t = t.max(1e-12);
        if let Some(k) = self.knot {
            if t < k.t0 {
                let (c1, c2) = k.curvatures(t);
                return (self.scale * c1, self.scale * c2);
            }
        }
        let ln_t = t.ln();
        let (big_l, w) = log_terms(ln_t);
        let q = self.p + self.gamma * w;
        let base = self.scale * t.powf(self.p - 2.0) * big_l.powf(self.gamma);
        let second = q * q - self.p - self.gamma * (1.0 + big_l) * w * w;
        (base * q, base * second)
    }

    pub(crate) fn ln_value_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        let ln_t = ln_y + u;
        if let Some(kn) = self.knot {
            if ln_t < kn.t0.ln() {
                return (self.scale * kn.value(ln_t.exp())).ln() - k * u;
            }
        }
        self.p * ln_y + (self.p - k) * u + self.gamma * ln_log_e_plus(ln_t) + self.scale.ln()
    }

    pub(crate) fn ln_derivative_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        let ln_t = ln_y + u;
        if let Some(kn) = self.knot {
            if ln_t < kn.t0.ln() {
                return (self.scale * kn.derivative(ln_t.exp())).ln() - k * u;
            }
        }
        let q = self.index(ln_t);
        (self.p - 1.0) * ln_y
            + (self.p - 1.0 - k) * u
            + self.gamma * ln_log_e_plus(ln_t)
            + q.ln()
            + self.scale.ln()
    }
}
