use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Numerically tabulated Legendre transform of another N-function.
///
/// Nodes hold `(s, f*(s), f*'(s))`. Between nodes the table is interpolated
/// by a C¹ convex quadratic spline with one extra knot per cell (Schumaker);
/// outside the node range it is extended by the power law fitted to the
/// end node's value and slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableParams", into = "TableParams")]
pub struct TabulatedConjugate {
    s: Vec<f64>,
    v: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableParams {
    nodes: Vec<[f64; 3]>,
}

impl TryFrom<TableParams> for TabulatedConjugate {
    type Error = Error;
    fn try_from(t: TableParams) -> Result<Self> {
        TabulatedConjugate::from_nodes(t.nodes)
    }
}

impl From<TabulatedConjugate> for TableParams {
    fn from(t: TabulatedConjugate) -> Self {
        TableParams { nodes: t.nodes() }
    }
}

/// One Schumaker cell evaluated at x: (value, slope, second derivative).
fn cell(a: f64, b: f64, va: f64, vb: f64, da: f64, db: f64, x: f64) -> (f64, f64, f64) {
    let h = b - a;
    let dd = da - db;
    // Tangent intersection; fall back to a single quadratic when the slopes
    // nearly agree or the knot leaves the cell.
    let z = if dd.abs() > 1e-14 * da.abs().max(db.abs()) {
        (vb - va - db * b + da * a) / dd
    } else {
        f64::NAN
    };
    if !(z > a && z < b) {
        let c = (db - da) / h;
        let dx = x - a;
        return (va + da * dx + 0.5 * c * dx * dx, da + c * dx, c);
    }
    let sbar = (da * (z - a) + db * (b - z)) / h;
    if x <= z {
        let c = (sbar - da) / (z - a);
        let dx = x - a;
        (va + da * dx + 0.5 * c * dx * dx, da + c * dx, c)
    } else {
        let vz = va + 0.5 * (da + sbar) * (z - a);
        let c = (db - sbar) / (b - z);
        let dx = x - z;
        (vz + sbar * dx + 0.5 * c * dx * dx, sbar + c * dx, c)
    }
}

impl TabulatedConjugate {
    pub fn from_nodes(nodes: Vec<[f64; 3]>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Domain(
                "tabulated conjugate needs at least two nodes".into(),
            ));
        }
        for w in nodes.windows(2) {
            if !(w[1][0] > w[0][0]) {
                return Err(Error::Domain(
                    "tabulated nodes must be strictly increasing".into(),
                ));
            }
            if w[1][2] < w[0][2] {
                return Err(Error::Domain(
                    "tabulated slopes must be nondecreasing".into(),
                ));
            }
        }
        for n in &nodes {
            if !(n[0] > 0.0 && n[1] > 0.0 && n[2] > 0.0) || n.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(
                    "tabulated entries must be positive and finite".into(),
                ));
            }
        }
        Ok(TabulatedConjugate {
            s: nodes.iter().map(|n| n[0]).collect(),
            v: nodes.iter().map(|n| n[1]).collect(),
            d: nodes.iter().map(|n| n[2]).collect(),
        })
    }

    pub fn nodes(&self) -> Vec<[f64; 3]> {
        (0..self.s.len())
            .map(|i| [self.s[i], self.v[i], self.d[i]])
            .collect()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s[0], *self.s.last().unwrap())
    }

    fn exponent_lo(&self) -> f64 {
        self.s[0] * self.d[0] / self.v[0]
    }

    fn exponent_hi(&self) -> f64 {
        let n = self.s.len() - 1;
        self.s[n] * self.d[n] / self.v[n]
    }

    /// (value, slope, second derivative) at x > 0.
    fn eval_all(&self, x: f64) -> (f64, f64, f64) {
        let n = self.s.len() - 1;
        if x <= self.s[0] {
            let e = self.exponent_lo();
            let r = (x / self.s[0]).powf(e);
            let v = self.v[0] * r;
            return (v, v * e / x, v * e * (e - 1.0) / (x * x));
        }
        if x >= self.s[n] {
            let e = self.exponent_hi();
            let r = (x / self.s[n]).powf(e);
            let v = self.v[n] * r;
            return (v, v * e / x, v * e * (e - 1.0) / (x * x));
        }
        let i = self.s.partition_point(|&s| s <= x) - 1;
        cell(
            self.s[i],
            self.s[i + 1],
            self.v[i],
            self.v[i + 1],
            self.d[i],
            self.d[i + 1],
            x,
        )
    }

    pub(crate) fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.eval_all(x).0
        }
    }

    pub(crate) fn derivative(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            self.eval_all(x).1
        }
    }

    pub(crate) fn curvatures(&self, x: f64) -> (f64, f64) {
        let x = x.max(1e-12);
        let (_, d, dd) = self.eval_all(x);
        (d / x, dd)
    }

    fn ln_shift(&self, ln_y: f64, u: f64, k: f64, derivative: bool) -> f64 {
        let ln_t = ln_y + u;
        let n = self.s.len() - 1;
        let (anchor, ln_v, ln_d, e) = if ln_t >= self.s[n].ln() {
            (
                self.s[n].ln(),
                self.v[n].ln(),
                self.d[n].ln(),
                self.exponent_hi(),
            )
        } else if ln_t <= self.s[0].ln() {
            (
                self.s[0].ln(),
                self.v[0].ln(),
                self.d[0].ln(),
                self.exponent_lo(),
            )
        } else {
            let (v, d, _) = self.eval_all(ln_t.exp());
            return if derivative { d.ln() } else { v.ln() } - k * u;
        };
        if derivative {
            ln_d + (e - 1.0) * (ln_t - anchor) - k * u
        } else {
            ln_v + e * (ln_t - anchor) - k * u
        }
    }

    pub(crate) fn ln_value_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        self.ln_shift(ln_y, u, k, false)
    }

    pub(crate) fn ln_derivative_shift(&self, ln_y: f64, u: f64, k: f64) -> f64 {
        self.ln_shift(ln_y, u, k, true)
    }

    pub(crate) fn scaled(&self, c: f64) -> Self {
        TabulatedConjugate {
            s: self.s.clone(),
            v: self.v.iter().map(|v| v * c).collect(),
            d: self.d.iter().map(|d| d * c).collect(),
        }
    }
}
