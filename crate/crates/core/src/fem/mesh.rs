use serde::{Deserialize, Serialize};

use super::enrichment::Enrichment;
use crate::error::{Error, Result};
use crate::geometry::{eval_weight, Point2, SaddleFields};
use crate::quadrature::{GaussRule, TRIANGLE_RULE};

/// Levels of origin-directed subdivision for triangles touching the origin.
pub const ORIGIN_LEVELS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub v: [u32; 3],
    /// Weight `a` on the element (0 or 1).
    pub a: f64,
    pub area: f64,
    /// Gradients of the three barycentric basis functions.
    pub grad: [[f64; 2]; 3],
    /// Coefficients of `u ↦ ∫_T b₂·∇u` on the nodal values, from exact
    /// edge integrals of the stream function.
    pub flux: [f64; 3],
    pub quad_start: u32,
    pub quad_len: u32,
}

/// Criss-cross triangulation of `(−1, 1)²` graded towards the origin.
///
/// Lattice vertex `(i, j)` with `k = max(|i|, |j|)` sits at
/// `(i, j)·ρ_k / k` with `ρ_k = (k/n)^g`, so ring `k` is the square of
/// half-width `ρ_k`. Cells are split along the diagonal that continues
/// the lines `|x₁| = |x₂|`, which keeps each triangle inside one phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpace {
    pub n: usize,
    pub grading: f64,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub boundary: Vec<bool>,
    pub origin: usize,
    /// Quadrature points, weights (including area) and the analytic
    /// gradient of the enrichment direction at each point.
    pub quad_x: Vec<[f64; 2]>,
    pub quad_w: Vec<f64>,
    pub quad_grad_e: Vec<[f64; 2]>,
    /// `∫ b₂·∇E` by quadrature.
    pub enrichment_flux: f64,
}

fn vid(n: usize, i: i64, j: i64) -> usize {
    let m = 2 * n as i64 + 1;
    ((i + n as i64) * m + (j + n as i64)) as usize
}

fn tri_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn mid(p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
}

/// Quadrature on a triangle with `p0` at the origin, subdividing the corner
/// that touches it `levels` times.
fn origin_rule(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2], levels: usize, out: &mut Vec<([f64; 2], f64)>) {
    if levels == 0 {
        plain_rule(p0, p1, p2, out);
        return;
    }
    let m01 = mid(p0, p1);
    let m12 = mid(p1, p2);
    let m02 = mid(p0, p2);
    origin_rule(p0, m01, m02, levels - 1, out);
    plain_rule(m01, p1, m12, out);
    plain_rule(m02, m12, p2, out);
    plain_rule(m01, m12, m02, out);
}

fn plain_rule(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2], out: &mut Vec<([f64; 2], f64)>) {
    let area = tri_area(p0, p1, p2).abs();
    for (l, w) in TRIANGLE_RULE.iter() {
        let x = [
            l[0] * p0[0] + l[1] * p1[0] + l[2] * p2[0],
            l[0] * p0[1] + l[1] * p1[1] + l[2] * p2[1],
        ];
        out.push((x, w * area));
    }
}

/// `∫₀¹ v(a + t(b − a)) dt` with endpoints in canonical (index) order.
fn edge_stream_mean(fields: &SaddleFields, rule: &GaussRule, a: [f64; 2], b: [f64; 2]) -> f64 {
    rule.integrate(0.0, 1.0, |t| {
        fields.v(Point2::new(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    })
}

pub fn build_mesh(n: usize, grading: f64) -> Result<MeshSpace> {
    if n < 8 {
        return Err(Error::Mesh(format!("resolution must be at least 8, got {n}")));
    }
    if !(grading >= 1.0 && grading.is_finite()) {
        return Err(Error::Mesh(format!("grading must be >= 1, got {grading}")));
    }
    let ni = n as i64;
    let m = 2 * n + 1;
    let mut vertices = vec![[0.0; 2]; m * m];
    let mut boundary = vec![false; m * m];
    for i in -ni..=ni {
        for j in -ni..=ni {
            let k = i.abs().max(j.abs());
            let id = vid(n, i, j);
            if k == 0 {
                continue;
            }
            let rho = (k as f64 / n as f64).powf(grading);
            let s = rho / k as f64;
            vertices[id] = [i as f64 * s, j as f64 * s];
            boundary[id] = k == ni;
        }
    }
    let origin = vid(n, 0, 0);

    let fields = SaddleFields::default();
    let enrichment = Enrichment::default();
    let edge_rule = GaussRule::new(16);
    let mut elements = Vec::with_capacity(8 * n * n);
    let mut quad_x = Vec::new();
    let mut quad_w = Vec::new();
    let mut scratch = Vec::new();
    for i in -ni..ni {
        for j in -ni..ni {
            let p00 = vid(n, i, j);
            let p10 = vid(n, i + 1, j);
            let p11 = vid(n, i + 1, j + 1);
            let p01 = vid(n, i, j + 1);
            let same_sign = (2 * i + 1) * (2 * j + 1) > 0;
            let tris = if same_sign {
                [[p00, p10, p11], [p00, p11, p01]]
            } else {
                [[p00, p10, p01], [p10, p11, p01]]
            };
            for t in tris {
                let mut t = t;
                let mut area = tri_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
                if area < 0.0 {
                    t.swap(1, 2);
                    area = -area;
                }
                if area < 1e-14 {
                    return Err(Error::Mesh(format!("degenerate triangle of area {area:e}")));
                }
                let p = [vertices[t[0]], vertices[t[1]], vertices[t[2]]];
                let c = [
                    (p[0][0] + p[1][0] + p[2][0]) / 3.0,
                    (p[0][1] + p[1][1] + p[2][1]) / 3.0,
                ];
                let a = eval_weight(Point2::new(c[0], c[1])) as f64;
                let mut grad = [[0.0; 2]; 3];
                for l in 0..3 {
                    let q = p[(l + 1) % 3];
                    let r = p[(l + 2) % 3];
                    grad[l] = [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)];
                }
                // ∫_T b₂·∇u = Σ_edges (u_b − u_a) ∫₀¹ v along a→b.
                let mut flux = [0.0; 3];
                for l in 0..3 {
                    let (la, lb) = (l, (l + 1) % 3);
                    let (ga, gb) = (t[la], t[lb]);
                    let mean = if ga < gb {
                        edge_stream_mean(&fields, &edge_rule, vertices[ga], vertices[gb])
                    } else {
                        edge_stream_mean(&fields, &edge_rule, vertices[gb], vertices[ga])
                    };
                    flux[lb] += mean;
                    flux[la] -= mean;
                }
                scratch.clear();
                if let Some(o) = t.iter().position(|&v| v == origin) {
                    let p0 = p[o];
                    let p1 = p[(o + 1) % 3];
                    let p2 = p[(o + 2) % 3];
                    origin_rule(p0, p1, p2, ORIGIN_LEVELS, &mut scratch);
                } else {
                    plain_rule(p[0], p[1], p[2], &mut scratch);
                }
                let start = quad_x.len() as u32;
                for &(x, w) in &scratch {
                    quad_x.push(x);
                    quad_w.push(w);
                }
                elements.push(Element {
                    v: [t[0] as u32, t[1] as u32, t[2] as u32],
                    a,
                    area,
                    grad,
                    flux,
                    quad_start: start,
                    quad_len: scratch.len() as u32,
                });
            }
        }
    }
    let quad_grad_e: Vec<[f64; 2]> = quad_x
        .iter()
        .map(|&x| enrichment.grad(Point2::new(x[0], x[1])))
        .collect();
    let enrichment_flux = quad_x
        .iter()
        .zip(&quad_w)
        .zip(&quad_grad_e)
        .map(|((&x, &w), g)| {
            let b = fields.b2(Point2::new(x[0], x[1]));
            w * (b[0] * g[0] + b[1] * g[1])
        })
        .sum();
    Ok(MeshSpace {
        n,
        grading,
        vertices,
        elements,
        boundary,
        origin,
        quad_x,
        quad_w,
        quad_grad_e,
        enrichment_flux,
    })
}

impl MeshSpace {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Half-width of the innermost ring, `(1/n)^g`.
    pub fn h_min(&self) -> f64 {
        (1.0 / self.n as f64).powf(self.grading)
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area).sum()
    }

    /// Barycentric coordinates of `x` in element `e`.
    pub fn barycentric(&self, e: &Element, x: [f64; 2]) -> [f64; 3] {
        let p0 = self.vertices[e.v[0] as usize];
        let mut l = [0.0; 3];
        let mut sum = 0.0;
        for k in 1..3 {
            let g = e.grad[k];
            l[k] = g[0] * (x[0] - p0[0]) + g[1] * (x[1] - p0[1]);
            sum += l[k];
        }
        l[0] = 1.0 - sum;
        l
    }

    /// Index of an element containing `x`, searching the lattice cells
    /// around the estimated position before falling back to a full scan.
    pub fn locate(&self, x: [f64; 2]) -> Option<usize> {
        let tol = -1e-12;
        let inside = |idx: usize| self.barycentric(&self.elements[idx], x).iter().all(|&l| l >= tol);
        let m = x[0].abs().max(x[1].abs());
        if m > 1.0 {
            return None;
        }
        let n = self.n as f64;
        let kf = (n * m.powf(1.0 / self.grading)).max(1e-12);
        let ci = (x[0] / m * kf).floor() as i64;
        let cj = (x[1] / m * kf).floor() as i64;
        let ni = self.n as i64;
        for di in -2..=2 {
            for dj in -2..=2 {
                let (i, j) = (ci + di, cj + dj);
                if i < -ni || i >= ni || j < -ni || j >= ni {
                    continue;
                }
                let cell = ((i + ni) * 2 * ni + (j + ni)) as usize;
                for t in [2 * cell, 2 * cell + 1] {
                    if inside(t) {
                        return Some(t);
                    }
                }
            }
        }
        (0..self.elements.len()).find(|&t| inside(t))
    }
}
