use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enrichment::Enrichment;
use super::mesh::{Element, MeshSpace};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::orlicz::{DoublePhase, Weight};

/// Piecewise-linear nodal values plus a multiple `s` of the enrichment.
/// With `s = 0` this is a conforming field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedField {
    pub values: Vec<f64>,
    pub s: f64,
}

impl EnrichedField {
    pub fn zeros(mesh: &MeshSpace) -> Self {
        EnrichedField {
            values: vec![0.0; mesh.num_vertices()],
            s: 0.0,
        }
    }

    pub fn conforming(values: Vec<f64>) -> Self {
        EnrichedField { values, s: 0.0 }
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &MeshSpace, f: impl Fn([f64; 2]) -> f64) -> Self {
        EnrichedField::conforming(mesh.vertices.iter().map(|&x| f(x)).collect())
    }

    /// The enrichment direction itself, `E`.
    pub fn enrichment(mesh: &MeshSpace) -> Self {
        EnrichedField {
            values: vec![0.0; mesh.num_vertices()],
            s: 1.0,
        }
    }

    pub fn eval(&self, mesh: &MeshSpace, x: [f64; 2]) -> Result<f64> {
        let e = mesh
            .locate(x)
            .ok_or_else(|| Error::Range(format!("point {x:?} outside the domain")))?;
        let el = &mesh.elements[e];
        let l = mesh.barycentric(el, x);
        let mut v = 0.0;
        for k in 0..3 {
            v += l[k] * self.values[el.v[k] as usize];
        }
        if self.s != 0.0 {
            v += self.s * Enrichment::default().value(Point2::new(x[0], x[1]));
        }
        Ok(v)
    }
}

#[inline]
pub(crate) fn element_weight(dp: &DoublePhase, e: &Element) -> f64 {
    match dp.weight {
        Weight::Checkerboard => e.a,
        Weight::Constant(c) => c,
    }
}

#[inline]
pub(crate) fn element_gradient(e: &Element, values: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for k in 0..3 {
        let u = values[e.v[k] as usize];
        g[0] += u * e.grad[k][0];
        g[1] += u * e.grad[k][1];
    }
    g
}

/// Gradient and Hessian contributions of one element.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ElementTerms {
    /// `∂/∂u_k` of the energy.
    pub gu: [f64; 3],
    pub gs: f64,
    /// Upper triangle of the 3×3 block: (00, 01, 02, 11, 12, 22).
    pub huu: [f64; 6],
    pub hus: [f64; 3],
    pub hss: f64,
}

pub(crate) fn element_energy(mesh: &MeshSpace, dp: &DoublePhase, e: &Element, values: &[f64], s: f64) -> f64 {
    let a = element_weight(dp, e);
    let g = element_gradient(e, values);
    let (q0, q1) = (e.quad_start as usize, (e.quad_start + e.quad_len) as usize);
    if s == 0.0 {
        let t = (g[0] * g[0] + g[1] * g[1]).sqrt();
        return e.area * dp.value_in_phase(a, t);
    }
    let mut acc = 0.0;
    for q in q0..q1 {
        let ge = mesh.quad_grad_e[q];
        let (x, y) = (g[0] + s * ge[0], g[1] + s * ge[1]);
        acc += mesh.quad_w[q] * dp.value_in_phase(a, (x * x + y * y).sqrt());
    }
    acc
}

pub(crate) fn element_terms(
    mesh: &MeshSpace,
    dp: &DoublePhase,
    e: &Element,
    values: &[f64],
    s: f64,
    enriched: bool,
) -> ElementTerms {
    let a = element_weight(dp, e);
    let g = element_gradient(e, values);
    let (q0, q1) = (e.quad_start as usize, (e.quad_start + e.quad_len) as usize);
    let mut flux = [0.0; 2];
    let mut h = [0.0; 3]; // xx, xy, yy
    let mut gs = 0.0;
    let mut he = [0.0; 2];
    let mut hss = 0.0;
    let mut point = |w: f64, ge: [f64; 2]| {
        let (x, y) = (g[0] + s * ge[0], g[1] + s * ge[1]);
        let t = (x * x + y * y).sqrt();
        let (k1, k2) = dp.curvatures_in_phase(a, t);
        let f = [k1 * x, k1 * y];
        flux[0] += w * f[0];
        flux[1] += w * f[1];
        // H = k1 I + (k2 − k1) ĝĝᵀ
        let (nx, ny) = if t > 0.0 { (x / t, y / t) } else { (0.0, 0.0) };
        let d = k2 - k1;
        let hq = [k1 + d * nx * nx, d * nx * ny, k1 + d * ny * ny];
        for m in 0..3 {
            h[m] += w * hq[m];
        }
        if enriched {
            gs += w * (f[0] * ge[0] + f[1] * ge[1]);
            let hv = [hq[0] * ge[0] + hq[1] * ge[1], hq[1] * ge[0] + hq[2] * ge[1]];
            he[0] += w * hv[0];
            he[1] += w * hv[1];
            hss += w * (hv[0] * ge[0] + hv[1] * ge[1]);
        }
    };
    if enriched {
        for q in q0..q1 {
            point(mesh.quad_w[q], mesh.quad_grad_e[q]);
        }
    } else {
        point(e.area, [0.0, 0.0]);
    }
    let mut out = ElementTerms {
        gs,
        hss,
        ..Default::default()
    };
    let gr = e.grad;
    let mut idx = 0;
    for i in 0..3 {
        out.gu[i] = flux[0] * gr[i][0] + flux[1] * gr[i][1];
        out.hus[i] = he[0] * gr[i][0] + he[1] * gr[i][1];
        let hg = [h[0] * gr[i][0] + h[1] * gr[i][1], h[1] * gr[i][0] + h[2] * gr[i][1]];
        for j in i..3 {
            out.huu[idx] = hg[0] * gr[j][0] + hg[1] * gr[j][1];
            idx += 1;
        }
    }
    out
}

fn check_len(mesh: &MeshSpace, field: &EnrichedField) -> Result<()> {
    if field.values.len() != mesh.num_vertices() {
        return Err(Error::Mesh(format!(
            "field has {} values for {} vertices",
            field.values.len(),
            mesh.num_vertices()
        )));
    }
    Ok(())
}

/// `ℱ(u) = ∫ Φ(x, |∇u|) dx` by the mesh quadrature.
pub fn modular_energy(mesh: &MeshSpace, dp: &DoublePhase, field: &EnrichedField) -> Result<f64> {
    check_len(mesh, field)?;
    let parts: Vec<f64> = mesh
        .elements
        .par_iter()
        .map(|e| element_energy(mesh, dp, e, &field.values, field.s))
        .collect();
    let total: f64 = parts.iter().sum();
    if !total.is_finite() {
        return Err(Error::EnergyOverflow(format!("modular energy is {total}")));
    }
    Ok(total)
}

/// Gradient of [`modular_energy`] with respect to every nodal value and `s`.
pub fn modular_energy_gradient(
    mesh: &MeshSpace,
    dp: &DoublePhase,
    field: &EnrichedField,
) -> Result<(Vec<f64>, f64)> {
    check_len(mesh, field)?;
    let parts: Vec<ElementTerms> = mesh
        .elements
        .par_iter()
        .map(|e| element_terms(mesh, dp, e, &field.values, field.s, true))
        .collect();
    let mut gu = vec![0.0; mesh.num_vertices()];
    let mut gs = 0.0;
    for (e, t) in mesh.elements.iter().zip(&parts) {
        for k in 0..3 {
            gu[e.v[k] as usize] += t.gu[k];
        }
        gs += t.gs;
    }
    Ok((gu, gs))
}

/// `∫ b₂·∇(u + sE)`: exact element integrals for the piecewise-linear part
/// and mesh quadrature for the enrichment.
pub fn separating_functional(mesh: &MeshSpace, field: &EnrichedField) -> Result<f64> {
    check_len(mesh, field)?;
    let mut acc = 0.0;
    for e in &mesh.elements {
        for k in 0..3 {
            acc += e.flux[k] * field.values[e.v[k] as usize];
        }
    }
    Ok(acc + field.s * mesh.enrichment_flux)
}

/// `𝒢(u) = ℱ(u) + ∫ b₂·∇u`.
pub fn functional_g(mesh: &MeshSpace, dp: &DoublePhase, field: &EnrichedField) -> Result<f64> {
    Ok(modular_energy(mesh, dp, field)? + separating_functional(mesh, field)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::build_mesh;

    #[test]
    fn quadratic_energy_of_linear_field() {
        let mesh = build_mesh(8, 2.0).unwrap();
        let sq = crate::orlicz::OrliczFunction::pure_power(2.0, 1.0).unwrap();
        let dp = DoublePhase::new(sq.clone(), sq, Weight::Constant(0.0)).unwrap();
        let f = EnrichedField::interpolate(&mesh, |x| 3.0 * x[0] - x[1]);
        let e = modular_energy(&mesh, &dp, &f).unwrap();
        assert!((e - 40.0).abs() < 1e-10, "{e}");
    }

    #[test]
    fn linear_functional_vanishes_on_conforming_fields() {
        let mesh = build_mesh(8, 2.0).unwrap();
        let f = EnrichedField::interpolate(&mesh, |x| {
            (1.0 - x[0] * x[0]) * (1.0 - x[1] * x[1]) * (3.0 * x[0] + x[1]).cos()
        });
        assert!(separating_functional(&mesh, &f).unwrap().abs() < 1e-13);
    }

    #[test]
    fn enrichment_flux_is_minus_one() {
        let mesh = build_mesh(32, 2.0).unwrap();
        assert!((mesh.enrichment_flux + 1.0).abs() < 0.02, "{}", mesh.enrichment_flux);
    }
}
