use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::{element_energy, element_terms, EnrichedField, ElementTerms};
use super::mesh::MeshSpace;
use super::sparse::{pcg, Csr, IncompleteCholesky};
use crate::error::{Error, Result};
use crate::geometry::{Point2, SaddleFields};
use crate::orlicz::DoublePhase;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryData {
    Zero,
    /// `g = amplitude · u₂` on `∂Ω`.
    Saddle { amplitude: f64 },
}

impl BoundaryData {
    pub fn value(&self, x: [f64; 2]) -> f64 {
        match self {
            BoundaryData::Zero => 0.0,
            BoundaryData::Saddle { amplitude } => amplitude * SaddleFields::default().u2(Point2::new(x[0], x[1])),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    /// Add the enrichment direction as an extra unknown.
    pub enriched: bool,
    /// Include `∫ b₂·∇u` in the objective (𝒢) or not (ℱ).
    pub linear_term: bool,
    pub boundary: BoundaryData,
    pub max_iter: usize,
    pub rel_tol: f64,
    pub grad_tol: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            enriched: false,
            linear_term: true,
            boundary: BoundaryData::Zero,
            max_iter: 5000,
            rel_tol: 1e-10,
            grad_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimizer {
    pub field: EnrichedField,
    pub objective: f64,
    pub energy: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub converged: bool,
}

struct Problem<'a> {
    mesh: &'a MeshSpace,
    dp: &'a DoublePhase,
    opts: MinimizeOptions,
    /// Free index of each vertex, `usize::MAX` on the boundary.
    dof: Vec<usize>,
    free: Vec<usize>,
    matrix: Csr,
    /// CSR slots of each element's upper 3×3 entries (both halves).
    slots: Vec<[[usize; 3]; 3]>,
    /// Assembled coefficients of the linear term on free dofs.
    linear: Vec<f64>,
}

const NONE: usize = usize::MAX;
const DECREMENT_FLOOR: f64 = 1e-14;

impl<'a> Problem<'a> {
    fn new(mesh: &'a MeshSpace, dp: &'a DoublePhase, opts: MinimizeOptions) -> Self {
        let nv = mesh.num_vertices();
        let mut dof = vec![NONE; nv];
        let mut free = Vec::new();
        for v in 0..nv {
            if !mesh.boundary[v] {
                dof[v] = free.len();
                free.push(v);
            }
        }
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); free.len()];
        for e in &mesh.elements {
            for &a in &e.v {
                let da = dof[a as usize];
                if da == NONE {
                    continue;
                }
                for &b in &e.v {
                    let db = dof[b as usize];
                    if db != NONE {
                        rows[da].push(db);
                    }
                }
            }
        }
        let matrix = Csr::from_pattern(rows);
        let mut linear = vec![0.0; free.len()];
        let slots = mesh
            .elements
            .iter()
            .map(|e| {
                let mut s = [[NONE; 3]; 3];
                for i in 0..3 {
                    let di = dof[e.v[i] as usize];
                    if di == NONE {
                        continue;
                    }
                    linear[di] += e.flux[i];
                    for j in 0..3 {
                        let dj = dof[e.v[j] as usize];
                        if dj != NONE {
                            s[i][j] = matrix.slot(di, dj).unwrap();
                        }
                    }
                }
                s
            })
            .collect();
        Problem {
            mesh,
            dp,
            opts,
            dof,
            free,
            matrix,
            slots,
            linear,
        }
    }

    fn objective(&self, field: &EnrichedField) -> f64 {
        let parts: Vec<f64> = self
            .mesh
            .elements
            .par_iter()
            .map(|e| element_energy(self.mesh, self.dp, e, &field.values, field.s))
            .collect();
        let mut j: f64 = parts.iter().sum();
        if self.opts.linear_term {
            let mut l = 0.0;
            for e in &self.mesh.elements {
                for k in 0..3 {
                    l += e.flux[k] * field.values[e.v[k] as usize];
                }
            }
            j += l + field.s * self.mesh.enrichment_flux;
        }
        j
    }

    /// Gradient on the free dofs (plus `s`) and the Hessian blocks.
    fn assemble(&mut self, field: &EnrichedField) -> (Vec<f64>, f64, Vec<f64>, f64) {
        let enriched = self.opts.enriched;
        let terms: Vec<ElementTerms> = self
            .mesh
            .elements
            .par_iter()
            .map(|e| element_terms(self.mesh, self.dp, e, &field.values, field.s, enriched))
            .collect();
        let nf = self.free.len();
        let mut g = if self.opts.linear_term { self.linear.clone() } else { vec![0.0; nf] };
        let mut gs = if self.opts.linear_term { self.mesh.enrichment_flux } else { 0.0 };
        let mut hus = vec![0.0; nf];
        let mut hss = 0.0;
        self.matrix.vals.iter_mut().for_each(|v| *v = 0.0);
        for ((e, t), sl) in self.mesh.elements.iter().zip(&terms).zip(&self.slots) {
            gs += t.gs;
            hss += t.hss;
            let full = [
                [t.huu[0], t.huu[1], t.huu[2]],
                [t.huu[1], t.huu[3], t.huu[4]],
                [t.huu[2], t.huu[4], t.huu[5]],
            ];
            for i in 0..3 {
                let di = self.dof[e.v[i] as usize];
                if di == NONE {
                    continue;
                }
                g[di] += t.gu[i];
                hus[di] += t.hus[i];
                for j in 0..3 {
                    if sl[i][j] != NONE {
                        self.matrix.vals[sl[i][j]] += full[i][j];
                    }
                }
            }
        }
        (g, gs, hus, hss)
    }

    fn step(&self, field: &EnrichedField, du: &[f64], ds: f64, alpha: f64) -> EnrichedField {
        let mut f = field.clone();
        for (k, &v) in self.free.iter().enumerate() {
            f.values[v] += alpha * du[k];
        }
        if self.opts.enriched {
            f.s += alpha * ds;
        }
        f
    }

    fn line_search(&self, field: &EnrichedField, j0: f64, slope: f64, du: &[f64], ds: f64) -> Option<(EnrichedField, f64)> {
        if !(slope < 0.0) {
            return None;
        }
        let mut alpha = 1.0;
        for _ in 0..60 {
            let trial = self.step(field, du, ds, alpha);
            let j = self.objective(&trial);
            if j.is_finite() && j <= j0 + 1e-4 * alpha * slope {
                return Some((trial, j));
            }
            alpha *= 0.5;
        }
        None
    }
}

/// Minimizes ℱ or 𝒢 over the conforming (or enriched) space with the given
/// boundary values, by damped Newton with a bordered PCG solve and Armijo
/// backtracking. After three failed Newton line searches the step falls
/// back to Jacobi-scaled gradient descent.
pub fn minimize(mesh: &MeshSpace, dp: &DoublePhase, opts: MinimizeOptions) -> Result<Minimizer> {
    let mut pb = Problem::new(mesh, dp, opts);
    let mut field = EnrichedField::interpolate(mesh, |x| opts.boundary.value(x));
    let mut j = pb.objective(&field);
    if !j.is_finite() {
        return Err(Error::EnergyOverflow(format!("initial objective is {j}")));
    }
    let mut last_decrease = f64::INFINITY;
    let mut newton_failures = 0;
    let mut iterations = 0;
    let mut gnorm;
    let mut decrement = f64::INFINITY;
    loop {
        let (g, gs, hus, hss) = pb.assemble(&field);
        gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if opts.enriched {
            gnorm = gnorm.max(gs.abs());
        }
        // Below the rounding floor the gradient cannot reach `grad_tol`;
        // a vanishing Newton decrement is then accepted instead.
        let flat = gnorm < opts.grad_tol || decrement <= DECREMENT_FLOOR * j.abs().max(1.0);
        if flat && (iterations == 0 || last_decrease < opts.rel_tol) {
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        iterations += 1;
        let mut accepted = None;
        if newton_failures < 3 {
            let pre = IncompleteCholesky::new(&pb.matrix);
            let (z1, _) = pcg(&pb.matrix, &pre, &g, 1e-10, 5000);
            let (du, ds) = if opts.enriched {
                let (z2, _) = pcg(&pb.matrix, &pre, &hus, 1e-10, 5000);
                let bz1: f64 = hus.iter().zip(&z1).map(|(a, b)| a * b).sum();
                let bz2: f64 = hus.iter().zip(&z2).map(|(a, b)| a * b).sum();
                let schur = hss - bz2;
                let ds = if schur > 0.0 { (bz1 - gs) / schur } else { 0.0 };
                let du: Vec<f64> = z1.iter().zip(&z2).map(|(a, b)| -a - b * ds).collect();
                (du, ds)
            } else {
                (z1.iter().map(|v| -v).collect(), 0.0)
            };
            let slope: f64 = g.iter().zip(&du).map(|(a, b)| a * b).sum::<f64>() + gs * ds;
            decrement = -slope;
            accepted = pb.line_search(&field, j, slope, &du, ds);
            if accepted.is_none() {
                newton_failures += 1;
            }
        }
        if accepted.is_none() {
            let du: Vec<f64> = g
                .iter()
                .enumerate()
                .map(|(k, v)| -v / pb.matrix.diag(k).max(1e-300))
                .collect();
            let ds = if opts.enriched { -gs / hss.max(1e-300) } else { 0.0 };
            let slope: f64 = g.iter().zip(&du).map(|(a, b)| a * b).sum::<f64>() + gs * ds;
            accepted = pb.line_search(&field, j, slope, &du, ds);
        }
        match accepted {
            Some((f, jn)) => {
                last_decrease = (j - jn).abs() / j.abs().max(1e-300);
                field = f;
                j = jn;
            }
            None => break,
        }
    }
    let energy = super::energy::modular_energy(mesh, dp, &field)?;
    let converged = last_decrease < opts.rel_tol
        && (gnorm < opts.grad_tol || decrement <= DECREMENT_FLOOR * j.abs().max(1.0));
    Ok(Minimizer {
        field,
        objective: j,
        energy,
        iterations,
        gradient_norm: gnorm,
        converged,
    })
}
