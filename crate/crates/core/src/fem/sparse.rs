use rayon::prelude::*;

/// Symmetric matrix in CSR form with sorted column indices per row.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Pattern from a list of symmetric neighbour sets (diagonal included).
    pub fn from_pattern(mut rows: Vec<Vec<usize>>) -> Csr {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            cols.extend_from_slice(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Csr {
            n,
            row_ptr,
            cols,
            vals: vec![0.0; nnz],
        }
    }

    pub fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let row = &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]];
        row.binary_search(&j).ok().map(|k| self.row_ptr[i] + k)
    }

    pub fn diag(&self, i: usize) -> f64 {
        self.slot(i, i).map_or(0.0, |k| self.vals[k])
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut().enumerate().for_each(|(i, yi)| {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yi = s;
        });
    }
}

/// Incomplete Cholesky factor on the lower pattern of a [`Csr`] matrix.
/// Breakdowns are handled by shifting the diagonal and refactoring.
#[derive(Debug, Clone)]
pub struct IncompleteCholesky {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    // Transposed copy for the backward sweep.
    t_ptr: Vec<usize>,
    t_rows: Vec<usize>,
    t_vals: Vec<f64>,
}

impl IncompleteCholesky {
    pub fn new(a: &Csr) -> IncompleteCholesky {
        let mut shift = 0.0;
        loop {
            if let Some(f) = Self::try_factor(a, shift) {
                return f;
            }
            shift = if shift == 0.0 { 1e-3 } else { shift * 4.0 };
        }
    }

    fn try_factor(a: &Csr, shift: f64) -> Option<IncompleteCholesky> {
        let n = a.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                if a.cols[k] <= i {
                    cols.push(a.cols[k]);
                    let v = a.vals[k];
                    vals.push(if a.cols[k] == i { v * (1.0 + shift) } else { v });
                }
            }
            row_ptr.push(cols.len());
        }
        for i in 0..n {
            let (s, e) = (row_ptr[i], row_ptr[i + 1]);
            for kk in s..e {
                let j = cols[kk];
                // dot of rows i and j over columns < j
                let (mut p, mut q) = (s, row_ptr[j]);
                let qe = row_ptr[j + 1] - 1;
                let mut dot = 0.0;
                while p < kk && q < qe {
                    match cols[p].cmp(&cols[q]) {
                        std::cmp::Ordering::Less => p += 1,
                        std::cmp::Ordering::Greater => q += 1,
                        std::cmp::Ordering::Equal => {
                            dot += vals[p] * vals[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                if j == i {
                    let d = vals[kk] - dot;
                    if !(d > 0.0) || !d.is_finite() {
                        return None;
                    }
                    vals[kk] = d.sqrt();
                } else {
                    vals[kk] = (vals[kk] - dot) / vals[qe];
                }
            }
        }
        let mut count = vec![0usize; n + 1];
        for &c in &cols {
            count[c + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let t_ptr = count.clone();
        let mut fill = count;
        let mut t_rows = vec![0; cols.len()];
        let mut t_vals = vec![0.0; cols.len()];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let c = cols[k];
                t_rows[fill[c]] = i;
                t_vals[fill[c]] = vals[k];
                fill[c] += 1;
            }
        }
        Some(IncompleteCholesky {
            row_ptr,
            cols,
            vals,
            t_ptr,
            t_rows,
            t_vals,
        })
    }

    /// `z = (L Lᵀ)⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = r.len();
        for i in 0..n {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1] - 1);
            let mut acc = r[i];
            for k in s..e {
                acc -= self.vals[k] * z[self.cols[k]];
            }
            z[i] = acc / self.vals[e];
        }
        for i in (0..n).rev() {
            // column i of L, diagonal first
            let (s, e) = (self.t_ptr[i], self.t_ptr[i + 1]);
            let mut acc = z[i];
            for k in s + 1..e {
                acc -= self.t_vals[k] * z[self.t_rows[k]];
            }
            z[i] = acc / self.t_vals[s];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Preconditioned conjugate gradients from a zero initial guess, stopping at
/// `‖r‖ ≤ rel_tol ‖b‖`.
pub fn pcg(a: &Csr, pre: &IncompleteCholesky, b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, CgStats) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return (x, CgStats { iterations: 0, residual: 0.0 });
    }
    let mut z = vec![0.0; n];
    pre.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut it = 0;
    let mut rnorm = bnorm;
    while it < max_iter {
        a.matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            break;
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        rnorm = dot(&r, &r).sqrt();
        if rnorm <= rel_tol * bnorm {
            break;
        }
        pre.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    (
        x,
        CgStats {
            iterations: it,
            residual: rnorm / bnorm,
        },
    )
}
