use super::OrliczFunction;
use crate::error::{Error, Result};

/// `n` points spaced uniformly in `ln t` between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Domain("empty grid".into()));
    }
    for &t in grid {
        if !(1e-6..=1e9).contains(&t) {
            return Err(Error::Domain(format!(
                "grid point {t:e} outside [1e-6, 1e9]"
            )));
        }
    }
    Ok(())
}

/// `sup f(2t)/f(t)` over the grid.
pub fn delta2_estimate(f: &OrliczFunction, grid: &[f64]) -> Result<f64> {
    check_grid(grid)?;
    let mut sup: f64 = 0.0;
    for &t in grid {
        let a = f.eval(t)?;
        let b = f.eval(2.0 * t)?;
        let r = if a == 0.0 && b == 0.0 { 1.0 } else { b / a };
        sup = sup.max(r);
    }
    Ok(sup)
}

/// `(inf, sup)` of the local index `t f'(t) / f(t)` over the grid.
pub fn growth_indices(f: &OrliczFunction, grid: &[f64]) -> Result<(f64, f64)> {
    check_grid(grid)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &t in grid {
        let v = f.eval(t)?;
        if v == 0.0 {
            continue;
        }
        let q = t * f.derivative(t) / v;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Ok((lo, hi))
}

/// Lower growth index; the ∇₂ condition holds on the grid when it exceeds 1.
pub fn nabla2_estimate(f: &OrliczFunction, grid: &[f64]) -> Result<f64> {
    Ok(growth_indices(f, grid)?.0)
}

/// Target space of the Hölder inequality in Zygmund classes:
/// `L^a log^α L · L^b log^β L ⊂ L^c log^γ L` with `1/c = 1/a + 1/b`
/// and `γ/c = α/a + β/b`.
pub fn zygmund_exponents(a: f64, alpha: f64, b: f64, beta: f64) -> Result<(f64, f64)> {
    if !(a > 1.0 && b > 1.0) {
        return Err(Error::Domain("Zygmund exponents must exceed 1".into()));
    }
    let c = 1.0 / (1.0 / a + 1.0 / b);
    if c <= 1.0 {
        return Err(Error::Domain(format!("product exponent {c} must exceed 1")));
    }
    let gamma = c * (alpha / a + beta / b);
    Ok((c, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta2_of_pure_powers() {
        let grid = log_grid(1e-3, 1e6, 200);
        let sq = OrliczFunction::pure_power(2.0, 1.0).unwrap();
        assert_relative_eq!(
            delta2_estimate(&sq, &grid).unwrap(),
            4.0,
            max_relative = 1e-12
        );
        let cube = OrliczFunction::pure_power(3.0, 1.0).unwrap();
        assert_relative_eq!(
            delta2_estimate(&cube, &grid).unwrap(),
            8.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn delta2_rejects_out_of_range_grid() {
        let sq = OrliczFunction::pure_power(2.0, 1.0).unwrap();
        assert!(delta2_estimate(&sq, &[1e10]).is_err());
    }

    #[test]
    fn zygmund_target() {
        let (c, g) = zygmund_exponents(4.0, 1.0, 4.0, 2.0).unwrap();
        assert_relative_eq!(c, 2.0);
        assert_relative_eq!(g, 1.5);
    }
}
