//! Gap / no-gap classification from the two tail integrals
//! `∫₀ φ(1/r) r dr` and `∫₀ ψ*(1/r) r dr`, and the modulus-of-continuity
//! check for the weight.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{
    conjugate_log_power, log_grid, DoublePhase, LogPower, OrliczFunction, TabulatedConjugate,
};
use crate::quadrature::GaussRule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailStatus {
    Converges,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    ClosedForm,
    Dyadic,
}

/// Dyadic block sums `B_k = ∫_{2^k}^{2^{k+1}} f(t) t⁻³ dt` and the fit
/// `ln B_k ≈ a + b·k + c·ln k` over `k ∈ [20, 60]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEvidence {
    pub block_sums: Vec<f64>,
    /// Geometric rate per block, `b`; nonzero when `f` is not quadratic.
    pub block_rate: f64,
    /// Power of `k` in the block sums, `c`; the series converges when `c < −1`.
    pub decay_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailVerdict {
    pub status: TailStatus,
    pub method: TailMethod,
    pub evidence: TailEvidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Gap,
    NoGap,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// Both tails are finite: `b₂` is dual-integrable and the jump of `u₂`
    /// has finite energy.
    BothTailsFinite,
    /// `∫₀ φ(1/r) r dr = ∞`: a jump at the saddle costs infinite energy.
    PhiTailInfinite,
    /// `∫₀ ψ*(1/r) r dr = ∞`: a ψ-harmonic cutoff removes the singularity.
    PsiStarTailInfinite,
    Undecided,
}

/// For a no-gap verdict from the φ tail: the dual pair `(ψ*, φ*)` has
/// `(φ*)* = φ` as its conjugate tail, so it is classified no-gap by the
/// ψ*-tail clause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualityRecord {
    pub dual_psi_star_tail: TailStatus,
    pub dual_verdict: Verdict,
    pub dual_rule: Rule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub phi_tail: TailVerdict,
    pub psi_star_tail: TailVerdict,
    pub verdict: Verdict,
    pub rule: Rule,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub duality: Option<DualityRecord>,
}

const K_MAX: usize = 60;
const FIT_FROM: usize = 20;
const MARGIN: f64 = 0.05;
const MARGIN_TABULATED: f64 = 0.15;
const RATE_MARGIN: f64 = 0.05 * std::f64::consts::LN_2;

fn block_sums(f: &OrliczFunction) -> Result<Vec<f64>> {
    let rule = GaussRule::new(16);
    let ln2 = std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(K_MAX + 1);
    for k in 0..=K_MAX {
        let a = k as f64 * ln2;
        let b = a + ln2;
        // ∫ f(t) t⁻² d(ln t), evaluated in log space.
        let s = rule.integrate(a, b, |ln_t| f.ln_value_shift(0.0, ln_t, 2.0).exp());
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Evaluation(format!("block sum {k} is {s}")));
        }
        out.push(s);
    }
    Ok(out)
}

/// Least squares for `ln B_k = a + b k + c ln k`, returning `(b, c)`.
fn fit_decay(sums: &[f64]) -> (f64, f64) {
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for (k, &b) in sums.iter().enumerate().skip(FIT_FROM) {
        let phi = [1.0, k as f64, (k as f64).ln()];
        let y = b.ln();
        for i in 0..3 {
            r[i] += phi[i] * y;
            for j in 0..3 {
                m[i][j] += phi[i] * phi[j];
            }
        }
    }
    let x = solve3(m, r);
    (x[1], x[2])
}

fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let piv = (c..3)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(c, piv);
        r.swap(c, piv);
        for i in (c + 1)..3 {
            let f = m[i][c] / m[c][c];
            for j in c..3 {
                m[i][j] -= f * m[c][j];
            }
            r[i] -= f * r[c];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = ((i + 1)..3).map(|j| m[i][j] * x[j]).sum();
        x[i] = (r[i] - s) / m[i][i];
    }
    x
}

fn check_superlinear(f: &OrliczFunction) -> Result<()> {
    for t in log_grid(2.0, 1e12, 120) {
        let q = t * f.derivative(t) / f.value(t);
        if !(q > 1.0) {
            return Err(Error::Precondition(format!(
                "growth index {q:.4} at t = {t:.3e} is not above 1"
            )));
        }
    }
    Ok(())
}

fn closed_form_status(f: &LogPower) -> TailStatus {
    let p = f.p();
    if p == 2.0 {
        if f.gamma() < -1.0 {
            TailStatus::Converges
        } else {
            TailStatus::Diverges
        }
    } else if p < 2.0 {
        TailStatus::Converges
    } else {
        TailStatus::Diverges
    }
}

fn dyadic_status(b: f64, c: f64, margin: f64) -> TailStatus {
    if b > RATE_MARGIN {
        TailStatus::Diverges
    } else if b < -RATE_MARGIN {
        TailStatus::Converges
    } else if c < -1.0 - margin {
        TailStatus::Converges
    } else if c > -1.0 + margin {
        TailStatus::Diverges
    } else {
        TailStatus::Inconclusive
    }
}

fn evidence(f: &OrliczFunction) -> Result<TailEvidence> {
    let sums = block_sums(f)?;
    let (b, c) = fit_decay(&sums);
    Ok(TailEvidence {
        block_sums: sums,
        block_rate: b,
        decay_exponent: c,
    })
}

/// Dyadic test of `∫^∞ f(t) t⁻³ dt`, ignoring any closed form.
pub fn dyadic_tail_verdict(f: &OrliczFunction) -> Result<TailVerdict> {
    check_superlinear(f)?;
    let ev = evidence(f)?;
    let margin = match f {
        OrliczFunction::TabulatedConjugate(_) => MARGIN_TABULATED,
        _ => MARGIN,
    };
    Ok(TailVerdict {
        status: dyadic_status(ev.block_rate, ev.decay_exponent, margin),
        method: TailMethod::Dyadic,
        evidence: ev,
    })
}

/// Convergence of `∫^∞ f(t) t⁻³ dt` (equivalently `∫₀ f(1/r) r dr`).
///
/// Log-power functions use the exact rule; everything else the dyadic fit.
/// Evidence is attached in both cases.
pub fn tail_integral_verdict(f: &OrliczFunction) -> Result<TailVerdict> {
    match f {
        OrliczFunction::LogPower(lp) => {
            check_superlinear(f)?;
            Ok(TailVerdict {
                status: closed_form_status(lp),
                method: TailMethod::ClosedForm,
                evidence: evidence(f)?,
            })
        }
        _ => dyadic_tail_verdict(f),
    }
}

/// Tail verdict of the conjugate of `f`.
pub fn conjugate_tail_verdict(f: &OrliczFunction) -> Result<TailVerdict> {
    match f {
        OrliczFunction::LogPower(lp) => {
            let c = conjugate_log_power(lp.p(), lp.gamma())?.function;
            tail_integral_verdict(&c.into())
        }
        _ => dyadic_tail_verdict(&TabulatedConjugate::of(f)?.into()),
    }
}

fn combine(phi: TailStatus, psi_star: TailStatus) -> (Verdict, Rule) {
    use TailStatus::*;
    match (phi, psi_star) {
        (Diverges, _) => (Verdict::NoGap, Rule::PhiTailInfinite),
        (_, Diverges) => (Verdict::NoGap, Rule::PsiStarTailInfinite),
        (Converges, Converges) => (Verdict::Gap, Rule::BothTailsFinite),
        _ => (Verdict::Inconclusive, Rule::Undecided),
    }
}

fn check_ordering(phi: &OrliczFunction, psi: &OrliczFunction) -> Result<()> {
    let grid = log_grid(1.0, 1e12, 200);
    let mut prev = f64::INFINITY;
    let mut first = None;
    for &t in &grid {
        let r = phi.value(t) / psi.value(t);
        if !r.is_finite() {
            return Err(Error::Precondition(format!(
                "φ/ψ is not finite at t = {t:.3e}"
            )));
        }
        if r > prev * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "φ/ψ increases near t = {t:.3e}; need φ/ψ → 0"
            )));
        }
        first.get_or_insert(r);
        prev = r;
    }
    if !(prev < first.unwrap()) {
        return Err(Error::Precondition("φ/ψ does not decay".into()));
    }
    Ok(())
}

pub fn classify(phi: &OrliczFunction, psi: &OrliczFunction) -> Result<RegimeReport> {
    check_ordering(phi, psi)?;
    let phi_tail = tail_integral_verdict(phi)?;
    let psi_star_tail = conjugate_tail_verdict(psi)?;
    let (verdict, rule) = combine(phi_tail.status, psi_star_tail.status);
    let duality = if rule == Rule::PhiTailInfinite {
        // The dual pair's conjugate tail is the tail of φ** = φ.
        let dual_tail = match phi {
            OrliczFunction::LogPower(lp) => {
                let star = conjugate_log_power(lp.p(), lp.gamma())?.function;
                let back = conjugate_log_power(star.p(), star.gamma())?.function;
                closed_form_status(&back)
            }
            _ => phi_tail.status,
        };
        let (dual_verdict, dual_rule) = match dual_tail {
            TailStatus::Diverges => (Verdict::NoGap, Rule::PsiStarTailInfinite),
            _ => (Verdict::Inconclusive, Rule::Undecided),
        };
        Some(DualityRecord {
            dual_psi_star_tail: dual_tail,
            dual_verdict,
            dual_rule,
        })
    } else {
        None
    };
    Ok(RegimeReport {
        phi_tail,
        psi_star_tail,
        verdict,
        rule,
        duality,
    })
}

/// Classification of the checkerboard pair `(t² log^{−β}, t² log^{α})`.
pub fn classify_pair(alpha: f64, beta: f64) -> Result<RegimeReport> {
    let dp = DoublePhase::log_pair(alpha, beta)?;
    classify(&dp.phi, &dp.psi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub alpha: f64,
    pub beta: f64,
    pub verdict: Verdict,
    pub rule: Rule,
}

/// Verdicts on the product grid, ordered by `(alpha, beta)`.
pub fn phase_diagram(alphas: &[f64], betas: &[f64]) -> Result<Vec<PhaseCell>> {
    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(alpha, beta)| {
            let r = classify_pair(alpha, beta)?;
            Ok(PhaseCell {
                alpha,
                beta,
                verdict: r.verdict,
                rule: r.rule,
            })
        })
        .collect()
}

/// Modulus of continuity `ω` on `(0, 1/4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `coef · log^{−exponent}(1/r)`.
    Log { coef: f64, exponent: f64 },
    /// `coef · r^exponent`.
    Holder { coef: f64, exponent: f64 },
}

impl Modulus {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Modulus::Log { coef, exponent } => coef * (1.0 / r).ln().powf(-exponent),
            Modulus::Holder { coef, exponent } => coef * r.powf(exponent),
        }
    }

    fn validate(&self) -> Result<()> {
        let (c, e) = match *self {
            Modulus::Log { coef, exponent } | Modulus::Holder { coef, exponent } => {
                (coef, exponent)
            }
        };
        if !(c > 0.0 && e > 0.0 && c.is_finite() && e.is_finite()) {
            return Err(Error::Domain(
                "modulus needs positive coefficient and exponent".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    Fails {
        eps: f64,
        t: f64,
        omega: f64,
        bound: f64,
    },
}

/// Checks `ω(ε) ≤ k₀ · min_{1 ≤ t ≤ ε^{−d}} φ(t)/ψ(t)` on a log grid of
/// `ε ∈ [1e-8, 1/4]`.
pub fn regularity_modulus_check(
    omega: Modulus,
    phi: &OrliczFunction,
    psi: &OrliczFunction,
    k0: f64,
    d: u32,
) -> Result<Regularity> {
    omega.validate()?;
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(k0 > 0.0 && k0.is_finite()) {
        return Err(Error::Domain(format!("k0 must be positive, got {k0}")));
    }
    let ratio = |t: f64| phi.value(t) / psi.value(t);
    for eps in log_grid(1e-8, 0.25, 200) {
        let t_max = eps.powi(-(d as i32));
        let ts = log_grid(1.0, t_max, 64);
        let decreasing = ts
            .windows(2)
            .all(|w| ratio(w[1]) <= ratio(w[0]) * (1.0 + 1e-12));
        let (t, m) = if decreasing {
            (t_max, ratio(t_max))
        } else {
            ts.iter()
                .map(|&t| (t, ratio(t)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
        };
        let w = omega.eval(eps);
        if w > k0 * m {
            return Ok(Regularity::Fails {
                eps,
                t,
                omega: w,
                bound: k0 * m,
            });
        }
    }
    Ok(Regularity::Regular)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(p: f64, g: f64) -> OrliczFunction {
        OrliczFunction::log_power(p, g).unwrap()
    }

    #[test]
    fn tail_examples() {
        assert_eq!(
            tail_integral_verdict(&lp(2.0, -2.0)).unwrap().status,
            TailStatus::Converges
        );
        assert_eq!(
            tail_integral_verdict(&lp(2.0, -1.0)).unwrap().status,
            TailStatus::Diverges
        );
        assert_eq!(
            tail_integral_verdict(&lp(2.0, 0.0)).unwrap().status,
            TailStatus::Diverges
        );
        assert_eq!(
            tail_integral_verdict(&lp(1.8, 5.0)).unwrap().status,
            TailStatus::Converges
        );
        assert_eq!(
            tail_integral_verdict(&lp(2.2, -5.0)).unwrap().status,
            TailStatus::Diverges
        );
    }

    #[test]
    fn dyadic_fit_recovers_log_exponent() {
        for g in [-3.0, -2.0, 0.0, 1.0] {
            let v = dyadic_tail_verdict(&lp(2.0, g)).unwrap();
            assert!(
                v.evidence.block_rate.abs() < 0.01,
                "rate {}",
                v.evidence.block_rate
            );
            assert!(
                (v.evidence.decay_exponent - g).abs() < 0.1,
                "γ={g}: {:?}",
                v.evidence.decay_exponent
            );
        }
    }

    #[test]
    fn borderline_is_inconclusive_numerically() {
        let v = dyadic_tail_verdict(&lp(2.0, -1.0)).unwrap();
        assert_eq!(v.status, TailStatus::Inconclusive);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_pair(2.0, 2.0).unwrap().verdict, Verdict::Gap);
        assert_eq!(classify_pair(0.5, 3.0).unwrap().verdict, Verdict::NoGap);
        let r = classify_pair(1.0, 1.0).unwrap();
        assert_eq!(r.verdict, Verdict::NoGap);
        assert_eq!(r.rule, Rule::PhiTailInfinite);
        assert_eq!(r.duality.unwrap().dual_verdict, Verdict::NoGap);
    }

    #[test]
    fn reversed_pair_is_a_precondition_error() {
        let e = classify(&lp(2.0, 2.0), &lp(2.0, -2.0)).unwrap_err();
        assert!(e.is_precondition());
    }

    #[test]
    fn pure_power_pairs_use_the_dyadic_path() {
        let phi = OrliczFunction::pure_power(1.8, 1.0).unwrap();
        let psi = OrliczFunction::pure_power(2.5, 1.0).unwrap();
        let r = classify(&phi, &psi).unwrap();
        assert_eq!(r.phi_tail.method, TailMethod::Dyadic);
        // ψ* grows like s^{5/3}: both tails finite.
        assert_eq!(r.verdict, Verdict::Gap);
    }
}
