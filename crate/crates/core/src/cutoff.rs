//! Radial cutoffs that remove the singularity at the saddle point.
//!
//! Radii are carried as `u = ln(1/r)` and the profile grid is uniform in
//! `w = ln u`, so that inner radii such as `exp(−e^{40})` stay representable.
//! In these variables the radial derivative enters only through
//! `y = r·η'(r)`, and `dη = −y du`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::orlicz::{DoublePhase, OrliczFunction};
use crate::quadrature::{integrate_adaptive, solve_increasing, GaussRule};
use crate::regime::{conjugate_tail_verdict, TailStatus};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
const PROFILE_NODES: usize = 4096;
const MAX_EXPANSIONS: usize = 400;

/// Constant `K` of the certificate `∫ ψ(|∇η|) ≤ K·c`. Since
/// `ψ(τ) ≤ τψ'(τ)` and `ψ'(η') = c/r`, the energy is at most
/// `2π ∫ η' c dr = 2π c`.
pub const CERTIFICATE_K: f64 = TWO_PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKind {
    LogLog,
    PsiHarmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileNode {
    /// `ln ln(1/r)`.
    pub w: f64,
    /// `ln(r η'(r))`.
    pub ln_y: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCertificate {
    pub energy: f64,
    pub c: f64,
    pub k: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoff {
    pub kind: CutoffKind,
    /// `ln(1/r₁)`.
    pub u1: f64,
    /// `ln(1/r₂)`.
    pub u2: f64,
    /// Normalization constant; for the log-log kind, the denominator
    /// `ln(1/ε) − ln ln(1/ε)`.
    pub c: f64,
    pub psi: Option<OrliczFunction>,
    pub profile: Vec<ProfileNode>,
    pub certificate: Option<EnergyCertificate>,
}

/// Integrand accepted by [`cutoff_energy`].
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    Single(&'a OrliczFunction),
    Pair(&'a DoublePhase),
}

impl<'a> From<&'a OrliczFunction> for Integrand<'a> {
    fn from(f: &'a OrliczFunction) -> Self {
        Integrand::Single(f)
    }
}

impl<'a> From<&'a DoublePhase> for Integrand<'a> {
    fn from(f: &'a DoublePhase) -> Self {
        Integrand::Pair(f)
    }
}

fn radius_to_u(r: f64) -> f64 {
    -r.ln()
}

fn check_log_radii(u1: f64, u2: f64) -> Result<()> {
    if !(u1.is_finite() && u2.is_finite()) {
        return Err(Error::Domain("radii must be positive and finite".into()));
    }
    if !(u2 >= std::f64::consts::LN_2 - 1e-15) {
        return Err(Error::Domain(format!(
            "outer radius {:e} exceeds 1/2",
            (-u2).exp()
        )));
    }
    if !(u1 > u2) {
        return Err(Error::Domain(
            "inner radius must be below outer radius".into(),
        ));
    }
    Ok(())
}

/// `ln y` with `ψ'(y eᵘ) = c eᵘ`, i.e. `y = r·(ψ')⁻¹(c/r)` at `r = e^{−u}`.
fn solve_ln_y(psi: &OrliczFunction, ln_c: f64, u: f64, guess: f64) -> f64 {
    let g = |x: f64| psi.ln_derivative_shift(x, u, 1.0) - ln_c;
    let mut x = guess;
    for _ in 0..40 {
        let gx = g(x);
        if gx == 0.0 {
            return x;
        }
        let h = 1e-6 * (1.0 + x.abs());
        let d = (g(x + h) - gx) / h;
        if !(d > 0.0 && d.is_finite()) {
            break;
        }
        let dx = (gx / d).clamp(-4.0, 4.0);
        x -= dx;
        if dx.abs() <= 1e-14 * (1.0 + x.abs()) {
            return x;
        }
    }
    solve_increasing(g, guess, 1e-15).unwrap_or(f64::NAN)
}

fn guess_ln_y(psi: &OrliczFunction, ln_c: f64, u: f64) -> f64 {
    // Power-law estimate from the local index at the guessed argument.
    let p = match psi {
        OrliczFunction::LogPower(f) => f.p(),
        OrliczFunction::PurePower(f) => f.p(),
        OrliczFunction::TabulatedConjugate(_) => 2.0,
    };
    (ln_c - (p - 2.0) * u) / (p - 1.0)
}

fn normalization_integral(psi: &OrliczFunction, ln_c: f64, u1: f64, u2: f64) -> Result<f64> {
    let mut last = guess_ln_y(psi, ln_c, u2);
    let integrand = |w: f64| {
        let u = w.exp();
        last = solve_ln_y(psi, ln_c, u, last);
        (last + w).exp()
    };
    integrate_adaptive(integrand, u2.ln(), u1.ln(), 0.0, 1e-13)
}

/// `c` with `∫_{r₁}^{r₂} (ψ')⁻¹(c/ρ) dρ = 1`, from log-radii `u = ln(1/r)`.
pub fn solve_normalization_constant_log(psi: &OrliczFunction, u1: f64, u2: f64) -> Result<f64> {
    check_log_radii(u1, u2)?;
    let f = |ln_c: f64| -> Result<f64> { Ok(normalization_integral(psi, ln_c, u1, u2)?.ln()) };
    // The integral increases with c; expand a bracket around c = 1.
    let mut lo = 0.0;
    let mut hi = 0.0;
    let f0 = f(0.0)?;
    let mut n = 0;
    if f0 < 0.0 {
        let mut fh = f0;
        while fh < 0.0 {
            lo = hi;
            hi += 1.0;
            fh = f(hi)?;
            n += 1;
            if n > MAX_EXPANSIONS || !fh.is_finite() {
                return Err(Error::NormalizationInfeasible { expansions: n });
            }
        }
    } else {
        let mut fl = f0;
        while fl > 0.0 {
            hi = lo;
            lo -= 1.0;
            fl = f(lo)?;
            n += 1;
            if n > MAX_EXPANSIONS || !fl.is_finite() {
                return Err(Error::NormalizationInfeasible { expansions: n });
            }
        }
    }
    let mut err = None;
    let root = crate::quadrature::brent(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-15,
        200,
    );
    if let Some(e) = err {
        return Err(e);
    }
    root.map(f64::exp)
        .ok_or(Error::NormalizationInfeasible { expansions: n })
}

pub fn solve_normalization_constant(psi: &OrliczFunction, r1: f64, r2: f64) -> Result<f64> {
    if !(r1 > 0.0 && r2 > r1 && r2 <= 0.5) {
        return Err(Error::Domain(format!(
            "need 0 < r1 < r2 <= 1/2, got r1 = {r1:e}, r2 = {r2:e}"
        )));
    }
    solve_normalization_constant_log(psi, radius_to_u(r1), radius_to_u(r2))
}

fn w_grid(u1: f64, u2: f64) -> Vec<f64> {
    let (a, b) = (u2.ln(), u1.ln());
    (0..PROFILE_NODES)
        .map(|i| a + (b - a) * i as f64 / (PROFILE_NODES - 1) as f64)
        .collect()
}

pub fn build_psi_harmonic_cutoff_log(
    psi: &OrliczFunction,
    u1: f64,
    u2: f64,
) -> Result<RadialCutoff> {
    let c = solve_normalization_constant_log(psi, u1, u2)?;
    let ln_c = c.ln();
    let ws = w_grid(u1, u2);
    let mut ln_ys = Vec::with_capacity(ws.len());
    let mut last = guess_ln_y(psi, ln_c, u2);
    for &w in &ws {
        last = solve_ln_y(psi, ln_c, w.exp(), last);
        if !last.is_finite() {
            return Err(Error::Evaluation(format!(
                "derivative inversion failed at w = {w}"
            )));
        }
        ln_ys.push(last);
    }
    // η(w) = ∫_w^{w₁} y e^{w'} dw', accumulated cell by cell from the inner radius.
    let rule = GaussRule::new(8);
    let mut eta = vec![0.0; ws.len()];
    for i in (0..ws.len() - 1).rev() {
        let mut guess = ln_ys[i];
        let cell = rule.integrate(ws[i], ws[i + 1], |w| {
            guess = solve_ln_y(psi, ln_c, w.exp(), guess);
            (guess + w).exp()
        });
        eta[i] = eta[i + 1] + cell;
    }
    let profile = ws
        .iter()
        .zip(&ln_ys)
        .zip(&eta)
        .map(|((&w, &ln_y), &eta)| ProfileNode { w, ln_y, eta })
        .collect();
    let mut cutoff = RadialCutoff {
        kind: CutoffKind::PsiHarmonic,
        u1,
        u2,
        c,
        psi: Some(psi.clone()),
        profile,
        certificate: None,
    };
    let energy = cutoff_energy(&cutoff, psi.into())?;
    cutoff.certificate = Some(EnergyCertificate {
        energy,
        c,
        k: CERTIFICATE_K,
        holds: energy <= CERTIFICATE_K * c * (1.0 + 1e-9),
    });
    Ok(cutoff)
}

pub fn build_psi_harmonic_cutoff(psi: &OrliczFunction, r1: f64, r2: f64) -> Result<RadialCutoff> {
    if !(r1 > 0.0 && r2 > r1 && r2 <= 0.5) {
        return Err(Error::Domain(format!(
            "need 0 < r1 < r2 <= 1/2, got r1 = {r1:e}, r2 = {r2:e}"
        )));
    }
    build_psi_harmonic_cutoff_log(psi, radius_to_u(r1), radius_to_u(r2))
}

/// Inner radius `r₁ = r₂·2^{−k}` with the smallest `k` for which `c ≤ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerRadius {
    /// `ln(1/r₁)`; `r₁` itself may underflow.
    pub u1: f64,
    pub r1: f64,
    pub halvings: f64,
    pub c: f64,
}

/// Finds how far `r₁` must be halved below `r₂` before `c_{r₁,r₂} ≤ δ`.
///
/// `c` decreases with every halving, so the smallest admissible count is
/// located by exponential search followed by bisection over the count.
pub fn find_inner_radius(psi: &OrliczFunction, r2: f64, delta: f64) -> Result<InnerRadius> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!(
            "energy budget must be positive, got {delta}"
        )));
    }
    if !(r2 > 0.0 && r2 <= 0.5) {
        return Err(Error::Domain(format!(
            "outer radius must lie in (0, 1/2], got {r2}"
        )));
    }
    let tail = conjugate_tail_verdict(psi)?;
    if tail.status != TailStatus::Diverges {
        return Err(Error::NoRemovableSingularity(format!(
            "∫₀ ψ*(1/r) r dr is {:?}; cutoff energies cannot be made small",
            tail.status
        )));
    }
    let u2 = radius_to_u(r2);
    let ln2 = std::f64::consts::LN_2;
    let c_at = |k: f64| solve_normalization_constant_log(psi, u2 + k * ln2, u2);
    let mut hi = 1.0;
    let mut c_hi = c_at(hi)?;
    while c_hi > delta {
        hi *= 2.0;
        if !(u2 + hi * ln2).is_finite() || hi > 1e300 {
            return Err(Error::NormalizationInfeasible {
                expansions: hi.log2() as usize,
            });
        }
        c_hi = c_at(hi)?;
    }
    let mut lo = (hi / 2.0).floor();
    if lo < 1.0 {
        lo = 0.0;
    }
    // Invariant: c(lo) > δ (or lo = 0), c(hi) ≤ δ.
    while hi - lo > 1.0 && hi - lo > 1e-12 * hi {
        let mid = (0.5 * (lo + hi)).floor();
        if mid <= lo || mid >= hi {
            break;
        }
        let cm = c_at(mid)?;
        if cm <= delta {
            hi = mid;
            c_hi = cm;
        } else {
            lo = mid;
        }
    }
    let u1 = u2 + hi * ln2;
    Ok(InnerRadius {
        u1,
        r1: (-u1).exp(),
        halvings: hi,
        c: c_hi,
    })
}

/// The log-log cutoff `η = (ln(1/ε) − ln ln(1/r)) / (ln(1/ε) − ln ln(1/ε))`
/// between `r₁ = e^{−1/ε}` and `r₂ = ε`.
pub fn build_loglog_cutoff(eps: f64) -> Result<RadialCutoff> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::Domain(format!("need 0 < eps < 1/10, got {eps}")));
    }
    let u2 = -eps.ln();
    let u1 = 1.0 / eps;
    let d = u2 - u2.ln();
    let ws = w_grid(u1, u2);
    let profile = ws
        .iter()
        .map(|&w| ProfileNode {
            w,
            ln_y: -d.ln() - w,
            eta: ((u2 - w) / d).clamp(0.0, 1.0),
        })
        .collect();
    Ok(RadialCutoff {
        kind: CutoffKind::LogLog,
        u1,
        u2,
        c: d,
        psi: None,
        profile,
        certificate: None,
    })
}

impl RadialCutoff {
    pub fn r1(&self) -> f64 {
        (-self.u1).exp()
    }

    pub fn r2(&self) -> f64 {
        (-self.u2).exp()
    }

    /// `ln(r η'(r))` at `r = e^{−u}` inside `(r₁, r₂)`.
    pub fn ln_y_at_u(&self, u: f64) -> f64 {
        let w = u.ln();
        match self.kind {
            CutoffKind::LogLog => -self.c.ln() - w,
            CutoffKind::PsiHarmonic => {
                let psi = self.psi.as_ref().expect("psi-harmonic cutoff keeps psi");
                let i = self.cell_of(w);
                solve_ln_y(psi, self.c.ln(), u, self.profile[i].ln_y)
            }
        }
    }

    fn cell_of(&self, w: f64) -> usize {
        let n = self.profile.len();
        let i = self.profile.partition_point(|p| p.w <= w);
        i.saturating_sub(1).min(n - 2)
    }

    /// `η` at `r = e^{−u}`.
    pub fn eta_at_u(&self, u: f64) -> f64 {
        if u >= self.u1 {
            return 0.0;
        }
        if u <= self.u2 {
            return 1.0;
        }
        let w = u.ln();
        match self.kind {
            CutoffKind::LogLog => ((self.u2 - w) / self.c).clamp(0.0, 1.0),
            CutoffKind::PsiHarmonic => {
                let psi = self.psi.as_ref().expect("psi-harmonic cutoff keeps psi");
                let i = self.cell_of(w);
                let right = &self.profile[i + 1];
                let mut guess = self.profile[i].ln_y;
                let part = GaussRule::new(8).integrate(w, right.w, |s| {
                    guess = solve_ln_y(psi, self.c.ln(), s.exp(), guess);
                    (guess + s).exp()
                });
                (right.eta + part).clamp(0.0, 1.0)
            }
        }
    }

    pub fn eta(&self, r: f64) -> f64 {
        if r <= 0.0 {
            0.0
        } else {
            self.eta_at_u(radius_to_u(r))
        }
    }

    /// `η'(r)`; may overflow to infinity for radii far below `f64` range.
    pub fn eta_prime(&self, r: f64) -> f64 {
        let u = radius_to_u(r);
        if u >= self.u1 || u <= self.u2 {
            return 0.0;
        }
        (self.ln_y_at_u(u) + u).exp()
    }

    /// Max over interior nodes of `|g_{i+1} − g_i| / c` with
    /// `g = r ψ'(η'(r))`, the discrete radial Euler–Lagrange residual.
    pub fn euler_lagrange_residual(&self) -> Option<f64> {
        let psi = self.psi.as_ref()?;
        let g: Vec<f64> = self
            .profile
            .iter()
            .map(|p| (psi.ln_derivative_shift(p.ln_y, p.w.exp(), 1.0) - self.c.ln()).exp())
            .collect();
        Some(
            g.windows(2)
                .skip(1)
                .take(g.len().saturating_sub(3))
                .map(|w| (w[1] - w[0]).abs())
                .fold(0.0, f64::max),
        )
    }
}

fn single_energy(cutoff: &RadialCutoff, f: &OrliczFunction) -> Result<f64> {
    let mut guess = cutoff.profile[0].ln_y;
    let ln_c = cutoff.c.ln();
    let integrand = |w: f64| {
        let u = w.exp();
        let ln_y = match cutoff.kind {
            CutoffKind::LogLog => -ln_c - w,
            CutoffKind::PsiHarmonic => {
                let psi = cutoff.psi.as_ref().expect("psi-harmonic cutoff keeps psi");
                guess = solve_ln_y(psi, ln_c, u, guess);
                guess
            }
        };
        (f.ln_value_shift(ln_y, u, 2.0) + w).exp()
    };
    let v = integrate_adaptive(integrand, cutoff.u2.ln(), cutoff.u1.ln(), 0.0, 1e-11)
        .map_err(|e| Error::EnergyOverflow(e.to_string()))?;
    let e = TWO_PI * v;
    if !e.is_finite() {
        return Err(Error::EnergyOverflow(format!("cutoff energy is {e}")));
    }
    Ok(e)
}

/// `∫_Ω f(|∇η|) dx = 2π ∫ f(η'(r)) r dr`.
///
/// For a checkerboard pair the weight has angular mean 1/2 on every circle,
/// so the energy is `E_φ + ½ E_ψ`.
pub fn cutoff_energy(cutoff: &RadialCutoff, integrand: Integrand<'_>) -> Result<f64> {
    match integrand {
        Integrand::Single(f) => single_energy(cutoff, f),
        Integrand::Pair(dp) => {
            let a = dp.weight.angular_mean();
            let e_phi = single_energy(cutoff, &dp.phi)?;
            let e_psi = if a == 0.0 {
                0.0
            } else {
                single_energy(cutoff, &dp.psi)?
            };
            Ok(e_phi + a * e_psi)
        }
    }
}
