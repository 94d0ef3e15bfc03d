use dphase::cutoff::{
    build_loglog_cutoff, build_psi_harmonic_cutoff, build_psi_harmonic_cutoff_log, cutoff_energy,
    find_inner_radius, solve_normalization_constant, CERTIFICATE_K,
};
use dphase::orlicz::{DoublePhase, OrliczFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn t2_log() -> OrliczFunction {
    OrliczFunction::log_power(2.0, 1.0).unwrap()
}

#[test]
fn loglog_energy_times_log_is_bounded() {
    let f = t2_log();
    let mut scaled = Vec::new();
    for k in [5.0f64, 10.0, 20.0, 40.0] {
        let cut = build_loglog_cutoff((-k).exp()).unwrap();
        let e = cutoff_energy(&cut, (&f).into()).unwrap();
        scaled.push(e * k);
    }
    // The product tends to 2π from above.
    for &s in &scaled {
        assert!(s <= 4.0 * std::f64::consts::PI, "{scaled:?}");
        assert!(s > 2.0 * std::f64::consts::PI, "{scaled:?}");
    }
}

#[test]
fn loglog_energy_decreases() {
    let f = t2_log();
    let e10 = cutoff_energy(&build_loglog_cutoff((-10.0f64).exp()).unwrap(), (&f).into()).unwrap();
    let e20 = cutoff_energy(&build_loglog_cutoff((-20.0f64).exp()).unwrap(), (&f).into()).unwrap();
    assert!(e20 < e10);
    assert!(e10 <= 4.0 * std::f64::consts::PI / 10.0);
}

#[test]
fn certificate_holds_for_random_log_powers() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let alpha = rng.gen_range(0.0..1.0);
        let psi = OrliczFunction::log_power(2.0, alpha).unwrap();
        let r2 = rng.gen_range(0.01..0.5);
        let r1 = r2 * rng.gen_range(1e-6..0.5);
        let cut = build_psi_harmonic_cutoff(&psi, r1, r2).unwrap();
        let cert = cut.certificate.unwrap();
        assert!(cert.holds, "alpha {alpha}: {cert:?}");
        assert!(cert.energy <= CERTIFICATE_K * cert.c);
        assert!((cut.profile[0].eta - 1.0).abs() < 1e-8, "eta(r2) = {}", cut.profile[0].eta);
        let res = cut.euler_lagrange_residual().unwrap();
        assert!(res <= 1e-6, "residual {res}");
    }
}

#[test]
fn eta_prime_is_inverse_derivative() {
    let psi = OrliczFunction::log_power(2.0, 0.7).unwrap();
    let cut = build_psi_harmonic_cutoff(&psi, 1e-4, 0.2).unwrap();
    for node in cut.profile.iter().step_by(97) {
        let u = node.w.exp();
        let r = (-u).exp();
        let direct = psi.inverse_derivative(cut.c / r).unwrap();
        let table = (node.ln_y + u).exp();
        assert!(((table - direct) / direct).abs() < 1e-8, "r={r:e}: {table} vs {direct}");
    }
}

#[test]
fn vanishing_energies_along_dyadic_budgets() {
    for alpha in [0.0, 0.5, 1.0] {
        let psi = OrliczFunction::log_power(2.0, alpha).unwrap();
        for k in 1..=8 {
            let delta = 0.5f64.powi(k);
            let ir = find_inner_radius(&psi, 0.25, delta).unwrap();
            assert!(ir.c <= delta);
            let cut = build_psi_harmonic_cutoff_log(&psi, ir.u1, 0.25f64.ln().abs()).unwrap();
            let e = cut.certificate.unwrap().energy;
            assert!(e <= CERTIFICATE_K * delta, "alpha {alpha} k {k}: {e}");
        }
    }
}

#[test]
fn quadratic_normalization_matches_closed_form() {
    let sq = OrliczFunction::pure_power(2.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let r2 = rng.gen_range(1e-3..0.5);
        let r1 = r2 * rng.gen_range(1e-9..0.9);
        let c = solve_normalization_constant(&sq, r1, r2).unwrap();
        let exact = 2.0 / (r2 / r1).ln();
        assert!(((c - exact) / exact).abs() < 1e-8);
    }
}

#[test]
fn double_phase_energy_uses_half_weight() {
    let dp = DoublePhase::log_pair(1.0, 1.0).unwrap();
    let cut = build_loglog_cutoff(1e-3).unwrap();
    let e = cutoff_energy(&cut, (&dp).into()).unwrap();
    let e_phi = cutoff_energy(&cut, (&dp.phi).into()).unwrap();
    let e_psi = cutoff_energy(&cut, (&dp.psi).into()).unwrap();
    assert!((e - (e_phi + 0.5 * e_psi)).abs() <= 1e-12 * e);
}
