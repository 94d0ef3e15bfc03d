use dphase::geometry::{
    boundary_flux, boundary_flux_by_side, disjoint_support_audit, eval_weight, solenoidal_residual,
    Point2, SaddleFields, ThetaCutoff,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fields() -> SaddleFields {
    SaddleFields::default()
}

fn p(x1: f64, x2: f64) -> Point2 {
    Point2::new(x1, x2)
}

fn fd_grad(f: impl Fn(Point2) -> f64, x: Point2) -> [f64; 2] {
    let h = 1e-6;
    [
        (f(p(x.x1 + h, x.x2)) - f(p(x.x1 - h, x.x2))) / (2.0 * h),
        (f(p(x.x1, x.x2 + h)) - f(p(x.x1, x.x2 - h))) / (2.0 * h),
    ]
}

fn close(a: [f64; 2], b: [f64; 2], rel: f64) -> bool {
    let scale = a[0].hypot(a[1]).max(b[0].hypot(b[1])).max(1e-12);
    (a[0] - b[0]).hypot(a[1] - b[1]) <= rel * scale
}

#[test]
fn weight_examples() {
    assert_eq!(eval_weight(p(0.5, 0.1)), 0);
    assert_eq!(eval_weight(p(0.1, 0.5)), 1);
    assert_eq!(eval_weight(p(0.3, 0.3)), 0);
    assert_eq!(eval_weight(p(-0.3, 0.3)), 0);
}

#[test]
fn theta_profile() {
    let th = ThetaCutoff::default();
    assert_eq!(th.value(0.1), 0.0);
    assert_eq!(th.value(0.25), 0.0);
    assert_eq!(th.value(0.5), 1.0);
    assert_eq!(th.value(7.0), 1.0);
    assert_eq!(th.max_slope(), 6.0);
    let mut prev = 0.0;
    for k in 0..=1000 {
        let s = k as f64 * 1e-3;
        let v = th.value(s);
        assert!(v >= prev);
        assert!(th.derivative(s) <= 6.0 + 1e-12);
        prev = v;
    }
}

#[test]
fn u2_examples() {
    let f = fields();
    assert_eq!(f.u2(p(0.0, 0.5)), 0.5);
    assert_eq!(f.u2(p(0.5, -0.5)), -0.5);
    assert_eq!(f.u2(p(0.5, 0.1)), 0.0);
    assert_eq!(f.u2(p(0.0, 0.0)), 0.0);
    assert!(p(0.0, 0.0).is_origin());
}

#[test]
fn grad_u2_examples() {
    let f = fields();
    assert_eq!(f.grad_u2(p(0.0, 0.5)), [0.0, 0.0]);
    assert_eq!(f.grad_u2(p(0.9, 0.2)), [0.0, 0.0]);
    assert_eq!(f.grad_u2(p(0.0, 0.0)), [0.0, 0.0]);

    let x = p(0.9, 0.3);
    let th = ThetaCutoff::default();
    let d = th.derivative(1.0 / 3.0);
    let expect = [-d * (0.3 / 0.81) / 2.0, d / (2.0 * 0.9)];
    assert!(close(f.grad_u2(x), expect, 1e-14));
    assert!(close(f.grad_u2(x), fd_grad(|y| f.u2(y), x), 1e-6));
}

#[test]
fn b2_examples() {
    let f = fields();
    assert_eq!(f.b2(p(0.5, 0.1)), [0.0, 0.0]);
    assert_eq!(f.b2(p(0.0, 0.0)), [0.0, 0.0]);
    let x = p(0.3, 0.9);
    let dv = fd_grad(|y| f.v(y), x);
    assert!(close(f.b2(x), [-dv[1], dv[0]], 1e-6));
}

#[test]
fn matrix_potential_divergence_matches_b2() {
    let f = fields();
    let h = 1e-6;
    for x in [p(0.3, 0.9), p(-0.2, 0.6), p(0.15, -0.45)] {
        let a = |y: Point2| f.a2(y);
        // Row divergence: (∂₁A₁₁ + ∂₂A₁₂, ∂₁A₂₁ + ∂₂A₂₂).
        let d1 = (a(p(x.x1 + h, x.x2))[0][0] - a(p(x.x1 - h, x.x2))[0][0]
            + a(p(x.x1, x.x2 + h))[0][1]
            - a(p(x.x1, x.x2 - h))[0][1])
            / (2.0 * h);
        let d2 = (a(p(x.x1 + h, x.x2))[1][0] - a(p(x.x1 - h, x.x2))[1][0]
            + a(p(x.x1, x.x2 + h))[1][1]
            - a(p(x.x1, x.x2 - h))[1][1])
            / (2.0 * h);
        assert!(close([d1, d2], f.b2(x), 1e-6));
    }
}

#[test]
fn diagonal_points_are_plateaus() {
    let f = fields();
    for t in [0.01, 0.3, -0.7, 0.99] {
        for x in [p(t, t), p(t, -t)] {
            assert_eq!(f.grad_u2(x), [0.0, 0.0]);
            assert_eq!(f.b2(x), [0.0, 0.0]);
        }
    }
}

#[test]
fn gradients_match_finite_differences() {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    while checked < 200 {
        let x = p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        // Stay away from the kinks of the C¹ profile and the axes.
        let r1 = (x.x2 / x.x1).abs();
        let r2 = (x.x1 / x.x2).abs();
        let near = |r: f64| (r - 0.25).abs() < 1e-3 || (r - 0.5).abs() < 1e-3;
        if near(r1) || near(r2) || x.x1.abs() < 1e-3 || x.x2.abs() < 1e-3 {
            continue;
        }
        assert!(close(f.grad_u2(x), fd_grad(|y| f.u2(y), x), 1e-5), "{x:?}");
        let dv = fd_grad(|y| f.v(y), x);
        assert!(close(f.b2(x), [-dv[1], dv[0]], 1e-5), "{x:?}");
        checked += 1;
    }
}

#[test]
fn support_inclusions_and_bounds() {
    let f = fields();
    let bound = 6.0 * 2f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut hits_g, mut hits_b) = (0, 0);
    for _ in 0..200_000 {
        let x = p(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let g = f.grad_u2(x);
        let b = f.b2(x);
        let ng = g[0].hypot(g[1]);
        let nb = b[0].hypot(b[1]);
        let (a1, a2) = (x.x1.abs(), x.x2.abs());
        if ng != 0.0 {
            hits_g += 1;
            assert_eq!(eval_weight(x), 0);
            assert!(2.0 * a2 <= a1 && a1 <= 4.0 * a2);
            assert!(ng * a1 <= bound);
        }
        if nb != 0.0 {
            hits_b += 1;
            assert_eq!(eval_weight(x), 1);
            assert!(2.0 * a1 <= a2 && a2 <= 4.0 * a1);
            assert!(nb * a1 <= bound);
        }
        if a1 > 4.0 * a2 {
            assert_eq!(g, [0.0, 0.0]);
        }
    }
    assert!(hits_g > 1000 && hits_b > 1000);
}

#[test]
fn b2_vanishes_on_the_horizontal_transition_cones() {
    let f = fields();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let x2: f64 = rng.gen_range(-0.25..0.25);
        let x1 = x2.abs() * rng.gen_range(2.0..4.0) * if rng.gen() { 1.0 } else { -1.0 };
        assert_eq!(f.b2(p(x1, x2)), [0.0, 0.0]);
    }
}

#[test]
fn disjoint_supports_are_exact() {
    assert_eq!(disjoint_support_audit(1_000_000, 0), 0.0);
    assert_eq!(disjoint_support_audit(1000, 12345), 0.0);
}

#[test]
fn b2_is_solenoidal_against_bumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c: [f64; 2] = [rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6)];
        let r_max = (1.0 - c[0].abs()).min(1.0 - c[1].abs());
        let r = rng.gen_range(0.05..r_max);
        worst = worst.max(solenoidal_residual(c, r).abs());
    }
    // The bump is only C² across its rim, which the radial panels do not
    // follow, so the quadrature floor sits near 1e-8.
    assert!(worst < 1e-7, "worst residual {worst}");
}

#[test]
fn boundary_flux_converges_to_one() {
    assert!((boundary_flux(1024) - 1.0).abs() < 1e-6);
    assert!((boundary_flux(8192) - 1.0).abs() < 1e-9);
}

#[test]
fn boundary_flux_refinement_does_not_increase_error() {
    let e128 = (boundary_flux(128) - 1.0).abs();
    let e256 = (boundary_flux(256) - 1.0).abs();
    assert!(e256 <= e128, "{e128} -> {e256}");
}

#[test]
fn flux_is_carried_by_top_and_bottom() {
    // Left and right sides lie in {|x₁| > 4|x₂|} ∪ plateaus of v, where b₂·ν = 0.
    let s = boundary_flux_by_side(1024);
    assert_eq!(s[1], 0.0);
    assert_eq!(s[3], 0.0);
    assert!((s[0] - 0.5).abs() < 1e-6);
    assert!((s[2] - 0.5).abs() < 1e-6);
}

proptest! {
    #[test]
    fn u2_symmetry_and_bound(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let f = fields();
        let u = f.u2(p(x1, x2));
        prop_assert!(u.abs() <= 0.5);
        prop_assert_eq!(f.u2(p(x1, -x2)), -u);
        prop_assert_eq!(f.u2(p(-x1, x2)), u);
    }

    #[test]
    fn b2_reflections(x1 in -1.0f64..1.0, x2 in -1.0f64..1.0) {
        let f = fields();
        let b = f.b2(p(x1, x2));
        let flipped = [-b[0], b[1]];
        prop_assert_eq!(f.b2(p(-x1, x2)), flipped);
        prop_assert_eq!(f.b2(p(x1, -x2)), flipped);
    }
}
