use dphase::fem::{
    build_mesh, cone_trace_diagnostic, functional_g, gap_level, gap_level_fields, minimize,
    modular_energy, modular_energy_gradient, scaling_probe, separating_functional, BoundaryData,
    EnrichedField, GapMode, MeshSpace, MinimizeOptions,
};
use dphase::orlicz::DoublePhase;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(mesh: &MeshSpace, rng: &mut ChaCha8Rng, enriched: bool, zero_boundary: bool) -> EnrichedField {
    // Smooth part plus small nodal noise keeps gradients moderate on graded meshes.
    let (k1, k2) = (rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0));
    let (c0, c1) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let mut values: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|x| {
            c0 * (k1 * x[0]).sin() * (k2 * x[1]).cos() + c1 * x[0] * x[1] + 0.05 * rng.gen_range(-1.0..1.0)
        })
        .collect();
    if zero_boundary {
        for (v, &b) in values.iter_mut().zip(&mesh.boundary) {
            if b {
                *v = 0.0;
            }
        }
    }
    EnrichedField {
        values,
        s: if enriched { rng.gen_range(-1.0..1.0) } else { 0.0 },
    }
}

fn combine(a: &EnrichedField, wa: f64, b: &EnrichedField, wb: f64) -> EnrichedField {
    EnrichedField {
        values: a.values.iter().zip(&b.values).map(|(x, y)| wa * x + wb * y).collect(),
        s: wa * a.s + wb * b.s,
    }
}

#[test]
fn mesh_invariants_across_resolutions() {
    for n in [8, 16, 32, 64] {
        for g in [1.0, 2.0, 3.0] {
            let m = build_mesh(n, g).unwrap();
            assert_eq!(m.elements.len(), 8 * n * n);
            assert!((m.total_area() - 4.0).abs() < 1e-10);
            assert_eq!(m.vertices[m.origin], [0.0, 0.0]);
            assert!(m.quad_w.iter().all(|&w| w > 0.0));
            for e in &m.elements {
                let c = e.v.map(|k| m.vertices[k as usize]);
                let centroid = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
                // Vertices may sit on a diagonal, never strictly inside the other phase.
                for x in c {
                    let inside_vertical = x[0].abs() < x[1].abs();
                    let inside_horizontal = x[0].abs() > x[1].abs();
                    if e.a == 1.0 {
                        assert!(!inside_horizontal, "{centroid:?}");
                    } else {
                        assert!(!inside_vertical, "{centroid:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn enrichment_energy_is_mesh_stable() {
    let dp = DoublePhase::log_pair(2.0, 2.0).unwrap();
    let energy = |n| {
        let m = build_mesh(n, 2.0).unwrap();
        modular_energy(&m, &dp, &EnrichedField::enrichment(&m)).unwrap()
    };
    let (e32, e64) = (energy(32), energy(64));
    assert!(((e64 - e32) / e64).abs() < 0.02, "{e32} vs {e64}");
}

#[test]
fn objectives_are_convex_along_segments() {
    let mesh = build_mesh(16, 2.0).unwrap();
    let dp = DoublePhase::log_pair(2.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for k in 0..20 {
        let enriched = k % 2 == 1;
        let u = random_field(&mesh, &mut rng, enriched, false);
        let v = random_field(&mesh, &mut rng, enriched, false);
        let mid = combine(&u, 0.5, &v, 0.5);
        for obj in [modular_energy, functional_g] {
            let (fu, fv, fm) = (
                obj(&mesh, &dp, &u).unwrap(),
                obj(&mesh, &dp, &v).unwrap(),
                obj(&mesh, &dp, &mid).unwrap(),
            );
            assert!(fm <= 0.5 * (fu + fv) + 1e-10, "segment {k}: {fm} > avg of {fu}, {fv}");
        }
    }
}

fn gradient_check(dp: &DoublePhase, seed: u64) {
    let mesh = build_mesh(16, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..10 {
        let u = random_field(&mesh, &mut rng, true, false);
        let dir = random_field(&mesh, &mut rng, true, false);
        let (gu, gs) = modular_energy_gradient(&mesh, dp, &u).unwrap();
        let analytic: f64 = gu.iter().zip(&dir.values).map(|(a, b)| a * b).sum::<f64>() + gs * dir.s;
        let scale = u.values.iter().fold(u.s.abs(), |m, x| m.max(x.abs()));
        let h = 1e-6 * scale;
        let plus = modular_energy(&mesh, dp, &combine(&u, 1.0, &dir, h)).unwrap();
        let minus = modular_energy(&mesh, dp, &combine(&u, 1.0, &dir, -h)).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        let rel = (analytic - fd).abs() / analytic.abs().max(1e-12);
        assert!(rel < 1e-5, "field {k}: analytic {analytic}, fd {fd}, rel {rel}");
    }
}

#[test]
fn gradient_matches_finite_differences_222() {
    gradient_check(&DoublePhase::log_pair(2.0, 2.0).unwrap(), 1);
}

#[test]
fn gradient_matches_finite_differences_2_half_3() {
    gradient_check(&DoublePhase::log_pair(0.5, 3.0).unwrap(), 2);
}

#[test]
fn separating_functional_vanishes_on_conforming_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [16, 32, 64] {
        let mesh = build_mesh(n, 2.0).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let u = random_field(&mesh, &mut rng, false, true);
            worst = worst.max(separating_functional(&mesh, &u).unwrap().abs());
        }
        // Exact edge integrals cancel between neighbours; only rounding is left.
        assert!(worst < 1e-12, "n = {n}: {worst}");
    }
}

#[test]
fn separating_functional_is_linear() {
    let mesh = build_mesh(16, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let u = random_field(&mesh, &mut rng, true, false);
        let v = random_field(&mesh, &mut rng, true, false);
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let lhs = separating_functional(&mesh, &combine(&u, a, &v, b)).unwrap();
        let rhs = a * separating_functional(&mesh, &u).unwrap() + b * separating_functional(&mesh, &v).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }
}

#[test]
fn small_multiples_of_enrichment_lower_g_at_unit_rate() {
    let mesh = build_mesh(64, 2.0).unwrap();
    let dp = DoublePhase::log_pair(2.0, 2.0).unwrap();
    let ts = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
    let tab = scaling_probe(&ts, &dp, &mesh).unwrap();
    let rates: Vec<f64> = tab.iter().map(|&(t, g)| g / t).collect();
    for w in rates.windows(2) {
        assert!(w[1] <= w[0], "{rates:?}");
    }
    let last = *rates.last().unwrap();
    assert!((last - mesh.enrichment_flux).abs() < 1e-4);
    assert!((last + 1.0).abs() < 0.02, "{rates:?}");
}

#[test]
fn enrichment_traces_differ_by_one() {
    let mesh = build_mesh(32, 2.0).unwrap();
    let e = EnrichedField::enrichment(&mesh);
    let trace = cone_trace_diagnostic(&e, &mesh, &[0.01, 0.05, 0.2]).unwrap();
    for row in &trace.rows {
        assert_eq!(row.upper, 0.5);
        assert_eq!(row.lower, -0.5);
    }
}

#[test]
fn minimizer_traces_at_the_saddle() {
    let mesh = build_mesh(32, 2.0).unwrap();
    let dp = DoublePhase::log_pair(2.0, 2.0).unwrap();
    let radii = [0.001, 0.002, 0.005, 0.01, 0.02];

    // A conforming field is continuous at the saddle: the two cone means
    // close up on the nodal value as r shrinks.
    let (_, dir) = gap_level_fields(&mesh, &dp, GapMode::Dirichlet { amplitude: 1.0 }).unwrap();
    let conf = cone_trace_diagnostic(&dir.conforming, &mesh, &radii).unwrap();
    let gaps: Vec<f64> = conf.rows.iter().map(|r| r.upper - r.lower).collect();
    for w in gaps.windows(2) {
        assert!(w[0] < w[1], "{gaps:?}");
    }
    assert!(gaps[0] < 0.03);
    assert!(conf.fit_upper.unwrap() < 0.0);

    // The enriched 𝒢-minimizer keeps a jump that tends to s_opt.
    let (level, fields) = gap_level_fields(&mesh, &dp, GapMode::G).unwrap();
    let enr = cone_trace_diagnostic(&fields.enriched, &mesh, &radii).unwrap();
    let jumps: Vec<f64> = enr.rows.iter().map(|r| r.upper - r.lower).collect();
    for w in jumps.windows(2) {
        assert!(w[0] > w[1], "{jumps:?}");
    }
    assert!(jumps[0] <= level.s_opt && jumps[0] > 0.8 * level.s_opt, "{jumps:?} vs {}", level.s_opt);
}

#[test]
fn enriched_minimum_never_exceeds_conforming() {
    let mesh = build_mesh(16, 2.0).unwrap();
    for (a, b, mode) in [
        (2.0, 2.0, GapMode::G),
        (2.0, 0.5, GapMode::Dirichlet { amplitude: 1.0 }),
        (0.5, 0.5, GapMode::Dirichlet { amplitude: 0.5 }),
        (3.0, 1.25, GapMode::G),
    ] {
        let dp = DoublePhase::log_pair(a, b).unwrap();
        let level = gap_level(&mesh, &dp, mode).unwrap();
        assert!(level.e1 <= level.e2, "({a}, {b}): {} > {}", level.e1, level.e2);
    }
}

#[test]
fn minimization_is_deterministic() {
    let mesh = build_mesh(16, 2.0).unwrap();
    let dp = DoublePhase::log_pair(2.0, 0.5).unwrap();
    let opts = MinimizeOptions {
        enriched: true,
        linear_term: false,
        boundary: BoundaryData::Saddle { amplitude: 1.0 },
        ..Default::default()
    };
    let a = minimize(&mesh, &dp, opts).unwrap();
    let b = minimize(&mesh, &dp, opts).unwrap();
    assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    assert_eq!(a.field, b.field);
    assert_eq!(a.iterations, b.iterations);
}
