//! Gaussian functionals: invariance, mutual bounds and cross-checks.

use gaussflow::gaussian::{
    ball_density_ratio, cone_density, entropy, f_functional, mcd, mdr, phi_area, GaussianWindow, OptimizerConfig,
};
use gaussflow::{shapes, QuadConfig, SimplicialManifold};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fast() -> OptimizerConfig {
    OptimizerConfig { max_center_starts: 24, ..Default::default() }
}

fn combined(a: &gaussflow::gaussian::DensityReport, b: &gaussflow::gaussian::DensityReport, cfg: &OptimizerConfig) -> f64 {
    2.0 * (a.quad_error + b.quad_error + cfg.step_tol) + 1e-6
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn functionals_are_invariant_under_similarities(sx in -3.0..3.0f64, sy in -3.0..3.0f64, lam in 0.25..4.0f64) {
        let cfg = fast();
        let m = shapes::circle(1.0, 96).unwrap();
        let t = m.transform(&[sx, sy], lam).unwrap();
        for f in [entropy, mcd, mdr] {
            let (a, b) = (f(&m, &cfg).unwrap(), f(&t, &cfg).unwrap());
            prop_assert!((a.value - b.value).abs() <= combined(&a, &b, &cfg), "{} {}", a.value, b.value);
        }
    }

    #[test]
    fn convex_curves_have_mdr_at_most_pi(ax in 0.3..3.0f64, by in 0.3..3.0f64, k in 3usize..40) {
        let pts: Vec<[f64; 2]> = (0..k)
            .map(|i| {
                let t = std::f64::consts::TAU * (i as f64 + 0.3 * ((i * 7 % 5) as f64) / 5.0) / k as f64;
                [ax * t.cos(), by * t.sin()]
            })
            .collect();
        let poly = shapes::polygon(&pts).unwrap();
        let r = mdr(&poly, &fast()).unwrap();
        prop_assert!(r.value <= std::f64::consts::PI + 1e-2, "{}", r.value);
        let e = entropy(&poly, &fast()).unwrap();
        prop_assert!(e.value <= r.value + 1e-3);
    }
}

#[test]
fn entropy_is_below_mdr_on_test_objects() {
    let cfg = fast();
    let objects = [
        shapes::circle(1.0, 128).unwrap(),
        shapes::square(2.0, 8).unwrap(),
        shapes::two_points(2.0, 1).unwrap(),
        SimplicialManifold::polyline(&[vec![-1.0, 0.0], vec![1.0, 0.0]], false).unwrap(),
        shapes::sphere(1.0, 4).unwrap(),
    ];
    for m in &objects {
        let (e, r) = (entropy(m, &cfg).unwrap(), mdr(m, &cfg).unwrap());
        assert!(e.value <= r.value + 1e-3, "{} > {}", e.value, r.value);
    }
}

#[test]
fn standard_window_is_phi_area() {
    let q = QuadConfig::with_tol(1e-12);
    for m in [shapes::circle(1.3, 64).unwrap(), shapes::torus(1.0, 0.4, 16, 8).unwrap()] {
        let w = GaussianWindow::standard(m.ambient_dim());
        let (a, b) = (f_functional(&m, &w, &q).unwrap(), phi_area(&m, &q).unwrap());
        assert!((a.value / b.value - 1.0).abs() < 1e-8);
    }
}

#[test]
fn small_balls_see_the_local_multiplicity() {
    let tri = SimplicialManifold::new(3, 2, vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.2, 0.0, 1.0, 0.4], vec![0, 1, 2], Some(vec![2.0]))
        .unwrap()
        .refine(0.1)
        .unwrap();
    let edge = (0..tri.num_simplices()).map(|s| tri.longest_edge(s)).fold(f64::INFINITY, f64::min);
    for s in [0, tri.num_simplices() / 2] {
        let c = tri.barycenter(s);
        let ratio = ball_density_ratio(&tri, &c, 1e-2 * edge).unwrap();
        assert!((ratio / 2.0 - 1.0).abs() < 0.05, "{ratio}");
    }
}

/// Random Σ for the cone identity: polylines and circles off the origin in
/// the plane, point pairs on the line.
fn random_sigma(rng: &mut ChaCha8Rng, kind: usize) -> SimplicialManifold {
    match kind % 3 {
        0 => {
            let k = rng.gen_range(2..8);
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let (r, t) = (rng.gen_range(0.5..2.0), rng.gen_range(0.0..std::f64::consts::TAU));
                    vec![r * f64::cos(t), r * f64::sin(t)]
                })
                .collect();
            SimplicialManifold::polyline(&pts, false).unwrap()
        }
        1 => {
            let c = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            shapes::circle(rng.gen_range(1.0..2.0), 64).unwrap().transform(&[-c[0], -c[1]], 1.0).unwrap()
        }
        _ => {
            let p = [rng.gen_range(0.2..2.0), rng.gen_range(-2.0..2.0)];
            SimplicialManifold::point_set(1, p.to_vec(), None).unwrap()
        }
    }
}

#[test]
fn cone_density_is_the_gaussian_area_of_the_cone() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let q = QuadConfig::with_tol(1e-7);
    for i in 0..10 {
        let sigma = random_sigma(&mut rng, i);
        let theta = cone_density(&sigma, &vec![0.0; sigma.ambient_dim()], &q).unwrap();
        let cone = sigma.cone_over(10.0, 16).unwrap();
        let area = phi_area(&cone, &q).unwrap();
        assert!((theta.value - area.value).abs() < 1e-2, "case {i}: {} vs {}", theta.value, area.value);
    }
}
