//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails or overruns its time budget.

use std::f64::consts::{E, PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use gaussflow::flow::{grim_reaper_flow, run_and_verify, FlowConfig};
use gaussflow::gaussian::{cone_density, entropy, mcd, mdr, phi_area, DensityReport, OptimizerConfig, Witness};
use gaussflow::slicing::{simplex_slopes, verify_gauss_slicing};
use gaussflow::sweep::{root_count_integral, verify_main_calculation, MainCalculationConfig};
use gaussflow::zoo::{bowl_cap, convex_bound, grim_reaper, verify_entropy_bound, EntropyBoundConfig};
use gaussflow::{shapes, QuadConfig, SimplicialManifold};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn segment(a: [f64; 2], b: [f64; 2]) -> SimplicialManifold {
    SimplicialManifold::polyline(&[a.to_vec(), b.to_vec()], false).unwrap()
}

fn kernel_oracles() -> Outcome {
    let q = QuadConfig::with_tol(1e-10);
    let line = phi_area(&segment([-30.0, 0.0], [30.0, 0.0]), &q).unwrap().value;
    check((line - 1.0).abs() < 1e-4, || format!("line {line}"))?;
    let circle = phi_area(&shapes::circle(2f64.sqrt(), 256).unwrap(), &q).unwrap().value;
    let expect = (TAU / E).sqrt();
    check((circle - expect).abs() < 1e-3, || format!("circle {circle} vs {expect}"))?;
    Ok(format!("line {line:.6}, circle {circle:.6}"))
}

fn entropy_optimizer() -> Outcome {
    let cfg = OptimizerConfig::default();
    let c = entropy(&shapes::circle(1.0, 256).unwrap(), &cfg).unwrap();
    check((c.value - 1.5203).abs() < 1e-2, || format!("circle {}", c.value))?;
    let Witness::Window(w) = &c.witness else {
        return Err(format!("circle witness {:?}", c.witness));
    };
    let off = w.center.iter().map(|x| x * x).sum::<f64>().sqrt();
    check(off < 1e-2 && (w.scale_time / 0.5 - 1.0).abs() < 0.05, || format!("circle witness {w:?}"))?;
    let s = entropy(&segment([-1.0, 0.0], [1.0, 0.0]), &cfg).unwrap();
    check((s.value - 1.0).abs() < 1e-2 && s.boundary_supremum_flag, || format!("segment {s:?}"))?;
    let p = entropy(&shapes::two_points(2.0, 1).unwrap(), &cfg).unwrap();
    check((p.value - 2.0).abs() < 1e-2 && p.boundary_supremum_flag, || format!("two points {p:?}"))?;
    Ok(format!(
        "circle {:.4} at t0 {:.4}, segment {:.4}, two points {:.4}",
        c.value, w.scale_time, s.value, p.value
    ))
}

fn mdr_oracle() -> Outcome {
    let r = mdr(&shapes::circle(1.0, 256).unwrap(), &OptimizerConfig::default()).unwrap();
    // 2 ω_2 / ω_1, the convex-region limit for curves
    let bound = convex_bound(2, 1) - 1.0;
    check((r.value - PI).abs() < 1e-2 && r.value <= bound + 1e-2, || format!("mdr {}", r.value))?;
    Ok(format!("mdr {:.5}, convex limit {bound:.5}", r.value))
}

/// Polylines and off-center circles in the plane, point pairs on the line.
fn random_sigma(rng: &mut ChaCha8Rng, kind: usize) -> SimplicialManifold {
    match kind % 3 {
        0 => {
            let k = rng.gen_range(2..8);
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| {
                    let (r, t) = (rng.gen_range(0.5..2.0), rng.gen_range(0.0..TAU));
                    vec![r * t.cos(), r * t.sin()]
                })
                .collect();
            SimplicialManifold::polyline(&pts, false).unwrap()
        }
        1 => {
            let c: [f64; 2] = [rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)];
            shapes::circle(rng.gen_range(1.0..2.0), 64).unwrap().transform(&[-c[0], -c[1]], 1.0).unwrap()
        }
        _ => {
            let p = [rng.gen_range(0.2..2.0), rng.gen_range(-2.0..2.0)];
            SimplicialManifold::point_set(1, p.to_vec(), None).unwrap()
        }
    }
}

fn cone_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let q = QuadConfig::with_tol(1e-7);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let sigma = random_sigma(&mut rng, i);
        let theta = cone_density(&sigma, &vec![0.0; sigma.ambient_dim()], &q).unwrap().value;
        let area = phi_area(&sigma.cone_over(10.0, 16).unwrap(), &q).unwrap().value;
        worst = worst.max((theta - area).abs());
        check((theta - area).abs() < 1e-2, || format!("case {i}: {theta} vs {area}"))?;
    }
    Ok(format!("worst difference {worst:.2e}"))
}

fn root_integrals() -> Outcome {
    let neg = root_count_integral(-1.0, 1.0).unwrap();
    check((neg.closed_form - 1.0).abs() < 1e-6 && (neg.quadrature - 1.0).abs() < 1e-6, || format!("{neg:?}"))?;
    let pos = root_count_integral(1.0, 1.0).unwrap();
    let erfc1 = 0.157_299_207_050_285_13;
    check((pos.closed_form - erfc1).abs() < 1e-6 && (pos.quadrature - erfc1).abs() < 1e-6, || format!("{pos:?}"))?;
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for i in 0..30 {
        for j in 0..30 {
            // neither coordinate hits zero on this grid
            let a = -2.9 + 0.2 * i as f64;
            let v = -2.9 + 0.2 * j as f64;
            let r = root_count_integral(a, v).unwrap();
            worst = worst.max((r.closed_form - r.quadrature).abs());
            largest = largest.max(r.closed_form).max(r.quadrature);
        }
    }
    check(worst < 1e-6, || format!("grid disagreement {worst}"))?;
    check(largest <= 1.0 + 1e-9, || format!("value {largest} above 1"))?;
    Ok(format!("erfc(1) {:.6}, grid disagreement {worst:.1e}, max {largest:.12}", pos.quadrature))
}

/// A sphere or torus with a radial bump, a tilt and a vertical lift.
fn random_surface(rng: &mut ChaCha8Rng) -> SimplicialManifold {
    let base = if rng.gen_bool(0.5) {
        shapes::sphere(1.0, 6).unwrap()
    } else {
        shapes::torus(1.5, 0.5, 24, 12).unwrap()
    };
    let (amp, phase) = (rng.gen_range(0.0..0.15), rng.gen_range(0.0..TAU));
    let (tilt, lift): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(-0.5..0.5));
    let (c, s) = (tilt.cos(), tilt.sin());
    let coords: Vec<f64> = base
        .vertices()
        .flat_map(|p| {
            let bump = 1.0 + amp * (3.0 * p[0] + phase).sin() * (2.0 * p[1]).cos();
            let (x, y, z) = (p[0] * bump, p[1] * bump, p[2] * bump + lift);
            [x, c * y - s * z, s * y + c * z]
        })
        .collect();
    let tris: Vec<usize> = base.simplices().flatten().copied().collect();
    SimplicialManifold::new(3, 2, coords, tris, None).unwrap()
}

fn gaussian_slicing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let q = QuadConfig::with_tol(1e-6);
    let mut min_margin = f64::INFINITY;
    let mut slope_defect: f64 = 0.0;
    for i in 0..50 {
        let m = random_surface(&mut rng);
        let r = verify_gauss_slicing(&m, &q).unwrap();
        min_margin = min_margin.min(r.margin);
        check(r.lhs <= r.rhs + 1e-3, || format!("mesh {i}: {} > {}", r.lhs, r.rhs))?;
        for sl in simplex_slopes(&m).unwrap() {
            let (j, g) = (sl.jacobian, sl.height_gradient);
            slope_defect = slope_defect.max(1.0 - (j + g)).max((j * j + g * g - 1.0).abs());
        }
    }
    check(slope_defect < 1e-12, || format!("slope defect {slope_defect}"))?;
    Ok(format!("min margin {min_margin:.3e}, slope defect {slope_defect:.1e}"))
}

fn main_calculation() -> Outcome {
    let cfg = MainCalculationConfig::default();
    let sigmas = [
        ("two points", shapes::two_points(2.0, 1).unwrap()),
        ("circle", shapes::circle(1.0, 256).unwrap()),
        ("square", shapes::square(1.0, 16).unwrap()),
    ];
    let mut worst_gap: f64 = 0.0;
    let mut worst_margin = f64::INFINITY;
    for (name, sigma) in &sigmas {
        for a in [-1.0, 0.5, 1.0] {
            for v in [0.5, 1.0, 2.0] {
                let r = verify_main_calculation(sigma, a, v, &cfg).unwrap();
                worst_gap = worst_gap.max(r.projection_gap);
                worst_margin = [r.margin_cone, r.margin_mcd, r.margin_tight, r.margin_slicing, r.margin_slice_bound]
                    .into_iter()
                    .fold(worst_margin, f64::min);
                check(r.margin_mcd >= -1e-2, || format!("{name} a={a} v={v}: {} > {}", r.phi_s.value, r.bound_mcd))?;
                check(r.holds(), || format!("{name} a={a} v={v}: chain broken {r:?}"))?;
            }
        }
    }
    Ok(format!("27 cases, worst margin {worst_margin:.3e}, worst projection gap {worst_gap:.2e}"))
}

fn headline_bounds() -> Outcome {
    let exact = convex_bound(2, 1);
    check(exact == 1.0 + PI, || format!("convex bound {exact}"))?;
    let g = verify_entropy_bound(&grim_reaper(1.0, 2.0, 1024).unwrap(), &EntropyBoundConfig::default()).unwrap();
    check(g.holds() && g.entropy_m <= 3.0 + 1e-2, || format!("grim reaper {g:?}"))?;
    check(g.convex_bound == Some(3.0), || format!("grim reaper convex bound {:?}", g.convex_bound))?;
    let cfg = EntropyBoundConfig {
        optimizer: OptimizerConfig { max_center_starts: 24, ..Default::default() },
        ..Default::default()
    };
    let b = verify_entropy_bound(&bowl_cap(2, 1.0, 3.0, 64).unwrap(), &cfg).unwrap();
    let target = (TAU / E).sqrt() + 1.0;
    check(b.holds() && b.entropy_m <= target + 1e-2, || format!("bowl cap {b:?}"))?;
    check(b.convex_bound == Some(exact), || format!("bowl cap convex bound {:?}", b.convex_bound))?;
    Ok(format!(
        "grim reaper {:.4} <= {:.4}, bowl cap {:.4} <= {:.4}, convex {exact}",
        g.entropy_m, g.bound, b.entropy_m, b.bound
    ))
}

fn monotonicity() -> Outcome {
    let run = |h: f64, dt: f64| {
        let (c, m) = grim_reaper_flow(1.0, 2.0, 512, -2.0).unwrap();
        run_and_verify(&FlowConfig::new(c, m, -2.0, -0.5, dt, h)).unwrap()
    };
    let coarse = run(1e-2, 2e-5);
    check(coarse.holds(), || format!("margin {} below -{}", coarse.min_pair_margin, coarse.tol_model))?;
    check(coarse.rows.iter().all(|r| r.margin >= -coarse.tol_model), || "row margin below tolerance".into())?;
    let fine = run(5e-3, 1e-5);
    let (nc, nf) = (coarse.min_pair_margin.min(0.0), fine.min_pair_margin.min(0.0));
    check(nf.abs() <= 0.5 * nc.abs() + 1e-12, || format!("negative margin {nc} -> {nf}"))?;
    Ok(format!(
        "min margin {:.3e} (tol {:.2e}), refined {:.3e}",
        coarse.min_pair_margin, coarse.tol_model, fine.min_pair_margin
    ))
}

fn combined(a: &DensityReport, b: &DensityReport, cfg: &OptimizerConfig) -> f64 {
    2.0 * (a.quad_error + b.quad_error + cfg.step_tol) + 1e-6
}

fn invariance() -> Outcome {
    let cfg = OptimizerConfig { max_center_starts: 24, ..Default::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let objects = [shapes::circle(1.0, 96).unwrap(), shapes::square(2.0, 8).unwrap()];
    let base: Vec<[DensityReport; 3]> = objects
        .iter()
        .map(|m| [entropy(m, &cfg).unwrap(), mcd(m, &cfg).unwrap(), mdr(m, &cfg).unwrap()])
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let k = i % objects.len();
        let shift = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let lam = 2f64.powf(rng.gen_range(-2.0..2.0));
        let t = objects[k].transform(&shift, lam).unwrap();
        let moved = [entropy(&t, &cfg).unwrap(), mcd(&t, &cfg).unwrap(), mdr(&t, &cfg).unwrap()];
        for (a, b) in base[k].iter().zip(&moved) {
            worst = worst.max((a.value - b.value).abs());
            check((a.value - b.value).abs() <= combined(a, b, &cfg), || {
                format!("transform {i}: {} vs {}", a.value, b.value)
            })?;
        }
    }

    let q = &cfg;
    let test_objects = [
        ("circle", shapes::circle(1.0, 256).unwrap()),
        ("segment", segment([-1.0, 0.0], [1.0, 0.0])),
        ("two points", shapes::two_points(2.0, 1).unwrap()),
        ("square", shapes::square(1.0, 16).unwrap()),
        ("sphere", shapes::sphere(1.0, 4).unwrap()),
        ("torus", shapes::torus(1.5, 0.5, 24, 12).unwrap()),
        ("grim reaper", grim_reaper(1.0, 2.0, 1024).unwrap()),
        ("bowl cap", bowl_cap(2, 1.0, 3.0, 32).unwrap()),
    ];
    for (name, m) in &test_objects {
        let (e, r) = (entropy(m, q).unwrap(), mdr(m, q).unwrap());
        check(e.value <= r.value + 1e-3, || format!("{name}: entropy {} > mdr {}", e.value, r.value))?;
    }
    Ok(format!("worst invariance drift {worst:.2e}, entropy <= mdr on {} objects", test_objects.len()))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("kernel oracles", 1, kernel_oracles),
        ("entropy optimizer", 90, entropy_optimizer),
        ("maximal density ratio", 60, mdr_oracle),
        ("cone identity", 60, cone_identity),
        ("root count integrals", 60, root_integrals),
        ("gaussian slicing", 300, gaussian_slicing),
        ("main calculation", 600, main_calculation),
        ("headline bounds", 600, headline_bounds),
        ("monotonicity", 300, monotonicity),
        ("invariance", 600, invariance),
    ];
    let mut failed = 0;
    for (i, (name, budget, f)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > Duration::from_secs(budget) => {
                Err(format!("{detail}; over the {budget} s budget"))
            }
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{:2}] {name}: {detail} ({:.1} s)", i + 1, elapsed.as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
