//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::time::Instant;

use finsler_core::distortion::{distortion_ratios, radial_bounds, verify_distortion_radial, verify_distortion_sampled, ConvexMapping};
use finsler_core::geometry::{derivative_crosscheck, einstein_check, kahler_berwald_check, levi_matrix};
use finsler_core::maps::{max_row_sum, row_sum_admissible, sample_map};
use finsler_core::rng::{sample_polydisc_point, sample_tangent_vector};
use finsler_core::schwarz::{check_equality_axis, norm_schwarz_ratio, sharp_constant, verify_norm_schwarz, SchwarzCampaign};
use finsler_core::{
    eval_f2, indicatrix_boundary, sample_automorphism, Complex, HolomorphicMap, MapFamily, MetricParams, PolydiscPoint,
    Tolerance, TrialRng,
};
use nalgebra::DMatrix;
use rand::Rng;

const T_GRID: [f64; 4] = [0.0, 0.5, 1.0, 3.0];
const K_GRID: [u32; 3] = [2, 3, 5];
const DIMS: [usize; 4] = [1, 2, 3, 5];
const CAP: f64 = 0.95;

fn params(t: f64, k: u32) -> MetricParams {
    MetricParams::new(t, k).unwrap()
}

fn param_grid() -> Vec<MetricParams> {
    T_GRID.iter().flat_map(|&t| K_GRID.iter().map(move |&k| params(t, k))).collect()
}

/// Hand-written constant `(n + t n^{1/k}) / (1 + t)`.
fn constant_oracle(n: usize, t: f64, k: u32) -> f64 {
    let n = n as f64;
    (n + t * n.powf(1.0 / k as f64)) / (1.0 + t)
}

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sharp_constant_exact() -> Outcome {
    let mut worst = 0.0_f64;
    for n in DIMS {
        for t in T_GRID {
            for k in K_GRID {
                let target = params(t, k);
                let mut c = SchwarzCampaign::new(params(1.0, 2), target, 2, n);
                c.trials = 1;
                c.force_witness = true;
                let report = c.run(&TrialRng::new(1)).map_err(|e| e.to_string())?;
                let oracle = constant_oracle(n, t, k);
                worst = worst.max((report.max_ratio - oracle).abs());
                worst = worst.max((sharp_constant(n, &target) - oracle).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("48 cells, max |ratio - C| = {worst:.2e}"))
}

fn schwarz_never_violated() -> Outcome {
    let sources = param_grid();
    let mut worst = f64::NEG_INFINITY;
    let mut cells = 0;
    let mut total = 0u64;
    for m in DIMS {
        for n in DIMS {
            for tt in T_GRID {
                for kk in K_GRID {
                    let mut c = SchwarzCampaign::new(sources[0], params(tt, kk), m, n);
                    c.source = sources.clone();
                    c.families = vec![MapFamily::Linear, MapFamily::CoordMoebius, MapFamily::Extremal];
                    c.trials = 100_000;
                    c.force_witness = true;
                    let seed = (cells as u64) << 20;
                    let r = c.run(&TrialRng::new(seed)).map_err(|e| e.to_string())?;
                    if r.violated {
                        return Err(format!("cell m={m} n={n} tt={tt} kk={kk}: ratio {} > C {}", r.max_ratio, r.sharp_constant));
                    }
                    worst = worst.max(r.max_ratio / r.sharp_constant);
                    cells += 1;
                    total += r.trials;
                }
            }
        }
    }
    check(worst <= 1.0 + 1e-9, format!("{cells} cells, {total} trials, max ratio/C = {worst:.15}"))
}

fn invariance() -> Outcome {
    let grid = param_grid();
    let rng = TrialRng::new(3);
    let mut worst = 0.0_f64;
    for i in 0..10_000u64 {
        let mut r = rng.stream(i);
        let m = r.random_range(1..=5);
        let p = grid[r.random_range(0..grid.len())];
        let g = sample_automorphism(&mut r, m, CAP).map_err(|e| e.to_string())?;
        let z = sample_polydisc_point(&mut r, m, CAP).map_err(|e| e.to_string())?;
        let v = sample_tangent_vector(&mut r, m);
        let (gz, gv) = match (g.apply(&z), g.differential(&z, &v)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => continue,
        };
        let before = eval_f2(&p, &z, &v).unwrap().f2;
        let after = eval_f2(&p, &gz, &gv).unwrap().f2;
        worst = worst.max((after - before).abs() / before);
    }
    check(worst <= 1e-9, format!("10000 samples, max relative deviation = {worst:.2e}"))
}

/// Points of the torus `|z^i| = 1` on a `per_axis^m` grid; by the maximum
/// principle the sup of `|Σ a_il z^i|` over the closed polydisc is attained there.
fn torus_grid(m: usize, per_axis: usize) -> Vec<Vec<Complex>> {
    let mut out = vec![vec![]];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..per_axis).map(move |j| {
                    let mut q = p.clone();
                    q.push(Complex::from_polar(1.0, std::f64::consts::TAU * j as f64 / per_axis as f64));
                    q
                })
            })
            .collect();
    }
    out
}

fn admissibility_oracle() -> Outcome {
    let rng = TrialRng::new(4);
    let (mut admissible, mut inadmissible) = (0, 0);
    for i in 0..1000u64 {
        let mut r = rng.stream(i);
        let (m, n) = (r.random_range(1..=3), r.random_range(1..=3));
        let a = DMatrix::from_fn(m, n, |_, _| {
            Complex::from_polar(r.random_range(0.0..0.8), r.random_range(0.0..std::f64::consts::TAU))
        });
        let per_axis = [10_000, 100, 22][m - 1];
        let a_ref = &a;
        let grid_sup = torus_grid(m, per_axis)
            .iter()
            .flat_map(|z| (0..n).map(move |l| (0..m).map(|i| a_ref[(i, l)] * z[i]).sum::<Complex>().norm()))
            .fold(0.0, f64::max);
        if row_sum_admissible(&a) {
            admissible += 1;
            if grid_sup > 1.0 + 1e-6 {
                return Err(format!("matrix {i} declared admissible but grid sup = {grid_sup}"));
            }
        } else {
            inadmissible += 1;
            let (l, _) = max_row_sum(&a);
            // Witness z^i = conj(a_il)/|a_il| aligns every term of row l.
            let witness: Complex = (0..m)
                .map(|i| {
                    let c = a[(i, l)];
                    if c.norm() == 0.0 { Complex::new(0.0, 0.0) } else { c * (c.conj() / c.norm()) }
                })
                .sum();
            if witness.norm() <= 1.0 {
                return Err(format!("matrix {i} declared inadmissible but witness value = {}", witness.norm()));
            }
        }
    }
    check(
        admissible > 0 && inadmissible > 0,
        format!("1000 matrices ({admissible} admissible, {inadmissible} inadmissible), all agree"),
    )
}

fn distortion_equalities() -> Outcome {
    let mut worst_eq = 0.0_f64;
    let probe = TrialRng::new(5);
    for p in param_grid() {
        for m in [1, 2, 3] {
            let f = ConvexMapping::extremal(&vec![0.0; m]).unwrap();
            for b in [0.1, 0.5, 0.9] {
                for j in 0..4u64 {
                    let v = sample_tangent_vector(&mut probe.stream(j), m);
                    let up = PolydiscPoint::new(vec![Complex::new(b, 0.0); m]).unwrap();
                    worst_eq = worst_eq.max((distortion_ratios(&p, &f, &up, &v).unwrap().upper - 1.0).abs());
                    let low = PolydiscPoint::new(vec![Complex::new(-b, 0.0); m]).unwrap();
                    worst_eq = worst_eq.max((distortion_ratios(&p, &f, &low, &v).unwrap().lower - 1.0).abs());
                }
                let thetas: Vec<f64> = (0..m).map(|l| 0.4 + 1.3 * l as f64).collect();
                let g = ConvexMapping::extremal(&thetas).unwrap();
                let rb = radial_bounds(&p, &g, &g.upper_witness(b).unwrap()).unwrap();
                worst_eq = worst_eq.max((rb.image_value / rb.image_upper - 1.0).abs());
            }
        }
    }
    if worst_eq > 1e-10 {
        return Err(format!("equality deviation {worst_eq:.2e}"));
    }
    let tol = Tolerance::default();
    let mut worst = f64::NEG_INFINITY;
    let mut cells = 0u64;
    for p in param_grid() {
        for m in [1, 2, 3] {
            let rng = TrialRng::new(500 + cells);
            let d = verify_distortion_sampled(&p, m, 10_000, &rng, CAP, &tol).map_err(|e| e.to_string())?;
            let f = ConvexMapping::extremal(&vec![0.0; m]).unwrap();
            let r = verify_distortion_radial(&p, &f, 10_000, &rng.child(1), CAP, &tol).map_err(|e| e.to_string())?;
            if d.violated || r.violated {
                return Err(format!("violation in cell t={} k={} m={m}", p.t(), p.k()));
            }
            worst = worst.max(d.max_ratio).max(r.max_ratio);
            cells += 1;
        }
    }
    check(
        worst <= 1.0 + 1e-9,
        format!("equalities within {worst_eq:.2e}; {cells} cells x 2 x 10000 random trials, max bound ratio = {worst:.12}"),
    )
}

fn einstein_factor() -> Outcome {
    let tol = Tolerance { rel_eq: 1e-8, ..Tolerance::default() };
    let mut worst = 0.0_f64;
    let mut cell = 0;
    for p in param_grid() {
        for m in [1, 2, 3] {
            let r = einstein_check(&p, m, 1000, &TrialRng::new(600 + cell), CAP, &tol).map_err(|e| e.to_string())?;
            cell += 1;
            let Some(phi) = r.einstein_factor else {
                return Err(format!("no common factor at t={} k={} m={m}: deviation {}", p.t(), p.k(), r.max_relative_deviation));
            };
            let dev = ((phi - Complex::new(-2.0, 0.0)).norm() / 2.0).max(r.max_relative_deviation);
            worst = worst.max(dev);
        }
    }
    check(worst <= 1e-8, format!("{cell} cells x 1000 points, max |K + 2I| / 2 = {worst:.2e}"))
}

fn kahler_berwald() -> Outcome {
    let (mut k_worst, mut b_worst) = (0.0_f64, 0.0_f64);
    let mut cell = 0;
    for p in param_grid() {
        for m in [1, 2, 3, 5] {
            let r = kahler_berwald_check(&p, m, 100, 20, &TrialRng::new(700 + cell), CAP).map_err(|e| e.to_string())?;
            cell += 1;
            k_worst = k_worst.max(r.max_kahler_residual);
            b_worst = b_worst.max(r.max_berwald_v_residual);
        }
    }
    check(
        k_worst < 1e-8 && b_worst < 1e-8,
        format!("{cell} cells x 100 z x 20 v, kahler {k_worst:.2e}, berwald {b_worst:.2e}"),
    )
}

fn convexity() -> Outcome {
    let tol = Tolerance::default();
    let (mut min_levi, mut min_hess, mut worst_fd) = (f64::INFINITY, f64::INFINITY, 0.0_f64);
    let mut cell = 0;
    for p in param_grid() {
        let rng = TrialRng::new(800 + cell);
        cell += 1;
        for i in 0..1000u64 {
            let mut r = rng.stream(i);
            let m = 1 + (i % 3) as usize;
            let z = sample_polydisc_point(&mut r, m, CAP).unwrap();
            let v = sample_tangent_vector(&mut r, m);
            let l = levi_matrix(&p, &z, &v).map_err(|e| e.to_string())?;
            let d = derivative_crosscheck(&p, &z, &v).map_err(|e| e.to_string())?;
            min_levi = min_levi.min(l.min_eigenvalue);
            min_hess = min_hess.min(l.hessian_min_eigenvalue);
            worst_fd = worst_fd.max(d.max());
        }
    }
    check(
        min_levi > tol.psd_min_eig && min_hess > tol.psd_min_eig && worst_fd <= tol.fd_rel,
        format!("{cell} cells x 1000 samples, min levi eig {min_levi:.3e}, min hessian eig {min_hess:.3e}, max fd rel {worst_fd:.2e}"),
    )
}

fn indicatrix() -> Outcome {
    let mut worst_inner = f64::INFINITY;
    let mut worst_outer = 0.0_f64;
    let mut sphere_dev = 0.0_f64;
    for p in param_grid() {
        for m in DIMS {
            for pt in indicatrix_boundary(&p, m, 256, &TrialRng::new(9)).map_err(|e| e.to_string())? {
                let x = pt.point();
                worst_inner = worst_inner.min(x.euclidean_norm());
                worst_outer = worst_outer.max(x.sup_norm());
                if p.t() == 0.0 {
                    sphere_dev = sphere_dev.max((x.euclidean_norm() - 1.0).abs());
                }
            }
        }
    }
    check(
        worst_inner >= 1.0 - 1e-10 && worst_outer <= 1.0 + 1e-10 && sphere_dev <= 4.0 * f64::EPSILON,
        format!("min euclidean {worst_inner:.15}, max sup {worst_outer:.15}, t=0 sphere deviation {sphere_dev:.1e}"),
    )
}

fn norm_schwarz() -> Outcome {
    let tol = Tolerance::default();
    let mut trials = 0u64;
    let mut worst = f64::NEG_INFINITY;
    let families = [MapFamily::Linear, MapFamily::Homogeneous, MapFamily::Extremal];
    let rng = TrialRng::new(10);
    for i in 0..100u64 {
        let mut r = rng.stream(i);
        let (m, n) = (DIMS[r.random_range(0..4)], DIMS[r.random_range(0..4)]);
        let ps = param_grid()[r.random_range(0..12)];
        let pt = param_grid()[r.random_range(0..12)];
        let f = sample_map(&mut r, families[(i % 3) as usize], m, n, CAP).unwrap();
        let rep = verify_norm_schwarz(&ps, &pt, &f, 100, &rng.child(i), CAP, &tol).map_err(|e| e.to_string())?;
        if rep.violated {
            return Err(format!("map {i}: ratio {} > C {}", rep.max_ratio, rep.sharp_constant));
        }
        trials += rep.trials;
        worst = worst.max(rep.max_ratio / rep.sharp_constant);
    }
    let mut eq_dev = 0.0_f64;
    for degree in 1..=4u32 {
        for n in DIMS {
            for pt in param_grid() {
                let ps = params(1.0, 3);
                let f = HolomorphicMap::Homogeneous { inner: Box::new(HolomorphicMap::extremal(2, n).unwrap()), degree };
                let eq = check_equality_axis(&ps, &pt, &f, 0, degree, &tol).map_err(|e| e.to_string())?;
                if !eq.restriction_unimodular || !eq.bound_attained {
                    return Err(format!("axis equality not detected for N={degree}, n={n}"));
                }
                for b in [0.1, 0.5, 0.9] {
                    let z = PolydiscPoint::new(vec![Complex::from_polar(b, 0.3), Complex::new(0.0, 0.0)]).unwrap();
                    let ratio = norm_schwarz_ratio(&ps, &pt, &f, &z, degree).unwrap();
                    eq_dev = eq_dev.max((ratio - constant_oracle(n, pt.t(), pt.k())).abs());
                }
            }
        }
    }
    check(
        worst <= 1.0 + 1e-9 && eq_dev <= 1e-10,
        format!("{trials} trials, max ratio/C = {worst:.12}; degree-N witness |ratio - C| = {eq_dev:.2e}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("sharp Schwarz constant at the extremal witness", sharp_constant_exact),
        ("Schwarz inequality over randomized campaigns", schwarz_never_violated),
        ("invariance under polydisc automorphisms", invariance),
        ("linear admissibility vs brute-force sup norm", admissibility_oracle),
        ("distortion equalities and random bound checks", distortion_equalities),
        ("Finsler-Einstein factor -2", einstein_factor),
        ("Kahler-Berwald residuals", kahler_berwald),
        ("strong pseudoconvexity and convexity", convexity),
        ("indicatrix inclusions", indicatrix),
        ("norm-level and homogeneous Schwarz", norm_schwarz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
