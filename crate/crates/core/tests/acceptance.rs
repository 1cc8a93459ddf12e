//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sparse_soc::cones::{normal_contains, sample_critical, stationarity_violation};
use sparse_soc::oracle::synthetic_stationary;
use sparse_soc::pde::{solve_adjoint, solve_linearized, solve_state, Nonlinearity, PdeConfig};
use sparse_soc::report::counterexample::{dyadic_schedule, reproduce_j2_counterexample};
use sparse_soc::report::fdcheck::{
    dir_deriv_check, gradient_check, hessian_check, prox_oracle_gap, random_base, CENTRAL_STEPS, DIR_DERIV_STEPS,
};
use sparse_soc::report::{analyze, Config, Status};
use sparse_soc::second_order::{
    check_recovery_properties, curvature_quotient, lower_taylor_residual_j2, psi_eval, second_subderivative, ExtReal,
};
use sparse_soc::solver::{solve_ocp, ProblemConfig, SolveOptions};
use sparse_soc::sparsity::{j_dir_deriv, SignClassification};
use sparse_soc::{Bounds, ControlSpec, GridFunction, GridSpec, SparsityKind};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rand_fn(spec: GridSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> GridFunction {
    GridFunction::from_cells(spec, |_, _| rng.random_range(lo..hi)).unwrap()
}

fn gaussian(spec: GridSpec, rng: &mut ChaCha8Rng) -> GridFunction {
    GridFunction::from_cells(spec, |_, _| rng.sample(StandardNormal)).unwrap()
}

/// `u_bar` with zero cells, cells on the bounds `[-2, 2]` and the rest of
/// magnitude in `[0.5, 1.5]`; for `j3` some spatial points vanish entirely.
fn structured_base(kind: SparsityKind, spec: GridSpec, rng: &mut ChaCha8Rng) -> GridFunction {
    let dead: Vec<bool> = (0..spec.n_space()).map(|s| kind == SparsityKind::J3 && s % 4 == 1).collect();
    GridFunction::from_cells(spec, |s, _| {
        if dead[s] {
            return 0.0;
        }
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        match rng.random_range(0..20) {
            0..=3 => 0.0,
            4 => -2.0,
            5 => 2.0,
            _ => sign * rng.random_range(0.5..1.5),
        }
    })
    .unwrap()
}

fn bounds2() -> Bounds {
    Bounds::new(-2.0, 2.0).unwrap()
}

fn counterexample() -> Outcome {
    let start = Instant::now();
    let r = reproduce_j2_counterexample(512, &dyadic_schedule(2f64.powi(-10))).unwrap();
    let elapsed = start.elapsed();
    let j2_err = r.rows.iter().map(|row| (row.j2 - row.j2_exact).abs()).fold(0.0, f64::max);
    let pair_err = r.rows.iter().map(|row| (row.pairing - row.pairing_exact).abs()).fold(0.0, f64::max);
    let lim_err = (r.extrapolated_limit - 1.0 / 3.0).abs();
    let pass = r.rows.len() == 9 && j2_err <= 1e-3 && pair_err <= 1e-3 && lim_err <= 1e-3 && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "512x512, t = 2^-2..2^-10: max |j2 - (1-2t/3)^1/2| = {j2_err:.2e}, max |pairing - (1-t/2)| = {pair_err:.2e}, \
             limit {:.6} (|err| {lim_err:.2e}), {elapsed:.2?}",
            r.extrapolated_limit
        ),
    )
}

fn derivative_oracles() -> Outcome {
    let start = Instant::now();
    let shapes: [(&[usize], usize); 12] = [
        (&[4], 4),
        (&[8], 16),
        (&[32], 32),
        (&[3, 5], 6),
        (&[8, 8], 8),
        (&[16, 16], 16),
        (&[32, 32], 32),
        (&[12], 20),
        (&[20, 10], 12),
        (&[6, 6], 30),
        (&[32], 8),
        (&[10, 32], 5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let b = Bounds::new(-2.0, 3.0).unwrap();
    let (mut worst_dd, mut worst_central) = (f64::INFINITY, f64::INFINITY);
    let mut exact_dd = 0;
    let mut failures = Vec::new();
    for (i, (cells, nt)) in shapes.iter().enumerate() {
        let extent: Vec<f64> = cells.iter().map(|_| rng.random_range(0.5..2.0)).collect();
        let spec = GridSpec::new(cells, &extent, *nt, rng.random_range(0.5..2.0)).unwrap();
        for kind in SparsityKind::ALL {
            let u = random_base(kind, spec, b, &mut rng).unwrap();
            let v = rand_fn(spec, &mut rng, -1.0, 1.0);
            let c = dir_deriv_check(kind, &u, &v, &DIR_DERIV_STEPS, j_dir_deriv);
            match c.order {
                Some(p) => worst_dd = worst_dd.min(p),
                None => exact_dd += 1,
            }
            if !c.pass {
                failures.push(format!("instance {i} {kind}: {:?}", c.errors));
            }
        }
        let a = if i % 2 == 0 { Nonlinearity::Cubic } else { Nonlinearity::LinearCubic };
        // states of order one so the cubic term is felt
        let y0: Vec<f64> = (0..spec.n_space()).map(|_| rng.random_range(-2.0..2.0)).collect();
        let target = rand_fn(spec, &mut rng, -1.0, 1.0);
        let cfg = PdeConfig::new(spec, rng.random_range(0.05..0.5), a, 0.1)
            .unwrap()
            .with_target(target)
            .unwrap()
            .with_initial(y0)
            .unwrap();
        let u = rand_fn(spec, &mut rng, -8.0, 8.0);
        let (v1, v2) = (rand_fn(spec, &mut rng, -4.0, 4.0), rand_fn(spec, &mut rng, -4.0, 4.0));
        let g = gradient_check(&cfg, &u, &v1, &CENTRAL_STEPS).unwrap();
        let h = hessian_check(&cfg, &u, &v1, &v2, &CENTRAL_STEPS).unwrap();
        for (name, c) in [("gradient", g), ("hessian", h)] {
            match c.order {
                Some(p) if p >= 1.9 && c.pass => worst_central = worst_central.min(p),
                _ => failures.push(format!("instance {i} {name}: {:?} order {:?}", c.errors, c.order)),
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(120);
    outcome(
        pass,
        format!(
            "12 instances up to 32x32x32: min forward order {worst_dd:.3} ({exact_dd} exact at rounding level), \
             min central order {worst_central:.3}, {elapsed:.2?}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn prox_correctness() -> Outcome {
    let shapes: [(&[usize], usize); 4] = [(&[3], 4), (&[2, 2], 3), (&[6], 2), (&[2], 6)];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut trials = 0;
    for kind in SparsityKind::ALL {
        for (cells, nt) in shapes {
            let extent: Vec<f64> = cells.iter().map(|_| rng.random_range(0.5..2.0)).collect();
            let spec = GridSpec::new(cells, &extent, nt, rng.random_range(0.5..2.0)).unwrap();
            let b = Bounds::new(-rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)).unwrap();
            worst = worst.max(prox_oracle_gap(kind, spec, b, 15, rng.random()).unwrap());
            trials += 15;
        }
    }
    outcome(worst <= 1e-6, format!("{trials} triples ({} per kind) on 12-cell grids: max L2 gap {worst:.2e}", trials / 3))
}

fn recovery_laws() -> Outcome {
    let schedule: Vec<f64> = (1..=10).map(|k| 0.25f64.powi(k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut failures = Vec::new();
    let mut worst_final: f64 = 0.0;
    let mut worst_identity: f64 = 0.0;
    let mut directions = 0;
    let mut full_schedule_exceptions = 0;
    for kind in SparsityKind::ALL {
        for inst in 0..4 {
            let spec = GridSpec::new(&[4, 3], &[1.0, 1.5], 6, 0.8).unwrap();
            let u = structured_base(kind, spec, &mut rng);
            if u.is_zero() {
                continue;
            }
            let ctrl = ControlSpec::new(kind, 0.7, bounds2()).unwrap();
            let (grad, lambda) = synthetic_stationary(&ctrl, &u, 0.5, rng.random()).unwrap();
            let w = grad.scale(-1.0);
            let dirs = sample_critical(&ctrl, &u, &grad, &lambda, 4, rng.random(), 1e-9).unwrap();
            for (d, v) in dirs.iter().enumerate() {
                let v = v.scale(1.0 / v.norm_inf());
                directions += 1;
                let value = second_subderivative(&ctrl, &u, &grad, &lambda, &v, 1e-9).unwrap().value.finite().unwrap();
                let mut errs = Vec::new();
                for &t in &schedule {
                    let r = check_recovery_properties(&ctrl, &u, &v, t, &grad, &lambda, 1e-9).unwrap();
                    worst_identity = worst_identity.max(r.identity_residual);
                    if !r.all_hold() {
                        failures.push(format!("{kind}/{inst}/{d} t={t:e}: {r:?}"));
                    }
                    let vt = sparse_soc::second_order::recovery_sequence(&ctrl, &u, &v, t, &grad, &lambda, 1e-9).unwrap();
                    let q = curvature_quotient(&ctrl, &u, &w, &vt, t).finite().unwrap_or(f64::INFINITY);
                    errs.push((q - value).abs());
                }
                // t = 1/4 is pre-asymptotic; 1e-9 allows for rounding of the quotient at the smallest t
                if errs.windows(2).any(|e| e[1] > e[0] + 1e-9) {
                    full_schedule_exceptions += 1;
                }
                if errs[1..].windows(2).any(|e| e[1] > e[0] + 1e-9) {
                    failures.push(format!("{kind}/{inst}/{d}: non-monotone errors {errs:?}"));
                }
                let last = *errs.last().unwrap();
                worst_final = worst_final.max(last);
                if last > 1e-4 {
                    failures.push(format!("{kind}/{inst}/{d}: final gap {last:e}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty() && directions > 0,
        format!(
            "{directions} critical directions, t = 4^-1..4^-10: worst identity residual {worst_identity:.2e}, \
             worst final |quotient - closed form| {worst_final:.2e}, error monotone from t = 4^-2 \
             ({full_schedule_exceptions} directions not monotone from 4^-1){}",
            if failures.is_empty() { String::new() } else { format!("; failures: {:?}", &failures[..failures.len().min(3)]) }
        ),
    )
}

/// `mu lambda + n`, with `n` the normal-cone part of `-(grad + mu lambda)`.
fn certified_subgradient(ctrl: &ControlSpec, u: &GridFunction, grad: &GridFunction, lambda: &GridFunction) -> GridFunction {
    let b = ctrl.bounds;
    let r = grad.axpy(ctrl.mu, lambda).scale(-1.0);
    let n = GridFunction::from_cells(*u.spec(), |s, k| {
        let i = u.spec().index(s, k);
        let (x, r) = (u.values()[i], r.values()[i]);
        if x == b.beta {
            r.max(0.0)
        } else if x == b.alpha {
            r.min(0.0)
        } else {
            0.0
        }
    })
    .unwrap();
    assert!(normal_contains(u, &n, b, 0.0).unwrap().member);
    lambda.scale(ctrl.mu).add(&n)
}

/// Random tangent direction and a step range that keeps `u + t v` feasible.
fn tangent_direction(u: &GridFunction, b: Bounds, rng: &mut ChaCha8Rng) -> (GridFunction, f64) {
    let g = gaussian(*u.spec(), rng);
    let v = u.zip_map(&g, |x, d| if x == b.alpha { d.abs() } else if x == b.beta { -d.abs() } else { d });
    let t_max = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(&x, &d)| if d > 0.0 { (b.beta - x) / d } else if d < 0.0 { (b.alpha - x) / d } else { f64::INFINITY })
        .fold(1.0, f64::min);
    (v, t_max)
}

fn nonnegativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut summary = Vec::new();
    let mut pass = true;
    for kind in SparsityKind::ALL {
        let mut points = Vec::new();
        // solver output on a semilinear problem, certified through the KKT residual
        let spec = GridSpec::unit(10, 8).unwrap();
        let target = GridFunction::from_fn(spec, |x, t| 6.0 * (3.0 * x[0]).sin() * t).unwrap();
        let pde = PdeConfig::new(spec, 0.2, Nonlinearity::Cubic, 0.05).unwrap().with_target(target).unwrap();
        let ctrl = ControlSpec::new(kind, 0.05, Bounds::new(-1.0, 1.5).unwrap()).unwrap();
        let problem = ProblemConfig::new(ctrl, pde).unwrap();
        let sol = solve_ocp(&problem, &GridFunction::zeros(spec), SolveOptions::default()).unwrap();
        let grad = sparse_soc::pde::grad_smooth(&problem.pde, &sol.u).unwrap();
        let certified = sol.kkt_residual <= 1e-8;
        pass &= certified;
        points.push((ctrl, sol.u.clone(), certified_subgradient(&ctrl, &sol.u, &grad, &sol.lambda)));
        // exact synthetic stationary point
        let spec = GridSpec::new(&[3, 3], &[1.0, 1.0], 5, 1.0).unwrap();
        let u = structured_base(kind, spec, &mut rng);
        let ctrl = ControlSpec::new(kind, 0.4, bounds2()).unwrap();
        let (g, l) = synthetic_stationary(&ctrl, &u, 0.5, rng.random()).unwrap();
        assert!(stationarity_violation(&ctrl, &u, &g, &l) < 1e-14);
        points.push((ctrl, u, g.scale(-1.0)));

        let mut min_q = f64::INFINITY;
        let mut count = 0;
        for (ctrl, u, w) in &points {
            for _ in 0..200 {
                let (v, t_max) = tangent_direction(u, ctrl.bounds, &mut rng);
                let t = t_max * 10f64.powf(-rng.random_range(0.0..5.0));
                if let ExtReal::Finite(q) = curvature_quotient(ctrl, u, w, &v, t) {
                    min_q = min_q.min(q);
                    count += 1;
                }
            }
        }
        pass &= count >= 200 && min_q >= -1e-8;
        summary.push(format!("{kind}: {count} finite quotients, min {min_q:.2e}"));
    }
    outcome(pass, summary.join("; "))
}

fn off_cone_rate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for kind in SparsityKind::ALL {
        let spec = GridSpec::new(&[4], &[1.0], 6, 1.0).unwrap();
        let u = structured_base(kind, spec, &mut rng);
        let ctrl = ControlSpec::new(kind, 0.6, bounds2()).unwrap();
        let (g, _) = synthetic_stationary(&ctrl, &u, 0.7, rng.random()).unwrap();
        let w = g.scale(-1.0);
        let cls = SignClassification::new(&u);
        for delta in [0.1, 0.5] {
            for _ in 0..5 {
                let (v, t_max) = tangent_direction(&u, ctrl.bounds, &mut rng);
                let gap = ctrl.mu * j_dir_deriv(kind, &u, &v, &cls) - w.dot(&v);
                if gap < 1e-3 * v.norm_l2() {
                    continue;
                }
                let v = v.scale(delta / gap);
                let t0 = (t_max * gap / delta).min(1.0) * 0.5;
                cases += 1;
                for k in 2..=9 {
                    let t = t0 * 0.25f64.powi(k);
                    let q = curvature_quotient(&ctrl, &u, &w, &v, t).finite().unwrap();
                    worst = worst.max((q * t - 2.0 * delta).abs() / (2.0 * delta));
                }
            }
        }
    }
    outcome(cases >= 12 && worst <= 0.1, format!("{cases} directions with gap 0.1 or 0.5: max |t q / (2 delta) - 1| = {worst:.2e}"))
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for kind in ["j1", "j2", "j3"] {
        let cfg = Config::parse(&format!(
            "[grid]\nspatial_cells = [32]\ntime_cells = 32\n\
             [control]\nkind = \"{kind}\"\nmu = 0.01\nalpha = -1.0\nbeta = 1.0\n\
             [pde]\nkappa = 0.1\nnonlinearity = \"zero\"\nnu = 1.0\ntarget = {{ profile = \"sine_bump\", amplitude = 20.0 }}\n\
             [analysis]\nsamples = 20\nseed = 7\ngrowth_samples = 500\ngrowth_radius = 1e-2\nkkt_tol = 1e-8\n"
        ))
        .unwrap();
        let r = analyze(&cfg).unwrap();
        let fo = r.first_order.as_ref().map_or(f64::NAN, |f| f.residual);
        let sums_ok = !r.critical_samples.is_empty() && r.critical_samples.iter().all(|s| s.sum > ExtReal::ZERO);
        let g = r.growth.as_ref().unwrap();
        let ok = r.status == Status::Ok && fo <= 1e-8 && sums_ok && g.samples >= 500 && g.min_ratio >= 0.25;
        pass &= ok;
        let min_sum = r.critical_samples.iter().map(|s| s.sum.to_f64()).fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "{kind}: residual {fo:.1e}, {} directions min sum {min_sum:.3}, growth min {:.4} over {}+{} samples",
            r.critical_samples.len(),
            g.min_ratio,
            g.samples,
            g.directed_samples
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    outcome(pass, format!("32x32 convex, nu = 1 (threshold 0.25): {}; {elapsed:.2?}", parts.join("; ")))
}

fn psi_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for i in 0..1000 {
        let n = rng.random_range(1..40);
        let dt = rng.random_range(0.01..1.0);
        let sf = 10f64.powf(rng.random_range(-3.0..3.0));
        let sg = 10f64.powf(rng.random_range(-3.0..3.0));
        let f: Vec<f64> = (0..n).map(|_| sf * rng.sample::<f64, _>(StandardNormal)).collect();
        let mut g: Vec<f64> = (0..n).map(|_| sg * rng.sample::<f64, _>(StandardNormal)).collect();
        if i % 4 == 0 && n > 1 {
            // steer towards the extremal angle cos = 1/sqrt(3)
            let nf = f.iter().map(|x| x * x).sum::<f64>().sqrt();
            let proj = g.iter().zip(&f).map(|(a, b)| a * b).sum::<f64>() / (nf * nf);
            let perp: Vec<f64> = g.iter().zip(&f).map(|(a, b)| a - proj * b).collect();
            let np = perp.iter().map(|x| x * x).sum::<f64>().sqrt();
            g = f.iter().zip(&perp).map(|(a, p)| sg * (a / nf + 2f64.sqrt() * p / np)).collect();
        }
        let Ok(p) = psi_eval(&f, &g, dt) else { continue };
        let ng = (g.iter().map(|x| x * x).sum::<f64>() * dt).sqrt();
        let bound = 6.0 * ng.powi(3) / (p.value * p.value);
        worst = worst.max(p.d3.abs() / bound);
        if p.d3.abs() > bound + 1e-12 * bound.max(1.0) {
            violations += 1;
        }
    }
    outcome(violations == 0, format!("1000 pairs: {violations} violations, max |Psi'''(f)g^3| / bound = {worst:.4}"))
}

fn lower_taylor() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_spread: f64 = 1.0;
    let mut fails = 0;
    for _ in 0..20 {
        let spec = GridSpec::new(&[4], &[1.0], 5, 1.0).unwrap();
        let u = GridFunction::from_cells(spec, |_, _| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            if rng.random::<f64>() < 0.2 {
                0.0
            } else {
                sign * rng.random_range(0.5..1.5)
            }
        })
        .unwrap();
        if u.is_zero() {
            continue;
        }
        let d = gaussian(spec, &mut rng);
        let d = d.scale(1.0 / d.norm_l2());
        let c: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&s| lower_taylor_residual_j2(&u, &d.scale(s)).unwrap().cubic_ratio.abs())
            .collect();
        let (hi, lo) = (c.iter().cloned().fold(0.0, f64::max), c.iter().cloned().fold(f64::INFINITY, f64::min));
        let spread = hi / lo;
        worst_spread = worst_spread.max(spread);
        if !(spread <= 10.0) {
            fails += 1;
        }
    }
    outcome(fails == 0, format!("20 instances, |v| = 1e-1, 1e-2, 1e-3: worst max/min of gap*j2^2/|v|^3 = {worst_spread:.3}"))
}

fn adjoint_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    let mut configs = 0;
    let grids = [
        GridSpec::new(&[10], &[1.0], 7, 1.0).unwrap(),
        GridSpec::new(&[33], &[2.0], 20, 0.5).unwrap(),
        GridSpec::new(&[5, 4], &[1.0, 0.7], 6, 1.5).unwrap(),
        GridSpec::new(&[16, 16], &[1.0, 1.0], 10, 1.0).unwrap(),
    ];
    for spec in grids {
        for a in [Nonlinearity::Zero, Nonlinearity::Cubic, Nonlinearity::LinearCubic] {
            for (kappa, nu) in [(0.05, 0.0), (1.0, 0.1)] {
                let y0: Vec<f64> = (0..spec.n_space()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let target = rand_fn(spec, &mut rng, -1.0, 1.0);
                let cfg = PdeConfig::new(spec, kappa, a, nu).unwrap().with_target(target).unwrap().with_initial(y0).unwrap();
                let u = rand_fn(spec, &mut rng, -3.0, 3.0);
                let y = solve_state(&cfg, &u).unwrap();
                let phi = solve_adjoint(&cfg, &y).unwrap();
                for _ in 0..3 {
                    let v = gaussian(spec, &mut rng);
                    let z = solve_linearized(&cfg, &y, &v).unwrap();
                    let lhs = y.sub(&cfg.target).dot(&z);
                    let rhs = phi.dot(&v);
                    worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
                }
                configs += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{configs} configurations x 3 directions: max relative defect {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("counterexample reproduction", counterexample),
        ("derivative oracles", derivative_oracles),
        ("prox correctness", prox_correctness),
        ("recovery-sequence laws", recovery_laws),
        ("nonnegativity at subgradients", nonnegativity),
        ("off-cone blow-up rate", off_cone_rate),
        ("end-to-end second order and growth", end_to_end),
        ("Psi third-derivative bound", psi_bound),
        ("lower Taylor remainder of j2", lower_taylor),
        ("discrete adjoint identity", adjoint_identity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Outcome { pass: false, detail: format!("panicked: {}", msg.unwrap_or_default()) }
        });
        if !out.pass {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {} [{:.1?}]",
            if out.pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            start.elapsed()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
