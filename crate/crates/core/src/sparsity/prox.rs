//! `prox(u) = argmin_w 1/2 ||w - u||^2 + step * mu * j(w) + delta_{U_ad}(w)`.

use super::SparsityKind;
use crate::control::Bounds;
use crate::error::{Error, Result};
use crate::fnspace::{self, traj_norm, GridFunction};
use crate::roots::brent;

const RESIDUAL_TOL: f64 = 1e-10;

#[inline]
fn soft(x: f64, tau: f64) -> f64 {
    // Ties at |x| == tau go to zero.
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

pub fn prox(kind: SparsityKind, mu: f64, step: f64, u: &GridFunction, bounds: Bounds) -> Result<GridFunction> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("prox step must be positive, got {step}")));
    }
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!("mu must be nonnegative, got {mu}")));
    }
    let c = step * mu;
    if c == 0.0 {
        return Ok(u.map(|x| bounds.clamp(x)));
    }
    match kind {
        SparsityKind::J1 => Ok(u.map(|x| bounds.clamp(soft(x, c)))),
        SparsityKind::J2 => prox_j2(c, u, bounds),
        SparsityKind::J3 => prox_j3(c, u, bounds),
    }
}

/// Per spatial point: `w = P(theta * u)` where `theta` solves
/// `||P(theta u)|| (1 - theta) / theta = c`, the left side being decreasing.
fn prox_j3(c: f64, u: &GridFunction, bounds: Bounds) -> Result<GridFunction> {
    let spec = *u.spec();
    let dt = spec.cell_measure_time();
    let scale = u.norm_inf().max(1.0);
    let mut out = Vec::with_capacity(spec.len());
    let mut worst: f64 = 0.0;
    for s in 0..spec.n_space() {
        let us = u.space_slice(s);
        let n = traj_norm(us, dt);
        if n <= c {
            out.extend(std::iter::repeat_n(0.0, us.len()));
            continue;
        }
        let clamped_norm = |theta: f64| {
            let sq: f64 = us.iter().map(|&x| bounds.clamp(theta * x).powi(2)).sum();
            (sq * dt).sqrt()
        };
        let k = |theta: f64| {
            if theta <= 0.0 {
                n - c
            } else {
                clamped_norm(theta) * (1.0 - theta) / theta - c
            }
        };
        let theta = brent(k, 0.0, 1.0, 0.0, 400).ok_or(Error::ProxNoConvergence { residual: f64::NAN })?;
        let w: Vec<f64> = us.iter().map(|&x| bounds.clamp(theta * x)).collect();
        // Fixed-point residual of w = P(u / (1 + c / ||w||)).
        let nw = traj_norm(&w, dt);
        let f = 1.0 / (1.0 + c / nw);
        let res = us.iter().zip(&w).map(|(&x, &y)| (bounds.clamp(f * x) - y).abs()).fold(0.0, f64::max);
        worst = worst.max(res);
        out.extend(w);
    }
    if worst > RESIDUAL_TOL * scale {
        return Err(Error::ProxNoConvergence { residual: worst });
    }
    Ok(GridFunction::from_vec(spec, out))
}

/// Spatial L1 mass of `P(soft(u_k, tau))` as a function of the threshold, for one time cell.
struct SliceMass {
    /// (|u_i|, cap_i) for nonzero cells
    cells: Vec<(f64, f64)>,
    breaks: Vec<f64>,
    dx: f64,
}

impl SliceMass {
    fn new(values: impl Iterator<Item = f64>, bounds: Bounds, dx: f64) -> Self {
        let cells: Vec<(f64, f64)> =
            values.filter(|&x| x != 0.0).map(|x| (x.abs(), bounds.magnitude_for(x > 0.0))).collect();
        let mut breaks = vec![0.0];
        for &(a, b) in &cells {
            breaks.push(a);
            if a > b {
                breaks.push(a - b);
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        SliceMass { cells, breaks, dx }
    }

    fn mass(&self, tau: f64) -> f64 {
        self.cells.iter().map(|&(a, b)| (a - tau).clamp(0.0, b)).sum::<f64>() * self.dx
    }

    /// The unique `tau >= 0` with `tau = rho * mass(tau)`; exact since the
    /// mass is piecewise linear between the breakpoints.
    fn threshold(&self, rho: f64) -> f64 {
        let h = |tau: f64| tau - rho * self.mass(tau);
        if self.cells.is_empty() || h(0.0) >= 0.0 {
            return 0.0;
        }
        // h is increasing and positive at the last breakpoint (max |u_i|).
        let (mut lo, mut hi) = (0usize, self.breaks.len() - 1);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if h(self.breaks[mid]) >= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let (p0, p1) = (self.breaks[lo], self.breaks[hi]);
        let (h0, h1) = (h(p0), h(p1));
        (p0 - h0 * (p1 - p0) / (h1 - h0)).clamp(p0, p1)
    }
}

/// With `rho = c / j2(w)` the optimality system decouples per time cell
/// into `w_k = P(soft(u_k, tau_k))`, `tau_k = rho ||w_k||_{L1}`. The outer
/// equation `||tau(rho)||_{L2(0,T)} = c` is monotone in `rho`.
fn prox_j2(c: f64, u: &GridFunction, bounds: Bounds) -> Result<GridFunction> {
    let spec = *u.spec();
    let (nt, dt) = (spec.n_time(), spec.cell_measure_time());
    if fnspace::l2_linf(u) <= c {
        return Ok(GridFunction::zeros(spec));
    }
    let slices: Vec<SliceMass> =
        (0..nt).map(|k| SliceMass::new(u.time_slice(k).into_iter(), bounds, spec.cell_measure_space())).collect();
    let phi = |rho: f64| {
        let sq: f64 = slices.iter().map(|s| s.threshold(rho).powi(2)).sum();
        (sq * dt).sqrt()
    };
    let mut hi = 1.0 / c.max(f64::MIN_POSITIVE);
    let mut doublings = 0;
    while phi(hi) < c {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(Error::ProxNoConvergence { residual: c - phi(hi / 2.0) });
        }
    }
    let rho = brent(|r| phi(r) - c, 0.0, hi, 0.0, 2000).ok_or(Error::ProxNoConvergence { residual: f64::NAN })?;
    let taus: Vec<f64> = slices.iter().map(|s| s.threshold(rho)).collect();
    let w = GridFunction::from_cells(spec, |s, k| bounds.clamp(soft(u.get(s, k), taus[k])))?;

    let mass = fnspace::time_slice_l1(&w);
    let n = traj_norm(&mass, dt);
    let residual = if n > 0.0 {
        taus.iter().zip(&mass).map(|(t, m)| (t - c * m / n).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    if residual > RESIDUAL_TOL * u.norm_inf().max(1.0) {
        return Err(Error::ProxNoConvergence { residual });
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fnspace::GridSpec;
    use crate::sparsity::j_value;
    use proptest::prelude::*;

    fn objective(kind: SparsityKind, c: f64, u: &GridFunction, w: &GridFunction) -> f64 {
        0.5 * w.sub(u).norm_l2().powi(2) + c * j_value(kind, w)
    }

    #[test]
    fn zero_weight_is_box_projection() {
        let spec = GridSpec::unit(3, 2).unwrap();
        let u = GridFunction::from_cells(spec, |s, k| 3.0 * (s as f64 - 1.0) + k as f64).unwrap();
        let b = Bounds::new(-1.0, 2.0).unwrap();
        for kind in SparsityKind::ALL {
            assert_eq!(prox(kind, 0.0, 1.0, &u, b).unwrap(), u.map(|x| x.clamp(-1.0, 2.0)));
        }
    }

    #[test]
    fn scalar_soft_threshold() {
        let spec = GridSpec::unit(2, 2).unwrap();
        let u = GridFunction::constant(spec, 0.5);
        let w = prox(SparsityKind::J1, 0.4, 0.5, &u, Bounds::new(-1.0, 1.0).unwrap()).unwrap();
        assert!(w.values().iter().all(|&x| (x - 0.3).abs() < 1e-15));
    }

    #[test]
    fn group_thresholds_without_active_bounds() {
        // With loose bounds the J3 prox is plain group soft-thresholding.
        let spec = GridSpec::unit(2, 4).unwrap();
        let u = GridFunction::from_cells(spec, |s, k| (s as f64 + 1.0) * (k as f64 - 1.5)).unwrap();
        let b = Bounds::new(-100.0, 100.0).unwrap();
        let c = 0.7;
        let w = prox(SparsityKind::J3, c, 1.0, &u, b).unwrap();
        for s in 0..2 {
            let n = traj_norm(u.space_slice(s), 0.25);
            for (x, y) in u.space_slice(s).iter().zip(w.space_slice(s)) {
                assert!((x * (1.0 - c / n).max(0.0) - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_when_dual_norm_below_weight() {
        let spec = GridSpec::unit(3, 3).unwrap();
        let u = GridFunction::from_cells(spec, |s, k| 0.1 * (s as f64 - k as f64)).unwrap();
        let b = Bounds::new(-1.0, 1.0).unwrap();
        assert!(prox(SparsityKind::J2, 1.0, fnspace::l2_linf(&u), &u, b).unwrap().is_zero());
        assert!(prox(SparsityKind::J3, 1.0, fnspace::linf_l2(&u), &u, b).unwrap().is_zero());
        assert!(prox(SparsityKind::J1, 1.0, u.norm_inf(), &u, b).unwrap().is_zero());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prox_is_optimal_against_perturbations(
            vals in proptest::collection::vec(-3.0..3.0f64, 12),
            c in 0.01..1.5f64,
            dirs in proptest::collection::vec(-1.0..1.0f64, 12 * 4),
        ) {
            let spec = GridSpec::new(&[3], &[1.0], 4, 2.0).unwrap();
            let u = GridFunction::new(spec, vals).unwrap();
            let b = Bounds::new(-1.0, 1.5).unwrap();
            for kind in SparsityKind::ALL {
                let w = prox(kind, c, 1.0, &u, b).unwrap();
                prop_assert!(w.values().iter().all(|&x| (-1.0..=1.5).contains(&x)));
                let f0 = objective(kind, c, &u, &w);
                for d in dirs.chunks(12) {
                    for h in [1e-2, 1e-4] {
                        let z = GridFunction::new(spec, d.to_vec()).unwrap();
                        let trial = w.axpy(h, &z).map(|x| b.clamp(x));
                        prop_assert!(objective(kind, c, &u, &trial) >= f0 - 1e-12, "{kind}");
                    }
                }
            }
        }

        #[test]
        fn prox_is_nonexpansive(
            a in proptest::collection::vec(-3.0..3.0f64, 12),
            d in proptest::collection::vec(-3.0..3.0f64, 12),
            c in 0.01..1.5f64,
        ) {
            let spec = GridSpec::new(&[2, 2], &[1.0, 1.0], 3, 1.0).unwrap();
            let u = GridFunction::new(spec, a).unwrap();
            let v = GridFunction::new(spec, d).unwrap();
            let b = Bounds::new(-2.0, 1.0).unwrap();
            for kind in SparsityKind::ALL {
                let pu = prox(kind, c, 1.0, &u, b).unwrap();
                let pv = prox(kind, c, 1.0, &v, b).unwrap();
                prop_assert!(pu.sub(&pv).norm_l2() <= u.sub(&v).norm_l2() + 1e-12);
            }
        }
    }
}
