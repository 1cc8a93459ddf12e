//! The `j2` example at `u = 0` whose critical directions are all unbounded.
//!
//! `Omega = (0,1)`, `T = 1`, `D = {x < t}`, `F'(0) = -1` on `D` and `-0.5`
//! elsewhere, `mu = 1`, bounds `[-1, 1]`. The direction `v = 1_D / t` is
//! critical, and its truncations `v_t = min(v, 1/t)` give
//! `j2(v_t) = (1 - 2t/3)^{1/2}`, `-F'(0) v_t = 1 - t/2` and curvature
//! quotients tending to `1/3`.

use serde::Serialize;

use crate::control::{Bounds, ControlSpec};
use crate::error::{Error, Result};
use crate::fnspace::{GridFunction, GridSpec};
use crate::second_order::curvature_quotient;
use crate::sparsity::{j_value, SparsityKind};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub t: f64,
    pub j2: f64,
    pub j2_exact: f64,
    pub pairing: f64,
    pub pairing_exact: f64,
    pub quotient: f64,
    pub quotient_exact: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub grid: usize,
    pub schedule: Vec<f64>,
    pub rows: Vec<CounterexampleRow>,
    /// Order-1 Richardson values from consecutive pairs of `t`.
    pub richardson: Vec<f64>,
    pub extrapolated_limit: f64,
    pub expected_limit: f64,
}

/// `2^-2, 2^-3, ...` down to `tmin`.
pub fn dyadic_schedule(tmin: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.25;
    while t >= tmin * (1.0 - 1e-12) {
        out.push(t);
        t *= 0.5;
    }
    out
}

/// `int_a^b min(1/tau, 1/t) |(x1, x2) cap (0, tau)| dtau`
fn strip_integral(x1: f64, x2: f64, a: f64, b: f64, t: f64) -> f64 {
    let mut cuts = vec![a, b];
    cuts.extend([x1, x2, t].into_iter().filter(|&c| a < c && c < b));
    cuts.sort_by(f64::total_cmp);
    let h = x2 - x1;
    let mut sum = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= x1 || hi <= lo {
            continue;
        }
        let clipped = hi <= t;
        sum += if hi <= x2 {
            // length tau - x1
            if clipped {
                ((hi - x1).powi(2) - (lo - x1).powi(2)) / (2.0 * t)
            } else if x1 == 0.0 {
                hi - lo
            } else {
                (hi - lo) - x1 * (hi / lo).ln()
            }
        } else if clipped {
            h * (hi - lo) / t
        } else {
            h * (hi / lo).ln()
        };
    }
    sum
}

/// Exact cell averages of `v_t` on an `n x n` grid of the unit square.
pub fn truncated_direction(spec: GridSpec, t: f64) -> Result<GridFunction> {
    let (hx, ht) = (spec.cell_width(0), spec.cell_measure_time());
    GridFunction::from_cells(spec, |s, k| {
        let (x1, tau1) = (s as f64 * hx, k as f64 * ht);
        if x1 >= tau1 + ht {
            return 0.0;
        }
        strip_integral(x1, x1 + hx, tau1, tau1 + ht, t) / (hx * ht)
    })
}

/// `F'(0)`: `-1` on cells meeting `D`, `-0.5` elsewhere.
pub fn gradient(spec: GridSpec) -> Result<GridFunction> {
    GridFunction::from_cells(spec, |s, k| if s <= k { -1.0 } else { -0.5 })
}

pub fn reproduce_j2_counterexample(grid: usize, schedule: &[f64]) -> Result<CounterexampleReport> {
    if schedule.is_empty() || schedule.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::InvalidArgument("schedule must be nonempty with entries in (0, 1]".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("schedule must be strictly decreasing".into()));
    }
    let spec = GridSpec::unit(grid, grid)?;
    let ctrl = ControlSpec::new(SparsityKind::J2, 1.0, Bounds::new(-1.0, 1.0)?)?;
    let w = gradient(spec)?.scale(-1.0);
    let zero = GridFunction::zeros(spec);
    let rows: Vec<CounterexampleRow> = schedule
        .iter()
        .map(|&t| {
            let v = truncated_direction(spec, t)?;
            let j2 = j_value(SparsityKind::J2, &v);
            let pairing = w.dot(&v);
            let j2_exact = (1.0 - 2.0 * t / 3.0).sqrt();
            let pairing_exact = 1.0 - t / 2.0;
            Ok(CounterexampleRow {
                t,
                j2,
                j2_exact,
                pairing,
                pairing_exact,
                quotient: curvature_quotient(&ctrl, &zero, &w, &v, t).to_f64(),
                quotient_exact: 2.0 * (j2_exact - pairing_exact) / t,
            })
        })
        .collect::<Result<_>>()?;
    let richardson: Vec<f64> = rows
        .windows(2)
        .map(|p| (p[0].t * p[1].quotient - p[1].t * p[0].quotient) / (p[0].t - p[1].t))
        .collect();
    Ok(CounterexampleReport {
        grid,
        schedule: schedule.to_vec(),
        extrapolated_limit: select_limit(&richardson).unwrap_or(rows[0].quotient),
        rows,
        richardson,
        expected_limit: 1.0 / 3.0,
    })
}

/// Mean of the two consecutive extrapolants that agree best. Large `t`
/// carries the `O(t^2)` remainder, small `t` the grid error, and the
/// plateau in between is where consecutive values settle.
fn select_limit(r: &[f64]) -> Option<f64> {
    if r.len() < 2 {
        return r.first().copied();
    }
    let k = (1..r.len()).min_by(|&a, &b| (r[a] - r[a - 1]).abs().total_cmp(&(r[b] - r[b - 1]).abs()))?;
    Some(0.5 * (r[k] + r[k - 1]))
}
