//! The sparsity functionals
//!
//! - `j1(u) = ||u||_{L1(Omega_T)}`
//! - `j2(u) = ||u||_{L2(0,T; L1(Omega))}` (directional sparsity in time)
//! - `j3(u) = ||u||_{L1(Omega; L2(0,T))}` (directional sparsity in space)
//!
//! together with directional derivatives, subdifferentials and proximal maps.

mod prox;
mod subdiff;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use prox::prox;
pub use subdiff::{canonical_subgradient, pairing_defects, pairing_equals_dirderiv, subdiff_contains, SubdiffReport};

use crate::error::Error;
use crate::fnspace::{self, traj_dot, traj_norm, GridFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparsityKind {
    J1,
    J2,
    J3,
}

impl SparsityKind {
    pub const ALL: [SparsityKind; 3] = [SparsityKind::J1, SparsityKind::J2, SparsityKind::J3];
}

impl fmt::Display for SparsityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SparsityKind::J1 => "j1",
            SparsityKind::J2 => "j2",
            SparsityKind::J3 => "j3",
        })
    }
}

impl FromStr for SparsityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "j1" => Ok(SparsityKind::J1),
            "j2" => Ok(SparsityKind::J2),
            "j3" => Ok(SparsityKind::J3),
            _ => Err(Error::InvalidArgument(format!("unknown sparsity kind {s:?} (expected j1, j2 or j3)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Pos,
    Neg,
    Zero,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
            Sign::Zero => 0.0,
        }
    }
}

/// Zero sets of a base point `u_bar`.
///
/// A cell is `Zero` iff `|u_bar| <= tol`. A spatial point belongs to
/// `Omega_u` iff any of its cells is nonzero; a time cell belongs to `M`
/// iff any of its cells is nonzero. The norms below are computed with the
/// zero cells set to exactly zero.
#[derive(Debug, Clone)]
pub struct SignClassification {
    pub cells: Vec<Sign>,
    /// `x in Omega_u`
    pub space_nonzero: Vec<bool>,
    /// `t in M`
    pub time_nonzero: Vec<bool>,
    pub tol: f64,
    /// `||u_bar(x)||_{L2(0,T)}`
    pub space_norms: Vec<f64>,
    /// `||u_bar(t)||_{L1(Omega)}`
    pub time_l1: Vec<f64>,
    /// `j2(u_bar)`
    pub j2: f64,
}

impl SignClassification {
    pub fn new(u: &GridFunction) -> Self {
        Self::with_tol(u, 1e-12 * u.norm_inf().max(1.0))
    }

    pub fn with_tol(u: &GridFunction, tol: f64) -> Self {
        let spec = u.spec();
        let (ns, nt) = (spec.n_space(), spec.n_time());
        let cells: Vec<Sign> = u
            .values()
            .iter()
            .map(|&x| {
                if x.abs() <= tol {
                    Sign::Zero
                } else if x > 0.0 {
                    Sign::Pos
                } else {
                    Sign::Neg
                }
            })
            .collect();
        let cleaned = GridFunction::from_vec(
            *spec,
            u.values().iter().zip(&cells).map(|(&x, &c)| if c == Sign::Zero { 0.0 } else { x }).collect(),
        );
        let mut space_nonzero = vec![false; ns];
        let mut time_nonzero = vec![false; nt];
        for s in 0..ns {
            for k in 0..nt {
                if cells[spec.index(s, k)] != Sign::Zero {
                    space_nonzero[s] = true;
                    time_nonzero[k] = true;
                }
            }
        }
        let time_l1 = fnspace::time_slice_l1(&cleaned);
        SignClassification {
            cells,
            space_nonzero,
            time_nonzero,
            tol,
            space_norms: fnspace::space_slice_l2(&cleaned),
            j2: traj_norm(&time_l1, spec.cell_measure_time()),
            time_l1,
        }
    }

    /// No nonzero cell at all.
    pub fn is_zero(&self) -> bool {
        self.cells.iter().all(|&c| c == Sign::Zero)
    }

    #[inline]
    pub fn sign(&self, idx: usize) -> Sign {
        self.cells[idx]
    }
}

pub fn j_value(kind: SparsityKind, u: &GridFunction) -> f64 {
    match kind {
        SparsityKind::J1 => u.norm_l1(),
        SparsityKind::J2 => fnspace::l2_l1(u),
        SparsityKind::J3 => fnspace::l1_l2(u),
    }
}

/// One-sided derivative of `|.|` at `a` in direction `h`.
#[inline]
fn abs_dir(sign: Sign, h: f64) -> f64 {
    match sign {
        Sign::Pos => h,
        Sign::Neg => -h,
        Sign::Zero => h.abs(),
    }
}

/// `t_k -> j_Omega'(u_bar(t_k); v(t_k))`, the derivative of the spatial L1 norm per time cell.
pub fn slice_l1_dir_derivs(cls: &SignClassification, v: &GridFunction) -> Vec<f64> {
    let spec = v.spec();
    let nt = spec.n_time();
    let mut out = vec![0.0; nt];
    for s in 0..spec.n_space() {
        let base = s * nt;
        for (k, (o, &x)) in out.iter_mut().zip(v.space_slice(s)).enumerate() {
            *o += abs_dir(cls.cells[base + k], x);
        }
    }
    let dx = spec.cell_measure_space();
    out.iter_mut().for_each(|o| *o *= dx);
    out
}

/// Directional derivative `j'(u_bar; v)` from the closed-form expressions.
pub fn j_dir_deriv(kind: SparsityKind, u_bar: &GridFunction, v: &GridFunction, cls: &SignClassification) -> f64 {
    assert_eq!(u_bar.spec(), v.spec(), "grid functions live on different grids");
    let spec = v.spec();
    match kind {
        SparsityKind::J1 => {
            let sum: f64 = v.values().iter().zip(&cls.cells).map(|(&x, &c)| abs_dir(c, x)).sum();
            sum * spec.cell_measure()
        }
        SparsityKind::J2 => {
            if cls.is_zero() {
                return fnspace::l2_l1(v);
            }
            let d = slice_l1_dir_derivs(cls, v);
            traj_dot(&cls.time_l1, &d, spec.cell_measure_time()) / cls.j2
        }
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            let mut sum = 0.0;
            for s in 0..spec.n_space() {
                let vs = v.space_slice(s);
                if cls.space_nonzero[s] {
                    let us = u_bar.space_slice(s);
                    let base = s * spec.n_time();
                    let dot: f64 = us
                        .iter()
                        .zip(vs)
                        .enumerate()
                        .map(|(k, (&a, &b))| if cls.cells[base + k] == Sign::Zero { 0.0 } else { a * b })
                        .sum::<f64>()
                        * dt;
                    sum += dot / cls.space_norms[s];
                } else {
                    sum += traj_norm(vs, dt);
                }
            }
            sum * spec.cell_measure_space()
        }
    }
}

/// `|a + h| - |a|` without cancellation when `a` and `a + h` share a sign.
#[inline]
pub fn abs_increment(a: f64, h: f64) -> f64 {
    let b = a + h;
    if a > 0.0 && b >= 0.0 {
        h
    } else if a < 0.0 && b <= 0.0 {
        -h
    } else if a == 0.0 {
        h.abs()
    } else {
        b.abs() - a.abs()
    }
}

/// `j(u + h) - j(u)`, evaluated so that the result is accurate relative to
/// the size of the increment rather than the size of `j(u)`.
pub fn j_increment(kind: SparsityKind, u: &GridFunction, h: &GridFunction) -> f64 {
    assert_eq!(u.spec(), h.spec(), "grid functions live on different grids");
    let spec = u.spec();
    let (ns, nt) = (spec.n_space(), spec.n_time());
    let (dx, dt) = (spec.cell_measure_space(), spec.cell_measure_time());
    match kind {
        SparsityKind::J1 => {
            u.values().iter().zip(h.values()).map(|(&a, &b)| abs_increment(a, b)).sum::<f64>() * spec.cell_measure()
        }
        SparsityKind::J2 => {
            let s0 = fnspace::time_slice_l1(u);
            let mut ds = vec![0.0; nt];
            for sp in 0..ns {
                for (k, (&a, &b)) in u.space_slice(sp).iter().zip(h.space_slice(sp)).enumerate() {
                    ds[k] += abs_increment(a, b);
                }
            }
            ds.iter_mut().for_each(|d| *d *= dx);
            let s1: Vec<f64> = s0.iter().zip(&ds).map(|(a, d)| a + d).collect();
            let denom = traj_norm(&s0, dt) + traj_norm(&s1, dt);
            if denom == 0.0 {
                return 0.0;
            }
            let num: f64 = ds.iter().zip(&s0).map(|(d, s)| d * (2.0 * s + d)).sum::<f64>() * dt;
            num / denom
        }
        SparsityKind::J3 => {
            let mut sum = 0.0;
            for sp in 0..ns {
                let (a, b) = (u.space_slice(sp), h.space_slice(sp));
                let na = traj_norm(a, dt);
                let nb2 = traj_dot(b, b, dt);
                let ab: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                let denom = na + traj_norm(&ab, dt);
                if denom > 0.0 {
                    sum += (2.0 * traj_dot(a, b, dt) + nb2) / denom;
                }
            }
            sum * dx
        }
    }
}
