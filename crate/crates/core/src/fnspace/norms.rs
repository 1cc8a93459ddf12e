use serde::Serialize;

use super::GridFunction;

/// `t_k -> ||u(t_k)||_{L1(Omega)}` for every time cell.
pub fn time_slice_l1(u: &GridFunction) -> Vec<f64> {
    let spec = u.spec();
    let dx = spec.cell_measure_space();
    let mut out = vec![0.0; spec.n_time()];
    for s in 0..spec.n_space() {
        for (o, v) in out.iter_mut().zip(u.space_slice(s)) {
            *o += v.abs();
        }
    }
    out.iter_mut().for_each(|o| *o *= dx);
    out
}

/// `t_k -> ||u(t_k)||_{Linf(Omega)}` for every time cell.
pub fn time_slice_linf(u: &GridFunction) -> Vec<f64> {
    let spec = u.spec();
    let mut out = vec![0.0f64; spec.n_time()];
    for s in 0..spec.n_space() {
        for (o, v) in out.iter_mut().zip(u.space_slice(s)) {
            *o = o.max(v.abs());
        }
    }
    out
}

/// `x_s -> ||u(x_s, .)||_{L2(0,T)}` for every spatial cell.
pub fn space_slice_l2(u: &GridFunction) -> Vec<f64> {
    let spec = u.spec();
    let dt = spec.cell_measure_time();
    (0..spec.n_space())
        .map(|s| (u.space_slice(s).iter().map(|v| v * v).sum::<f64>() * dt).sqrt())
        .collect()
}

/// `L2(0,T)` norm of a single trajectory.
pub fn traj_norm(f: &[f64], dt: f64) -> f64 {
    (f.iter().map(|v| v * v).sum::<f64>() * dt).sqrt()
}

/// `L2(0,T)` inner product of two trajectories.
pub fn traj_dot(f: &[f64], g: &[f64], dt: f64) -> f64 {
    f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * dt
}

/// `||u||_{L2(0,T; L1(Omega))}`
pub fn l2_l1(u: &GridFunction) -> f64 {
    let dt = u.spec().cell_measure_time();
    traj_norm(&time_slice_l1(u), dt)
}

/// `||u||_{L2(0,T; Linf(Omega))}`
pub fn l2_linf(u: &GridFunction) -> f64 {
    let dt = u.spec().cell_measure_time();
    traj_norm(&time_slice_linf(u), dt)
}

/// `||u||_{L1(Omega; L2(0,T))}`
pub fn l1_l2(u: &GridFunction) -> f64 {
    space_slice_l2(u).iter().sum::<f64>() * u.spec().cell_measure_space()
}

/// `||u||_{Linf(Omega; L2(0,T))}`
pub fn linf_l2(u: &GridFunction) -> f64 {
    space_slice_l2(u).into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedNorms {
    /// `t_k -> ||u(t_k)||_{L1(Omega)}`
    pub time_profile_l1: Vec<f64>,
    /// `x_s -> ||u(x_s)||_{L2(0,T)}`
    pub space_profile_l2: Vec<f64>,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub l2_l1: f64,
    pub l1_l2: f64,
    pub l2_linf: f64,
    pub linf_l2: f64,
}

pub fn mixed_norms(u: &GridFunction) -> MixedNorms {
    let spec = u.spec();
    let time_profile_l1 = time_slice_l1(u);
    let space_profile_l2 = space_slice_l2(u);
    MixedNorms {
        l1: u.norm_l1(),
        l2: u.norm_l2(),
        linf: u.norm_inf(),
        l2_l1: traj_norm(&time_profile_l1, spec.cell_measure_time()),
        l1_l2: space_profile_l2.iter().sum::<f64>() * spec.cell_measure_space(),
        l2_linf: l2_linf(u),
        linf_l2: space_profile_l2.iter().copied().fold(0.0, f64::max),
        time_profile_l1,
        space_profile_l2,
    }
}
