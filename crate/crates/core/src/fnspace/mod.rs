//! Space-time grids over `Omega x (0,T)` and piecewise-constant grid functions.
//!
//! A [`GridFunction`] stores one value per space-time cell, laid out with the
//! time index varying fastest (`index = space * time_cells + time`), so every
//! spatial trajectory `t -> u(x, t)` is a contiguous slice. All integrals use
//! midpoint quadrature, which is exact for piecewise constants.

mod io;
mod norms;

pub use io::{read_binary, read_csv, write_binary, write_csv};
pub use norms::{
    l1_l2, l2_l1, l2_linf, linf_l2, mixed_norms, space_slice_l2, time_slice_l1, time_slice_linf, traj_dot, traj_norm,
    MixedNorms,
};

use crate::error::{Error, Result};

/// Uniform tensor grid on a box `Omega` (dimension 1 or 2) times `(0, T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    cells: [usize; 2],
    extent: [f64; 2],
    time_cells: usize,
    horizon: f64,
}

impl GridSpec {
    pub fn new(spatial_cells: &[usize], spatial_extent: &[f64], time_cells: usize, horizon: f64) -> Result<Self> {
        let dim = spatial_cells.len();
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("spatial dimension must be 1 or 2, got {dim}")));
        }
        if spatial_extent.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} extents given for a {dim}-dimensional domain",
                spatial_extent.len()
            )));
        }
        if spatial_cells.iter().any(|&n| n == 0) || time_cells == 0 {
            return Err(Error::InvalidGrid("all cell counts must be at least 1".into()));
        }
        if spatial_extent.iter().any(|&l| !(l.is_finite() && l > 0.0)) || !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid("all extents and the horizon must be positive".into()));
        }
        let mut cells = [1; 2];
        let mut extent = [1.0; 2];
        cells[..dim].copy_from_slice(spatial_cells);
        extent[..dim].copy_from_slice(spatial_extent);
        Ok(GridSpec { dim, cells, extent, time_cells, horizon })
    }

    /// `Omega = (0,1)`, `T = 1`.
    pub fn unit(space_cells: usize, time_cells: usize) -> Result<Self> {
        Self::new(&[space_cells], &[1.0], time_cells, 1.0)
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim
    }

    pub fn spatial_cells(&self) -> &[usize] {
        &self.cells[..self.dim]
    }

    pub fn spatial_extent(&self) -> &[f64] {
        &self.extent[..self.dim]
    }

    pub fn n_space(&self) -> usize {
        self.cells[0] * self.cells[1]
    }

    pub fn n_time(&self) -> usize {
        self.time_cells
    }

    pub fn len(&self) -> usize {
        self.n_space() * self.time_cells
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Width of a spatial cell along axis `axis`.
    pub fn cell_width(&self, axis: usize) -> f64 {
        self.extent[axis] / self.cells[axis] as f64
    }

    pub fn cell_measure_space(&self) -> f64 {
        (0..self.dim).map(|d| self.cell_width(d)).product()
    }

    pub fn cell_measure_time(&self) -> f64 {
        self.horizon / self.time_cells as f64
    }

    pub fn cell_measure(&self) -> f64 {
        self.cell_measure_space() * self.cell_measure_time()
    }

    /// `|Omega|`
    pub fn space_measure(&self) -> f64 {
        self.extent[..self.dim].iter().product()
    }

    /// `|Omega| * T`
    pub fn total_measure(&self) -> f64 {
        self.space_measure() * self.horizon
    }

    #[inline]
    pub fn index(&self, space: usize, time: usize) -> usize {
        space * self.time_cells + time
    }

    /// Multi-index of a flat spatial index; axis 0 varies slowest.
    pub fn space_multi_index(&self, space: usize) -> [usize; 2] {
        [space / self.cells[1], space % self.cells[1]]
    }

    /// Cell-center coordinates of spatial cell `space` (unused axes are zero).
    pub fn space_center(&self, space: usize) -> [f64; 2] {
        let mi = self.space_multi_index(space);
        let mut x = [0.0; 2];
        for d in 0..self.dim {
            x[d] = (mi[d] as f64 + 0.5) * self.cell_width(d);
        }
        x
    }

    pub fn time_center(&self, time: usize) -> f64 {
        (time as f64 + 0.5) * self.cell_measure_time()
    }

    pub(crate) fn check_same(&self, other: &GridSpec) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Piecewise-constant function on a [`GridSpec`]; immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                space: i / spec.n_time(),
                time: i % spec.n_time(),
                value: values[i],
            });
        }
        Ok(GridFunction { spec, values })
    }

    pub(crate) fn from_vec(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        GridFunction { spec, values }
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn constant(spec: GridSpec, c: f64) -> Self {
        Self::from_vec(spec, vec![c; spec.len()])
    }

    /// Samples `f(x, t)` at cell centers.
    pub fn from_fn(spec: GridSpec, mut f: impl FnMut([f64; 2], f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for s in 0..spec.n_space() {
            let x = spec.space_center(s);
            for k in 0..spec.n_time() {
                values.push(f(x, spec.time_center(k)));
            }
        }
        Self::new(spec, values)
    }

    /// Builds values from `(space, time)` cell indices.
    pub fn from_cells(spec: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(spec.len());
        for s in 0..spec.n_space() {
            for k in 0..spec.n_time() {
                values.push(f(s, k));
            }
        }
        Self::new(spec, values)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, space: usize, time: usize) -> f64 {
        self.values[self.spec.index(space, time)]
    }

    /// The trajectory `t -> u(x_space, t)`.
    pub fn space_slice(&self, space: usize) -> &[f64] {
        let nt = self.spec.n_time();
        &self.values[space * nt..(space + 1) * nt]
    }

    /// The spatial snapshot `x -> u(x, t_time)` (copied, since it is strided).
    pub fn time_slice(&self, time: usize) -> Vec<f64> {
        (0..self.spec.n_space()).map(|s| self.get(s, time)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_vec(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.spec, other.spec, "grid functions live on different grids");
        Self::from_vec(
            self.spec,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Self {
        self.zip_map(other, |a, b| a + c * b)
    }

    /// `L2(Omega_T)` inner product.
    pub fn dot(&self, other: &GridFunction) -> f64 {
        assert_eq!(self.spec, other.spec, "grid functions live on different grids");
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.spec.cell_measure()
    }

    pub fn norm_l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum::<f64>() * self.spec.cell_measure()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}

/// Midpoint quadrature of `f` over `Omega_T`.
pub fn integrate(f: &GridFunction) -> f64 {
    f.values.iter().sum::<f64>() * f.spec.cell_measure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_one_integrates_to_measure() {
        let spec = GridSpec::unit(7, 5).unwrap();
        assert!((integrate(&GridFunction::constant(spec, 1.0)) - 1.0).abs() < 1e-14);
        assert_eq!(integrate(&GridFunction::zeros(spec)), 0.0);

        let spec = GridSpec::new(&[3, 4], &[2.0, 0.5], 6, 3.0).unwrap();
        let total = integrate(&GridFunction::constant(spec, 1.0));
        assert!((total - spec.total_measure()).abs() <= 1e-12 * spec.total_measure());
        assert!((spec.total_measure() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_indicator_converges_to_half() {
        // D = {0 < x < t < 1}; diagonal cells have x = t at the center and are excluded.
        let mut errors = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let spec = GridSpec::unit(n, n).unwrap();
            let f = GridFunction::from_fn(spec, |x, t| if x[0] < t { 1.0 } else { 0.0 }).unwrap();
            let err = (integrate(&f) - 0.5).abs();
            // Off by at most one diagonal layer of cells.
            assert!(err <= 1.0 / n as f64 + 1e-12, "n={n} err={err}");
            errors.push(err);
        }
        assert!(errors.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(GridSpec::new(&[], &[], 3, 1.0).is_err());
        assert!(GridSpec::new(&[1, 2, 3], &[1.0, 1.0, 1.0], 3, 1.0).is_err());
        assert!(GridSpec::new(&[0], &[1.0], 3, 1.0).is_err());
        assert!(GridSpec::new(&[2], &[-1.0], 3, 1.0).is_err());
        assert!(GridSpec::new(&[2], &[1.0], 3, 0.0).is_err());
        assert!(GridSpec::new(&[2], &[1.0, 2.0], 3, 1.0).is_err());
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let spec = GridSpec::unit(2, 2).unwrap();
        let err = GridFunction::new(spec, vec![0.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { space: 0, time: 1, .. }));
        assert!(GridFunction::new(spec, vec![0.0; 3]).is_err());
    }

    #[test]
    fn layout_keeps_trajectories_contiguous() {
        let spec = GridSpec::new(&[2, 3], &[1.0, 1.0], 4, 1.0).unwrap();
        let f = GridFunction::from_cells(spec, |s, k| (10 * s + k) as f64).unwrap();
        assert_eq!(f.space_slice(4), &[40.0, 41.0, 42.0, 43.0]);
        assert_eq!(f.time_slice(2), vec![2.0, 12.0, 22.0, 32.0, 42.0, 52.0]);
        assert_eq!(spec.space_multi_index(4), [1, 1]);
        let c = spec.space_center(5);
        assert!((c[0] - 0.75).abs() < 1e-15 && (c[1] - 5.0 / 6.0).abs() < 1e-15);
    }
}
