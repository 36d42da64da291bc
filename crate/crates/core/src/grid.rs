//! Uniform sampling lattice on a truncated line and grid-sampled functions.
//!
//! The computational domain is `[-L, L)` with `M` equispaced nodes,
//! `x_i = -L + i*dx`, `dx = 2L/M`. Functions are treated as identically zero
//! outside the domain; every nonlocal operator in this crate truncates its
//! integrals accordingly. `M` is required to be a power of two so the padded
//! transforms stay FFT-friendly.

use crate::error::{Error, Result};

/// Default far-field tolerance: a sampled function counts as "decaying" when
/// its outer 10% of nodes stay below this in absolute value.
pub const FAR_FIELD_TOL: f64 = 1e-12;

/// Sampling lattice on `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    points: usize,
}

impl Grid {
    /// A lattice of `points` nodes on `[-half_width, half_width)`.
    ///
    /// `points` must be an even power of two and `half_width` positive.
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::invalid(format!(
                "grid point count must be a power of two >= 4, got {points}"
            )));
        }
        Ok(Grid { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Node spacing `dx = 2L/M`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Coordinate of node `i`.
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|i| self.node(i))
    }

    /// Same window, `factor` times as many nodes.
    pub fn refined(&self, factor: usize) -> Result<Grid> {
        if factor == 0 || !factor.is_power_of_two() {
            return Err(Error::invalid(format!(
                "refinement factor must be a power of two, got {factor}"
            )));
        }
        Grid::new(self.half_width, self.points * factor)
    }

    pub(crate) fn key(&self) -> (f64, usize) {
        (self.half_width, self.points)
    }
}

/// Grid samples of a real function, the home of `f`, `omega`, `theta`, `h`.
///
/// Values are checked finite at construction. Decay towards the domain edges
/// is *checked, not enforced*: see [`SampledFn::is_decaying`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFn {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFn {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::invalid(format!(
                "value count {} does not match grid size {}",
                values.len(),
                grid.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("sampled function values"));
        }
        Ok(SampledFn { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFn {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Sample a closure at the grid nodes.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        SampledFn::new(grid, grid.nodes().map(f).collect())
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest |value| over the outer 10% of nodes (5% per side).
    pub fn far_field_max(&self) -> f64 {
        let edge = (self.len() / 20).max(1);
        let left = self.values[..edge].iter();
        let right = self.values[self.len() - edge..].iter();
        left.chain(right).fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Whether the far field sits below `tol` (use [`FAR_FIELD_TOL`] by default).
    pub fn is_decaying(&self, tol: f64) -> bool {
        self.far_field_max() <= tol
    }

    pub fn same_grid(&self, other: &SampledFn) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                expected: self.grid.key(),
                got: other.grid.key(),
            })
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> SampledFn {
        SampledFn {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two functions on the same grid.
    ///
    /// Panics on grid mismatch; this is an internal building block, public
    /// entry points validate grids up front.
    pub fn zip_map(&self, other: &SampledFn, f: impl Fn(f64, f64) -> f64) -> SampledFn {
        assert_eq!(self.grid, other.grid, "zip_map on mismatched grids");
        SampledFn {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> SampledFn {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &SampledFn) -> SampledFn {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledFn) -> SampledFn {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &SampledFn) -> SampledFn {
        self.zip_map(other, |a, b| a * b)
    }

    /// Quadrature-weighted L2 norm, `sqrt(dx * sum v_i^2)`.
    pub fn norm_l2(&self) -> f64 {
        let dx = self.grid.spacing();
        (dx * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    /// Quadrature-weighted Lp norm.
    pub fn norm_lp(&self, p: f64) -> f64 {
        let dx = self.grid.spacing();
        (dx * self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>()).powf(1.0 / p)
    }

    pub fn norm_max(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// L2 pairing `dx * sum u_i v_i`, the discrete mirror of `<u|v>_{L2}`.
    pub fn inner(&self, other: &SampledFn) -> f64 {
        assert_eq!(self.grid, other.grid, "inner product on mismatched grids");
        self.grid.spacing()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .sum::<f64>()
    }

    /// Shift by a whole number of cells, `(tau_c u)(x_i) = u(x_{i+c})`,
    /// with zero fill where the shift leaves the window.
    pub fn shift_cells(&self, cells: isize) -> SampledFn {
        let n = self.len() as isize;
        let values = (0..n)
            .map(|i| {
                let j = i + cells;
                if (0..n).contains(&j) {
                    self.values[j as usize]
                } else {
                    0.0
                }
            })
            .collect();
        SampledFn {
            grid: self.grid,
            values,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_tile_the_window() {
        let g = Grid::new(20.0, 8).unwrap();
        assert_eq!(g.spacing(), 5.0);
        assert_eq!(g.node(0), -20.0);
        assert_eq!(g.node(7), 15.0);
        assert_eq!(g.spacing() * g.len() as f64, 2.0 * g.half_width());
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(20.0, 12).is_err());
        assert!(Grid::new(20.0, 2).is_err());
        assert!(Grid::new(-1.0, 8).is_err());
        assert!(Grid::new(f64::NAN, 8).is_err());
    }

    #[test]
    fn sampled_fn_rejects_non_finite() {
        let g = Grid::new(1.0, 4).unwrap();
        assert!(SampledFn::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(SampledFn::new(g, vec![0.0; 3]).is_err());
    }

    #[test]
    fn far_field_check() {
        let g = Grid::new(10.0, 64).unwrap();
        let u = SampledFn::from_fn(g, |x| (-x * x).exp()).unwrap();
        assert!(u.is_decaying(FAR_FIELD_TOL));
        let v = SampledFn::from_fn(g, |_| 1.0).unwrap();
        assert!(!v.is_decaying(FAR_FIELD_TOL));
    }

    #[test]
    fn shift_cells_relabels_and_zero_fills() {
        let g = Grid::new(2.0, 4).unwrap();
        let u = SampledFn::new(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = u.shift_cells(1);
        assert_eq!(s.values(), &[2.0, 3.0, 4.0, 0.0]);
        let s = u.shift_cells(-2);
        assert_eq!(s.values(), &[0.0, 0.0, 1.0, 2.0]);
    }
}
