//! The discrete flat torus and cell-averaged fields living on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

/// Uniform periodic grid with `n` cells per axis on `[0, L)^dim`.
///
/// Cells are stored row-major: in 2D, index `i * n + j` where `i` runs along
/// axis 0 and `j` along axis 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    length: f64,
}

impl TorusGrid {
    pub fn new(dim: usize, n: usize, length: f64) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if n < 8 {
            return Err(Error::InvalidGrid(format!(
                "need at least 8 cells per axis, got {n}"
            )));
        }
        if n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "cells per axis must be even, got {n}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive, got {length}"
            )));
        }
        Ok(TorusGrid { dim, n, length })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per axis.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Side length of the periodic box.
    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Total number of cells, `n^dim`.
    #[inline]
    pub fn cells(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `|Ω| = L^dim`.
    #[inline]
    pub fn measure(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Linear index to per-axis coordinates (unused axes are 0).
    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.n, idx % self.n]
        }
    }

    #[inline]
    pub fn index(&self, c: [usize; 2]) -> usize {
        if self.dim == 1 {
            c[0]
        } else {
            c[0] * self.n + c[1]
        }
    }

    /// Index of the cell `shift` steps away from `idx` along `axis`, wrapping.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, shift: isize) -> usize {
        let n = self.n as isize;
        let mut c = self.coords(idx);
        c[axis] = (c[axis] as isize + shift).rem_euclid(n) as usize;
        self.index(c)
    }

    /// Cell-centre position.
    pub fn center(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        let c = self.coords(idx);
        let x = (c[0] as f64 + 0.5) * h;
        if self.dim == 1 {
            [x, 0.0]
        } else {
            [x, (c[1] as f64 + 0.5) * h]
        }
    }
}

/// Cell averages of a scalar quantity on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl Field {
    /// Wraps raw values; rejects a wrong length or any non-finite entry.
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.cells() {
            return Err(Error::InvalidField(format!(
                "expected {} values, got {}",
                grid.cells(),
                values.len()
            )));
        }
        let f = Field { grid, values };
        f.check_finite()?;
        Ok(f)
    }

    /// Unchecked constructor for operator outputs built from finite inputs.
    pub(crate) fn from_vec(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.cells());
        Field { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Field::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Field {
            grid,
            values: vec![c; grid.cells()],
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.cells()).map(|i| f(grid.center(i))).collect();
        Field::new(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.values.iter().position(|v| !v.is_finite()) {
            Some(cell) => Err(Error::NonFinite {
                cell,
                value: self.values[cell],
            }),
            None => Ok(()),
        }
    }

    pub fn check_nonnegative(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(cell) => Err(Error::NegativeDensity {
                cell,
                value: self.values[cell],
            }),
            None => Ok(()),
        }
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Plain cell sum `Σ v`.
    pub fn sum(&self) -> f64 {
        exec::sum(Execution::default(), self.len(), |i| self.values[i])
    }

    /// Midpoint quadrature `h^d Σ v`.
    pub fn integral(&self) -> f64 {
        self.grid.cell_volume() * self.sum()
    }

    /// `h^d Σ v w`.
    pub fn dot(&self, other: &Field) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_volume()
            * exec::sum(Execution::default(), self.len(), |i| {
                self.values[i] * other.values[i]
            })
    }

    pub fn mean(&self) -> f64 {
        self.integral() / self.grid.measure()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(h^d Σ |v|^q)^{1/q}`; `q = ∞` gives the max norm.
    pub fn norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        let s = exec::sum(Execution::default(), self.len(), |i| {
            self.values[i].abs().powf(q)
        });
        (self.grid.cell_volume() * s).powf(1.0 / q)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64 + Sync + Send) -> Field {
        let mut out = vec![0.0; self.len()];
        exec::fill(Execution::default(), &mut out, |i| f(self.values[i]));
        Field::from_vec(self.grid, out)
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64 + Sync + Send) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        let mut out = vec![0.0; self.len()];
        exec::fill(Execution::default(), &mut out, |i| {
            f(self.values[i], other.values[i])
        });
        Field::from_vec(self.grid, out)
    }

    /// Translate by whole cells: `out(x) = self(x - shift)`.
    pub fn shifted(&self, shift: [isize; 2]) -> Field {
        let g = self.grid;
        let values = (0..g.cells())
            .map(|i| {
                let mut j = g.neighbor(i, 0, -shift[0]);
                if g.dim() == 2 {
                    j = g.neighbor(j, 1, -shift[1]);
                }
                self.values[j]
            })
            .collect();
        Field::from_vec(g, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_grid_examples() {
        let g = TorusGrid::new(1, 256, 1.0).unwrap();
        assert_eq!(g.spacing(), 1.0 / 256.0);
        let g2 = TorusGrid::new(2, 128, 1.0).unwrap();
        assert_eq!(g2.cells(), 16384);
        assert!(g2.cell_volume() > 0.0);
    }

    #[test]
    fn build_grid_rejects_bad_input() {
        assert!(TorusGrid::new(1, 7, 1.0).is_err());
        assert!(TorusGrid::new(1, 6, 1.0).is_err());
        assert!(TorusGrid::new(1, 10, 1.0).is_ok());
        assert!(TorusGrid::new(1, 9, 1.0).is_err());
        assert!(TorusGrid::new(1, 16, 0.0).is_err());
        assert!(TorusGrid::new(1, 16, -1.0).is_err());
        assert!(TorusGrid::new(3, 16, 1.0).is_err());
    }

    #[test]
    fn neighbors_wrap() {
        let g = TorusGrid::new(2, 8, 1.0).unwrap();
        assert_eq!(g.neighbor(0, 0, -1), 7 * 8);
        assert_eq!(g.neighbor(0, 1, -1), 7);
        assert_eq!(g.neighbor(g.index([7, 7]), 1, 1), g.index([7, 0]));
        assert_eq!(g.neighbor(3, 0, 16), 3);
    }

    #[test]
    fn field_rejects_nan_and_wrong_length() {
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        assert!(Field::new(g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        match Field::new(g, v) {
            Err(Error::NonFinite { cell, .. }) => assert_eq!(cell, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_roundtrip() {
        let g = TorusGrid::new(2, 8, 1.0).unwrap();
        let f = Field::from_fn(g, |x| x[0] + 10.0 * x[1]).unwrap();
        assert_eq!(f.shifted([3, -2]).shifted([-3, 2]), f);
        assert_eq!(f.shifted([1, 0]).values()[g.index([1, 0])], f.values()[0]);
    }
}
