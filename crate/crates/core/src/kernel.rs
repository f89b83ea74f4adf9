//! Discrete mollifier and exact circular convolution.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{Field, TorusGrid};

/// Radial profile `ω(r)` on `r ∈ [0, 1)`, up to normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    /// `(1 - r²)³`
    #[default]
    PolyBump,
    /// `(1 - r)⁴ (4r + 1)`
    Wendland,
}

impl Profile {
    pub fn eval(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::PolyBump => (1.0 - r * r).powi(3),
            Profile::Wendland => (1.0 - r).powi(4) * (4.0 * r + 1.0),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::PolyBump => "poly-bump",
            Profile::Wendland => "wendland",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly-bump" => Ok(Profile::PolyBump),
            "wendland" => Ok(Profile::Wendland),
            other => Err(Error::InvalidParams(format!(
                "unknown kernel profile '{other}'"
            ))),
        }
    }
}

/// Sampled, renormalised `ω_ε` on a specific grid.
///
/// Weights are symmetric under `y -> -y`, vanish for `|y h| >= ε` and sum to
/// one. The centre weight is stored last and set to `1 - Σ(others)`, so the
/// stored-order sum is exactly 1.
#[derive(Debug, Clone)]
pub struct Kernel {
    grid: TorusGrid,
    eps: f64,
    profile: Profile,
    offsets: Vec<[isize; 2]>,
    weights: Vec<f64>,
    /// Support radius in cells (padding width).
    radius: usize,
    /// Offset of `u(x - y)` relative to `x` inside the padded buffer.
    flat: Vec<usize>,
}

impl Kernel {
    pub fn new(grid: TorusGrid, eps: f64, profile: Profile) -> Result<Self> {
        let h = grid.spacing();
        if !(eps >= 4.0 * h) {
            return Err(Error::KernelBounds {
                eps,
                bound: "lower bound 4h",
                limit: 4.0 * h,
            });
        }
        let upper = grid.length() / 4.0;
        if !(eps <= upper) {
            return Err(Error::KernelBounds {
                eps,
                bound: "upper bound L/4",
                limit: upper,
            });
        }

        let radius = (eps / h).ceil() as isize;
        let second = if grid.dim() == 2 { radius } else { 0 };
        let mut offsets = Vec::new();
        let mut raw = Vec::new();
        for y0 in -radius..=radius {
            for y1 in -second..=second {
                if y0 == 0 && y1 == 0 {
                    continue;
                }
                let dist = h * ((y0 * y0 + y1 * y1) as f64).sqrt();
                if dist < eps {
                    let w = profile.eval(dist / eps);
                    if w > 0.0 {
                        offsets.push([y0, y1]);
                        raw.push(w);
                    }
                }
            }
        }
        let total: f64 = raw.iter().sum::<f64>() + profile.eval(0.0);
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let rest: f64 = weights.iter().sum();
        offsets.push([0, 0]);
        weights.push(1.0 - rest);

        let radius = radius as usize;
        let stride = grid.n() + 2 * radius;
        let r = radius as isize;
        let flat = offsets
            .iter()
            .map(|y| {
                if grid.dim() == 1 {
                    (r - y[0]) as usize
                } else {
                    ((r - y[0]) * stride as isize + (r - y[1])) as usize
                }
            })
            .collect();

        Ok(Kernel {
            grid,
            eps,
            profile,
            offsets,
            weights,
            radius,
            flat,
        })
    }

    #[inline]
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn profile(&self) -> Profile {
        self.profile
    }

    /// Integer offsets `y` with nonzero weight (centre last).
    pub fn offsets(&self) -> &[[isize; 2]] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight at offset `y`, zero outside the support.
    pub fn weight(&self, y: [isize; 2]) -> f64 {
        self.offsets
            .iter()
            .position(|&o| o == y)
            .map_or(0.0, |k| self.weights[k])
    }

    /// `Σ_y W(y) |y h|²`.
    pub fn second_moment(&self) -> f64 {
        let h = self.grid.spacing();
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(y, w)| w * h * h * ((y[0] * y[0] + y[1] * y[1]) as f64))
            .sum()
    }

    /// `C` in the long-wave expansion `B_ε[u] ≈ -C Δu`, i.e.
    /// `Σ_y W(y)|y h|² / (2d ε²)`.
    pub fn laplacian_coefficient(&self) -> f64 {
        self.second_moment() / (2.0 * self.grid.dim() as f64 * self.eps * self.eps)
    }

    /// Periodically padded copy of `u` with `radius` ghost layers per side.
    fn pad(&self, u: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let r = self.radius;
        let stride = n + 2 * r;
        let wrap = |k: usize| (k + n * (r / n + 1) - r) % n;
        if self.grid.dim() == 1 {
            (0..stride).map(|k| u[wrap(k)]).collect()
        } else {
            let mut out = Vec::with_capacity(stride * stride);
            for a in 0..stride {
                let row = wrap(a) * n;
                out.extend((0..stride).map(|b| u[row + wrap(b)]));
            }
            out
        }
    }

    #[inline]
    fn base(&self, idx: usize) -> usize {
        let n = self.grid.n();
        if self.grid.dim() == 1 {
            idx
        } else {
            (idx / n) * (n + 2 * self.radius) + idx % n
        }
    }

    /// `(ω_ε ∗ u)(x) = Σ_y W(y) u(x - y)` into `out`.
    pub(crate) fn convolve_into(&self, exec: Execution, u: &[f64], out: &mut [f64]) {
        let padded = self.pad(u);
        exec::fill(exec, out, |i| {
            let b = self.base(i);
            self.flat
                .iter()
                .zip(&self.weights)
                .map(|(&o, &w)| w * padded[b + o])
                .sum()
        });
    }

    /// `Σ_y W(y) (u(x) - u(x - y))` into `out`, i.e. `u - ω_ε ∗ u` without
    /// cancellation on constant data.
    pub(crate) fn smooth_defect_into(&self, exec: Execution, u: &[f64], out: &mut [f64]) {
        let padded = self.pad(u);
        exec::fill(exec, out, |i| {
            let b = self.base(i);
            let ui = u[i];
            self.flat
                .iter()
                .zip(&self.weights)
                .map(|(&o, &w)| w * (ui - padded[b + o]))
                .sum()
        });
    }

    pub fn convolve(&self, field: &Field) -> Result<Field> {
        self.convolve_with(Execution::default(), field)
    }

    pub fn convolve_with(&self, exec: Execution, field: &Field) -> Result<Field> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = vec![0.0; field.len()];
        self.convolve_into(exec, field.values(), &mut out);
        Ok(Field::from_vec(self.grid, out))
    }
}

/// Free-function form of [`Kernel::convolve`].
pub fn convolve(kernel: &Kernel, field: &Field) -> Result<Field> {
    kernel.convolve(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n, 1.0).unwrap()
    }

    #[test]
    fn support_count_1d() {
        let k = Kernel::new(grid1(64), 0.125, Profile::PolyBump).unwrap();
        assert_eq!(k.len(), 15);
        let mut ys: Vec<isize> = k.offsets().iter().map(|y| y[0]).collect();
        ys.sort();
        assert_eq!(ys, (-7..=7).collect::<Vec<_>>());
    }

    #[test]
    fn bounds_are_enforced() {
        let g = grid1(64);
        match Kernel::new(g, 0.05, Profile::PolyBump) {
            Err(Error::KernelBounds { bound, .. }) => assert!(bound.contains("4h")),
            other => panic!("unexpected {other:?}"),
        }
        match Kernel::new(g, 0.3, Profile::PolyBump) {
            Err(Error::KernelBounds { bound, .. }) => assert!(bound.contains("L/4")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(Kernel::new(g, 4.0 / 64.0, Profile::Wendland).is_ok());
        assert!(Kernel::new(g, 0.25, Profile::Wendland).is_ok());
    }

    #[test]
    fn symmetric_unit_mass_compact() {
        for dim in [1, 2] {
            let g = TorusGrid::new(dim, 32, 1.0).unwrap();
            for profile in [Profile::PolyBump, Profile::Wendland] {
                let k = Kernel::new(g, 0.2, profile).unwrap();
                let total: f64 = k.weights().iter().sum();
                assert_eq!(total, 1.0);
                for (y, w) in k.offsets().iter().zip(k.weights()) {
                    assert!(*w > 0.0);
                    assert_eq!(k.weight([-y[0], -y[1]]), *w);
                    let d = g.spacing() * ((y[0] * y[0] + y[1] * y[1]) as f64).sqrt();
                    assert!(d < 0.2);
                }
            }
        }
    }

    #[test]
    fn indicator_reproduces_weights() {
        let g = TorusGrid::new(2, 16, 1.0).unwrap();
        let k = Kernel::new(g, 0.25, Profile::PolyBump).unwrap();
        let mut v = vec![0.0; g.cells()];
        v[0] = 1.0;
        let out = k.convolve(&Field::new(g, v).unwrap()).unwrap();
        for i in 0..g.cells() {
            let c = g.coords(i);
            let wrap = |a: usize| if a > 8 { a as isize - 16 } else { a as isize };
            assert_eq!(out.values()[i], k.weight([wrap(c[0]), wrap(c[1])]));
        }
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let k = Kernel::new(grid1(64), 0.125, Profile::PolyBump).unwrap();
        let f = Field::zeros(grid1(32));
        assert!(matches!(k.convolve(&f), Err(Error::GridMismatch)));
    }

    #[test]
    fn profile_names_roundtrip() {
        for p in [Profile::PolyBump, Profile::Wendland] {
            assert_eq!(p.to_string().parse::<Profile>().unwrap(), p);
        }
        assert!("gauss".parse::<Profile>().is_err());
    }
}
