//! Right-hand side of `∂ₜu = div(u ∇μ) + u G(p)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::{Field, TorusGrid};
use crate::kernel::Kernel;
use crate::ops;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    /// `G(p) = p_H - p`
    #[default]
    Growth,
    /// `G ≡ 0`
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `μ = p + B_ε(u)`
    #[default]
    Nonlocal,
    /// `μ = p - κΔu`
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub gamma: f64,
    pub p_h: f64,
    pub eps: f64,
    #[serde(default)]
    pub source: Source,
    #[serde(default)]
    pub variant: Variant,
    /// Coefficient `κ` of the local variant, `μ = p - κΔu`.
    #[serde(default = "unit")]
    pub local_coefficient: f64,
}

fn unit() -> f64 {
    1.0
}

impl ModelParams {
    pub fn new(gamma: f64, p_h: f64, eps: f64, source: Source, variant: Variant) -> Result<Self> {
        let p = ModelParams {
            gamma,
            p_h,
            eps,
            source,
            variant,
            local_coefficient: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "gamma must be >= 1, got {}",
                self.gamma
            )));
        }
        if !(self.p_h > 0.0 && self.p_h.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "p_h must be positive, got {}",
                self.p_h
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        if !(self.local_coefficient > 0.0 && self.local_coefficient.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "local_coefficient must be positive, got {}",
                self.local_coefficient
            )));
        }
        Ok(())
    }

    /// Homeostatic density `p_H^{1/γ}`.
    pub fn homeostatic_density(&self) -> f64 {
        self.p_h.powf(1.0 / self.gamma)
    }

    fn check_kernel(&self, kernel: &Kernel) -> Result<()> {
        if self.eps != kernel.eps() {
            return Err(Error::InvalidParams(format!(
                "model eps {} does not match kernel eps {}",
                self.eps,
                kernel.eps()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub u: Field,
    pub t: f64,
}

impl ModelState {
    pub fn new(u: Field, t: f64) -> Result<Self> {
        u.check_nonnegative()?;
        Ok(ModelState { u, t })
    }
}

#[inline]
pub(crate) fn pow_gamma(u: f64, gamma: f64) -> f64 {
    u.powf(gamma)
}

/// `p = u^γ`.
pub fn pressure(u: &Field, params: &ModelParams) -> Result<Field> {
    u.check_nonnegative()?;
    Ok(u.map(|v| pow_gamma(v, params.gamma)))
}

/// `B_ε[u] = (u - ω_ε ∗ u) / ε²`, evaluated as `Σ_y W(y)(u(x) - u(x-y)) / ε²`.
pub fn b_eps(u: &Field, kernel: &Kernel) -> Result<Field> {
    b_eps_with(Execution::default(), u, kernel)
}

pub fn b_eps_with(exec: Execution, u: &Field, kernel: &Kernel) -> Result<Field> {
    if u.grid() != kernel.grid() {
        return Err(Error::GridMismatch);
    }
    let inv = 1.0 / (kernel.eps() * kernel.eps());
    let mut out = vec![0.0; u.len()];
    kernel.smooth_defect_into(exec, u.values(), &mut out);
    out.iter_mut().for_each(|v| *v *= inv);
    Ok(Field::from_vec(*u.grid(), out))
}

/// `μ = p + B_ε(u)` or, for the local variant, `μ = p - κΔu`.
pub fn chemical_potential(u: &Field, params: &ModelParams, kernel: &Kernel) -> Result<Field> {
    chemical_potential_with(Execution::default(), u, params, kernel)
}

pub fn chemical_potential_with(
    exec: Execution,
    u: &Field,
    params: &ModelParams,
    kernel: &Kernel,
) -> Result<Field> {
    params.check_kernel(kernel)?;
    let p = pressure(u, params)?;
    let surface = match params.variant {
        Variant::Nonlocal => b_eps_with(exec, u, kernel)?,
        Variant::Local => {
            let kappa = params.local_coefficient;
            ops::laplacian_with(exec, u).map(|v| -kappa * v)
        }
    };
    Ok(p.zip_map(&surface, |a, b| a + b))
}

/// Donor-cell mobility on the `+` face of each cell along `axis`: the density
/// of whichever side has the larger potential.
#[inline]
pub(crate) fn upwind(u: &[f64], mu: &[f64], i: usize, j: usize) -> f64 {
    if mu[j] > mu[i] {
        u[j]
    } else {
        u[i]
    }
}

/// Face mobilities `M[axis][i]` for the face between `i` and its `+` neighbour.
pub(crate) fn face_mobilities(u: &Field, mu: &Field) -> Vec<Vec<f64>> {
    let g = *u.grid();
    let (uv, mv) = (u.values(), mu.values());
    (0..g.dim())
        .map(|axis| {
            let mut m = vec![0.0; g.cells()];
            exec::fill(Execution::default(), &mut m, |i| {
                upwind(uv, mv, i, g.neighbor(i, axis, 1))
            });
            m
        })
        .collect()
}

/// `div(M ∇v)` with given face coefficients, written into `out`.
pub(crate) fn weighted_divergence_into(
    exec: Execution,
    grid: &TorusGrid,
    mobility: &[Vec<f64>],
    v: &[f64],
    out: &mut [f64],
) {
    let inv = 1.0 / (grid.spacing() * grid.spacing());
    exec::fill(exec, out, |i| {
        let mut s = 0.0;
        for (axis, m) in mobility.iter().enumerate() {
            let ip = grid.neighbor(i, axis, 1);
            let im = grid.neighbor(i, axis, -1);
            s += m[i] * (v[ip] - v[i]) - m[im] * (v[i] - v[im]);
        }
        s * inv
    });
}

/// Conservative upwind discretisation of `div(u ∇μ)`.
///
/// Face flux `F = M (μ₊ - μ₋) / h` with `M` the density of the higher-potential
/// side; each cell sums its own faces so the total telescopes to zero.
pub fn flux_divergence(u: &Field, mu: &Field) -> Result<Field> {
    flux_divergence_with(Execution::default(), u, mu)
}

pub fn flux_divergence_with(exec: Execution, u: &Field, mu: &Field) -> Result<Field> {
    u.same_grid(mu)?;
    if let Some(cell) = u.values().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeDensity {
            cell,
            value: u.values()[cell],
        });
    }
    let g = *u.grid();
    let (uv, mv) = (u.values(), mu.values());
    let inv = 1.0 / (g.spacing() * g.spacing());
    let mut out = vec![0.0; g.cells()];
    exec::fill(exec, &mut out, |i| {
        let mut s = 0.0;
        for axis in 0..g.dim() {
            let ip = g.neighbor(i, axis, 1);
            let im = g.neighbor(i, axis, -1);
            let right = upwind(uv, mv, i, ip) * (mv[ip] - mv[i]);
            let left = upwind(uv, mv, im, i) * (mv[i] - mv[im]);
            s += right - left;
        }
        s * inv
    });
    Ok(Field::from_vec(g, out))
}

/// `u G(p)`.
pub fn source_term(u: &Field, params: &ModelParams) -> Field {
    match params.source {
        Source::Growth => {
            let (gamma, p_h) = (params.gamma, params.p_h);
            u.map(|v| v * (p_h - pow_gamma(v, gamma)))
        }
        Source::None => Field::zeros(*u.grid()),
    }
}

/// `div(u ∇μ) + u G(p)`.
pub fn rhs(state: &ModelState, params: &ModelParams, kernel: &Kernel) -> Result<Field> {
    let mu = chemical_potential(&state.u, params, kernel)?;
    let div = flux_divergence(&state.u, &mu)?;
    let src = source_term(&state.u, params);
    Ok(div.zip_map(&src, |a, b| a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Profile;

    fn setup(n: usize, eps: f64) -> (TorusGrid, Kernel) {
        let g = TorusGrid::new(1, n, 1.0).unwrap();
        (g, Kernel::new(g, eps, Profile::PolyBump).unwrap())
    }

    fn growth(gamma: f64, eps: f64) -> ModelParams {
        ModelParams::new(gamma, 0.7, eps, Source::Growth, Variant::Nonlocal).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.5, 0.7, 0.1, Source::Growth, Variant::Nonlocal).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.1, Source::Growth, Variant::Nonlocal).is_err());
        assert!(ModelParams::new(1.0, 0.7, 0.1, Source::Growth, Variant::Local).is_ok());
    }

    #[test]
    fn pressure_examples() {
        let (g, _) = setup(16, 0.25);
        let p = growth(10.0, 0.25);
        assert!(pressure(&Field::zeros(g), &p)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(pressure(&Field::constant(g, 1.0), &p)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 1.0));
        let half = pressure(&Field::constant(g, 0.5), &p).unwrap();
        assert!(half.values().iter().all(|&v| v == 0.0009765625));
    }

    #[test]
    fn pressure_rejects_negative_cell() {
        let (g, _) = setup(16, 0.25);
        let mut v = vec![0.1; 16];
        v[5] = -1e-3;
        let u = Field::new(g, v).unwrap();
        match pressure(&u, &growth(2.0, 0.25)) {
            Err(Error::NegativeDensity { cell, .. }) => assert_eq!(cell, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn b_eps_kills_constants_exactly() {
        let (g, k) = setup(64, 0.125);
        let b = b_eps(&Field::constant(g, 0.37), &k).unwrap();
        assert!(b.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn uniform_state_reduces_to_scalar_ode() {
        let (g, k) = setup(64, 0.125);
        let params = growth(10.0, 0.125);
        let c = 0.5;
        let state = ModelState::new(Field::constant(g, c), 0.0).unwrap();
        let r = rhs(&state, &params, &k).unwrap();
        let expect = c * (0.7 - 0.5f64.powf(10.0));
        assert_eq!(expect, 0.34951171875);
        assert!(r.values().iter().all(|&v| v == expect));

        let local = ModelParams {
            variant: Variant::Local,
            ..params
        };
        let r = rhs(&state, &local, &k).unwrap();
        assert!(r.values().iter().all(|&v| v == expect));
    }

    #[test]
    fn homeostatic_state_is_stationary() {
        let (g, k) = setup(64, 0.125);
        let params = growth(10.0, 0.125);
        let c = params.homeostatic_density();
        let src = source_term(&Field::constant(g, c), &params);
        // c^γ rounds back to p_H only up to one ulp.
        assert!(src.values().iter().all(|v| v.abs() < 1e-15));
        let state = ModelState::new(Field::constant(g, c), 0.0).unwrap();
        let r = rhs(&state, &params, &k).unwrap();
        assert!(r.values().iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn no_source_uniform_is_exactly_stationary() {
        let (g, k) = setup(32, 0.125);
        let params = ModelParams {
            source: Source::None,
            ..growth(3.0, 0.125)
        };
        for c in [0.0, 0.3, 1.7] {
            let state = ModelState::new(Field::constant(g, c), 0.0).unwrap();
            assert!(rhs(&state, &params, &k)
                .unwrap()
                .values()
                .iter()
                .all(|&v| v == 0.0));
        }
    }

    #[test]
    fn source_examples() {
        let (g, _) = setup(16, 0.25);
        let params = growth(10.0, 0.25);
        let s = source_term(&Field::constant(g, 0.5), &params);
        assert!(s.values().iter().all(|&v| v == 0.34951171875));
        assert!(source_term(&Field::zeros(g), &params)
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let none = ModelParams {
            source: Source::None,
            ..params
        };
        assert!(source_term(&Field::constant(g, 0.5), &none)
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn empty_cell_only_receives() {
        // u = (1, 0, 1, ...) with μ pulling mass into cell 1 from both sides.
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        let u = Field::new(g, vec![1.0, 0.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5]).unwrap();
        let mu = Field::new(g, vec![2.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let d = flux_divergence(&u, &mu).unwrap();
        let h2 = g.spacing() * g.spacing();
        // Inflow from cell 0 (donor u=1, Δμ=2) and cell 2 (donor u=0.5, Δμ=1).
        assert!((d.values()[1] - (2.0 + 0.5) / h2).abs() < 1e-9);
        // Reversing μ makes cell 1 the donor; with u=0 nothing leaves it.
        let mu_rev = mu.map(|v| -v);
        let d = flux_divergence(&u, &mu_rev).unwrap();
        assert_eq!(d.values()[1], 0.0);
    }

    #[test]
    fn constant_mu_gives_zero_flux() {
        let (g, _) = setup(16, 0.25);
        let u = Field::from_fn(g, |x| 1.0 + x[0]).unwrap();
        let d = flux_divergence(&u, &Field::constant(g, 4.2)).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn flux_rejects_negative_mobility() {
        let g = TorusGrid::new(1, 8, 1.0).unwrap();
        let mut v = vec![0.5; 8];
        v[2] = -0.1;
        let u = Field::new(g, v).unwrap();
        assert!(matches!(
            flux_divergence(&u, &Field::zeros(g)),
            Err(Error::NegativeDensity { cell: 2, .. })
        ));
    }

    #[test]
    fn eps_mismatch_rejected() {
        let (g, k) = setup(64, 0.125);
        let params = growth(2.0, 0.1);
        assert!(chemical_potential(&Field::constant(g, 0.5), &params, &k).is_err());
    }
}
