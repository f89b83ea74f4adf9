//! Energy, entropy, dissipation rates and the residuals monitored along
//! trajectories.
//!
//! Every integral is a midpoint quadrature `h^d Σ f`. Gradients inside
//! dissipation terms are forward differences, which pair exactly with the
//! face fluxes of the stepper under summation by parts.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::grid::Field;
use crate::kernel::Kernel;
use crate::model::{self, ModelParams, ModelState, Source, Variant};
use crate::ops;

/// Pressure level (relative to `p_H`) above which a cell counts as tumour.
pub const TUMOR_ZONE_THRESHOLD: f64 = 1e-3;

/// One time sample of every monitored functional.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub mean: f64,
    pub energy: f64,
    pub entropy: f64,
    /// `Φ(u|ū)`; NaN for the zero state.
    pub entropy_relative: f64,
    pub min_u: f64,
    pub max_u: f64,
    /// CKP gap; NaN for the zero state.
    pub ckp_gap: f64,
    pub degiorgi_excess: f64,
    pub graph_residual: f64,
    pub complementarity_residual: f64,
    pub pairing: f64,
    pub dissipation_flux: f64,
    pub dissipation_entropy_nonlocal: f64,
    pub dissipation_entropy_porous: f64,
    pub entropy_source: f64,
    /// `∫ u μ G(p)`, the right side of the energy balance.
    pub energy_source: f64,
    /// Measure of `{p > 1e-3 p_H}`.
    pub tumor_zone: f64,
}

impl DiagnosticsRecord {
    /// Column names in CSV order.
    pub const COLUMNS: [&'static str; 19] = [
        "t",
        "mass",
        "mean",
        "energy",
        "entropy",
        "entropy_relative",
        "min_u",
        "max_u",
        "ckp_gap",
        "degiorgi_excess",
        "graph_residual",
        "complementarity_residual",
        "pairing",
        "dissipation_flux",
        "dissipation_entropy_nonlocal",
        "dissipation_entropy_porous",
        "entropy_source",
        "energy_source",
        "tumor_zone",
    ];

    pub fn to_row(&self) -> [f64; 19] {
        [
            self.t,
            self.mass,
            self.mean,
            self.energy,
            self.entropy,
            self.entropy_relative,
            self.min_u,
            self.max_u,
            self.ckp_gap,
            self.degiorgi_excess,
            self.graph_residual,
            self.complementarity_residual,
            self.pairing,
            self.dissipation_flux,
            self.dissipation_entropy_nonlocal,
            self.dissipation_entropy_porous,
            self.entropy_source,
            self.energy_source,
            self.tumor_zone,
        ]
    }

    pub fn from_row(r: &[f64; 19]) -> Self {
        DiagnosticsRecord {
            t: r[0],
            mass: r[1],
            mean: r[2],
            energy: r[3],
            entropy: r[4],
            entropy_relative: r[5],
            min_u: r[6],
            max_u: r[7],
            ckp_gap: r[8],
            degiorgi_excess: r[9],
            graph_residual: r[10],
            complementarity_residual: r[11],
            pairing: r[12],
            dissipation_flux: r[13],
            dissipation_entropy_nonlocal: r[14],
            dissipation_entropy_porous: r[15],
            entropy_source: r[16],
            energy_source: r[17],
            tumor_zone: r[18],
        }
    }
}

/// Entropy density kernel `g(x) = x log x - x + 1` with `0 log 0 = 0`.
#[inline]
fn entropy_density(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln() - x + 1.0
    } else {
        1.0
    }
}

#[inline]
fn xlogy(x: f64, ratio: f64) -> f64 {
    if x > 0.0 {
        x * ratio.ln()
    } else {
        0.0
    }
}

fn sum_cells(u: &Field, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    exec::sum(Execution::default(), u.len(), f)
}

/// `Σ_axes Σ_x D⁺a · D⁺b` (no volume factor).
fn forward_pairing(a: &Field, b: &Field) -> f64 {
    (0..a.grid().dim())
        .map(|axis| {
            let da = ops::forward_diff(a, axis);
            let db = ops::forward_diff(b, axis);
            sum_cells(a, |i| da.values()[i] * db.values()[i])
        })
        .sum()
}

/// `E(u)`: interaction term via `(h^d/2) Σ u B_ε u` plus `∫ u^{γ+1}/(γ+1)`.
/// The local variant uses `(κ/2)∫|∇u|²` instead of the nonlocal term.
pub fn energy(u: &Field, params: &ModelParams, kernel: &Kernel) -> Result<f64> {
    let vol = u.grid().cell_volume();
    let interaction = match params.variant {
        Variant::Nonlocal => {
            let bu = model::b_eps(u, kernel)?;
            0.5 * vol * sum_cells(u, |i| u.values()[i] * bu.values()[i])
        }
        Variant::Local => 0.5 * params.local_coefficient * vol * forward_pairing(u, u),
    };
    let g1 = params.gamma + 1.0;
    let potential = vol * sum_cells(u, |i| model::pow_gamma(u.values()[i], g1)) / g1;
    Ok(interaction + potential)
}

/// `Φ(u) = ∫ g(u / p_H^{1/γ})`.
pub fn entropy(u: &Field, params: &ModelParams) -> f64 {
    let inv_c = 1.0 / params.homeostatic_density();
    u.grid().cell_volume() * sum_cells(u, |i| entropy_density(u.values()[i] * inv_c))
}

/// `Φ(u|ū) = ∫ u log(u/ū)`.
pub fn relative_entropy(u: &Field) -> Result<f64> {
    let mean = u.mean();
    if !(mean > 0.0) {
        return Err(Error::ZeroState("relative entropy needs a positive mean"));
    }
    Ok(u.grid().cell_volume() * sum_cells(u, |i| xlogy(u.values()[i], u.values()[i] / mean)))
}

/// `4|Ω| ū Φ(u|ū) - ‖u - ū‖²_{L¹}`, nonnegative by the CKP inequality.
pub fn ckp_gap(u: &Field) -> Result<f64> {
    let rel = relative_entropy(u)?;
    let mean = u.mean();
    let l1 = u.grid().cell_volume() * sum_cells(u, |i| (u.values()[i] - mean).abs());
    Ok(4.0 * u.grid().measure() * mean * rel - l1 * l1)
}

/// `p_H^{1/γ} + 2 γ^{-1/3}`.
pub fn degiorgi_bound(params: &ModelParams) -> f64 {
    params.homeostatic_density() + 2.0 * params.gamma.powf(-1.0 / 3.0)
}

/// How far `max u` exceeds the De Giorgi bound (zero when within it).
pub fn degiorgi_excess(u: &Field, params: &ModelParams) -> f64 {
    (u.max() - degiorgi_bound(params)).max(0.0)
}

/// `‖p (1 - u)‖_{L¹}`.
pub fn graph_residual(u: &Field, params: &ModelParams) -> f64 {
    let gamma = params.gamma;
    u.grid().cell_volume()
        * sum_cells(u, |i| {
            let v = u.values()[i];
            (model::pow_gamma(v, gamma) * (1.0 - v)).abs()
        })
}

/// `div(ū_face ∇v)` with arithmetic-mean face coefficients.
fn mean_face_divergence(u: &Field, v: &Field) -> Field {
    let g = *u.grid();
    let (a, b) = (u.values(), v.values());
    let inv = 1.0 / (g.spacing() * g.spacing());
    let mut out = vec![0.0; g.cells()];
    exec::fill(Execution::default(), &mut out, |i| {
        let mut s = 0.0;
        for axis in 0..g.dim() {
            let ip = g.neighbor(i, axis, 1);
            let im = g.neighbor(i, axis, -1);
            s += 0.5 * (a[i] + a[ip]) * (b[ip] - b[i]) - 0.5 * (a[im] + a[i]) * (b[i] - b[im]);
        }
        s * inv
    });
    Field::from_vec(g, out)
}

/// Strong-form operator of the limit pressure equation,
/// `R = Δp + Δ(u²)/2ε² - div(u ∇(ω_ε ∗ u))/ε² + u G(p)`.
pub fn complementarity_operator(u: &Field, params: &ModelParams, kernel: &Kernel) -> Result<Field> {
    let p = model::pressure(u, params)?;
    let inv_eps2 = 1.0 / (kernel.eps() * kernel.eps());
    let lap_p = ops::laplacian(&p);
    let lap_u2 = ops::laplacian(&u.map(|v| v * v));
    let smooth = kernel.convolve(u)?;
    let drift = mean_face_divergence(u, &smooth);
    let src = model::source_term(u, params);
    let g = *u.grid();
    let values = (0..g.cells())
        .map(|i| {
            lap_p.values()[i] + 0.5 * inv_eps2 * lap_u2.values()[i] - inv_eps2 * drift.values()[i]
                + src.values()[i]
        })
        .collect();
    Ok(Field::from_vec(g, values))
}

/// `‖p R‖_{L¹}` with `R` from [`complementarity_operator`].
pub fn complementarity_residual(u: &Field, params: &ModelParams, kernel: &Kernel) -> Result<f64> {
    let r = complementarity_operator(u, params, kernel)?;
    let gamma = params.gamma;
    Ok(u.grid().cell_volume()
        * sum_cells(u, |i| {
            (model::pow_gamma(u.values()[i], gamma) * r.values()[i]).abs()
        }))
}

/// The three terms of the entropy balance `dΦ/dt = -nonlocal - porous + source`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyDissipation {
    /// `(1/2ε²c) ∬ ω_ε |∇u(x) - ∇u(x-y)|²`, or `(κ/c)∫|Δu|²` for the local variant.
    pub nonlocal: f64,
    /// `(4γ/((γ+1)² c)) ∫ |∇u^{(γ+1)/2}|²`.
    pub porous: f64,
    /// `(1/c) ∫ u log(u/c) G(p)`, never positive.
    pub source: f64,
}

pub fn entropy_dissipation(
    u: &Field,
    params: &ModelParams,
    kernel: &Kernel,
) -> Result<EntropyDissipation> {
    u.check_nonnegative()?;
    let c = params.homeostatic_density();
    let vol = u.grid().cell_volume();
    let nonlocal = match params.variant {
        Variant::Nonlocal => {
            // ∬ω|∇u(x)-∇u(x-y)|² = 2ε² Σ_axes ⟨D⁺u, B_ε D⁺u⟩ and B_ε commutes with D⁺.
            let mut acc = 0.0;
            for axis in 0..u.grid().dim() {
                let du = ops::forward_diff(u, axis);
                let bdu = model::b_eps(&du, kernel)?;
                acc += sum_cells(u, |i| du.values()[i] * bdu.values()[i]);
            }
            vol * acc / c
        }
        Variant::Local => {
            let lu = ops::laplacian(u);
            params.local_coefficient * vol * sum_cells(u, |i| lu.values()[i] * lu.values()[i]) / c
        }
    };
    let gamma = params.gamma;
    let half = u.map(|v| model::pow_gamma(v, 0.5 * (gamma + 1.0)));
    let porous = 4.0 * gamma / ((gamma + 1.0).powi(2) * c) * vol * forward_pairing(&half, &half);
    let source = match params.source {
        Source::Growth => {
            let p_h = params.p_h;
            vol * sum_cells(u, |i| {
                let v = u.values()[i];
                xlogy(v, v / c) * (p_h - model::pow_gamma(v, gamma))
            }) / c
        }
        Source::None => 0.0,
    };
    Ok(EntropyDissipation {
        nonlocal,
        porous,
        source,
    })
}

/// `∫ u |∇μ|²` with the stepper's donor-cell face mobility.
pub fn flux_dissipation(u: &Field, params: &ModelParams, kernel: &Kernel) -> Result<f64> {
    let mu = model::chemical_potential(u, params, kernel)?;
    Ok(flux_dissipation_with_mu(u, &mu))
}

fn flux_dissipation_with_mu(u: &Field, mu: &Field) -> f64 {
    let g = *u.grid();
    let (uv, mv) = (u.values(), mu.values());
    let s: f64 = (0..g.dim())
        .map(|axis| {
            sum_cells(u, |i| {
                let j = g.neighbor(i, axis, 1);
                let d = mv[j] - mv[i];
                model::upwind(uv, mv, i, j) * d * d
            })
        })
        .sum();
    g.cell_volume() * s / (g.spacing() * g.spacing())
}

/// `|⟨(u_next - u_prev)/dt, p(u_next)⟩|`.
pub fn pairing_estimate(
    u_prev: &Field,
    u_next: &Field,
    dt: f64,
    params: &ModelParams,
) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(Error::InvalidParams(format!(
            "pairing needs dt > 0, got {dt}"
        )));
    }
    u_prev.same_grid(u_next)?;
    let gamma = params.gamma;
    let (a, b) = (u_prev.values(), u_next.values());
    let s = sum_cells(u_next, |i| {
        (b[i] - a[i]) / dt * model::pow_gamma(b[i], gamma)
    });
    Ok((u_next.grid().cell_volume() * s).abs())
}

/// Measure of the set where `p > 1e-3 p_H`.
pub fn tumor_zone(u: &Field, params: &ModelParams) -> f64 {
    let level = TUMOR_ZONE_THRESHOLD * params.p_h;
    let count = u
        .values()
        .iter()
        .filter(|&&v| model::pow_gamma(v, params.gamma) > level)
        .count();
    count as f64 * u.grid().cell_volume()
}

/// Evaluates every functional on `state`. `pairing` is supplied by the caller
/// since it needs the previous step.
pub fn diagnostics(
    state: &ModelState,
    params: &ModelParams,
    kernel: &Kernel,
    pairing: f64,
) -> Result<DiagnosticsRecord> {
    let u = &state.u;
    let mu = model::chemical_potential(u, params, kernel)?;
    let ent = entropy_dissipation(u, params, kernel)?;
    let src = model::source_term(u, params);
    let mass = u.integral();
    let (entropy_relative, ckp) = if u.mean() > 0.0 {
        (relative_entropy(u)?, ckp_gap(u)?)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(DiagnosticsRecord {
        t: state.t,
        mass,
        mean: mass / u.grid().measure(),
        energy: energy(u, params, kernel)?,
        entropy: entropy(u, params),
        entropy_relative,
        min_u: u.min(),
        max_u: u.max(),
        ckp_gap: ckp,
        degiorgi_excess: degiorgi_excess(u, params),
        graph_residual: graph_residual(u, params),
        complementarity_residual: complementarity_residual(u, params, kernel)?,
        pairing,
        dissipation_flux: flux_dissipation_with_mu(u, &mu),
        dissipation_entropy_nonlocal: ent.nonlocal,
        dissipation_entropy_porous: ent.porous,
        entropy_source: ent.source,
        energy_source: mu.dot(&src),
        tumor_zone: tumor_zone(u, params),
    })
}
