//! Simulator and diagnostics for the nonlocal degenerate Cahn-Hilliard
//! equation with a pressure-limited growth source on the periodic torus,
//!
//! ```text
//! ∂ₜu = div(u ∇μ) + u G(p),   μ = p + B_ε[u],   p = u^γ,   G(p) = p_H - p,
//! B_ε[u] = (u - ω_ε ∗ u) / ε².
//! ```
//!
//! Layers, bottom up: [`grid`] and [`kernel`] (geometry, mollifier and
//! convolution), [`ops`] (finite differences), [`model`] (the right-hand
//! side), [`stepper`] (time integration), [`functionals`] (energy, entropy
//! and residual diagnostics), [`experiments`] (canned studies) and [`io`]
//! (configuration, CSV series, binary snapshots, plot scripts).

pub mod cg;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod model;
pub mod ops;
pub mod stepper;

pub use error::{Error, Result};
pub use exec::Execution;
pub use functionals::DiagnosticsRecord;
pub use grid::{Field, TorusGrid};
pub use kernel::{Kernel, Profile};
pub use model::{ModelParams, ModelState, Source, Variant};
pub use stepper::{Scheme, SolverConfig, StepReport};
