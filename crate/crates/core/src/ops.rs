//! Periodic finite-difference operators.

use crate::exec::{self, Execution};
use crate::grid::Field;

/// Central difference `(u(x + h e_k) - u(x - h e_k)) / 2h`, one field per axis.
pub fn grad(field: &Field) -> Vec<Field> {
    let g = *field.grid();
    let inv = 1.0 / (2.0 * g.spacing());
    let u = field.values();
    (0..g.dim())
        .map(|axis| {
            let mut out = vec![0.0; g.cells()];
            exec::fill(Execution::default(), &mut out, |i| {
                (u[g.neighbor(i, axis, 1)] - u[g.neighbor(i, axis, -1)]) * inv
            });
            Field::from_vec(g, out)
        })
        .collect()
}

/// Forward difference `(u(x + h e_k) - u(x)) / h` along one axis.
pub fn forward_diff(field: &Field, axis: usize) -> Field {
    let g = *field.grid();
    let inv = 1.0 / g.spacing();
    let u = field.values();
    let mut out = vec![0.0; g.cells()];
    exec::fill(Execution::default(), &mut out, |i| {
        (u[g.neighbor(i, axis, 1)] - u[i]) * inv
    });
    Field::from_vec(g, out)
}

/// Standard 3-point (1D) or 5-point (2D) periodic Laplacian.
pub fn laplacian(field: &Field) -> Field {
    laplacian_with(Execution::default(), field)
}

pub fn laplacian_with(exec: Execution, field: &Field) -> Field {
    let g = *field.grid();
    let mut out = vec![0.0; g.cells()];
    laplacian_into(exec, field, &mut out);
    Field::from_vec(g, out)
}

pub(crate) fn laplacian_into(exec: Execution, field: &Field, out: &mut [f64]) {
    let g = *field.grid();
    let inv = 1.0 / (g.spacing() * g.spacing());
    let u = field.values();
    let dim = g.dim();
    exec::fill(exec, out, |i| {
        let mut s = -2.0 * dim as f64 * u[i];
        for axis in 0..dim {
            s += u[g.neighbor(i, axis, 1)] + u[g.neighbor(i, axis, -1)];
        }
        s * inv
    });
}
