//! Matrix-free Jacobi-preconditioned conjugate gradients.

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

fn dot(exec: Execution, a: &[f64], b: &[f64]) -> f64 {
    exec::sum(exec, a.len(), |i| a[i] * b[i])
}

/// Solves `A x = b` for symmetric positive definite `A`, given as `apply(v, out)`.
///
/// Stops when `‖b - A x‖₂ ≤ tol ‖b‖₂`; `x` holds the initial guess on entry.
/// Returns the iteration count.
pub fn pcg<F>(
    exec: Execution,
    apply: F,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let b_norm = dot(exec, b, b).sqrt();
    let target = tol * b_norm;
    let mut r_norm = dot(exec, &r, &r).sqrt();
    if r_norm <= target || b_norm == 0.0 {
        return Ok(0);
    }

    let mut z: Vec<f64> = r.iter().zip(diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(exec, &r, &z);

    for iter in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(exec, &p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverDiverged {
                iterations: iter,
                residual: r_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = dot(exec, &r, &r).sqrt();
        if r_norm <= target {
            return Ok(iter);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(exec, &r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged {
        iterations: max_iter,
        residual: r_norm,
    })
}
