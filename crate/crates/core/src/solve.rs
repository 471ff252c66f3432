//! Linear-algebra helpers: conjugate gradients for the symmetric positive
//! definite systems that come out of killed random walks.

use crate::{Error, Result};

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Solve A x = b by CG, with A given as a matrix-vector product. A must be
/// symmetric positive definite. Converges when the residual norm drops below
/// `rel_tol * ||b||` (or below an absolute floor when b = 0).
pub fn conjugate_gradient<F>(
    apply: F,
    b: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>>
where
    F: Fn(&[f64], &mut [f64]),
{
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];

    let b_norm = dot(b, b).sqrt();
    let target = (rel_tol * b_norm).max(1e-300);
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target {
        return Ok(x);
    }

    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver(format!(
                "cg: operator not positive definite (p'Ap = {pap:e})"
            )));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= target {
            return Ok(x);
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "cg: no convergence in {max_iter} iterations (residual {:e}, target {:e})",
        rr.sqrt(),
        target
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cg_solves_small_spd_system() {
        // A = [[4,1],[1,3]], b = [1,2]; exact solution (1/11, 7/11).
        let apply = |v: &[f64], out: &mut [f64]| {
            out[0] = 4.0 * v[0] + v[1];
            out[1] = v[0] + 3.0 * v[1];
        };
        let x = conjugate_gradient(apply, &[1.0, 2.0], 1e-14, 100).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn cg_rejects_indefinite() {
        let apply = |v: &[f64], out: &mut [f64]| {
            out[0] = -v[0];
        };
        assert!(conjugate_gradient(apply, &[1.0], 1e-10, 10).is_err());
    }

    #[test]
    fn cg_zero_rhs() {
        let apply = |v: &[f64], out: &mut [f64]| out.copy_from_slice(v);
        let x = conjugate_gradient(apply, &[0.0, 0.0], 1e-12, 10).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
    }
}
