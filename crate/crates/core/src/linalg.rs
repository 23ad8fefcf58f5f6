//! Linear solvers for grounded graph Laplacians.

use nalgebra::{DMatrix, DVector};

/// Symmetric positive definite system `A x = b` with `A = D - W` stored row-wise.
///
/// `diag[i]` is the full diagonal entry and `off[i]` lists `(j, w_ij)` with
/// `A_ij = -w_ij` (duplicates allowed).
pub(crate) struct GroundedLaplacian {
    pub diag: Vec<f64>,
    pub off: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug)]
pub(crate) struct NotConverged;

impl GroundedLaplacian {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.len() {
            let mut acc = self.diag[i] * x[i];
            for &(j, w) in &self.off[i] {
                acc -= w * x[j];
            }
            out[i] = acc;
        }
    }

    pub fn solve_dense(&self, b: &[f64]) -> Result<Vec<f64>, NotConverged> {
        let m = self.len();
        let mut a = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            a[(i, i)] = self.diag[i];
            for &(j, w) in &self.off[i] {
                a[(i, j)] -= w;
            }
        }
        let chol = a.cholesky().ok_or(NotConverged)?;
        let x = chol.solve(&DVector::from_column_slice(b));
        Ok(x.iter().copied().collect())
    }

    /// Jacobi-preconditioned conjugate gradients to relative residual `tol`.
    pub fn solve_cg(&self, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>, NotConverged> {
        let m = self.len();
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; m];
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(ri, d)| ri / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; m];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for _ in 0..max_iter {
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(NotConverged);
            }
            let alpha = rz / pap;
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r_norm <= tol * b_norm {
                return Ok(x);
            }
            for i in 0..m {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..m {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(NotConverged)
    }
}

/// Dense LU solve of a general square system.
pub(crate) fn solve_general_dense(a: DMatrix<f64>, b: &[f64]) -> Result<Vec<f64>, NotConverged> {
    let lu = a.lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(NotConverged)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(NotConverged);
    }
    Ok(x.iter().copied().collect())
}
