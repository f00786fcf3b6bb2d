//! Dense LU with row/column equilibration, a condition estimate and one step
//! of iterative refinement.

use nalgebra::{DMatrix, DVector, LU, Dyn};

use crate::error::{Error, Result};

/// Systems whose equilibrated 1-norm condition number exceeds this are rejected.
pub const MAX_CONDITION: f64 = 1e14;

/// A factored square system, reusable for several right-hand sides.
#[derive(Debug, Clone)]
pub struct Factored {
    original: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    row_scale: DVector<f64>,
    col_scale: DVector<f64>,
    condition: f64,
}

impl Factored {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "system matrix must be square");
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem { condition: f64::INFINITY });
        }
        let mut scaled = a.clone();
        let mut row_scale = DVector::from_element(n, 1.0);
        let mut col_scale = DVector::from_element(n, 1.0);
        for i in 0..n {
            let m = scaled.row(i).amax();
            if m == 0.0 {
                return Err(Error::SingularSystem { condition: f64::INFINITY });
            }
            row_scale[i] = 1.0 / m;
            scaled.row_mut(i).scale_mut(row_scale[i]);
        }
        for j in 0..n {
            let m = scaled.column(j).amax();
            if m == 0.0 {
                return Err(Error::SingularSystem { condition: f64::INFINITY });
            }
            col_scale[j] = 1.0 / m;
            scaled.column_mut(j).scale_mut(col_scale[j]);
        }
        let norm = one_norm(&scaled);
        let lu = scaled.lu();
        let condition = match lu.try_inverse() {
            Some(inv) => norm * one_norm(&inv),
            None => f64::INFINITY,
        };
        if !(condition <= MAX_CONDITION) {
            return Err(Error::SingularSystem { condition });
        }
        Ok(Factored { original: a, lu, row_scale, col_scale, condition })
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.original
    }

    fn solve_scaled(&self, b: &DVector<f64>) -> DVector<f64> {
        let rhs = b.component_mul(&self.row_scale);
        let y = self.lu.solve(&rhs).expect("factorization checked non-singular");
        y.component_mul(&self.col_scale)
    }

    /// Solves `A x = b` with one refinement step.
    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        let mut x = self.solve_scaled(b);
        let r = b - &self.original * &x;
        x += self.solve_scaled(&r);
        x
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_badly_scaled_system() {
        let a = DMatrix::from_row_slice(3, 3, &[1e12, 2.0, 0.0, 3e12, 1.0, 1e-8, 0.0, 5.0, 2e-8]);
        let x = DVector::from_vec(vec![1e-12, 2.0, 3e8]);
        let b = &a * &x;
        let f = Factored::new(a).unwrap();
        let y = f.solve(&b);
        for i in 0..3 {
            assert!(((y[i] - x[i]) / x[i]).abs() < 1e-12);
        }
        assert!(f.condition().is_finite());
    }

    #[test]
    fn singular_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(Factored::new(a), Err(Error::SingularSystem { .. })));
    }
}
