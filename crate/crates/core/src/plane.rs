//! Linear subspaces of ℝⁿ with orthonormal bases, and principal-angle
//! containment defects between them.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Orthonormality tolerance for stored bases.
pub const ORTHONORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlaneError {
    #[error("containment impossible: dim {0} plane cannot lie in dim {1} plane")]
    ContainmentImpossible(usize, usize),
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

/// A linear subspace stored as an `n × dim` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    basis: DMatrix<f64>,
}

impl Plane {
    /// The zero subspace of ℝⁿ.
    pub fn zero(n: usize) -> Self {
        Self {
            basis: DMatrix::zeros(n, 0),
        }
    }

    /// Span of the given coordinate axes (1-based).
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let mut basis = DMatrix::zeros(n, axes.len());
        for (c, &a) in axes.iter().enumerate() {
            basis[(a - 1, c)] = 1.0;
        }
        Self { basis }
    }

    /// Orthonormalizes columns known to be linearly independent.
    pub fn from_independent(n: usize, columns: &[Vec<f64>]) -> Self {
        let mut out: Vec<DVector<f64>> = Vec::new();
        for c in columns {
            let mut v = DVector::from_column_slice(c);
            reorthogonalize(&mut v, &out);
            let norm = v.norm();
            if norm > 0.0 {
                out.push(v / norm);
            }
        }
        Self::from_columns(n, &out)
    }

    /// Span of arbitrary columns by pivoted Gram–Schmidt: the residual with
    /// the largest norm is taken next, and the sweep stops once every
    /// residual is below `rel_tol` times the largest input norm.
    pub fn from_spanning(n: usize, columns: &[Vec<f64>], rel_tol: f64) -> Self {
        let mut residuals: Vec<DVector<f64>> = columns
            .iter()
            .map(|c| DVector::from_column_slice(c))
            .collect();
        let scale = residuals.iter().map(|r| r.norm()).fold(0.0, f64::max);
        let mut out: Vec<DVector<f64>> = Vec::new();
        if scale == 0.0 {
            return Self::zero(n);
        }
        while out.len() < n {
            let Some((best, norm)) = residuals
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
            else {
                break;
            };
            if norm <= rel_tol * scale {
                break;
            }
            let mut q = residuals.swap_remove(best);
            reorthogonalize(&mut q, &out);
            let qn = q.norm();
            if qn <= rel_tol * scale {
                continue;
            }
            let q = q / qn;
            for r in residuals.iter_mut() {
                let d = q.dot(r);
                r.axpy(-d, &q, 1.0);
            }
            out.push(q);
        }
        Self::from_columns(n, &out)
    }

    /// Common kernel of the rows of `rows` (an `m × n` matrix).
    /// Returns `None` when the rows have rank below `m` at `rel_tol`.
    pub fn kernel_of_rows(rows: &DMatrix<f64>, rel_tol: f64) -> Option<Self> {
        let (m, n) = rows.shape();
        let row_cols: Vec<Vec<f64>> = (0..m)
            .map(|i| rows.row(i).iter().copied().collect())
            .collect();
        let row_space = Self::from_spanning(n, &row_cols, rel_tol);
        if row_space.dim() < m {
            return None;
        }
        Some(row_space.complement())
    }

    /// Orthogonal complement in ℝⁿ.
    pub fn complement(&self) -> Self {
        let n = self.ambient();
        let mut out: Vec<DVector<f64>> = Vec::new();
        let existing: Vec<DVector<f64>> = (0..self.dim())
            .map(|j| self.basis.column(j).into_owned())
            .collect();
        // pick axis directions in order of largest residual for stability
        let mut candidates: Vec<DVector<f64>> = (0..n)
            .map(|i| {
                let mut v = DVector::zeros(n);
                v[i] = 1.0;
                reorthogonalize(&mut v, &existing);
                v
            })
            .collect();
        while out.len() + existing.len() < n {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, r)| (i, r.norm()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("candidates remain while dimension is short");
            let mut q = candidates.swap_remove(best);
            reorthogonalize(&mut q, &existing);
            reorthogonalize(&mut q, &out);
            let qn = q.norm();
            let q = q / qn;
            for r in candidates.iter_mut() {
                let d = q.dot(r);
                r.axpy(-d, &q, 1.0);
            }
            out.push(q);
        }
        Self::from_columns(n, &out)
    }

    fn from_columns(n: usize, cols: &[DVector<f64>]) -> Self {
        if cols.is_empty() {
            return Self::zero(n);
        }
        Self {
            basis: DMatrix::from_columns(cols),
        }
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `n × dim` matrix of orthonormal basis columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn basis_vector(&self, j: usize) -> Vec<f64> {
        self.basis.column(j).iter().copied().collect()
    }

    /// Orthogonal projection of `v` onto the plane.
    pub fn project(&self, v: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(v);
        let coords = self.basis.transpose() * &v;
        (&self.basis * coords).iter().copied().collect()
    }

    /// Whether `v` lies in the plane up to `tol` (absolute residual).
    pub fn contains(&self, v: &[f64], tol: f64) -> bool {
        let p = self.project(v);
        v.iter()
            .zip(&p)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
            <= tol
    }

    /// Largest deviation of `QᵀQ` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.basis.transpose() * &self.basis;
        let id = DMatrix::<f64>::identity(self.dim(), self.dim());
        (g - id).amax()
    }
}

fn reorthogonalize(v: &mut DVector<f64>, against: &[DVector<f64>]) {
    // two passes of classical Gram–Schmidt
    for _ in 0..2 {
        for q in against {
            let d = q.dot(v);
            v.axpy(-d, q, 1.0);
        }
    }
}

/// Sine of the largest principal angle between `p` and its projection into
/// `q`: zero exactly when `p ⊂ q`, one when some direction of `p` is
/// orthogonal to `q`.
///
/// Evaluated as the largest singular value of the residual `P − Q QᵀP`,
/// which equals `sqrt(1 − σ_min(QᵀP)²)` but keeps full relative accuracy
/// near containment.
pub fn tangency_defect(p: &Plane, q: &Plane) -> Result<f64, PlaneError> {
    if p.ambient() != q.ambient() {
        return Err(PlaneError::DimensionMismatch(p.ambient(), q.ambient()));
    }
    if p.dim() > q.dim() {
        return Err(PlaneError::ContainmentImpossible(p.dim(), q.dim()));
    }
    if p.dim() == 0 {
        return Ok(0.0);
    }
    let cross = q.basis.transpose() * &p.basis;
    let residual = &p.basis - &q.basis * cross;
    let sigma = residual.singular_values().max();
    Ok(sigma.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn defect_examples() {
        let p = Plane::coordinate(3, &[1, 2]);
        assert_eq!(tangency_defect(&p, &p).unwrap(), 0.0);
        let e1 = Plane::coordinate(3, &[1]);
        let q = Plane::coordinate(3, &[2, 3]);
        assert!((tangency_defect(&e1, &q).unwrap() - 1.0).abs() < 1e-15);
        let tilted = Plane::from_independent(3, &[vec![S, 0.0, S]]);
        let d = tangency_defect(&tilted, &Plane::coordinate(3, &[1, 2])).unwrap();
        assert!((d - S).abs() < 1e-15);
    }

    /// Principal-angle oracle: σ_min of the cross-Gram matrix.
    #[test]
    fn defect_agrees_with_cross_gram_formula() {
        let p = Plane::from_spanning(
            4,
            &[vec![1.0, 2.0, 0.5, -1.0], vec![0.0, 1.0, 3.0, 1.0]],
            1e-10,
        );
        let q = Plane::from_spanning(
            4,
            &[
                vec![1.0, 0.0, 0.0, 1.0],
                vec![0.0, 1.0, 1.0, 0.0],
                vec![1.0, 1.0, 0.0, 0.0],
            ],
            1e-10,
        );
        let cross = q.basis().transpose() * p.basis();
        let smin = cross.singular_values().min();
        let oracle = (1.0 - smin * smin).max(0.0).sqrt();
        assert!((tangency_defect(&p, &q).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn containment_impossible() {
        let p = Plane::coordinate(3, &[1, 2]);
        let q = Plane::coordinate(3, &[1]);
        assert_eq!(
            tangency_defect(&p, &q).unwrap_err(),
            PlaneError::ContainmentImpossible(2, 1)
        );
    }

    #[test]
    fn kernel_and_complement() {
        let rows = DMatrix::from_row_slice(1, 3, &[-1.0, 0.0, 1.0]);
        let k = Plane::kernel_of_rows(&rows, 1e-10).unwrap();
        assert_eq!(k.dim(), 2);
        assert!(k.orthonormality_error() < ORTHONORMAL_TOL);
        assert!(k.contains(&[S, 0.0, S], 1e-12));
        assert!(k.contains(&[0.0, 1.0, 0.0], 1e-12));

        let rank_deficient = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
        assert!(Plane::kernel_of_rows(&rank_deficient, 1e-10).is_none());
    }

    #[test]
    fn spanning_drops_dependent_columns() {
        let p = Plane::from_spanning(
            3,
            &[
                vec![1.0, 1.0, 0.0],
                vec![2.0, 2.0, 0.0],
                vec![0.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0],
            ],
            1e-10,
        );
        assert_eq!(p.dim(), 2);
        assert!(p.orthonormality_error() < ORTHONORMAL_TOL);
        assert_eq!(Plane::from_spanning(3, &[vec![0.0; 3]], 1e-10).dim(), 0);
    }
}
