//! Dense helpers shared by the estimators, regularizers and risk code.
//!
//! Pseudoinverses of symmetric PSD matrices are taken through a symmetric
//! eigendecomposition. Eigenvalues at or below `tol * max_eigenvalue` are
//! treated as zero; the same relative rule is applied to the squared singular
//! values on the design-factorization path so that both paths keep the same
//! spectral subspace.

use faer::{Col, ColRef, Mat, MatRef, Side};

use crate::error::{Error, Result};

/// `xᵀx`.
pub(crate) fn gram(x: MatRef<'_, f64>) -> Mat<f64> {
    symmetrize(x.transpose() * x)
}

/// `x xᵀ`.
pub(crate) fn outer_gram(x: MatRef<'_, f64>) -> Mat<f64> {
    symmetrize(x * x.transpose())
}

pub(crate) fn symmetrize(mut a: Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// Kept part of a symmetric eigendecomposition, eigenvalues in descending order.
pub(crate) struct SymEig {
    pub vals: Vec<f64>,
    pub vecs: Mat<f64>,
}

impl SymEig {
    /// Eigenpairs of a symmetric matrix whose eigenvalue exceeds `tol * max`.
    pub fn truncated(a: MatRef<'_, f64>, tol: f64) -> Result<Self> {
        let (vals, vecs) = full_eigen(a)?;
        let top = vals.first().copied().unwrap_or(0.0);
        let cutoff = tol * top.max(0.0);
        let keep: Vec<usize> = (0..vals.len())
            .filter(|&i| top > 0.0 && vals[i] > cutoff)
            .collect();
        let n = a.nrows();
        let kept = Mat::from_fn(n, keep.len(), |i, j| vecs[(i, keep[j])]);
        Ok(SymEig {
            vals: keep.iter().map(|&i| vals[i]).collect(),
            vecs: kept,
        })
    }

    pub fn rank(&self) -> usize {
        self.vals.len()
    }

    /// `pinv · b` without forming the pseudoinverse.
    pub fn apply_pinv(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        let mut c = self.vecs.transpose() * b;
        for j in 0..c.ncols() {
            for i in 0..c.nrows() {
                c[(i, j)] /= self.vals[i];
            }
        }
        &self.vecs * &c
    }
}

/// All eigenpairs of a symmetric matrix, eigenvalues in descending order.
pub(crate) fn full_eigen(a: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let eig = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("symmetric eigendecomposition: {e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let vals: Vec<f64> = (0..n).rev().map(|i| s[i]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, n - 1 - j)]);
    Ok((vals, vecs))
}

/// Minimum-norm least-squares solution of `z w = b` from a thin SVD of `z`.
pub(crate) fn svd_min_norm(z: MatRef<'_, f64>, b: ColRef<'_, f64>, tol: f64) -> Result<Col<f64>> {
    let d = z.ncols();
    if z.nrows() == 0 || d == 0 {
        return Ok(Col::zeros(d));
    }
    let svd = z
        .thin_svd()
        .map_err(|e| Error::Numerical(format!("singular value decomposition: {e:?}")))?;
    let s = svd.S().column_vector();
    let u = svd.U();
    let v = svd.V();
    let top = s[0];
    let mut w = Col::<f64>::zeros(d);
    for r in 0..s.nrows() {
        let sr = s[r];
        if !(top > 0.0 && sr * sr > tol * top * top) {
            break;
        }
        let coef = (u.col(r).transpose() * b) / sr;
        for i in 0..d {
            w[i] += coef * v[(i, r)];
        }
    }
    Ok(w)
}

pub(crate) fn mat_is_finite(a: MatRef<'_, f64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].is_finite()))
}

pub(crate) fn col_from_slice(v: &[f64]) -> Col<f64> {
    Col::from_fn(v.len(), |i| v[i])
}

pub(crate) fn col_to_vec(c: ColRef<'_, f64>) -> Vec<f64> {
    (0..c.nrows()).map(|i| c[i]).collect()
}

/// `Σ_i m_i Σ_j q_ij²`, the weighted trace of `q qᵀ`.
pub(crate) fn weighted_row_energy(m: &[f64], q: MatRef<'_, f64>) -> f64 {
    let mut total = 0.0;
    for j in 0..q.ncols() {
        for (i, &mi) in m.iter().enumerate() {
            let v = q[(i, j)];
            total += mi * v * v;
        }
    }
    total
}

/// `Σ_i m_i v_i²`.
pub(crate) fn weighted_norm2(m: &[f64], v: ColRef<'_, f64>) -> f64 {
    m.iter().enumerate().map(|(i, &mi)| mi * v[i] * v[i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinv_of_rank_one_matrix() {
        let a = Mat::from_fn(2, 2, |_, _| 1.0);
        let e = SymEig::truncated(a.as_ref(), 1e-12).unwrap();
        assert_eq!(e.rank(), 1);
        let p = e.apply_pinv(Mat::<f64>::identity(2, 2).as_ref());
        for i in 0..2 {
            for j in 0..2 {
                assert!((p[(i, j)] - 0.25).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn svd_min_norm_matches_interpolator() {
        let z = Mat::from_fn(1, 3, |_, j| if j < 2 { 1.0 } else { 0.0 });
        let b = col_from_slice(&[2.0]);
        let w = svd_min_norm(z.as_ref(), b.as_ref(), 1e-12).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!((w[1] - 1.0).abs() < 1e-14);
        assert!(w[2].abs() < 1e-14);
    }

    #[test]
    fn eigen_is_descending() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
        let (vals, _) = full_eigen(a.as_ref()).unwrap();
        assert_eq!(vals.len(), 3);
        assert!((vals[0] - 3.0).abs() < 1e-14 && (vals[2] - 1.0).abs() < 1e-14);
    }
}
