//! OCL, ℓ2-RCL, GRCL and joint learning as minimum-norm least-squares solves.
//!
//! Every estimator reduces to a minimum-norm solve of a stacked system
//! `Z v = b`. For `d` up to [`SolveOptions::normal_max_dim`] the solve goes
//! through the pseudoinverse of the explicit `d×d` normal matrix; above it a
//! thin SVD of `Z` is used instead.

use faer::{Col, ColRef, Mat, MatRef};

use crate::error::{check_dim, invalid, Error, Result};
use crate::linalg::{gram, mat_is_finite, svd_min_norm, SymEig};
use crate::regularizers::Regularizer;

/// Default dimension above which solvers factor the design instead of the normal matrix.
pub const NORMAL_MAX_DIM: usize = 4096;

/// Fitted parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    w: Col<f64>,
}

impl Weights {
    pub fn new(w: Col<f64>) -> Result<Self> {
        if (0..w.nrows()).any(|i| !w[i].is_finite()) {
            return Err(Error::NonFinite { what: "weights" });
        }
        Ok(Weights { w })
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        Weights::new(crate::linalg::col_from_slice(v))
    }

    pub fn zeros(d: usize) -> Self {
        Weights { w: Col::zeros(d) }
    }

    pub fn as_col(&self) -> ColRef<'_, f64> {
        self.w.as_ref()
    }

    pub fn to_vec(&self) -> Vec<f64> {
        crate::linalg::col_to_vec(self.w.as_ref())
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }
}

/// Pseudoinverse cutoff and solver-path selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    rank_tolerance: Option<f64>,
    /// Largest `d` solved through the explicit normal matrix.
    pub normal_max_dim: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rank_tolerance: None,
            normal_max_dim: NORMAL_MAX_DIM,
        }
    }
}

impl SolveOptions {
    /// Fixed relative cutoff in `(0, 1)`.
    pub fn with_rank_tolerance(tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(invalid("rank_tolerance", format!("{tol} is not in (0, 1)")));
        }
        Ok(SolveOptions {
            rank_tolerance: Some(tol),
            ..SolveOptions::default()
        })
    }

    pub fn with_normal_max_dim(mut self, d: usize) -> Self {
        self.normal_max_dim = d;
        self
    }

    /// Relative eigenvalue cutoff for an `n×d` system: the fixed value, or `1e-10·max(n, d)`.
    pub fn tolerance(&self, n: usize, d: usize) -> f64 {
        self.rank_tolerance
            .unwrap_or_else(|| (1e-10 * n.max(d).max(1) as f64).min(0.5))
    }
}

/// Minimum-norm least-squares solution of `z v = b`.
pub(crate) fn min_norm_solve(z: MatRef<'_, f64>, b: ColRef<'_, f64>, opts: &SolveOptions) -> Result<Col<f64>> {
    let (n, d) = (z.nrows(), z.ncols());
    let tol = opts.tolerance(n, d);
    if d <= opts.normal_max_dim {
        let eig = SymEig::truncated(gram(z).as_ref(), tol)?;
        let rhs = z.transpose() * b;
        let v = eig.apply_pinv(rhs.as_mat());
        Ok(v.col(0).to_owned())
    } else {
        svd_min_norm(z, b, tol)
    }
}

fn check_inputs(x: MatRef<'_, f64>, y: ColRef<'_, f64>) -> Result<()> {
    check_dim("labels vs design rows", x.nrows(), y.nrows())?;
    if !mat_is_finite(x) {
        return Err(Error::NonFinite { what: "design" });
    }
    Ok(())
}

/// Minimum-ℓ2-norm least-squares fit.
pub fn fit_min_norm(x: MatRef<'_, f64>, y: ColRef<'_, f64>, opts: &SolveOptions) -> Result<Weights> {
    check_inputs(x, y)?;
    Weights::new(min_norm_solve(x, y, opts)?)
}

fn residual(x2: MatRef<'_, f64>, y2: ColRef<'_, f64>, w1: &Weights) -> Result<Col<f64>> {
    check_inputs(x2, y2)?;
    check_dim("w1 length", x2.ncols(), w1.dim())?;
    Ok(y2 - x2 * w1.as_col())
}

/// OCL phase two: `w1` plus the minimum-norm least-squares correction on task 2.
pub fn fit_ocl(x2: MatRef<'_, f64>, y2: ColRef<'_, f64>, w1: &Weights, opts: &SolveOptions) -> Result<Weights> {
    let r = residual(x2, y2, w1)?;
    let v = min_norm_solve(x2, r.as_ref(), opts)?;
    Weights::new(w1.as_col() + v)
}

/// GRCL phase two: `w1 + (X₂ᵀX₂ + nΣ)⁺X₂ᵀ(y₂ − X₂w1)`.
///
/// Above the normal-matrix dimension limit, `Σ = FᵀF` turns this into the
/// minimum-norm solution of `[X₂; √n F] v = [r; 0]`. A zero regularizer takes
/// the OCL path.
pub fn fit_grcl(
    x2: MatRef<'_, f64>,
    y2: ColRef<'_, f64>,
    w1: &Weights,
    sigma: &Regularizer,
    opts: &SolveOptions,
) -> Result<Weights> {
    check_dim("regularizer dimension", x2.ncols(), sigma.dim())?;
    sigma.check_psd()?;
    if sigma.is_zero() {
        return fit_ocl(x2, y2, w1, opts);
    }
    let r = residual(x2, y2, w1)?;
    let (n, d) = (x2.nrows(), x2.ncols());
    let v = if d <= opts.normal_max_dim {
        let eig = grcl_normal_eigen(x2, sigma, opts)?;
        let rhs = x2.transpose() * &r;
        eig.apply_pinv(rhs.as_mat()).col(0).to_owned()
    } else {
        let f = sigma.factor();
        let root_n = (n as f64).sqrt();
        let k = f.nrows();
        let z = Mat::from_fn(n + k, d, |i, j| {
            if i < n {
                x2[(i, j)]
            } else {
                root_n * f[(i - n, j)]
            }
        });
        let b = Col::from_fn(n + k, |i| if i < n { r[i] } else { 0.0 });
        min_norm_solve(z.as_ref(), b.as_ref(), opts)?
    };
    Weights::new(w1.as_col() + v)
}

/// Truncated eigendecomposition of `X₂ᵀX₂ + nΣ` with the solver's cutoff.
pub(crate) fn grcl_normal_eigen(x2: MatRef<'_, f64>, sigma: &Regularizer, opts: &SolveOptions) -> Result<SymEig> {
    let (n, d) = (x2.nrows(), x2.ncols());
    let mut a = gram(x2);
    sigma.add_scaled_to(&mut a, n as f64);
    SymEig::truncated(a.as_ref(), opts.tolerance(n, d))
}

/// ℓ2-RCL: GRCL with `Σ = γI`.
pub fn fit_l2rcl(
    x2: MatRef<'_, f64>,
    y2: ColRef<'_, f64>,
    w1: &Weights,
    gamma: f64,
    opts: &SolveOptions,
) -> Result<Weights> {
    let sigma = Regularizer::scaled_identity(x2.ncols(), gamma)?;
    fit_grcl(x2, y2, w1, &sigma, opts)
}

/// Joint learning: minimum-norm least squares on both datasets stacked.
pub fn fit_joint(
    x1: MatRef<'_, f64>,
    y1: ColRef<'_, f64>,
    x2: MatRef<'_, f64>,
    y2: ColRef<'_, f64>,
    opts: &SolveOptions,
) -> Result<Weights> {
    check_inputs(x1, y1)?;
    check_inputs(x2, y2)?;
    check_dim("task dimensions", x1.ncols(), x2.ncols())?;
    let (x, y) = stack(x1, y1, x2, y2);
    Weights::new(min_norm_solve(x.as_ref(), y.as_ref(), opts)?)
}

pub(crate) fn stack_rows(x1: MatRef<'_, f64>, x2: MatRef<'_, f64>) -> Mat<f64> {
    let n1 = x1.nrows();
    Mat::from_fn(n1 + x2.nrows(), x1.ncols(), |i, j| {
        if i < n1 {
            x1[(i, j)]
        } else {
            x2[(i - n1, j)]
        }
    })
}

fn stack(
    x1: MatRef<'_, f64>,
    y1: ColRef<'_, f64>,
    x2: MatRef<'_, f64>,
    y2: ColRef<'_, f64>,
) -> (Mat<f64>, Col<f64>) {
    let n1 = x1.nrows();
    let y = Col::from_fn(n1 + x2.nrows(), |i| if i < n1 { y1[i] } else { y2[i - n1] });
    (stack_rows(x1, x2), y)
}
