//! The memory matrix `Σ` carried from task 1 to task 2.

use std::fmt::Write as _;

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{invalid, Error, Result};
use crate::linalg::{full_eigen, gram, outer_gram};
use crate::model::{join, parse_f64, parse_list, Spectrum};

/// Relative size below which a dense off-diagonal entry counts as zero.
const DIAGONAL_TOL: f64 = 1e-12;

/// Storage of `Σ`.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerForm {
    /// `Σ = diag(values)`.
    Diagonal(Vec<f64>),
    /// `Σ = factorᵀ · factor` with a `k×d` factor.
    LowRank(Mat<f64>),
}

/// A PSD memory matrix together with the number of stored `d`-vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    form: RegularizerForm,
    dim: usize,
    memory_size: usize,
}

impl Regularizer {
    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { what: "regularizer" });
            }
            if value < 0.0 {
                return Err(Error::NegativeEigenvalue { index, value });
            }
        }
        let memory_size = values.iter().filter(|&&v| v != 0.0).count();
        Ok(Regularizer {
            dim: values.len(),
            form: RegularizerForm::Diagonal(values),
            memory_size,
        })
    }

    pub fn low_rank(factor: Mat<f64>) -> Result<Self> {
        if !crate::linalg::mat_is_finite(factor.as_ref()) {
            return Err(Error::NonFinite { what: "regularizer" });
        }
        Ok(Regularizer {
            dim: factor.ncols(),
            memory_size: factor.nrows(),
            form: RegularizerForm::LowRank(factor),
        })
    }

    pub fn zero(d: usize) -> Self {
        Regularizer {
            form: RegularizerForm::Diagonal(vec![0.0; d]),
            dim: d,
            memory_size: 0,
        }
    }

    /// `γI`, the ℓ2-RCL penalty.
    pub fn scaled_identity(d: usize, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("{gamma} is not a nonnegative number")));
        }
        Regularizer::diagonal(vec![gamma; d])
    }

    /// Factorizes an explicit symmetric matrix, rejecting it if it is not PSD.
    pub fn from_dense(sigma: MatRef<'_, f64>) -> Result<Self> {
        let (vals, vecs) = full_eigen(sigma)?;
        let top = vals.first().copied().unwrap_or(0.0).max(0.0);
        if vals.iter().any(|&v| v < -DIAGONAL_TOL * top.max(f64::MIN_POSITIVE)) {
            return Err(Error::NotPsd);
        }
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > DIAGONAL_TOL * top).collect();
        let d = sigma.nrows();
        let factor = Mat::from_fn(keep.len(), d, |r, j| vals[keep[r]].sqrt() * vecs[(j, keep[r])]);
        Regularizer::low_rank(factor)
    }

    pub fn form(&self) -> &RegularizerForm {
        &self.form
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored `d`-vectors.
    pub fn memory_size(&self) -> usize {
        self.memory_size
    }

    pub fn is_zero(&self) -> bool {
        match &self.form {
            RegularizerForm::Diagonal(v) => v.iter().all(|&x| x == 0.0),
            RegularizerForm::LowRank(f) => f.norm_max() == 0.0,
        }
    }

    /// Both storage forms are PSD by construction; this rechecks the stored values.
    pub fn check_psd(&self) -> Result<()> {
        match &self.form {
            RegularizerForm::Diagonal(v) if v.iter().any(|&x| !(x >= 0.0)) => Err(Error::NotPsd),
            _ => Ok(()),
        }
    }

    /// Explicit `d×d` matrix.
    pub fn dense(&self) -> Mat<f64> {
        let mut a = Mat::zeros(self.dim, self.dim);
        self.add_scaled_to(&mut a, 1.0);
        a
    }

    /// `a += c·Σ`.
    pub fn add_scaled_to(&self, a: &mut Mat<f64>, c: f64) {
        match &self.form {
            RegularizerForm::Diagonal(v) => {
                for (i, &x) in v.iter().enumerate() {
                    a[(i, i)] += c * x;
                }
            }
            RegularizerForm::LowRank(f) => {
                let s = gram(f.as_ref());
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        a[(i, j)] += c * s[(i, j)];
                    }
                }
            }
        }
    }

    /// A factor `F` with `Σ = FᵀF`; for the diagonal form one row per nonzero entry.
    pub fn factor(&self) -> Mat<f64> {
        match &self.form {
            RegularizerForm::LowRank(f) => f.clone(),
            RegularizerForm::Diagonal(v) => {
                let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
                Mat::from_fn(nz.len(), self.dim, |r, j| if j == nz[r] { v[j].sqrt() } else { 0.0 })
            }
        }
    }

    /// Diagonal entries if `Σ` is diagonal, otherwise `NotDiagonal`.
    pub fn diagonal_values(&self) -> Result<Vec<f64>> {
        match &self.form {
            RegularizerForm::Diagonal(v) => Ok(v.clone()),
            RegularizerForm::LowRank(_) => {
                let s = self.dense();
                let scale = s.norm_max();
                for j in 0..self.dim {
                    for i in 0..self.dim {
                        if i != j && s[(i, j)].abs() > DIAGONAL_TOL * scale {
                            return Err(Error::NotDiagonal);
                        }
                    }
                }
                Ok((0..self.dim).map(|i| s[(i, i)].max(0.0)).collect())
            }
        }
    }

    /// Plain-text form: `form=diagonal` with `values=`, or `form=lowrank` with one `row=` line per factor row.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match &self.form {
            RegularizerForm::Diagonal(v) => {
                let _ = writeln!(out, "form=diagonal");
                let _ = writeln!(out, "d={}", self.dim);
                let _ = writeln!(out, "values={}", join(v));
            }
            RegularizerForm::LowRank(f) => {
                let _ = writeln!(out, "form=lowrank");
                let _ = writeln!(out, "d={}", self.dim);
                let _ = writeln!(out, "k={}", f.nrows());
                for r in 0..f.nrows() {
                    let row: Vec<f64> = (0..f.ncols()).map(|j| f[(r, j)]).collect();
                    let _ = writeln!(out, "row={}", join(&row));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut form = None;
        let mut d = None;
        let mut values = None;
        let mut rows = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
            match k.trim() {
                "form" => form = Some(v.trim().to_string()),
                "d" => d = Some(parse_f64(v)? as usize),
                "k" => {}
                "values" => values = Some(parse_list(v)?),
                "row" => rows.push(parse_list(v)?),
                other => return Err(Error::Parse(format!("unknown regularizer key `{other}`"))),
            }
        }
        let d = d.ok_or_else(|| Error::Parse("missing key `d`".into()))?;
        match form.as_deref() {
            Some("diagonal") => {
                let v = values.ok_or_else(|| Error::Parse("missing key `values`".into()))?;
                crate::error::check_dim("regularizer values", d, v.len())?;
                Regularizer::diagonal(v)
            }
            Some("lowrank") => {
                for r in &rows {
                    crate::error::check_dim("regularizer factor row", d, r.len())?;
                }
                Regularizer::low_rank(Mat::from_fn(rows.len(), d, |i, j| rows[i][j]))
            }
            other => Err(Error::Parse(format!("unknown regularizer form {other:?}"))),
        }
    }
}

/// Best rank-`k` PSD approximation of the empirical covariance `X₁ᵀX₁/n`.
pub fn topk_empirical(x1: MatRef<'_, f64>, k: usize) -> Result<Regularizer> {
    let (n, d) = (x1.nrows(), x1.ncols());
    if k > n.min(d) {
        return Err(Error::KTooLarge { k, max: n.min(d) });
    }
    if k == 0 {
        return Ok(Regularizer::zero(d));
    }
    let inv_n = 1.0 / n as f64;
    let factor = if d <= n {
        let (vals, vecs) = full_eigen(gram(x1).as_ref())?;
        Mat::from_fn(k, d, |r, j| (vals[r].max(0.0) * inv_n).sqrt() * vecs[(j, r)])
    } else {
        // Right singular vectors from the n×n Gram: v = X₁ᵀu / √s.
        let (vals, vecs) = full_eigen(outer_gram(x1).as_ref())?;
        let u = Mat::from_fn(n, k, |i, r| vecs[(i, r)]);
        let xu = x1.transpose() * &u;
        Mat::from_fn(k, d, |r, j| {
            if vals[r] > 0.0 {
                xu[(j, r)] * inv_n.sqrt()
            } else {
                0.0
            }
        })
    };
    let mut reg = Regularizer::low_rank(factor)?;
    reg.memory_size = k;
    Ok(reg)
}

/// Category counts of a one-hot design.
pub fn one_hot_counts(x: MatRef<'_, f64>) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; x.ncols()];
    for row in 0..x.nrows() {
        let mut hit = None;
        for j in 0..x.ncols() {
            let v = x[(row, j)];
            if v == 1.0 && hit.is_none() {
                hit = Some(j);
            } else if v != 0.0 {
                return Err(Error::NotOneHotDesign { row });
            }
        }
        counts[hit.ok_or(Error::NotOneHotDesign { row })?] += 1;
    }
    Ok(counts)
}

/// Diagonal `Σ` of empirical frequencies, keeping coordinates seen at least `min_count` times.
pub fn onehot_frequency(x1: MatRef<'_, f64>, min_count: usize) -> Result<Regularizer> {
    if min_count == 0 {
        return Err(invalid("min_count", "must be positive"));
    }
    let counts = one_hot_counts(x1)?;
    Ok(frequency_regularizer(&counts, x1.nrows(), min_count))
}

pub(crate) fn frequency_regularizer(counts: &[usize], n: usize, min_count: usize) -> Regularizer {
    let values = counts
        .iter()
        .map(|&c| if c >= min_count { c as f64 / n as f64 } else { 0.0 })
        .collect();
    Regularizer::diagonal(values).expect("frequencies are finite and nonnegative")
}

/// `γ_i = μ_i` when `μ_i ≥ 1/n`, else 0.
pub fn head_regularizer(g: &Spectrum, n: usize) -> Regularizer {
    let threshold = 1.0 / n.max(1) as f64;
    let values = g
        .values()
        .iter()
        .map(|&m| if m >= threshold { m } else { 0.0 })
        .collect();
    Regularizer::diagonal(values).expect("spectrum entries are finite and nonnegative")
}

/// `γ_i = μ_i` for the first `k` coordinates, else 0.
pub fn topk_spectrum_regularizer(g: &Spectrum, k: usize) -> Result<Regularizer> {
    if k > g.len() {
        return Err(Error::KTooLarge { k, max: g.len() });
    }
    let values = g
        .values()
        .iter()
        .enumerate()
        .map(|(i, &m)| if i < k { m } else { 0.0 })
        .collect();
    Regularizer::diagonal(values)
}

/// CountSketch memory `Σ = (S X₁/√n)ᵀ(S X₁/√n)`, with `S` a `k×n` sketch.
pub fn sketch_regularizer_with<R: Rng + ?Sized>(x1: MatRef<'_, f64>, k: usize, rng: &mut R) -> Result<Regularizer> {
    if k == 0 {
        return Err(invalid("k", "sketch size must be at least 1"));
    }
    let (n, d) = (x1.nrows(), x1.ncols());
    let scale = 1.0 / (n.max(1) as f64).sqrt();
    let mut factor = Mat::zeros(k, d);
    for i in 0..n {
        let bucket = rng.random_range(0..k);
        let sign = if rng.random::<bool>() { scale } else { -scale };
        for j in 0..d {
            factor[(bucket, j)] += sign * x1[(i, j)];
        }
    }
    Regularizer::low_rank(factor)
}

pub fn sketch_regularizer(x1: MatRef<'_, f64>, k: usize, seed: u64) -> Result<Regularizer> {
    sketch_regularizer_with(x1, k, &mut ChaCha20Rng::seed_from_u64(seed))
}
