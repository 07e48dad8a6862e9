//! Closed-form bias and variance surrogates evaluated from the spectra.
//!
//! Two-sided (`≍`) and one-sided (`≲`, `≳`) statements are reported with
//! constant one. The `constant_window` of a report records the multiplicative
//! range the surrogate is meant to be read against; acceptance checks choose
//! their own constants.

use crate::error::{invalid, Error, Result};
use crate::model::{gaussian_index_set, one_hot_index_sets, Design, IndexSet, ProblemInstance};
use crate::regularizers::Regularizer;

/// Window of the two-sided one-hot statements, from the binomial moment bounds.
pub const ONE_HOT_WINDOW: (f64, f64) = (1.0 / 48.0, 144.0);
/// Window of the Gaussian lower bound (only the lower end is claimed).
pub const GAUSSIAN_LOWER_WINDOW: (f64, f64) = (1.0, f64::INFINITY);
/// Window of the Gaussian upper bound (only the upper end is claimed).
pub const GAUSSIAN_UPPER_WINDOW: (f64, f64) = (f64::MIN_POSITIVE, 1.0);

/// Default `b1` of the Gaussian index-set construction.
pub const DEFAULT_B1: f64 = 0.25;
/// Default `b2` of the Gaussian index-set construction.
pub const DEFAULT_B2: f64 = 10.0;

/// Bias and variance surrogates with their constant window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub bias_surrogate: f64,
    pub variance_surrogate: f64,
    pub constant_window: (f64, f64),
}

impl BoundReport {
    pub fn total(&self) -> f64 {
        self.bias_surrogate + self.variance_surrogate
    }
}

fn require_one_hot(inst: &ProblemInstance) -> Result<()> {
    if inst.design() == Design::OneHot {
        Ok(())
    } else {
        Err(Error::NotOneHot)
    }
}

fn require_gaussian(inst: &ProblemInstance) -> Result<()> {
    if inst.design() == Design::Gaussian {
        Ok(())
    } else {
        Err(Error::NotGaussian)
    }
}

fn require_n(n: usize) -> Result<f64> {
    if n == 0 {
        Err(invalid("n", "must be positive"))
    } else {
        Ok(n as f64)
    }
}

/// Joint learning on one-hot designs: exact bias and the two-sided variance surrogate.
pub fn joint_theory_one_hot(inst: &ProblemInstance, n: usize) -> Result<BoundReport> {
    require_one_hot(inst)?;
    let nf = require_n(n)?;
    let (mu, lam, w) = (inst.g().values(), inst.h().values(), inst.w_star());
    let j = one_hot_index_sets(inst.g(), n);
    let k = one_hot_index_sets(inst.h(), n);
    let head = j.union(&k);
    let mut bias = 0.0;
    let mut tail = 0.0;
    for i in 0..inst.dim() {
        let s = mu[i] + lam[i];
        bias += (1.0 - mu[i]).powi(n as i32) * (1.0 - lam[i]).powi(n as i32) * s * w[i] * w[i];
        if !head.contains(i) {
            tail += s * s;
        }
    }
    let variance = inst.sigma2() / nf * (head.len() as f64 + nf * nf * tail);
    Ok(BoundReport {
        bias_surrogate: bias,
        variance_surrogate: variance,
        constant_window: ONE_HOT_WINDOW,
    })
}

/// `γ²/(γ+λ)²` with the value 0 at `γ = 0`.
fn retention(gamma: f64, lambda: f64) -> f64 {
    if gamma == 0.0 {
        0.0
    } else {
        let r = gamma / (gamma + lambda);
        r * r
    }
}

/// GRCL with a diagonal memory on one-hot designs.
pub fn grcl_theory_one_hot(inst: &ProblemInstance, sigma: &Regularizer, n: usize) -> Result<BoundReport> {
    require_one_hot(inst)?;
    let nf = require_n(n)?;
    crate::error::check_dim("regularizer dimension", inst.dim(), sigma.dim())?;
    let gamma = sigma.diagonal_values()?;
    let (mu, lam, w) = (inst.g().values(), inst.h().values(), inst.w_star());
    let j = one_hot_index_sets(inst.g(), n);
    let k = one_hot_index_sets(inst.h(), n);
    let mut bias = 0.0;
    let mut var = 0.0;
    for i in 0..inst.dim() {
        let s = mu[i] + lam[i];
        let carried = retention(gamma[i], lam[i]) + (1.0 - lam[i]).powi(n as i32);
        bias += s * (1.0 - mu[i]).powi(n as i32) * carried * w[i] * w[i];
        let a = if j.contains(i) { 1.0 / (nf * mu[i]) } else { nf * mu[i] };
        let b = if k.contains(i) {
            if lam[i] == 0.0 {
                0.0
            } else {
                lam[i] / (nf * (lam[i] + gamma[i]).powi(2))
            }
        } else {
            nf * lam[i] / (1.0 + nf * gamma[i]).powi(2)
        };
        var += s * carried * a + s * b;
    }
    Ok(BoundReport {
        bias_surrogate: bias,
        variance_surrogate: inst.sigma2() * var,
        constant_window: ONE_HOT_WINDOW,
    })
}

/// Excess of OCL over joint learning on one-hot designs.
pub fn ocl_gap_one_hot(inst: &ProblemInstance, n: usize) -> Result<f64> {
    require_one_hot(inst)?;
    let nf = require_n(n)?;
    let (mu, lam) = (inst.g().values(), inst.h().values());
    let j = one_hot_index_sets(inst.g(), n);
    let k = one_hot_index_sets(inst.h(), n);
    let mut head = 0.0;
    let mut cross = 0.0;
    for i in 0..inst.dim() {
        if k.contains(i) {
            head += mu[i] / lam[i];
        } else if j.contains(i) {
            cross += mu[i] * lam[i];
        }
    }
    Ok(inst.sigma2() / nf * (head + nf * nf * cross))
}

/// Additive ℓ2-RCL upper surrogate over joint learning (the joint term is not included).
pub fn l2rcl_upper_one_hot(inst: &ProblemInstance, gamma: f64, n: usize) -> Result<f64> {
    require_one_hot(inst)?;
    let nf = require_n(n)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(invalid("gamma", "must be positive"));
    }
    let (mu, lam) = (inst.g().values(), inst.h().values());
    let head = one_hot_index_sets(inst.g(), n).union(&one_hot_index_sets(inst.h(), n));
    let w2: f64 = inst.w_star().iter().map(|x| x * x).sum();
    let inv_n = 1.0 / nf;
    let sum: f64 = head
        .members()
        .into_iter()
        .map(|i| mu[i] / (lam[i] + inv_n + gamma) + gamma / (mu[i] + inv_n))
        .sum();
    Ok((gamma + inv_n) * w2 + inst.sigma2() / nf * sum)
}

/// Index sets and tail traces shared by the Gaussian bounds.
struct GaussianSets {
    j: IndexSet,
    k: IndexSet,
    tr_g_tail: f64,
    tr_h_tail: f64,
}

fn gaussian_sets(inst: &ProblemInstance, n: usize, b1: f64, b2: f64) -> Result<GaussianSets> {
    require_gaussian(inst)?;
    require_n(n)?;
    if !(b1 > 0.0) {
        return Err(invalid("b1", "must be positive"));
    }
    let j = gaussian_index_set(inst.g(), n, b2)?;
    let k = gaussian_index_set(inst.h(), n, b2)?;
    let limit = b1 * n as f64;
    for set in [&j, &k] {
        if set.len() as f64 > limit {
            return Err(Error::IndexSetTooLarge { size: set.len(), limit });
        }
    }
    let tail = |v: &[f64], s: &IndexSet| -> f64 { (0..v.len()).filter(|&i| !s.contains(i)).map(|i| v[i]).sum() };
    Ok(GaussianSets {
        tr_g_tail: tail(inst.g().values(), &j),
        tr_h_tail: tail(inst.h().values(), &k),
        j,
        k,
    })
}

/// Lower surrogate for the task-1 excess of OCL under Gaussian designs.
pub fn gaussian_ocl_lower(inst: &ProblemInstance, n: usize, b1: f64, b2: f64) -> Result<BoundReport> {
    let sets = gaussian_sets(inst, n, b1, b2)?;
    let nf = n as f64;
    let (mu, lam, w) = (inst.g().values(), inst.h().values(), inst.w_star());
    let (tg, th) = (sets.tr_g_tail, sets.tr_h_tail);
    let mut bias = 0.0;
    let mut var = 0.0;
    for i in 0..inst.dim() {
        let fg = if sets.j.contains(i) { (tg / (nf * mu[i])).powi(2) } else { 1.0 };
        let fh = if sets.k.contains(i) { (th / (nf * lam[i])).powi(2) } else { 1.0 };
        bias += mu[i] * fg * fh * w[i] * w[i];
        let h_part = if sets.k.contains(i) { 1.0 / lam[i] } else { nf * nf * lam[i] / (th * th) };
        let g_part = if sets.j.contains(i) { 1.0 / mu[i] } else { nf * nf * mu[i] / (tg * tg) };
        var += mu[i] * (h_part + fh * g_part);
    }
    Ok(BoundReport {
        bias_surrogate: bias,
        variance_surrogate: inst.sigma2() / nf * var,
        constant_window: GAUSSIAN_LOWER_WINDOW,
    })
}

/// Upper surrogate for the task-1 excess of OCL under Gaussian designs.
pub fn gaussian_ocl_upper(inst: &ProblemInstance, n: usize, b1: f64, b2: f64) -> Result<BoundReport> {
    let sets = gaussian_sets(inst, n, b1, b2)?;
    let nf = n as f64;
    let (mu, lam, w) = (inst.g().values(), inst.h().values(), inst.w_star());
    let (tg, th) = (sets.tr_g_tail, sets.tr_h_tail);
    let (j, k) = (&sets.j, &sets.k);

    let mut bias_head = 0.0;
    let mut bias_tail = 0.0;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut t3 = 0.0;
    let mut t4 = 0.0;
    let mut max_head_ratio = 0.0f64;
    let mut tail_cross = 0.0;
    let mut max_tail_cross = 0.0f64;
    let mut t6 = 0.0;
    for i in 0..inst.dim() {
        let (in_j, in_k) = (j.contains(i), k.contains(i));
        if in_j {
            bias_head += w[i] * w[i] / mu[i];
        } else {
            bias_tail += mu[i] * w[i] * w[i];
        }
        match (in_j, in_k) {
            (true, true) => {
                t1 += mu[i] / lam[i];
                t3 += 1.0;
            }
            (true, false) => t2 += mu[i] * lam[i],
            (false, false) => t4 += mu[i] * mu[i],
            (false, true) => {}
        }
        if in_k {
            max_head_ratio = max_head_ratio.max(mu[i] / lam[i]);
        } else {
            tail_cross += mu[i] * lam[i];
            max_tail_cross = max_tail_cross.max(mu[i] * lam[i]);
        }
        let g_part = if in_j { 1.0 / mu[i] } else { nf * nf * mu[i] / (tg * tg) };
        let h_part = if in_k { th * th / (nf * nf * lam[i]) } else { lam[i] };
        t6 += g_part * h_part;
    }
    let t2 = nf * nf * t2 / (th * th);
    let t4 = nf * nf * t4 / (tg * tg);
    let t5 = max_head_ratio + nf * (tail_cross + nf * max_tail_cross) / (th * th) + (tg * tg) / (th * th);
    let variance = inst.sigma2() / nf * (t1 + t2 + t3 + t4 + t5 * t6);
    Ok(BoundReport {
        bias_surrogate: (tg / nf).powi(2) * bias_head + bias_tail,
        variance_surrogate: variance,
        constant_window: GAUSSIAN_UPPER_WINDOW,
    })
}
