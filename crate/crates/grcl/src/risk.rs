//! Population excess risk, its noise-integrated value for fixed designs, and
//! Monte-Carlo averages over designs.
//!
//! For fixed designs the label noise is integrated in closed form. With
//! `A = X₂ᵀX₂ + nΣ` and `T = I − A⁺X₂ᵀX₂` the second-phase error is
//! `w2 − w* = T(w1 − w*) + A⁺X₂ᵀε₂`, and `w1 − w*` has mean `−P₁w*` and
//! covariance `σ²(X₁ᵀX₁)⁺`. `T` equals `A⁻¹nΣ` when `A` is invertible and the
//! null-space projector of `X₂` when `Σ = 0`, so one formula covers OCL,
//! ℓ2-RCL and GRCL exactly as the estimators compute them.

use faer::{Col, ColRef, Mat, MatRef, Side};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::estimators::{grcl_normal_eigen, stack_rows, SolveOptions, Weights};
use crate::linalg::{gram, outer_gram, weighted_norm2, weighted_row_energy, SymEig};
use crate::model::{Design, ProblemInstance, RiskDecomposition};
use crate::regularizers::{
    head_regularizer, frequency_regularizer, one_hot_counts, sketch_regularizer_with, topk_empirical,
    topk_spectrum_regularizer, Regularizer,
};
use crate::sampler::{
    sample_gaussian_design_with, sample_labels_with, sample_one_hot_design_with, stream_rng, Dataset, StreamTag,
};

/// Which population risk the excess is measured in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiskWeighting {
    /// Task-1 covariance `G`.
    Task1,
    /// Task-2 covariance `H`.
    Task2,
    /// `G + H`.
    #[default]
    Joint,
}

impl RiskWeighting {
    /// Diagonal of the weighting matrix.
    pub fn diagonal(self, inst: &ProblemInstance) -> Vec<f64> {
        let g = inst.g().values();
        let h = inst.h().values();
        match self {
            RiskWeighting::Task1 => g.to_vec(),
            RiskWeighting::Task2 => h.to_vec(),
            RiskWeighting::Joint => g.iter().zip(h).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "task1" => Ok(RiskWeighting::Task1),
            "task2" => Ok(RiskWeighting::Task2),
            "joint" => Ok(RiskWeighting::Joint),
            other => Err(Error::Parse(format!("unknown risk weighting `{other}`"))),
        }
    }
}

/// Mean of replication totals with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// How the noise-integrated risk is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RiskRoute {
    /// Dual (`n×n` kernel) route for unregularized methods with `n < d` and large `d`, primal otherwise.
    #[default]
    Auto,
    /// Explicit `d×d` matrices.
    Primal,
    /// `n×n` kernel matrices; only for OCL and joint learning with `n < d`.
    Dual,
}

/// Smallest `d` at which [`RiskRoute::Auto`] considers the dual route.
pub const DUAL_MIN_DIM: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiskOptions {
    pub solve: SolveOptions,
    pub route: RiskRoute,
}

/// `Σ_i m_i (w_i − w*_i)²`.
pub fn population_excess(w: &Weights, inst: &ProblemInstance, weighting: RiskWeighting) -> Result<f64> {
    check_dim("weights vs instance", inst.dim(), w.dim())?;
    let m = weighting.diagonal(inst);
    let c = w.as_col();
    Ok(inst
        .w_star()
        .iter()
        .enumerate()
        .map(|(i, &ws)| m[i] * (c[i] - ws) * (c[i] - ws))
        .sum())
}

fn check_designs(x1: MatRef<'_, f64>, x2: MatRef<'_, f64>, inst: &ProblemInstance) -> Result<()> {
    check_dim("task-1 design columns", inst.dim(), x1.ncols())?;
    check_dim("task-2 design columns", inst.dim(), x2.ncols())
}

/// Noise-integrated bias/variance of GRCL (OCL when `Σ = 0`) for fixed designs.
pub fn conditional_risk(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    sigma: &Regularizer,
    weighting: RiskWeighting,
) -> Result<RiskDecomposition> {
    conditional_risk_with(x1, x2, inst, sigma, weighting, &RiskOptions::default())
}

pub fn conditional_risk_with(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    sigma: &Regularizer,
    weighting: RiskWeighting,
    opts: &RiskOptions,
) -> Result<RiskDecomposition> {
    check_designs(x1, x2, inst)?;
    check_dim("regularizer dimension", inst.dim(), sigma.dim())?;
    sigma.check_psd()?;
    let m = weighting.diagonal(inst);
    let d = inst.dim();
    let small_n = x1.nrows() < d && x2.nrows() < d;
    let dual = sigma.is_zero()
        && small_n
        && match opts.route {
            RiskRoute::Auto => d >= DUAL_MIN_DIM,
            RiskRoute::Dual => true,
            RiskRoute::Primal => false,
        };
    if dual {
        return ocl_dual(x1, x2, inst, &m, &opts.solve);
    }
    grcl_primal(x1, x2, inst, sigma, &m, &opts.solve)
}

fn grcl_primal(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    sigma: &Regularizer,
    m: &[f64],
    solve: &SolveOptions,
) -> Result<RiskDecomposition> {
    let d = inst.dim();
    let w_star = crate::linalg::col_from_slice(inst.w_star());
    let e1 = SymEig::truncated(gram(x1).as_ref(), solve.tolerance(x1.nrows(), d))?;
    let e2 = if sigma.is_zero() {
        SymEig::truncated(gram(x2).as_ref(), solve.tolerance(x2.nrows(), d))?
    } else {
        grcl_normal_eigen(x2, sigma, solve)?
    };
    // w1 − w* has mean −P₁w*.
    let coef = e1.vecs.transpose() * &w_star;
    let p1w = &w_star - &e1.vecs * &coef;
    // R = A⁺X₂ᵀ, T = I − R X₂.
    let r = e2.apply_pinv(x2.transpose());
    let mut t = -(&r * x2);
    for i in 0..d {
        t[(i, i)] += 1.0;
    }
    let u = &t * &p1w;
    let bias = weighted_norm2(m, u.as_ref());
    let q = Mat::from_fn(d, e1.rank(), |i, j| e1.vecs[(i, j)] / e1.vals[j].sqrt());
    let tq = &t * &q;
    let var1 = weighted_row_energy(m, tq.as_ref());
    let var2 = weighted_row_energy(m, r.as_ref());
    Ok(RiskDecomposition::new(bias, inst.sigma2() * (var1 + var2)))
}

/// Solver for an `n×n` kernel matrix `XXᵀ` with the same cutoff as the primal route.
///
/// `XXᵀ` and `XᵀX` share their nonzero eigenvalues, so truncating the kernel
/// reproduces the primal pseudoinverse. Cholesky is used when the kernel is
/// clearly above the cutoff.
enum KernelSolver {
    Llt(faer::linalg::solvers::Llt<f64>),
    Eig(SymEig),
}

impl KernelSolver {
    fn new(a: &Mat<f64>, tol: f64) -> Result<Self> {
        if let Ok(llt) = a.llt(Side::Lower) {
            let l = llt.L();
            let max_diag = (0..a.nrows()).fold(0.0f64, |acc, i| acc.max(a[(i, i)]));
            let min_pivot = (0..a.nrows()).fold(f64::INFINITY, |acc, i| acc.min(l[(i, i)] * l[(i, i)]));
            if min_pivot > 1e3 * tol * max_diag {
                return Ok(KernelSolver::Llt(llt));
            }
            // Pivots only bound the spectrum from above; settle it with the eigenvalues.
            let vals = a
                .self_adjoint_eigenvalues(Side::Lower)
                .map_err(|e| Error::Numerical(format!("kernel eigenvalues: {e:?}")))?;
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(0.0f64, f64::max);
            if lo > 10.0 * tol * hi {
                return Ok(KernelSolver::Llt(llt));
            }
        }
        Ok(KernelSolver::Eig(SymEig::truncated(a.as_ref(), tol)?))
    }

    fn solve(&self, b: MatRef<'_, f64>) -> Mat<f64> {
        use faer::linalg::solvers::Solve;
        match self {
            KernelSolver::Llt(l) => l.solve(b),
            KernelSolver::Eig(e) => e.apply_pinv(b),
        }
    }

    fn solve_col(&self, b: ColRef<'_, f64>) -> Col<f64> {
        self.solve(b.as_mat()).col(0).to_owned()
    }
}

/// Column-wise weighted energy `Σ_i m_i ‖z[:, i]‖²` of an `n×d` matrix.
fn weighted_col_energy(m: &[f64], z: MatRef<'_, f64>) -> f64 {
    (0..z.ncols())
        .map(|i| m[i] * z.col(i).squared_norm_l2())
        .sum()
}

fn ocl_dual(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    m: &[f64],
    solve: &SolveOptions,
) -> Result<RiskDecomposition> {
    let d = inst.dim();
    let l1 = KernelSolver::new(&outer_gram(x1), solve.tolerance(x1.nrows(), d))?;
    let l2 = KernelSolver::new(&outer_gram(x2), solve.tolerance(x2.nrows(), d))?;
    let w_star = crate::linalg::col_from_slice(inst.w_star());
    let c1 = l1.solve_col((x1 * &w_star).as_ref());
    let p1w = &w_star - x1.transpose() * &c1;
    let c2 = l2.solve_col((x2 * &p1w).as_ref());
    let u = &p1w - x2.transpose() * &c2;
    let bias = weighted_norm2(m, u.as_ref());
    let w = l2.solve(x2);
    let var2 = weighted_col_energy(m, w.as_ref());
    let c12 = x1 * x2.transpose();
    let y = x1 - &c12 * &w;
    drop(w);
    let z = l1.solve(y.as_ref());
    let var1 = weighted_col_energy(m, z.as_ref());
    Ok(RiskDecomposition::new(bias, inst.sigma2() * (var1 + var2)))
}

/// Noise-integrated bias/variance of joint learning for fixed designs.
pub fn conditional_risk_joint(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    weighting: RiskWeighting,
) -> Result<RiskDecomposition> {
    conditional_risk_joint_with(x1, x2, inst, weighting, &RiskOptions::default())
}

pub fn conditional_risk_joint_with(
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    weighting: RiskWeighting,
    opts: &RiskOptions,
) -> Result<RiskDecomposition> {
    check_designs(x1, x2, inst)?;
    let m = weighting.diagonal(inst);
    let d = inst.dim();
    let x = stack_rows(x1, x2);
    let n = x.nrows();
    let tol = opts.solve.tolerance(n, d);
    let w_star = crate::linalg::col_from_slice(inst.w_star());
    let dual = n < d
        && match opts.route {
            RiskRoute::Auto => d >= DUAL_MIN_DIM,
            RiskRoute::Dual => true,
            RiskRoute::Primal => false,
        };
    if dual {
        let l = KernelSolver::new(&outer_gram(x.as_ref()), tol)?;
        let c = l.solve_col((&x * &w_star).as_ref());
        let u = &w_star - x.transpose() * &c;
        let z = l.solve(x.as_ref());
        let var = weighted_col_energy(&m, z.as_ref());
        return Ok(RiskDecomposition::new(
            weighted_norm2(&m, u.as_ref()),
            inst.sigma2() * var,
        ));
    }
    let e = SymEig::truncated(gram(x.as_ref()).as_ref(), tol)?;
    let coef = e.vecs.transpose() * &w_star;
    let u = &w_star - &e.vecs * &coef;
    let q = Mat::from_fn(d, e.rank(), |i, j| e.vecs[(i, j)] / e.vals[j].sqrt());
    Ok(RiskDecomposition::new(
        weighted_norm2(&m, u.as_ref()),
        inst.sigma2() * weighted_row_energy(&m, q.as_ref()),
    ))
}

/// How GRCL builds its memory from task-1 data.
#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerBuilder {
    /// Rank-`k` truncation of the empirical task-1 covariance.
    TopkEmpirical(usize),
    /// Empirical one-hot frequencies with a minimum count.
    OnehotFrequency { min_count: usize },
    /// The population rule `γ_i = μ_i·1{μ_i ≥ 1/n}`.
    Head,
    /// The first `k` population eigenvalues of `G`.
    TopkSpectrum(usize),
    /// CountSketch of the task-1 design with `k` buckets.
    Sketch(usize),
    /// A fixed matrix independent of the data.
    Fixed(Regularizer),
}

impl RegularizerBuilder {
    /// Builds `Σ` for one replication; `rng` is only drawn from by the sketch.
    pub fn build<R: rand::Rng + ?Sized>(
        &self,
        inst: &ProblemInstance,
        x1: MatRef<'_, f64>,
        rng: &mut R,
    ) -> Result<Regularizer> {
        match self {
            RegularizerBuilder::TopkEmpirical(k) => topk_empirical(x1, *k),
            RegularizerBuilder::OnehotFrequency { min_count } => {
                crate::regularizers::onehot_frequency(x1, *min_count)
            }
            RegularizerBuilder::Head => Ok(head_regularizer(inst.g(), x1.nrows())),
            RegularizerBuilder::TopkSpectrum(k) => topk_spectrum_regularizer(inst.g(), *k),
            RegularizerBuilder::Sketch(k) => sketch_regularizer_with(x1, *k, rng),
            RegularizerBuilder::Fixed(r) => Ok(r.clone()),
        }
    }

    /// Builds `Σ` from one-hot task-1 counts, when the rule depends on the data only through them.
    pub fn build_from_counts(&self, inst: &ProblemInstance, counts: &[usize]) -> Result<Regularizer> {
        let n: usize = counts.iter().sum();
        match self {
            RegularizerBuilder::OnehotFrequency { min_count } => {
                if *min_count == 0 {
                    return Err(crate::error::invalid("min_count", "must be positive"));
                }
                Ok(frequency_regularizer(counts, n, *min_count))
            }
            RegularizerBuilder::TopkEmpirical(k) => {
                let x1 = crate::sampler::one_hot_matrix(&expand_counts(counts), counts.len());
                topk_empirical(x1.as_ref(), *k)
            }
            RegularizerBuilder::Head => Ok(head_regularizer(inst.g(), n)),
            RegularizerBuilder::TopkSpectrum(k) => topk_spectrum_regularizer(inst.g(), *k),
            RegularizerBuilder::Fixed(r) => Ok(r.clone()),
            RegularizerBuilder::Sketch(_) => Err(Error::Unsupported(
                "a CountSketch memory depends on sample order and sketch randomness, not only on counts".into(),
            )),
        }
    }
}

/// Rows `e_i` repeated `counts[i]` times, in coordinate order.
pub(crate) fn expand_counts(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| std::iter::repeat_n(i, c))
        .collect()
}

/// A learning procedure evaluated by the Monte-Carlo driver.
#[derive(Debug, Clone, PartialEq)]
pub enum Algorithm {
    Ocl,
    L2Rcl(f64),
    Grcl(RegularizerBuilder),
    Joint,
}

impl Algorithm {
    /// Short label used in reports.
    pub fn label(&self) -> String {
        match self {
            Algorithm::Ocl => "ocl".into(),
            Algorithm::L2Rcl(g) => format!("l2rcl:{g}"),
            Algorithm::Joint => "joint".into(),
            Algorithm::Grcl(b) => match b {
                RegularizerBuilder::TopkEmpirical(k) => format!("grcl:topk:{k}"),
                RegularizerBuilder::OnehotFrequency { min_count } => format!("grcl:freq:{min_count}"),
                RegularizerBuilder::Head => "grcl:head".into(),
                RegularizerBuilder::TopkSpectrum(k) => format!("grcl:spectrum:{k}"),
                RegularizerBuilder::Sketch(k) => format!("grcl:sketch:{k}"),
                RegularizerBuilder::Fixed(_) => "grcl:fixed".into(),
            },
        }
    }

    /// Inverse of [`Algorithm::label`] for every builder except `Fixed`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::Parse(format!("unknown algorithm `{s}`"));
        let int = |v: &str| v.parse::<usize>().map_err(|_| Error::Parse(format!("bad integer `{v}` in `{s}`")));
        Ok(match parts.as_slice() {
            ["ocl"] => Algorithm::Ocl,
            ["joint"] => Algorithm::Joint,
            ["l2rcl", g] => {
                let g: f64 = g.parse().map_err(|_| Error::Parse(format!("bad γ in `{s}`")))?;
                if !(g > 0.0 && g.is_finite()) {
                    return Err(Error::Parse(format!("γ must be positive in `{s}`")));
                }
                Algorithm::L2Rcl(g)
            }
            ["grcl", "topk", k] => Algorithm::Grcl(RegularizerBuilder::TopkEmpirical(int(k)?)),
            ["grcl", "freq", m] => Algorithm::Grcl(RegularizerBuilder::OnehotFrequency { min_count: int(m)? }),
            ["grcl", "head"] => Algorithm::Grcl(RegularizerBuilder::Head),
            ["grcl", "spectrum", k] => Algorithm::Grcl(RegularizerBuilder::TopkSpectrum(int(k)?)),
            ["grcl", "sketch", k] => Algorithm::Grcl(RegularizerBuilder::Sketch(int(k)?)),
            _ => return Err(bad()),
        })
    }

    /// Memory size parameter `k` of builders that have one.
    pub fn memory_parameter(&self) -> Option<usize> {
        match self {
            Algorithm::Grcl(
                RegularizerBuilder::TopkEmpirical(k) | RegularizerBuilder::TopkSpectrum(k) | RegularizerBuilder::Sketch(k),
            ) => Some(*k),
            _ => None,
        }
    }

    /// Regularizer for GRCL-type methods; `None` for joint learning.
    pub fn regularizer<R: rand::Rng + ?Sized>(
        &self,
        inst: &ProblemInstance,
        x1: MatRef<'_, f64>,
        rng: &mut R,
    ) -> Result<Option<Regularizer>> {
        match self {
            Algorithm::Ocl => Ok(Some(Regularizer::zero(inst.dim()))),
            Algorithm::L2Rcl(g) => Regularizer::scaled_identity(inst.dim(), *g).map(Some),
            Algorithm::Grcl(b) => b.build(inst, x1, rng).map(Some),
            Algorithm::Joint => Ok(None),
        }
    }
}

/// Noise-integrated risk of `alg` on fixed designs.
pub fn algorithm_conditional_risk<R: rand::Rng + ?Sized>(
    alg: &Algorithm,
    x1: MatRef<'_, f64>,
    x2: MatRef<'_, f64>,
    inst: &ProblemInstance,
    weighting: RiskWeighting,
    opts: &RiskOptions,
    rng: &mut R,
) -> Result<RiskDecomposition> {
    match alg.regularizer(inst, x1, rng)? {
        Some(sigma) => conditional_risk_with(x1, x2, inst, &sigma, weighting, opts),
        None => conditional_risk_joint_with(x1, x2, inst, weighting, opts),
    }
}

/// Settings of a Monte-Carlo run beyond the algorithm and sample size.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonteCarloOptions {
    pub weighting: RiskWeighting,
    pub risk: RiskOptions,
}

/// Aggregated replications.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloResult {
    pub estimate: MonteCarloEstimate,
    pub mean: RiskDecomposition,
}

/// Task designs of one replication, drawn from their own streams.
pub fn sample_designs(inst: &ProblemInstance, n: usize, master_seed: u64, replication: u64) -> Result<(Mat<f64>, Mat<f64>)> {
    let mut r1 = stream_rng(master_seed, replication, StreamTag::Task1Design);
    let mut r2 = stream_rng(master_seed, replication, StreamTag::Task2Design);
    Ok(match inst.design() {
        Design::OneHot => (
            sample_one_hot_design_with(inst.g(), n, &mut r1)?,
            sample_one_hot_design_with(inst.h(), n, &mut r2)?,
        ),
        Design::Gaussian => (
            sample_gaussian_design_with(inst.g(), n, &mut r1),
            sample_gaussian_design_with(inst.h(), n, &mut r2),
        ),
    })
}

/// Both labelled datasets of one replication.
pub fn sample_replication(inst: &ProblemInstance, n: usize, master_seed: u64, replication: u64) -> Result<(Dataset, Dataset)> {
    let (x1, x2) = sample_designs(inst, n, master_seed, replication)?;
    let mut e1 = stream_rng(master_seed, replication, StreamTag::Task1Noise);
    let mut e2 = stream_rng(master_seed, replication, StreamTag::Task2Noise);
    let y1 = sample_labels_with(x1.as_ref(), inst.w_star(), inst.sigma2(), &mut e1)?;
    let y2 = sample_labels_with(x2.as_ref(), inst.w_star(), inst.sigma2(), &mut e2)?;
    Ok((Dataset::new(x1, y1, master_seed)?, Dataset::new(x2, y2, master_seed)?))
}

/// Expected excess over random designs, with label noise integrated analytically.
pub fn monte_carlo_expected_excess(
    inst: &ProblemInstance,
    alg: &Algorithm,
    n: usize,
    reps: usize,
    seed: u64,
    opts: &MonteCarloOptions,
) -> Result<MonteCarloResult> {
    if reps < 2 {
        return Err(crate::error::invalid("reps", "at least two replications are required"));
    }
    let per_rep: Vec<RiskDecomposition> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let (x1, x2) = sample_designs(inst, n, seed, rep)?;
            let mut rng = stream_rng(seed, rep, StreamTag::Sketch);
            algorithm_conditional_risk(alg, x1.as_ref(), x2.as_ref(), inst, opts.weighting, &opts.risk, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(aggregate(&per_rep))
}

/// Order-fixed compensated aggregation of replication results.
pub fn aggregate(per_rep: &[RiskDecomposition]) -> MonteCarloResult {
    let reps = per_rep.len();
    let r = reps as f64;
    let bias = kahan_sum(per_rep.iter().map(|x| x.bias())) / r;
    let variance = kahan_sum(per_rep.iter().map(|x| x.variance())) / r;
    let mean = kahan_sum(per_rep.iter().map(|x| x.total())) / r;
    let ss = kahan_sum(per_rep.iter().map(|x| (x.total() - mean) * (x.total() - mean)));
    let std_error = if reps > 1 { (ss / (r - 1.0)).sqrt() / r.sqrt() } else { 0.0 };
    MonteCarloResult {
        estimate: MonteCarloEstimate {
            mean,
            std_error,
            replications: reps,
        },
        mean: RiskDecomposition::new(bias, variance),
    }
}

/// Neumaier-compensated sum.
pub fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Counts of a one-hot design, used by count-based oracles.
pub fn design_counts(x: MatRef<'_, f64>) -> Result<Vec<usize>> {
    one_hot_counts(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_problem_pk, make_spectrum};

    fn one_dim() -> ProblemInstance {
        let s = make_spectrum(&[1.0], true).unwrap();
        ProblemInstance::new(vec![1.0], 1.0, s.clone(), s, Design::OneHot).unwrap()
    }

    #[test]
    fn population_excess_examples() {
        let inst = make_problem_pk(2, 3, Design::Gaussian).unwrap();
        let w = Weights::from_slice(inst.w_star()).unwrap();
        assert_eq!(population_excess(&w, &inst, RiskWeighting::Joint).unwrap(), 0.0);
        let mut v = inst.w_star().to_vec();
        v[0] += 1.0;
        let w = Weights::from_slice(&v).unwrap();
        assert!((population_excess(&w, &inst, RiskWeighting::Joint).unwrap() - 1.5).abs() < 1e-15);
        assert!(population_excess(&Weights::zeros(2), &inst, RiskWeighting::Joint).is_err());
    }

    #[test]
    fn single_coordinate_one_hot() {
        let inst = one_dim();
        let x = Mat::from_fn(1, 1, |_, _| 1.0);
        let r = conditional_risk(x.as_ref(), x.as_ref(), &inst, &Regularizer::zero(1), RiskWeighting::Joint).unwrap();
        assert!(r.bias().abs() < 1e-15);
        assert!((r.variance() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_signal_zero_noise() {
        let inst = make_problem_pk(3, 6, Design::Gaussian)
            .unwrap()
            .with_signal(vec![0.0; 6], 0.0)
            .unwrap();
        let (x1, x2) = sample_designs(&inst, 4, 1, 0).unwrap();
        let r = conditional_risk(x1.as_ref(), x2.as_ref(), &inst, &Regularizer::zero(6), RiskWeighting::Joint).unwrap();
        assert_eq!((r.bias(), r.variance(), r.total()), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kahan_sum_is_exact_on_cancellation() {
        assert_eq!(kahan_sum([1e16, 1.0, -1e16].into_iter()), 1.0);
    }

    #[test]
    fn too_few_replications() {
        let inst = one_dim();
        assert!(monte_carlo_expected_excess(&inst, &Algorithm::Ocl, 3, 1, 0, &MonteCarloOptions::default()).is_err());
    }
}
