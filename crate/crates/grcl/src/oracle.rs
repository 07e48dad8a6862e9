//! Exact reference computations for small one-hot problems.
//!
//! One-hot designs enter every estimator only through their category counts,
//! so the design expectation is a finite sum over pairs of multinomial count
//! vectors. Binomial and multinomial weights are computed in log space.

use crate::error::{invalid, Error, Result};
use crate::model::{Design, ProblemInstance, RiskDecomposition};
use crate::risk::{
    conditional_risk_with, conditional_risk_joint_with, expand_counts, kahan_sum, Algorithm, RiskOptions,
    RiskWeighting,
};
use crate::regularizers::Regularizer;
use crate::sampler::one_hot_matrix;

/// Hard cap on the number of enumerated dataset pairs.
pub const MAX_STATES: u64 = 10_000_000;

/// Upper limit on enumerated `(task-1, task-2)` count-vector pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    max_states: u64,
}

impl EnumerationBudget {
    pub fn new(max_states: u64) -> Result<Self> {
        if max_states == 0 || max_states > MAX_STATES {
            return Err(invalid("max_states", format!("must lie in [1, {MAX_STATES}]")));
        }
        Ok(EnumerationBudget { max_states })
    }

    pub fn max_states(&self) -> u64 {
        self.max_states
    }
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        EnumerationBudget { max_states: MAX_STATES }
    }
}

fn log_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

/// `P(B = j)` for `B ~ Bin(n, p)`.
pub fn binomial_pmf(n: usize, j: usize, p: f64) -> Result<f64> {
    check_probability(p)?;
    if j > n {
        return Ok(0.0);
    }
    let lf = log_factorials(n);
    Ok(pmf_with(&lf, n, j, p))
}

fn pmf_with(lf: &[f64], n: usize, j: usize, p: f64) -> f64 {
    if p == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if j == n { 1.0 } else { 0.0 };
    }
    let log = lf[n] - lf[j] - lf[n - j] + j as f64 * p.ln() + (n - j) as f64 * (-p).ln_1p();
    log.exp()
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

/// `E[B^num / (B + shift)^inv]` for `B ~ Bin(n, p)`, with the `j = 0, shift = 0` term set to zero.
pub fn binomial_mixed_moment(n: usize, p: f64, shift: f64, inv_power: u32, num_power: u32) -> Result<f64> {
    check_probability(p)?;
    if !(inv_power == 1 || inv_power == 2) {
        return Err(invalid("inv_power", "must be 1 or 2"));
    }
    if num_power > 1 {
        return Err(invalid("num_power", "must be 0 or 1"));
    }
    if !(shift >= 0.0) || !shift.is_finite() {
        return Err(invalid("shift", "must be a nonnegative number"));
    }
    let lf = log_factorials(n);
    let terms = (0..=n).map(|j| {
        if j == 0 && shift == 0.0 {
            return 0.0;
        }
        let jf = j as f64;
        let num = if num_power == 1 { jf } else { 1.0 };
        num / (jf + shift).powi(inv_power as i32) * pmf_with(&lf, n, j, p)
    });
    Ok(kahan_sum(terms))
}

/// All count vectors of length `d` summing to `n`, in lexicographic order.
pub fn count_vectors(d: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(d: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() + 1 == d {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(d, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    rec(d, n, &mut Vec::with_capacity(d), &mut out);
    out
}

/// `C(n + d − 1, d − 1)`, the number of count vectors.
pub fn count_vector_total(d: usize, n: usize) -> u128 {
    if d == 0 {
        return 0;
    }
    let (a, b) = (n as u128 + d as u128 - 1, (d - 1) as u128);
    let b = b.min(a - b);
    let mut c: u128 = 1;
    for i in 0..b {
        c = c * (a - i) / (i + 1);
    }
    c
}

/// Multinomial probability of `counts` under category probabilities `p`.
pub fn multinomial_probability(counts: &[usize], p: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    let lf = log_factorials(n);
    let mut log = lf[n];
    for (&c, &pi) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if pi == 0.0 {
            return 0.0;
        }
        log += c as f64 * pi.ln() - lf[c];
    }
    log.exp()
}

/// Exact design expectation of the noise-integrated risk, weighted by `G + H`.
pub fn exact_one_hot_expected_excess(
    inst: &ProblemInstance,
    n: usize,
    alg: &Algorithm,
    budget: &EnumerationBudget,
) -> Result<RiskDecomposition> {
    exact_one_hot_expected_excess_with(inst, n, alg, budget, RiskWeighting::Joint)
}

/// Same as [`exact_one_hot_expected_excess`] with a chosen risk weighting.
pub fn exact_one_hot_expected_excess_with(
    inst: &ProblemInstance,
    n: usize,
    alg: &Algorithm,
    budget: &EnumerationBudget,
    weighting: RiskWeighting,
) -> Result<RiskDecomposition> {
    let report = enumerate(inst, n, alg, budget, weighting)?;
    Ok(report.expectation)
}

/// Expectation plus the total probability mass visited.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationReport {
    pub expectation: RiskDecomposition,
    pub probability_mass: f64,
    pub states: u128,
}

pub fn enumerate(
    inst: &ProblemInstance,
    n: usize,
    alg: &Algorithm,
    budget: &EnumerationBudget,
    weighting: RiskWeighting,
) -> Result<EnumerationReport> {
    if inst.design() != Design::OneHot {
        return Err(Error::NotOneHot);
    }
    let d = inst.dim();
    let per_task = count_vector_total(d, n);
    let states = per_task.saturating_mul(per_task);
    if states > budget.max_states() as u128 {
        return Err(Error::BudgetExceeded {
            states,
            max: budget.max_states(),
        });
    }
    let opts = RiskOptions::default();
    let vectors = count_vectors(d, n);
    let weighted = |p: &[f64]| -> Vec<(f64, &Vec<usize>)> {
        vectors
            .iter()
            .map(|c| (multinomial_probability(c, p), c))
            .filter(|(q, _)| *q > 0.0)
            .collect()
    };
    let first = weighted(inst.g().values());
    let second = weighted(inst.h().values());
    let mut bias = Vec::new();
    let mut variance = Vec::new();
    let mut mass = Vec::new();
    for (p1, c1) in &first {
        let x1 = one_hot_matrix(&expand_counts(c1), d);
        let sigma: Option<Regularizer> = match alg {
            Algorithm::Ocl => Some(Regularizer::zero(d)),
            Algorithm::L2Rcl(g) => Some(Regularizer::scaled_identity(d, *g)?),
            Algorithm::Grcl(b) => Some(b.build_from_counts(inst, c1)?),
            Algorithm::Joint => None,
        };
        for (p2, c2) in &second {
            let x2 = one_hot_matrix(&expand_counts(c2), d);
            let r = match &sigma {
                Some(s) => conditional_risk_with(x1.as_ref(), x2.as_ref(), inst, s, weighting, &opts)?,
                None => conditional_risk_joint_with(x1.as_ref(), x2.as_ref(), inst, weighting, &opts)?,
            };
            let p = p1 * p2;
            bias.push(p * r.bias());
            variance.push(p * r.variance());
            mass.push(p);
        }
    }
    Ok(EnumerationReport {
        expectation: RiskDecomposition::new(
            kahan_sum(bias.into_iter()),
            kahan_sum(variance.into_iter()),
        ),
        probability_mass: kahan_sum(mass.into_iter()),
        states,
    })
}
