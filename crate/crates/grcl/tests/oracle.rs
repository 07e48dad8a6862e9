mod common;

use common::*;
use grcl::model::{make_problem_pk, Design, RiskDecomposition};
use grcl::oracle::{
    binomial_mixed_moment, binomial_pmf, count_vector_total, count_vectors, enumerate, exact_one_hot_expected_excess,
    multinomial_probability, EnumerationBudget, MAX_STATES,
};
use grcl::risk::{conditional_risk, conditional_risk_joint, Algorithm, RegularizerBuilder, RiskWeighting};
use grcl::regularizers::Regularizer;
use grcl::sampler::one_hot_matrix;
use grcl::theory::joint_theory_one_hot;

/// Every ordered index sequence of length `n` over `d` categories.
fn sequences(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..d).map(move |i| {
                    let mut t = s.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
}

/// Expectation over ordered sample sequences rather than collapsed counts.
fn sequence_expectation(inst: &grcl::model::ProblemInstance, n: usize, sigma: Option<&Regularizer>) -> RiskDecomposition {
    let d = inst.dim();
    let prob = |s: &[usize], p: &[f64]| s.iter().map(|&i| p[i]).product::<f64>();
    let (mut bias, mut var) = (0.0, 0.0);
    for s1 in sequences(d, n) {
        let p1 = prob(&s1, inst.g().values());
        if p1 == 0.0 {
            continue;
        }
        let x1 = one_hot_matrix(&s1, d);
        for s2 in sequences(d, n) {
            let p2 = prob(&s2, inst.h().values());
            if p2 == 0.0 {
                continue;
            }
            let x2 = one_hot_matrix(&s2, d);
            let r = match sigma {
                Some(s) => conditional_risk(x1.as_ref(), x2.as_ref(), inst, s, RiskWeighting::Joint).unwrap(),
                None => conditional_risk_joint(x1.as_ref(), x2.as_ref(), inst, RiskWeighting::Joint).unwrap(),
            };
            bias += p1 * p2 * r.bias();
            var += p1 * p2 * r.variance();
        }
    }
    RiskDecomposition::new(bias, var)
}

#[test]
fn count_collapse_matches_sequence_enumeration() {
    let inst = one_hot_instance(&[0.6, 0.3, 0.1], &[0.2, 0.2, 0.6], vec![1.0, -0.4, 0.7], 0.8);
    let n = 3;
    let budget = EnumerationBudget::default();
    let sigma = Regularizer::scaled_identity(3, 0.3).unwrap();
    let cases: [(Algorithm, Option<&Regularizer>); 3] = [
        (Algorithm::Ocl, Some(&Regularizer::zero(3))),
        (Algorithm::L2Rcl(0.3), Some(&sigma)),
        (Algorithm::Joint, None),
    ];
    for (alg, s) in cases {
        let exact = exact_one_hot_expected_excess(&inst, n, &alg, &budget).unwrap();
        let brute = sequence_expectation(&inst, n, s);
        assert!((exact.bias() - brute.bias()).abs() < 1e-12, "{}", alg.label());
        assert!((exact.variance() - brute.variance()).abs() < 1e-12, "{}", alg.label());
    }
}

#[test]
fn joint_bias_equals_closed_form() {
    let budget = EnumerationBudget::default();
    let instances = [
        one_hot_instance(&[0.7, 0.3], &[0.4, 0.6], vec![1.0, 2.0], 1.0),
        one_hot_instance(&[0.5, 0.5], &[1.0, 0.0], vec![-1.0, 0.5], 0.3),
        one_hot_instance(&[0.2, 0.3, 0.5], &[0.6, 0.3, 0.1], vec![0.3, -0.2, 1.1], 2.0),
    ];
    for inst in &instances {
        for n in 1..=4 {
            let exact = exact_one_hot_expected_excess(inst, n, &Algorithm::Joint, &budget).unwrap();
            let closed = joint_theory_one_hot(inst, n).unwrap();
            assert!((exact.bias() - closed.bias_surrogate).abs() < 1e-12);
        }
    }
    let inst = &instances[0];
    let exact = exact_one_hot_expected_excess(inst, 3, &Algorithm::Joint, &budget).unwrap();
    let brute = sequence_expectation(inst, 3, None);
    assert!((exact.bias() - brute.bias()).abs() < 1e-12);
}

#[test]
fn enumeration_visits_all_probability_mass() {
    let inst = make_problem_pk(3, 4, Design::OneHot).unwrap();
    let report = enumerate(&inst, 10, &Algorithm::Ocl, &EnumerationBudget::default(), RiskWeighting::Joint).unwrap();
    assert!((report.probability_mass - 1.0).abs() < 1e-12);
    assert_eq!(report.states, 286 * 286);
    assert!(report.expectation.total() > 0.0);
}

#[test]
fn silent_instance_has_zero_risk() {
    let inst = one_hot_instance(&[0.5, 0.5], &[0.25, 0.75], vec![0.0, 0.0], 0.0);
    let budget = EnumerationBudget::default();
    for alg in [Algorithm::Ocl, Algorithm::Joint, Algorithm::Grcl(RegularizerBuilder::TopkEmpirical(1))] {
        assert_eq!(exact_one_hot_expected_excess(&inst, 3, &alg, &budget).unwrap().total(), 0.0);
    }
}

#[test]
fn budget_and_design_are_enforced() {
    let inst = make_problem_pk(2, 6, Design::OneHot).unwrap();
    let small = EnumerationBudget::new(100).unwrap();
    assert!(exact_one_hot_expected_excess(&inst, 5, &Algorithm::Ocl, &small).is_err());
    assert!(EnumerationBudget::new(0).is_err());
    assert!(EnumerationBudget::new(MAX_STATES + 1).is_err());
    let gaussian = make_problem_pk(2, 3, Design::Gaussian).unwrap();
    assert!(exact_one_hot_expected_excess(&gaussian, 2, &Algorithm::Ocl, &EnumerationBudget::default()).is_err());
    let sketch = Algorithm::Grcl(RegularizerBuilder::Sketch(1));
    let tiny = make_problem_pk(1, 2, Design::OneHot).unwrap();
    assert!(exact_one_hot_expected_excess(&tiny, 2, &sketch, &EnumerationBudget::default()).is_err());
}

#[test]
fn count_vectors_and_probabilities() {
    let v = count_vectors(3, 4);
    assert_eq!(v.len() as u128, count_vector_total(3, 4));
    assert!(v.iter().all(|c| c.iter().sum::<usize>() == 4));
    let p = [0.2, 0.5, 0.3];
    let total: f64 = v.iter().map(|c| multinomial_probability(c, &p)).sum();
    assert!((total - 1.0).abs() < 1e-14);
    assert!((multinomial_probability(&[2, 1, 1], &p) - 12.0 * 0.04 * 0.5 * 0.3).abs() < 1e-15);
}

#[test]
fn binomial_moments_match_direct_sums() {
    let choose = |n: usize, j: usize| -> f64 { (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64) };
    for &n in &[1usize, 5, 17, 40] {
        for &p in &[0.0f64, 0.03, 0.5, 0.91, 1.0] {
            for &shift in &[0.0f64, 0.7, 3.0] {
                for inv in [1u32, 2] {
                    for num in [0u32, 1] {
                        let direct: f64 = (0..=n)
                            .filter(|&j| !(j == 0 && shift == 0.0))
                            .map(|j| {
                                let pmf = choose(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
                                (j as f64).powi(num as i32) / (j as f64 + shift).powi(inv as i32) * pmf
                            })
                            .sum();
                        let got = binomial_mixed_moment(n, p, shift, inv, num).unwrap();
                        assert!((got - direct).abs() <= 1e-12 * direct.max(1.0), "n {n} p {p} shift {shift}");
                    }
                }
                let pmf = binomial_pmf(n, n / 2, p).unwrap();
                let direct = choose(n, n / 2) * p.powi((n / 2) as i32) * (1.0 - p).powi((n - n / 2) as i32);
                assert!((pmf - direct).abs() <= 1e-12 * direct.max(1e-300));
            }
        }
    }
    assert!(binomial_mixed_moment(3, 1.5, 0.0, 1, 0).is_err());
    assert!(binomial_mixed_moment(3, 0.5, 0.0, 3, 0).is_err());
    assert!(binomial_mixed_moment(3, 0.5, 0.0, 1, 2).is_err());
}
