mod common;

use common::*;
use grcl::estimators::{fit_grcl, SolveOptions, Weights};
use grcl::faer::{Mat, Side};
use grcl::model::make_spectrum;
use grcl::regularizers::{
    head_regularizer, onehot_frequency, sketch_regularizer, topk_empirical, topk_spectrum_regularizer,
    Regularizer,
};
use grcl::sampler::sample_one_hot_design_with;
use rand::Rng;

fn empirical_cov(x: &Mat<f64>) -> Mat<f64> {
    (x.transpose() * x) * (1.0 / x.nrows() as f64)
}

fn min_eigenvalue(a: &Mat<f64>) -> f64 {
    let e = a.self_adjoint_eigen(Side::Lower).unwrap();
    e.S().column_vector()[0]
}

#[test]
fn sketch_is_unbiased_for_empirical_covariance() {
    let mut r = rng(21);
    let (n, d, k) = (8, 3, 8);
    let x = gaussian_mat(&mut r, n, d);
    let target = empirical_cov(&x);
    let draws = 10_000;
    let mut mean = Mat::<f64>::zeros(d, d);
    for seed in 0..draws {
        mean += sketch_regularizer(x.as_ref(), k, seed).unwrap().dense();
    }
    mean = mean * (1.0 / draws as f64);
    let scale = target.norm_max();
    assert!(max_abs_diff(&mean, &target) <= 0.02 * scale, "{:?}", max_abs_diff(&mean, &target) / scale);
}

#[test]
fn sketch_is_deterministic_and_rejects_zero_buckets() {
    let mut r = rng(22);
    let x = gaussian_mat(&mut r, 10, 4);
    let a = sketch_regularizer(x.as_ref(), 3, 7).unwrap();
    let b = sketch_regularizer(x.as_ref(), 3, 7).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.memory_size(), 3);
    assert!(sketch_regularizer(x.as_ref(), 0, 7).is_err());
    let zero = sketch_regularizer(Mat::<f64>::zeros(5, 4).as_ref(), 2, 1).unwrap();
    assert!(zero.dense().norm_max() == 0.0);
}

#[test]
fn topk_beats_random_rank_k_alternatives() {
    let mut r = rng(23);
    for &(n, d, k) in &[(30, 8, 3), (6, 12, 2)] {
        let x = gaussian_mat(&mut r, n, d);
        let target = empirical_cov(&x);
        let best = topk_empirical(x.as_ref(), k).unwrap();
        assert_eq!(best.memory_size(), k);
        let err = (best.dense() - &target).norm_l2();
        for _ in 0..100 {
            let f = gaussian_mat(&mut r, k, d) * r.random_range(0.1..1.0);
            let alt = f.transpose() * &f;
            assert!(err <= (alt - &target).norm_l2() + 1e-12);
        }
        // The residual is the spectrum beyond the top k.
        let vals = target.self_adjoint_eigen(Side::Lower).unwrap();
        let s = vals.S().column_vector();
        let tail: f64 = (0..d - k).map(|i| s[i] * s[i]).sum();
        assert!((err - tail.sqrt()).abs() < 1e-9 * (1.0 + err));
    }
}

#[test]
fn full_rank_topk_recovers_covariance() {
    let mut r = rng(24);
    let x = gaussian_mat(&mut r, 50, 10);
    let reg = topk_empirical(x.as_ref(), 10).unwrap();
    assert!(max_abs_diff(&reg.dense(), &empirical_cov(&x)) < 1e-10);
    let x = gaussian_mat(&mut r, 5, 20);
    let reg = topk_empirical(x.as_ref(), 5).unwrap();
    assert!(max_abs_diff(&reg.dense(), &empirical_cov(&x)) < 1e-10);
    assert!(topk_empirical(x.as_ref(), 6).is_err());
    assert!(topk_empirical(x.as_ref(), 0).unwrap().is_zero());
}

#[test]
fn frequency_memory_is_unbiased() {
    let mu = [0.4, 0.3, 0.2, 0.1];
    let spec = make_spectrum(&mu, true).unwrap();
    let n = 20;
    let draws = 4000;
    let mut r = rng(25);
    let mut sum = [0.0; 4];
    let mut sumsq = [0.0; 4];
    for _ in 0..draws {
        let x = sample_one_hot_design_with(&spec, n, &mut r).unwrap();
        let g = onehot_frequency(x.as_ref(), 1).unwrap().diagonal_values().unwrap();
        for i in 0..4 {
            sum[i] += g[i];
            sumsq[i] += g[i] * g[i];
        }
    }
    for i in 0..4 {
        let m = sum[i] / draws as f64;
        let var = (sumsq[i] / draws as f64 - m * m) * draws as f64 / (draws - 1) as f64;
        let se = (var / draws as f64).sqrt();
        assert!((m - mu[i]).abs() <= 3.0 * se, "coordinate {i}: {m} vs {}", mu[i]);
    }
}

#[test]
fn frequency_memory_captures_heavy_coordinates() {
    let n = 1000;
    let mut mu = vec![0.05; 5];
    mu.extend(vec![0.75 / 200.0; 200]);
    let spec = make_spectrum(&mu, true).unwrap();
    let heavy: Vec<usize> = (0..mu.len()).filter(|&i| mu[i] > 10.0 / n as f64).collect();
    assert_eq!(heavy.len(), 5);
    let mut r = rng(26);
    let draws = 2000;
    let mut captured = 0;
    for _ in 0..draws {
        let x = sample_one_hot_design_with(&spec, n, &mut r).unwrap();
        let g = onehot_frequency(x.as_ref(), 1).unwrap().diagonal_values().unwrap();
        if heavy.iter().all(|&i| g[i] > 0.0) {
            captured += 1;
        }
    }
    assert!(captured as f64 / draws as f64 >= 0.999);
}

#[test]
fn frequency_threshold_and_validation() {
    let x = grcl::sampler::one_hot_matrix(&[0, 0, 1, 2, 2, 2], 4);
    let g = onehot_frequency(x.as_ref(), 2).unwrap().diagonal_values().unwrap();
    assert_eq!(g, vec![2.0 / 6.0, 0.0, 0.5, 0.0]);
    assert!(onehot_frequency(x.as_ref(), 0).is_err());
    let dense = Mat::from_fn(2, 2, |_, _| 0.5);
    assert!(onehot_frequency(dense.as_ref(), 1).is_err());
}

#[test]
fn spectrum_builders() {
    let g = make_spectrum(&[0.5, 0.3, 0.15, 0.05], true).unwrap();
    let c = head_regularizer(&g, 10).diagonal_values().unwrap();
    assert_eq!(c, vec![0.5, 0.3, 0.15, 0.0]);
    let t = topk_spectrum_regularizer(&g, 2).unwrap();
    assert_eq!(t.diagonal_values().unwrap(), vec![0.5, 0.3, 0.0, 0.0]);
    assert_eq!(t.memory_size(), 2);
    assert!(topk_spectrum_regularizer(&g, 5).is_err());
}

#[test]
fn diagonal_and_factored_forms_give_the_same_fit() {
    let mut r = rng(27);
    let (n, d) = (6, 9);
    let x = gaussian_mat(&mut r, n, d);
    let y = gaussian_col(&mut r, n);
    let w1 = Weights::new(gaussian_col(&mut r, d)).unwrap();
    let gamma: Vec<f64> = (0..d).map(|i| if i % 3 == 0 { 0.0 } else { r.random_range(0.01..2.0) }).collect();
    let diag = Regularizer::diagonal(gamma.clone()).unwrap();
    let factor = Mat::from_fn(d, d, |i, j| if i == j { gamma[i].sqrt() } else { 0.0 });
    let low = Regularizer::low_rank(factor).unwrap();
    assert!(max_abs_diff(&diag.dense(), &low.dense()) < 1e-15);
    let opts = SolveOptions::default();
    let a = fit_grcl(x.as_ref(), y.as_ref(), &w1, &diag, &opts).unwrap();
    let b = fit_grcl(x.as_ref(), y.as_ref(), &w1, &low, &opts).unwrap();
    assert!((a.as_col() - b.as_col()).norm_max() < 1e-10);
    let c = fit_grcl(x.as_ref(), y.as_ref(), &w1, &Regularizer::from_dense(diag.dense().as_ref()).unwrap(), &opts)
        .unwrap();
    assert!((a.as_col() - c.as_col()).norm_max() < 1e-10);
}

#[test]
fn every_builder_produces_psd_matrices() {
    let mut r = rng(28);
    let x = gaussian_mat(&mut r, 12, 7);
    let g = make_spectrum(&[0.4, 0.2, 0.1, 0.1, 0.1, 0.05, 0.05], true).unwrap();
    let regs = vec![
        topk_empirical(x.as_ref(), 4).unwrap(),
        sketch_regularizer(x.as_ref(), 3, 5).unwrap(),
        head_regularizer(&g, 12),
        topk_spectrum_regularizer(&g, 3).unwrap(),
        Regularizer::scaled_identity(7, 0.3).unwrap(),
    ];
    for reg in regs {
        reg.check_psd().unwrap();
        let dense = reg.dense();
        assert!(max_abs_diff(&dense, &dense.transpose().to_owned()) < 1e-14);
        assert!(min_eigenvalue(&dense) >= -1e-12 * dense.norm_max().max(1e-300));
    }
}

#[test]
fn invalid_regularizers_are_rejected() {
    assert!(Regularizer::diagonal(vec![1.0, -0.1]).is_err());
    assert!(Regularizer::diagonal(vec![f64::NAN]).is_err());
    assert!(Regularizer::scaled_identity(3, -1.0).is_err());
    let indefinite = Mat::from_fn(2, 2, |i, j| if i == j { 0.0 } else { 1.0 });
    assert!(Regularizer::from_dense(indefinite.as_ref()).is_err());
}

#[test]
fn text_round_trip() {
    let mut r = rng(29);
    let regs = vec![
        Regularizer::diagonal(vec![0.0, 0.25, 3.5]).unwrap(),
        Regularizer::low_rank(gaussian_mat(&mut r, 2, 3)).unwrap(),
    ];
    for reg in regs {
        let back = Regularizer::from_text(&reg.to_text()).unwrap();
        assert!(max_abs_diff(&back.dense(), &reg.dense()) < 1e-14);
    }
}
