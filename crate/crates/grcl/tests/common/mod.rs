#![allow(dead_code)]

use grcl::faer::{Col, Mat};
use grcl::model::{make_spectrum, Design, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

pub fn gaussian_mat(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_col(rng: &mut ChaCha20Rng, len: usize) -> Col<f64> {
    Col::from_fn(len, |_| rng.sample(StandardNormal))
}

pub fn col(v: &[f64]) -> Col<f64> {
    Col::from_fn(v.len(), |i| v[i])
}

pub fn max_abs_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    (a - b).norm_max()
}

/// Normalized random probability vector with entries bounded away from zero.
pub fn random_simplex(rng: &mut ChaCha20Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn one_hot_instance(g: &[f64], h: &[f64], w: Vec<f64>, sigma2: f64) -> ProblemInstance {
    let norm = |v: &[f64]| -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    };
    ProblemInstance::new(
        w,
        sigma2,
        make_spectrum(&norm(g), true).unwrap(),
        make_spectrum(&norm(h), true).unwrap(),
        Design::OneHot,
    )
    .unwrap()
}

pub fn gaussian_instance(g: &[f64], h: &[f64], w: Vec<f64>, sigma2: f64) -> ProblemInstance {
    ProblemInstance::new(
        w,
        sigma2,
        make_spectrum(g, false).unwrap(),
        make_spectrum(h, false).unwrap(),
        Design::Gaussian,
    )
    .unwrap()
}

/// Random orthogonal matrix from the left singular vectors of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha20Rng, d: usize) -> Mat<f64> {
    let a = gaussian_mat(rng, d, d);
    a.thin_svd().unwrap().U().to_owned()
}

/// Minimum-norm least squares through an explicit thin SVD.
pub fn svd_reference(x: &Mat<f64>, y: &Col<f64>) -> Col<f64> {
    let svd = x.thin_svd().unwrap();
    let s = svd.S().column_vector();
    let top = s[0];
    let mut w = Col::<f64>::zeros(x.ncols());
    for r in 0..s.nrows() {
        if s[r] <= 1e-12 * top {
            continue;
        }
        let coef = (svd.U().col(r).transpose() * y) / s[r];
        w += svd.V().col(r) * coef;
    }
    w
}
