//! Random designs and labels.
//!
//! Every draw is a pure function of its seed. Replicated experiments derive
//! one ChaCha stream per `(master_seed, replication, tag)` triple, so results
//! do not depend on the order in which replications are scheduled.

use std::fmt::Write as _;
use std::path::Path;

use faer::{Col, Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::linalg::col_from_slice;
use crate::model::Spectrum;

/// Independent random streams used inside one replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Task1Design = 0,
    Task1Noise = 1,
    Task2Design = 2,
    Task2Noise = 3,
    Sketch = 4,
}

const TAG_SLOTS: u64 = 8;

/// The generator for one `(master_seed, replication, tag)` stream.
pub fn stream_rng(master_seed: u64, replication: u64, tag: StreamTag) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(replication.wrapping_mul(TAG_SLOTS).wrapping_add(tag as u64));
    rng
}

fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A sampled task: design `x` (n×d), labels `y` and the seed that produced it.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Mat<f64>,
    y: Col<f64>,
    seed: u64,
}

impl Dataset {
    pub fn new(x: Mat<f64>, y: Col<f64>, seed: u64) -> Result<Self> {
        check_dim("dataset labels", x.nrows(), y.nrows())?;
        Ok(Dataset { x, y, seed })
    }

    pub fn x(&self) -> MatRef<'_, f64> {
        self.x.as_ref()
    }

    pub fn y(&self) -> &Col<f64> {
        &self.y
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// One line per sample, features then label, separated by `delimiter`.
    pub fn to_delimited(&self, delimiter: char) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in 0..self.dim() {
                let _ = write!(out, "{}{}", self.x[(i, j)], delimiter);
            }
            let _ = writeln!(out, "{}", self.y[i]);
        }
        out
    }

    pub fn write_delimited(&self, path: &Path, delimiter: char) -> std::io::Result<()> {
        std::fs::write(path, self.to_delimited(delimiter))
    }
}

/// Category indices for `n` one-hot rows.
pub fn sample_one_hot_indices<R: Rng + ?Sized>(s: &Spectrum, n: usize, rng: &mut R) -> Result<Vec<usize>> {
    if !s.is_one_hot() {
        return Err(Error::NotAProbabilitySpectrum);
    }
    let values = s.values();
    let last_positive = values
        .iter()
        .rposition(|&v| v > 0.0)
        .ok_or(Error::NotAProbabilitySpectrum)?;
    let mut cdf = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for &v in values {
        acc += v;
        cdf.push(acc);
    }
    Ok((0..n)
        .map(|_| {
            let u: f64 = rng.random();
            cdf.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect())
}

/// Dense one-hot design built from category indices.
pub fn one_hot_matrix(indices: &[usize], d: usize) -> Mat<f64> {
    let mut x = Mat::zeros(indices.len(), d);
    for (row, &i) in indices.iter().enumerate() {
        x[(row, i)] = 1.0;
    }
    x
}

pub fn sample_one_hot_design_with<R: Rng + ?Sized>(s: &Spectrum, n: usize, rng: &mut R) -> Result<Mat<f64>> {
    let indices = sample_one_hot_indices(s, n, rng)?;
    Ok(one_hot_matrix(&indices, s.len()))
}

/// `n` i.i.d. rows, row `j` equal to `e_i` with probability `s_i`.
pub fn sample_one_hot_design(s: &Spectrum, n: usize, seed: u64) -> Result<Mat<f64>> {
    sample_one_hot_design_with(s, n, &mut seeded(seed))
}

pub fn sample_gaussian_design_with<R: Rng + ?Sized>(s: &Spectrum, n: usize, rng: &mut R) -> Mat<f64> {
    let scale: Vec<f64> = s.values().iter().map(|v| v.sqrt()).collect();
    let d = scale.len();
    let mut x = Mat::zeros(n, d);
    for i in 0..n {
        for (j, &sj) in scale.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            x[(i, j)] = sj * z;
        }
    }
    x
}

/// `n` i.i.d. rows `diag(s)^{1/2} z` with `z` standard normal.
pub fn sample_gaussian_design(s: &Spectrum, n: usize, seed: u64) -> Mat<f64> {
    sample_gaussian_design_with(s, n, &mut seeded(seed))
}

pub fn sample_labels_with<R: Rng + ?Sized>(
    x: MatRef<'_, f64>,
    w_star: &[f64],
    sigma2: f64,
    rng: &mut R,
) -> Result<Col<f64>> {
    check_dim("labels: w_star length", x.ncols(), w_star.len())?;
    if !(sigma2 >= 0.0) {
        return Err(crate::error::invalid("sigma2", "must be nonnegative"));
    }
    let sd = sigma2.sqrt();
    let mut y = x * col_from_slice(w_star);
    for i in 0..y.nrows() {
        let e: f64 = rng.sample(StandardNormal);
        y[i] += sd * e;
    }
    Ok(y)
}

/// `y = X w* + ε` with i.i.d. `N(0, σ²)` noise.
pub fn sample_labels(x: MatRef<'_, f64>, w_star: &[f64], sigma2: f64, seed: u64) -> Result<Col<f64>> {
    sample_labels_with(x, w_star, sigma2, &mut seeded(seed))
}
