//! Verification suites: identity, sandwich and ordering checks with measured
//! versus required values.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use grcl::faer::linalg::solvers::Solve;
use grcl::faer::{Col, Mat, Side};
use grcl::model::{make_spectrum, Design, ProblemInstance};
use grcl::oracle::{binomial_mixed_moment, enumerate, EnumerationBudget};
use grcl::regularizers::Regularizer;
use grcl::risk::{
    monte_carlo_expected_excess, Algorithm, MonteCarloOptions, MonteCarloResult, RegularizerBuilder, RiskWeighting,
};
use grcl::theory::{gaussian_ocl_lower, gaussian_ocl_upper, joint_theory_one_hot, DEFAULT_B1};
use grcl::{fit_grcl, fit_ocl, SolveOptions, Weights};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::config::ExperimentConfig;
use crate::sweep::{format_sig, run_sweep_k, run_sweep_n, SweepRow};
use crate::CliError;

/// A single measured-versus-required comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub label: String,
    pub measured: f64,
    pub required: String,
    pub passed: bool,
}

impl Check {
    pub fn at_least(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            required: format!(">= {}", format_sig(bound)),
            passed: measured >= bound,
        }
    }

    pub fn at_most(label: impl Into<String>, measured: f64, bound: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            required: format!("<= {}", format_sig(bound)),
            passed: measured <= bound,
        }
    }

    pub fn within(label: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Check {
            label: label.into(),
            measured,
            required: format!("in [{}, {}]", format_sig(lo), format_sig(hi)),
            passed: measured >= lo && measured <= hi,
        }
    }
}

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub elapsed: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Summary line followed by one line per check.
    pub fn render(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let mut out = format!(
            "suite {}: {} ({}/{} checks, {:.1} s)\n",
            self.name,
            if self.passed() { "PASS" } else { "FAIL" },
            ok,
            self.checks.len(),
            self.elapsed.as_secs_f64()
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "  [{}] {}: measured {} (required {})",
                if c.passed { "ok" } else { "FAIL" },
                c.label,
                format_sig(c.measured),
                c.required
            );
        }
        out
    }
}

/// Scale knobs shared by the suites. `None` keeps each suite's own default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifySettings {
    pub seed: u64,
    pub reps: Option<usize>,
    pub instances: Option<usize>,
}

impl VerifySettings {
    fn reps(&self, default: usize) -> usize {
        self.reps.unwrap_or(default).max(2)
    }

    fn instances(&self, default: usize) -> usize {
        self.instances.unwrap_or(default).max(1)
    }

    fn rng(&self, salt: u64) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(salt);
        rng
    }
}

type SuiteFn = fn(&VerifySettings) -> Result<Vec<Check>, CliError>;

/// Every suite in its canonical order.
pub const SUITES: &[(&str, SuiteFn)] = &[
    ("sample_sweep", sample_sweep),
    ("memory_sweep", memory_sweep),
    ("sandwich", sandwich),
    ("joint_bias", joint_bias),
    ("moments", moments),
    ("ocl_plateau", ocl_plateau),
    ("memory_bottleneck", memory_bottleneck),
    ("head_memory", head_memory),
    ("reductions", reductions),
    ("oracle", oracle),
    ("gaussian", gaussian),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

pub fn run_suite(name: &str, settings: &VerifySettings) -> Result<SuiteReport, CliError> {
    let (_, f) = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| CliError::Config(format!("unknown suite `{name}`; known: {}", suite_names().join(", "))))?;
    let start = Instant::now();
    let checks = f(settings)?;
    Ok(SuiteReport {
        name: name.to_string(),
        checks,
        elapsed: start.elapsed(),
    })
}

/// Suites named in the configuration, all of them when none are named.
pub fn run_verify(cfg: &ExperimentConfig, only: Option<&str>) -> Result<Vec<SuiteReport>, CliError> {
    let settings = VerifySettings {
        seed: cfg.seed,
        reps: cfg.verify_reps,
        instances: cfg.verify_instances,
    };
    let names: Vec<String> = match only {
        Some(s) => vec![s.to_string()],
        None if !cfg.suites.is_empty() => cfg.suites.clone(),
        None => suite_names().into_iter().map(str::to_string).collect(),
    };
    for n in &names {
        if !SUITES.iter().any(|(k, _)| k == n) {
            return Err(CliError::Config(format!("unknown suite `{n}`; known: {}", suite_names().join(", "))));
        }
    }
    names.iter().map(|n| run_suite(n, &settings)).collect()
}

fn one_hot(g: &[f64], h: &[f64], w: Vec<f64>, sigma2: f64) -> Result<ProblemInstance, CliError> {
    let norm = |v: &[f64]| -> Vec<f64> {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    };
    Ok(ProblemInstance::new(
        w,
        sigma2,
        make_spectrum(&norm(g), true)?,
        make_spectrum(&norm(h), true)?,
        Design::OneHot,
    )?)
}

fn unit_normal_vector(rng: &mut ChaCha20Rng, d: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// Power-law heads on the first `d − t` coordinates plus `t ≥ 2` shared tail
/// coordinates carrying mass below `1/n` in both tasks. The task-2 head is a
/// random permutation of its own power law.
fn random_power_law_instance(rng: &mut ChaCha20Rng, d: usize, n: usize) -> Result<ProblemInstance, CliError> {
    let t = (d / 4).max(2);
    let head = d - t;
    let spectrum = |rng: &mut ChaCha20Rng, permute: bool| -> Vec<f64> {
        let a: f64 = rng.random_range(0.5..2.0);
        let tail: Vec<f64> = (0..t).map(|_| rng.random_range(0.2..1.0) / n as f64).collect();
        let tail_mass: f64 = tail.iter().sum();
        let mut v: Vec<f64> = (1..=head).map(|i| (i as f64).powf(-a)).collect();
        if permute {
            v.shuffle(rng);
        }
        let z: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x *= (1.0 - tail_mass) / z);
        v.extend(tail);
        v
    };
    let g = spectrum(rng, false);
    let h = spectrum(rng, true);
    let w = unit_normal_vector(rng, d);
    let sigma2 = rng.random_range(0.25..2.0);
    one_hot(&g, &h, w, sigma2)
}

fn mc(inst: &ProblemInstance, alg: &Algorithm, n: usize, reps: usize, seed: u64) -> Result<MonteCarloResult, CliError> {
    Ok(monte_carlo_expected_excess(inst, alg, n, reps, seed, &MonteCarloOptions::default())?)
}

fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            (lo.ln() + (hi.ln() - lo.ln()) * t).exp().clamp(lo, hi)
        })
        .collect()
}

fn slack(bound: f64) -> f64 {
    1e-12 * bound.abs().max(1.0)
}

/// Exact binomial moments against their one-hot bounds.
fn moments(_: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut head = (0usize, 0usize);
    let mut tail = (0usize, 0usize);
    let mut proj = (0usize, 0usize);
    let mut shifted = (0usize, 0usize);
    let mut mixed_head = (0usize, 0usize);
    let mut mixed_tail = (0usize, 0usize);
    let mut worst_proj = 0.0f64;
    let gammas = [1e-3, 1e-2, 1e-1, 1.0, 10.0];
    let tally = |t: &mut (usize, usize), ok: bool| {
        t.0 += ok as usize;
        t.1 += 1;
    };
    for n in (1..=6).map(|e| 1usize << e) {
        let nf = n as f64;
        for &p in &geometric_grid(1.0 / nf, 1.0, 20) {
            let m = binomial_mixed_moment(n, p, 0.0, 1, 0)?;
            let (lo, hi) = (1.0 / (4.0 * nf * p), 12.0 / (nf * p));
            tally(&mut head, m >= lo - slack(lo) && m <= hi + slack(hi));
            for &g in &gammas {
                let s = nf * g;
                let reference = 1.0 / (nf * nf * (p + g).powi(2)) + (1.0 - p).powi(n as i32) / (s * s);
                let m2 = binomial_mixed_moment(n, p, s, 2, 0)?;
                tally(
                    &mut shifted,
                    m2 >= 0.5 * reference - slack(reference) && m2 <= 144.0 * reference + slack(reference),
                );
                let reference = p / (nf * (p + g).powi(2));
                let m3 = binomial_mixed_moment(n, p, s, 2, 1)?;
                tally(
                    &mut mixed_head,
                    m3 >= reference / 48.0 - slack(reference) && m3 <= 144.0 * reference + slack(reference),
                );
            }
        }
        for &p in &geometric_grid(1e-4 / nf, 1.0 / nf, 20) {
            let m = binomial_mixed_moment(n, p, 0.0, 1, 0)?;
            let (lo, hi) = (nf * p / std::f64::consts::E, nf * p);
            tally(&mut tail, m >= lo - slack(lo) && m <= hi + slack(hi));
            for &g in &gammas {
                let s = nf * g;
                let reference = nf * p / (1.0 + s).powi(2);
                let m3 = binomial_mixed_moment(n, p, s, 2, 1)?;
                tally(
                    &mut mixed_tail,
                    m3 >= reference / std::f64::consts::E - slack(reference) && m3 <= reference + slack(reference),
                );
            }
        }
        for i in 0..20 {
            let p = i as f64 / 19.0;
            let unseen = 1.0 - binomial_mixed_moment(n, p, 0.0, 1, 1)?;
            let err = (unseen - (1.0 - p).powi(n as i32)).abs();
            worst_proj = worst_proj.max(err);
            tally(&mut proj, err <= 1e-12);
        }
    }
    let frac = |t: (usize, usize)| t.0 as f64 / t.1 as f64;
    Ok(vec![
        Check::at_least("head inverse moment in [1/(4np), 12/(np)] (fraction)", frac(head), 1.0),
        Check::at_least("tail inverse moment in [np/e, np] (fraction)", frac(tail), 1.0),
        Check::at_most("P(B = 0) = (1-p)^n, max abs error", worst_proj, 1e-12),
        Check::at_least("shifted inverse square in (1/2, 144) window (fraction)", frac(shifted), 1.0),
        Check::at_least("head mixed moment in (1/48, 144) window (fraction)", frac(mixed_head), 1.0),
        Check::at_least("tail mixed moment in (1/e, 1) window (fraction)", frac(mixed_tail), 1.0),
        Check::at_least("grid points evaluated", (head.1 + tail.1 + proj.1) as f64, 6.0 * 60.0),
    ])
}

/// Exact joint-learning bias against exhaustive enumeration.
fn joint_bias(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut rng = s.rng(4);
    let budget = EnumerationBudget::default();
    let mut checks = Vec::new();
    let mut worst_mass = 0.0f64;
    for idx in 0..s.instances(20) {
        let d = 1 + idx % 3;
        let n = 1 + (idx / 3) % 6;
        let draw = |rng: &mut ChaCha20Rng| -> Vec<f64> {
            let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
            if d > 1 && rng.random_bool(0.3) {
                v[rng.random_range(0..d)] = 0.0;
            }
            v
        };
        let (g, h) = (draw(&mut rng), draw(&mut rng));
        let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let inst = one_hot(&g, &h, w, rng.random_range(0.1..2.0))?;
        let report = enumerate(&inst, n, &Algorithm::Joint, &budget, RiskWeighting::Joint)?;
        let theory = joint_theory_one_hot(&inst, n)?;
        worst_mass = worst_mass.max((report.probability_mass - 1.0).abs());
        checks.push(Check::at_most(
            format!("instance {idx} (d={d}, n={n}): |oracle bias - closed form|"),
            (report.expectation.bias() - theory.bias_surrogate).abs(),
            1e-10,
        ));
    }
    checks.push(Check::at_most("enumeration probability mass, max |sum - 1|", worst_mass, 1e-12));
    Ok(checks)
}

/// Monte-Carlo GRCL risk against the two-sided one-hot surrogate.
fn sandwich(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    const C: f64 = 300.0;
    let mut rng = s.rng(3);
    let reps = s.reps(2000);
    let mut checks = Vec::new();
    for idx in 0..s.instances(50) {
        let d = rng.random_range(5..=20);
        let n = [20, 50, 100][idx % 3];
        let inst = random_power_law_instance(&mut rng, d, n)?;
        let gamma: Vec<f64> = (0..d)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    10f64.powf(rng.random_range(-3.0..0.0))
                }
            })
            .collect();
        let sigma = Regularizer::diagonal(gamma)?;
        let theory = grcl::theory::grcl_theory_one_hot(&inst, &sigma, n)?;
        let res = mc(&inst, &Algorithm::Grcl(RegularizerBuilder::Fixed(sigma)), n, reps, s.seed + idx as u64)?;
        let ratio = |a: f64, b: f64| if b > 0.0 { a / b } else if a == 0.0 { 1.0 } else { f64::INFINITY };
        let tag = format!("instance {idx} (d={d}, n={n})");
        checks.push(Check::within(
            format!("{tag}: total / surrogate"),
            ratio(res.estimate.mean, theory.total()),
            1.0 / C,
            C,
        ));
        checks.push(Check::within(
            format!("{tag}: bias / surrogate"),
            ratio(res.mean.bias(), theory.bias_surrogate),
            1.0 / C,
            C,
        ));
        checks.push(Check::within(
            format!("{tag}: variance / surrogate"),
            ratio(res.mean.variance(), theory.variance_surrogate),
            1.0 / C,
            C,
        ));
    }
    Ok(checks)
}

fn random_gaussian(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> Mat<f64> {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

fn random_col(rng: &mut ChaCha20Rng, len: usize) -> Col<f64> {
    Col::from_fn(len, |_| rng.sample(StandardNormal))
}

/// Estimator reduction identities and first-order optimality.
fn reductions(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut rng = s.rng(9);
    let opts = SolveOptions::default();
    let (mut ridge_err, mut ocl_err, mut stat_err) = (0.0f64, 0.0f64, 0.0f64);
    let problems = s.instances(100);
    for _ in 0..problems {
        let n = rng.random_range(2..=12);
        let d = rng.random_range(2..=12);
        let x2 = random_gaussian(&mut rng, n, d);
        let y2 = random_col(&mut rng, n);
        let w1 = Weights::new(random_col(&mut rng, d))?;
        let nf = n as f64;

        let gamma = 10f64.powf(rng.random_range(-3.0..1.0));
        let w = fit_grcl(x2.as_ref(), y2.as_ref(), &w1, &Regularizer::scaled_identity(d, gamma)?, &opts)?;
        let mut a = x2.transpose() * &x2;
        for i in 0..d {
            a[(i, i)] += nf * gamma;
        }
        let rhs = x2.transpose() * &y2 + w1.as_col() * (nf * gamma);
        let closed = a.llt(Side::Lower).map_err(|e| CliError::Check(format!("{e:?}")))?.solve(&rhs);
        let scale = closed.norm_l2().max(1.0);
        ridge_err = ridge_err.max((w.as_col() - &closed).norm_l2() / scale);

        let zero = fit_grcl(x2.as_ref(), y2.as_ref(), &w1, &Regularizer::zero(d), &opts)?;
        let ocl = fit_ocl(x2.as_ref(), y2.as_ref(), &w1, &opts)?;
        ocl_err = ocl_err.max((zero.as_col() - ocl.as_col()).norm_max());

        let sigma = if rng.random_bool(0.5) {
            let vals: Vec<f64> = (0..d)
                .map(|_| if rng.random_bool(0.4) { 0.0 } else { rng.random_range(0.0..2.0) })
                .collect();
            Regularizer::diagonal(vals)?
        } else {
            let k = rng.random_range(1..=d);
            Regularizer::low_rank(random_gaussian(&mut rng, k, d))?
        };
        let w2 = fit_grcl(x2.as_ref(), y2.as_ref(), &w1, &sigma, &opts)?;
        let dense = sigma.dense();
        let dw = w2.as_col() - w1.as_col();
        let grad = x2.transpose() * (&x2 * w2.as_col() - &y2) * (1.0 / nf) + &dense * &dw;
        let scale = (x2.transpose() * &y2).norm_l2() / nf
            + (x2.squared_norm_l2() / nf + dense.norm_l2()) * (w1.as_col().norm_l2() + w2.as_col().norm_l2());
        stat_err = stat_err.max(grad.norm_l2() / scale.max(f64::MIN_POSITIVE));
    }
    Ok(vec![
        Check::at_most(
            format!("Σ = γI against the ridge closed form, max relative error over {problems} problems"),
            ridge_err,
            1e-10,
        ),
        Check::at_most(format!("Σ = 0 against OCL, max abs difference over {problems} problems"), ocl_err, 1e-12),
        Check::at_most(
            format!("first-order stationarity residual, max relative over {problems} problems"),
            stat_err,
            1e-8,
        ),
    ])
}

/// Monte Carlo against exhaustive enumeration on two-coordinate instances.
fn oracle(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut rng = s.rng(10);
    let reps = s.reps(10_000);
    let budget = EnumerationBudget::default();
    let n = 4;
    let mut checks = Vec::new();
    for idx in 0..s.instances(10) {
        let g = [rng.random_range(0.05..0.95), 0.0];
        let h = [rng.random_range(0.05..0.95), 0.0];
        let (g, h) = ([g[0], 1.0 - g[0]], [h[0], 1.0 - h[0]]);
        let w = vec![rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let inst = one_hot(&g, &h, w, rng.random_range(0.1..2.0))?;
        let grcl = if idx % 2 == 0 {
            RegularizerBuilder::TopkEmpirical(1)
        } else {
            RegularizerBuilder::OnehotFrequency { min_count: 1 }
        };
        let algs = [
            Algorithm::Ocl,
            Algorithm::L2Rcl(rng.random_range(0.01..1.0)),
            Algorithm::Grcl(grcl),
            Algorithm::Joint,
        ];
        for (a, alg) in algs.iter().enumerate() {
            let exact = enumerate(&inst, n, alg, &budget, RiskWeighting::Joint)?.expectation.total();
            let res = mc(&inst, alg, n, reps, s.seed + (idx * 4 + a) as u64)?;
            let tol = 4.0 * res.estimate.std_error + 1e-12 * exact.abs().max(1.0);
            checks.push(Check::at_most(
                format!("instance {idx} {}: |MC - exact| (MC {}, exact {})", alg.label(), format_sig(res.estimate.mean), format_sig(exact)),
                (res.estimate.mean - exact).abs(),
                tol,
            ));
        }
    }
    Ok(checks)
}

/// OCL plateau on the single mismatched dominant feature.
fn ocl_plateau(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let reps = s.reps(2000);
    let mut checks = Vec::new();
    for &n in &[50usize, 200, 1000] {
        let nf = n as f64;
        let inst = one_hot(&[1.0, 0.0], &[1.0 / nf, 1.0 - 1.0 / nf], vec![0.6, 0.8], 1.0)?;
        let ocl = mc(&inst, &Algorithm::Ocl, n, reps, s.seed)?;
        let joint = mc(&inst, &Algorithm::Joint, n, reps, s.seed)?;
        let bias = joint_theory_one_hot(&inst, n)?.bias_surrogate;
        checks.push(Check::at_least(format!("n={n}: OCL expected excess"), ocl.estimate.mean, 0.2));
        checks.push(Check::at_most(
            format!("n={n}: joint expected excess"),
            joint.estimate.mean,
            5.0 / nf + bias,
        ));
    }
    Ok(checks)
}

/// Memory bottleneck with `k + 1` mismatched dominant features and rank-`k` memories.
fn memory_bottleneck(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let (k, d, n) = (3usize, 12usize, 500usize);
    let nf = n as f64;
    let heads = k + 1;
    let g: Vec<f64> = (0..d).map(|i| if i < heads { 1.0 / heads as f64 } else { 0.0 }).collect();
    let h: Vec<f64> = (0..d)
        .map(|i| if i < heads { 1.0 / nf } else { (1.0 - heads as f64 / nf) / (d - heads) as f64 })
        .collect();
    let w: Vec<f64> = (0..d).map(|i| if i < heads { 1.0 / (heads as f64).sqrt() } else { 0.0 }).collect();
    let inst = one_hot(&g, &h, w, 1.0)?;
    let mut rng = s.rng(7);
    let reps = s.reps(400);
    let mut checks = Vec::new();
    for idx in 0..s.instances(20) {
        let mut support: Vec<usize> = (0..heads).collect();
        support.shuffle(&mut rng);
        let mut gamma = vec![0.0; d];
        for &i in &support[..k] {
            gamma[i] = 10f64.powf(rng.random_range(-3.0..1.0));
        }
        let sigma = Regularizer::diagonal(gamma)?;
        let res = mc(&inst, &Algorithm::Grcl(RegularizerBuilder::Fixed(sigma)), n, reps, s.seed + idx as u64)?;
        checks.push(Check::at_least(
            format!("regularizer {idx} (support {:?}): GRCL expected excess", &support[..k]),
            res.estimate.mean,
            0.1,
        ));
    }
    Ok(checks)
}

/// Population memory on the head of `G` against joint learning.
fn head_memory(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut rng = s.rng(8);
    let reps = s.reps(500);
    let n = 100;
    let mut checks = Vec::new();
    for idx in 0..s.instances(20) {
        let d = rng.random_range(5..=20);
        let inst = random_power_law_instance(&mut rng, d, n)?;
        let seed = s.seed + idx as u64;
        let grcl = mc(&inst, &Algorithm::Grcl(RegularizerBuilder::Head), n, reps, seed)?;
        let joint = mc(&inst, &Algorithm::Joint, n, reps, seed)?;
        checks.push(Check::at_most(
            format!("instance {idx} (d={d}): GRCL / joint expected excess"),
            grcl.estimate.mean / joint.estimate.mean,
            10.0,
        ));
    }
    Ok(checks)
}

/// `b2` of the Gaussian bound checks; `d = 500 < 10·n` rules out the default.
pub const GAUSSIAN_CHECK_B2: f64 = 2.0;

/// Truncation of the log-decay power-law pair, shared by every sample size.
const POWER_LAW_DIM: usize = 8000;

/// Gaussian surrogates against each other and against Monte Carlo.
fn gaussian(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    const C: f64 = 50.0;
    let (d, n) = (500usize, 100usize);
    let mut rng = s.rng(11);
    let mut checks = Vec::new();
    let task1 = MonteCarloOptions {
        weighting: RiskWeighting::Task1,
        ..Default::default()
    };
    for (idx, &(head, tail)) in [(1usize, 0.02f64), (1, 0.005), (4, 0.02), (4, 0.005)].iter().enumerate() {
        let v: Vec<f64> = (0..d).map(|i| if i < head { 1.0 } else { tail }).collect();
        let spectrum = make_spectrum(&v, false)?;
        let inst = ProblemInstance::new(unit_normal_vector(&mut rng, d), 1.0, spectrum.clone(), spectrum, Design::Gaussian)?;
        let lower = gaussian_ocl_lower(&inst, n, DEFAULT_B1, GAUSSIAN_CHECK_B2)?.total();
        let upper = gaussian_ocl_upper(&inst, n, DEFAULT_B1, GAUSSIAN_CHECK_B2)?.total();
        let res = monte_carlo_expected_excess(&inst, &Algorithm::Ocl, n, s.reps(40), s.seed + idx as u64, &task1)?;
        let tag = format!("G = H, head {head}, tail {tail}");
        checks.push(Check::at_most(format!("{tag}: lower / upper"), lower / upper, C));
        checks.push(Check::within(
            format!("{tag}: MC task-1 excess (lower {}, upper {})", format_sig(lower), format_sig(upper)),
            res.estimate.mean,
            lower / C,
            C * upper,
        ));
    }

    let (alpha, beta) = (2.0f64, 2.5f64);
    let power_law = |p: f64| -> Result<_, CliError> {
        let v: Vec<f64> = (1..=POWER_LAW_DIM)
            .map(|i| 1.0 / (i as f64 * ((i + 1) as f64).ln().powf(p)))
            .collect();
        Ok(make_spectrum(&v, false)?)
    };
    let w = vec![1.0 / (POWER_LAW_DIM as f64).sqrt(); POWER_LAW_DIM];
    let inst = ProblemInstance::new(w, 1.0, power_law(alpha)?, power_law(beta)?, Design::Gaussian)?;
    let schedule = [(250usize, 8usize), (1000, 8), (4000, 3)];
    let mut means = Vec::new();
    for &(n, reps) in &schedule {
        let reps = s.reps.map_or(reps, |r| r.min(reps)).max(2);
        let res = monte_carlo_expected_excess(&inst, &Algorithm::Ocl, n, reps, s.seed, &task1)?;
        means.push((n, res.estimate.mean));
    }
    let exponent = beta - alpha - 1.0;
    for pair in means.windows(2) {
        let ((n1, e1), (n2, e2)) = (pair[0], pair[1]);
        let rate = ((n2 as f64).ln() / (n1 as f64).ln()).powf(exponent);
        checks.push(Check::at_least(
            format!(
                "power-law pair: excess({n2}) / excess({n1}) (excess {} -> {})",
                format_sig(e1),
                format_sig(e2)
            ),
            e2 / e1,
            0.5 * rate,
        ));
    }
    Ok(checks)
}

fn row<'a>(rows: &'a [SweepRow], label: &str, n: usize) -> Result<&'a SweepRow, CliError> {
    rows.iter()
        .find(|r| r.algorithm == label && r.n == n)
        .ok_or_else(|| CliError::Check(format!("missing row {label} at n={n}")))
}

/// Sample-size sweep on `P(15)` with Gaussian designs.
fn sample_sweep(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut cfg = ExperimentConfig::for_pk(15, 200, Design::Gaussian)?;
    cfg.reps = s.reps(20);
    cfg.seed = s.seed;
    let rows = run_sweep_n(&cfg)?;
    let (lo, hi) = (cfg.n_values[0], *cfg.n_values.last().expect("nonempty grid"));
    let joint_lo = row(&rows, "joint", lo)?.excess_mean;
    let joint_hi = row(&rows, "joint", hi)?.excess_mean;
    let ocl_hi = row(&rows, "ocl", hi)?.excess_mean;
    let grcl_hi = row(&rows, "grcl:topk:5", hi)?.excess_mean;
    Ok(vec![
        Check::at_least(format!("joint excess ratio n={lo} / n={hi}"), joint_lo / joint_hi, 5.0),
        Check::at_least(format!("OCL / joint excess at n={hi}"), ocl_hi / joint_hi, 10.0),
        Check::at_most(format!("GRCL(k=5) / joint excess at n={hi}"), grcl_hi / joint_hi, 3.0),
    ])
}

/// Weighted least-squares non-increasing fit (pool adjacent violators).
pub fn isotonic_non_increasing(y: &[f64], w: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::new();
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push((wi * yi, wi, 1));
        while blocks.len() >= 2 {
            let b = blocks[blocks.len() - 1];
            let a = blocks[blocks.len() - 2];
            if a.0 / a.1 < b.0 / b.1 {
                blocks.pop();
                let last = blocks.last_mut().expect("two blocks present");
                *last = (a.0 + b.0, a.1 + b.1, a.2 + b.2);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, w, len)| std::iter::repeat_n(s / w, len))
        .collect()
}

/// Memory sweep on `P(15)` at a fixed sample size.
fn memory_sweep(s: &VerifySettings) -> Result<Vec<Check>, CliError> {
    let mut cfg = ExperimentConfig::for_pk(15, 200, Design::Gaussian)?;
    cfg.reps = s.reps(20);
    cfg.seed = s.seed;
    cfg.n = 5000;
    cfg.k_values = (0..=15).collect();
    let rows = run_sweep_k(&cfg)?;
    let ocl = row(&rows, "ocl", cfg.n)?;
    let joint = row(&rows, "joint", cfg.n)?;
    let grcl: Vec<&SweepRow> = rows.iter().filter(|r| r.algorithm.starts_with("grcl")).collect();
    let first = grcl.first().expect("k grid is nonempty");
    let last = grcl.last().expect("k grid is nonempty");
    let y: Vec<f64> = grcl.iter().map(|r| r.excess_mean).collect();
    let w: Vec<f64> = grcl.iter().map(|r| 1.0 / r.excess_stderr.max(1e-300).powi(2)).collect();
    let fit = isotonic_non_increasing(&y, &w);
    let worst = grcl
        .iter()
        .zip(&fit)
        .map(|(r, f)| (r.excess_mean - f).abs() / r.excess_stderr.max(1e-300))
        .fold(0.0f64, f64::max);
    Ok(vec![
        Check::at_most("GRCL(k=15) / joint excess", last.excess_mean / joint.excess_mean, 2.0),
        Check::at_most(
            "|GRCL(k=0) - OCL| in standard errors",
            (first.excess_mean - ocl.excess_mean).abs() / first.excess_stderr.max(ocl.excess_stderr).max(1e-300),
            2.0,
        ),
        Check::at_most("max distance to non-increasing fit in standard errors", worst, 2.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotonic_pools_violators() {
        let fit = isotonic_non_increasing(&[3.0, 1.0, 2.0, 0.5], &[1.0; 4]);
        assert_eq!(fit, vec![3.0, 1.5, 1.5, 0.5]);
        let fit = isotonic_non_increasing(&[1.0, 2.0], &[3.0, 1.0]);
        assert_eq!(fit, vec![1.25, 1.25]);
    }

    #[test]
    fn unknown_suite_is_a_config_error() {
        assert!(matches!(
            run_suite("nope", &VerifySettings::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn quick_suites_pass() {
        let s = VerifySettings {
            seed: 1,
            reps: Some(200),
            instances: Some(3),
        };
        for name in ["moments", "joint_bias", "reductions"] {
            let r = run_suite(name, &s).unwrap();
            assert!(r.passed(), "{}", r.render());
        }
    }
}
