//! Sample-size and memory-size sweeps written as CSV.

use std::io::Write;

use grcl::model::{Design, ProblemInstance};
use grcl::regularizers::{head_regularizer, topk_spectrum_regularizer, Regularizer};
use grcl::risk::{monte_carlo_expected_excess, Algorithm, MonteCarloOptions, RegularizerBuilder, RiskWeighting};
use grcl::theory::{gaussian_ocl_upper, grcl_theory_one_hot, joint_theory_one_hot, DEFAULT_B1, DEFAULT_B2};

use crate::config::ExperimentConfig;
use crate::CliError;

pub const CSV_HEADER: &str =
    "algorithm,n,k,reps,excess_mean,excess_stderr,bias_mean,variance_mean,theory_bias,theory_variance";

/// One aggregated `(algorithm, n)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub algorithm: String,
    pub n: usize,
    pub k: Option<usize>,
    pub reps: usize,
    pub excess_mean: f64,
    pub excess_stderr: f64,
    pub bias_mean: f64,
    pub variance_mean: f64,
    pub theory: Option<(f64, f64)>,
}

/// Formats `v` with 12 significant digits, in the style of C's `%.12g`.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{:.11e}", v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim(mantissa.to_string()), exp)
    }
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(format_sig).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.algorithm,
            self.n,
            self.k.map(|k| k.to_string()).unwrap_or_default(),
            self.reps,
            format_sig(self.excess_mean),
            format_sig(self.excess_stderr),
            format_sig(self.bias_mean),
            format_sig(self.variance_mean),
            opt(self.theory.map(|t| t.0)),
            opt(self.theory.map(|t| t.1)),
        )
    }
}

/// Full CSV text including the header.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

/// Writes CSV to the configured output path, or to stdout when none is set.
pub fn write_csv(cfg: &ExperimentConfig, rows: &[SweepRow]) -> Result<(), CliError> {
    let text = to_csv(rows);
    match &cfg.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Theory surrogate matching the CSV weighting, for cells a closed form covers.
fn theory_for(inst: &ProblemInstance, alg: &Algorithm, n: usize, weighting: RiskWeighting) -> Option<(f64, f64)> {
    let report = match (inst.design(), weighting) {
        (Design::OneHot, RiskWeighting::Joint) => {
            let fixed: Option<Regularizer> = match alg {
                Algorithm::Ocl => Some(Regularizer::zero(inst.dim())),
                Algorithm::L2Rcl(g) => Regularizer::scaled_identity(inst.dim(), *g).ok(),
                Algorithm::Grcl(RegularizerBuilder::Head) => Some(head_regularizer(inst.g(), n)),
                Algorithm::Grcl(RegularizerBuilder::TopkSpectrum(k)) => topk_spectrum_regularizer(inst.g(), *k).ok(),
                Algorithm::Grcl(RegularizerBuilder::Fixed(r)) => Some(r.clone()),
                Algorithm::Joint => return joint_theory_one_hot(inst, n).ok().map(|r| (r.bias_surrogate, r.variance_surrogate)),
                Algorithm::Grcl(_) => None,
            };
            grcl_theory_one_hot(inst, &fixed?, n).ok()?
        }
        (Design::Gaussian, RiskWeighting::Task1) if *alg == Algorithm::Ocl => {
            gaussian_ocl_upper(inst, n, DEFAULT_B1, DEFAULT_B2).ok()?
        }
        _ => return None,
    };
    Some((report.bias_surrogate, report.variance_surrogate))
}

/// Evaluates one cell of a sweep.
pub fn run_cell(cfg: &ExperimentConfig, alg: &Algorithm, n: usize) -> Result<SweepRow, CliError> {
    let opts = MonteCarloOptions {
        weighting: cfg.weighting,
        ..Default::default()
    };
    let mc = monte_carlo_expected_excess(&cfg.instance, alg, n, cfg.reps, cfg.seed, &opts)?;
    Ok(SweepRow {
        algorithm: alg.label(),
        n,
        k: alg.memory_parameter(),
        reps: cfg.reps,
        excess_mean: mc.estimate.mean,
        excess_stderr: mc.estimate.std_error,
        bias_mean: mc.mean.bias(),
        variance_mean: mc.mean.variance(),
        theory: theory_for(&cfg.instance, alg, n, cfg.weighting),
    })
}

/// One row per `(algorithm, n)`, algorithms in configuration order.
pub fn run_sweep_n(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let mut rows = Vec::new();
    for alg in &cfg.algorithms {
        for &n in &cfg.n_values {
            rows.push(run_cell(cfg, alg, n)?);
        }
    }
    Ok(rows)
}

/// OCL and joint baselines followed by one GRCL row per memory size.
pub fn run_sweep_k(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    if cfg.k_values.is_empty() {
        return Err(CliError::Config("sweep-k needs a nonempty k_values list".into()));
    }
    let mut rows = vec![run_cell(cfg, &Algorithm::Ocl, cfg.n)?, run_cell(cfg, &Algorithm::Joint, cfg.n)?];
    for &k in &cfg.k_values {
        rows.push(run_cell(cfg, &Algorithm::Grcl(cfg.regularizer.builder(k)), cfg.n)?);
    }
    Ok(rows)
}
