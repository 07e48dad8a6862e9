//! Flat `key = value` experiment configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Unknown keys are rejected so that typos surface early.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use grcl::model::{make_problem_pk, Design, ProblemInstance};
use grcl::risk::{Algorithm, RegularizerBuilder, RiskWeighting};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "pk_k",
    "pk_d",
    "design",
    "instance_file",
    "sigma2",
    "w_star_scale",
    "n_values",
    "n",
    "k_values",
    "algorithms",
    "regularizer",
    "reps",
    "seed",
    "weighting",
    "output",
    "suites",
    "verify_reps",
    "verify_instances",
];

/// Memory builder family swept by `sweep-k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepRegularizer {
    TopkEmpirical,
    TopkSpectrum,
    Sketch,
}

impl SweepRegularizer {
    pub fn builder(self, k: usize) -> RegularizerBuilder {
        match self {
            SweepRegularizer::TopkEmpirical => RegularizerBuilder::TopkEmpirical(k),
            SweepRegularizer::TopkSpectrum => RegularizerBuilder::TopkSpectrum(k),
            SweepRegularizer::Sketch => RegularizerBuilder::Sketch(k),
        }
    }

    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "topk" => Ok(SweepRegularizer::TopkEmpirical),
            "spectrum" => Ok(SweepRegularizer::TopkSpectrum),
            "sketch" => Ok(SweepRegularizer::Sketch),
            other => Err(CliError::Config(format!(
                "unknown regularizer `{other}` (expected topk, spectrum or sketch)"
            ))),
        }
    }
}

/// Everything a sweep or verification run needs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance: ProblemInstance,
    pub n_values: Vec<usize>,
    pub n: usize,
    pub k_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub regularizer: SweepRegularizer,
    pub reps: usize,
    pub seed: u64,
    pub weighting: RiskWeighting,
    pub output: Option<PathBuf>,
    pub suites: Vec<String>,
    pub verify_reps: Option<usize>,
    pub verify_instances: Option<usize>,
}

/// `count` log-spaced integers from `lo` to `hi` inclusive.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if count <= 1 {
        return vec![lo];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

impl ExperimentConfig {
    /// Configuration for the `P(k)` family with every other field at its default.
    pub fn for_pk(k: usize, d: usize, design: Design) -> Result<Self, CliError> {
        Ok(Self::defaults(make_problem_pk(k, d, design)?))
    }

    pub fn defaults(instance: ProblemInstance) -> Self {
        ExperimentConfig {
            instance,
            n_values: log_spaced(100, 5000, 8),
            n: 5000,
            k_values: Vec::new(),
            algorithms: vec![
                Algorithm::Ocl,
                Algorithm::Joint,
                Algorithm::Grcl(RegularizerBuilder::TopkEmpirical(5)),
            ],
            regularizer: SweepRegularizer::TopkEmpirical,
            reps: 20,
            seed: 0,
            weighting: RiskWeighting::Joint,
            output: None,
            suites: Vec::new(),
            verify_reps: None,
            verify_instances: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Parses configuration text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self, CliError> {
        let map = parse_lines(text)?;
        let resolve = |p: &str| -> PathBuf {
            let p = PathBuf::from(p);
            match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            }
        };

        let design = match map.get("design") {
            Some(s) => Design::parse(s).map_err(|e| CliError::Config(e.to_string()))?,
            None => Design::Gaussian,
        };
        let mut instance = match map.get("instance_file") {
            Some(file) => {
                if map.contains_key("pk_k") || map.contains_key("pk_d") {
                    return Err(CliError::Config("instance_file conflicts with pk_k/pk_d".into()));
                }
                let path = resolve(file);
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
                ProblemInstance::from_text(&text).map_err(|e| CliError::Config(e.to_string()))?
            }
            None => {
                let k = get_usize(&map, "pk_k")?.unwrap_or(15);
                let d = get_usize(&map, "pk_d")?.unwrap_or(200);
                make_problem_pk(k, d, design).map_err(|e| CliError::Config(e.to_string()))?
            }
        };
        let sigma2 = get_f64(&map, "sigma2")?.unwrap_or(instance.sigma2());
        let scale = get_f64(&map, "w_star_scale")?.unwrap_or(1.0);
        if sigma2 != instance.sigma2() || scale != 1.0 {
            let w: Vec<f64> = instance.w_star().iter().map(|x| x * scale).collect();
            instance = instance.with_signal(w, sigma2).map_err(|e| CliError::Config(e.to_string()))?;
        }

        let mut cfg = ExperimentConfig::defaults(instance);
        if let Some(v) = get_usize_list(&map, "n_values")? {
            cfg.n_values = v;
        }
        if let Some(n) = get_usize(&map, "n")? {
            cfg.n = n;
        }
        if let Some(v) = get_usize_list(&map, "k_values")? {
            cfg.k_values = v;
        }
        if let Some(s) = map.get("algorithms") {
            cfg.algorithms = split_list(s)
                .map(|a| Algorithm::parse(a).map_err(|e| CliError::Config(e.to_string())))
                .collect::<Result<_, _>>()?;
        }
        if let Some(s) = map.get("regularizer") {
            cfg.regularizer = SweepRegularizer::parse(s)?;
        }
        if let Some(r) = get_usize(&map, "reps")? {
            cfg.reps = r;
        }
        if let Some(s) = map.get("seed") {
            cfg.seed = s
                .parse()
                .map_err(|_| CliError::Config(format!("seed: `{s}` is not an unsigned integer")))?;
        }
        if let Some(s) = map.get("weighting") {
            cfg.weighting = RiskWeighting::parse(s).map_err(|e| CliError::Config(e.to_string()))?;
        }
        if let Some(s) = map.get("output") {
            cfg.output = Some(resolve(s));
        }
        if let Some(s) = map.get("suites") {
            cfg.suites = split_list(s).map(str::to_string).collect();
        }
        cfg.verify_reps = get_usize(&map, "verify_reps")?;
        cfg.verify_instances = get_usize(&map, "verify_instances")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.reps < 2 {
            return Err(CliError::Config("reps must be at least 2".into()));
        }
        if self.n_values.iter().chain(std::iter::once(&self.n)).any(|&n| n == 0) {
            return Err(CliError::Config("sample sizes must be positive".into()));
        }
        if self.algorithms.is_empty() {
            return Err(CliError::Config("algorithms must not be empty".into()));
        }
        Ok(())
    }
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|x| !x.is_empty())
}

fn get_usize(map: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, CliError> {
    map.get(key)
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("{key}: `{s}` is not a nonnegative integer")))
        })
        .transpose()
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>, CliError> {
    map.get(key)
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("{key}: `{s}` is not a finite number")))
        })
        .transpose()
}

fn get_usize_list(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<usize>>, CliError> {
    map.get(key)
        .map(|s| {
            let v: Vec<usize> = split_list(s)
                .map(|x| {
                    x.parse()
                        .map_err(|_| CliError::Config(format!("{key}: `{x}` is not a nonnegative integer")))
                })
                .collect::<Result<_, _>>()?;
            if v.is_empty() {
                Err(CliError::Config(format!("{key} must not be empty")))
            } else {
                Ok(v)
            }
        })
        .transpose()
}
