//! Problem definitions: spectra, two-task instances, index sets and the P(k) family.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};

const ONE_HOT_MASS_TOL: f64 = 1e-9;

/// Eigenvalues of a diagonal covariance in the shared eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    one_hot: bool,
}

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the spectrum was validated as a one-hot sampling distribution.
    pub fn is_one_hot(&self) -> bool {
        self.one_hot
    }

    pub fn is_sorted_desc(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    pub fn trace(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Validates eigenvalues and, for one-hot use, renormalizes them to sum exactly to one.
pub fn make_spectrum(values: &[f64], one_hot: bool) -> Result<Spectrum> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { what: "spectrum" });
        }
        if value < 0.0 {
            return Err(Error::NegativeEigenvalue { index, value });
        }
    }
    let mut values = values.to_vec();
    if one_hot {
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > ONE_HOT_MASS_TOL {
            return Err(Error::OneHotMassMismatch { sum });
        }
        if sum != 1.0 {
            for v in &mut values {
                *v /= sum;
            }
        }
    }
    Ok(Spectrum { values, one_hot })
}

/// Covariate law shared by both tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Design {
    OneHot,
    Gaussian,
}

impl Design {
    pub fn as_str(self) -> &'static str {
        match self {
            Design::OneHot => "one_hot",
            Design::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "one_hot" | "onehot" => Ok(Design::OneHot),
            "gaussian" => Ok(Design::Gaussian),
            other => Err(Error::Parse(format!("unknown design `{other}`"))),
        }
    }
}

/// A well-specified two-task problem `(w*, σ², G, H, design)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    w_star: Vec<f64>,
    sigma2: f64,
    g: Spectrum,
    h: Spectrum,
    design: Design,
}

impl ProblemInstance {
    pub fn new(w_star: Vec<f64>, sigma2: f64, g: Spectrum, h: Spectrum, design: Design) -> Result<Self> {
        let d = w_star.len();
        crate::error::check_dim("task-1 spectrum", d, g.len())?;
        crate::error::check_dim("task-2 spectrum", d, h.len())?;
        if w_star.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "w_star" });
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(invalid("sigma2", format!("{sigma2} is not a nonnegative number")));
        }
        if design == Design::OneHot && !(g.is_one_hot() && h.is_one_hot()) {
            return Err(Error::NotAProbabilitySpectrum);
        }
        Ok(ProblemInstance {
            w_star,
            sigma2,
            g,
            h,
            design,
        })
    }

    pub fn dim(&self) -> usize {
        self.w_star.len()
    }

    pub fn w_star(&self) -> &[f64] {
        &self.w_star
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn g(&self) -> &Spectrum {
        &self.g
    }

    pub fn h(&self) -> &Spectrum {
        &self.h
    }

    pub fn design(&self) -> Design {
        self.design
    }

    /// Same covariances and design with a different signal and noise level.
    pub fn with_signal(&self, w_star: Vec<f64>, sigma2: f64) -> Result<Self> {
        ProblemInstance::new(w_star, sigma2, self.g.clone(), self.h.clone(), self.design)
    }

    /// Plain-text `key=value` form, one key per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "d={}", self.dim());
        let _ = writeln!(out, "sigma2={}", self.sigma2);
        let _ = writeln!(out, "g={}", join(self.g.values()));
        let _ = writeln!(out, "h={}", join(self.h.values()));
        let _ = writeln!(out, "w_star={}", join(&self.w_star));
        let _ = writeln!(out, "design={}", self.design.as_str());
        out
    }

    /// Parses the output of [`ProblemInstance::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let map = parse_key_values(text)?;
        let get = |key: &str| {
            map.get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
        };
        let d: usize = get("d")?
            .parse()
            .map_err(|e| Error::Parse(format!("d: {e}")))?;
        let sigma2 = parse_f64(get("sigma2")?)?;
        let design = Design::parse(get("design")?)?;
        let one_hot = design == Design::OneHot;
        let g = make_spectrum(&parse_list(get("g")?)?, one_hot)?;
        let h = make_spectrum(&parse_list(get("h")?)?, one_hot)?;
        let w_star = parse_list(get("w_star")?)?;
        crate::error::check_dim("serialized w_star", d, w_star.len())?;
        ProblemInstance::new(w_star, sigma2, g, h, design)
    }
}

pub(crate) fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{}`: {e}", s.trim())))
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

/// Splits `key=value` lines; blank lines and `#` comments are skipped.
pub(crate) fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{line}`")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Excess risk split into the signal (bias) and noise (variance) parts.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RiskDecomposition {
    bias: f64,
    variance: f64,
    total: f64,
}

impl RiskDecomposition {
    pub fn new(bias: f64, variance: f64) -> Self {
        RiskDecomposition {
            bias,
            variance,
            total: bias + variance,
        }
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn total(&self) -> f64 {
        self.total
    }
}

/// The benchmark family P(k): geometric spectra whose first `k` task-2 eigenvalues are reversed.
pub fn make_problem_pk(k: usize, d: usize, design: Design) -> Result<ProblemInstance> {
    if k < 1 || k > d {
        return Err(Error::InvalidK { k, d });
    }
    let mut g: Vec<f64> = (0..d).map(|i| 0.5f64.powi(i as i32)).collect();
    let mut h = g.clone();
    h[..k].reverse();
    let one_hot = design == Design::OneHot;
    if one_hot {
        let sum: f64 = g.iter().sum();
        for v in g.iter_mut().chain(h.iter_mut()) {
            *v /= sum;
        }
    }
    let w_star = (1..=d).map(|i| 1.0 / i as f64).collect();
    ProblemInstance::new(
        w_star,
        1.0,
        make_spectrum(&g, one_hot)?,
        make_spectrum(&h, one_hot)?,
        design,
    )
}

/// A subset of coordinate indices `[0, d)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    mask: Vec<bool>,
}

impl IndexSet {
    pub fn from_members(d: usize, members: &[usize]) -> Result<Self> {
        let mut mask = vec![false; d];
        for &i in members {
            if i >= d {
                return Err(invalid("members", format!("index {i} is outside [0, {d})")));
            }
            mask[i] = true;
        }
        Ok(IndexSet { mask })
    }

    pub fn from_mask(mask: Vec<bool>) -> Self {
        IndexSet { mask }
    }

    pub fn empty(d: usize) -> Self {
        IndexSet { mask: vec![false; d] }
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask.get(i).copied().unwrap_or(false)
    }

    pub fn members(&self) -> Vec<usize> {
        (0..self.mask.len()).filter(|&i| self.mask[i]).collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn complement(&self) -> IndexSet {
        IndexSet {
            mask: self.mask.iter().map(|b| !b).collect(),
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        IndexSet {
            mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect(),
        }
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.mask.iter().zip(&other.mask).all(|(a, b)| !a || *b)
    }
}

/// `{i : s_i ≥ 1/n}`.
pub fn one_hot_index_sets(s: &Spectrum, n: usize) -> IndexSet {
    let threshold = 1.0 / n.max(1) as f64;
    IndexSet::from_mask(s.values().iter().map(|&v| v >= threshold).collect())
}

/// `tr / max` over the coordinates outside `exclude`; zero when that part is empty or all-zero.
pub fn effective_rank(s: &Spectrum, exclude: &IndexSet) -> f64 {
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (i, &v) in s.values().iter().enumerate() {
        if !exclude.contains(i) {
            sum += v;
            max = max.max(v);
        }
    }
    if max > 0.0 {
        sum / max
    } else {
        0.0
    }
}

/// `K = {i : s_i > λ*}` with `λ*` the largest threshold whose complement has effective rank `≥ b2·n`.
pub fn gaussian_index_set(s: &Spectrum, n: usize, b2: f64) -> Result<IndexSet> {
    if !(b2 > 0.0) {
        return Err(invalid("b2", "must be positive"));
    }
    let required = b2 * n as f64;
    let mut order: Vec<usize> = (0..s.len()).collect();
    let v = s.values();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    // suffix[j] = sum of v over order[j..]
    let mut suffix = vec![0.0; order.len() + 1];
    for j in (0..order.len()).rev() {
        suffix[j] = suffix[j + 1] + v[order[j]];
    }
    let mut j = 0;
    while j < order.len() {
        let threshold = v[order[j]];
        if threshold <= 0.0 {
            break;
        }
        if suffix[j] / threshold >= required {
            return IndexSet::from_members(s.len(), &order[..j]);
        }
        while j < order.len() && v[order[j]] == threshold {
            j += 1;
        }
    }
    Err(Error::InfeasibleEffectiveRank { required })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum_of(v: &[f64]) -> Spectrum {
        make_spectrum(v, false).unwrap()
    }

    #[test]
    fn make_spectrum_examples() {
        assert_eq!(make_spectrum(&[1.0], true).unwrap().values(), &[1.0]);
        assert_eq!(make_spectrum(&[0.5, 0.5], true).unwrap().values(), &[0.5, 0.5]);
        assert!(matches!(
            make_spectrum(&[0.6, 0.3], true),
            Err(Error::OneHotMassMismatch { .. })
        ));
        assert!(matches!(
            make_spectrum(&[0.6, -0.3], false),
            Err(Error::NegativeEigenvalue { index: 1, .. })
        ));
    }

    #[test]
    fn one_hot_renormalizes_exactly() {
        let s = make_spectrum(&[0.3, 0.3, 0.4 + 5e-10], true).unwrap();
        assert!((s.trace() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn sorted_query_matches_contents() {
        assert!(spectrum_of(&[3.0, 2.0, 2.0]).is_sorted_desc());
        assert!(!spectrum_of(&[1.0, 2.0]).is_sorted_desc());
    }

    #[test]
    fn pk_examples() {
        let p = make_problem_pk(2, 3, Design::Gaussian).unwrap();
        assert_eq!(p.g().values(), &[1.0, 0.5, 0.25]);
        assert_eq!(p.h().values(), &[0.5, 1.0, 0.25]);
        assert_eq!(p.w_star(), &[1.0, 0.5, 1.0 / 3.0]);
        assert_eq!(p.sigma2(), 1.0);
        let p = make_problem_pk(1, 2, Design::Gaussian).unwrap();
        assert_eq!(p.g().values(), p.h().values());
        assert!(matches!(make_problem_pk(0, 2, Design::Gaussian), Err(Error::InvalidK { .. })));
        assert!(matches!(make_problem_pk(3, 2, Design::Gaussian), Err(Error::InvalidK { .. })));
        let p = make_problem_pk(15, 200, Design::Gaussian).unwrap();
        assert_eq!(p.dim(), 200);
        assert_eq!(p.h().values()[0], 0.5f64.powi(14));
        let p = make_problem_pk(15, 200, Design::OneHot).unwrap();
        assert!((p.g().trace() - 1.0).abs() < 1e-15);
        assert!((p.h().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn index_set_examples() {
        assert_eq!(one_hot_index_sets(&spectrum_of(&[1.0]), 4).members(), vec![0]);
        assert_eq!(
            one_hot_index_sets(&spectrum_of(&[0.5, 0.25, 0.25]), 4).members(),
            vec![0, 1, 2]
        );
        assert_eq!(one_hot_index_sets(&spectrum_of(&[0.9, 0.05, 0.05]), 10).members(), vec![0]);
    }

    #[test]
    fn effective_rank_examples() {
        let flat = spectrum_of(&[1.0; 4]);
        assert_eq!(effective_rank(&flat, &IndexSet::empty(4)), 4.0);
        let two = spectrum_of(&[1.0, 0.5]);
        assert_eq!(effective_rank(&two, &IndexSet::from_members(2, &[0]).unwrap()), 1.0);
        let geo: Vec<f64> = (1..=20).map(|i| 0.5f64.powi(i)).collect();
        let r = effective_rank(&spectrum_of(&geo), &IndexSet::empty(20));
        assert!((r - 2.0 * (1.0 - 0.5f64.powi(20))).abs() < 1e-12);
        assert_eq!(effective_rank(&spectrum_of(&[0.0, 0.0]), &IndexSet::empty(2)), 0.0);
    }

    #[test]
    fn gaussian_index_set_examples() {
        let geo: Vec<f64> = (1..=30).map(|i| 0.5f64.powi(i)).collect();
        assert!(matches!(
            gaussian_index_set(&spectrum_of(&geo), 100, 1.0),
            Err(Error::InfeasibleEffectiveRank { .. })
        ));
        let d = 10 * 2 * 5;
        let flat = spectrum_of(&vec![1.0 / d as f64; d]);
        assert!(gaussian_index_set(&flat, 5, 2.0).unwrap().is_empty());
    }

    #[test]
    fn instance_text_round_trip() {
        let p = make_problem_pk(3, 5, Design::OneHot).unwrap();
        let back = ProblemInstance::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
    }
}
