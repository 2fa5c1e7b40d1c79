//! Monte Carlo verification of order preservation.
//!
//! Simulates the sampling distribution of an estimator at two ordered
//! parameter values and tests, empirically, whether the estimator
//! distributions are ordered as the analytic conditions predict: usual
//! stochastic order via a DKW band on the empirical CDFs, likelihood ratio
//! order via binned count ratios. Replicates use counter-based substreams of
//! the run seed, so serial and parallel execution produce bit-identical
//! results.
//!
//! This module is deliberately `f64`-only: verdicts must be reproducible
//! across runs and thread counts, and a single concrete float type keeps the
//! arithmetic path fixed.

use rayon::prelude::*;
use serde::Serialize;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::families::{Builtin, FamilyError, FamilyKind, Structure};
use crate::moments::{GKind, MomentError, MomentSpec};
use crate::orders::{
    check_logconcave, check_tp2_mixed, Grid, GridError, OrderError, Verdict,
};
use crate::quad::{self, IntegrationRange, QuadError};
use crate::rng::CounterRng;
use crate::specfun;

/// Default DKW confidence for the stochastic-order band.
pub const DEFAULT_CONFIDENCE: f64 = 0.999;
/// Default number of pooled-quantile bins for the ratio check.
pub const DEFAULT_BINS: usize = 20;

const MIN_REPS: usize = 1000;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Moment(#[from] MomentError),
    #[error("hypothesis check failed to run: {0}")]
    Order(#[from] OrderError),
    #[error("grid construction failed: {0}")]
    Grid(#[from] GridError),
    #[error("estimator constant did not integrate: {0}")]
    Quad(#[from] QuadError),
    #[error("theta pair ({0}, {1}) must be strictly increasing")]
    UnorderedPair(f64, f64),
    #[error("sample size must be at least {min} for {what}")]
    SampleTooSmall { min: usize, what: &'static str },
    #[error("at least {MIN_REPS} replications required, got {got}")]
    TooFewReps { got: usize },
    #[error("confidence must lie in (0.9, 1), got {got}")]
    BadConfidence { got: f64 },
    #[error("at least 5 bins required, got {got}")]
    TooFewBins { got: usize },
    #[error("estimator `{estimator}` does not apply to family `{family}`: {reason}")]
    IncompatibleEstimator {
        estimator: String,
        family: &'static str,
        reason: String,
    },
    #[error("estimator `{estimator}` is inconsistent with claim `{claim}`")]
    ClaimMismatch { estimator: String, claim: String },
    #[error("{infeasible} of {reps} replicates at theta = {theta} were infeasible (above the 1% budget)")]
    ExperimentInvalid {
        infeasible: usize,
        reps: usize,
        theta: f64,
    },
    #[error("sample variance {value} is negative beyond roundoff")]
    NegativeVariance { value: f64 },
    #[error("scale estimators need nonnegative data; found {value} at index {index}")]
    NegativeSample { index: usize, value: f64 },
    #[error("unknown estimator `{token}`")]
    UnknownEstimator { token: String },
    #[error("unknown claim `{token}`; expected mean-lr, mean-st, suff-st, location-lr, or scale-st")]
    UnknownClaim { token: String },
}

/// Which estimator the experiment simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Generic moment estimator `m⁻¹(ḡ)` for the given g.
    MomentSpec(GKind),
    /// Location families: θ̂ = X̄ − μ₁, with μ₁ the mean at θ = 0.
    LocationMean,
    /// Positive scale families: θ̂ = (m_k/μ_k)^(1/k), μ_k the k-th moment at θ = 1.
    ScaleKthMoment(u32),
    /// Positive scale families: θ̂ = √(m₂ − m₁²)/σ, σ the standard deviation at θ = 1.
    ScaleSampleSd,
    /// Weibull shape via Z = |log X| (a scale family in θ): θ̂ = Z̄/μ.
    WeibullAbslogMean,
    /// Weibull shape via Z = |log X|: θ̂ = √(S²_Z)/σ.
    WeibullAbslogSd,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorKind::MomentSpec(g) => write!(f, "moment-spec:{g}"),
            EstimatorKind::LocationMean => write!(f, "location-mean"),
            EstimatorKind::ScaleKthMoment(k) => write!(f, "scale-kth-moment:{k}"),
            EstimatorKind::ScaleSampleSd => write!(f, "scale-sample-sd"),
            EstimatorKind::WeibullAbslogMean => write!(f, "weibull-abslog-mean"),
            EstimatorKind::WeibullAbslogSd => write!(f, "weibull-abslog-sd"),
        }
    }
}

impl FromStr for EstimatorKind {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, McError> {
        let unknown = || McError::UnknownEstimator {
            token: s.to_string(),
        };
        if let Some(g) = s.strip_prefix("moment-spec:") {
            return Ok(EstimatorKind::MomentSpec(g.parse().map_err(|_| unknown())?));
        }
        if let Some(k) = s.strip_prefix("scale-kth-moment:") {
            let k: u32 = k.parse().map_err(|_| unknown())?;
            if k == 0 {
                return Err(unknown());
            }
            return Ok(EstimatorKind::ScaleKthMoment(k));
        }
        match s {
            "location-mean" => Ok(EstimatorKind::LocationMean),
            "scale-sample-sd" => Ok(EstimatorKind::ScaleSampleSd),
            "weibull-abslog-mean" => Ok(EstimatorKind::WeibullAbslogMean),
            "weibull-abslog-sd" => Ok(EstimatorKind::WeibullAbslogSd),
            _ => Err(unknown()),
        }
    }
}

impl Serialize for EstimatorKind {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Order-preservation claims the harness can test. Each pairs a sufficient
/// condition (checked on grids, reported, non-blocking) with an empirical
/// order test on the estimator distributions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderClaim {
    /// Moment estimator is likelihood-ratio increasing (needs TP₂ family and
    /// logconcave densities). Tests st and lr empirically.
    MeanLr,
    /// Moment estimator is stochastically increasing (needs TP₂ family).
    MeanSt,
    /// Sufficient-statistic estimator in an exponential family with aligned
    /// η and T monotonicity is stochastically increasing.
    SuffSt,
    /// Location estimator X̄ − μ₁ is lr-increasing for logconcave densities.
    LocationLr,
    /// Scale estimators on ℝ₊ scale families are stochastically increasing.
    ScaleSt,
}

impl OrderClaim {
    pub const ALL: [OrderClaim; 5] = [
        OrderClaim::MeanLr,
        OrderClaim::MeanSt,
        OrderClaim::SuffSt,
        OrderClaim::LocationLr,
        OrderClaim::ScaleSt,
    ];

    fn tests_lr(self) -> bool {
        matches!(self, OrderClaim::MeanLr | OrderClaim::LocationLr)
    }
}

impl fmt::Display for OrderClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OrderClaim::MeanLr => "mean-lr",
            OrderClaim::MeanSt => "mean-st",
            OrderClaim::SuffSt => "suff-st",
            OrderClaim::LocationLr => "location-lr",
            OrderClaim::ScaleSt => "scale-st",
        };
        f.write_str(s)
    }
}

impl FromStr for OrderClaim {
    type Err = McError;

    fn from_str(s: &str) -> Result<Self, McError> {
        OrderClaim::ALL
            .into_iter()
            .find(|c| c.to_string() == s)
            .ok_or_else(|| McError::UnknownClaim {
                token: s.to_string(),
            })
    }
}

impl Serialize for OrderClaim {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// One Monte Carlo experiment.
#[derive(Clone)]
pub struct McConfig {
    pub builtin: Builtin<f64>,
    pub estimator: EstimatorKind,
    /// (θ₁, θ₂) with θ₁ < θ₂.
    pub theta_pair: (f64, f64),
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub confidence: f64,
    pub bins: usize,
}

impl McConfig {
    pub fn new(
        builtin: Builtin<f64>,
        estimator: EstimatorKind,
        theta_pair: (f64, f64),
        n: usize,
        reps: usize,
        seed: u64,
    ) -> Result<Self, McError> {
        let cfg = McConfig {
            builtin,
            estimator,
            theta_pair,
            n,
            reps,
            seed,
            confidence: DEFAULT_CONFIDENCE,
            bins: DEFAULT_BINS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), McError> {
        let (t1, t2) = self.theta_pair;
        if !(t1 < t2) {
            return Err(McError::UnorderedPair(t1, t2));
        }
        self.builtin.family.check_theta(t1)?;
        self.builtin.family.check_theta(t2)?;
        if self.n < 1 {
            return Err(McError::SampleTooSmall {
                min: 1,
                what: "any estimator",
            });
        }
        let needs_two = matches!(
            self.estimator,
            EstimatorKind::ScaleSampleSd | EstimatorKind::WeibullAbslogSd
        );
        if needs_two && self.n < 2 {
            return Err(McError::SampleTooSmall {
                min: 2,
                what: "sample-standard-deviation estimators",
            });
        }
        if self.reps < MIN_REPS {
            return Err(McError::TooFewReps { got: self.reps });
        }
        if !(self.confidence > 0.9 && self.confidence < 1.0) {
            return Err(McError::BadConfidence {
                got: self.confidence,
            });
        }
        if self.bins < 5 {
            return Err(McError::TooFewBins { got: self.bins });
        }
        Ok(())
    }
}

/// An estimator with its family-dependent constants already computed.
enum Resolved {
    Moment(MomentSpec<f64>),
    LocationMean { mu1: f64 },
    ScaleKth { k: u32, mu_k: f64 },
    ScaleSd { sigma: f64 },
    WeibullAbslogMean { mu: f64 },
    WeibullAbslogSd { sigma: f64 },
}

fn incompatible(cfg: &McConfig, reason: impl Into<String>) -> McError {
    McError::IncompatibleEstimator {
        estimator: cfg.estimator.to_string(),
        family: cfg.builtin.family.name(),
        reason: reason.into(),
    }
}

/// k-th raw moment of the family at the reference parameter, by quadrature.
fn reference_moment(cfg: &McConfig, theta: f64, k: u32) -> Result<f64, McError> {
    let fam = cfg.builtin.family;
    let support = fam.support(theta);
    let range = IntegrationRange::from_endpoints(support.lower, support.upper);
    let r = quad::integrate(|x: f64| x.powi(k as i32) * fam.density(x, theta), range)?;
    Ok(r.value)
}

fn require_positive_scale(cfg: &McConfig) -> Result<(), McError> {
    if cfg.builtin.family.structure() != Structure::Scale {
        return Err(incompatible(cfg, "not a scale family"));
    }
    if cfg.builtin.family.ambient_support().lower < 0.0 {
        return Err(incompatible(cfg, "support is not contained in (0, inf)"));
    }
    Ok(())
}

fn resolve(cfg: &McConfig) -> Result<Resolved, McError> {
    match cfg.estimator {
        EstimatorKind::MomentSpec(g) => Ok(Resolved::Moment(MomentSpec::new(&cfg.builtin, g)?)),
        EstimatorKind::LocationMean => {
            if cfg.builtin.family.structure() != Structure::Location {
                return Err(incompatible(cfg, "not a location family"));
            }
            Ok(Resolved::LocationMean {
                mu1: reference_moment(cfg, 0.0, 1)?,
            })
        }
        EstimatorKind::ScaleKthMoment(k) => {
            require_positive_scale(cfg)?;
            let mu_k = reference_moment(cfg, 1.0, k)?;
            if !(mu_k > 0.0) {
                return Err(incompatible(cfg, format!("moment of order {k} is {mu_k}")));
            }
            Ok(Resolved::ScaleKth { k, mu_k })
        }
        EstimatorKind::ScaleSampleSd => {
            require_positive_scale(cfg)?;
            let m1 = reference_moment(cfg, 1.0, 1)?;
            let m2 = reference_moment(cfg, 1.0, 2)?;
            let var = m2 - m1 * m1;
            if !(var > 0.0) {
                return Err(incompatible(cfg, format!("variance at theta = 1 is {var}")));
            }
            Ok(Resolved::ScaleSd { sigma: var.sqrt() })
        }
        EstimatorKind::WeibullAbslogMean => {
            if cfg.builtin.family.kind() != FamilyKind::WeibullTheta {
                return Err(incompatible(cfg, "the |log x| transform is Weibull-specific"));
            }
            Ok(Resolved::WeibullAbslogMean {
                mu: specfun::abs_gumbel_mean(),
            })
        }
        EstimatorKind::WeibullAbslogSd => {
            if cfg.builtin.family.kind() != FamilyKind::WeibullTheta {
                return Err(incompatible(cfg, "the |log x| transform is Weibull-specific"));
            }
            Ok(Resolved::WeibullAbslogSd {
                sigma: specfun::abs_gumbel_var().sqrt(),
            })
        }
    }
}

/// How to reduce a sample in [`scale_estimators`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleMode {
    KthMoment(u32),
    SampleSd,
}

/// Scale-estimator outcome; `degenerate` marks a constant sample reduced to 0.
#[derive(Clone, Copy, Debug)]
pub struct ScaleOutcome {
    pub value: f64,
    pub degenerate: bool,
}

/// Scale-family estimators on nonnegative data: `(m_k/μ_k)^(1/k)` or
/// `√(m₂ − m₁²)/σ`, with the reference constant computed at θ = 1.
pub fn scale_estimators(
    sample: &[f64],
    constant: f64,
    mode: ScaleMode,
) -> Result<ScaleOutcome, McError> {
    if sample.is_empty() {
        return Err(McError::SampleTooSmall {
            min: 1,
            what: "scale estimators",
        });
    }
    if let Some((index, &value)) = sample.iter().enumerate().find(|(_, v)| **v < 0.0) {
        return Err(McError::NegativeSample { index, value });
    }
    assert!(constant > 0.0, "reference constant must be positive");
    let n = sample.len() as f64;
    match mode {
        ScaleMode::KthMoment(k) => {
            let mk = sample.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n;
            Ok(ScaleOutcome {
                value: (mk / constant).powf(1.0 / k as f64),
                degenerate: false,
            })
        }
        ScaleMode::SampleSd => {
            if sample.len() < 2 {
                return Err(McError::SampleTooSmall {
                    min: 2,
                    what: "the sample standard deviation",
                });
            }
            let m1 = sample.iter().sum::<f64>() / n;
            let m2 = sample.iter().map(|x| x * x).sum::<f64>() / n;
            let mut var = m2 - m1 * m1;
            if var < 0.0 {
                // cancellation can leave a tiny negative residue
                if var >= -1e-12 * m2.max(1.0) {
                    var = 0.0;
                } else {
                    return Err(McError::NegativeVariance { value: var });
                }
            }
            Ok(ScaleOutcome {
                value: var.sqrt() / constant,
                degenerate: var == 0.0,
            })
        }
    }
}

/// Gaps between consecutive order statistics, with X_{0:n} = 0.
pub fn spacings(sample: &[f64]) -> Vec<f64> {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let mut prev = 0.0;
    sorted
        .iter()
        .map(|&x| {
            let gap = x - prev;
            prev = x;
            gap
        })
        .collect()
}

/// Empirical one-sided dominance report.
#[derive(Clone, Debug, Serialize)]
pub struct StReport {
    pub verdict: Verdict,
    /// sup over x of ECDF₂(x) − ECDF₁(x); negative means strict dominance.
    pub max_deviation: f64,
    /// x attaining the maximum deviation.
    pub at: f64,
    /// Combined two-sample DKW band ε; holds ≤ ε, fails > 2ε.
    pub threshold: f64,
}

/// Empirical test of samples1 ≤_st samples2: the first ECDF must dominate
/// the second everywhere, up to a two-sample DKW band at `confidence`.
pub fn empirical_st(
    samples1: &[f64],
    samples2: &[f64],
    confidence: f64,
) -> Result<StReport, McError> {
    for s in [samples1, samples2] {
        if s.len() < MIN_REPS {
            return Err(McError::TooFewReps { got: s.len() });
        }
    }
    if !(confidence > 0.9 && confidence < 1.0) {
        return Err(McError::BadConfidence { got: confidence });
    }
    let mut a = samples1.to_vec();
    let mut b = samples2.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite estimates"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite estimates"));
    let (n1, n2) = (a.len() as f64, b.len() as f64);

    // walk the merged order; after consuming all values <= x the deviation is
    // i2/n2 - i1/n1
    let (mut i, mut j) = (0usize, 0usize);
    let mut max_dev = f64::NEG_INFINITY;
    let mut at = f64::NAN;
    while i < a.len() || j < b.len() {
        let x = match (a.get(i), b.get(j)) {
            (Some(&x1), Some(&x2)) => x1.min(x2),
            (Some(&x1), None) => x1,
            (None, Some(&x2)) => x2,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        let dev = j as f64 / n2 - i as f64 / n1;
        if dev > max_dev {
            max_dev = dev;
            at = x;
        }
    }

    let eps = |n: f64| ((2.0 / (1.0 - confidence)).ln() / (2.0 * n)).sqrt();
    let threshold = eps(n1) + eps(n2);
    let verdict = if max_dev <= threshold {
        Verdict::Holds
    } else if max_dev > 2.0 * threshold {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(StReport {
        verdict,
        max_deviation: max_dev,
        at,
        threshold,
    })
}

/// Binned likelihood-ratio monotonicity report.
#[derive(Clone, Debug, Serialize)]
pub struct LrReport {
    pub verdict: Verdict,
    /// Interior pooled-quantile bin edges (bins − 1 values).
    pub edges: Vec<f64>,
    pub counts1: Vec<usize>,
    pub counts2: Vec<usize>,
    /// Smoothed per-bin log ratios ln((c₂+½)/(c₁+½)).
    pub log_ratios: Vec<f64>,
    /// Pooled-mass-weighted sum of adjacent ratio decreases.
    pub inversion_measure: f64,
    /// Tolerated inversion measure; holds ≤ t, fails > 2t.
    pub threshold: f64,
}

/// Empirical test of samples1 ≤_lr samples2: per-bin count ratios over
/// pooled-quantile bins must be nondecreasing up to sampling noise.
pub fn empirical_lr(samples1: &[f64], samples2: &[f64], bins: usize) -> Result<LrReport, McError> {
    for s in [samples1, samples2] {
        if s.len() < MIN_REPS {
            return Err(McError::TooFewReps { got: s.len() });
        }
    }
    if bins < 5 {
        return Err(McError::TooFewBins { got: bins });
    }
    let mut pooled: Vec<f64> = samples1.iter().chain(samples2.iter()).copied().collect();
    pooled.sort_by(|x, y| x.partial_cmp(y).expect("finite estimates"));
    let total = pooled.len();
    let mut edges = Vec::with_capacity(bins - 1);
    for k in 1..bins {
        edges.push(pooled[k * total / bins]);
    }

    let bin_of = |x: f64| edges.partition_point(|e| *e <= x);
    let mut counts1 = vec![0usize; bins];
    let mut counts2 = vec![0usize; bins];
    for &x in samples1 {
        counts1[bin_of(x)] += 1;
    }
    for &x in samples2 {
        counts2[bin_of(x)] += 1;
    }

    let log_ratios: Vec<f64> = counts1
        .iter()
        .zip(&counts2)
        .map(|(&c1, &c2)| ((c2 as f64 + 0.5) / (c1 as f64 + 0.5)).ln())
        .collect();
    let mass: Vec<f64> = counts1
        .iter()
        .zip(&counts2)
        .map(|(&c1, &c2)| (c1 + c2) as f64 / total as f64)
        .collect();

    let mut inversion = 0.0;
    for j in 0..bins - 1 {
        let drop = log_ratios[j] - log_ratios[j + 1];
        if drop > 0.0 {
            inversion += drop * 0.5 * (mass[j] + mass[j + 1]);
        }
    }

    let reps = samples1.len().min(samples2.len()) as f64;
    let threshold = 2.0 * (bins as f64 / reps).sqrt();
    let verdict = if inversion <= threshold {
        Verdict::Holds
    } else if inversion > 2.0 * threshold {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    Ok(LrReport {
        verdict,
        edges,
        counts1,
        counts2,
        log_ratios,
        inversion_measure: inversion,
        threshold,
    })
}

/// The simulated estimator distribution at one parameter value.
#[derive(Clone, Debug, Serialize)]
pub struct DistributionRun {
    pub theta: f64,
    /// Estimates from feasible replicates, in replicate order.
    pub estimates: Vec<f64>,
    /// Originating replicate index of each estimate.
    pub rep_indices: Vec<u32>,
    pub infeasible: usize,
    /// Constant-sample degenerate reductions (kept in `estimates` as 0).
    pub degenerate: usize,
}

enum Applied {
    Value(f64),
    Infeasible,
    Degenerate(f64),
}

fn apply_estimator(resolved: &Resolved, sample: &mut Vec<f64>) -> Result<Applied, McError> {
    match resolved {
        Resolved::Moment(spec) => match spec.estimate(sample) {
            Ok(est) => Ok(Applied::Value(est.theta_hat)),
            Err(
                MomentError::Infeasible { .. }
                | MomentError::OutOfRange { .. }
                | MomentError::BracketFailed { .. },
            ) => Ok(Applied::Infeasible),
            Err(e) => Err(e.into()),
        },
        Resolved::LocationMean { mu1 } => {
            let mean = sample.iter().sum::<f64>() / sample.len() as f64;
            Ok(Applied::Value(mean - mu1))
        }
        Resolved::ScaleKth { k, mu_k } => {
            let out = scale_estimators(sample, *mu_k, ScaleMode::KthMoment(*k))?;
            Ok(Applied::Value(out.value))
        }
        Resolved::ScaleSd { sigma } => {
            let out = scale_estimators(sample, *sigma, ScaleMode::SampleSd)?;
            if out.degenerate {
                Ok(Applied::Degenerate(out.value))
            } else {
                Ok(Applied::Value(out.value))
            }
        }
        Resolved::WeibullAbslogMean { mu } => {
            for x in sample.iter_mut() {
                *x = x.ln().abs();
            }
            let out = scale_estimators(sample, *mu, ScaleMode::KthMoment(1))?;
            Ok(Applied::Value(out.value))
        }
        Resolved::WeibullAbslogSd { sigma } => {
            for x in sample.iter_mut() {
                *x = x.ln().abs();
            }
            let out = scale_estimators(sample, *sigma, ScaleMode::SampleSd)?;
            if out.degenerate {
                Ok(Applied::Degenerate(out.value))
            } else {
                Ok(Applied::Value(out.value))
            }
        }
    }
}

fn run_distribution(
    cfg: &McConfig,
    resolved: &Resolved,
    theta: f64,
) -> Result<DistributionRun, McError> {
    // substream per (theta, replicate): parallel and serial runs agree
    let outcomes: Result<Vec<Applied>, McError> = (0..cfg.reps as u32)
        .into_par_iter()
        .map(|rep| {
            let mut rng = CounterRng::substream(cfg.seed, &[theta.to_bits(), rep as u64]);
            let mut sample = Vec::with_capacity(cfg.n);
            for _ in 0..cfg.n {
                sample.push(cfg.builtin.family.sample(theta, &mut rng));
            }
            apply_estimator(resolved, &mut sample)
        })
        .collect();
    let outcomes = outcomes?;

    let mut run = DistributionRun {
        theta,
        estimates: Vec::with_capacity(cfg.reps),
        rep_indices: Vec::with_capacity(cfg.reps),
        infeasible: 0,
        degenerate: 0,
    };
    for (rep, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Applied::Value(v) => {
                run.estimates.push(v);
                run.rep_indices.push(rep as u32);
            }
            Applied::Degenerate(v) => {
                run.estimates.push(v);
                run.rep_indices.push(rep as u32);
                run.degenerate += 1;
            }
            Applied::Infeasible => run.infeasible += 1,
        }
    }
    if run.infeasible * 100 > cfg.reps {
        return Err(McError::ExperimentInvalid {
            infeasible: run.infeasible,
            reps: cfg.reps,
            theta,
        });
    }
    Ok(run)
}

/// Simulate the estimator distribution at `theta` under `cfg`'s seed and
/// sample size. Infeasible replicates are excluded and counted; more than 1%
/// of them invalidates the experiment.
pub fn estimator_distribution(cfg: &McConfig, theta: f64) -> Result<DistributionRun, McError> {
    cfg.validate()?;
    cfg.builtin.family.check_theta(theta)?;
    let resolved = resolve(cfg)?;
    run_distribution(cfg, &resolved, theta)
}

/// Summary of a sufficient-condition check attached to a claim.
#[derive(Clone, Debug, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub verdict: Verdict,
    pub max_violation: f64,
    pub witness_count: usize,
    pub detail: String,
}

impl HypothesisCheck {
    fn pass(name: impl Into<String>, detail: impl Into<String>) -> Self {
        HypothesisCheck {
            name: name.into(),
            verdict: Verdict::Holds,
            max_violation: 0.0,
            witness_count: 0,
            detail: detail.into(),
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Self {
        HypothesisCheck {
            name: name.into(),
            verdict: Verdict::Fails,
            max_violation: 0.0,
            witness_count: 0,
            detail: detail.into(),
        }
    }
}

/// Moments/variances of both estimator samples.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Summary {
    pub mean1: f64,
    pub var1: f64,
    pub mean2: f64,
    pub var2: f64,
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Complete outcome of a claim verification run.
#[derive(Clone, Debug, Serialize)]
pub struct McResult {
    pub claim: Option<OrderClaim>,
    pub family: String,
    pub estimator: EstimatorKind,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub confidence: f64,
    pub bins: usize,
    /// Sufficient conditions checked before simulation; failures do not stop
    /// the empirical run.
    pub hypotheses: Vec<HypothesisCheck>,
    pub run1: DistributionRun,
    pub run2: DistributionRun,
    pub st_report: StReport,
    pub lr_report: Option<LrReport>,
    pub summary: Summary,
}

fn logconcavity_check(cfg: &McConfig, theta: f64) -> Result<HypothesisCheck, McError> {
    let fam = cfg.builtin.family;
    let grid = Grid::from_quantiles(|u| fam.quantile(u, theta), 256)?;
    let report = check_logconcave(|x| fam.density(x, theta), &grid)?;
    Ok(HypothesisCheck {
        name: format!("logconcave(theta={theta})"),
        verdict: report.verdict,
        max_violation: report.max_violation,
        witness_count: report.witness_count,
        detail: "second differences of log density".into(),
    })
}

fn tp2_check(cfg: &McConfig) -> Result<HypothesisCheck, McError> {
    let fam = cfg.builtin.family;
    let (t1, t2) = cfg.theta_pair;
    let g1 = Grid::from_quantiles(|u| fam.quantile(u, t1), 128)?;
    let g2 = Grid::from_quantiles(|u| fam.quantile(u, t2), 128)?;
    let x_grid = g1.merge(&g2);
    let theta_grid = Grid::linspace(t1, t2, 33)?;
    let report = check_tp2_mixed(&fam, &x_grid, &theta_grid)?;
    Ok(HypothesisCheck {
        name: "tp2".into(),
        verdict: report.verdict,
        max_violation: report.max_violation,
        witness_count: report.witness_count,
        detail: "log mixed differences / boundary minors".into(),
    })
}

fn hypothesis_checks(cfg: &McConfig, claim: OrderClaim) -> Result<Vec<HypothesisCheck>, McError> {
    let mut checks = Vec::new();
    match claim {
        OrderClaim::MeanLr => {
            checks.push(tp2_check(cfg)?);
            checks.push(logconcavity_check(cfg, cfg.theta_pair.0)?);
            checks.push(logconcavity_check(cfg, cfg.theta_pair.1)?);
        }
        OrderClaim::MeanSt => {
            checks.push(tp2_check(cfg)?);
        }
        OrderClaim::SuffSt => match &cfg.builtin.exp {
            Some(ef) if ef.monotone_aligned() => checks.push(HypothesisCheck::pass(
                "aligned-sufficient-statistic",
                "eta and T are monotone in the same direction",
            )),
            Some(_) => checks.push(HypothesisCheck::fail(
                "aligned-sufficient-statistic",
                "eta and T are monotone in opposite directions",
            )),
            None => checks.push(HypothesisCheck::fail(
                "aligned-sufficient-statistic",
                "family has no exponential-family decomposition",
            )),
        },
        OrderClaim::LocationLr => {
            if cfg.builtin.family.structure() == Structure::Location {
                checks.push(HypothesisCheck::pass("location-structure", ""));
            } else {
                checks.push(HypothesisCheck::fail(
                    "location-structure",
                    "parameter is not a location shift",
                ));
            }
            checks.push(logconcavity_check(cfg, 0.0)?);
        }
        OrderClaim::ScaleSt => match cfg.estimator {
            EstimatorKind::WeibullAbslogMean | EstimatorKind::WeibullAbslogSd => {
                checks.push(HypothesisCheck::pass(
                    "positive-scale-structure",
                    "|log x| of a Weibull sample is a scale family on (0, inf)",
                ));
            }
            _ => {
                let ok = cfg.builtin.family.structure() == Structure::Scale
                    && cfg.builtin.family.ambient_support().lower >= 0.0;
                if ok {
                    checks.push(HypothesisCheck::pass("positive-scale-structure", ""));
                } else {
                    checks.push(HypothesisCheck::fail(
                        "positive-scale-structure",
                        "need a scale family supported in (0, inf)",
                    ));
                }
            }
        },
    }
    Ok(checks)
}

fn check_claim_estimator(cfg: &McConfig, claim: OrderClaim) -> Result<(), McError> {
    let ok = match claim {
        OrderClaim::MeanLr | OrderClaim::MeanSt => {
            matches!(cfg.estimator, EstimatorKind::MomentSpec(_))
        }
        OrderClaim::SuffSt => matches!(
            cfg.estimator,
            EstimatorKind::MomentSpec(GKind::SufficientT)
        ),
        OrderClaim::LocationLr => cfg.estimator == EstimatorKind::LocationMean,
        OrderClaim::ScaleSt => matches!(
            cfg.estimator,
            EstimatorKind::ScaleKthMoment(_)
                | EstimatorKind::ScaleSampleSd
                | EstimatorKind::WeibullAbslogMean
                | EstimatorKind::WeibullAbslogSd
        ),
    };
    if ok {
        Ok(())
    } else {
        Err(McError::ClaimMismatch {
            estimator: cfg.estimator.to_string(),
            claim: claim.to_string(),
        })
    }
}

/// Verify an order-preservation claim: check its sufficient conditions on
/// grids (reported, non-blocking), simulate the estimator at both parameter
/// values, and test the empirical orders.
pub fn verify_claim(cfg: &McConfig, claim: OrderClaim) -> Result<McResult, McError> {
    cfg.validate()?;
    check_claim_estimator(cfg, claim)?;
    let hypotheses = hypothesis_checks(cfg, claim)?;
    let resolved = resolve(cfg)?;
    let run1 = run_distribution(cfg, &resolved, cfg.theta_pair.0)?;
    let run2 = run_distribution(cfg, &resolved, cfg.theta_pair.1)?;
    let st_report = empirical_st(&run1.estimates, &run2.estimates, cfg.confidence)?;
    let lr_report = if claim.tests_lr() {
        Some(empirical_lr(&run1.estimates, &run2.estimates, cfg.bins)?)
    } else {
        None
    };
    let (mean1, var1) = mean_var(&run1.estimates);
    let (mean2, var2) = mean_var(&run2.estimates);
    Ok(McResult {
        claim: Some(claim),
        family: cfg.builtin.family.name().to_string(),
        estimator: cfg.estimator,
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        confidence: cfg.confidence,
        bins: cfg.bins,
        hypotheses,
        run1,
        run2,
        st_report,
        lr_report,
        summary: Summary {
            mean1,
            var1,
            mean2,
            var2,
        },
    })
}

/// Per-replicate CSV export: `replicate,theta,theta_hat`, run 1 then run 2.
pub fn write_csv(result: &McResult, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "replicate,theta,theta_hat")?;
    for run in [&result.run1, &result.run2] {
        for (rep, value) in run.rep_indices.iter().zip(&run.estimates) {
            writeln!(out, "{rep},{},{}", run.theta, value)?;
        }
    }
    Ok(())
}
