//! Moment functions m(θ) = E_θ g(X), monotone inversion, and the
//! method-of-moments estimator θ̂ = m⁻¹(ḡ).
//!
//! A [`MomentSpec`] pairs a catalog family with a moment function g. Closed
//! forms for m and m⁻¹ are registered for the standard pairings; everything
//! else falls back to adaptive quadrature for m and bracketed bisection for
//! m⁻¹. The monotone direction of m is detected once at construction on a
//! 50-point grid and cached.
//!
//! Inversion convention: when m has flat segments, the *infimum* (left
//! endpoint) of the solution set {θ : m(θ) = t} is returned. For
//! nonincreasing m this is inf{θ : m(θ) ≤ t}; the nondecreasing case uses the
//! mirrored inequality.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::families::{Builtin, ExpFamily, ExpFamilyError, Family, FamilyError, FamilyKind};
use crate::quad::{self, IntegrationRange, QuadError};
use crate::real::{as_f64, real, Real};
use crate::specfun;

/// The moment function g applied to each observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GKind {
    /// g(x) = x.
    Identity,
    /// g(x) = ln x (positive-support families only).
    Log,
    /// g(x) = x^k, k ≥ 1.
    Power(u32),
    /// g(x) = |ln x| (positive-support families only).
    AbsLog,
    /// g = T, the sufficient statistic of the exponential-family form.
    SufficientT,
}

impl fmt::Display for GKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GKind::Identity => write!(f, "mean"),
            GKind::Log => write!(f, "log"),
            GKind::Power(k) => write!(f, "k-th:{k}"),
            GKind::AbsLog => write!(f, "abs-log"),
            GKind::SufficientT => write!(f, "T"),
        }
    }
}

impl FromStr for GKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mean" => Ok(GKind::Identity),
            "log" => Ok(GKind::Log),
            "abs-log" => Ok(GKind::AbsLog),
            "T" => Ok(GKind::SufficientT),
            other => {
                if let Some(k) = other.strip_prefix("k-th:") {
                    let k: u32 = k
                        .parse()
                        .map_err(|_| format!("invalid moment order in `{other}`"))?;
                    if k == 0 {
                        return Err("moment order k must be >= 1".to_string());
                    }
                    Ok(GKind::Power(k))
                } else {
                    Err(format!(
                        "unknown moment spec `{other}`; expected mean, log, T, abs-log, or k-th:<k>"
                    ))
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Error)]
pub enum MomentError {
    #[error("family error: {0}")]
    Family(#[from] FamilyError),
    #[error("exponential-family error: {0}")]
    ExpFamily(#[from] ExpFamilyError),
    #[error("moment integral failed: {0}")]
    Integration(#[from] QuadError),
    #[error("spec `{spec}` is not applicable to family `{family}`: {reason}")]
    InvalidSpec {
        family: &'static str,
        spec: String,
        reason: &'static str,
    },
    #[error("moment function of `{family}` with spec `{spec}` is not monotone on the detection grid")]
    NonMonotone { family: &'static str, spec: String },
    #[error("target {t} outside the attainable moment range ({lower}, {upper})")]
    OutOfRange {
        t: f64,
        lower: f64,
        upper: f64,
        /// False when the range was estimated from the detection grid rather
        /// than registered in closed form.
        exact: bool,
    },
    #[error("sample is empty")]
    EmptySample,
    #[error("sample[{index}] = {value} lies outside the support of `{family}`")]
    OutsideSupport {
        index: usize,
        value: f64,
        family: &'static str,
    },
    #[error("estimation infeasible: sample moment {gbar} outside the attainable range ({lower}, {upper})")]
    Infeasible { gbar: f64, lower: f64, upper: f64 },
    #[error("could not bracket a solution of m(theta) = {t} inside the parameter domain")]
    BracketFailed { t: f64 },
}

/// Result of a method-of-moments fit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Estimate<T> {
    pub theta_hat: T,
    /// Sample mean of g.
    pub gbar: T,
    /// Bracketing/bisection steps used by the inversion (0 for closed forms).
    pub iterations: usize,
    /// |m(θ̂) − ḡ|.
    pub residual: T,
}

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

struct Closed<T> {
    m: RealFn<T>,
    inverse: RealFn<T>,
    range: (T, T),
}

/// A family paired with a moment function, ready to estimate.
pub struct MomentSpec<T: Real> {
    builtin: Builtin<T>,
    g: GKind,
    direction: Direction,
    m_range: (T, T),
    range_exact: bool,
    closed: Option<Closed<T>>,
}

impl<T: Real> MomentSpec<T> {
    pub fn new(builtin: &Builtin<T>, g: GKind) -> Result<Self, MomentError> {
        let family = builtin.family;
        match g {
            GKind::Log | GKind::AbsLog => {
                if family.ambient_support().lower < T::zero() {
                    return Err(MomentError::InvalidSpec {
                        family: family.name(),
                        spec: g.to_string(),
                        reason: "logarithmic moments need a positive support",
                    });
                }
            }
            GKind::Power(0) => {
                return Err(MomentError::InvalidSpec {
                    family: family.name(),
                    spec: g.to_string(),
                    reason: "moment order k must be >= 1",
                })
            }
            GKind::SufficientT => {
                if builtin.exp.is_none() {
                    return Err(MomentError::InvalidSpec {
                        family: family.name(),
                        spec: g.to_string(),
                        reason: "family has no exponential-family decomposition",
                    });
                }
            }
            _ => {}
        }

        let closed = closed_form(builtin, g);
        let mut spec = MomentSpec {
            builtin: builtin.clone(),
            g,
            direction: Direction::Increasing,
            m_range: (T::neg_infinity(), T::infinity()),
            range_exact: false,
            closed,
        };

        // Detect the monotone direction on a 50-point grid; for quadrature
        // fallbacks the observed values double as the range estimate.
        let grid = spec.detection_grid();
        let mut values = Vec::with_capacity(grid.len());
        for &theta in &grid {
            values.push(spec.moment_raw(theta)?);
        }
        let scale = values
            .iter()
            .fold(T::one(), |acc, v| acc.max(v.abs()));
        let tol = real::<T>(1e-9) * scale;
        let incr = values.windows(2).all(|w| w[1] - w[0] >= -tol)
            && values.windows(2).any(|w| w[1] - w[0] > tol);
        let decr = values.windows(2).all(|w| w[1] - w[0] <= tol)
            && values.windows(2).any(|w| w[1] - w[0] < -tol);
        spec.direction = if incr {
            Direction::Increasing
        } else if decr {
            Direction::Decreasing
        } else {
            return Err(MomentError::NonMonotone {
                family: family.name(),
                spec: g.to_string(),
            });
        };

        if let Some(c) = &spec.closed {
            spec.m_range = c.range;
            spec.range_exact = true;
        } else {
            let lo = values.iter().cloned().fold(T::infinity(), T::min);
            let hi = values.iter().cloned().fold(T::neg_infinity(), T::max);
            spec.m_range = (lo, hi);
            spec.range_exact = false;
        }
        Ok(spec)
    }

    pub fn family(&self) -> &Family<T> {
        &self.builtin.family
    }

    pub fn exp_family(&self) -> Option<&ExpFamily<T>> {
        self.builtin.exp.as_ref()
    }

    pub fn g(&self) -> GKind {
        self.g
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Attainable interval m(Θ). Exact for registered closed forms,
    /// otherwise estimated from the detection grid.
    pub fn m_range(&self) -> (T, T) {
        self.m_range
    }

    pub fn range_is_exact(&self) -> bool {
        self.range_exact
    }

    /// Evaluate g at one observation.
    pub fn g_value(&self, x: T) -> T {
        match self.g {
            GKind::Identity => x,
            GKind::Log => x.ln(),
            GKind::Power(k) => x.powi(k as i32),
            GKind::AbsLog => x.ln().abs(),
            GKind::SufficientT => self
                .builtin
                .exp
                .as_ref()
                .expect("validated at construction")
                .big_t(x),
        }
    }

    /// m(θ) = E_θ g(X); closed form or adaptive quadrature.
    pub fn moment(&self, theta: T) -> Result<T, MomentError> {
        self.family().check_theta(theta)?;
        self.moment_raw(theta)
    }

    fn moment_raw(&self, theta: T) -> Result<T, MomentError> {
        if let Some(c) = &self.closed {
            return Ok((c.m)(theta));
        }
        let sup = self.family().support(theta);
        let range = IntegrationRange::from_endpoints(sup.lower, sup.upper);
        let r = quad::integrate(|x| self.g_value(x) * self.family().density(x, theta), range)?;
        Ok(r.value)
    }

    /// m⁻¹(t) with the infimum convention at flat segments.
    pub fn invert(&self, t: T) -> Result<T, MomentError> {
        self.invert_counted(t).map(|(theta, _)| theta)
    }

    fn invert_counted(&self, t: T) -> Result<(T, usize), MomentError> {
        if self.range_exact && !(self.m_range.0 < t && t < self.m_range.1) {
            return Err(MomentError::OutOfRange {
                t: as_f64(t),
                lower: as_f64(self.m_range.0),
                upper: as_f64(self.m_range.1),
                exact: true,
            });
        }
        if let Some(c) = &self.closed {
            return Ok(((c.inverse)(t), 0));
        }
        self.invert_numeric(t)
    }

    /// Expanding bracket followed by bisection on the increasing view of m.
    fn invert_numeric(&self, t: T) -> Result<(T, usize), MomentError> {
        let sign = match self.direction {
            Direction::Increasing => T::one(),
            Direction::Decreasing => -T::one(),
        };
        let target = sign * t;
        // p(θ) = true on the upper side of the crossing; the infimum of the
        // p-region is the left edge of the solution set.
        let mut steps = 0usize;
        let mut p = |theta: T| -> Result<bool, MomentError> {
            steps += 1;
            Ok(sign * self.moment_raw(theta)? >= target)
        };

        let (dom_lo, _) = self.family().param_domain();
        let positive_domain = dom_lo == T::zero();
        let two = real::<T>(2.0);
        let (mut lo, mut hi);
        if positive_domain {
            lo = T::one();
            hi = T::one();
            let mut k = 0;
            while !p(hi)? {
                hi = hi * two;
                k += 1;
                if k > 200 || !hi.is_finite() {
                    return Err(self.bracket_failure(t));
                }
            }
            let mut k = 0;
            while p(lo)? {
                lo = lo / two;
                k += 1;
                if k > 200 || lo <= T::zero() {
                    return Err(self.bracket_failure(t));
                }
            }
        } else {
            lo = T::zero();
            hi = T::zero();
            let mut step = T::one();
            let mut k = 0;
            while !p(hi)? {
                hi = hi + step;
                step = step * two;
                k += 1;
                if k > 200 {
                    return Err(self.bracket_failure(t));
                }
            }
            let mut step = T::one();
            let mut k = 0;
            while p(lo)? {
                lo = lo - step;
                step = step * two;
                k += 1;
                if k > 200 {
                    return Err(self.bracket_failure(t));
                }
            }
        }

        // Invariant: ¬p(lo), p(hi). Shrink to the crossing.
        for _ in 0..500 {
            let mid = (lo + hi) * real::<T>(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if hi - lo <= real::<T>(1e-12) * (T::one() + mid.abs()) {
                break;
            }
            if p(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok((hi, steps))
    }

    fn bracket_failure(&self, t: T) -> MomentError {
        if self.range_exact {
            MomentError::BracketFailed { t: as_f64(t) }
        } else {
            MomentError::OutOfRange {
                t: as_f64(t),
                lower: as_f64(self.m_range.0),
                upper: as_f64(self.m_range.1),
                exact: false,
            }
        }
    }

    /// θ̂ = m⁻¹(ḡ) with diagnostics.
    ///
    /// Sample values outside the family's ambient support are rejected, not
    /// clamped; ḡ outside the attainable range is an infeasibility error.
    pub fn estimate(&self, sample: &[T]) -> Result<Estimate<T>, MomentError> {
        if sample.is_empty() {
            return Err(MomentError::EmptySample);
        }
        let ambient = self.family().ambient_support();
        for (index, &x) in sample.iter().enumerate() {
            if !x.is_finite() || !ambient.contains(x) {
                return Err(MomentError::OutsideSupport {
                    index,
                    value: as_f64(x),
                    family: self.family().name(),
                });
            }
        }
        let n = real::<T>(sample.len() as f64);
        let gbar = sample.iter().fold(T::zero(), |s, &x| s + self.g_value(x)) / n;
        let (theta_hat, iterations) = self.invert_counted(gbar).map_err(|e| match e {
            MomentError::OutOfRange { lower, upper, .. } => MomentError::Infeasible {
                gbar: as_f64(gbar),
                lower,
                upper,
            },
            other => other,
        })?;
        let residual = (self.moment_raw(theta_hat)? - gbar).abs();
        Ok(Estimate {
            theta_hat,
            gbar,
            iterations,
            residual,
        })
    }

    fn detection_grid(&self) -> Vec<T> {
        let n = 50;
        let (lo, _) = self.family().param_domain();
        let mut grid = Vec::with_capacity(n);
        if lo == T::zero() {
            // log-spaced on [1e-2, 1e2]
            let (a, b) = ((1e-2f64).ln(), (1e2f64).ln());
            for i in 0..n {
                let t = a + (b - a) * i as f64 / (n - 1) as f64;
                grid.push(real::<T>(t.exp()));
            }
        } else {
            for i in 0..n {
                let t = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
                grid.push(real::<T>(t));
            }
        }
        grid
    }
}

/// (1/n)·ΣT(xᵢ) + [log c]′(θ)/η′(θ); zero exactly at the likelihood
/// stationarity point, so with g = T this vanishes at the moment estimate.
pub fn mle_residual<T: Real>(
    ef: &ExpFamily<T>,
    sample: &[T],
    theta: T,
) -> Result<T, MomentError> {
    ef.base().check_theta(theta)?;
    if sample.is_empty() {
        return Err(MomentError::EmptySample);
    }
    let n = real::<T>(sample.len() as f64);
    let tbar = sample.iter().fold(T::zero(), |s, &x| s + ef.big_t(x)) / n;
    let ep = ef.eta_prime(theta);
    if ep == T::zero() {
        return Err(ExpFamilyError::DegenerateParametrization {
            theta: as_f64(theta),
        }
        .into());
    }
    Ok(tbar + ef.log_c_prime(theta) / ep)
}

/// Curvature of the log-likelihood at θ:
/// n·[log c]″(θ) + η″(θ)·ΣT(xᵢ). Negative confirms a maximum.
pub fn second_order_check<T: Real>(
    ef: &ExpFamily<T>,
    sample: &[T],
    theta_hat: T,
) -> Result<T, MomentError> {
    ef.base().check_theta(theta_hat)?;
    if sample.is_empty() {
        return Err(MomentError::EmptySample);
    }
    let sum_t = sample.iter().fold(T::zero(), |s, &x| s + ef.big_t(x));
    let n = real::<T>(sample.len() as f64);
    Ok(n * ef.log_c_second(theta_hat) + ef.eta_second(theta_hat) * sum_t)
}

fn closed_form<T: Real>(builtin: &Builtin<T>, g: GKind) -> Option<Closed<T>> {
    let one = T::one();
    let positive = (T::zero(), T::infinity());
    let whole = (T::neg_infinity(), T::infinity());
    let gamma_c = real::<T>(specfun::EULER_GAMMA);

    // mean of x^k on (0,1): 1/(k+1); scale family then gives θ^k/(k+1)
    let power_scale = |k: u32| -> Closed<T> {
        let kp1 = real::<T>((k + 1) as f64);
        let kf = real::<T>(k as f64);
        Closed {
            m: Arc::new(move |theta: T| theta.powi(k as i32) / kp1),
            inverse: Arc::new(move |t: T| (t * kp1).powf(kf.recip())),
            range: positive,
        }
    };

    match (builtin.family.kind(), g) {
        (FamilyKind::UniformSym, GKind::Power(k)) if k % 2 == 0 && k > 0 => Some(power_scale(k)),
        (FamilyKind::UniformScale, GKind::Identity) => Some(Closed {
            m: Arc::new(move |theta: T| theta * real::<T>(0.5)),
            inverse: Arc::new(|t: T| t + t),
            range: positive,
        }),
        (FamilyKind::UniformScale, GKind::Log) => Some(Closed {
            m: Arc::new(move |theta: T| theta.ln() - one),
            inverse: Arc::new(move |t: T| (t + one).exp()),
            range: whole,
        }),
        (FamilyKind::UniformScale, GKind::Power(k)) if k > 0 => Some(power_scale(k)),
        (FamilyKind::LevyType, GKind::SufficientT) => Some(Closed {
            // E(1/X) = 1/(2θ)
            m: Arc::new(|theta: T| (theta + theta).recip()),
            inverse: Arc::new(|t: T| (t + t).recip()),
            range: positive,
        }),
        (FamilyKind::GammaScale { alpha }, GKind::Identity | GKind::SufficientT) => Some(Closed {
            m: Arc::new(move |theta: T| alpha * theta),
            inverse: Arc::new(move |t: T| t / alpha),
            range: positive,
        }),
        (FamilyKind::GammaScale { alpha }, GKind::Log) => {
            let psi = specfun::digamma_unchecked(alpha);
            Some(Closed {
                m: Arc::new(move |theta: T| psi + theta.ln()),
                inverse: Arc::new(move |t: T| (t - psi).exp()),
                range: whole,
            })
        }
        (FamilyKind::GammaScale { alpha }, GKind::Power(k)) if k > 0 => {
            // E X^k = θ^k · Γ(α+k)/Γ(α)
            let lg = specfun::log_gamma(alpha + real::<T>(k as f64)).ok()?
                - specfun::log_gamma(alpha).ok()?;
            let ratio = lg.exp();
            let kf = real::<T>(k as f64);
            Some(Closed {
                m: Arc::new(move |theta: T| ratio * theta.powi(k as i32)),
                inverse: Arc::new(move |t: T| (t / ratio).powf(kf.recip())),
                range: positive,
            })
        }
        (FamilyKind::GammaShape { lambda }, GKind::Identity) => Some(Closed {
            m: Arc::new(move |theta: T| theta * lambda),
            inverse: Arc::new(move |t: T| t / lambda),
            range: positive,
        }),
        (FamilyKind::GammaShape { lambda }, GKind::Log | GKind::SufficientT) => {
            let log_lambda = lambda.ln();
            Some(Closed {
                m: Arc::new(move |theta: T| specfun::digamma_unchecked(theta) + log_lambda),
                inverse: Arc::new(move |t: T| {
                    specfun::inverse_digamma(t - log_lambda)
                        .expect("digamma inverse defined for finite targets")
                }),
                range: whole,
            })
        }
        (FamilyKind::ExpLogistic, GKind::SufficientT) => Some(Closed {
            m: Arc::new(|theta: T| theta.recip()),
            inverse: Arc::new(|t: T| t.recip()),
            range: positive,
        }),
        (FamilyKind::LogisticLoc, GKind::Identity) => Some(Closed {
            m: Arc::new(|theta: T| theta),
            inverse: Arc::new(|t: T| t),
            range: whole,
        }),
        (FamilyKind::WeibullTheta, GKind::AbsLog) => {
            // |ln X| = θ·|W| with W standard Gumbel
            let mu = real::<T>(specfun::abs_gumbel_mean());
            Some(Closed {
                m: Arc::new(move |theta: T| mu * theta),
                inverse: Arc::new(move |t: T| t / mu),
                range: positive,
            })
        }
        (FamilyKind::WeibullTheta, GKind::Log) => Some(Closed {
            // ln X = −θ·W ⇒ E = −γθ, decreasing
            m: Arc::new(move |theta: T| -gamma_c * theta),
            inverse: Arc::new(move |t: T| -t / gamma_c),
            range: (T::neg_infinity(), T::zero()),
        }),
        (FamilyKind::GumbelStd, GKind::Identity) => Some(Closed {
            m: Arc::new(move |theta: T| gamma_c * theta),
            inverse: Arc::new(move |t: T| t / gamma_c),
            range: positive,
        }),
        (FamilyKind::GumbelStd, GKind::Power(2)) => {
            // E X² = θ²(π²/6 + γ²)
            let c = real::<T>(std::f64::consts::PI.powi(2) / 6.0) + gamma_c * gamma_c;
            Some(Closed {
                m: Arc::new(move |theta: T| c * theta * theta),
                inverse: Arc::new(move |t: T| (t / c).sqrt()),
                range: positive,
            })
        }
        _ => None,
    }
}
