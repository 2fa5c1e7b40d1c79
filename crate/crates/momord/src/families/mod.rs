//! Catalog of one-parameter distribution families.
//!
//! Every family exposes a density, CDF, quantile, and an exact (inverse
//! transform or rejection-free) sampler, all parametrized by a single real
//! parameter θ. Four of the nine catalog entries additionally admit an
//! exponential-family decomposition `h(x)·c(θ)·exp(η(θ)·T(x))`; see
//! [`expfam`].
//!
//! Support endpoints are treated as open: the density evaluated exactly at an
//! endpoint returns 0, which keeps log-density grids free of spurious ±∞.

pub mod expfam;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::real::{as_f64, real, Real};
use crate::rng::CounterRng;
use crate::specfun;

pub use expfam::{ExpFamily, ExpFamilyError};

/// Openness of a support interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportKind {
    Open,
    /// Closed on the left, open on the right.
    HalfOpen,
    Closed,
}

/// Interval on which a density is positive. Endpoints may be ±∞.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Support<T> {
    pub lower: T,
    pub upper: T,
    pub kind: SupportKind,
}

impl<T: Real> Support<T> {
    pub fn open(lower: T, upper: T) -> Self {
        assert!(lower < upper, "support endpoints must be ordered");
        Support {
            lower,
            upper,
            kind: SupportKind::Open,
        }
    }

    /// Whether `x` lies inside the support, honoring endpoint openness.
    pub fn contains(&self, x: T) -> bool {
        match self.kind {
            SupportKind::Open => self.lower < x && x < self.upper,
            SupportKind::HalfOpen => self.lower <= x && x < self.upper,
            SupportKind::Closed => self.lower <= x && x <= self.upper,
        }
    }
}

/// Structural role of θ, used to pick location/scale estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Structure {
    /// X = θ + W for a fixed W.
    Location,
    /// X = θ·W for a fixed W, θ > 0.
    Scale,
    Other,
}

#[derive(Debug, Clone, Error)]
pub enum FamilyError {
    #[error("unknown family `{name}`; available: {available}")]
    UnknownFamily { name: String, available: String },
    #[error("family `{family}` does not take a parameter named `{key}`")]
    UnknownParam { family: &'static str, key: String },
    #[error("parameter `{key}` of family `{family}` must be {requirement}, got {value}")]
    InvalidParam {
        family: &'static str,
        key: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("theta = {theta} lies outside the parameter domain ({lower}, {upper}) of `{family}`")]
    ThetaOutOfDomain {
        family: &'static str,
        theta: f64,
        lower: f64,
        upper: f64,
    },
}

/// Catalog identifier plus any fixed nuisance constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FamilyKind<T> {
    /// Uniform on (−θ, θ).
    UniformSym,
    /// f(x;θ) = √(θ/(πx³))·exp(−θ/x) on (0, ∞).
    LevyType,
    /// Gamma with fixed shape `alpha`, θ is the scale.
    GammaScale { alpha: T },
    /// Gamma with fixed scale `lambda`, θ is the shape.
    GammaShape { lambda: T },
    /// f(x;θ) = θ·e^{−x}/(1+e^{−x})^{θ+1} on ℝ.
    ExpLogistic,
    /// Uniform on (0, θ).
    UniformScale,
    /// Standard logistic shifted by θ.
    LogisticLoc,
    /// f(x;θ) = (1/θ)·x^{1/θ−1}·exp(−x^{1/θ}) on (0, ∞).
    WeibullTheta,
    /// Gumbel scaled by θ: CDF exp(−e^{−x/θ}).
    GumbelStd,
}

/// A one-parameter distribution family from the catalog.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Family<T> {
    kind: FamilyKind<T>,
}

/// A constructed catalog entry: the family itself plus its
/// exponential-family decomposition when one exists.
#[derive(Clone)]
pub struct Builtin<T: Real> {
    pub family: Family<T>,
    pub exp: Option<ExpFamily<T>>,
}

pub const CATALOG: [&str; 9] = [
    "uniform_sym",
    "levy_type",
    "gamma_scale",
    "gamma_shape",
    "exp_logistic",
    "uniform_scale",
    "logistic_loc",
    "weibull_theta",
    "gumbel_std",
];

/// Construct a catalog family by name.
///
/// `fixed_params` supplies nuisance constants: `alpha` for `gamma_scale`
/// (default 1) and `lambda` for `gamma_shape` (default 1). All other families
/// take no parameters; unknown keys are rejected.
pub fn make_builtin<T: Real>(
    name: &str,
    fixed_params: &BTreeMap<String, T>,
) -> Result<Builtin<T>, FamilyError> {
    let take_positive = |family: &'static str,
                         key: &'static str|
     -> Result<T, FamilyError> {
        for k in fixed_params.keys() {
            if k != key {
                return Err(FamilyError::UnknownParam {
                    family,
                    key: k.clone(),
                });
            }
        }
        let v = fixed_params.get(key).copied().unwrap_or_else(T::one);
        if !(v.is_finite() && v > T::zero()) {
            return Err(FamilyError::InvalidParam {
                family,
                key,
                value: as_f64(v),
                requirement: "finite and > 0",
            });
        }
        Ok(v)
    };
    let no_params = |family: &'static str| -> Result<(), FamilyError> {
        if let Some(k) = fixed_params.keys().next() {
            return Err(FamilyError::UnknownParam {
                family,
                key: k.clone(),
            });
        }
        Ok(())
    };

    let kind = match name {
        "uniform_sym" => {
            no_params("uniform_sym")?;
            FamilyKind::UniformSym
        }
        "levy_type" => {
            no_params("levy_type")?;
            FamilyKind::LevyType
        }
        "gamma_scale" => FamilyKind::GammaScale {
            alpha: take_positive("gamma_scale", "alpha")?,
        },
        "gamma_shape" => FamilyKind::GammaShape {
            lambda: take_positive("gamma_shape", "lambda")?,
        },
        "exp_logistic" => {
            no_params("exp_logistic")?;
            FamilyKind::ExpLogistic
        }
        "uniform_scale" => {
            no_params("uniform_scale")?;
            FamilyKind::UniformScale
        }
        "logistic_loc" => {
            no_params("logistic_loc")?;
            FamilyKind::LogisticLoc
        }
        "weibull_theta" => {
            no_params("weibull_theta")?;
            FamilyKind::WeibullTheta
        }
        "gumbel_std" => {
            no_params("gumbel_std")?;
            FamilyKind::GumbelStd
        }
        other => {
            return Err(FamilyError::UnknownFamily {
                name: other.to_string(),
                available: CATALOG.join(", "),
            })
        }
    };
    let family = Family { kind };
    let exp = expfam::exp_family_of(&family);
    Ok(Builtin { family, exp })
}

/// ln(1 + e^z), stable for large |z|.
pub(crate) fn softplus<T: Real>(z: T) -> T {
    z.max(T::zero()) + (-z.abs()).exp().ln_1p()
}

impl<T: Real> Family<T> {
    pub fn kind(&self) -> FamilyKind<T> {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::UniformSym => "uniform_sym",
            FamilyKind::LevyType => "levy_type",
            FamilyKind::GammaScale { .. } => "gamma_scale",
            FamilyKind::GammaShape { .. } => "gamma_shape",
            FamilyKind::ExpLogistic => "exp_logistic",
            FamilyKind::UniformScale => "uniform_scale",
            FamilyKind::LogisticLoc => "logistic_loc",
            FamilyKind::WeibullTheta => "weibull_theta",
            FamilyKind::GumbelStd => "gumbel_std",
        }
    }

    /// Open interval of admissible θ.
    pub fn param_domain(&self) -> (T, T) {
        match self.kind {
            FamilyKind::LogisticLoc => (T::neg_infinity(), T::infinity()),
            _ => (T::zero(), T::infinity()),
        }
    }

    pub fn check_theta(&self, theta: T) -> Result<(), FamilyError> {
        let (lo, hi) = self.param_domain();
        if theta.is_finite() && lo < theta && theta < hi {
            Ok(())
        } else {
            Err(FamilyError::ThetaOutOfDomain {
                family: self.name(),
                theta: as_f64(theta),
                lower: as_f64(lo),
                upper: as_f64(hi),
            })
        }
    }

    /// Support of the density at parameter `theta` (open endpoints).
    pub fn support(&self, theta: T) -> Support<T> {
        match self.kind {
            FamilyKind::UniformSym => Support::open(-theta, theta),
            FamilyKind::UniformScale => Support::open(T::zero(), theta),
            FamilyKind::LevyType
            | FamilyKind::GammaScale { .. }
            | FamilyKind::GammaShape { .. }
            | FamilyKind::WeibullTheta => Support::open(T::zero(), T::infinity()),
            FamilyKind::ExpLogistic | FamilyKind::LogisticLoc | FamilyKind::GumbelStd => {
                Support::open(T::neg_infinity(), T::infinity())
            }
        }
    }

    /// Union of supports over the whole parameter domain.
    pub fn ambient_support(&self) -> Support<T> {
        match self.kind {
            FamilyKind::LevyType
            | FamilyKind::GammaScale { .. }
            | FamilyKind::GammaShape { .. }
            | FamilyKind::WeibullTheta
            | FamilyKind::UniformScale => Support::open(T::zero(), T::infinity()),
            _ => Support::open(T::neg_infinity(), T::infinity()),
        }
    }

    /// Whether θ acts as a location shift, a scale factor, or neither.
    pub fn structure(&self) -> Structure {
        match self.kind {
            FamilyKind::LogisticLoc => Structure::Location,
            FamilyKind::UniformSym
            | FamilyKind::LevyType
            | FamilyKind::GammaScale { .. }
            | FamilyKind::UniformScale
            | FamilyKind::GumbelStd => Structure::Scale,
            FamilyKind::GammaShape { .. } | FamilyKind::ExpLogistic | FamilyKind::WeibullTheta => {
                Structure::Other
            }
        }
    }

    /// Natural logarithm of the density; −∞ outside the support.
    pub fn log_density(&self, x: T, theta: T) -> T {
        if !self.support(theta).contains(x) {
            return T::neg_infinity();
        }
        let one = T::one();
        match self.kind {
            FamilyKind::UniformSym => -((theta + theta).ln()),
            FamilyKind::LevyType => {
                real::<T>(0.5) * (theta / real::<T>(std::f64::consts::PI)).ln()
                    - real::<T>(1.5) * x.ln()
                    - theta / x
            }
            FamilyKind::GammaScale { alpha } => gamma_log_density(x, alpha, theta),
            FamilyKind::GammaShape { lambda } => gamma_log_density(x, theta, lambda),
            FamilyKind::ExpLogistic => theta.ln() - x - (theta + one) * softplus(-x),
            FamilyKind::UniformScale => -theta.ln(),
            FamilyKind::LogisticLoc => {
                let z = x - theta;
                -z - (softplus(-z) + softplus(-z))
            }
            FamilyKind::WeibullTheta => {
                let inv = theta.recip();
                -theta.ln() + (inv - one) * x.ln() - x.powf(inv)
            }
            FamilyKind::GumbelStd => {
                let z = x / theta;
                -theta.ln() - z - (-z).exp()
            }
        }
    }

    /// Density; 0 outside the (open) support.
    pub fn density(&self, x: T, theta: T) -> T {
        if !self.support(theta).contains(x) {
            return T::zero();
        }
        match self.kind {
            FamilyKind::UniformSym => (theta + theta).recip(),
            FamilyKind::UniformScale => theta.recip(),
            _ => self.log_density(x, theta).exp(),
        }
    }

    /// Cumulative distribution function, defined on all of ℝ.
    pub fn cdf(&self, x: T, theta: T) -> T {
        let zero = T::zero();
        let one = T::one();
        let sup = self.support(theta);
        if x <= sup.lower {
            return zero;
        }
        if x >= sup.upper {
            return one;
        }
        match self.kind {
            FamilyKind::UniformSym => (x + theta) / (theta + theta),
            FamilyKind::LevyType => specfun::erfc((theta / x).sqrt()),
            FamilyKind::GammaScale { alpha } => specfun::gamma_p(alpha, x / theta),
            FamilyKind::GammaShape { lambda } => specfun::gamma_p(theta, x / lambda),
            FamilyKind::ExpLogistic => (-theta * softplus(-x)).exp(),
            FamilyKind::UniformScale => x / theta,
            FamilyKind::LogisticLoc => (-softplus(-(x - theta))).exp(),
            FamilyKind::WeibullTheta => -(-x.powf(theta.recip())).exp_m1(),
            FamilyKind::GumbelStd => (-(-x / theta).exp()).exp(),
        }
    }

    /// Quantile function for `u ∈ (0, 1)`.
    ///
    /// Closed form everywhere except `levy_type`, `gamma_scale`, and
    /// `gamma_shape`, which bisect the CDF (monotone, so this converges to
    /// full precision).
    pub fn quantile(&self, u: T, theta: T) -> T {
        let one = T::one();
        match self.kind {
            FamilyKind::UniformSym => theta * (u + u - one),
            FamilyKind::ExpLogistic => {
                // u = (1+e^{-x})^{-θ}  ⇒  x = −ln(e^{−ln u / θ} − 1)
                -((-u.ln() / theta).exp_m1()).ln()
            }
            FamilyKind::UniformScale => theta * u,
            FamilyKind::LogisticLoc => theta + (u / (one - u)).ln(),
            FamilyKind::WeibullTheta => (-(one - u).ln()).powf(theta),
            FamilyKind::GumbelStd => -theta * (-(u.ln())).ln(),
            FamilyKind::LevyType | FamilyKind::GammaScale { .. } | FamilyKind::GammaShape { .. } => {
                self.quantile_by_bisection(u, theta)
            }
        }
    }

    fn quantile_by_bisection(&self, u: T, theta: T) -> T {
        let two = real::<T>(2.0);
        let mut lo = T::zero();
        let mut hi = T::one();
        let mut expansions = 0;
        while self.cdf(hi, theta) < u {
            lo = hi;
            hi = hi * two;
            expansions += 1;
            if expansions > 2000 || !hi.is_finite() {
                break;
            }
        }
        for _ in 0..200 {
            let mid = (lo + hi) * real::<T>(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid, theta) < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * real::<T>(0.5)
    }

    /// Draw one variate. Exact (no approximation beyond floating point):
    /// inverse transforms, the inverse-gamma identity X = 2θ/Z² for
    /// `levy_type`, and the Marsaglia–Tsang squeeze for the gamma families.
    pub fn sample(&self, theta: T, rng: &mut CounterRng) -> T {
        let th = as_f64(theta);
        let x = match self.kind {
            FamilyKind::UniformSym => th * (2.0 * rng.uniform() - 1.0),
            FamilyKind::LevyType => {
                let z = loop {
                    let z = rng.normal();
                    if z != 0.0 {
                        break z;
                    }
                };
                2.0 * th / (z * z)
            }
            FamilyKind::GammaScale { alpha } => th * sample_std_gamma(as_f64(alpha), rng),
            FamilyKind::GammaShape { lambda } => as_f64(lambda) * sample_std_gamma(th, rng),
            FamilyKind::ExpLogistic => {
                let u = rng.uniform();
                -(-u.ln() / th).exp_m1().ln()
            }
            FamilyKind::UniformScale => th * rng.uniform(),
            FamilyKind::LogisticLoc => {
                let u = rng.uniform();
                th + (u / (1.0 - u)).ln()
            }
            FamilyKind::WeibullTheta => (-rng.uniform().ln()).powf(th),
            FamilyKind::GumbelStd => -th * (-rng.uniform().ln()).ln(),
        };
        real(x)
    }
}

fn gamma_log_density<T: Real>(x: T, alpha: T, lambda: T) -> T {
    let lg = specfun::log_gamma(alpha).expect("gamma shape validated positive");
    (alpha - T::one()) * x.ln() - x / lambda - lg - alpha * lambda.ln()
}

/// Standard gamma(α, 1) variate via the Marsaglia–Tsang squeeze (α ≥ 1) and
/// the power-of-uniform boost for α < 1.
fn sample_std_gamma(alpha: f64, rng: &mut CounterRng) -> f64 {
    if alpha < 1.0 {
        let boost = rng.uniform().powf(1.0 / alpha);
        return boost * sample_std_gamma(alpha + 1.0, rng);
    }
    let d = alpha - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = rng.normal();
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u = rng.uniform();
        if u < 1.0 - 0.0331 * z.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
