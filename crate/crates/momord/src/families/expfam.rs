//! Exponential-family decompositions `f(x;θ) = h(x)·c(θ)·exp(η(θ)·T(x))`.
//!
//! The decomposition gives the sufficient statistic T together with closed
//! moment formulas: E_θ T = −[log c]′(θ)/η′(θ) and
//! Var_θ T = (−[log c]″·η′ + [log c]′·η″)/(η′)³. Derivatives of η and log c
//! use registered closed forms when available and central differences
//! otherwise.

use std::sync::Arc;

use thiserror::Error;

use crate::real::{as_f64, real, Real};

use super::{softplus, Family, FamilyKind};

type RealFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Debug, Clone, Error)]
pub enum ExpFamilyError {
    #[error("eta'({theta}) = 0: the parametrization is degenerate there and moments of T are undefined by the closed formula")]
    DegenerateParametrization { theta: f64 },
    #[error("computed Var(T) = {value:.6e} ≤ 0 at theta = {theta}: the registered decomposition is inconsistent")]
    InconsistentVariance { theta: f64, value: f64 },
}

/// A family written as `h(x)·c(θ)·exp(η(θ)·T(x))`.
#[derive(Clone)]
pub struct ExpFamily<T: Real> {
    base: Family<T>,
    h: RealFn<T>,
    c: RealFn<T>,
    eta: RealFn<T>,
    big_t: RealFn<T>,
    eta_prime: Option<RealFn<T>>,
    eta_second: Option<RealFn<T>>,
    log_c_prime: Option<RealFn<T>>,
    log_c_second: Option<RealFn<T>>,
    eta_increasing: bool,
    big_t_increasing: bool,
}

impl<T: Real> ExpFamily<T> {
    pub fn base(&self) -> &Family<T> {
        &self.base
    }

    pub fn h(&self, x: T) -> T {
        (self.h)(x)
    }

    pub fn c(&self, theta: T) -> T {
        (self.c)(theta)
    }

    pub fn eta(&self, theta: T) -> T {
        (self.eta)(theta)
    }

    /// The sufficient statistic T(x).
    pub fn big_t(&self, x: T) -> T {
        (self.big_t)(x)
    }

    pub fn eta_increasing(&self) -> bool {
        self.eta_increasing
    }

    pub fn big_t_increasing(&self) -> bool {
        self.big_t_increasing
    }

    /// η and T share a monotonicity direction, i.e. η′(θ)·T′(x) ≥ 0; after
    /// flipping signs of both this is the canonical "η and T increasing"
    /// hypothesis.
    pub fn monotone_aligned(&self) -> bool {
        self.eta_increasing == self.big_t_increasing
    }

    pub fn eta_prime(&self, theta: T) -> T {
        match &self.eta_prime {
            Some(f) => f(theta),
            None => central_diff(self.eta.as_ref(), theta),
        }
    }

    pub fn eta_second(&self, theta: T) -> T {
        match &self.eta_second {
            Some(f) => f(theta),
            None => central_second(self.eta.as_ref(), theta),
        }
    }

    pub fn log_c_prime(&self, theta: T) -> T {
        match &self.log_c_prime {
            Some(f) => f(theta),
            None => {
                let c = &self.c;
                central_diff(&|t| c(t).ln(), theta)
            }
        }
    }

    pub fn log_c_second(&self, theta: T) -> T {
        match &self.log_c_second {
            Some(f) => f(theta),
            None => {
                let c = &self.c;
                central_second(&|t| c(t).ln(), theta)
            }
        }
    }

    /// E_θ[T(X)] = −[log c]′(θ)/η′(θ).
    pub fn mean_t(&self, theta: T) -> Result<T, ExpFamilyError> {
        let ep = self.eta_prime(theta);
        if ep == T::zero() {
            return Err(ExpFamilyError::DegenerateParametrization {
                theta: as_f64(theta),
            });
        }
        Ok(-self.log_c_prime(theta) / ep)
    }

    /// Var_θ[T(X)] = (−[log c]″·η′ + [log c]′·η″)/(η′)³.
    pub fn var_t(&self, theta: T) -> Result<T, ExpFamilyError> {
        let ep = self.eta_prime(theta);
        if ep == T::zero() {
            return Err(ExpFamilyError::DegenerateParametrization {
                theta: as_f64(theta),
            });
        }
        let v = (-self.log_c_second(theta) * ep + self.log_c_prime(theta) * self.eta_second(theta))
            / (ep * ep * ep);
        if v <= T::zero() {
            return Err(ExpFamilyError::InconsistentVariance {
                theta: as_f64(theta),
                value: as_f64(v),
            });
        }
        Ok(v)
    }

    /// Density reconstructed from the parts; used by validation tests.
    pub fn reconstructed_density(&self, x: T, theta: T) -> T {
        if !self.base.support(theta).contains(x) {
            return T::zero();
        }
        self.h(x) * self.c(theta) * (self.eta(theta) * self.big_t(x)).exp()
    }
}

// Step sizes balance truncation against roundoff: ~eps^(1/3) for first
// differences, ~eps^(1/4) for second differences, both scaled by |x|.
fn central_diff<T: Real>(f: &(impl Fn(T) -> T + ?Sized), x: T) -> T {
    let h = T::epsilon().powf(real(1.0 / 3.0)) * T::one().max(x.abs());
    (f(x + h) - f(x - h)) / (h + h)
}

fn central_second<T: Real>(f: &(impl Fn(T) -> T + ?Sized), x: T) -> T {
    let h = T::epsilon().powf(real(0.25)) * T::one().max(x.abs());
    (f(x + h) - (f(x) + f(x)) + f(x - h)) / (h * h)
}

/// Closed decomposition for the catalog families that admit one:
/// `levy_type`, `gamma_scale`, `gamma_shape`, `exp_logistic`. Returns `None`
/// for the rest (moving supports or non-exponential parameter dependence).
pub(super) fn exp_family_of<T: Real>(family: &Family<T>) -> Option<ExpFamily<T>> {
    use crate::specfun::{digamma_unchecked, log_gamma, trigamma};

    let one = T::one();
    let two = real::<T>(2.0);
    let base = *family;
    match family.kind() {
        FamilyKind::LevyType => {
            // f = [x^{-3/2}/√π] · [√θ] · exp(−θ · 1/x)
            let sqrt_pi = real::<T>(std::f64::consts::PI).sqrt();
            Some(ExpFamily {
                base,
                h: Arc::new(move |x: T| x.powf(real(-1.5)) / sqrt_pi),
                c: Arc::new(|t: T| t.sqrt()),
                eta: Arc::new(|t: T| -t),
                big_t: Arc::new(|x: T| x.recip()),
                eta_prime: Some(Arc::new(|_t: T| -T::one())),
                eta_second: Some(Arc::new(|_t: T| T::zero())),
                log_c_prime: Some(Arc::new(move |t: T| (two * t).recip())),
                log_c_second: Some(Arc::new(move |t: T| -(two * t * t).recip())),
                eta_increasing: false,
                big_t_increasing: false,
            })
        }
        FamilyKind::GammaScale { alpha } => {
            // f = [x^{α−1}/Γ(α)] · [λ^{−α}] · exp(−(1/λ) · x)
            let lg = log_gamma(alpha).expect("validated shape");
            Some(ExpFamily {
                base,
                h: Arc::new(move |x: T| ((alpha - one) * x.ln() - lg).exp()),
                c: Arc::new(move |t: T| (-alpha * t.ln()).exp()),
                eta: Arc::new(|t: T| -t.recip()),
                big_t: Arc::new(|x: T| x),
                eta_prime: Some(Arc::new(|t: T| (t * t).recip())),
                eta_second: Some(Arc::new(move |t: T| -two / (t * t * t))),
                log_c_prime: Some(Arc::new(move |t: T| -alpha / t)),
                log_c_second: Some(Arc::new(move |t: T| alpha / (t * t))),
                eta_increasing: true,
                big_t_increasing: true,
            })
        }
        FamilyKind::GammaShape { lambda } => {
            // f = [e^{−x/λ}/x] · [λ^{−α}/Γ(α)] · exp(α · ln x)
            let log_lambda = lambda.ln();
            Some(ExpFamily {
                base,
                h: Arc::new(move |x: T| (-x / lambda).exp() / x),
                c: Arc::new(move |a: T| {
                    let lg = log_gamma(a).expect("positive shape");
                    (-a * log_lambda - lg).exp()
                }),
                eta: Arc::new(|a: T| a),
                big_t: Arc::new(|x: T| x.ln()),
                eta_prime: Some(Arc::new(|_a: T| T::one())),
                eta_second: Some(Arc::new(|_a: T| T::zero())),
                log_c_prime: Some(Arc::new(move |a: T| -log_lambda - digamma_unchecked(a))),
                log_c_second: Some(Arc::new(|a: T| -trigamma(a))),
                eta_increasing: true,
                big_t_increasing: true,
            })
        }
        FamilyKind::ExpLogistic => {
            // f = [e^{−x}/(1+e^{−x})] · [θ] · exp(−θ · ln(1+e^{−x}))
            Some(ExpFamily {
                base,
                h: Arc::new(|x: T| (-x - softplus(-x)).exp()),
                c: Arc::new(|t: T| t),
                eta: Arc::new(|t: T| -t),
                big_t: Arc::new(|x: T| softplus(-x)),
                eta_prime: Some(Arc::new(|_t: T| -T::one())),
                eta_second: Some(Arc::new(|_t: T| T::zero())),
                log_c_prime: Some(Arc::new(|t: T| t.recip())),
                log_c_second: Some(Arc::new(|t: T| -(t * t).recip())),
                eta_increasing: false,
                big_t_increasing: false,
            })
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::make_builtin;
    use approx::assert_abs_diff_eq;
    use std::collections::BTreeMap;

    fn ef(name: &str, params: &[(&str, f64)]) -> ExpFamily<f64> {
        let map: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        make_builtin(name, &map).unwrap().exp.unwrap()
    }

    #[test]
    fn parts_reproduce_density() {
        let cases: Vec<(&str, Vec<(&str, f64)>, Vec<f64>, Vec<f64>)> = vec![
            ("levy_type", vec![], vec![0.2, 1.0, 4.0], vec![0.5, 1.0, 3.0]),
            ("gamma_scale", vec![("alpha", 2.5)], vec![0.3, 1.0, 6.0], vec![0.5, 2.0]),
            ("gamma_shape", vec![("lambda", 1.5)], vec![0.3, 1.0, 6.0], vec![0.5, 3.0]),
            ("exp_logistic", vec![], vec![-3.0, 0.0, 2.0], vec![0.7, 2.0]),
        ];
        for (name, params, xs, thetas) in cases {
            let e = ef(name, &params);
            for &x in &xs {
                for &t in &thetas {
                    let f = e.base().density(x, t);
                    let g = e.reconstructed_density(x, t);
                    assert!(
                        ((f - g) / f).abs() < 1e-10,
                        "{name} at x={x}, theta={t}: {f} vs {g}"
                    );
                }
            }
        }
    }

    #[test]
    fn closed_mean_values() {
        // gamma_scale: E X = αλ
        assert_abs_diff_eq!(ef("gamma_scale", &[("alpha", 2.0)]).mean_t(3.0).unwrap(), 6.0, epsilon = 1e-12);
        // exp_logistic: E T = 1/θ
        assert_abs_diff_eq!(ef("exp_logistic", &[]).mean_t(4.0).unwrap(), 0.25, epsilon = 1e-12);
        // levy_type: E(1/X) = 1/(2θ)
        assert_abs_diff_eq!(ef("levy_type", &[]).mean_t(1.0).unwrap(), 0.5, epsilon = 1e-12);
        // gamma_shape, λ=1: E ln X = Ψ(α); Ψ(1) = −γ
        assert_abs_diff_eq!(
            ef("gamma_shape", &[("lambda", 1.0)]).mean_t(1.0).unwrap(),
            -crate::specfun::EULER_GAMMA,
            epsilon = 1e-12
        );
    }

    #[test]
    fn closed_variance_values() {
        // gamma_scale: Var X = αλ²
        assert_abs_diff_eq!(ef("gamma_scale", &[("alpha", 2.0)]).var_t(3.0).unwrap(), 18.0, epsilon = 1e-10);
        // exp_logistic: T ~ Exp(θ), Var = 1/θ²
        assert_abs_diff_eq!(ef("exp_logistic", &[]).var_t(2.0).unwrap(), 0.25, epsilon = 1e-12);
        // levy_type: Var(1/X) = 1/(2θ²)
        assert_abs_diff_eq!(ef("levy_type", &[]).var_t(2.0).unwrap(), 0.125, epsilon = 1e-12);
        // gamma_shape: Var ln X = Ψ′(α); Ψ′(1) = π²/6
        assert_abs_diff_eq!(
            ef("gamma_shape", &[("lambda", 2.0)]).var_t(1.0).unwrap(),
            std::f64::consts::PI * std::f64::consts::PI / 6.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn numeric_derivative_fallback_matches_closed_forms() {
        let closed = ef("gamma_scale", &[("alpha", 2.0)]);
        let numeric = ExpFamily {
            eta_prime: None,
            eta_second: None,
            log_c_prime: None,
            log_c_second: None,
            ..closed.clone()
        };
        for theta in [0.5, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(
                numeric.mean_t(theta).unwrap(),
                closed.mean_t(theta).unwrap(),
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                numeric.var_t(theta).unwrap(),
                closed.var_t(theta).unwrap(),
                epsilon = 1e-4
            );
            assert_abs_diff_eq!(
                numeric.eta_prime(theta),
                closed.eta_prime(theta),
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn monotonicity_flags_match_grid_behavior() {
        for (name, params) in [
            ("levy_type", vec![]),
            ("gamma_scale", vec![("alpha", 1.5)]),
            ("gamma_shape", vec![("lambda", 1.0)]),
            ("exp_logistic", vec![]),
        ] {
            let e = ef(name, &params);
            let thetas: Vec<f64> = (1..40).map(|i| 0.2 + 0.1 * i as f64).collect();
            let eta_incr = thetas.windows(2).all(|w| e.eta(w[1]) > e.eta(w[0]));
            assert_eq!(eta_incr, e.eta_increasing(), "{name} eta");
            let sup = e.base().support(1.0);
            let lo = if sup.lower.is_finite() { sup.lower + 0.01 } else { -8.0 };
            let xs: Vec<f64> = (0..60).map(|i| lo + 0.15 * i as f64).collect();
            let t_incr = xs.windows(2).all(|w| e.big_t(w[1]) > e.big_t(w[0]));
            assert_eq!(t_incr, e.big_t_increasing(), "{name} T");
            assert!(e.monotone_aligned(), "{name} aligned");
        }
    }

    #[test]
    fn variance_positive_across_domain() {
        for (name, params) in [
            ("levy_type", vec![]),
            ("gamma_scale", vec![("alpha", 0.5)]),
            ("gamma_shape", vec![("lambda", 2.0)]),
            ("exp_logistic", vec![]),
        ] {
            let e = ef(name, &params);
            for theta in [0.3, 1.0, 4.0] {
                assert!(e.var_t(theta).unwrap() > 0.0, "{name} at {theta}");
            }
        }
    }
}
