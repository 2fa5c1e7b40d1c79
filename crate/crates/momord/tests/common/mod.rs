//! Shared test-side numeric oracles.
//!
//! Everything here is deliberately written from scratch — composite Simpson
//! integration instead of the library's Gauss–Kronrod code, direct series
//! instead of the library's special functions — so that agreement between the
//! two is evidence, not circularity.
#![allow(dead_code)]

/// Composite Simpson's rule with `n` nodes (forced odd).
pub fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 0 { n + 1 } else { n };
    let h = (b - a) / (n - 1) as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n - 1 {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + h * i as f64);
    }
    acc * h / 3.0
}

/// Simpson with node doubling until two refinements agree to `tol`
/// (relative to 1 + |I|).
pub fn simpson_tol(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let mut n = 129;
    let mut prev = simpson(f, a, b, n);
    loop {
        n = 2 * (n - 1) + 1;
        let cur = simpson(f, a, b, n);
        if (cur - prev).abs() <= tol * (1.0 + cur.abs()) || n > 4_000_001 {
            return cur;
        }
        prev = cur;
    }
}

/// Integrate `f` between consecutive breakpoints, splitting any positive
/// piece spanning more than a decade into log-spaced segments first. Keeps
/// Simpson honest on heavy tails and integrable endpoint singularities
/// without ever consulting the library's quadrature.
pub fn integrate_split(f: &impl Fn(f64) -> f64, cuts: &[f64], tol: f64) -> f64 {
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            continue;
        }
        if a > 0.0 && b / a > 10.0 {
            let k = (b / a).log10().ceil() as usize;
            let ratio = b / a;
            for i in 0..k {
                let lo = a * ratio.powf(i as f64 / k as f64);
                let hi = a * ratio.powf((i + 1) as f64 / k as f64);
                total += simpson_tol(f, lo, hi, tol);
            }
        } else {
            total += simpson_tol(f, a, b, tol);
        }
    }
    total
}

/// Euler's constant from the harmonic-sum asymptotic
/// `H_n − ln n − 1/(2n) + 1/(12n²) − 1/(120n⁴)`, summed small-terms-first.
pub fn euler_gamma_series() -> f64 {
    let n = 10_000u64;
    let mut h = 0.0;
    for k in (1..=n).rev() {
        h += 1.0 / k as f64;
    }
    let nf = n as f64;
    h - nf.ln() - 0.5 / nf + 1.0 / (12.0 * nf * nf) - 1.0 / (120.0 * nf.powi(4))
}

/// Ei(−1) = −∫₁^∞ e^{−t}/t dt, the tail integral mapped onto [0, 1).
pub fn expint_ei_minus_one() -> f64 {
    let g = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let t = 1.0 + u / (1.0 - u);
        let jac = 1.0 / ((1.0 - u) * (1.0 - u));
        (-t).exp() / t * jac
    };
    -simpson_tol(&g, 0.0, 1.0, 1e-13)
}

/// Sample mean.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Two-sided Kolmogorov distance between a sample's ECDF and a CDF.
pub fn ecdf_sup_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let n = sample.len() as f64;
    let mut sup: f64 = 0.0;
    for (i, &x) in sample.iter().enumerate() {
        let fx = cdf(x);
        sup = sup.max((i + 1) as f64 / n - fx).max(fx - i as f64 / n);
    }
    sup
}
