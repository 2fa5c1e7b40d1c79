//! Adaptive Gauss–Kronrod quadrature.
//!
//! 7/15-point rule with bisection of the worst segment, QUADPACK-style error
//! rescaling. A half-line `(l, inf)` is split at `l + max(1, |l|/1000)`: the
//! head is integrated in original coordinates (so an integrable singularity
//! at `l` stays at a true segment endpoint) and the tail is mapped by
//! `x = join + (1-t)/t`, which places the infinite end at `t = 0` where
//! bisection never runs out of floating-point resolution. `(-inf, u)` is
//! mirrored and the whole line is handled as two half-lines. Kronrod nodes
//! are strictly interior, so singular endpoints are never evaluated.

use thiserror::Error;

use crate::real::{as_f64, real, Real};

/// Default relative tolerance for moment and normalization integrals.
pub const DEFAULT_REL_TOL: f64 = 1e-9;
/// Default absolute tolerance.
pub const DEFAULT_ABS_TOL: f64 = 1e-12;

const MAX_SUBDIVISIONS: usize = 600;

/// Integration domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IntegrationRange<T> {
    /// `(a, b)` with both endpoints finite.
    Finite(T, T),
    /// `(l, inf)`.
    UpperUnbounded(T),
    /// `(-inf, u)`.
    LowerUnbounded(T),
    /// `(-inf, inf)`.
    Whole,
}

impl<T: Real> IntegrationRange<T> {
    /// Build a range from endpoints that may be infinite.
    pub fn from_endpoints(lower: T, upper: T) -> Self {
        match (lower.is_finite(), upper.is_finite()) {
            (true, true) => IntegrationRange::Finite(lower, upper),
            (true, false) => IntegrationRange::UpperUnbounded(lower),
            (false, true) => IntegrationRange::LowerUnbounded(upper),
            (false, false) => IntegrationRange::Whole,
        }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct QuadResult<T> {
    pub value: T,
    /// Estimated absolute error of `value`.
    pub error: T,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Error)]
pub enum QuadError {
    #[error("integral did not reach tolerance: value {value:.6e}, achieved error {achieved:.3e}, requested {requested:.3e}")]
    ToleranceNotReached {
        value: f64,
        achieved: f64,
        requested: f64,
    },
    #[error("integrand returned a non-finite value near x = {at:.6e}")]
    NonFiniteIntegrand { at: f64 },
    #[error("empty integration range [{lower:.6e}, {upper:.6e}]")]
    EmptyRange { lower: f64, upper: f64 },
}

/// Integrate `f` over `range` with the crate-default tolerances.
pub fn integrate<T: Real>(
    f: impl Fn(T) -> T,
    range: IntegrationRange<T>,
) -> Result<QuadResult<T>, QuadError> {
    integrate_tol(f, range, DEFAULT_REL_TOL, DEFAULT_ABS_TOL)
}

/// Integrate `f` over `range` to `max(abs_tol, rel_tol * |I|)`.
pub fn integrate_tol<T: Real>(
    f: impl Fn(T) -> T,
    range: IntegrationRange<T>,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    match range {
        IntegrationRange::Finite(a, b) => adaptive(&f, a, b, rel_tol, abs_tol),
        IntegrationRange::UpperUnbounded(l) => half_line_up(&f, l, rel_tol, abs_tol),
        IntegrationRange::LowerUnbounded(u) => half_line_down(&f, u, rel_tol, abs_tol),
        IntegrationRange::Whole => {
            let neg = half_line_down(&f, T::zero(), rel_tol / 2.0, abs_tol / 2.0)?;
            let pos = half_line_up(&f, T::zero(), rel_tol / 2.0, abs_tol / 2.0)?;
            Ok(combine(neg, pos))
        }
    }
}

fn half_line_up<T: Real>(
    f: &impl Fn(T) -> T,
    l: T,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    let join = l + T::one().max(l.abs() * real(1e-3));
    let head = adaptive(f, l, join, rel_tol / 2.0, abs_tol / 2.0)?;
    let mapped = |t: T| {
        let fx = f(join + (T::one() - t) / t);
        if fx == T::zero() {
            // skip the jacobian: it can overflow where f has decayed
            T::zero()
        } else {
            fx / (t * t)
        }
    };
    let tail = adaptive(&mapped, T::zero(), T::one(), rel_tol / 2.0, abs_tol / 2.0)?;
    Ok(combine(head, tail))
}

fn half_line_down<T: Real>(
    f: &impl Fn(T) -> T,
    u: T,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    let join = u - T::one().max(u.abs() * real(1e-3));
    let head = adaptive(f, join, u, rel_tol / 2.0, abs_tol / 2.0)?;
    let mapped = |t: T| {
        let fx = f(join - (T::one() - t) / t);
        if fx == T::zero() {
            T::zero()
        } else {
            fx / (t * t)
        }
    };
    let tail = adaptive(&mapped, T::zero(), T::one(), rel_tol / 2.0, abs_tol / 2.0)?;
    Ok(combine(head, tail))
}

fn combine<T: Real>(a: QuadResult<T>, b: QuadResult<T>) -> QuadResult<T> {
    QuadResult {
        value: a.value + b.value,
        error: a.error + b.error,
        subdivisions: a.subdivisions + b.subdivisions,
    }
}

struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn adaptive<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult<T>, QuadError> {
    if !(a < b) {
        return Err(QuadError::EmptyRange {
            lower: as_f64(a),
            upper: as_f64(b),
        });
    }
    let first = kronrod_segment(f, a, b)?;
    let mut segments = vec![first];
    let mut subdivisions = 0usize;

    loop {
        let mut total = T::zero();
        let mut total_err = T::zero();
        for s in &segments {
            total = total + s.value;
            total_err = total_err + s.error;
        }
        let tolerance = real::<T>(abs_tol).max(real::<T>(rel_tol) * total.abs());
        if total_err <= tolerance {
            return Ok(QuadResult {
                value: total,
                error: total_err,
                subdivisions,
            });
        }
        if subdivisions >= MAX_SUBDIVISIONS {
            return Err(QuadError::ToleranceNotReached {
                value: as_f64(total),
                achieved: as_f64(total_err),
                requested: as_f64(tolerance),
            });
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                x.error
                    .partial_cmp(&y.error)
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|(i, _)| i)
            .expect("non-empty segment list");
        let Segment { a, b, .. } = segments.swap_remove(worst);
        let mid = (a + b) * real::<T>(0.5);
        if !(a < mid && mid < b) {
            // interval no longer splittable in this precision
            return Err(QuadError::ToleranceNotReached {
                value: as_f64(segments.iter().fold(T::zero(), |s, x| s + x.value)),
                achieved: f64::NAN,
                requested: abs_tol,
            });
        }
        segments.push(kronrod_segment(f, a, mid)?);
        segments.push(kronrod_segment(f, mid, b)?);
        subdivisions += 1;
    }
}

// 15-point Kronrod abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_33,
    0.949_107_912_342_758_524_526_189_684_047_85,
    0.864_864_423_359_769_072_789_712_788_640_93,
    0.741_531_185_599_394_439_863_864_773_280_79,
    0.586_087_235_467_691_130_294_144_838_258_73,
    0.405_845_151_377_397_166_906_606_412_076_96,
    0.207_784_955_007_898_467_600_689_403_773_24,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_97,
    0.063_092_092_629_978_553_290_700_663_189_2,
    0.104_790_010_322_250_183_839_876_322_541_52,
    0.140_653_259_715_525_918_745_189_590_510_24,
    0.169_004_726_639_267_902_826_583_426_598_55,
    0.190_350_578_064_785_409_913_256_402_421_01,
    0.204_432_940_075_298_892_414_161_999_234_65,
    0.209_482_141_084_727_828_012_999_174_891_71,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_08,
    0.279_705_391_489_276_667_901_467_771_423_78,
    0.381_830_050_505_118_944_950_369_775_488_98,
    0.417_959_183_673_469_387_755_102_040_816_33,
];

fn kronrod_segment<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> Result<Segment<T>, QuadError> {
    let half = (b - a) * real::<T>(0.5);
    let center = (a + b) * real::<T>(0.5);

    let eval = |x: T| -> Result<T, QuadError> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(QuadError::NonFiniteIntegrand { at: as_f64(x) })
        }
    };

    let f_center = eval(center)?;
    let mut kronrod = real::<T>(WGK[7]) * f_center;
    let mut gauss = real::<T>(WG[3]) * f_center;
    let mut res_abs = kronrod.abs();
    let mut values = [(T::zero(), T::zero()); 7];

    for j in 0..7 {
        let abscissa = half * real::<T>(XGK[j]);
        let f1 = eval(center - abscissa)?;
        let f2 = eval(center + abscissa)?;
        values[j] = (f1, f2);
        let wk = real::<T>(WGK[j]);
        kronrod = kronrod + wk * (f1 + f2);
        res_abs = res_abs + wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss = gauss + real::<T>(WG[j / 2]) * (f1 + f2);
        }
    }

    let mean = kronrod * real::<T>(0.5);
    let mut res_asc = real::<T>(WGK[7]) * (f_center - mean).abs();
    for j in 0..7 {
        let (f1, f2) = values[j];
        res_asc = res_asc + real::<T>(WGK[j]) * ((f1 - mean).abs() + (f2 - mean).abs());
    }

    let value = kronrod * half;
    let raw_err = ((kronrod - gauss) * half).abs();
    res_abs = res_abs * half.abs();
    res_asc = res_asc * half.abs();

    let mut err = raw_err;
    if res_asc > T::zero() && raw_err > T::zero() {
        let scale = (real::<T>(200.0) * raw_err / res_asc).powf(real::<T>(1.5));
        err = if scale < T::one() {
            res_asc * scale
        } else {
            res_asc
        };
    }
    let floor = real::<T>(50.0) * T::epsilon() * res_abs;
    if floor > err {
        err = floor;
    }

    Ok(Segment {
        a,
        b,
        value,
        error: err,
    })
}
