//! Grid-based checkers for stochastic orders and total positivity.
//!
//! These are numerical *evidence* checks, not proofs: each inequality is
//! tested on a finite grid with a relative tolerance. Violations larger than
//! the tolerance produce a `Fails` verdict with witnesses; a grid where the
//! worst violation stays within tolerance but a nontrivial fraction of cells
//! sit on the boundary is reported `Inconclusive` rather than silently
//! coerced to `Holds`.

use serde::Serialize;
use std::fmt;
use thiserror::Error;

use crate::families::Family;
use crate::real::{as_f64, real, Real};
use crate::rng::CounterRng;

/// Relative tolerance against the local magnitude of the checked quantity.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default number of x points for density/CDF grids.
pub const DEFAULT_X_POINTS: usize = 512;
/// Default number of parameter points.
pub const DEFAULT_THETA_POINTS: usize = 64;
/// Quantile grids cover [q(CLIP), q(1 − CLIP)].
pub const QUANTILE_CLIP: f64 = 1e-4;

const WITNESS_CAP: usize = 64;
/// Fraction of borderline cells above which a non-failing check is reported
/// inconclusive.
const BORDERLINE_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Error)]
pub enum GridError {
    #[error("a grid needs at least {needed} points, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("grid points must be finite and strictly increasing (violation at index {index})")]
    NotIncreasing { index: usize },
    #[error("invalid grid bounds: {reason}")]
    BadBounds { reason: String },
}

#[derive(Debug, Clone, Error)]
pub enum OrderError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("family error: {0}")]
    Family(#[from] crate::families::FamilyError),
    #[error("CDF value {value} at grid point {x} is outside [0,1]")]
    InvalidCdf { x: f64, value: f64 },
    #[error("negative density {value} at grid point {x}")]
    NegativeDensity { x: f64, value: f64 },
    #[error("zero density inside the declared support of `{family}` at (x={x}, theta={theta})")]
    InvalidSupport {
        family: &'static str,
        x: f64,
        theta: f64,
    },
    #[error("non-finite quantile difference at alpha={alpha}")]
    InvalidQuantile { alpha: f64 },
    #[error("alpha grid must lie strictly inside (0,1); got {alpha}")]
    AlphaOutOfRange { alpha: f64 },
    #[error("minor order r={r} outside the supported range 2..=4")]
    InvalidMinorOrder { r: usize },
    #[error("grid of {len} points cannot host order-{r} minors")]
    GridTooSmall { r: usize, len: usize },
}

/// Strictly increasing evaluation points.
#[derive(Clone, Debug, Serialize)]
pub struct Grid<T> {
    points: Vec<T>,
}

impl<T: Real> Grid<T> {
    /// Use explicit points; they must be finite and strictly increasing.
    pub fn from_points(points: Vec<T>) -> Result<Self, GridError> {
        if points.len() < 2 {
            return Err(GridError::TooFew {
                needed: 2,
                got: points.len(),
            });
        }
        for (i, w) in points.windows(2).enumerate() {
            if !w[0].is_finite() || !w[1].is_finite() || w[1] <= w[0] {
                return Err(GridError::NotIncreasing { index: i + 1 });
            }
        }
        Ok(Grid { points })
    }

    /// `n` evenly spaced points on `[a, b]`.
    pub fn linspace(a: T, b: T, n: usize) -> Result<Self, GridError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(GridError::BadBounds {
                reason: format!("linspace needs finite a < b, got [{}, {}]", as_f64(a), as_f64(b)),
            });
        }
        let n = n.max(2);
        let step = (b - a) / real::<T>((n - 1) as f64);
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            pts.push(a + step * real::<T>(i as f64));
        }
        *pts.last_mut().expect("n >= 2") = b;
        Grid::from_points(pts)
    }

    /// `n` log-spaced points on `[a, b]`, `0 < a < b`.
    pub fn log_spaced(a: T, b: T, n: usize) -> Result<Self, GridError> {
        if !(a.is_finite() && b.is_finite() && T::zero() < a && a < b) {
            return Err(GridError::BadBounds {
                reason: format!(
                    "log spacing needs 0 < a < b, got [{}, {}]",
                    as_f64(a),
                    as_f64(b)
                ),
            });
        }
        let lg = Grid::linspace(a.ln(), b.ln(), n)?;
        Grid::from_points(lg.points.into_iter().map(|x| x.exp()).collect())
    }

    /// Quantile-spaced grid: images of `n` evenly spaced probabilities in
    /// `[QUANTILE_CLIP, 1 − QUANTILE_CLIP]` under `quantile`. Exact
    /// duplicates are collapsed.
    pub fn from_quantiles(quantile: impl Fn(T) -> T, n: usize) -> Result<Self, GridError> {
        let n = n.max(2);
        let clip = QUANTILE_CLIP;
        let mut pts = Vec::with_capacity(n);
        for i in 0..n {
            let u = clip + (1.0 - 2.0 * clip) * i as f64 / (n - 1) as f64;
            pts.push(quantile(real(u)));
        }
        pts.dedup_by(|a, b| a == b);
        Grid::from_points(pts)
    }

    /// Union of two grids (sorted, exact duplicates collapsed).
    pub fn merge(&self, other: &Grid<T>) -> Grid<T> {
        let mut pts: Vec<T> = self
            .points
            .iter()
            .chain(other.points.iter())
            .copied()
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("grid points are finite"));
        pts.dedup_by(|a, b| a == b);
        Grid { points: pts }
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// A grid location whose inequality deficit exceeded the tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct Witness<T> {
    /// Coordinates of the offending cell (1 point for one-dimensional
    /// checks, x/θ corners for cell checks, the subset points for minors).
    pub coords: Vec<T>,
    /// Normalized amount by which the inequality failed.
    pub violation: T,
}

/// Outcome of a grid check.
#[derive(Clone, Debug, Serialize)]
pub struct OrderReport<T> {
    pub verdict: Verdict,
    /// Violating locations, capped at a fixed count.
    pub witnesses: Vec<Witness<T>>,
    /// Total number of violations found (may exceed `witnesses.len()`).
    pub witness_count: usize,
    /// Largest normalized violation (0 when every inequality held).
    pub max_violation: T,
    /// Relative tolerance the violations were compared against.
    pub tolerance: T,
}

/// Accumulates per-cell deficits and applies the verdict policy.
struct CellLog<T> {
    tol: T,
    max_v: T,
    cells: usize,
    borderline: usize,
    witness_count: usize,
    witnesses: Vec<Witness<T>>,
}

impl<T: Real> CellLog<T> {
    fn new() -> Self {
        CellLog {
            tol: real(DEFAULT_TOL),
            max_v: T::zero(),
            cells: 0,
            borderline: 0,
            witness_count: 0,
            witnesses: Vec::new(),
        }
    }

    /// Record one cell; `v` is the normalized violation (≤ 0 means the
    /// inequality held with margin).
    fn push(&mut self, coords: &[T], v: T) {
        self.cells += 1;
        if v > self.max_v {
            self.max_v = v;
        }
        if v > self.tol {
            self.witness_count += 1;
            if self.witnesses.len() < WITNESS_CAP {
                self.witnesses.push(Witness {
                    coords: coords.to_vec(),
                    violation: v,
                });
            }
        } else if v > T::zero() {
            self.borderline += 1;
        }
    }

    fn finish(self) -> OrderReport<T> {
        let verdict = if self.max_v > self.tol {
            Verdict::Fails
        } else if self.cells == 0
            || self.borderline as f64 >= BORDERLINE_FRACTION * self.cells as f64
                && self.borderline > 0
        {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        };
        OrderReport {
            verdict,
            witnesses: self.witnesses,
            witness_count: self.witness_count,
            max_violation: self.max_v.max(T::zero()),
            tolerance: self.tol,
        }
    }
}

/// Usual stochastic order X ≤_st Y, with `f_cdf` for X and `g_cdf` for Y:
/// holds iff F(x) ≥ G(x) − tol at every grid point.
pub fn check_st<T: Real>(
    f_cdf: impl Fn(T) -> T,
    g_cdf: impl Fn(T) -> T,
    grid: &Grid<T>,
) -> Result<OrderReport<T>, OrderError> {
    let mut log = CellLog::new();
    let slack = real::<T>(1e-9);
    for &x in grid.points() {
        let fv = f_cdf(x);
        let gv = g_cdf(x);
        for v in [fv, gv] {
            if !(v >= -slack && v <= T::one() + slack) {
                return Err(OrderError::InvalidCdf {
                    x: as_f64(x),
                    value: as_f64(v),
                });
            }
        }
        // violation when G exceeds F
        log.push(&[x], gv - fv);
    }
    Ok(log.finish())
}

/// Likelihood ratio order: the ratio g/f must be nondecreasing on the
/// common-support portion of the grid. Works in log space; points where
/// either density vanishes are skipped, and a fully skipped grid is
/// inconclusive.
pub fn check_lr<T: Real>(
    f_density: impl Fn(T) -> T,
    g_density: impl Fn(T) -> T,
    grid: &Grid<T>,
) -> Result<OrderReport<T>, OrderError> {
    let mut log_ratio = Vec::with_capacity(grid.len());
    for &x in grid.points() {
        let fv = f_density(x);
        let gv = g_density(x);
        for v in [fv, gv] {
            if v < T::zero() {
                return Err(OrderError::NegativeDensity {
                    x: as_f64(x),
                    value: as_f64(v),
                });
            }
        }
        if fv > T::zero() && gv > T::zero() {
            log_ratio.push((x, gv.ln() - fv.ln()));
        }
    }
    let mut log = CellLog::new();
    for w in log_ratio.windows(2) {
        let (x0, r0) = w[0];
        let (x1, r1) = w[1];
        let scale = T::one().max(r0.abs()).max(r1.abs());
        log.push(&[x0, x1], (r0 - r1) / scale);
    }
    Ok(log.finish())
}

/// Dispersive order: G⁻¹(α) − F⁻¹(α) must be nondecreasing on the α grid.
pub fn check_disp<T: Real>(
    f_quantile: impl Fn(T) -> T,
    g_quantile: impl Fn(T) -> T,
    alpha_grid: &Grid<T>,
) -> Result<OrderReport<T>, OrderError> {
    let mut diffs = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid.points() {
        if !(T::zero() < a && a < T::one()) {
            return Err(OrderError::AlphaOutOfRange { alpha: as_f64(a) });
        }
        let d = g_quantile(a) - f_quantile(a);
        if !d.is_finite() {
            return Err(OrderError::InvalidQuantile { alpha: as_f64(a) });
        }
        diffs.push((a, d));
    }
    let mut log = CellLog::new();
    for w in diffs.windows(2) {
        let (a0, d0) = w[0];
        let (a1, d1) = w[1];
        let scale = T::one().max(d0.abs()).max(d1.abs());
        log.push(&[a0, a1], (d0 - d1) / scale);
    }
    Ok(log.finish())
}

/// Log-supermodularity of (x, θ) ↦ f(x; θ) over adjacent grid cells: the
/// mixed difference of log f must be ≥ −tol. Cells that straddle a moving
/// support boundary (some corner density exactly zero because the corner is
/// outside that θ's support) are checked as 2×2 determinant minors instead,
/// since log-differences break down there.
pub fn check_tp2_mixed<T: Real>(
    family: &Family<T>,
    x_grid: &Grid<T>,
    theta_grid: &Grid<T>,
) -> Result<OrderReport<T>, OrderError> {
    for &theta in theta_grid.points() {
        family.check_theta(theta)?;
    }
    let xs = x_grid.points();
    let thetas = theta_grid.points();
    let mut log = CellLog::new();
    for tj in thetas.windows(2) {
        let (t0, t1) = (tj[0], tj[1]);
        for xi in xs.windows(2) {
            let (x0, x1) = (xi[0], xi[1]);
            let corners = [(x0, t0), (x1, t0), (x0, t1), (x1, t1)];
            let mut dens = [T::zero(); 4];
            let mut any_zero = false;
            for (k, &(x, t)) in corners.iter().enumerate() {
                let d = family.density(x, t);
                if d == T::zero() {
                    if family.support(t).contains(x) {
                        return Err(OrderError::InvalidSupport {
                            family: family.name(),
                            x: as_f64(x),
                            theta: as_f64(t),
                        });
                    }
                    any_zero = true;
                }
                dens[k] = d;
            }
            let coords = [x0, x1, t0, t1];
            if any_zero {
                // det [f(x0;t0) f(x1;t0); f(x0;t1) f(x1;t1)] ≥ 0 for TP₂
                let det = dens[0] * dens[3] - dens[1] * dens[2];
                let scale = T::one().max(dens[0] * dens[3]).max(dens[1] * dens[2]);
                log.push(&coords, -det / scale);
            } else {
                let l = [dens[0].ln(), dens[1].ln(), dens[2].ln(), dens[3].ln()];
                let mixed = l[3] - l[2] - l[1] + l[0];
                let scale = l
                    .iter()
                    .fold(T::one(), |acc, v| acc.max(v.abs()));
                log.push(&coords, -mixed / scale);
            }
        }
    }
    Ok(log.finish())
}

/// Total positivity of order `r` (2 ≤ r ≤ 4) for an arbitrary kernel: every
/// m×m minor (m ≤ r) over ordered grid subsets must be ≥ −tol. Subsets are
/// enumerated exhaustively when both grids have ≤ 12 points and sampled as
/// 10,000 seeded random ordered subsets per minor size otherwise.
pub fn check_tpr_minors<T: Real>(
    kernel: impl Fn(T, T) -> T,
    x_grid: &Grid<T>,
    y_grid: &Grid<T>,
    r: usize,
) -> Result<OrderReport<T>, OrderError> {
    if !(2..=4).contains(&r) {
        return Err(OrderError::InvalidMinorOrder { r });
    }
    for grid in [x_grid, y_grid] {
        if grid.len() < r {
            return Err(OrderError::GridTooSmall { r, len: grid.len() });
        }
    }
    let xs = x_grid.points();
    let ys = y_grid.points();
    let mut log = CellLog::new();

    let check_subset = |log: &mut CellLog<T>, xi: &[usize], yi: &[usize]| {
        let m = xi.len();
        let mut mat = [[T::zero(); 4]; 4];
        for (a, &i) in xi.iter().enumerate() {
            for (b, &j) in yi.iter().enumerate() {
                mat[a][b] = kernel(xs[i], ys[j]);
            }
        }
        let det = scaled_det(&mut mat, m);
        let mut coords = Vec::with_capacity(2 * m);
        coords.extend(xi.iter().map(|&i| xs[i]));
        coords.extend(yi.iter().map(|&j| ys[j]));
        log.push(&coords, -det);
    };

    let exhaustive = xs.len() <= 12 && ys.len() <= 12;
    for m in 2..=r {
        if exhaustive {
            let x_subsets = combinations(xs.len(), m);
            let y_subsets = combinations(ys.len(), m);
            for xi in &x_subsets {
                for yi in &y_subsets {
                    check_subset(&mut log, xi, yi);
                }
            }
        } else {
            // fixed internal stream: deterministic regardless of caller state
            let mut rng = CounterRng::substream(0x7069_7665, &[m as u64]);
            for _ in 0..10_000 {
                let xi = random_sorted_subset(xs.len(), m, &mut rng);
                let yi = random_sorted_subset(ys.len(), m, &mut rng);
                check_subset(&mut log, &xi, &yi);
            }
        }
    }
    Ok(log.finish())
}

/// Logconcavity of `f` on the grid: divided second differences of log f must
/// be ≤ tol on the positive part, and the positive part must be a contiguous
/// run (an interior zero inside it is itself a violation).
pub fn check_logconcave<T: Real>(
    f: impl Fn(T) -> T,
    grid: &Grid<T>,
) -> Result<OrderReport<T>, OrderError> {
    let xs = grid.points();
    let mut vals = Vec::with_capacity(xs.len());
    for &x in xs {
        let v = f(x);
        if v < T::zero() {
            return Err(OrderError::NegativeDensity {
                x: as_f64(x),
                value: as_f64(v),
            });
        }
        vals.push(v);
    }
    let first_pos = vals.iter().position(|v| *v > T::zero());
    let last_pos = vals.iter().rposition(|v| *v > T::zero());
    let mut log = CellLog::new();
    let (first, last) = match (first_pos, last_pos) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            // identically zero: nothing to check
            log.push(&[xs[0]], T::zero());
            return Ok(log.finish());
        }
    };
    // a zero strictly inside the positive run breaks logconcavity outright
    for i in first..=last {
        if vals[i] == T::zero() {
            log.push(&[xs[i]], T::one());
        }
    }
    for i in (first + 1)..last {
        if vals[i - 1] == T::zero() || vals[i] == T::zero() || vals[i + 1] == T::zero() {
            continue;
        }
        let (l0, l1, l2) = (vals[i - 1].ln(), vals[i].ln(), vals[i + 1].ln());
        let hl = xs[i] - xs[i - 1];
        let hr = xs[i + 1] - xs[i];
        let hm = (hl + hr) * real::<T>(0.5);
        let d2 = ((l2 - l1) / hr - (l1 - l0) / hl) / hm;
        // noise scale of the divided difference
        let mag = T::one().max(l0.abs()).max(l1.abs()).max(l2.abs());
        let scale = mag * (hl.recip() + hr.recip()) / hm;
        log.push(&[xs[i]], d2 / scale);
    }
    Ok(log.finish())
}

/// Number of sign alternations in `values` after deleting zeros.
pub fn sign_changes<T: Real>(values: &[T]) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None;
    for &v in values {
        if v == T::zero() {
            continue;
        }
        let pos = v > T::zero();
        if let Some(p) = last {
            if p != pos {
                count += 1;
            }
        }
        last = Some(pos);
    }
    count
}

/// Determinant of the leading m×m block after row and column max-abs
/// scaling (normalizes magnitudes; preserves sign).
fn scaled_det<T: Real>(mat: &mut [[T; 4]; 4], m: usize) -> T {
    for row in mat.iter_mut().take(m) {
        let s = row
            .iter()
            .take(m)
            .fold(T::zero(), |acc, v| acc.max(v.abs()));
        if s == T::zero() {
            return T::zero();
        }
        for v in row.iter_mut().take(m) {
            *v = *v / s;
        }
    }
    for j in 0..m {
        let s = (0..m).fold(T::zero(), |acc, i| acc.max(mat[i][j].abs()));
        if s == T::zero() {
            return T::zero();
        }
        for row in mat.iter_mut().take(m) {
            row[j] = row[j] / s;
        }
    }
    // Gaussian elimination with partial pivoting
    let mut det = T::one();
    for k in 0..m {
        let mut piv = k;
        for i in (k + 1)..m {
            if mat[i][k].abs() > mat[piv][k].abs() {
                piv = i;
            }
        }
        if mat[piv][k] == T::zero() {
            return T::zero();
        }
        if piv != k {
            mat.swap(piv, k);
            det = -det;
        }
        det = det * mat[k][k];
        for i in (k + 1)..m {
            let factor = mat[i][k] / mat[k][k];
            for j in k..m {
                mat[i][j] = mat[i][j] - factor * mat[k][j];
            }
        }
    }
    det
}

/// All m-element index subsets of 0..n in lexicographic order.
fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        out.push(idx.clone());
        // advance
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - m {
                break;
            }
        }
        if idx[i] == i + n - m {
            return out;
        }
        idx[i] += 1;
        for j in (i + 1)..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// m distinct sorted indices drawn from 0..n.
fn random_sorted_subset(n: usize, m: usize, rng: &mut CounterRng) -> Vec<usize> {
    let mut picked = Vec::with_capacity(m);
    while picked.len() < m {
        let candidate = (rng.next_u64() % n as u64) as usize;
        if !picked.contains(&candidate) {
            picked.push(candidate);
        }
    }
    picked.sort_unstable();
    picked
}
