//! Numerical certification: error scans, log-log order fits, gate budgets
//! and extraction of the low-order terms of `log f(x)`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::formula::{GeneratorPair, ProductFormula, RepeatMode};
use crate::matcore::{expm, logm_near_identity, solve_real, spectral_norm, CMatrix};
use crate::scalar::Real;

/// Errors below this are treated as exact when fitting.
pub const DEGENERATE_ERROR: f64 = 1e-14;
pub const DEFAULT_GRID: (f64, f64, usize) = (0.01, 0.1, 20);
pub const DEFAULT_FIT_POINTS: usize = 10;
pub const DEFAULT_GATE_CAP: usize = 1_000_000;
pub const DEFAULT_BCH_STEP: f64 = 1e-2;

type TargetFn<T> = dyn Fn(T) -> Result<CMatrix<T>> + Send + Sync;

/// What a scanned formula is compared against.
#[derive(Clone)]
pub enum ScanTarget<T> {
    /// `exp(x^2 [A, B])`.
    Commutator,
    /// `exp(x (A + B) + R x^2 [A, B])`.
    SumCommutator(T),
    /// Any caller-supplied `x -> target(x)`.
    Custom(Arc<TargetFn<T>>),
}

impl<T: Real> ScanTarget<T> {
    pub fn custom(f: impl Fn(T) -> Result<CMatrix<T>> + Send + Sync + 'static) -> Self {
        ScanTarget::Custom(Arc::new(f))
    }

    pub fn matrix(&self, gens: &GeneratorPair<T>, x: T) -> Result<CMatrix<T>> {
        match self {
            ScanTarget::Commutator => expm(&gens.commutator().scale_real(x * x)),
            ScanTarget::SumCommutator(r) => {
                let lin = (gens.a() + gens.b()).scale_real(x);
                expm(&(&lin + &gens.commutator().scale_real(*r * x * x)))
            }
            ScanTarget::Custom(f) => f(x),
        }
    }

    pub fn kind(&self) -> TargetKind<T> {
        match self {
            ScanTarget::Commutator => TargetKind::Commutator,
            ScanTarget::SumCommutator(r) => TargetKind::SumCommutator(*r),
            ScanTarget::Custom(_) => TargetKind::Custom,
        }
    }
}

impl<T: Real> fmt::Debug for ScanTarget<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TargetKind<T> {
    Commutator,
    SumCommutator(T),
    Custom,
}

/// Which rows enter the log-log fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Window<T> {
    All,
    /// The last `n` rows.
    LastN(usize),
    /// Rows with `lo <= x <= hi`.
    Range(T, T),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScanRow<T> {
    pub x: T,
    pub error: T,
    pub gates: Option<usize>,
}

/// Least-squares line through `(ln x, ln error)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub x_lo: T,
    pub x_hi: T,
    pub points: usize,
}

#[derive(Clone, Debug)]
pub struct ScanResult<T> {
    pub rows: Vec<ScanRow<T>>,
    pub window: Window<T>,
    /// `None` when fewer than two usable rows fall in the window.
    pub fit: Option<LineFit<T>>,
    pub target: TargetKind<T>,
}

impl<T: Real> ScanResult<T> {
    pub fn slope(&self) -> Option<T> {
        self.fit.map(|f| f.slope)
    }

    pub fn xs(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn errors(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.error).collect()
    }

    /// CSV with a `# slope=... window=[lo,hi]` footer when a fit exists.
    pub fn to_csv(&self, x_name: &str) -> String {
        self.to_csv_with(x_name, fmt_sig17)
    }

    /// As [`Self::to_csv`] with a custom formatter for the `x` column
    /// (e.g. integer step counts).
    pub fn to_csv_with(&self, x_name: &str, fmt_x: impl Fn(f64) -> String) -> String {
        let with_gates = self.rows.iter().any(|r| r.gates.is_some());
        let mut out = String::new();
        out.push_str(x_name);
        out.push_str(if with_gates { ",error,gates\n" } else { ",error\n" });
        for r in &self.rows {
            out.push_str(&fmt_x(r.x.to_f64_lossy()));
            out.push(',');
            out.push_str(&fmt_sig17(r.error.to_f64_lossy()));
            if with_gates {
                out.push(',');
                out.push_str(&r.gates.map(|g| g.to_string()).unwrap_or_default());
            }
            out.push('\n');
        }
        if let Some(fit) = self.fit {
            out.push_str(&format!(
                "# slope={} window=[{},{}]\n",
                fmt_sig17(fit.slope.to_f64_lossy()),
                fmt_x(fit.x_lo.to_f64_lossy()),
                fmt_x(fit.x_hi.to_f64_lossy())
            ));
        }
        out
    }
}

/// Deterministic 17-significant-digit formatting.
pub fn fmt_sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn logspace<T: Real>(lo: T, hi: T, count: usize) -> Result<Vec<T>> {
    if count == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(lo > T::zero() && hi >= lo) {
        return Err(Error::InvalidInput(format!("logspace needs 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    let step = (b - a) / T::from_count(count - 1);
    Ok((0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                (a + step * T::from_count(i)).exp()
            }
        })
        .collect())
}

/// Points `start, start + step, ...` not exceeding `stop` (with a little slack).
pub fn linspace_step<T: Real>(start: T, step: T, stop: T) -> Result<Vec<T>> {
    if !(step > T::zero()) || stop < start {
        return Err(Error::InvalidInput("grid needs step > 0 and stop >= start".into()));
    }
    let slack = step * T::lit(1e-9);
    let mut out = Vec::new();
    let mut i = 0usize;
    loop {
        let x = start + step * T::from_count(i);
        if x > stop + slack {
            break;
        }
        out.push(x);
        i += 1;
        if i > 10_000_000 {
            return Err(Error::InvalidInput("grid is too large".into()));
        }
    }
    Ok(out)
}

/// Default order-fit grid: 20 log-spaced points on `[0.01, 0.1]`.
pub fn default_grid<T: Real>() -> Vec<T> {
    logspace(T::lit(DEFAULT_GRID.0), T::lit(DEFAULT_GRID.1), DEFAULT_GRID.2).expect("valid default grid")
}

/// Least squares in log-log space; rows with non-positive values are skipped.
pub fn fit_loglog<T: Real>(points: &[(T, T)]) -> Option<LineFit<T>> {
    let kept: Vec<(T, T)> = points
        .iter()
        .copied()
        .filter(|(x, y)| *x > T::zero() && *y > T::zero() && y.is_finite())
        .collect();
    let usable: Vec<(T, T)> = kept.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    if usable.len() < 2 {
        return None;
    }
    let n = T::from_count(usable.len());
    let mx = usable.iter().map(|p| p.0).sum::<T>() / n;
    let my = usable.iter().map(|p| p.1).sum::<T>() / n;
    let sxx = usable.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    if sxx == T::zero() {
        return None;
    }
    let sxy = usable.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let slope = sxy / sxx;
    let lo = kept.iter().map(|p| p.0).fold(T::infinity(), T::min);
    let hi = kept.iter().map(|p| p.0).fold(T::neg_infinity(), T::max);
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        x_lo: lo,
        x_hi: hi,
        points: usable.len(),
    })
}

fn validate_grid<T: Real>(xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if xs.iter().any(|&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::InvalidInput("grid points must be positive and finite".into()));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Selects the rows a window refers to.
pub fn window_rows<T: Real>(rows: &[ScanRow<T>], window: Window<T>) -> Vec<ScanRow<T>> {
    match window {
        Window::All => rows.to_vec(),
        Window::LastN(n) => rows[rows.len().saturating_sub(n)..].to_vec(),
        Window::Range(lo, hi) => rows.iter().copied().filter(|r| r.x >= lo && r.x <= hi).collect(),
    }
}

/// Builds a [`ScanResult`] from already computed rows.
pub fn finish_scan<T: Real>(rows: Vec<ScanRow<T>>, window: Window<T>, target: TargetKind<T>) -> ScanResult<T> {
    let pts: Vec<(T, T)> = window_rows(&rows, window).iter().map(|r| (r.x, r.error)).collect();
    ScanResult {
        fit: fit_loglog(&pts),
        rows,
        window,
        target,
    }
}

/// `||f(x) - target(x)||_2` on every grid point, fitted over `window`.
///
/// Points are evaluated in parallel and collected in grid order.
pub fn error_scan<T: Real>(
    f: &ProductFormula<T>,
    gens: &GeneratorPair<T>,
    target: &ScanTarget<T>,
    xs: &[T],
    window: Window<T>,
) -> Result<ScanResult<T>> {
    validate_grid(xs)?;
    let rows = xs
        .par_iter()
        .map(|&x| {
            let got = f.evaluate(gens, x)?;
            let want = target.matrix(gens, x)?;
            let error = spectral_norm(&(&got - &want));
            if !error.is_finite() {
                return Err(Error::SolverFailure(format!("non-finite error at x = {x}")));
            }
            Ok(ScanRow { x, error, gates: None })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_scan(rows, window, target.kind()))
}

/// Empirical order `slope - 1` on the default grid and window.
pub fn estimate_order<T: Real>(f: &ProductFormula<T>, gens: &GeneratorPair<T>, target: &ScanTarget<T>) -> Result<T> {
    estimate_order_on(f, gens, target, &default_grid(), Window::LastN(DEFAULT_FIT_POINTS))
}

pub fn estimate_order_on<T: Real>(
    f: &ProductFormula<T>,
    gens: &GeneratorPair<T>,
    target: &ScanTarget<T>,
    xs: &[T],
    window: Window<T>,
) -> Result<T> {
    let scan = error_scan(f, gens, target, xs, window)?;
    let tiny = T::lit(DEGENERATE_ERROR);
    let rows = window_rows(&scan.rows, window);
    if rows.iter().all(|r| r.error < tiny) {
        return Err(Error::DegenerateScan { threshold: DEGENERATE_ERROR });
    }
    let pts: Vec<(T, T)> = rows.iter().filter(|r| r.error >= tiny).map(|r| (r.x, r.error)).collect();
    let fit = fit_loglog(&pts).ok_or(Error::DegenerateScan { threshold: DEGENERATE_ERROR })?;
    Ok(fit.slope - T::one())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateBudget<T> {
    pub r: usize,
    pub gates: usize,
    pub error: T,
}

/// Error of `f(x / sqrt r)^r` against `exp(x^2 [A, B])`.
pub fn repeated_error<T: Real>(f: &ProductFormula<T>, gens: &GeneratorPair<T>, x: T, r: usize) -> Result<T> {
    let one = f.evaluate(gens, x / T::from_count(r).sqrt())?;
    let target = ScanTarget::Commutator.matrix(gens, x)?;
    Ok(spectral_norm(&(&one.powi(r) - &target)))
}

/// Gate count of `repeat(f, r)`; every seam of a repetition is identical, so
/// the count is affine in `r` beyond the first copy.
pub fn repeated_gate_count<T: Real>(f: &ProductFormula<T>, r: usize) -> usize {
    if r <= 2 {
        return f.repeat(r.max(1), RepeatMode::Commutator).map(|g| g.gate_count()).unwrap_or(0);
    }
    let g1 = f.gate_count();
    let g2 = f.repeat(2, RepeatMode::Commutator).map(|g| g.gate_count()).unwrap_or(2 * g1);
    g1 + (r - 1) * (g2 - g1)
}

/// Smallest `r` with error of `repeat(f, r)` at `x` at most `eps` (default cap).
pub fn gates_to_accuracy<T: Real>(f: &ProductFormula<T>, gens: &GeneratorPair<T>, x: T, eps: T) -> Result<GateBudget<T>> {
    gates_to_accuracy_capped(f, gens, x, eps, DEFAULT_GATE_CAP)
}

/// Doubling then bisection on `r`, evaluating `f(x/sqrt r)^r` by repeated squaring.
pub fn gates_to_accuracy_capped<T: Real>(
    f: &ProductFormula<T>,
    gens: &GeneratorPair<T>,
    x: T,
    eps: T,
    cap: usize,
) -> Result<GateBudget<T>> {
    if !(eps > T::zero()) || !(x > T::zero()) {
        return Err(Error::InvalidInput("gates_to_accuracy needs eps > 0 and x > 0".into()));
    }
    let err = |r: usize| repeated_error(f, gens, x, r);
    let mut hi = 1usize;
    let mut e_hi = err(hi)?;
    while e_hi > eps {
        if hi >= cap {
            return Err(Error::BudgetExceeded { cap });
        }
        hi = (hi * 2).min(cap);
        e_hi = err(hi)?;
    }
    let mut lo = hi / 2; // known to fail (or zero)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let e = err(mid)?;
        if e <= eps {
            hi = mid;
            e_hi = e;
        } else {
            lo = mid;
        }
    }
    Ok(GateBudget {
        r: hi,
        gates: repeated_gate_count(f, hi),
        error: e_hi,
    })
}

/// The `x`, `x^2`, `x^3` coefficient matrices of `log f(x)`.
#[derive(Clone, Debug)]
pub struct BchCoefficients<T> {
    pub order1: CMatrix<T>,
    pub order2: CMatrix<T>,
    pub order3: CMatrix<T>,
}

impl<T: Real> BchCoefficients<T> {
    pub fn as_array(&self) -> [&CMatrix<T>; 3] {
        [&self.order1, &self.order2, &self.order3]
    }
}

/// Weights `w` with `a_j = sum_k w[j][k] y_k` for `y_k = sum_j a_j k^{p_j}`, `k = 1, 2, 3`.
fn stencil_weights<T: Real>(powers: [i32; 3]) -> Result<[[T; 3]; 3]> {
    let vander: Vec<Vec<T>> = (1..=3)
        .map(|k| powers.iter().map(|&p| T::from_count(k).powi(p)).collect())
        .collect();
    let mut w = [[T::zero(); 3]; 3];
    for col in 0..3 {
        let mut e = vec![T::zero(); 3];
        e[col] = T::one();
        let sol = solve_real(vander.clone(), e).ok_or_else(|| Error::SolverFailure("singular stencil".into()))?;
        for (j, v) in sol.into_iter().enumerate() {
            w[j][col] = v;
        }
    }
    Ok(w)
}

/// Extracts the low-order terms of `log f(x)` from a `+-{1,2,3} h` stencil.
pub fn extract_bch<T: Real>(f: &ProductFormula<T>, gens: &GeneratorPair<T>) -> Result<BchCoefficients<T>> {
    match extract_bch_with_step(f, gens, T::lit(DEFAULT_BCH_STEP)) {
        Err(Error::OutOfDomain(_)) => extract_bch_with_step(f, gens, T::lit(DEFAULT_BCH_STEP / 10.0)),
        other => other,
    }
}

/// As [`extract_bch`] with an explicit stencil spacing and no retry.
pub fn extract_bch_with_step<T: Real>(f: &ProductFormula<T>, gens: &GeneratorPair<T>, h: T) -> Result<BchCoefficients<T>> {
    let logs: Vec<(CMatrix<T>, CMatrix<T>)> = (1..=3)
        .map(|k| {
            let x = h * T::from_count(k);
            Ok((
                logm_near_identity(&f.evaluate(gens, x)?)?,
                logm_near_identity(&f.evaluate(gens, -x)?)?,
            ))
        })
        .collect::<Result<_>>()?;
    let half = T::lit(0.5);
    let odd: Vec<CMatrix<T>> = logs.iter().map(|(p, m)| (p - m).scale_real(half)).collect();
    let even: Vec<CMatrix<T>> = logs.iter().map(|(p, m)| (p + m).scale_real(half)).collect();
    let w_odd = stencil_weights::<T>([1, 3, 5])?;
    let w_even = stencil_weights::<T>([2, 4, 6])?;
    let combine = |w: &[T; 3], parts: &[CMatrix<T>], scale: T| {
        let mut acc = CMatrix::zeros(gens.dim());
        for (wk, m) in w.iter().zip(parts) {
            acc = &acc + &m.scale_real(*wk);
        }
        acc.scale_real(scale)
    };
    Ok(BchCoefficients {
        order1: combine(&w_odd[0], &odd, T::one() / h),
        order2: combine(&w_even[0], &even, T::one() / (h * h)),
        order3: combine(&w_odd[1], &odd, T::one() / (h * h * h)),
    })
}
