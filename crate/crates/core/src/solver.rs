//! Root finding for composition coefficients.
//!
//! * [`solve_sqrt4`]: the `(a, b, c, d)` of the four-copy scheme, found by
//!   intersecting two monotone curves in the `(eps1, eps2)` plane.
//! * [`solve_p_of_r`]: six-gate coefficients with `l = m = 1`,
//!   `q = 1/2 - R` and `r = s = 1/6` by Newton iteration.
//! * [`residuals_order4`]: the eight word-sum conditions for a fourth-order
//!   commutator formula.

use crate::bases::{f_r_params, reparam, SixGateParams};
use crate::error::{Error, Result};
use crate::formula::ProductFormula;
use crate::matcore::solve_real;
use crate::scalar::Real;

/// Number of grid points used to check the curves are monotone before bisecting.
pub const MONOTONE_GRID: usize = 1000;

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_MAX_ITER: usize = 100;
const NEWTON_RETRIES: usize = 5;

/// Coefficients of `f(ax) f(bx)^-1 f(cx) f(dx)^-1` with `b = 2a = 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sqrt4Solution<T> {
    pub n: u32,
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    /// `a^2 - b^2 + c^2 - d^2`: the commutator weight of the raw composite.
    pub signed_sum: T,
    pub eps1: T,
    pub eps2: T,
    /// Max of both power-sum residuals divided by `b^(n+1)`.
    pub residual: T,
}

fn power_sums<T: Real>(n: u32, a: T, b: T, c: T, d: T) -> [T; 2] {
    let p = |e: u32| a.powi(e as i32) - b.powi(e as i32) + c.powi(e as i32) - d.powi(e as i32);
    [p(n + 1), p(n + 2)]
}

/// Solves `a^k - b^k + c^k - d^k = 0` for `k = n+1, n+2` with `a = 1`, `b = 2`.
pub fn solve_sqrt4<T: Real>(n: u32) -> Result<Sqrt4Solution<T>> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::Parity {
            scheme: "sqrt4",
            order: n,
            reason: "needs an odd order n >= 3",
        });
    }
    let one = T::one();
    let two = T::lit(2.0);
    let k2 = (n + 1) as i32; // 2k
    let k2p1 = k2 + 1;
    let inv_k2 = one / T::from_count(k2 as usize);
    let inv_k2p1 = one / T::from_count(k2p1 as usize);
    let two_pow_even = two.powi(k2);
    let two_pow_odd = two.powi(k2p1);
    // eps2 as a function of eps1 along each power-sum curve
    let curve_even = |e: T| two - (two_pow_even - one + (one - e).powi(k2)).powf(inv_k2);
    let curve_odd = |e: T| two - (two_pow_odd - one - (one - e).powi(k2p1)).powf(inv_k2p1);

    let slack = T::epsilon() * T::lit(64.0);
    let mut prev = (curve_even(T::zero()), curve_odd(T::zero()));
    for i in 1..=MONOTONE_GRID {
        let e = T::from_count(i) / T::from_count(MONOTONE_GRID + 1);
        let cur = (curve_even(e), curve_odd(e));
        if cur.0 + slack < prev.0 || cur.1 > prev.1 + slack {
            return Err(Error::SolverFailure(format!(
                "sqrt4 curves are not monotone near eps1 = {e} (n = {n})"
            )));
        }
        prev = cur;
    }

    let gap = |e: T| curve_even(e) - curve_odd(e);
    let (mut lo, mut hi) = (T::zero(), one);
    if !(gap(lo) < T::zero() && gap(hi) > T::zero()) {
        return Err(Error::SolverFailure(format!("sqrt4 curves do not cross on (0, 1) for n = {n}")));
    }
    let tol = T::lit(1e-14).max(T::epsilon() * T::lit(4.0));
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if gap(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let eps1 = (lo + hi) * T::lit(0.5);
    let eps2 = curve_even(eps1);
    let (a, b) = (one, two);
    let mut c = two - eps2;
    let mut d = eps1 - one;

    // Newton polish on (c, d); only keep steps that reduce the residual
    let scale = b.powi(k2);
    let resid = |c: T, d: T| {
        let [r1, r2] = power_sums(n, a, b, c, d);
        r1.abs().max(r2.abs()) / scale
    };
    let mut best = resid(c, d);
    for _ in 0..3 {
        let [r1, r2] = power_sums(n, a, b, c, d);
        let e1 = T::from_count(k2 as usize);
        let e2 = T::from_count(k2p1 as usize);
        let jac = vec![
            vec![e1 * c.powi(k2 - 1), -e1 * d.powi(k2 - 1)],
            vec![e2 * c.powi(k2), -e2 * d.powi(k2)],
        ];
        let Some(delta) = solve_real(jac, vec![-r1, -r2]) else { break };
        let (cn, dn) = (c + delta[0], d + delta[1]);
        let rn = resid(cn, dn);
        if rn < best {
            c = cn;
            d = dn;
            best = rn;
        } else {
            break;
        }
    }

    let signed_sum = a * a - b * b + c * c - d * d;
    if (c - two).abs() < T::lit(1e-9) && (d - one).abs() < T::lit(1e-9) {
        return Err(Error::SolverFailure("sqrt4 collapsed onto the trivial solution (2, 1)".into()));
    }
    if signed_sum.abs() <= T::lit(1e-6) {
        return Err(Error::SolverFailure(format!("sqrt4 signed sum {signed_sum} is degenerate")));
    }
    Ok(Sqrt4Solution {
        n,
        a,
        b,
        c,
        d,
        signed_sum,
        eps1: one + d,
        eps2: two - c,
        residual: best,
    })
}

/// Outcome of [`solve_p_of_r`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PofRSolution<T> {
    pub params: SixGateParams<T>,
    pub converged: bool,
    pub max_residual: T,
    pub iterations: usize,
}

/// `(l - 1, m - 1, q + R - 1/2, r - 1/6, s - 1/6)`.
pub fn sum_comm_residuals<T: Real>(params: &SixGateParams<T>, r_value: T) -> [T; 5] {
    let rp = reparam(params);
    let sixth = T::one() / T::lit(6.0);
    [
        rp.l - T::one(),
        rp.m - T::one(),
        rp.q + r_value - T::lit(0.5),
        rp.r - sixth,
        rp.s - sixth,
    ]
}

fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Jacobian of [`sum_comm_residuals`] with respect to `p1..p5`.
fn jacobian<T: Real>(p: &[T; 6]) -> Vec<Vec<T>> {
    let [p1, p2, p3, p4, p5, p6] = *p;
    let (o, z) = (T::one(), T::zero());
    vec![
        vec![o, z, o, z, o],
        vec![z, o, z, o, z],
        vec![z, p3 + p5, p2, p5, p2 + p4],
        vec![
            p2 * p3 + p2 * p5 + p4 * p5,
            p1 * p3 + p1 * p5,
            p1 * p2 + p4 * p5,
            p1 * p5 + p3 * p5,
            p1 * p2 + p1 * p4 + p3 * p4,
        ],
        vec![
            z,
            p3 * p4 + p3 * p6 + p5 * p6,
            p2 * p4 + p2 * p6,
            p2 * p3 + p5 * p6,
            p2 * p6 + p4 * p6,
        ],
    ]
}

/// Exact six-gate coefficients for the sum+commutator target at a given `R`.
///
/// Newton iteration over `p1..p5` with `p6` held at its seed value; the
/// default seed is the closed-form large-`R` family. A singular Jacobian
/// triggers a small deterministic perturbation of the iterate (up to five
/// times) before giving up.
pub fn solve_p_of_r<T: Real>(r_value: T, seed: Option<SixGateParams<T>>) -> Result<PofRSolution<T>> {
    let seed = match seed {
        Some(s) => s,
        None => f_r_params(r_value)?,
    };
    if !seed.is_finite() || !r_value.is_finite() {
        return Err(Error::InvalidInput("solve_p_of_r needs a finite seed and R".into()));
    }
    let tol = T::lit(NEWTON_TOL);
    let mut p = seed.p;
    let mut res = max_abs(&sum_comm_residuals(&SixGateParams::new(p), r_value));
    let mut best = (p, res);
    let mut retries = 0;
    let mut iter = 0;
    while iter < NEWTON_MAX_ITER && res > tol {
        iter += 1;
        let f = sum_comm_residuals(&SixGateParams::new(p), r_value);
        let Some(delta) = solve_real(jacobian(&p), f.iter().map(|&v| -v).collect()) else {
            retries += 1;
            if retries > NEWTON_RETRIES {
                return Err(Error::SolverFailure(format!(
                    "singular Jacobian in solve_p_of_r at R = {r_value} after {NEWTON_RETRIES} perturbations"
                )));
            }
            for (i, v) in p.iter_mut().take(5).enumerate() {
                *v = *v + T::lit(1e-3) * T::from_count(i + retries);
            }
            res = max_abs(&sum_comm_residuals(&SixGateParams::new(p), r_value));
            continue;
        };
        // backtracking keeps the iteration from wandering off the solution family
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = p;
            for i in 0..5 {
                trial[i] = p[i] + step * delta[i];
            }
            let tres = max_abs(&sum_comm_residuals(&SixGateParams::new(trial), r_value));
            if tres.is_finite() && tres < res {
                p = trial;
                res = tres;
                accepted = true;
                break;
            }
            step = step * T::lit(0.5);
        }
        if !accepted {
            break;
        }
        if res < best.1 {
            best = (p, res);
        }
    }
    Ok(PofRSolution {
        params: SixGateParams::new(best.0),
        converged: best.1 <= tol,
        max_residual: best.1,
        iterations: iter,
    })
}

/// The eight fourth-order conditions
/// `(A, B, BA + 1, ABA, BAB, AABA, BBAB, ABAB - BABA)` evaluated as word sums.
pub fn residuals_order4<T: Real>(f: &ProductFormula<T>) -> Result<[T; 8]> {
    let w = f.word_sums()?;
    Ok([
        w.a,
        w.b,
        w.ba + T::one(),
        w.aba,
        w.bab,
        w.aaba,
        w.bbab,
        w.abab_minus_baba(),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::s3;

    #[test]
    fn sqrt4_n3() {
        let s = solve_sqrt4::<f64>(3).unwrap();
        assert_eq!((s.a, s.b), (1.0, 2.0));
        assert!((s.c - 1.982590733).abs() < 5e-9);
        assert!((s.d + 0.8190978288).abs() < 5e-9);
        assert!((s.signed_sum - 0.2597447625).abs() < 5e-9);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn sqrt4_n11() {
        let s = solve_sqrt4::<f64>(11).unwrap();
        assert!((s.c - 1.999974677).abs() < 5e-9);
        assert!((s.d + 0.9220693131).abs() < 5e-9);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn sqrt4_rejects_even_or_small() {
        assert!(matches!(solve_sqrt4::<f64>(4), Err(Error::Parity { .. })));
        assert!(matches!(solve_sqrt4::<f64>(1), Err(Error::Parity { .. })));
    }

    #[test]
    fn p_of_r_at_ten() {
        let sol = solve_p_of_r(10.0f64, None).unwrap();
        assert!(sol.converged);
        let rp = reparam(&sol.params);
        assert!((rp.r - 1.0 / 6.0).abs() <= 1e-10);
        assert!((rp.s - 1.0 / 6.0).abs() <= 1e-10);
        assert!(max_abs(&sum_comm_residuals(&sol.params, 10.0)) <= 1e-10);
        // p6 is the gauge and must stay at the seed value
        assert_eq!(sol.params.p[5], f_r_params(10.0f64).unwrap().p[5]);
        // the seed itself is nowhere near r = 1/6
        let seed = reparam(&f_r_params(10.0f64).unwrap());
        assert!((seed.r - 1.0 / 6.0).abs() > 1.0);
    }

    #[test]
    fn p_of_r_range() {
        for r in [0.0, 1.0, 4.0, 50.0, 100.0f64] {
            let sol = solve_p_of_r(r, None).unwrap();
            assert!(sol.converged, "R = {r}: residual {}", sol.max_residual);
        }
    }

    #[test]
    fn residuals_examples() {
        let r = residuals_order4(&s3::<f64>()).unwrap();
        assert!(r[..5].iter().all(|v| v.abs() <= 1e-12));
        let e = residuals_order4(&ProductFormula::<f64>::identity()).unwrap();
        assert_eq!(e, [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
