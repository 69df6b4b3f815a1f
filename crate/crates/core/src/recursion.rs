//! Recursive order-raising schemes.
//!
//! Every builder takes a formula `f_n` of order `n` approximating
//! `exp(x^2 [A, B])` and composes scaled copies of `f_n` and its inverse.
//! Writing `f_n(x) = exp(x^2 [A, B] + x^{n+1} E + ...)`, a scaled copy
//! `f_n(c x)` contributes `c^2` to the commutator and `c^{n+1}` to the error
//! term (with a sign flip for inverses), so each scheme is a small system
//! of power-sum conditions on its scale factors.
//!
//! Adjacent boundary steps are merged by [`ProductFormula::simplify`]; the
//! gate-count recurrences are a consequence, not an assumption.

use std::fmt;

use crate::error::{Error, Result};
use crate::formula::{concat, ProductFormula};
use crate::scalar::Real;
use crate::solver::{solve_sqrt4, Sqrt4Solution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// `f(x/sqrt2) f(-x/sqrt2)`, even to odd order.
    TwoCopy,
    /// Jean-Koseleff three-copy scheme, `+1`.
    JK,
    /// Five-copy scheme, odd to even, `+1`.
    FiveCopy,
    /// Four copies, `+2`.
    Q4,
    /// Five copies, `+2`.
    W5,
    /// JK followed by two-copy: six copies, `+2`.
    V6,
    /// Five-copy followed by two-copy: ten copies, `+2`.
    G10,
    /// Two-copy followed by JK, from an even order: six copies, `+2`.
    SixCopy,
    /// Sum+commutator step for even order.
    SumCommEven,
    /// Sum+commutator step for odd order.
    SumCommOdd,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 10] = [
        SchemeKind::TwoCopy,
        SchemeKind::JK,
        SchemeKind::FiveCopy,
        SchemeKind::Q4,
        SchemeKind::W5,
        SchemeKind::V6,
        SchemeKind::G10,
        SchemeKind::SixCopy,
        SchemeKind::SumCommEven,
        SchemeKind::SumCommOdd,
    ];

    /// Order gained by one application.
    pub fn increment(self) -> u32 {
        match self {
            SchemeKind::TwoCopy | SchemeKind::JK | SchemeKind::FiveCopy => 1,
            SchemeKind::SumCommEven | SchemeKind::SumCommOdd => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::TwoCopy => "two-copy",
            SchemeKind::JK => "jk",
            SchemeKind::FiveCopy => "five-copy",
            SchemeKind::Q4 => "q4",
            SchemeKind::W5 => "w5",
            SchemeKind::V6 => "v6",
            SchemeKind::G10 => "g10",
            SchemeKind::SixCopy => "six-copy",
            SchemeKind::SumCommEven => "sum-comm-even",
            SchemeKind::SumCommOdd => "sum-comm-odd",
        }
    }

    pub fn from_name(name: &str) -> Option<SchemeKind> {
        let key = name.to_ascii_lowercase().replace('_', "-");
        SchemeKind::ALL.into_iter().find(|k| k.name() == key)
    }

    /// Whether the scheme can lift a formula of order `n`.
    pub fn check_order(self, n: u32) -> Result<()> {
        let fail = |reason| {
            Err(Error::Parity {
                scheme: self.name(),
                order: n,
                reason,
            })
        };
        if n == 0 {
            return fail("order must be positive");
        }
        match self {
            SchemeKind::TwoCopy | SchemeKind::SixCopy if n % 2 == 1 => fail("needs an even source order"),
            SchemeKind::FiveCopy | SchemeKind::V6 | SchemeKind::G10 if n.is_multiple_of(2) => fail("needs an odd source order"),
            SchemeKind::Q4 if n < 3 || n.is_multiple_of(2) => fail("needs an odd source order n >= 3"),
            SchemeKind::W5 if n < 2 => fail("needs source order n > 1"),
            SchemeKind::SumCommEven if n % 2 == 1 => fail("needs an even source order"),
            SchemeKind::SumCommOdd if n.is_multiple_of(2) => fail("needs an odd source order"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A scheme bound to the order of the formula it will be applied to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecursionScheme {
    kind: SchemeKind,
    source_order: u32,
}

impl RecursionScheme {
    pub fn new(kind: SchemeKind, source_order: u32) -> Result<Self> {
        kind.check_order(source_order)?;
        Ok(Self { kind, source_order })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn source_order(&self) -> u32 {
        self.source_order
    }

    pub fn target_order(&self) -> u32 {
        self.source_order + self.kind.increment()
    }

    pub fn apply<T: Real>(&self, f: &ProductFormula<T>) -> Result<ProductFormula<T>> {
        let n = self.source_order;
        match self.kind {
            SchemeKind::TwoCopy => two_copy(f, n),
            SchemeKind::JK => jean_koseleff(f, n),
            SchemeKind::FiveCopy => five_copy(f, n),
            SchemeKind::Q4 => build_q(f, n),
            SchemeKind::W5 => build_w(f, n),
            SchemeKind::V6 => build_v(f, n),
            SchemeKind::G10 => build_g(f, n),
            SchemeKind::SixCopy => jean_koseleff(&two_copy(f, n)?, n + 1).map(|g| relabel(g, "V~", n + 2, f)),
            SchemeKind::SumCommEven | SchemeKind::SumCommOdd => sum_comm_step(f, n),
        }
    }
}

/// Applies a chain of schemes, reading each source order off the previous output.
pub fn apply_chain<T: Real>(base: &ProductFormula<T>, kinds: &[SchemeKind]) -> Result<ProductFormula<T>> {
    let mut f = base.clone();
    for &kind in kinds {
        let n = f
            .claimed_order()
            .ok_or_else(|| Error::InvalidInput(format!("'{}' has no claimed order", f.label())))?;
        f = RecursionScheme::new(kind, n)?.apply(&f)?;
    }
    Ok(f)
}

fn check_source<T: Real>(f: &ProductFormula<T>, kind: SchemeKind, n: u32) -> Result<()> {
    if let Some(found) = f.claimed_order() {
        if found != n {
            return Err(Error::OrderMismatch { expected: n, found });
        }
    }
    kind.check_order(n)
}

fn relabel<T: Real>(g: ProductFormula<T>, prefix: &str, order: u32, src: &ProductFormula<T>) -> ProductFormula<T> {
    g.with_label(format!("{prefix}{order}[{}]", src.label()))
        .with_order(Some(order))
}

/// `factor(copy(c1) ...)`: each part is `(scale, inverted)`.
fn compose<T: Real>(f: &ProductFormula<T>, parts: &[(T, bool)]) -> ProductFormula<T> {
    let pieces: Vec<_> = parts
        .iter()
        .map(|&(c, inv)| {
            let g = f.scale_argument(c);
            if inv {
                g.inverse()
            } else {
                g
            }
        })
        .collect();
    concat(&pieces).simplify()
}

fn close<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::epsilon() * T::lit(1e3) * T::one().max(a.abs()).max(b.abs())
}

/// `f(x/sqrt2) f(-x/sqrt2)`: even order `2k` to `2k + 1`.
pub fn two_copy<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::TwoCopy, n)?;
    let h = T::one() / T::lit(2.0).sqrt();
    Ok(relabel(compose(f, &[(h, false), (-h, false)]), "T", n + 1, f))
}

/// Jean-Koseleff `(t, s)` for even `n` or `(u, v)` for odd `n`.
///
/// Even: `f(tx) f(sx) f(tx)` with `2t^2 + s^2 = 1` and `2t^{n+1} + s^{n+1} = 0`.
/// Odd: `f(ux) f(vx)^-1 f(ux)` with `2u^2 - v^2 = 1` and `2u^{n+1} = v^{n+1}`.
pub fn jk_coefficients<T: Real>(n: u32) -> (T, T) {
    let two = T::lit(2.0);
    let e = T::one() / T::from_count(n as usize + 1);
    if n.is_multiple_of(2) {
        let t = (two + two.powf(two * e)).powf(T::lit(-0.5));
        (t, -two.powf(e) * t)
    } else {
        let u = (two - two.powf(two * e)).powf(T::lit(-0.5));
        (u, two.powf(e) * u)
    }
}

pub fn jean_koseleff<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::JK, n)?;
    let (a, b) = jk_coefficients::<T>(n);
    let odd = n % 2 == 1;
    Ok(relabel(compose(f, &[(a, false), (b, odd), (a, false)]), "JK", n + 1, f))
}

/// `(nu, mu, sigma)` of the five-copy scheme for odd `n`.
pub fn five_copy_coefficients<T: Real>(n: u32) -> (T, T, T) {
    let four = T::lit(4.0);
    let p = four.powf(T::lit(2.0) / T::from_count(n as usize + 1));
    let sigma = p / (four * (four - p));
    let nu = (T::lit(0.25) + sigma).sqrt();
    let mu = (four * sigma).sqrt();
    (nu, mu, sigma)
}

/// `f(nu x)^2 f(mu x)^-1 f(nu x)^2`: odd order `n` to `n + 1`.
pub fn five_copy<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::FiveCopy, n)?;
    let (nu, mu, _) = five_copy_coefficients::<T>(n);
    let four = T::lit(4.0);
    let e = n as i32 + 1;
    if !close(four * nu * nu - mu * mu, T::one()) || !close(four * nu.powi(e), mu.powi(e)) {
        return Err(Error::SolverFailure(format!("five-copy coefficients inconsistent at n = {n}")));
    }
    let parts = [(nu, false), (nu, false), (mu, true), (nu, false), (nu, false)];
    Ok(relabel(compose(f, &parts), "F", n + 1, f))
}

/// Four-copy composite together with its sign case.
#[derive(Clone, Debug)]
pub struct QFormula<T> {
    /// `f(a'x) f(b'x)^-1 f(c'x) f(d'x)^-1` with primes denoting division by `s`.
    pub formula: ProductFormula<T>,
    /// Set when `a^2 - b^2 + c^2 - d^2 < 0`, so `formula` approximates `exp(-x^2 [A, B])`.
    pub targets_inverse: bool,
    pub solution: Sqrt4Solution<T>,
}

impl<T: Real> QFormula<T> {
    /// The `exp(+x^2 [A, B])` approximant.
    pub fn canonical(&self) -> ProductFormula<T> {
        if self.targets_inverse {
            self.formula.inverse().with_label(self.formula.label().to_string())
        } else {
            self.formula.clone()
        }
    }
}

pub fn build_q_raw<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<QFormula<T>> {
    check_source(f, SchemeKind::Q4, n)?;
    let sol = solve_sqrt4::<T>(n)?;
    let s = sol.signed_sum.abs().sqrt();
    let parts = [(sol.a / s, false), (sol.b / s, true), (sol.c / s, false), (sol.d / s, true)];
    Ok(QFormula {
        formula: relabel(compose(f, &parts), "Q", n + 2, f),
        targets_inverse: sol.signed_sum < T::zero(),
        solution: sol,
    })
}

/// Four-copy scheme, odd order `n` to `n + 2`, always targeting `exp(+x^2 [A, B])`.
pub fn build_q<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    Ok(build_q_raw(f, n)?.canonical())
}

/// `(s, s', r)` of the five-copy `W` scheme.
pub fn w_coefficients<T: Real>(n: u32) -> Result<(T, T, T)> {
    let two = T::lit(2.0);
    let n1 = T::from_count(n as usize + 1);
    let n2 = T::from_count(n as usize + 2);
    let s = (two / (T::one() + two.powf(T::one() / n2))).powf(T::one() / n1);
    let sp = two.powf(-T::one() / n2) * s;
    let r2 = s * s + two * sp * sp - two;
    if !(r2 > T::zero()) {
        return Err(Error::SolverFailure(format!("W scheme normalisation r^2 = {r2} is not positive at n = {n}")));
    }
    Ok((s, sp, r2.sqrt()))
}

/// `f(-s'x/r) f(x/r)^-1 f(sx/r) f(-x/r)^-1 f(-s'x/r)`: order `n` to `n + 2`.
pub fn build_w<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::W5, n)?;
    let (s, sp, r) = w_coefficients::<T>(n)?;
    let one = T::one();
    let parts = [(-sp / r, false), (one / r, true), (s / r, false), (-one / r, true), (-sp / r, false)];
    Ok(relabel(compose(f, &parts), "W", n + 2, f))
}

/// Jean-Koseleff then two-copy: odd order `n` to `n + 2`.
pub fn build_v<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::V6, n)?;
    let mid = jean_koseleff(f, n)?;
    Ok(relabel(two_copy(&mid, n + 1)?, "V", n + 2, f))
}

/// Five-copy then two-copy: odd order `n` to `n + 2`.
pub fn build_g<T: Real>(f: &ProductFormula<T>, n: u32) -> Result<ProductFormula<T>> {
    check_source(f, SchemeKind::G10, n)?;
    let mid = five_copy(f, n)?;
    Ok(relabel(two_copy(&mid, n + 1)?, "G", n + 2, f))
}

/// The fourth-order six-copy baseline built from `S2` (two-copy, then JK).
pub fn build_six_copy_baseline<T: Real>() -> ProductFormula<T> {
    RecursionScheme::new(SchemeKind::SixCopy, 2)
        .and_then(|s| s.apply(&crate::bases::s2::<T>()))
        .expect("S2 is second order")
}

/// `(a, b)` of the sum+commutator step for order `m`.
pub fn sum_comm_coefficients<T: Real>(m: u32) -> (T, T) {
    if m.is_multiple_of(2) {
        let k = T::lit(2.0).powf(T::one() / T::from_count(m as usize + 1));
        let a = T::one() / (T::lit(2.0) - k);
        (a, k * a)
    } else {
        (T::lit(0.5), T::lit(0.5))
    }
}

/// Suzuki-type step for formulas whose linear part is `x (A + B)`.
///
/// Even `m`: `f(ax) f(bx)^-1 f(ax)` with `2a - b = 1` and `2a^{m+1} = b^{m+1}`.
/// Odd `m`: `f(-x/2)^-1 f(x/2)`.
///
/// With fixed coefficients the composite keeps the linear part `x (A + B)`
/// and cancels the leading error, but it also rescales the `x^2 [A, B]`
/// weight (by `2a^2 - b^2` for even `m`; to zero for odd `m`). The result
/// therefore has order `m + 1` only with respect to the rescaled target.
pub fn sum_comm_step<T: Real>(f: &ProductFormula<T>, m: u32) -> Result<ProductFormula<T>> {
    let kind = if m.is_multiple_of(2) {
        SchemeKind::SumCommEven
    } else {
        SchemeKind::SumCommOdd
    };
    check_source(f, kind, m)?;
    let (a, b) = sum_comm_coefficients::<T>(m);
    let built = if m.is_multiple_of(2) {
        compose(f, &[(a, false), (b, true), (a, false)])
    } else {
        compose(f, &[(-a, true), (b, false)])
    };
    Ok(relabel(built, "SC", m + 1, f))
}
