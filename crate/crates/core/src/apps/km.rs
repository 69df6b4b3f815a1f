//! Kapit-Mueller style lattice: nearest-neighbour hoppings in the Landau
//! gauge whose commutators generate the flux-carrying diagonal hoppings.
//!
//! Site `(m, n)` is mode `m + Lx n`. Horizontal bonds `(m,n) -> (m+1,n)` carry
//! `-J e^{-i n phi}`; vertical bonds are real `-J`. Bonds are coloured by the
//! parity of `m + n`:
//!
//! | matrix | bonds |
//! |---|---|
//! | `H1` | horizontal, `m + n` even |
//! | `H2` | horizontal, `m + n` odd |
//! | `H3` | vertical, `m + n` odd |
//! | `H4` | vertical, `m + n` even |
//!
//! On a torus the pattern closes only when `Ly phi = 0 (mod 2 pi)` and both
//! extents are even; otherwise the lattice falls back to open boundaries.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::bases::{f_r_params, prepend_c};
use crate::certify::{finish_scan, ScanResult, ScanRow, TargetKind, Window};
use crate::error::{Error, Result};
use crate::formula::GeneratorPair;
use crate::matcore::{commutator, expm, spectral_norm, CMatrix};
use crate::scalar::{c, im, Real, C};

/// Gates per step: `e^{xC}` followed by the six-gate `f_R`.
pub const GATES_PER_STEP: usize = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Periodic when flux-consistent, open otherwise.
    #[default]
    Auto,
    Periodic,
    Open,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KmConfig<T> {
    pub lx: usize,
    pub ly: usize,
    pub j: T,
    pub phi: T,
    pub total_time: T,
    pub steps: usize,
    pub boundary: Boundary,
}

impl<T: Real> KmConfig<T> {
    pub fn new(lx: usize, ly: usize, j: T, phi: T, total_time: T, steps: usize) -> Result<Self> {
        let cfg = Self {
            lx,
            ly,
            j,
            phi,
            total_time,
            steps,
            boundary: Boundary::Auto,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lx < 3 || self.ly < 3 {
            return Err(Error::InvalidConfig(format!(
                "lattice extents must be at least 3, got {}x{}",
                self.lx, self.ly
            )));
        }
        if !self.j.is_finite() || !self.phi.is_finite() || !self.total_time.is_finite() {
            return Err(Error::InvalidConfig("lattice parameters must be finite".into()));
        }
        if self.j == T::zero() {
            return Err(Error::InvalidConfig("hopping J must be non-zero".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("step count must be at least 1".into()));
        }
        if self.boundary == Boundary::Periodic && !self.flux_consistent() {
            return Err(Error::InvalidConfig(format!(
                "a periodic {}x{} lattice needs even extents and Ly*phi = 0 mod 2pi (phi = {})",
                self.lx, self.ly, self.phi
            )));
        }
        Ok(())
    }

    /// Whether the torus closes: even extents and `Ly phi` a multiple of `2 pi`.
    pub fn flux_consistent(&self) -> bool {
        let turns = T::from_count(self.ly) * self.phi / T::lit(TAU);
        let off = (turns - turns.round()).abs();
        self.lx.is_multiple_of(2) && self.ly.is_multiple_of(2) && off < T::lit(1e-12)
    }

    pub fn periodic(&self) -> bool {
        match self.boundary {
            Boundary::Periodic => true,
            Boundary::Open => false,
            Boundary::Auto => self.flux_consistent(),
        }
    }

    pub fn sites(&self) -> usize {
        self.lx * self.ly
    }

    fn idx(&self, m: usize, n: usize) -> usize {
        (m % self.lx) + self.lx * (n % self.ly)
    }

    /// `J' = exp(phi/4 - pi/2) / (2 J sin(phi/2))`.
    pub fn j_prime(&self) -> Result<T> {
        let s = (self.phi * T::lit(0.5)).sin();
        if s.abs() < T::lit(1e-12) {
            return Err(Error::InvalidConfig(format!(
                "phi = {} is a multiple of 2pi, so J' is singular",
                self.phi
            )));
        }
        Ok((self.phi / T::lit(4.0) - T::lit(FRAC_PI_2)).exp() / (T::lit(2.0) * self.j * s))
    }

    /// Column ranges of bond origins `(m, n)` that have a right / upper partner.
    fn origins(&self) -> (usize, usize) {
        if self.periodic() {
            (self.lx, self.ly)
        } else {
            (self.lx - 1, self.ly - 1)
        }
    }
}

/// Adds a hopping `amp a_to^dag a_from` and its conjugate.
fn hop<T: Real>(h: &mut CMatrix<T>, to: usize, from: usize, amp: C<T>) {
    h[(to, from)] = h[(to, from)] + amp;
    h[(from, to)] = h[(from, to)] + amp.conj();
}

fn phase<T: Real>(angle: T) -> C<T> {
    c(angle.cos(), angle.sin())
}

/// `[H1, H2, H3, H4]` on the `Lx Ly` single-particle space.
pub fn km_hoppings<T: Real>(cfg: &KmConfig<T>) -> Result<[CMatrix<T>; 4]> {
    cfg.validate()?;
    let dim = cfg.sites();
    let mut hs = [CMatrix::zeros(dim), CMatrix::zeros(dim), CMatrix::zeros(dim), CMatrix::zeros(dim)];
    let periodic = cfg.periodic();
    let minus_j = -cfg.j;
    for n in 0..cfg.ly {
        for m in 0..cfg.lx {
            let even = (m + n) % 2 == 0;
            if periodic || m + 1 < cfg.lx {
                let amp = phase(-T::from_count(n) * cfg.phi) * minus_j;
                let h = if even { &mut hs[0] } else { &mut hs[1] };
                hop(h, cfg.idx(m + 1, n), cfg.idx(m, n), amp);
            }
            if periodic || n + 1 < cfg.ly {
                let h = if even { &mut hs[3] } else { &mut hs[2] };
                hop(h, cfg.idx(m, n + 1), cfg.idx(m, n), c(minus_j, T::zero()));
            }
        }
    }
    Ok(hs)
}

/// Spectral-norm deviations of the four commutator identities and the combined form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KmCheck<T> {
    /// `-i[H1,H3]`, `-i[H1,H4]`, `-i[H2,H3]`, `-i[H2,H4]` against their diagonal-hopping forms.
    pub identities: [T; 4],
    /// The signed sum of the four commutators against the flux-carrying NNN hopping.
    pub expanded: T,
    /// `-i[H1 - H2, H3 - H4]` against the same NNN hopping.
    pub combined: T,
}

impl<T: Real> KmCheck<T> {
    pub fn max(&self) -> T {
        self.identities
            .iter()
            .copied()
            .chain([self.expanded, self.combined])
            .fold(T::zero(), T::max)
    }
}

/// Builds both sides of each identity and reports how far apart they are.
///
/// With `d = (m+1, n+1) <- (m, n)` and `e = (m+1, n) <- (m, n+1)` the diagonal
/// bonds, and `w_n = J^2 i e^{-i n phi}`:
///
/// ```text
/// -i[H1,H3] : d with  w_n (m+n even),     -w_{n+1} (m+n odd)
/// -i[H1,H4] : e with -w_n (m+n even),      w_{n+1} (m+n odd)
/// -i[H2,H3] : e with  w_{n+1} (m+n even), -w_n     (m+n odd)
/// -i[H2,H4] : d with -w_{n+1} (m+n even),  w_n     (m+n odd)
/// ```
///
/// and the combination `-i[H1 - H2, H3 - H4]` is
/// `-2 J^2 sin(phi/2) e^{-i (n + 1/2) phi}` on every diagonal bond.
pub fn km_commutator_check<T: Real>(cfg: &KmConfig<T>) -> Result<KmCheck<T>> {
    let [h1, h2, h3, h4] = km_hoppings(cfg)?;
    let dim = cfg.sites();
    let (mr, nr) = cfg.origins();
    let j2 = cfg.j * cfg.j;
    let w = |n: usize| im(j2) * phase(-T::from_count(n) * cfg.phi);
    let mut r13 = CMatrix::zeros(dim);
    let mut r14 = CMatrix::zeros(dim);
    let mut r23 = CMatrix::zeros(dim);
    let mut r24 = CMatrix::zeros(dim);
    let mut nnn = CMatrix::zeros(dim);
    let half = T::lit(0.5);
    let comb_amp = -T::lit(2.0) * j2 * (cfg.phi * half).sin();
    for n in 0..nr {
        for m in 0..mr {
            let d = (cfg.idx(m + 1, n + 1), cfg.idx(m, n));
            let e = (cfg.idx(m + 1, n), cfg.idx(m, n + 1));
            let even = (m + n) % 2 == 0;
            let (wn, wn1) = (w(n), w(n + 1));
            if even {
                hop(&mut r13, d.0, d.1, wn);
                hop(&mut r14, e.0, e.1, -wn);
                hop(&mut r23, e.0, e.1, wn1);
                hop(&mut r24, d.0, d.1, -wn1);
            } else {
                hop(&mut r13, d.0, d.1, -wn1);
                hop(&mut r14, e.0, e.1, wn1);
                hop(&mut r23, e.0, e.1, -wn);
                hop(&mut r24, d.0, d.1, wn);
            }
            let amp = phase(-(T::from_count(n) + half) * cfg.phi) * comb_amp;
            hop(&mut nnn, d.0, d.1, amp);
            hop(&mut nnn, e.0, e.1, amp);
        }
    }
    let mi = im(-T::one());
    let lhs = |a: &CMatrix<T>, b: &CMatrix<T>| commutator(a, b).map(|m| m.scale(mi));
    let (c13, c14, c23, c24) = (lhs(&h1, &h3)?, lhs(&h1, &h4)?, lhs(&h2, &h3)?, lhs(&h2, &h4)?);
    let dev = |a: &CMatrix<T>, b: &CMatrix<T>| spectral_norm(&(a - b));
    let expanded = &(&(&c13 + &c24) - &c14) - &c23;
    let combined = lhs(&(&h1 - &h2), &(&h3 - &h4))?;
    Ok(KmCheck {
        identities: [dev(&c13, &r13), dev(&c14, &r14), dev(&c23, &r23), dev(&c24, &r24)],
        expanded: dev(&expanded, &nnn),
        combined: dev(&combined, &nnn),
    })
}

/// `(A, B, C) = (i(H1 - H2), i(H3 - H4), i(2 H2 + 2 H4))`.
pub fn km_generators<T: Real>(cfg: &KmConfig<T>) -> Result<GeneratorPair<T>> {
    let [h1, h2, h3, h4] = km_hoppings(cfg)?;
    let i1 = im(T::one());
    let a = (&h1 - &h2).scale(i1);
    let b = (&h3 - &h4).scale(i1);
    let cm = (&h2 + &h4).scale(im(T::lit(2.0)));
    GeneratorPair::new(a, b)?.with_c(cm)
}

/// `alpha (A + B + C) + beta [A, B]` with `alpha = T`, `beta = J' T`.
pub fn km_target_generator<T: Real>(cfg: &KmConfig<T>) -> Result<CMatrix<T>> {
    let gens = km_generators(cfg)?;
    let alpha = cfg.total_time;
    let beta = cfg.j_prime()? * cfg.total_time;
    let sum = &(gens.a() + gens.b()) + gens.c().expect("C is set");
    Ok(&sum.scale_real(alpha) + &gens.commutator().scale_real(beta))
}

/// `|| (e^{xC} f_R(x))^n - exp(alpha (A+B+C) + beta [A,B]) ||_2`, `x = alpha/n`, `R = beta n / alpha^2`.
pub fn km_error<T: Real>(cfg: &KmConfig<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidConfig("step count must be at least 1".into()));
    }
    let gens = km_generators(cfg)?;
    let alpha = cfg.total_time;
    if alpha == T::zero() {
        return Err(Error::InvalidConfig("total time must be non-zero".into()));
    }
    let beta = cfg.j_prime()? * alpha;
    let nf = T::from_count(n);
    let r_value = beta * nf / (alpha * alpha);
    let sum_comm = if r_value >= T::zero() {
        f_r_params(r_value)?.to_formula("fR", Some(3))
    } else {
        f_r_params(-r_value)?.to_formula("fR", Some(3)).swap_ab()
    };
    let f = prepend_c(&sum_comm)?;
    let step = f.evaluate(&gens, alpha / nf)?;
    let target = expm(&km_target_generator(cfg)?)?;
    Ok(spectral_norm(&(&step.powi(n) - &target)))
}

pub fn km_simulate<T: Real>(cfg: &KmConfig<T>, ns: &[usize]) -> Result<ScanResult<T>> {
    if ns.is_empty() {
        return Err(Error::EmptyGrid);
    }
    cfg.j_prime()?;
    let rows = ns
        .iter()
        .map(|&n| {
            Ok(ScanRow {
                x: T::from_count(n),
                error: km_error(cfg, n)?,
                gates: Some(GATES_PER_STEP * n),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_scan(rows, Window::All, TargetKind::Custom))
}
