//! Periodic fermion chain with a synthesised next-nearest-neighbour hopping.
//!
//! `H0` holds the even bonds `(0,1), (2,3), ...` and `H1` the odd bonds
//! `(1,2), ..., (L-1,0)`. Each is a sum of commuting bond terms, so its
//! exponential is a layer of `L/2` two-site gates. The target
//! `H_eff = t1 (H0 + H1) + i t2 [H0, H1]` contains NNN hoppings `+-i t2` that
//! are produced by the commutator part of `f_R`.

use crate::bases::f_r_signed;
use crate::certify::{finish_scan, ScanResult, ScanRow, TargetKind, Window};
use crate::error::{Error, Result};
use crate::formula::GeneratorPair;
use crate::matcore::{commutator, expm, spectral_norm, CMatrix};
use crate::scalar::{im, re, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainConfig<T> {
    /// Number of sites; even and at least 4.
    pub l: usize,
    /// Nearest-neighbour amplitude.
    pub t1: T,
    /// Next-nearest-neighbour amplitude.
    pub t2: T,
    pub total_time: T,
    /// Step count used by single-run helpers.
    pub steps: usize,
}

impl<T: Real> ChainConfig<T> {
    pub fn new(l: usize, t1: T, t2: T, total_time: T, steps: usize) -> Result<Self> {
        let cfg = Self { l, t1, t2, total_time, steps };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l < 4 || self.l % 2 == 1 {
            return Err(Error::InvalidConfig(format!("chain length must be even and >= 4, got {}", self.l)));
        }
        if !self.t1.is_finite() || !self.t2.is_finite() || !self.total_time.is_finite() {
            return Err(Error::InvalidConfig("chain parameters must be finite".into()));
        }
        if self.t1 == T::zero() || self.total_time == T::zero() {
            return Err(Error::InvalidConfig("t1 and T must be non-zero".into()));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("step count must be at least 1".into()));
        }
        Ok(())
    }

    /// Elementary exponentials for `n` steps: `6n` layers of `L/2` bond gates.
    pub fn gates(&self, n: usize) -> usize {
        3 * n * self.l
    }
}

/// `(H0, H1)` on the single-particle space.
pub fn chain_hoppings<T: Real>(cfg: &ChainConfig<T>) -> Result<(CMatrix<T>, CMatrix<T>)> {
    cfg.validate()?;
    let l = cfg.l;
    let mut h0 = CMatrix::zeros(l);
    let mut h1 = CMatrix::zeros(l);
    for j in (0..l).step_by(2) {
        h0[(j, j + 1)] = re(T::one());
        h0[(j + 1, j)] = re(T::one());
    }
    for j in (1..l).step_by(2) {
        let k = (j + 1) % l;
        h1[(j, k)] = re(T::one());
        h1[(k, j)] = re(T::one());
    }
    Ok((h0, h1))
}

/// `t1 (H0 + H1) + i t2 [H0, H1]`.
pub fn chain_heff<T: Real>(cfg: &ChainConfig<T>) -> Result<CMatrix<T>> {
    let (h0, h1) = chain_hoppings(cfg)?;
    let nn = (&h0 + &h1).scale_real(cfg.t1);
    let nnn = commutator(&h0, &h1)?.scale(im(cfg.t2));
    Ok(&nn + &nnn)
}

/// `|| f_R(alpha/n)^n - exp(-i H_eff T) ||_2` with `A = i H0`, `B = i H1`,
/// `alpha = -t1 T`, `beta = -t2 T`, `R = beta n / alpha^2`.
pub fn chain_error<T: Real>(cfg: &ChainConfig<T>, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidConfig("step count must be at least 1".into()));
    }
    let (h0, h1) = chain_hoppings(cfg)?;
    let gens = GeneratorPair::new(h0.scale(im(T::one())), h1.scale(im(T::one())))?;
    let alpha = -cfg.t1 * cfg.total_time;
    let beta = -cfg.t2 * cfg.total_time;
    let nf = T::from_count(n);
    let r_value = beta * nf / (alpha * alpha);
    let f = f_r_signed(r_value)?;
    let step = f.evaluate(&gens, alpha / nf)?;
    let target = expm(&chain_heff(cfg)?.scale(im(-cfg.total_time)))?;
    Ok(spectral_norm(&(&step.powi(n) - &target)))
}

/// Error versus step count with a log-log slope over all rows.
pub fn chain_simulate<T: Real>(cfg: &ChainConfig<T>, ns: &[usize]) -> Result<ScanResult<T>> {
    if ns.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let rows = ns
        .iter()
        .map(|&n| {
            Ok(ScanRow {
                x: T::from_count(n),
                error: chain_error(cfg, n)?,
                gates: Some(cfg.gates(n)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(finish_scan(rows, Window::All, TargetKind::Custom))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(t2: f64) -> ChainConfig<f64> {
        ChainConfig::new(6, 1.0, t2, 1.0, 64).unwrap()
    }

    #[test]
    fn rejects_odd_length() {
        assert!(ChainConfig::new(5, 1.0, 0.5, 1.0, 8).is_err());
        assert!(ChainConfig::new(2, 1.0, 0.5, 1.0, 8).is_err());
    }

    #[test]
    fn h0_pattern_for_four_sites() {
        let c = ChainConfig::new(4, 1.0, 0.5, 1.0, 8).unwrap();
        let (h0, _) = chain_hoppings(&c).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = matches!((i, j), (0, 1) | (1, 0) | (2, 3) | (3, 2));
                assert_eq!(h0[(i, j)].re, if want { 1.0 } else { 0.0 });
            }
        }
        // each bond block squares to the identity on its two sites
        let sq = &h0 * &h0;
        assert!(spectral_norm(&(&sq - &CMatrix::identity(4))) < 1e-15);
    }

    #[test]
    fn nnn_pattern() {
        let (h0, h1) = chain_hoppings(&cfg(0.5)).unwrap();
        let k = commutator(&h0, &h1).unwrap().scale(im(1.0));
        assert_eq!(k[(0, 2)], im(1.0));
        assert_eq!(k[(1, 3)], im(-1.0));
        for i in 0..6usize {
            for j in 0..6usize {
                let d = (i as i64 - j as i64).rem_euclid(6);
                if d != 2 && d != 4 {
                    assert!(k[(i, j)].norm() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn heff_properties() {
        assert!(chain_heff(&cfg(0.5)).unwrap().is_hermitian(1e-14));
        let (h0, h1) = chain_hoppings(&cfg(0.0)).unwrap();
        assert_eq!(chain_heff(&cfg(0.0)).unwrap(), &h0 + &h1);
    }

    #[test]
    fn error_decreases_with_n() {
        let c = cfg(0.5);
        assert!(chain_error(&c, 128).unwrap() < chain_error(&c, 64).unwrap());
        assert_eq!(c.gates(10), 180);
    }
}
