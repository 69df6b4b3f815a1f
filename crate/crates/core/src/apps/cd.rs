//! Digital counterdiabatic driving of a two-qubit Hamiltonian.
//!
//! `H(lambda) = H_A(lambda) + H_B` with
//! `H_A = h_z (lambda - 1)(Z1 + Z2)` and `H_B = J (X1 X2 + Z1 Z2)`, swept by
//! `lambda(t) = sin^2((pi/2) sin^2(pi t / 2 tau))`. The first-order
//! counterdiabatic term is proportional to `[-i H_A, -i H_B]`, so one step of
//! the CD protocol is `f_R(dt)` with `A = -i H_A(t_k)`, `B = -i H_B` and
//! `R = beta(t_k) / dt`. The plain protocol spends the same six exponentials
//! on `(e^{-i H_A dt/3} e^{-i H_B dt/3})^3`.

use std::f64::consts::FRAC_PI_2;

use crate::bases::f_r_params;
use crate::error::{Error, Result};
use crate::formula::{GeneratorPair, ProductFormula};
use crate::matcore::{eigh, inner, pauli, vec_norm, CMatrix};
use crate::scalar::{im, Real, C};
use crate::solver::solve_p_of_r;

/// Ground-state gaps below this are reported as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-10;
/// Elementary exponentials per step, for either protocol.
pub const GATES_PER_STEP: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Protocol {
    Trotter,
    Cd,
}

/// Where the CD step's six coefficients come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CoefficientSource {
    /// The closed-form large-`R` family (`R = beta/dt` is large for small `dt`).
    #[default]
    ClosedForm,
    /// Newton-solved exact coefficients at every step.
    Exact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdConfig<T> {
    pub j: T,
    pub h_z: T,
    pub tau: T,
    pub steps: usize,
    pub protocol: Protocol,
    pub coefficients: CoefficientSource,
}

impl<T: Real> CdConfig<T> {
    pub fn new(j: T, h_z: T, tau: T, steps: usize, protocol: Protocol) -> Result<Self> {
        let cfg = Self {
            j,
            h_z,
            tau,
            steps,
            protocol,
            coefficients: CoefficientSource::ClosedForm,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > T::zero()) || !self.tau.is_finite() {
            return Err(Error::InvalidConfig(format!("tau must be positive, got {}", self.tau)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidConfig("step count must be at least 1".into()));
        }
        if !self.j.is_finite() || !self.h_z.is_finite() {
            return Err(Error::InvalidConfig("couplings must be finite".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> T {
        self.tau / T::from_count(self.steps)
    }

    pub fn with_protocol(mut self, protocol: Protocol) -> Self {
        self.protocol = protocol;
        self
    }
}

fn theta<T: Real>(t: T, tau: T) -> T {
    T::PI() * t / (T::lit(2.0) * tau)
}

/// `lambda(t) = sin^2((pi/2) sin^2(pi t / 2 tau))`.
pub fn schedule<T: Real>(t: T, tau: T) -> T {
    let u = T::lit(FRAC_PI_2) * theta(t, tau).sin().powi(2);
    u.sin().powi(2)
}

/// `d lambda / dt`, by the chain rule.
pub fn schedule_rate<T: Real>(t: T, tau: T) -> T {
    let th = theta(t, tau);
    let half_pi = T::lit(FRAC_PI_2);
    let u = half_pi * th.sin().powi(2);
    let two = T::lit(2.0);
    (two * u).sin() * half_pi * (two * th).sin() * (T::PI() / (two * tau))
}

/// `(H_A(lambda), H_B)` as 4x4 matrices, qubit 1 being the left tensor factor.
pub fn cd_hamiltonians<T: Real>(cfg: &CdConfig<T>, lambda: T) -> (CMatrix<T>, CMatrix<T>) {
    let (x, z, id) = (pauli::x::<T>(), pauli::z::<T>(), pauli::identity::<T>());
    let zsum = &z.kron(&id) + &id.kron(&z);
    let h_a = zsum.scale_real(cfg.h_z * (lambda - T::one()));
    let h_b = (&x.kron(&x) + &z.kron(&z)).scale_real(cfg.j);
    (h_a, h_b)
}

/// Weight of the commutator in the CD step, `lambda' / (4 (1 - lambda) (J^2 + 4 (lambda - 1)^2 h_z^2))`.
pub fn cd_beta<T: Real>(cfg: &CdConfig<T>, t: T) -> Result<T> {
    if !(t >= T::zero() && t < cfg.tau) {
        return Err(Error::OutOfDomain(format!(
            "beta(t) is defined on [0, tau), got t = {t}"
        )));
    }
    let lam = schedule(t, cfg.tau);
    let one_minus = T::one() - lam;
    let denom = T::lit(4.0)
        * one_minus
        * (cfg.j * cfg.j + T::lit(4.0) * one_minus * one_minus * cfg.h_z * cfg.h_z);
    if !(denom.abs() > T::zero()) {
        return Err(Error::OutOfDomain(format!("beta(t) is singular at t = {t}")));
    }
    Ok(schedule_rate(t, cfg.tau) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdRow<T> {
    pub t: T,
    pub fidelity: T,
    /// `beta(t)`; `None` at `t = tau` where it is not defined.
    pub beta: Option<T>,
    pub degenerate: bool,
    /// Elementary exponentials applied so far.
    pub gates: usize,
}

fn ground_state<T: Real>(cfg: &CdConfig<T>, lambda: T) -> Result<(Vec<C<T>>, bool)> {
    let (h_a, h_b) = cd_hamiltonians(cfg, lambda);
    let e = eigh(&(&h_a + &h_b))?;
    let degenerate = e.values[1] - e.values[0] < T::lit(DEGENERATE_GAP);
    Ok((e.vector(0), degenerate))
}

/// One step's formula for the configured protocol.
pub fn step_formula<T: Real>(cfg: &CdConfig<T>, r_value: T) -> Result<ProductFormula<T>> {
    let third = T::one() / T::lit(3.0);
    match cfg.protocol {
        Protocol::Trotter => ProductFormula::alternating("trotter", Some(1), &[third; 6]),
        Protocol::Cd => {
            let params = match cfg.coefficients {
                CoefficientSource::ClosedForm => f_r_params(r_value)?,
                CoefficientSource::Exact => {
                    let sol = solve_p_of_r(r_value, None)?;
                    if !sol.converged {
                        return Err(Error::SolverFailure(format!(
                            "exact CD coefficients did not converge at R = {r_value}"
                        )));
                    }
                    sol.params
                }
            };
            Ok(params.to_formula("cd", Some(3)))
        }
    }
}

/// Evolves the initial ground state and records the ground-state fidelity at every `t_k`.
pub fn cd_run<T: Real>(cfg: &CdConfig<T>) -> Result<Vec<CdRow<T>>> {
    cfg.validate()?;
    let dt = cfg.dt();
    let (mut psi, degenerate) = ground_state(cfg, schedule(T::zero(), cfg.tau))?;
    let mut rows = Vec::with_capacity(cfg.steps + 1);
    rows.push(CdRow {
        t: T::zero(),
        fidelity: T::one(),
        beta: Some(cd_beta(cfg, T::zero())?),
        degenerate,
        gates: 0,
    });
    let mut gates = 0;
    let minus_i = im(-T::one());
    for k in 0..cfg.steps {
        let t = dt * T::from_count(k);
        let (h_a, h_b) = cd_hamiltonians(cfg, schedule(t, cfg.tau));
        let gens = GeneratorPair::new(h_a.scale(minus_i), h_b.scale(minus_i))?;
        let beta = cd_beta(cfg, t)?;
        let f = step_formula(cfg, beta / dt)?;
        gates += f.len();
        psi = f.evaluate(&gens, dt)?.mul_vec(&psi);

        let t_next = if k + 1 == cfg.steps { cfg.tau } else { dt * T::from_count(k + 1) };
        let (gs, degenerate) = ground_state(cfg, schedule(t_next, cfg.tau))?;
        let overlap = inner(&gs, &psi).norm_sqr();
        rows.push(CdRow {
            t: t_next,
            fidelity: overlap / vec_norm(&psi).powi(2),
            beta: cd_beta(cfg, t_next).ok(),
            degenerate,
            gates,
        });
    }
    Ok(rows)
}

/// Both protocols side by side: `(t, F_trotter, F_cd, beta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CdComparisonRow<T> {
    pub t: T,
    pub fidelity_trotter: T,
    pub fidelity_cd: T,
    pub beta: Option<T>,
}

pub fn cd_compare<T: Real>(cfg: &CdConfig<T>) -> Result<Vec<CdComparisonRow<T>>> {
    let trotter = cd_run(&cfg.with_protocol(Protocol::Trotter))?;
    let cd = cd_run(&cfg.with_protocol(Protocol::Cd))?;
    Ok(trotter
        .iter()
        .zip(&cd)
        .map(|(a, b)| CdComparisonRow {
            t: b.t,
            fidelity_trotter: a.fidelity,
            fidelity_cd: b.fidelity,
            beta: b.beta,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{commutator, spectral_norm};

    fn cfg() -> CdConfig<f64> {
        CdConfig::new(-1.0, 5.0, 1.0, 100, Protocol::Cd).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(CdConfig::new(-1.0, 5.0, 0.0, 100, Protocol::Cd).is_err());
        assert!(CdConfig::new(-1.0, 5.0, 1.0, 0, Protocol::Cd).is_err());
    }

    #[test]
    fn hamiltonians() {
        let c = cfg();
        let (h_a, h_b) = cd_hamiltonians(&c, 1.0);
        assert_eq!(h_a.norm_max(), 0.0);
        let e = eigh(&h_b).unwrap();
        for (got, want) in e.values.iter().zip([-2.0, 0.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let (h_a, h_b) = cd_hamiltonians(&c, 0.3);
        assert!(spectral_norm(&commutator(&h_a, &h_b).unwrap()) > 1.0);
    }

    #[test]
    fn schedule_values() {
        assert_eq!(schedule(0.0, 1.0), 0.0);
        assert!((schedule(0.5f64, 1.0) - 0.5).abs() < 1e-15);
        assert!((schedule(1.0f64, 1.0) - 1.0).abs() < 1e-15);
        // rate against a central difference
        for t in [0.1f64, 0.35, 0.8] {
            let h = 1e-6;
            let fd = (schedule(t + h, 1.0) - schedule(t - h, 1.0)) / (2.0 * h);
            assert!((schedule_rate(t, 1.0) - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn beta_domain() {
        let c = cfg();
        assert_eq!(cd_beta(&c, 0.0).unwrap(), 0.0);
        assert!(matches!(cd_beta(&c, 1.0), Err(Error::OutOfDomain(_))));
        for k in 0..100 {
            assert!(cd_beta(&c, k as f64 / 100.0).unwrap().is_finite());
        }
    }

    #[test]
    fn ground_state_energy_matches_brute_force() {
        let c = cfg();
        let (h_a, h_b) = cd_hamiltonians(&c, 0.0);
        let h = &h_a + &h_b;
        let e = eigh(&h).unwrap();
        // minimise the Rayleigh quotient over the computational and Bell bases
        let s = 1.0 / 2f64.sqrt();
        let z = C::new(0.0, 0.0);
        let o = C::new(s, 0.0);
        let mut best = f64::INFINITY;
        let mut candidates: Vec<Vec<C<f64>>> = (0..4)
            .map(|i| (0..4).map(|j| if i == j { C::new(1.0, 0.0) } else { z }).collect())
            .collect();
        candidates.push(vec![z, o, -o, z]);
        candidates.push(vec![z, o, o, z]);
        for v in &candidates {
            best = best.min(inner(v, &h.mul_vec(v)).re);
        }
        assert!(e.values[0] <= best + 1e-12);
        assert!((e.vector(0).iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn short_run_keeps_norm_and_starts_at_one() {
        let c = CdConfig::new(-1.0, 5.0, 1.0, 20, Protocol::Trotter).unwrap();
        let rows = cd_run(&c).unwrap();
        assert_eq!(rows.len(), 21);
        assert_eq!(rows[0].fidelity, 1.0);
        assert!(rows.last().unwrap().beta.is_none());
        assert_eq!(rows.last().unwrap().gates, 120);
    }
}
