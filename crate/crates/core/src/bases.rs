//! Base formulas: `S2`, `S3`, the generic six-gate family and the
//! sum+commutator formula `f_R`.

use log::warn;

use crate::error::{Error, Result};
use crate::formula::{Gen, GeneratorPair, ProductFormula, Step};
use crate::matcore::{commutator, CMatrix};
use crate::scalar::Real;

/// Below this `R` the closed-form `f_R` coefficients are a poor approximation.
pub const F_R_WARN_BELOW: f64 = 4.0;

fn golden<T: Real>() -> T {
    (T::lit(5.0).sqrt() + T::one()) / T::lit(2.0)
}

/// `e^{xA} e^{xB} e^{-xA} e^{-xB} = exp(x^2 [A, B] + O(x^3))`.
pub fn s2<T: Real>() -> ProductFormula<T> {
    let (o, z) = (T::one(), -T::one());
    ProductFormula::from_pairs("S2", Some(2), &[(Gen::A, o), (Gen::B, o), (Gen::A, z), (Gen::B, z)])
        .expect("finite coefficients")
}

/// Six-gate formula with `exp(x^2 [A, B] + O(x^4))`.
pub fn s3<T: Real>() -> ProductFormula<T> {
    let r5 = T::lit(5.0).sqrt();
    let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
    let p = [
        (r5 - one) / two,
        (r5 - one) / two,
        -one,
        -(r5 + one) / two,
        (three - r5) / two,
        one,
    ];
    SixGateParams::new(p).to_formula("S3", Some(3))
}

/// Coefficients of `e^{p1 xA} e^{p2 xB} e^{p3 xA} e^{p4 xB} e^{p5 xA} e^{p6 xB}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SixGateParams<T> {
    pub p: [T; 6],
}

impl<T: Real> SixGateParams<T> {
    pub fn new(p: [T; 6]) -> Self {
        Self { p }
    }

    /// Reads back an alternating, A-leading six-step formula.
    pub fn from_formula(f: &ProductFormula<T>) -> Result<Self> {
        let steps = f.steps();
        let shape_ok = steps.len() == 6
            && steps
                .iter()
                .enumerate()
                .all(|(i, s)| s.gen == if i % 2 == 0 { Gen::A } else { Gen::B });
        if !shape_ok {
            return Err(Error::InvalidInput(format!(
                "'{}' is not an alternating A-leading six-step formula",
                f.label()
            )));
        }
        let mut p = [T::zero(); 6];
        for (dst, s) in p.iter_mut().zip(steps) {
            *dst = s.coeff;
        }
        Ok(Self { p })
    }

    pub fn to_formula(&self, label: &str, claimed_order: Option<u32>) -> ProductFormula<T> {
        ProductFormula::alternating(label, claimed_order, &self.p).expect("finite coefficients")
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().all(|v| v.is_finite())
    }
}

/// `l, m, q, r, s` polynomials of the six coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reparam<T> {
    pub l: T,
    pub m: T,
    pub q: T,
    pub r: T,
    pub s: T,
}

pub fn reparam<T: Real>(params: &SixGateParams<T>) -> Reparam<T> {
    let [p1, p2, p3, p4, p5, p6] = params.p;
    Reparam {
        l: p1 + p3 + p5,
        m: p2 + p4 + p6,
        q: p2 * p3 + p2 * p5 + p4 * p5,
        r: p1 * p2 * p3 + p1 * p2 * p5 + p1 * p4 * p5 + p3 * p4 * p5,
        s: p2 * p3 * p4 + p2 * p3 * p6 + p2 * p5 * p6 + p4 * p5 * p6,
    }
}

impl<T: Real> Reparam<T> {
    /// The `x`, `x^2` and `x^3` coefficients of `log` of the six-gate product:
    ///
    /// ```text
    /// x   : l A + m B
    /// x^2 : (l m - 2 q) / 2 [A, B]
    /// x^3 : ((l^2 m / 2 - 3 r) [A, [A, B]] + (m^2 l / 2 - 3 s) [B, [B, A]]) / 6
    /// ```
    pub fn bch_terms(&self, gens: &GeneratorPair<T>) -> [CMatrix<T>; 3] {
        let (a, b) = (gens.a(), gens.b());
        let ab = gens.commutator();
        let ba = ab.scale_real(-T::one());
        let aab = commutator(a, &ab).expect("same dims");
        let bba = commutator(b, &ba).expect("same dims");
        let half = T::lit(0.5);
        let (l, m) = (self.l, self.m);
        let o1 = &a.scale_real(l) + &b.scale_real(m);
        let o2 = ab.scale_real(half * (l * m - T::lit(2.0) * self.q));
        let sixth = T::one() / T::lit(6.0);
        let ca = sixth * (half * l * l * m - T::lit(3.0) * self.r);
        let cb = sixth * (half * m * m * l - T::lit(3.0) * self.s);
        let o3 = &aab.scale_real(ca) + &bba.scale_real(cb);
        [o1, o2, o3]
    }
}

fn check_r<T: Real>(r: T) -> Result<T> {
    let shifted = r + T::lit(0.5);
    if !(shifted > T::zero()) || !r.is_finite() {
        return Err(Error::OutOfDomain(format!("f_R needs R > -1/2, got {r}")));
    }
    Ok(shifted.sqrt())
}

/// Closed-form large-`R` coefficients, without the small-`R` warning.
///
/// With `q = sqrt(R + 1/2)` and golden ratio `g` the six values are
/// `((g-1)q, (g-1)q + 1, 1 - q, -g q, (2-g)q, q)`, giving `l = m = 1` and
/// `q = 1/2 - R` exactly; `r` and `s` are only approximately `1/6`.
pub fn f_r_params<T: Real>(r: T) -> Result<SixGateParams<T>> {
    let q = check_r(r)?;
    let g = golden::<T>();
    let one = T::one();
    Ok(SixGateParams::new([
        (g - one) * q,
        (g - one) * q + one,
        one - q,
        -g * q,
        (T::lit(2.0) - g) * q,
        q,
    ]))
}

/// `f_R(x) ~ exp(x (A + B) + R x^2 [A, B])`.
pub fn f_r<T: Real>(r: T) -> Result<ProductFormula<T>> {
    let params = f_r_params(r)?;
    if r < T::lit(F_R_WARN_BELOW) {
        warn!("f_R with R = {r} is outside its large-R regime; consider solver::solve_p_of_r");
    }
    Ok(params.to_formula(&format!("fR({r})"), Some(3)))
}

/// `f_R` for either sign of `R`.
///
/// Negative `R` is handled by exchanging the roles of `A` and `B` in
/// `f_{-R}`, since `[B, A] = -[A, B]` while `A + B` is symmetric.
pub fn f_r_signed<T: Real>(r: T) -> Result<ProductFormula<T>> {
    if !r.is_finite() {
        return Err(Error::OutOfDomain(format!("f_R needs finite R, got {r}")));
    }
    if r >= T::zero() {
        Ok(f_r_params(r)?.to_formula(&format!("fR({r})"), Some(3)))
    } else {
        Ok(f_r_params(-r)?.to_formula("", Some(3)).swap_ab().with_label(format!("fR({r})")))
    }
}

/// `e^{xC} f_R(x)`: seven gates approximating `exp(x (A + B + C) + R x^2 [A, B])`.
pub fn f_r_with_c<T: Real>(r: T) -> Result<ProductFormula<T>> {
    let base = f_r(r)?;
    prepend_c(&base)
}

pub(crate) fn prepend_c<T: Real>(base: &ProductFormula<T>) -> Result<ProductFormula<T>> {
    let mut steps = vec![Step::new(Gen::C, T::one())];
    steps.extend_from_slice(base.steps());
    ProductFormula::new(format!("C {}", base.label()), Some(1), steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{expm, spectral_norm};

    #[test]
    fn s2_shape() {
        let f = s2::<f64>();
        assert_eq!(f.gate_count(), 4);
        assert_eq!(f.claimed_order(), Some(2));
        let w = f.word_sums().unwrap();
        assert_eq!((w.a, w.b), (0.0, 0.0));
    }

    #[test]
    fn s3_reparam() {
        let p = SixGateParams::from_formula(&s3::<f64>()).unwrap();
        let rp = reparam(&p);
        for v in [rp.l, rp.m, rp.r, rp.s] {
            assert!(v.abs() < 1e-12);
        }
        assert!((rp.q + 1.0).abs() < 1e-12);
        assert_eq!(s3::<f64>().gate_count(), 6);
    }

    #[test]
    fn reparam_zero() {
        let rp = reparam(&SixGateParams::new([0.0f64; 6]));
        assert_eq!(rp, Reparam { l: 0.0, m: 0.0, q: 0.0, r: 0.0, s: 0.0 });
    }

    #[test]
    fn f_r_at_ten() {
        let p = f_r_params(10.0f64).unwrap();
        assert!((p.p[2] - (1.0 - 10.5f64.sqrt())).abs() < 1e-15);
        assert!((p.p[2] + 2.24037).abs() < 1e-5);
        let rp = reparam(&p);
        let g = (5f64.sqrt() + 1.0) / 2.0;
        let want_r = -(g - 1.0) * (10.5 - 10.5f64.sqrt());
        assert!((rp.l - 1.0).abs() < 1e-12 && (rp.m - 1.0).abs() < 1e-12);
        assert!((rp.q + 9.5).abs() < 1e-12);
        assert!((rp.r - want_r).abs() < 1e-12);
        assert!((rp.s + want_r).abs() < 1e-12);
    }

    #[test]
    fn f_r_domain() {
        assert!(matches!(f_r(-0.5f64), Err(Error::OutOfDomain(_))));
        assert!(matches!(f_r(-3.0f64), Err(Error::OutOfDomain(_))));
        assert!(f_r(-0.25f64).is_ok());
        assert!(f_r_signed(-3.0f64).is_ok());
    }

    #[test]
    fn f_r_large_r_limit_is_scaled_s3_pattern() {
        // x^2 R = beta fixed: x * p_i -> pattern_i * sqrt(beta)
        let g = (5f64.sqrt() + 1.0) / 2.0;
        let pattern = [g - 1.0, g - 1.0, -1.0, -g, 2.0 - g, 1.0];
        let beta = 0.7f64;
        for n in [1e4, 1e6, 1e8] {
            let x = 1.0 / n;
            let p = f_r_params(beta / (x * x)).unwrap();
            for (pi, want) in p.p.iter().zip(pattern) {
                assert!((pi * x - want * beta.sqrt()).abs() < 2.0 * x, "n={n}");
            }
        }
    }

    #[test]
    fn f_r_signed_negative_targets_negative_commutator() {
        let gens = GeneratorPair::pauli_xz();
        let r = -20.0f64;
        let x = 0.01;
        let f = f_r_signed(r).unwrap();
        let gen = &(gens.a() + gens.b()).scale_real(x) + &gens.commutator().scale_real(r * x * x);
        let target = expm(&gen).unwrap();
        let err = spectral_norm(&(&f.evaluate(&gens, x).unwrap() - &target));
        let wrong = expm(&(&(gens.a() + gens.b()).scale_real(x) + &gens.commutator().scale_real(-r * x * x))).unwrap();
        let err_wrong = spectral_norm(&(&f.evaluate(&gens, x).unwrap() - &wrong));
        assert!(err < 1e-4, "{err}");
        assert!(err_wrong > 10.0 * err);
    }

    #[test]
    fn f_r_with_c_matches_f_r_when_c_vanishes() {
        let f = f_r_with_c(10.0f64).unwrap();
        assert_eq!(f.gate_count(), 7);
        let gens = GeneratorPair::pauli_xz().with_c(CMatrix::zeros(2)).unwrap();
        let a = f.evaluate(&gens, 0.05).unwrap();
        let b = f_r(10.0f64).unwrap().evaluate(&gens, 0.05).unwrap();
        assert!(spectral_norm(&(&a - &b)) == 0.0);
    }

    #[test]
    fn six_gate_shape_is_checked() {
        assert!(SixGateParams::from_formula(&s2::<f64>()).is_err());
    }
}
