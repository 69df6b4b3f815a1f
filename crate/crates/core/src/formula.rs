//! Product formulas as ordered lists of `(generator, coefficient)` steps.
//!
//! Step `i` stands for the factor `exp(coeff_i * x * G_i)`. The list order is
//! the printed left-to-right order, and [`ProductFormula::evaluate`] multiplies
//! in that order, so `[(A, p1), (B, p2)]` evaluates to `e^{p1 x A} e^{p2 x B}`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{commutator, expm, CMatrix};
use crate::scalar::Real;

/// Coefficients below this magnitude are treated as zero when merging.
pub const MERGE_TOL: f64 = 1e-14;

/// Generator tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gen {
    A,
    B,
    C,
}

impl Gen {
    /// Exchanges `A` and `B`, leaving `C` alone.
    pub fn swapped(self) -> Gen {
        match self {
            Gen::A => Gen::B,
            Gen::B => Gen::A,
            Gen::C => Gen::C,
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Gen::A => "A",
            Gen::B => "B",
            Gen::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step<T> {
    pub gen: Gen,
    pub coeff: T,
}

impl<T> Step<T> {
    pub fn new(gen: Gen, coeff: T) -> Self {
        Self { gen, coeff }
    }
}

/// How [`ProductFormula::repeat`] rescales each copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepeatMode {
    /// Copies run at `x / sqrt(r)`, so `r` copies still approximate `exp(x^2 [A, B])`.
    Commutator,
    /// Copies are concatenated unscaled (time slicing of a linear target).
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFormula<T> {
    steps: Vec<Step<T>>,
    label: String,
    claimed_order: Option<u32>,
}

impl<T: Real> Default for ProductFormula<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> ProductFormula<T> {
    pub fn new(label: impl Into<String>, claimed_order: Option<u32>, steps: Vec<Step<T>>) -> Result<Self> {
        if let Some(bad) = steps.iter().find(|s| !s.coeff.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite coefficient {} on generator {}",
                bad.coeff, bad.gen
            )));
        }
        if claimed_order == Some(0) {
            return Err(Error::InvalidInput("claimed order must be positive".into()));
        }
        Ok(Self {
            steps,
            label: label.into(),
            claimed_order,
        })
    }

    /// Convenience constructor from `(tag, coefficient)` pairs.
    pub fn from_pairs(label: impl Into<String>, claimed_order: Option<u32>, pairs: &[(Gen, T)]) -> Result<Self> {
        Self::new(
            label,
            claimed_order,
            pairs.iter().map(|&(g, c)| Step::new(g, c)).collect(),
        )
    }

    /// Alternating `A, B, A, ...` steps with the given coefficients.
    pub fn alternating(label: impl Into<String>, claimed_order: Option<u32>, coeffs: &[T]) -> Result<Self> {
        let steps = coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| Step::new(if i % 2 == 0 { Gen::A } else { Gen::B }, c))
            .collect();
        Self::new(label, claimed_order, steps)
    }

    /// The empty product.
    pub fn identity() -> Self {
        Self {
            steps: Vec::new(),
            label: "I".into(),
            claimed_order: None,
        }
    }

    pub fn steps(&self) -> &[Step<T>] {
        &self.steps
    }

    pub fn coefficients(&self) -> Vec<T> {
        self.steps.iter().map(|s| s.coeff).collect()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn claimed_order(&self) -> Option<u32> {
        self.claimed_order
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_order(mut self, order: Option<u32>) -> Self {
        self.claimed_order = order.filter(|&o| o > 0);
        self
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn uses(&self, gen: Gen) -> bool {
        self.steps.iter().any(|s| s.gen == gen)
    }

    /// `prod_i exp(coeff_i x G_i)` in list order.
    pub fn evaluate(&self, gens: &GeneratorPair<T>, x: T) -> Result<CMatrix<T>> {
        let mut acc = CMatrix::identity(gens.dim());
        for s in &self.steps {
            let g = gens.get(s.gen)?;
            let factor = expm(&g.scale_real(s.coeff * x))?;
            acc = &acc * &factor;
        }
        Ok(acc)
    }

    /// Reversed steps with negated coefficients; evaluates to the matrix inverse.
    pub fn inverse(&self) -> Self {
        Self {
            steps: self.steps.iter().rev().map(|s| Step::new(s.gen, -s.coeff)).collect(),
            label: format!("({})^-1", self.label),
            claimed_order: self.claimed_order,
        }
    }

    /// Multiplies every coefficient by `v`, i.e. `f(x) -> f(v x)`.
    pub fn scale_argument(&self, v: T) -> Self {
        Self {
            steps: self.steps.iter().map(|s| Step::new(s.gen, s.coeff * v)).collect(),
            label: self.label.clone(),
            claimed_order: self.claimed_order,
        }
    }

    /// Same formula with the `A` and `B` tags exchanged.
    pub fn swap_ab(&self) -> Self {
        Self {
            steps: self.steps.iter().map(|s| Step::new(s.gen.swapped(), s.coeff)).collect(),
            label: format!("swap({})", self.label),
            claimed_order: self.claimed_order,
        }
    }

    /// Merges adjacent equal tags and drops (near-)zero steps, re-checking
    /// the neighbours that become adjacent after each drop.
    pub fn simplify(&self) -> Self {
        let tol = T::lit(MERGE_TOL);
        let mut out: Vec<Step<T>> = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            match out.last_mut() {
                Some(top) if top.gen == s.gen => {
                    top.coeff = top.coeff + s.coeff;
                    if top.coeff.abs() < tol {
                        out.pop();
                    }
                }
                _ => {
                    if s.coeff.abs() >= tol {
                        out.push(*s);
                    }
                }
            }
        }
        Self {
            steps: out,
            label: self.label.clone(),
            claimed_order: self.claimed_order,
        }
    }

    /// Number of elementary exponentials after [`simplify`](Self::simplify).
    pub fn gate_count(&self) -> usize {
        self.simplify().len()
    }

    /// `r` copies of the formula; see [`RepeatMode`].
    pub fn repeat(&self, r: usize, mode: RepeatMode) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidInput("repeat count must be at least 1".into()));
        }
        let copy = match mode {
            RepeatMode::Commutator => self.scale_argument(T::one() / T::from_count(r).sqrt()),
            RepeatMode::Linear => self.clone(),
        };
        let mut steps = Vec::with_capacity(copy.len() * r);
        for _ in 0..r {
            steps.extend_from_slice(&copy.steps);
        }
        let out = Self {
            steps,
            label: format!("({})^{r}", self.label),
            claimed_order: self.claimed_order,
        };
        Ok(out.simplify())
    }

    /// Running sums of the coefficients carried by `gen`.
    pub fn trajectory(&self, gen: Gen) -> Vec<T> {
        let mut acc = T::zero();
        self.steps
            .iter()
            .filter(|s| s.gen == gen)
            .map(|s| {
                acc = acc + s.coeff;
                acc
            })
            .collect()
    }

    /// Coefficient of the monomial `w_1 w_2 ... w_k` in the formal expansion
    /// of `prod_i exp(p_i X_i)` in non-commuting variables.
    ///
    /// A run of `k` equal letters absorbed by a single step contributes `p^k / k!`,
    /// which is where the `1/2 p_i^2` terms of the squared-letter sums come from.
    pub fn word_coefficient(&self, word: &[Gen]) -> T {
        let len = word.len();
        let mut dp = vec![T::zero(); len + 1];
        dp[0] = T::one();
        for s in &self.steps {
            for j in (1..=len).rev() {
                let mut power = T::one();
                let mut add = T::zero();
                let mut k = 1;
                while k <= j && word[j - k] == s.gen {
                    power = power * s.coeff / T::from_count(k);
                    add = add + dp[j - k] * power;
                    k += 1;
                }
                dp[j] = dp[j] + add;
            }
        }
        dp[len]
    }

    /// All order-condition word sums; only defined for `A`/`B` formulas.
    pub fn word_sums(&self) -> Result<WordSums<T>> {
        if self.uses(Gen::C) {
            return Err(Error::InvalidInput("word sums are defined for A/B formulas only".into()));
        }
        use Gen::{A, B};
        let w = |word: &[Gen]| self.word_coefficient(word);
        Ok(WordSums {
            a: w(&[A]),
            b: w(&[B]),
            ba: w(&[B, A]),
            aba: w(&[A, B, A]),
            bab: w(&[B, A, B]),
            aaba: w(&[A, A, B, A]),
            bbab: w(&[B, B, A, B]),
            abab: w(&[A, B, A, B]),
            baba: w(&[B, A, B, A]),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = FormulaJson {
            label: self.label.clone(),
            claimed_order: self.claimed_order,
            steps: self.steps.iter().map(|s| (s.gen, s.coeff.to_f64_lossy())).collect(),
        };
        Ok(serde_json::to_string_pretty(&wire)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: FormulaJson = serde_json::from_str(text)?;
        let steps = wire
            .steps
            .into_iter()
            .map(|(g, c)| Step::new(g, T::lit(c)))
            .collect();
        Self::new(wire.label, wire.claimed_order, steps)
    }
}

/// Joins step lists in order (no merging).
pub fn concat<T: Real>(parts: &[ProductFormula<T>]) -> ProductFormula<T> {
    let steps = parts.iter().flat_map(|p| p.steps.iter().copied()).collect();
    let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join(" ");
    ProductFormula {
        steps,
        label,
        claimed_order: parts.first().and_then(|p| p.claimed_order),
    }
}

impl<T: Real> fmt::Display for ProductFormula<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.label)?;
        for s in &self.steps {
            write!(f, " e^({:+.6} x {})", s.coeff, s.gen)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FormulaJson {
    label: String,
    claimed_order: Option<u32>,
    steps: Vec<(Gen, f64)>,
}

/// The matrices substituted for the tags `A`, `B` and (optionally) `C`.
#[derive(Clone, Debug)]
pub struct GeneratorPair<T> {
    a: CMatrix<T>,
    b: CMatrix<T>,
    c: Option<CMatrix<T>>,
}

impl<T: Real> GeneratorPair<T> {
    pub fn new(a: CMatrix<T>, b: CMatrix<T>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                left: a.dim(),
                right: b.dim(),
            });
        }
        Ok(Self { a, b, c: None })
    }

    pub fn with_c(mut self, c: CMatrix<T>) -> Result<Self> {
        if c.dim() != self.a.dim() {
            return Err(Error::DimensionMismatch {
                left: self.a.dim(),
                right: c.dim(),
            });
        }
        self.c = Some(c);
        Ok(self)
    }

    /// `A = -i sigma_x`, `B = -i sigma_z`: the rotation pair used by every benchmark.
    pub fn pauli_xz() -> Self {
        use crate::matcore::pauli;
        Self {
            a: pauli::minus_i(&pauli::x()),
            b: pauli::minus_i(&pauli::z()),
            c: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn a(&self) -> &CMatrix<T> {
        &self.a
    }

    pub fn b(&self) -> &CMatrix<T> {
        &self.b
    }

    pub fn c(&self) -> Option<&CMatrix<T>> {
        self.c.as_ref()
    }

    pub fn get(&self, gen: Gen) -> Result<&CMatrix<T>> {
        match gen {
            Gen::A => Ok(&self.a),
            Gen::B => Ok(&self.b),
            Gen::C => self.c.as_ref().ok_or(Error::MissingGenerator(Gen::C)),
        }
    }

    /// `[A, B]`.
    pub fn commutator(&self) -> CMatrix<T> {
        commutator(&self.a, &self.b).expect("dimensions checked at construction")
    }

    pub fn scaled(&self, sa: T, sb: T) -> Self {
        Self {
            a: self.a.scale_real(sa),
            b: self.b.scale_real(sb),
            c: self.c.clone(),
        }
    }
}

/// Word sums of a two-generator formula.
///
/// Each field is the coefficient of the corresponding word in the formal
/// expansion of the product, so for instance `ba` collects `p_i p_j` over
/// B-steps `i` preceding A-steps `j`. A formula targeting `exp(x^2 [A, B])`
/// at second order has `a = b = 0` and `ba = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordSums<T> {
    pub a: T,
    pub b: T,
    pub ba: T,
    pub aba: T,
    pub bab: T,
    /// Word `AABA`.
    pub aaba: T,
    /// Word `BBAB`.
    pub bbab: T,
    pub abab: T,
    pub baba: T,
}

impl<T: Real> WordSums<T> {
    pub fn abab_minus_baba(&self) -> T {
        self.abab - self.baba
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::spectral_norm;
    use Gen::{A, B, C};

    type F = ProductFormula<f64>;

    fn s2() -> F {
        F::from_pairs("S2", Some(2), &[(A, 1.0), (B, 1.0), (A, -1.0), (B, -1.0)]).unwrap()
    }

    fn s3() -> F {
        let r5 = 5f64.sqrt();
        F::alternating(
            "S3",
            Some(3),
            &[(r5 - 1.0) / 2.0, (r5 - 1.0) / 2.0, -1.0, -(r5 + 1.0) / 2.0, (3.0 - r5) / 2.0, 1.0],
        )
        .unwrap()
    }

    fn pairs(f: &F) -> Vec<(Gen, f64)> {
        f.steps().iter().map(|s| (s.gen, s.coeff)).collect()
    }

    #[test]
    fn rejects_non_finite() {
        assert!(F::from_pairs("bad", None, &[(A, f64::INFINITY)]).is_err());
        assert!(F::new("bad", Some(0), vec![]).is_err());
    }

    #[test]
    fn evaluate_at_zero_is_identity() {
        let g = GeneratorPair::pauli_xz();
        let m = s2().evaluate(&g, 0.0).unwrap();
        assert!(spectral_norm(&(&m - &CMatrix::identity(2))) < 1e-15);
    }

    #[test]
    fn evaluate_order_is_left_to_right() {
        let g = GeneratorPair::pauli_xz();
        let f = F::from_pairs("ab", None, &[(A, 0.3), (B, 0.7)]).unwrap();
        let want = &expm(&g.a().scale_real(0.3)).unwrap() * &expm(&g.b().scale_real(0.7)).unwrap();
        assert!(spectral_norm(&(&f.evaluate(&g, 1.0).unwrap() - &want)) < 1e-15);
    }

    #[test]
    fn missing_c_is_an_error() {
        let f = F::from_pairs("c", None, &[(C, 1.0)]).unwrap();
        assert!(matches!(
            f.evaluate(&GeneratorPair::pauli_xz(), 0.1),
            Err(Error::MissingGenerator(Gen::C))
        ));
    }

    #[test]
    fn inverse_examples() {
        assert!(F::identity().inverse().is_empty());
        assert_eq!(pairs(&s2().inverse()), vec![(B, 1.0), (A, 1.0), (B, -1.0), (A, -1.0)]);
        assert_eq!(s3().inverse().inverse().steps(), s3().steps());
    }

    #[test]
    fn scale_examples() {
        assert_eq!(s3().scale_argument(1.0).steps(), s3().steps());
        assert!(s2().scale_argument(0.0).steps().iter().all(|s| s.coeff == 0.0));
        assert_eq!(pairs(&s2().scale_argument(-1.0)), vec![(A, -1.0), (B, -1.0), (A, 1.0), (B, 1.0)]);
    }

    #[test]
    fn concat_and_simplify() {
        assert_eq!(concat(&[s3()]).steps(), s3().steps());
        assert!(concat(&[s3(), s3().inverse()]).simplify().is_empty());
        let two = concat(&[s2(), s2()]);
        assert_eq!(two.len(), 8);
        // S2 ends with B and starts with A, so nothing merges at the seam
        assert_eq!(two.gate_count(), 8);
        let ab = F::from_pairs("", None, &[(A, 1.0), (A, -1.0)]).unwrap();
        assert!(ab.simplify().is_empty());
    }

    #[test]
    fn simplify_reexamines_neighbours() {
        let f = F::from_pairs("", None, &[(A, 0.5), (B, 1.0), (B, -1.0), (A, 0.25), (B, 1e-16)]).unwrap();
        assert_eq!(pairs(&f.simplify()), vec![(A, 0.75)]);
    }

    #[test]
    fn gate_counts() {
        assert_eq!(s2().gate_count(), 4);
        assert_eq!(s3().gate_count(), 6);
    }

    #[test]
    fn repeat_examples() {
        assert_eq!(s3().repeat(1, RepeatMode::Commutator).unwrap().steps(), s3().simplify().steps());
        assert!(s3().repeat(0, RepeatMode::Linear).is_err());
        let g = GeneratorPair::pauli_xz();
        let x = 0.4;
        let target = expm(&g.commutator().scale_real(x * x)).unwrap();
        let e1 = spectral_norm(&(&s2().evaluate(&g, x).unwrap() - &target));
        let e4 = spectral_norm(&(&s2().repeat(4, RepeatMode::Commutator).unwrap().evaluate(&g, x).unwrap() - &target));
        assert!(e4 < e1);
        assert_eq!(s2().repeat(3, RepeatMode::Linear).unwrap().gate_count(), 12);
    }

    #[test]
    fn trajectories() {
        assert_eq!(s2().trajectory(A), vec![1.0, 0.0]);
        let t = s3().trajectory(A);
        let r5 = 5f64.sqrt();
        assert!((t[0] - (r5 - 1.0) / 2.0).abs() < 1e-15);
        assert!((t[1] - (r5 - 3.0) / 2.0).abs() < 1e-15);
        assert!(t[2].abs() < 1e-15);
    }

    #[test]
    fn word_sums_examples() {
        let w = s3().word_sums().unwrap();
        for v in [w.a, w.b, w.aba, w.bab] {
            assert!(v.abs() < 1e-12, "{v}");
        }
        assert!((w.ba + 1.0).abs() < 1e-12);

        let w = s2().word_sums().unwrap();
        assert_eq!((w.a, w.b, w.ba), (0.0, 0.0, -1.0));

        let w = F::identity().word_sums().unwrap();
        assert_eq!(w, WordSums { a: 0.0, b: 0.0, ba: 0.0, aba: 0.0, bab: 0.0, aaba: 0.0, bbab: 0.0, abab: 0.0, baba: 0.0 });

        assert!(F::from_pairs("", None, &[(C, 1.0)]).unwrap().word_sums().is_err());
    }

    #[test]
    fn word_coefficient_squares() {
        // exp(pA): the AA coefficient is p^2/2
        let f = F::from_pairs("", None, &[(A, 3.0)]).unwrap();
        assert_eq!(f.word_coefficient(&[A, A]), 4.5);
        // Two A steps: (p + q)^2 / 2
        let f = F::from_pairs("", None, &[(A, 1.0), (A, 2.0)]).unwrap();
        assert_eq!(f.word_coefficient(&[A, A]), 4.5);
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let f = s3().with_label("S3 json");
        let back = F::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
        for (a, b) in back.steps().iter().zip(f.steps()) {
            assert_eq!(a.coeff.to_bits(), b.coeff.to_bits());
        }
        let text = f.to_json().unwrap();
        assert!(text.contains("\"claimed_order\": 3"));
        assert!(text.contains("\"A\""));
    }

    #[test]
    fn json_rejects_garbage() {
        assert!(F::from_json("{\"label\": 1}").is_err());
        assert!(F::from_json("{\"label\":\"x\",\"claimed_order\":null,\"steps\":[[\"D\",1.0]]}").is_err());
    }

    #[test]
    fn generator_pair_dims() {
        let g = GeneratorPair::new(CMatrix::<f64>::identity(2), CMatrix::identity(3));
        assert!(matches!(g, Err(Error::DimensionMismatch { .. })));
        let g = GeneratorPair::<f64>::pauli_xz().with_c(CMatrix::identity(3));
        assert!(g.is_err());
    }
}
