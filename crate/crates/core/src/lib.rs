//! Product formulas for exponentials of commutators.
//!
//! A [`ProductFormula`] is an ordered list of elementary exponentials
//! `exp(p_i x G_i)` with `G_i` one of two (occasionally three) generators.
//! The crate builds base formulas that approximate `exp(x^2 [A, B])` or
//! `exp(x (A + B) + R x^2 [A, B])`, raises their order recursively, solves
//! for composition coefficients, certifies orders numerically and runs a
//! few small physics benchmarks on top.
//!
//! ```
//! use trotterion::{bases, certify, recursion, GeneratorPair};
//!
//! let g5 = recursion::build_g(&bases::s3::<f64>(), 3).unwrap();
//! assert_eq!(g5.gate_count(), 56);
//! let order = certify::estimate_order(&g5, &GeneratorPair::pauli_xz(), &certify::ScanTarget::Commutator).unwrap();
//! assert!((order - 5.0).abs() < 0.3);
//! ```

// `!(x > 0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apps;
pub mod bases;
pub mod certify;
pub mod error;
pub mod formula;
pub mod matcore;
pub mod recursion;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use formula::{concat, Gen, GeneratorPair, ProductFormula, RepeatMode, Step, WordSums};
pub use matcore::CMatrix;
pub use scalar::{Real, C};

pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
pub type Formula = ProductFormula<f64>;
pub type Formula32 = ProductFormula<f32>;
pub type Generators = GeneratorPair<f64>;
pub type Complex64 = C<f64>;
