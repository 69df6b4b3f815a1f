#![allow(dead_code)]

use proptest::prelude::*;
use trotterion::matcore::spectral_norm;
use trotterion::{CMatrix64, Formula, Gen, Generators, C};

/// Matrix with entries in the unit square, rescaled to spectral norm `norm`.
pub fn matrix(dim: usize, max_norm: f64) -> impl Strategy<Value = CMatrix64> {
    (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim), 0.05..max_norm).prop_map(move |(v, n)| {
        let m = CMatrix64::new(dim, v.into_iter().map(|(re, im)| C::new(re, im)).collect()).unwrap();
        let s = spectral_norm(&m);
        if s > 1e-9 {
            m.scale_real(n / s)
        } else {
            CMatrix64::identity(dim).scale_real(n)
        }
    })
}

pub fn anti_hermitian(dim: usize, max_norm: f64) -> impl Strategy<Value = CMatrix64> {
    matrix(dim, 1.0).prop_map(move |m| {
        let k = (&m - &m.adjoint()).scale_real(0.5);
        let s = spectral_norm(&k);
        if s > 1e-9 {
            k.scale_real(max_norm / s)
        } else {
            k
        }
    })
}

pub fn generators(dim: usize) -> impl Strategy<Value = Generators> {
    (matrix(dim, 1.0), matrix(dim, 1.0)).prop_map(|(a, b)| Generators::new(a, b).unwrap())
}

pub fn formula(max_len: usize) -> impl Strategy<Value = Formula> {
    prop::collection::vec((any::<bool>(), -1.0f64..1.0), 1..max_len).prop_map(|v| {
        let pairs: Vec<(Gen, f64)> = v.into_iter().map(|(a, c)| (if a { Gen::A } else { Gen::B }, c)).collect();
        Formula::from_pairs("random", None, &pairs).unwrap()
    })
}

pub fn dist(a: &CMatrix64, b: &CMatrix64) -> f64 {
    spectral_norm(&(a - b))
}

/// Proptest config whose failure files land beside the integration tests.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: Some(Box::new(proptest::test_runner::FileFailurePersistence::WithSource("regressions"))),
        ..ProptestConfig::default()
    }
}
