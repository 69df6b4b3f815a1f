//! Application benchmarks built on the sum+commutator formula.
//!
//! The chain and lattice models are quadratic hopping Hamiltonians, so they
//! are simulated on the single-particle (mode) space: an `L`-site model is an
//! `L x L` matrix and its many-body evolution is determined by it.

pub mod cd;
pub mod chain;
pub mod km;

pub use cd::{cd_beta, cd_compare, cd_hamiltonians, cd_run, CdConfig, Protocol};
pub use chain::{chain_heff, chain_hoppings, chain_simulate, ChainConfig};
pub use km::{km_commutator_check, km_hoppings, km_simulate, Boundary, KmConfig};

/// Default step-count grid for the convergence scans.
pub const DEFAULT_NS: [usize; 6] = [8, 16, 32, 64, 128, 256];
