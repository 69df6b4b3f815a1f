use std::f64::consts::PI;

use trotterion::apps::cd::{cd_beta, cd_hamiltonians, cd_run, schedule, step_formula, CdConfig, Protocol};
use trotterion::apps::chain::{chain_heff, chain_hoppings, chain_simulate, ChainConfig};
use trotterion::apps::km::{km_commutator_check, km_simulate, Boundary, KmConfig};
use trotterion::apps::DEFAULT_NS;
use trotterion::certify::ScanResult;
use trotterion::matcore::{commutator, vec_norm};
use trotterion::{Generators, C};

fn assert_nonincreasing(scan: &ScanResult<f64>, what: &str) {
    for w in scan.rows.windows(2) {
        let (a, b) = (w[0].error, w[1].error);
        let slack = if b < 1e-8 { 1.05 } else { 1.0 };
        assert!(b <= a * slack, "{what}: error rose from {a:e} to {b:e} at n = {}", w[1].x);
    }
}

#[test]
fn chain_errors_fall_with_n() {
    let cfg = ChainConfig::new(6, 1.0, 0.5, 1.0, 64).unwrap();
    let scan = chain_simulate(&cfg, &DEFAULT_NS).unwrap();
    assert_nonincreasing(&scan, "chain");
    let gates: Vec<usize> = scan.rows.iter().map(|r| r.gates.unwrap()).collect();
    let want: Vec<usize> = DEFAULT_NS.iter().map(|n| 3 * n * 6).collect();
    assert_eq!(gates, want);
}

#[test]
fn chain_commutator_is_next_nearest_neighbour() {
    // at L = 4 both paths between opposite sites cancel
    for l in [6usize, 8, 10] {
        let cfg = ChainConfig::new(l, 1.0, 0.5, 1.0, 8).unwrap();
        let (h0, h1) = chain_hoppings(&cfg).unwrap();
        let k = commutator(&h0, &h1).unwrap();
        for i in 0..l {
            for j in 0..l {
                let d = (j + l - i) % l;
                let hop = d.min(l - d);
                if hop != 2 {
                    assert!(k[(i, j)].norm() <= 1e-14, "L={l} ({i},{j})");
                } else {
                    assert!(k[(i, j)].norm() > 0.5, "L={l} ({i},{j})");
                }
            }
        }
        assert!(chain_heff(&cfg).unwrap().is_hermitian(1e-12));
    }
}

#[test]
fn km_errors_fall_with_n() {
    let torus = KmConfig::new(4, 4, 1.0, PI / 2.0, 1.0, 64).unwrap();
    assert!(torus.periodic());
    assert_nonincreasing(&km_simulate(&torus, &DEFAULT_NS).unwrap(), "km torus");
    let open = KmConfig::new(3, 4, 1.0, PI / 3.0, 1.0, 64).unwrap().with_boundary(Boundary::Open);
    assert_nonincreasing(&km_simulate(&open, &DEFAULT_NS).unwrap(), "km open");
}

#[test]
fn km_identities_need_flux_consistency() {
    for (lx, ly, phi) in [(4, 4, PI / 2.0), (6, 4, PI / 2.0), (4, 6, PI / 3.0 * 2.0)] {
        let cfg = KmConfig::new(lx, ly, 1.0, phi, 1.0, 8).unwrap();
        assert!(cfg.periodic(), "{lx}x{ly}");
        assert!(km_commutator_check(&cfg).unwrap().max() <= 1e-12, "{lx}x{ly}");
    }
    let inconsistent = KmConfig::new(4, 4, 1.0, PI / 4.0, 1.0, 8).unwrap();
    assert!(!inconsistent.flux_consistent());
}

#[test]
fn cd_evolution_preserves_the_norm() {
    for protocol in [Protocol::Trotter, Protocol::Cd] {
        let cfg = CdConfig::new(-1.0, 5.0, 1.0, 100, protocol).unwrap();
        let dt = cfg.dt();
        let mut psi = vec![C::new(0.5, 0.0); 4];
        let minus_i = C::new(0.0, -1.0);
        for k in 0..cfg.steps {
            let t = dt * k as f64;
            let (ha, hb) = cd_hamiltonians(&cfg, schedule(t, cfg.tau));
            let gens = Generators::new(ha.scale(minus_i), hb.scale(minus_i)).unwrap();
            let f = step_formula(&cfg, cd_beta(&cfg, t).unwrap() / dt).unwrap();
            assert_eq!(f.len(), 6);
            psi = f.evaluate(&gens, dt).unwrap().mul_vec(&psi);
        }
        assert!((vec_norm(&psi) - 1.0).abs() <= 1e-10, "{protocol:?}");
    }
}

#[test]
fn cd_rows_cover_the_schedule() {
    let cfg = CdConfig::new(-1.0, 5.0, 1.0, 50, Protocol::Cd).unwrap();
    let rows = cd_run(&cfg).unwrap();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows.last().unwrap().t, 1.0);
    assert!(rows.last().unwrap().beta.is_none());
    assert!(rows[..50].iter().all(|r| r.beta.is_some()));
    assert!(rows.iter().all(|r| r.fidelity <= 1.0 + 1e-12));
    assert_eq!(rows.last().unwrap().gates, 300);
}

#[test]
fn chain_error_times_n_levels_off() {
    // the step error is O(1/n); pushing it below 1e-6 would take n ~ 4e5 steps
    let cfg = ChainConfig::new(6, 1.0, 0.5, 1.0, 64).unwrap();
    let scan = chain_simulate(&cfg, &[128, 256, 512]).unwrap();
    let scaled: Vec<f64> = scan.rows.iter().map(|r| r.error * r.x).collect();
    assert!((scaled[2] / scaled[1] - 1.0).abs() < 0.05, "{scaled:?}");
    assert!(scan.rows[1].error > 1e-6);
}
