use trotterion::bases::{f_r, s2, s3};
use trotterion::certify::{estimate_order_on, logspace, ScanTarget, Window};
use trotterion::recursion::{apply_chain, build_g, RecursionScheme, SchemeKind};
use trotterion::{Formula, Generators};

fn order(f: &Formula, lo: f64, hi: f64) -> f64 {
    let xs = logspace(lo, hi, 12).unwrap();
    estimate_order_on(f, &Generators::pauli_xz(), &ScanTarget::Commutator, &xs, Window::All).unwrap()
}

fn commutator_schemes() -> Vec<(SchemeKind, Formula)> {
    vec![
        (SchemeKind::TwoCopy, s2()),
        (SchemeKind::JK, s3()),
        (SchemeKind::FiveCopy, s3()),
        (SchemeKind::Q4, s3()),
        (SchemeKind::W5, s3()),
        (SchemeKind::V6, s3()),
        (SchemeKind::G10, s3()),
        (SchemeKind::SixCopy, s2()),
    ]
}

#[test]
fn every_scheme_promotes_the_order() {
    for (kind, base) in commutator_schemes() {
        let n = base.claimed_order().unwrap();
        let out = RecursionScheme::new(kind, n).unwrap().apply(&base).unwrap();
        assert_eq!(out.claimed_order(), Some(n + kind.increment()), "{kind}");
        let (before, after) = (order(&base, 0.05, 0.1), order(&out, 0.05, 0.1));
        assert!(
            after - before >= kind.increment() as f64 - 0.3,
            "{kind}: {before:.3} -> {after:.3}"
        );
    }
}

#[test]
fn outputs_keep_linear_word_sums_zero() {
    for (kind, base) in commutator_schemes() {
        let n = base.claimed_order().unwrap();
        let out = RecursionScheme::new(kind, n).unwrap().apply(&base).unwrap();
        let w = out.word_sums().unwrap();
        assert!(w.a.abs() <= 1e-12 && w.b.abs() <= 1e-12, "{kind}: {} {}", w.a, w.b);
        assert!((w.ba + 1.0).abs() <= 1e-10, "{kind}: {}", w.ba);
    }
}

#[test]
fn gate_count_recurrences() {
    type Rule = (SchemeKind, fn(usize) -> usize);
    // recurrence on the source gate count
    let rules: [Rule; 4] = [
        (SchemeKind::Q4, |n| 4 * n - 3),
        (SchemeKind::W5, |n| 5 * n - 4),
        (SchemeKind::V6, |n| 2 * (3 * n - 2)),
        (SchemeKind::G10, |n| 2 * (5 * n - 2)),
    ];
    for (kind, rule) in rules {
        let mut f: Formula = s3();
        for _ in 0..3 {
            let next = apply_chain(&f, &[kind]).unwrap();
            assert_eq!(next.gate_count(), rule(f.gate_count()), "{kind} from {}", f.label());
            f = next;
        }
    }
}

#[test]
fn g_composes_with_itself() {
    let g5 = build_g(&s3::<f64>(), 3).unwrap();
    let g7 = build_g(&g5, 5).unwrap();
    assert_eq!(g7.claimed_order(), Some(7));
    assert_eq!(g7.gate_count(), 2 * (5 * 56 - 2));
    let est = order(&g7, 0.1, 0.3);
    assert!((est - 7.0).abs() < 0.3, "{est}");
}

#[test]
fn parity_is_checked_before_building() {
    let base: Formula = s2();
    assert!(apply_chain(&base, &[SchemeKind::G10]).is_err());
    assert!(apply_chain(&base, &[SchemeKind::TwoCopy, SchemeKind::G10]).is_ok());
    assert!(apply_chain(&s3::<f64>(), &[SchemeKind::SixCopy]).is_err());
}

#[test]
fn sum_commutator_base_accepts_odd_schemes() {
    // f_R is third order for its own target; sum schemes only check parity here
    let f = f_r(50.0).unwrap();
    assert!(apply_chain(&f, &[SchemeKind::SumCommOdd]).is_ok());
    assert!(apply_chain(&f, &[SchemeKind::SumCommEven]).is_err());
}
