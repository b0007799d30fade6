//! Worked examples for every public operation. Reference values for non-trivial
//! cases come from the plain-integer oracles below and were cross-checked at
//! 256-bit precision before being frozen here.

use num_complex::Complex64;
use num_integer::{Integer, Roots};
use ps_core::coprime::{self, coprime_pairs_bruteforce, coprime_tuples_mobius, main_term, zeta, TupleSpec};
use ps_core::expsum::{weyl_sum, DyadicBlock, PhaseParams};
use ps_core::psseq::{self, ResidueCounts};
use ps_core::realpow::{floor_pow, frac_part_scaled, is_exact_power};
use ps_core::OrderSpec;

fn o(s: &str) -> OrderSpec {
    s.parse().unwrap()
}

/// `[n^(3/2)]` by integer square root.
fn oracle_three_halves(n: u64) -> u128 {
    (n as u128).pow(3).sqrt()
}

fn oracle_tau(mut v: u128) -> u64 {
    let mut count = 1;
    let mut p = 2u128;
    while p * p <= v {
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        count *= e + 1;
        p += 1;
    }
    if v > 1 {
        count *= 2;
    }
    count
}

#[test]
fn floors() {
    assert_eq!(floor_pow(1, &o("5/2")).unwrap().value, 1);
    let f = floor_pow(4, &o("3/2")).unwrap();
    assert!(f.exact && f.value == 8);
    assert_eq!(floor_pow(5, &o("3/2")).unwrap().value, oracle_three_halves(5));
    assert_eq!(floor_pow(5, &o("3/2")).unwrap().value, 11);
    assert_eq!(floor_pow(2, &o("sqrt:2")).unwrap().value, 2);
    assert_eq!(is_exact_power(9, &o("3/2")).unwrap(), num_bigint::BigUint::from(27u32));
    assert!(is_exact_power(5, &o("3/2")).is_none());
}

#[test]
fn fractional_parts() {
    assert_eq!(frac_part_scaled(4, 1, 1, &o("3/2"), 1e-12).unwrap(), 0.0);
    assert_eq!(frac_part_scaled(2, 1, 2, &o("1"), 1e-12).unwrap(), 0.0);
    let v = frac_part_scaled(5, 1, 1, &o("3/2"), 1e-12).unwrap();
    // sqrt(125) - 11 = 0.180339887498948...
    assert!((v - 0.180_339_887_498_948_5).abs() < 1e-12);
}

#[test]
fn progression_counts() {
    let c = o("3/2");
    let oracle = (1..=20).filter(|&n| oracle_three_halves(n) % 2 == 0).count() as u64;
    assert_eq!(psseq::count_ap(20.0, 0, 2, &c).unwrap(), oracle);
    assert_eq!(oracle, 13);
    assert_eq!(psseq::count_ap(20.0, 2, 2, &c).unwrap(), 13);

    let oracle = (1..=100).filter(|&n| oracle_three_halves(n) % 7 == 0).count() as u64;
    assert_eq!(psseq::divisor_count(100.0, 7, &c).unwrap(), oracle);
    assert_eq!(oracle, 19);

    let p = psseq::residue_profile(100.0, 4, &o("sqrt:2")).unwrap();
    assert_eq!(p.counts, ResidueCounts::Dense(vec![23, 24, 33, 20]));
    assert_eq!(p.total(), 100);
}

#[test]
fn diagnostic_counts() {
    let c = o("3/2");
    let oracle: u64 = (1..=100).map(|n| oracle_tau(oracle_three_halves(n))).sum();
    assert_eq!(psseq::tau_sum(100.0, &c).unwrap(), oracle);
    assert_eq!(oracle, 738);

    let oracle = (1..=10_000u64).filter(|&n| (n as u128).gcd(&oracle_three_halves(n)) == 1).count() as u64;
    assert_eq!(psseq::dd_coprime_count(1e4, &c).unwrap(), oracle);
    assert_eq!(oracle, 5909);
    assert!((oracle as f64 / 1e4 - 6.0 / std::f64::consts::PI.powi(2)).abs() < 0.02);
}

#[test]
fn pair_and_tuple_counts() {
    let c = o("3/2");
    let spec = TupleSpec::pairs(100.0, c.clone()).unwrap();
    assert_eq!(coprime_tuples_mobius(&spec).unwrap(), 5563);
    assert_eq!(coprime_pairs_bruteforce(100.0, &c).unwrap(), 5563);
    let spec = TupleSpec::pairs(200.0, o("sqrt:2")).unwrap();
    assert_eq!(coprime_tuples_mobius(&spec).unwrap(), 23473);
    let spec = TupleSpec::new(2.0, vec![o("1"), o("1"), o("1")]).unwrap();
    assert_eq!(coprime_tuples_mobius(&spec).unwrap(), 7);
}

#[test]
fn zeta_and_main_terms() {
    let pi = std::f64::consts::PI;
    assert_eq!(zeta(2).unwrap(), pi * pi / 6.0);
    assert!((zeta(4).unwrap() / (pi.powi(4) / 90.0) - 1.0).abs() < 1e-13);
    assert!((zeta(3).unwrap() / 1.202_056_903_159_594_3 - 1.0).abs() < 1e-13);
    assert!((main_term(10.0, 2).unwrap() / (600.0 / (pi * pi)) - 1.0).abs() < 1e-14);
    assert!((main_term(10.0, 3).unwrap() / (1000.0 / 1.202_056_903_159_594_3) - 1.0).abs() < 1e-13);
    let ledger = coprime::mobius_ledger(50.0, &o("3/2"), &coprime::Budget::default()).unwrap();
    assert_eq!(ledger.count(1), 50);
}

#[test]
fn one_term_weyl_sum() {
    let p = PhaseParams::new(2, 1, o("3/2")).unwrap();
    let s = weyl_sum(&DyadicBlock::new(1.0, 2.0).unwrap(), &p, 1e-12).unwrap();
    let expected = Complex64::new(-0.552_409_469_422_595_4, -0.833_572_899_086_964_5);
    assert!((s - expected).norm() < 1e-10);
}
