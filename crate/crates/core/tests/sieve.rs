use digilab::sieve::{
    default_checkpoints, ik_series, kbsz_correlation, kbsz_scan, mobius_correlation, mobius_table, primes_in,
};
use digilab::{DigitalSequence, Phase};
use proptest::prelude::*;

fn rat(a: i64, b: i64) -> Phase {
    Phase::rational(a, b).unwrap()
}

fn mu_by_trial_division(mut n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    let mut sign = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            sign = -sign;
        }
        d += 1;
    }
    if n > 1 {
        sign = -sign;
    }
    sign
}

#[test]
fn mobius_values() {
    let mu = mobius_table(1000).unwrap();
    assert_eq!((mu.get(0), mu.get(1), mu.get(6), mu.get(12)), (0, 1, 1, 0));
    assert!((0..1000).all(|n| mu.get(n) == mu_by_trial_division(n)));
}

#[test]
fn primes() {
    assert_eq!(primes_in(0, 20).unwrap(), [2, 3, 5, 7, 11, 13, 17, 19]);
    assert_eq!(primes_in(3, 13).unwrap(), [3, 5, 7, 11]);
    assert!(primes_in(24, 29).unwrap().is_empty());
}

#[test]
fn mobius_correlations() {
    let one = DigitalSequence::one(2).unwrap();
    let s = mobius_correlation(&one, 10, &[]).unwrap();
    assert!((s.last().unwrap().re + 0.2).abs() < 1e-15);
    assert_eq!(mobius_correlation(&one, 1, &[]).unwrap().last().unwrap().re, 0.0);
    let tm = DigitalSequence::thue_morse();
    let s = mobius_correlation(&tm, 1_000_000, &default_checkpoints(1_000_000, 2)).unwrap();
    assert_eq!(s.checkpoints.last(), Some(&1_000_000));
    assert!(s.last().unwrap().norm() < 1e-3);
    assert!(s.to_csv().unwrap().starts_with("checkpoint_N,re,im,abs\n"));
}

#[test]
fn bilinear_correlations() {
    for (p, p2) in [(5u64, 2u64), (7, 3), (13, 11)] {
        let f = DigitalSequence::linear(2, rat(1, (p - p2) as i64)).unwrap();
        for n in [1, 100, 4097] {
            let z = kbsz_correlation(&f, p, p2, n).unwrap();
            assert!((z.re - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }
    let tm = DigitalSequence::thue_morse();
    let z = kbsz_correlation(&tm, 3, 5, 1 << 16).unwrap();
    let direct: f64 = (0..1u64 << 16)
        .map(|n| {
            if ((3 * n).count_ones() + (5 * n).count_ones()) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .sum::<f64>()
        / 65536.0;
    assert_eq!(z.re, direct);
    assert_eq!(z.re.abs(), 0.150360107421875);
    let half = DigitalSequence::linear(2, rat(1, 2)).unwrap();
    let scan = kbsz_scan(&half, 3, 5, 1000).unwrap();
    assert_eq!(scan.entries.len(), 1);
    assert!((scan.max - 1.0).abs() < 1e-12);
}

#[test]
fn rudin_shapiro_scan_is_small() {
    let scan = kbsz_scan(&DigitalSequence::rudin_shapiro(), 3, 13, 1 << 18).unwrap();
    assert_eq!(scan.entries.len(), 10);
    assert!(scan.max < 0.2, "{}", scan.max);
}

#[test]
fn delange_series() {
    let tm = DigitalSequence::thue_morse();
    let s = ik_series(&tm, Phase::zero(), 10).unwrap();
    assert!(s
        .iter()
        .enumerate()
        .all(|(l, &v)| (v - 2.0 * (l + 1) as f64).abs() < 1e-12));
    let gamma = rat(2, 7);
    let lin = DigitalSequence::linear(3, gamma).unwrap();
    assert!(ik_series(&lin, gamma, 12).unwrap().iter().all(|v| v.abs() < 1e-12));
    assert!(ik_series(&DigitalSequence::rudin_shapiro(), Phase::zero(), 4).is_err());
}

proptest! {
    #[test]
    fn divisor_sums_of_mobius_vanish(n in 2u64..5000) {
        let mu = mobius_table(5001).unwrap();
        let s: i64 = (1..=n).filter(|d| n % d == 0).map(|d| mu.get(d) as i64).sum();
        prop_assert_eq!(s, 0);
    }

    #[test]
    fn bilinear_is_conjugate_symmetric(p in 2u64..20, p2 in 2u64..20, seed in 0i64..16) {
        prop_assume!(p != p2);
        let f = DigitalSequence::digit_sum(2, rat(seed, 16)).unwrap();
        let a = kbsz_correlation(&f, p, p2, 2000).unwrap();
        let b = kbsz_correlation(&f, p2, p, 2000).unwrap();
        prop_assert!((a - b.conj()).norm() < 1e-12);
    }
}
