use std::f64::consts::{E, LN_2, PI};

use digilab::digits::IndexSet;
use digilab::lambda::{
    additivity_check, global_local_check, lambda_bar, lambda_exact, lambda_exact_set, lambda_mc, quadratic_form,
    LambdaOptions, LambdaProfile, LambdaValue, Method, DEFAULT_MC_SAMPLES,
};
use digilab::{CoefficientTable, DigitalSequence, Phase};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(a: i64, b: i64) -> Phase {
    Phase::rational(a, b).unwrap()
}

fn random_sm1(rng: &mut ChaCha8Rng) -> DigitalSequence {
    let mut t = CoefficientTable::new(2, 1, false).unwrap();
    for pos in 0..12 {
        for w in [[1, 0], [0, 1], [1, 1]] {
            t.set(Some(pos), &w, rat(rng.gen_range(0..12), 12)).unwrap();
        }
    }
    DigitalSequence::from_coefficients(t).unwrap()
}

#[test]
fn exact_values() {
    let one = DigitalSequence::one(3).unwrap();
    assert_eq!(lambda_exact(&one, 0, 7).unwrap(), LambdaValue::Finite(0.0));
    let tm = DigitalSequence::thue_morse();
    assert!(lambda_exact(&tm, 4, 5).unwrap().is_infinite());
    let third = DigitalSequence::linear(2, rat(1, 3)).unwrap();
    let v = lambda_exact(&third, 0, 1).unwrap().value();
    assert!((v - LN_2).abs() < 1e-12);
    assert_eq!(lambda_bar(LambdaValue::Infinite), 1.0);
    assert_eq!(lambda_bar(LambdaValue::Finite(0.25)), 0.25);
    assert!(lambda_exact_set(&one, &IndexSet::new(), 16).unwrap().value() == 0.0);
}

#[test]
fn monte_carlo() {
    let one = DigitalSequence::one(2).unwrap();
    let est = lambda_mc(&one, 0, 40, 2000, 1).unwrap();
    assert_eq!(est.lambda, LambdaValue::Finite(0.0));
    assert_eq!(est.ci_halfwidth, 0.0);
    let tm = DigitalSequence::thue_morse();
    assert!(lambda_mc(&tm, 0, 8, DEFAULT_MC_SAMPLES, 2).unwrap().lambda.value() >= 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut agree = 0;
    for i in 0..100 {
        let f = random_sm1(&mut rng);
        let lo = rng.gen_range(0..4);
        let hi = lo + rng.gen_range(1..=8);
        let exact = lambda_exact(&f, lo, hi).unwrap().modulus();
        let est = lambda_mc(&f, lo, hi, 20_000, i).unwrap();
        if (est.mean_abs - exact).abs() <= 3.0 * est.std_err + 1e-12 {
            agree += 1;
        }
    }
    assert!(agree >= 97, "{agree} of 100 within three standard errors");
}

#[test]
fn additivity() {
    let rs = DigitalSequence::rudin_shapiro();
    let res = additivity_check(&rs, &[IndexSet::from(vec![0, 1]), IndexSet::from(vec![4, 5])]).unwrap();
    assert!(res.consistent && res.residual.abs() < 1e-12);
    let tm = DigitalSequence::thue_morse();
    let res = additivity_check(&tm, &[IndexSet::from(vec![0]), IndexSet::from(vec![2])]).unwrap();
    assert!(res.consistent && res.union.is_infinite());
    let single = additivity_check(&rs, &[IndexSet::interval(0, 5)]).unwrap();
    assert_eq!(single.residual, 0.0);
    assert!(additivity_check(&rs, &[IndexSet::from(vec![0, 1]), IndexSet::from(vec![2, 3])]).is_err());
}

#[test]
fn quadratic_form_values() {
    assert_eq!(quadratic_form(&DigitalSequence::one(2).unwrap(), 0, 6).unwrap(), 0.0);
    let tm = DigitalSequence::thue_morse();
    assert!((quadratic_form(&tm, 3, 4).unwrap() - 1.0 / 16.0).abs() < 1e-12);
}

#[test]
fn envelope_of_the_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let upper = 2.0 * PI * PI * E / (E - 1.0);
    for _ in 0..100 {
        let f = random_sm1(&mut rng);
        let lo = rng.gen_range(0..4);
        let hi = lo + rng.gen_range(1..=6);
        let lam = lambda_exact(&f, lo, hi).unwrap();
        let q = quadratic_form(&f, lo, hi).unwrap();
        let proxy = 1.0 - (-lam.value()).exp();
        assert!(8.0 * q <= proxy + 1e-12, "{q} {proxy}");
        assert!(proxy <= upper * q + 1e-12, "{q} {proxy}");
    }
}

#[test]
fn global_versus_local() {
    let opts = LambdaOptions::default();
    let one = DigitalSequence::one(2).unwrap();
    let r = global_local_check(&one, (0, 6), &[(0, 6)], &opts).unwrap();
    assert!(r.pass && r.lhs == 0.0);
    let rs = DigitalSequence::rudin_shapiro();
    assert!(global_local_check(&rs, (0, 10), &[(1, 3), (7, 9)], &opts).unwrap().pass);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let f = random_sm1(&mut rng);
        assert!(global_local_check(&f, (0, 10), &[(1, 3), (7, 9)], &opts).unwrap().pass);
    }
}

#[test]
fn profiles() {
    let tm = DigitalSequence::thue_morse();
    let opts = LambdaOptions::default();
    let p = LambdaProfile::compute(&tm, &[(0, 1), (2, 3), (4, 30)], &opts).unwrap();
    assert_eq!(p.total(), 3.0);
    assert_eq!(p.rows[2].method, Method::Mc);
    assert!(p.to_csv().unwrap().starts_with("interval_lo,interval_hi,lambda,"));
    assert!(LambdaProfile::compute(&tm, &[(0, 3), (2, 5)], &opts).is_err());
}

proptest! {
    #[test]
    fn lambda_is_additive_over_separated_blocks(seed in any::<u64>(), a in 1u32..4, gap in 2u32..4, b in 1u32..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_sm1(&mut rng);
        let first = IndexSet::interval(0, a);
        let second = IndexSet::interval(a + gap, a + gap + b);
        let res = additivity_check(&f, &[first, second]).unwrap();
        prop_assert!(res.consistent);
        prop_assert!(res.union.is_infinite() || res.residual.abs() < 1e-9);
    }

    #[test]
    fn lambda_bar_is_in_unit_interval(x in 0.0f64..100.0) {
        let b = lambda_bar(LambdaValue::Finite(x));
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!(b <= x + 1e-15);
    }
}
