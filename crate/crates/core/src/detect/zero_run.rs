use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::digits::check_base;
use crate::error::{Error, Result};

/// Upper limit on the window length searched by [`min_window_for_zero_run`].
pub const MAX_ZERO_RUN_WINDOW: u32 = 1 << 20;

/// Number of words of length `m` over `q` letters avoiding `0^r`, for every
/// `m ≤ max_len`.
pub fn words_avoiding_zero_run(q: u32, r: u32, max_len: u32) -> Vec<BigUint> {
    let qb = BigUint::from(q);
    let mut out: Vec<BigUint> = Vec::with_capacity(max_len as usize + 1);
    for m in 0..=max_len {
        let a = if r == 0 {
            BigUint::zero()
        } else if m < r {
            qb.pow(m)
        } else {
            let tail: BigUint = out[(m - r) as usize..m as usize].iter().sum();
            tail * (q - 1)
        };
        out.push(a);
    }
    out
}

/// `x = mantissa · 2^exp` exactly, for finite positive `x`.
fn dyadic(x: f64) -> (BigUint, i32) {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        (BigUint::from(frac), -1074)
    } else {
        (BigUint::from(frac | (1u64 << 52)), exp - 1075)
    }
}

/// Least `m` such that the proportion of words of length `m` without a run of
/// `r` zeros is at most `ε`. The comparison is exact.
pub fn min_window_for_zero_run(q: u32, r: u32, eps: f64) -> Result<u32> {
    check_base(q)?;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::InvalidArgument(format!("ε must be positive, got {eps}")));
    }
    if eps >= 1.0 || r == 0 {
        return Ok(0);
    }
    let (mant, exp) = dyadic(eps);
    let qb = BigUint::from(q);
    // a_m ≤ mant · 2^exp · q^m
    let fits = |a: &BigUint, qm: &BigUint| -> bool {
        if exp >= 0 {
            a <= &((&mant << exp as usize) * qm)
        } else {
            (a << (-exp) as usize) <= &mant * qm
        }
    };
    let mut history: Vec<BigUint> = Vec::new();
    let mut qm = BigUint::one();
    let mut window = BigUint::zero();
    for m in 0..=MAX_ZERO_RUN_WINDOW {
        let a = if m < r {
            qm.clone()
        } else {
            let a = &window * (q - 1);
            window -= &history[(m - r) as usize];
            a
        };
        if fits(&a, &qm) {
            return Ok(m);
        }
        window += &a;
        history.push(a);
        qm *= &qb;
    }
    Err(Error::ResourceCap(format!(
        "no window up to {MAX_ZERO_RUN_WINDOW} digits reaches ε = {eps}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn brute_count(q: u32, r: u32, m: u32) -> u64 {
        let total = (q as u64).pow(m);
        (0..total)
            .filter(|&w| {
                let mut x = w;
                let mut run = 0;
                for _ in 0..m {
                    if x % q as u64 == 0 {
                        run += 1;
                        if run >= r {
                            return false;
                        }
                    } else {
                        run = 0;
                    }
                    x /= q as u64;
                }
                true
            })
            .count() as u64
    }

    #[test]
    fn counts_match_enumeration() {
        for q in 2..=4u32 {
            for r in 1..=4u32 {
                let max = if q == 2 { 16 } else { 9 };
                let counts = words_avoiding_zero_run(q, r, max);
                for m in 0..=max {
                    assert_eq!(
                        counts[m as usize].to_u64().unwrap(),
                        brute_count(q, r, m),
                        "q={q} r={r} m={m}"
                    );
                }
            }
        }
    }

    #[test]
    fn small_cases() {
        assert_eq!(min_window_for_zero_run(2, 1, 0.5).unwrap(), 1);
        assert_eq!(min_window_for_zero_run(2, 1, 0.49).unwrap(), 2);
        assert_eq!(min_window_for_zero_run(2, 3, 1.0).unwrap(), 0);
        assert_eq!(min_window_for_zero_run(5, 0, 0.1).unwrap(), 0);
        assert!(min_window_for_zero_run(2, 1, 0.0).is_err());
        assert!(min_window_for_zero_run(1, 1, 0.5).is_err());
    }

    #[test]
    fn dyadic_is_exact() {
        for x in [0.5, 0.1, 1e-300, 3.75, f64::MIN_POSITIVE / 8.0] {
            let (m, e) = dyadic(x);
            let y = m.to_f64().unwrap() * 2f64.powi(e / 2) * 2f64.powi(e - e / 2);
            assert_eq!(y, x);
        }
    }

    fn at_most(a: &BigUint, eps: f64, q: u32, m: u32) -> bool {
        let (mant, exp) = dyadic(eps);
        let qm = BigUint::from(q).pow(m);
        if exp >= 0 {
            a <= &((mant << exp as usize) * qm)
        } else {
            (a << (-exp) as usize) <= mant * qm
        }
    }

    proptest! {
        #[test]
        fn window_is_least(q in 2u32..6, r in 1u32..5, eps in 0.001f64..0.9) {
            let m = min_window_for_zero_run(q, r, eps).unwrap();
            let counts = words_avoiding_zero_run(q, r, m);
            prop_assert!(at_most(&counts[m as usize], eps, q, m));
            if m > 0 {
                prop_assert!(!at_most(&counts[m as usize - 1], eps, q, m - 1));
            }
        }
    }
}
