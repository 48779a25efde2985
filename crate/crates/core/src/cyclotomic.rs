//! Exact vanishing test for integer combinations of roots of unity.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Sparse polynomial as `(exponent, coefficient)` pairs, ascending.
type Sparse = Vec<(usize, i64)>;

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Exact quotient `a / b` for a monic `b`, or `None` on overflow.
fn divide_exact(a: &[i64], b: &Sparse) -> Option<Vec<i64>> {
    let db = b.last()?.0;
    let mut rem: Vec<i128> = a.iter().map(|&c| c as i128).collect();
    let dq = rem.len().checked_sub(db + 1)? + 1;
    let mut quot = vec![0i64; dq];
    for i in (0..dq).rev() {
        let c = rem[i + db];
        if c == 0 {
            continue;
        }
        quot[i] = i64::try_from(c).ok()?;
        for &(e, bc) in b {
            rem[i + e] = rem[i + e].checked_sub(c.checked_mul(bc as i128)?)?;
        }
    }
    rem.iter().all(|&c| c == 0).then_some(quot)
}

fn sparse(dense: &[i64]) -> Sparse {
    dense
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(e, &c)| (e, c))
        .collect()
}

/// Coefficients of the `d`-th cyclotomic polynomial.
fn cyclotomic_dense(d: u64) -> Option<Vec<i64>> {
    let primes = prime_factors(d);
    let mut phi: Vec<i64> = vec![-1, 1];
    let mut rad = 1u64;
    for p in primes {
        let p = p as usize;
        let mut stretched = vec![0i64; (phi.len() - 1) * p + 1];
        for (e, &c) in phi.iter().enumerate() {
            stretched[e * p] = c;
        }
        phi = divide_exact(&stretched, &sparse(&phi))?;
        rad *= p as u64;
    }
    let s = (d / rad) as usize;
    if s > 1 {
        let mut stretched = vec![0i64; (phi.len() - 1) * s + 1];
        for (e, &c) in phi.iter().enumerate() {
            stretched[e * s] = c;
        }
        phi = stretched;
    }
    Some(phi)
}

fn cyclotomic(d: u64) -> Option<Arc<Sparse>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Option<Arc<Sparse>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("cache lock").get(&d) {
        return hit.clone();
    }
    let value = cyclotomic_dense(d).map(|dense| Arc::new(sparse(&dense)));
    cache.lock().expect("cache lock").insert(d, value.clone());
    value
}

/// Decides whether `Σ_u counts[u] · e(u/den)` is exactly zero.
///
/// Returns `None` when intermediate values overflow 128 bits.
pub(crate) fn vanishes(counts: &[u64], den: u64) -> Option<bool> {
    debug_assert_eq!(counts.len() as u64, den);
    let used = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(u, _)| u as u64);
    let g = used.fold(den, num_integer::gcd);
    if g == den {
        // only the residue 0 occurs
        return Some(counts.iter().all(|&c| c == 0));
    }
    let d = den / g;
    let mut poly = vec![0i128; d as usize];
    for (u, &c) in counts.iter().enumerate() {
        if c != 0 {
            poly[u / g as usize] += c as i128;
        }
    }
    let phi = cyclotomic(d)?;
    let deg = phi.last()?.0;
    for i in (deg..poly.len()).rev() {
        let c = poly[i];
        if c == 0 {
            continue;
        }
        let shift = i - deg;
        for &(e, pc) in phi.iter() {
            let slot = &mut poly[shift + e];
            *slot = slot.checked_sub(c.checked_mul(pc as i128)?)?;
        }
    }
    Some(poly[..deg].iter().all(|&c| c == 0))
}
