use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase::{circle_norm, frac};

/// Largest exponent `t` accepted by [`rational_snap`].
pub const MAX_SNAP_EXPONENT: u32 = 6;

/// Relative slack under which two candidate distances count as tied.
const TIE_TOL: f64 = 1e-12;

/// The nearest admissible rational to a real phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SnapFamily {
    /// The denominator divides `(p - p')^t`.
    pub divisor: bool,
    /// The denominator is a multiple of `p - p'`.
    pub multiple: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Snap {
    /// Numerator in `[0, den)`, coprime to `den`.
    pub num: u64,
    pub den: u64,
    /// `‖x - num/den‖`.
    pub distance: f64,
    pub family: SnapFamily,
}

impl Snap {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Candidate denominators: divisors of `D^t` and multiples of `D` up to `D^t`,
/// restricted to those coprime to `q`, in increasing order.
pub fn snap_denominators(p: u64, p2: u64, q: u32, t: u32) -> Result<Vec<u64>> {
    let d = p.abs_diff(p2);
    if d == 0 {
        return Err(Error::InvalidArgument("p and p' must differ".into()));
    }
    if t == 0 || t > MAX_SNAP_EXPONENT {
        return Err(Error::InvalidArgument(format!(
            "snap exponent must lie in [1, {MAX_SNAP_EXPONENT}], got {t}"
        )));
    }
    let top = d
        .checked_pow(t)
        .ok_or_else(|| Error::Overflow(format!("({d})^{t} exceeds 64 bits")))?;
    let mut out: Vec<u64> = Vec::new();
    let mut b = 1u64;
    while b * b <= top {
        if top % b == 0 {
            out.push(b);
            out.push(top / b);
        }
        b += 1;
    }
    out.extend((1..=top / d).map(|m| m * d));
    out.retain(|b| b.gcd(&(q as u64)) == 1);
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Nearest rational `a/b` to `x` with `b` among [`snap_denominators`]. Ties are
/// broken by the smaller reduced denominator, then the smaller numerator.
pub fn rational_snap(x: f64, p: u64, p2: u64, q: u32, t: u32) -> Result<Snap> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("phase {x} is not finite")));
    }
    let d = p.abs_diff(p2);
    let top = snap_denominators(p, p2, q, t)?;
    let x = frac(x);
    let mut best: Option<(f64, u64, u64)> = None;
    let candidates = top.iter().flat_map(|&b| {
        let a = (x * b as f64).floor() as u64;
        [(a % b, b), ((a + 1) % b, b)]
    });
    for (a, b) in candidates {
        let g = a.gcd(&b);
        let (a, b) = (a / g, b / g);
        let dist = circle_norm(x - a as f64 / b as f64);
        let better = match best {
            None => true,
            Some((bd, bb, ba)) => {
                if dist < bd - TIE_TOL {
                    true
                } else if dist <= bd + TIE_TOL {
                    (b, a) < (bb, ba)
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((dist, b, a));
        }
    }
    let (distance, den, num) = best.expect("1 is always a candidate denominator");
    let top_power = d.pow(t);
    Ok(Snap {
        num,
        den,
        distance,
        family: SnapFamily {
            divisor: top_power % den == 0,
            multiple: den % d == 0,
        },
    })
}
