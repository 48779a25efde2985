//! Phases in ℝ/ℤ with an exact rational form and a float fallback.

use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for pointwise float comparisons of phases.
pub const FLOAT_TOL: f64 = 1e-9;

/// An element of ℝ/ℤ.
///
/// The rational form is reduced with its representative in `[0, 1)`; the float
/// form is also kept in `[0, 1)`. Arithmetic stays rational while the result
/// fits in 64-bit numerator and denominator and falls back to floats otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Phase {
    Rational(Ratio<i64>),
    Float(f64),
}

/// `x mod 1` in `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Distance to the nearest integer, `‖x‖`.
pub fn circle_norm(x: f64) -> f64 {
    let r = frac(x);
    r.min(1.0 - r)
}

/// `e(x) = exp(2πix)`.
pub fn unit(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * x)
}

/// `e(num/den)` computed from an exact residue, exactly `1` for residue 0.
pub fn unit_from_units(num: u64, den: u64) -> Complex64 {
    if num == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * (num as u128) == den as u128 {
        return Complex64::new(-1.0, 0.0);
    }
    unit(num as f64 / den as f64)
}

fn reduce_ratio(r: Ratio<i64>) -> Ratio<i64> {
    let f = r - r.floor();
    if f < Ratio::zero() {
        f + Ratio::from_integer(1)
    } else {
        f
    }
}

impl Phase {
    pub fn zero() -> Phase {
        Phase::Rational(Ratio::zero())
    }

    /// `num/den mod 1`.
    pub fn rational(num: i64, den: i64) -> Result<Phase> {
        if den == 0 {
            return Err(Error::InvalidArgument("phase denominator is zero".into()));
        }
        // reduce the numerator first so Ratio::new never sees i64::MIN / -1
        let (num, den) = if den < 0 {
            ((num as i128).checked_neg().unwrap_or(0), -(den as i128))
        } else {
            (num as i128, den as i128)
        };
        let num = num.rem_euclid(den) as i64;
        Ok(Phase::Rational(Ratio::new(num, den as i64)))
    }

    pub fn float(x: f64) -> Result<Phase> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("non-finite phase {x}")));
        }
        Ok(Phase::Float(frac(x)))
    }

    /// Residue `num` of the denominator `den`, as a reduced rational.
    pub fn from_units(num: u64, den: u64) -> Phase {
        debug_assert!(num < den);
        let g = num.gcd(&den);
        match (i64::try_from(num / g), i64::try_from(den / g)) {
            (Ok(a), Ok(b)) => Phase::Rational(Ratio::new_raw(a, b)),
            _ => Phase::Float(num as f64 / den as f64),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Phase::Rational(_))
    }

    pub fn as_ratio(&self) -> Option<Ratio<i64>> {
        match *self {
            Phase::Rational(r) => Some(r),
            Phase::Float(_) => None,
        }
    }

    /// Representative in `[0, 1)`.
    pub fn to_f64(&self) -> f64 {
        match *self {
            Phase::Rational(r) => *r.numer() as f64 / *r.denom() as f64,
            Phase::Float(x) => x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Phase::Rational(r) => r.is_zero(),
            Phase::Float(x) => x == 0.0,
        }
    }

    pub fn add(&self, other: &Phase) -> Phase {
        if let (Phase::Rational(a), Phase::Rational(b)) = (self, other) {
            if let Some(s) = a.checked_add(b) {
                return Phase::Rational(reduce_ratio(s));
            }
        }
        Phase::Float(frac(self.to_f64() + other.to_f64()))
    }

    pub fn neg(&self) -> Phase {
        match *self {
            Phase::Rational(r) => Phase::Rational(reduce_ratio(-r)),
            Phase::Float(x) => Phase::Float(frac(-x)),
        }
    }

    pub fn sub(&self, other: &Phase) -> Phase {
        self.add(&other.neg())
    }

    pub fn mul_int(&self, k: i64) -> Phase {
        match *self {
            Phase::Rational(r) => {
                let k = Ratio::from_integer(k % *r.denom());
                match r.checked_mul(&k) {
                    Some(p) => Phase::Rational(reduce_ratio(p)),
                    None => Phase::Float(frac(self.to_f64() * k.to_integer() as f64)),
                }
            }
            Phase::Float(x) => Phase::Float(frac(x * k as f64)),
        }
    }

    /// `‖self‖`, the distance to 0 in ℝ/ℤ.
    pub fn norm(&self) -> f64 {
        circle_norm(self.to_f64())
    }

    /// Circular distance `‖self - other‖`.
    pub fn dist(&self, other: &Phase) -> f64 {
        self.sub(other).norm()
    }

    /// `e(self)`.
    pub fn to_unit(&self) -> Complex64 {
        match *self {
            Phase::Rational(r) => unit_from_units(*r.numer() as u64, *r.denom() as u64),
            Phase::Float(x) => unit(x),
        }
    }

    /// Denominator of the rational form.
    pub fn denom(&self) -> Option<u64> {
        self.as_ratio().map(|r| *r.denom() as u64)
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::zero()
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Phase::Rational(r) if r.is_zero() => write!(f, "0"),
            Phase::Rational(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            Phase::Float(x) => write!(f, "{x}"),
        }
    }
}

/// JSON form of a phase: `{"num": a, "den": b}` or a bare float.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhaseJson {
    Rational { num: i64, den: i64 },
    Float(f64),
}

impl From<Phase> for PhaseJson {
    fn from(p: Phase) -> Self {
        match p {
            Phase::Rational(r) => PhaseJson::Rational {
                num: *r.numer(),
                den: *r.denom(),
            },
            Phase::Float(x) => PhaseJson::Float(x),
        }
    }
}

impl TryFrom<PhaseJson> for Phase {
    type Error = Error;

    fn try_from(p: PhaseJson) -> Result<Phase> {
        match p {
            PhaseJson::Rational { num, den } => Phase::rational(num, den),
            PhaseJson::Float(x) => Phase::float(x),
        }
    }
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PhaseJson::from(*self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Phase {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PhaseJson::deserialize(d)?;
        Phase::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_is_reduced_mod_one() {
        assert_eq!(Phase::rational(7, 3).unwrap(), Phase::rational(1, 3).unwrap());
        assert_eq!(Phase::rational(-1, 3).unwrap(), Phase::rational(2, 3).unwrap());
        assert_eq!(Phase::rational(1, -4).unwrap(), Phase::rational(3, 4).unwrap());
        assert_eq!(Phase::rational(4, 2).unwrap(), Phase::zero());
        assert!(Phase::rational(1, 0).is_err());
    }

    #[test]
    fn arithmetic_stays_exact() {
        let a = Phase::rational(1, 3).unwrap();
        let b = Phase::rational(2, 3).unwrap();
        assert!(a.add(&b).is_zero());
        assert_eq!(a.mul_int(2), b);
        assert_eq!(a.neg(), b);
        assert_eq!(a.sub(&b), b);
        assert_eq!(b.sub(&a), a);
    }

    #[test]
    fn norms() {
        assert_eq!(Phase::rational(3, 4).unwrap().norm(), 0.25);
        assert!((circle_norm(-0.1 + 1e-17) - 0.1).abs() < 1e-15);
        assert!((Phase::float(0.95).unwrap().dist(&Phase::float(0.05).unwrap()) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn units_for_halves_are_exact() {
        assert_eq!(unit_from_units(1, 2), Complex64::new(-1.0, 0.0));
        assert_eq!(unit_from_units(0, 7), Complex64::new(1.0, 0.0));
        assert_eq!(Phase::rational(1, 2).unwrap().to_unit(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn json_forms() {
        let p: Phase = serde_json::from_str(r#"{"num": 5, "den": 3}"#).unwrap();
        assert_eq!(p, Phase::rational(2, 3).unwrap());
        let f: Phase = serde_json::from_str("1.25").unwrap();
        assert_eq!(f, Phase::Float(0.25));
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"{"num":2,"den":3}"#);
    }
}
