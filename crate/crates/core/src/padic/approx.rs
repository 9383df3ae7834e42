use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{inv_mod, mul_mod, pow_mod, rational_frac_part, valuation_rational, Valuation, ZInvP};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    /// Exact zero.
    Zero,
    /// Known only to be `O(p^abs_prec)`; may or may not be zero.
    Exhausted { abs_prec: i64 },
    /// `unit * p^val + O(p^{val + prec})`, `unit` taken mod `p^prec`.
    Known { val: i64, unit: u64, prec: u32 },
}

/// A truncated element of Q_p: valuation, unit residue and relative precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PAdicApprox {
    p: u64,
    kind: Kind,
}

impl PAdicApprox {
    pub fn zero(p: u64) -> Self {
        PAdicApprox { p, kind: Kind::Zero }
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::from_parts(p, 0, 1, prec).expect("1 is a unit")
    }

    /// The sentinel for a value only known to lie in `p^abs_prec Z_p`.
    pub fn exhausted(p: u64, abs_prec: i64) -> Self {
        PAdicApprox { p, kind: Kind::Exhausted { abs_prec } }
    }

    /// `unit * p^val + O(p^{val+prec})`; `unit` must be prime to p.
    pub fn from_parts(p: u64, val: i64, unit: u64, prec: u32) -> Result<Self> {
        let modulus = modulus(p, prec)?;
        let unit = unit % modulus;
        if unit.is_multiple_of(p) {
            return Err(Error::NotInvertible(format!("{unit} is not a {p}-adic unit")));
        }
        Ok(PAdicApprox { p, kind: Kind::Known { val, unit, prec } })
    }

    /// The integer `r` known modulo `p^abs_prec` (uniform residues give Haar
    /// samples of Z_p).
    pub fn from_residue(p: u64, r: u64, abs_prec: u32) -> Result<Self> {
        let m = modulus(p, abs_prec)?;
        let mut r = r % m;
        if r == 0 {
            return Ok(Self::exhausted(p, abs_prec as i64));
        }
        let mut v = 0u32;
        while r.is_multiple_of(p) {
            r /= p;
            v += 1;
        }
        Self::from_parts(p, v as i64, r, abs_prec - v)
    }

    pub fn from_zinvp(x: &ZInvP, prec: u32) -> Self {
        let p = x.p();
        if x.is_zero() {
            return Self::zero(p);
        }
        let m = modulus(p, prec).expect("precision validated by the caller");
        let unit = x.mantissa().mod_floor(&BigInt::from(m)).to_u64().expect("residue fits");
        PAdicApprox { p, kind: Kind::Known { val: x.exponent(), unit, prec } }
    }

    pub fn from_rational(p: u64, q: &BigRational, prec: u32) -> Result<Self> {
        let Valuation::Finite(v) = valuation_rational(q, p) else {
            return Ok(Self::zero(p));
        };
        let m = modulus(p, prec)?;
        let unit_part = q * super::pow_p_rational(p, -v);
        let unit = super::rational_residue(&unit_part, p, prec)?;
        debug_assert!(m > unit);
        Self::from_parts(p, v, unit, prec)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self.kind, Kind::Zero)
    }

    pub fn is_exhausted(&self) -> bool {
        matches!(self.kind, Kind::Exhausted { .. })
    }

    /// Valuation; errors on the precision-exhausted sentinel.
    pub fn valuation(&self) -> Result<Valuation> {
        match self.kind {
            Kind::Zero => Ok(Valuation::Infinity),
            Kind::Exhausted { abs_prec } => Err(Error::PrecisionExhausted { abs_prec }),
            Kind::Known { val, .. } => Ok(Valuation::Finite(val)),
        }
    }

    /// A lower bound for the valuation, valid for every kind.
    pub fn valuation_lower_bound(&self) -> Valuation {
        match self.kind {
            Kind::Zero => Valuation::Infinity,
            Kind::Exhausted { abs_prec } => Valuation::Finite(abs_prec),
            Kind::Known { val, .. } => Valuation::Finite(val),
        }
    }

    pub fn unit(&self) -> Option<u64> {
        match self.kind {
            Kind::Known { unit, .. } => Some(unit),
            _ => None,
        }
    }

    /// Relative precision (number of known unit digits).
    pub fn relative_precision(&self) -> u32 {
        match self.kind {
            Kind::Known { prec, .. } => prec,
            _ => 0,
        }
    }

    /// Absolute precision `val + prec`; `None` for exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        match self.kind {
            Kind::Zero => None,
            Kind::Exhausted { abs_prec } => Some(abs_prec),
            Kind::Known { val, prec, .. } => Some(val + prec as i64),
        }
    }

    /// `(unit, valuation)` for a value that is known to be nonzero.
    pub fn unit_decompose(&self) -> Result<(u64, i64)> {
        match self.kind {
            Kind::Zero => Err(Error::ZeroInput),
            Kind::Exhausted { abs_prec } => Err(Error::PrecisionExhausted { abs_prec }),
            Kind::Known { val, unit, .. } => Ok((unit, val)),
        }
    }

    /// The canonical exact lift `unit * p^val` (zero for the sentinels).
    pub fn lift(&self) -> ZInvP {
        match self.kind {
            Kind::Known { val, unit, .. } => ZInvP::new(self.p, BigInt::from(unit), val),
            _ => ZInvP::zero(self.p),
        }
    }

    /// Whether `x` is consistent with this truncation.
    pub fn agrees_with(&self, x: &ZInvP) -> bool {
        match self.absolute_precision() {
            None => x.is_zero(),
            Some(abs) => {
                let diff = &x.clone() - &self.lift();
                diff.is_zero() || diff.exponent() >= abs
            }
        }
    }

    /// Residue modulo `p^k` of a p-adic integer known to absolute precision at
    /// least `k`.
    pub fn residue(&self, k: u32) -> Result<u64> {
        let m = modulus(self.p, k)?;
        match self.kind {
            Kind::Zero => Ok(0),
            Kind::Exhausted { abs_prec } => {
                if abs_prec >= k as i64 {
                    Ok(0)
                } else {
                    Err(Error::InsufficientPrecision { needed: k as i64, available: abs_prec })
                }
            }
            Kind::Known { val, unit, prec } => {
                if val < 0 {
                    return Err(Error::InsufficientPrecision { needed: 0, available: val });
                }
                if val + (prec as i64) < k as i64 {
                    return Err(Error::InsufficientPrecision {
                        needed: k as i64,
                        available: val + prec as i64,
                    });
                }
                if val >= k as i64 {
                    return Ok(0);
                }
                Ok(mul_mod(unit, pow_mod(self.p, val as u64, m), m))
            }
        }
    }

    /// The fractional part `{α}`: requires every digit below `p^0` to be known.
    pub fn frac_part(&self) -> Result<ZInvP> {
        match self.kind {
            Kind::Zero => Ok(ZInvP::zero(self.p)),
            Kind::Exhausted { abs_prec } => {
                if abs_prec >= 0 {
                    Ok(ZInvP::zero(self.p))
                } else {
                    Err(Error::InsufficientPrecision { needed: 0, available: abs_prec })
                }
            }
            Kind::Known { val, prec, .. } => {
                if val + prec as i64 >= 0 {
                    Ok(rational_frac_part(&self.lift().to_rational(), self.p))
                } else {
                    Err(Error::InsufficientPrecision { needed: 0, available: val + prec as i64 })
                }
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self.kind {
            Kind::Zero => Err(Error::DivisionByZero),
            Kind::Exhausted { abs_prec } => Err(Error::PrecisionExhausted { abs_prec }),
            Kind::Known { val, unit, prec } => {
                let m = modulus(self.p, prec)?;
                let inv = inv_mod(unit, m).expect("units are invertible");
                Ok(PAdicApprox { p: self.p, kind: Kind::Known { val: -val, unit: inv, prec } })
            }
        }
    }

    /// Multiplies by `p^k` exactly.
    pub fn mul_pow_p(&self, k: i64) -> Self {
        let kind = match self.kind {
            Kind::Zero => Kind::Zero,
            Kind::Exhausted { abs_prec } => Kind::Exhausted { abs_prec: abs_prec + k },
            Kind::Known { val, unit, prec } => Kind::Known { val: val + k, unit, prec },
        };
        PAdicApprox { p: self.p, kind }
    }

    /// Drops relative precision to at most `prec` digits.
    pub fn truncate(&self, prec: u32) -> Self {
        match self.kind {
            Kind::Known { val, unit, prec: old } if old > prec => {
                if prec == 0 {
                    return Self::exhausted(self.p, val);
                }
                let m = modulus(self.p, prec).expect("smaller than an existing modulus");
                PAdicApprox { p: self.p, kind: Kind::Known { val, unit: unit % m, prec } }
            }
            _ => *self,
        }
    }

    /// Errors when the value is the precision-exhausted sentinel.
    pub fn require_known(self) -> Result<Self> {
        match self.kind {
            Kind::Exhausted { abs_prec } => Err(Error::PrecisionExhausted { abs_prec }),
            _ => Ok(self),
        }
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "PAdicApprox operands over different primes");
    }
}

fn modulus(p: u64, prec: u32) -> Result<u64> {
    match p.checked_pow(prec) {
        Some(m) if m < 1 << 63 => Ok(m),
        _ => Err(Error::BadPrecision { p, precision: prec }),
    }
}

fn add_impl(x: &PAdicApprox, y: &PAdicApprox) -> PAdicApprox {
    x.check_prime(y);
    let p = x.p;
    match (x.kind, y.kind) {
        (Kind::Zero, _) => *y,
        (_, Kind::Zero) => *x,
        (Kind::Exhausted { abs_prec: a }, Kind::Exhausted { abs_prec: b }) => PAdicApprox::exhausted(p, a.min(b)),
        (Kind::Exhausted { abs_prec: a }, Kind::Known { val, unit, prec })
        | (Kind::Known { val, unit, prec }, Kind::Exhausted { abs_prec: a }) => {
            let abs = a.min(val + prec as i64);
            if val >= abs {
                return PAdicApprox::exhausted(p, abs);
            }
            PAdicApprox { p, kind: Kind::Known { val, unit, prec } }.truncate((abs - val) as u32)
        }
        (Kind::Known { val: v1, unit: u1, prec: n1 }, Kind::Known { val: v2, unit: u2, prec: n2 }) => {
            let abs = (v1 + n1 as i64).min(v2 + n2 as i64);
            let vmin = v1.min(v2);
            if abs <= vmin {
                return PAdicApprox::exhausted(p, abs);
            }
            let r = (abs - vmin) as u32;
            let m = modulus(p, r).expect("bounded by an operand modulus");
            let shift = |d: i64| if d as u64 >= r as u64 { 0 } else { pow_mod(p, d as u64, m) };
            let s = (mul_mod(u1, shift(v1 - vmin), m) + mul_mod(u2, shift(v2 - vmin), m)) % m;
            if s == 0 {
                return PAdicApprox::exhausted(p, abs);
            }
            let mut s = s;
            let mut k = 0u32;
            while s.is_multiple_of(p) {
                s /= p;
                k += 1;
            }
            let prec = r - k;
            let unit = s % modulus(p, prec).expect("smaller modulus");
            PAdicApprox { p, kind: Kind::Known { val: vmin + k as i64, unit, prec } }
        }
    }
}

fn mul_impl(x: &PAdicApprox, y: &PAdicApprox) -> PAdicApprox {
    x.check_prime(y);
    let p = x.p;
    match (x.kind, y.kind) {
        (Kind::Zero, _) | (_, Kind::Zero) => PAdicApprox::zero(p),
        (Kind::Exhausted { abs_prec: a }, Kind::Exhausted { abs_prec: b }) => PAdicApprox::exhausted(p, a + b),
        (Kind::Exhausted { abs_prec: a }, Kind::Known { val, .. })
        | (Kind::Known { val, .. }, Kind::Exhausted { abs_prec: a }) => PAdicApprox::exhausted(p, a + val),
        (Kind::Known { val: v1, unit: u1, prec: n1 }, Kind::Known { val: v2, unit: u2, prec: n2 }) => {
            let prec = n1.min(n2);
            let m = modulus(p, prec).expect("bounded by an operand modulus");
            PAdicApprox { p, kind: Kind::Known { val: v1 + v2, unit: mul_mod(u1, u2, m), prec } }
        }
    }
}

impl Add for PAdicApprox {
    type Output = PAdicApprox;
    fn add(self, rhs: Self) -> Self {
        add_impl(&self, &rhs)
    }
}

impl Neg for PAdicApprox {
    type Output = PAdicApprox;
    fn neg(self) -> Self {
        match self.kind {
            Kind::Known { val, unit, prec } => {
                let m = modulus(self.p, prec).expect("valid precision");
                PAdicApprox { p: self.p, kind: Kind::Known { val, unit: m - unit, prec } }
            }
            _ => self,
        }
    }
}

impl Sub for PAdicApprox {
    type Output = PAdicApprox;
    fn sub(self, rhs: Self) -> Self {
        add_impl(&self, &-rhs)
    }
}

impl Mul for PAdicApprox {
    type Output = PAdicApprox;
    fn mul(self, rhs: Self) -> Self {
        mul_impl(&self, &rhs)
    }
}

impl crate::scalar::Scalar for PAdicApprox {
    fn zero_like(&self) -> Self {
        PAdicApprox::zero(self.p)
    }
    fn one_like(&self) -> Self {
        // Exact ones have no precision of their own; use the largest precision
        // that still fits so they never limit a product.
        let mut prec = 1;
        while modulus(self.p, prec + 1).is_ok() {
            prec += 1;
        }
        PAdicApprox::one(self.p, prec)
    }
    fn is_zero_value(&self) -> bool {
        self.is_exact_zero()
    }
}

impl crate::scalar::Field for PAdicApprox {
    fn try_inv(&self) -> Result<Self> {
        self.inv()
    }
}

impl fmt::Display for PAdicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Zero => write!(f, "0"),
            Kind::Exhausted { abs_prec } => write!(f, "O({}^{})", self.p, abs_prec),
            Kind::Known { val, unit, prec } => {
                write!(f, "{}*{}^{} + O({}^{})", unit, self.p, val, self.p, val + prec as i64)
            }
        }
    }
}

/// Report form `{val, unit, prec, p}`. Exact zero has `val = null`; the
/// exhausted sentinel has `unit = null`, `prec = 0` and `val` set to the known
/// absolute precision.
#[derive(Serialize, Deserialize)]
struct ApproxRepr {
    val: Option<i64>,
    unit: Option<u64>,
    prec: u32,
    p: u64,
}

impl Serialize for PAdicApprox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = match self.kind {
            Kind::Zero => ApproxRepr { val: None, unit: None, prec: 0, p: self.p },
            Kind::Exhausted { abs_prec } => ApproxRepr { val: Some(abs_prec), unit: None, prec: 0, p: self.p },
            Kind::Known { val, unit, prec } => ApproxRepr { val: Some(val), unit: Some(unit), prec, p: self.p },
        };
        repr.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PAdicApprox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ApproxRepr::deserialize(d)?;
        match (r.val, r.unit) {
            (None, _) => Ok(PAdicApprox::zero(r.p)),
            (Some(a), None) => Ok(PAdicApprox::exhausted(r.p, a)),
            (Some(v), Some(u)) => PAdicApprox::from_parts(r.p, v, u, r.prec).map_err(serde::de::Error::custom),
        }
    }
}

impl PAdicApprox {
    /// The canonical lift as a rational.
    pub fn lift_rational(&self) -> BigRational {
        self.lift().to_rational()
    }

    /// Whether the value is known to be a p-adic integer.
    pub fn is_integral(&self) -> bool {
        match self.valuation_lower_bound() {
            Valuation::Infinity => true,
            Valuation::Finite(v) => v >= 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_example() {
        let a = PAdicApprox::from_parts(3, 1, 2, 4).unwrap();
        let inv = a.inv().unwrap();
        assert_eq!(inv.unit_decompose().unwrap(), (41, -1));
        assert_eq!(inv.relative_precision(), 4);
        assert_eq!((2 * 41) % 81, 1);
        let one = a * inv;
        assert_eq!(one.unit_decompose().unwrap(), (1, 0));
    }

    #[test]
    fn cancellation_gives_sentinel() {
        let x = PAdicApprox::from_parts(5, -2, 17, 6).unwrap();
        let s = x + (-x);
        assert!(s.is_exhausted());
        assert_eq!(s.absolute_precision(), Some(4));
        assert!(matches!(s.valuation(), Err(Error::PrecisionExhausted { abs_prec: 4 })));
    }

    #[test]
    fn partial_cancellation_loses_relative_precision() {
        // 1 + 3 + O(3^4) minus 1 + O(3^4) leaves 3 + O(3^4): three digits.
        let x = PAdicApprox::from_parts(3, 0, 4, 4).unwrap();
        let y = PAdicApprox::from_parts(3, 0, 1, 4).unwrap();
        let d = x - y;
        assert_eq!(d.unit_decompose().unwrap(), (1, 1));
        assert_eq!(d.relative_precision(), 3);
    }

    #[test]
    fn zinvp_conversion_agrees() {
        let x = ZInvP::new(7, BigInt::from(123456789), -3);
        let a = PAdicApprox::from_zinvp(&x, 5);
        assert!(a.agrees_with(&x));
        assert_eq!(a.valuation().unwrap(), x.valuation());
    }

    #[test]
    fn from_rational_matches_inverse() {
        let q = BigRational::new(BigInt::from(1), BigInt::from(2));
        let a = PAdicApprox::from_rational(3, &q, 4).unwrap();
        assert_eq!(a.unit(), Some(41));
    }

    #[test]
    fn frac_part_examples() {
        let third = PAdicApprox::from_parts(3, -1, 1, 8).unwrap();
        assert_eq!(third.frac_part().unwrap(), ZInvP::new(3, BigInt::from(1), -1));
        let integral = PAdicApprox::from_parts(3, 2, 5, 8).unwrap();
        assert!(integral.frac_part().unwrap().is_zero());
        let seven_quarters = PAdicApprox::from_rational(2, &BigRational::new(7.into(), 4.into()), 8).unwrap();
        assert_eq!(seven_quarters.frac_part().unwrap(), ZInvP::new(2, BigInt::from(3), -2));
        let too_coarse = PAdicApprox::from_parts(2, -5, 1, 3).unwrap();
        assert!(matches!(too_coarse.frac_part(), Err(Error::InsufficientPrecision { .. })));
    }

    #[test]
    fn residues() {
        let a = PAdicApprox::from_residue(2, 12, 5).unwrap();
        assert_eq!(a.unit_decompose().unwrap(), (3, 2));
        assert_eq!(a.residue(5).unwrap(), 12);
        assert_eq!(a.residue(2).unwrap(), 0);
        assert!(a.residue(6).is_err());
        assert!(PAdicApprox::from_residue(2, 0, 5).unwrap().is_exhausted());
    }

    #[test]
    fn json_form() {
        let a = PAdicApprox::from_parts(3, -1, 41, 4).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"val":-1,"unit":41,"prec":4,"p":3}"#);
        assert_eq!(serde_json::from_str::<PAdicApprox>(&s).unwrap(), a);
        let z = serde_json::to_string(&PAdicApprox::zero(5)).unwrap();
        assert_eq!(z, r#"{"val":null,"unit":null,"prec":0,"p":5}"#);
    }

    #[test]
    fn sentinel_times_zero_is_zero() {
        let e = PAdicApprox::exhausted(2, 3);
        assert!((e * PAdicApprox::zero(2)).is_exact_zero());
        assert_eq!((e * PAdicApprox::from_parts(2, 1, 1, 4).unwrap()).absolute_precision(), Some(4));
    }
}
