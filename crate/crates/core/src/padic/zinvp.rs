use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use super::{pow_p, strip_p_int, PNorm, Valuation};
use crate::error::{Error, Result};

/// An exact element `m * p^e` of Z[1/p], kept in canonical form: `m = 0`
/// forces `e = 0`, otherwise `p` does not divide `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZInvP {
    p: u64,
    m: BigInt,
    e: i64,
}

impl ZInvP {
    /// Builds `m * p^e` and canonicalizes.
    pub fn new(p: u64, m: BigInt, e: i64) -> Self {
        if m.is_zero() {
            return ZInvP { p, m, e: 0 };
        }
        let (m, v) = strip_p_int(&m, p);
        ZInvP { p, m, e: e + v }
    }

    pub fn zero(p: u64) -> Self {
        ZInvP { p, m: BigInt::zero(), e: 0 }
    }

    pub fn one(p: u64) -> Self {
        ZInvP { p, m: BigInt::one(), e: 0 }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::new(p, BigInt::from(n), 0)
    }

    pub fn from_bigint(p: u64, n: BigInt) -> Self {
        Self::new(p, n, 0)
    }

    /// `p^e`.
    pub fn pow(p: u64, e: i64) -> Self {
        ZInvP { p, m: BigInt::one(), e }
    }

    /// Converts a rational whose denominator is a power of `p`.
    pub fn from_rational(p: u64, q: &BigRational) -> Result<Self> {
        if q.is_zero() {
            return Ok(Self::zero(p));
        }
        let (d, vd) = strip_p_int(q.denom(), p);
        if !d.is_one() {
            return Err(Error::NotInvertible(format!("{q} has a denominator prime to {p}")));
        }
        Ok(Self::new(p, q.numer().clone(), -vd))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.m
    }

    pub fn exponent(&self) -> i64 {
        self.e
    }

    pub fn is_zero(&self) -> bool {
        self.m.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.e == 0 && self.m.is_one()
    }

    /// True when the value is an ordinary integer.
    pub fn is_integer(&self) -> bool {
        self.is_zero() || self.e >= 0
    }

    pub fn is_negative(&self) -> bool {
        self.m.is_negative()
    }

    pub fn valuation(&self) -> Valuation {
        if self.is_zero() {
            Valuation::Infinity
        } else {
            Valuation::Finite(self.e)
        }
    }

    pub fn abs_p(&self) -> PNorm {
        self.valuation().abs()
    }

    /// `(u, v)` with `x = u * p^v` and `u` a p-adic unit.
    pub fn unit_decompose(&self) -> Result<(BigInt, i64)> {
        if self.is_zero() {
            return Err(Error::ZeroInput);
        }
        Ok((self.m.clone(), self.e))
    }

    pub fn to_rational(&self) -> BigRational {
        if self.e >= 0 {
            BigRational::from_integer(&self.m * pow_p(self.p, self.e as u32))
        } else {
            BigRational::new(self.m.clone(), pow_p(self.p, (-self.e) as u32))
        }
    }

    /// The integer value, when there is one.
    pub fn to_bigint(&self) -> Option<BigInt> {
        if !self.is_integer() {
            return None;
        }
        Some(&self.m * pow_p(self.p, self.e.max(0) as u32))
    }

    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Multiplies by `p^k`.
    pub fn mul_pow_p(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        ZInvP { p: self.p, m: self.m.clone(), e: self.e + k }
    }

    /// Exact inverse; only `±p^k` are units of Z[1/p].
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if !self.m.abs().is_one() {
            return Err(Error::NotInvertible(self.to_string()));
        }
        Ok(ZInvP { p: self.p, m: self.m.clone(), e: -self.e })
    }

    /// The p-adic fractional part: `0 <= {x} < 1` with `x - {x}` in Z_p.
    pub fn frac_part(&self) -> ZInvP {
        if self.is_integer() {
            return Self::zero(self.p);
        }
        let k = (-self.e) as u32;
        let pk = pow_p(self.p, k);
        ZInvP::new(self.p, self.m.mod_floor(&pk), self.e)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        self.to_rational().floor().to_integer()
    }

    /// Form `m/p^k` with `k >= 0` (integers print plainly).
    pub fn to_fraction_string(&self) -> String {
        if self.is_integer() {
            self.to_bigint().unwrap_or_default().to_string()
        } else {
            format!("{}/{}^{}", self.m, self.p, -self.e)
        }
    }

    /// Parses either `m*p^e` or `m/p^k` (or a plain integer). The base in the
    /// text must equal `p`.
    pub fn parse(p: u64, s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("cannot read {s:?} as an element of Z[1/{p}]"));
        let parse_int = |t: &str| BigInt::from_str(t.trim()).map_err(|_| bad());
        let parse_pow = |t: &str| -> Result<i64> {
            let (base, exp) = t.split_once('^').ok_or_else(bad)?;
            if base.trim().parse::<u64>().map_err(|_| bad())? != p {
                return Err(Error::PrimeMismatch(base.trim().parse().unwrap_or(0), p));
            }
            exp.trim().parse::<i64>().map_err(|_| bad())
        };
        if let Some((m, rest)) = s.split_once('*') {
            Ok(Self::new(p, parse_int(m)?, parse_pow(rest)?))
        } else if let Some((m, rest)) = s.split_once('/') {
            let k = if rest.contains('^') {
                parse_pow(rest)?
            } else {
                let d: u64 = rest.trim().parse().map_err(|_| bad())?;
                let (unit, v) = strip_p_int(&BigInt::from(d), p);
                if !unit.is_one() {
                    return Err(bad());
                }
                v
            };
            Ok(Self::new(p, parse_int(m)?, -k))
        } else {
            Ok(Self::new(p, parse_int(s)?, 0))
        }
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.p, other.p, "ZInvP operands over different primes");
    }
}

impl fmt::Display for ZInvP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}^{}", self.m, self.p, self.e)
    }
}

impl PartialOrd for ZInvP {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ZInvP {
    fn cmp(&self, other: &Self) -> Ordering {
        self.to_rational().cmp(&other.to_rational())
    }
}

fn add_impl(x: &ZInvP, y: &ZInvP) -> ZInvP {
    x.check_prime(y);
    if x.is_zero() {
        return y.clone();
    }
    if y.is_zero() {
        return x.clone();
    }
    let e = x.e.min(y.e);
    let mx = &x.m * pow_p(x.p, (x.e - e) as u32);
    let my = &y.m * pow_p(x.p, (y.e - e) as u32);
    ZInvP::new(x.p, mx + my, e)
}

impl Add for ZInvP {
    type Output = ZInvP;
    fn add(self, rhs: ZInvP) -> ZInvP {
        add_impl(&self, &rhs)
    }
}

impl<'a> Add<&'a ZInvP> for &'a ZInvP {
    type Output = ZInvP;
    fn add(self, rhs: &ZInvP) -> ZInvP {
        add_impl(self, rhs)
    }
}

impl Neg for ZInvP {
    type Output = ZInvP;
    fn neg(self) -> ZInvP {
        ZInvP { p: self.p, m: -self.m, e: self.e }
    }
}

impl Neg for &ZInvP {
    type Output = ZInvP;
    fn neg(self) -> ZInvP {
        ZInvP { p: self.p, m: -&self.m, e: self.e }
    }
}

impl Sub for ZInvP {
    type Output = ZInvP;
    fn sub(self, rhs: ZInvP) -> ZInvP {
        add_impl(&self, &-rhs)
    }
}

impl<'a> Sub<&'a ZInvP> for &'a ZInvP {
    type Output = ZInvP;
    fn sub(self, rhs: &ZInvP) -> ZInvP {
        add_impl(self, &-rhs)
    }
}

fn mul_impl(x: &ZInvP, y: &ZInvP) -> ZInvP {
    x.check_prime(y);
    if x.is_zero() || y.is_zero() {
        return ZInvP::zero(x.p);
    }
    // Both mantissas are prime to p, so the product already is canonical.
    ZInvP { p: x.p, m: &x.m * &y.m, e: x.e + y.e }
}

impl Mul for ZInvP {
    type Output = ZInvP;
    fn mul(self, rhs: ZInvP) -> ZInvP {
        mul_impl(&self, &rhs)
    }
}

impl<'a> Mul<&'a ZInvP> for &'a ZInvP {
    type Output = ZInvP;
    fn mul(self, rhs: &ZInvP) -> ZInvP {
        mul_impl(self, rhs)
    }
}

impl crate::scalar::Scalar for ZInvP {
    fn zero_like(&self) -> Self {
        ZInvP::zero(self.p)
    }
    fn one_like(&self) -> Self {
        ZInvP::one(self.p)
    }
    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl Serialize for ZInvP {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ZInvP {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let (_, rest) = s
            .split_once('*')
            .ok_or_else(|| serde::de::Error::custom("expected m*p^e"))?;
        let (base, _) = rest
            .split_once('^')
            .ok_or_else(|| serde::de::Error::custom("expected m*p^e"))?;
        let p: u64 = base.trim().parse().map_err(serde::de::Error::custom)?;
        ZInvP::parse(p, &s).map_err(serde::de::Error::custom)
    }
}
