//! Exact arithmetic in Z[1/p] and truncated arithmetic in Q_p.
//!
//! [`ZInvP`] is the exact scalar used everywhere the computation stays inside
//! Z[1/p]; [`PAdicApprox`] is a capped-relative-precision p-adic number used
//! when units must be inverted or when sampling Haar-random p-adic integers.

mod approx;
mod zinvp;

pub use approx::PAdicApprox;
pub use zinvp::ZInvP;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Default number of relative p-adic digits carried by truncated values.
pub const DEFAULT_PRECISION: u32 = 8;

/// A p-adic valuation; `Infinity` is the valuation of zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinity)
    }

    /// The absolute value `p^{-v}` this valuation encodes.
    pub fn abs(self) -> PNorm {
        match self {
            Valuation::Finite(v) => PNorm::Pow(-v),
            Valuation::Infinity => PNorm::Zero,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

/// An exact power of p (or zero), as taken by p-adic absolute values, norms
/// and operator norms. `Pow(e)` stands for `p^e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PNorm {
    Zero,
    Pow(i64),
}

impl PNorm {
    pub const ONE: PNorm = PNorm::Pow(0);

    pub fn exponent(self) -> Option<i64> {
        match self {
            PNorm::Zero => None,
            PNorm::Pow(e) => Some(e),
        }
    }

    pub fn to_rational(self, p: u64) -> BigRational {
        match self {
            PNorm::Zero => BigRational::zero(),
            PNorm::Pow(e) => pow_p_rational(p, e),
        }
    }
}

impl std::ops::Mul for PNorm {
    type Output = PNorm;

    // Exponents add.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: PNorm) -> PNorm {
        match (self, other) {
            (PNorm::Pow(a), PNorm::Pow(b)) => PNorm::Pow(a + b),
            _ => PNorm::Zero,
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::Zero => write!(f, "0"),
            PNorm::Pow(e) => write!(f, "p^{e}"),
        }
    }
}

/// The fixed prime and the relative precision used for truncated values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeCtx {
    p: u64,
    precision: u32,
}

impl PrimeCtx {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision == 0 || checked_pow(p, precision).is_none_or(|m| m >= 1 << 63) {
            return Err(Error::BadPrecision { p, precision });
        }
        Ok(PrimeCtx { p, precision })
    }

    pub fn with_default_precision(p: u64) -> Result<Self> {
        Self::new(p, DEFAULT_PRECISION)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.precision)
    }

    pub fn zinvp(&self, n: i64) -> ZInvP {
        ZInvP::from_int(self.p, n)
    }

    pub fn approx(&self, x: &ZInvP) -> PAdicApprox {
        PAdicApprox::from_zinvp(x, self.precision)
    }
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    if m <= u32::MAX as u64 {
        (a % m) * (b % m) % m
    } else {
        ((a as u128 * b as u128) % m as u128) as u64
    }
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub(crate) fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd_i128(a as i128 % m as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

fn ext_gcd_i128(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

pub(crate) fn checked_pow(p: u64, k: u32) -> Option<u64> {
    p.checked_pow(k)
}

/// `p^k` as a big integer, `k >= 0`.
pub fn pow_p(p: u64, k: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), k as usize)
}

/// `p^e` as an exact rational, any sign of `e`.
pub fn pow_p_rational(p: u64, e: i64) -> BigRational {
    let mag = pow_p(p, e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::one(), mag)
    }
}

/// Splits `n != 0` as `(n / p^v, v)` with the quotient coprime to p.
pub fn strip_p_int(n: &BigInt, p: u64) -> (BigInt, i64) {
    debug_assert!(!n.is_zero());
    if let Some(mut small) = n.to_i64() {
        let pi = p as i64;
        if p <= i64::MAX as u64 {
            let mut v = 0;
            while small % pi == 0 {
                small /= pi;
                v += 1;
            }
            return (BigInt::from(small), v);
        }
    }
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (m, v)
}

/// p-adic valuation of an integer.
pub fn valuation_int(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        Valuation::Infinity
    } else {
        Valuation::Finite(strip_p_int(n, p).1)
    }
}

/// p-adic valuation of a rational.
pub fn valuation_rational(x: &BigRational, p: u64) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinity;
    }
    let vn = strip_p_int(x.numer(), p).1;
    let vd = strip_p_int(x.denom(), p).1;
    Valuation::Finite(vn - vd)
}

/// Residue of a p-integral rational modulo `p^n`, in `[0, p^n)`.
pub fn rational_residue(x: &BigRational, p: u64, n: u32) -> Result<u64> {
    let modulus = checked_pow(p, n).ok_or(Error::BadPrecision { p, precision: n })?;
    if x.is_zero() {
        return Ok(0);
    }
    if let Valuation::Finite(v) = valuation_rational(x, p) {
        if v < 0 {
            return Err(Error::InsufficientPrecision { needed: 0, available: v });
        }
    }
    let mb = BigInt::from(modulus);
    let num = x.numer().mod_floor(&mb).to_u64().unwrap_or(0);
    let den = x.denom().mod_floor(&mb).to_u64().unwrap_or(0);
    if modulus == 1 {
        return Ok(0);
    }
    let inv = inv_mod(den, modulus).ok_or(Error::DivisionByZero)?;
    Ok(mul_mod(num, inv, modulus))
}

/// Unit part of a nonzero rational: `x / p^{v(x)}`.
pub fn rational_unit_part(x: &BigRational, p: u64) -> Result<(BigRational, i64)> {
    if x.is_zero() {
        return Err(Error::ZeroInput);
    }
    let (n, vn) = strip_p_int(x.numer(), p);
    let (d, vd) = strip_p_int(x.denom(), p);
    Ok((BigRational::new(n, d), vn - vd))
}

/// The fractional part `{x}` of a rational viewed in Q_p: the unique element of
/// Z[1/p] with `0 <= {x} < 1` and `x - {x}` a p-adic integer.
pub fn rational_frac_part(x: &BigRational, p: u64) -> ZInvP {
    match valuation_rational(x, p) {
        Valuation::Infinity => ZInvP::zero(p),
        Valuation::Finite(v) if v >= 0 => ZInvP::zero(p),
        Valuation::Finite(v) => {
            let k = (-v) as u32;
            // x * p^k is p-integral; its residue mod p^k gives the digits below 0.
            let scaled = x * BigRational::from_integer(pow_p(p, k));
            let pk = pow_p(p, k);
            let num = scaled.numer().mod_floor(&pk);
            let den = scaled.denom().mod_floor(&pk);
            let den_inv = big_inv_mod(&den, &pk).expect("denominator is a p-unit");
            let digits = (num * den_inv).mod_floor(&pk);
            ZInvP::new(p, digits, v)
        }
    }
}

pub(crate) fn big_inv_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if !e.gcd.abs().is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}
