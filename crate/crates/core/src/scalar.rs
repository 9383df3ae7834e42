//! Scalar traits shared by the matrix and decomposition code.
//!
//! Matrices are generic over [`Scalar`]; inversion-dependent routines ask for
//! [`Field`], and the p-adic routines additionally need [`PAdicValued`].
//! Floats, big rationals, big integers, [`ZInvP`] and [`PAdicApprox`] all
//! implement the relevant subset.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::padic::{pow_p_rational, rational_residue, valuation_rational, PAdicApprox, Valuation, ZInvP};

/// A commutative ring element. `zero_like`/`one_like` take a witness so that
/// types carrying a prime or a precision can build constants in the same
/// context.
pub trait Scalar:
    Clone + PartialEq + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_value(&self) -> bool;
}

/// Scalars with a (partial) inverse.
pub trait Field: Scalar {
    fn try_inv(&self) -> Result<Self>;

    fn try_div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.clone() * rhs.try_inv()?)
    }
}

/// Scalars with a p-adic valuation.
pub trait PAdicValued: Sized {
    fn valuation_at(&self, p: u64) -> Result<Valuation>;

    /// Multiplies by `p^k`.
    fn mul_pow_p(&self, p: u64, k: i64) -> Self;

    /// Residue modulo `p^k` of a p-adic integer.
    fn residue_mod(&self, p: u64, k: u32) -> Result<u64>;
}

macro_rules! scalar_via_num_traits {
    ($($t:ty),*) => {$(
        impl Scalar for $t {
            fn zero_like(&self) -> Self {
                <$t as Zero>::zero()
            }
            fn one_like(&self) -> Self {
                <$t as One>::one()
            }
            fn is_zero_value(&self) -> bool {
                Zero::is_zero(self)
            }
        }
    )*};
}

scalar_via_num_traits!(f32, f64, i64, BigInt, BigRational);

impl Field for f32 {
    fn try_inv(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / self)
    }
}

impl Field for f64 {
    fn try_inv(&self) -> Result<Self> {
        if *self == 0.0 {
            return Err(Error::DivisionByZero);
        }
        Ok(1.0 / self)
    }
}

impl Field for BigRational {
    fn try_inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self.recip())
    }
}

/// Only `±p^k` are invertible in Z[1/p]; other inverses report
/// `NotInvertible`.
impl Field for ZInvP {
    fn try_inv(&self) -> Result<Self> {
        self.inv()
    }
}

impl PAdicValued for BigRational {
    fn valuation_at(&self, p: u64) -> Result<Valuation> {
        Ok(valuation_rational(self, p))
    }

    fn mul_pow_p(&self, p: u64, k: i64) -> Self {
        self * pow_p_rational(p, k)
    }

    fn residue_mod(&self, p: u64, k: u32) -> Result<u64> {
        rational_residue(self, p, k)
    }
}

impl PAdicValued for ZInvP {
    fn valuation_at(&self, p: u64) -> Result<Valuation> {
        if self.p() != p {
            return Err(Error::PrimeMismatch(self.p(), p));
        }
        Ok(self.valuation())
    }

    fn mul_pow_p(&self, _p: u64, k: i64) -> Self {
        ZInvP::mul_pow_p(self, k)
    }

    fn residue_mod(&self, p: u64, k: u32) -> Result<u64> {
        if self.p() != p {
            return Err(Error::PrimeMismatch(self.p(), p));
        }
        rational_residue(&self.to_rational(), p, k)
    }
}

impl PAdicValued for PAdicApprox {
    fn valuation_at(&self, p: u64) -> Result<Valuation> {
        if self.p() != p {
            return Err(Error::PrimeMismatch(self.p(), p));
        }
        self.valuation()
    }

    fn mul_pow_p(&self, _p: u64, k: i64) -> Self {
        PAdicApprox::mul_pow_p(self, k)
    }

    fn residue_mod(&self, p: u64, k: u32) -> Result<u64> {
        if self.p() != p {
            return Err(Error::PrimeMismatch(self.p(), p));
        }
        self.residue(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_plus_one<T: Scalar>(x: &T) -> T {
        x.clone() * x.clone() + x.one_like()
    }

    #[test]
    fn generic_code_runs_on_every_scalar() {
        assert_eq!(square_plus_one(&3.0f32), 10.0);
        assert_eq!(square_plus_one(&3.0f64), 10.0);
        assert_eq!(square_plus_one(&BigInt::from(3)), BigInt::from(10));
        let half = BigRational::new(1.into(), 2.into());
        assert_eq!(square_plus_one(&half), BigRational::new(5.into(), 4.into()));
        let z = ZInvP::new(2, BigInt::from(3), -1);
        assert_eq!(square_plus_one(&z), ZInvP::new(2, BigInt::from(13), -2));
    }

    #[test]
    fn field_division() {
        let a = BigRational::new(3.into(), 4.into());
        assert_eq!(a.try_div(&a).unwrap(), BigRational::one());
        assert!(BigRational::zero().try_inv().is_err());
        assert!(0.0f64.try_inv().is_err());
    }

    #[test]
    fn valuations_agree_across_types() {
        let q = BigRational::new(18.into(), 5.into());
        assert_eq!(q.valuation_at(3).unwrap(), Valuation::Finite(2));
        assert_eq!(ZInvP::from_int(3, 18).valuation_at(3).unwrap(), Valuation::Finite(2));
        assert!(ZInvP::from_int(3, 18).valuation_at(5).is_err());
        let a = PAdicApprox::from_zinvp(&ZInvP::from_int(3, 18), 4);
        assert_eq!(a.valuation_at(3).unwrap(), Valuation::Finite(2));
    }

    #[test]
    fn residues_agree_across_types() {
        let q = BigRational::new(1.into(), 2.into());
        assert_eq!(q.residue_mod(3, 4).unwrap(), 41);
        assert_eq!(ZInvP::from_int(5, -1).residue_mod(5, 2).unwrap(), 24);
        assert!(ZInvP::pow(5, -1).residue_mod(5, 2).is_err());
        let a = PAdicApprox::from_rational(3, &q, 4).unwrap();
        assert_eq!(a.residue_mod(3, 4).unwrap(), 41);
    }
}
