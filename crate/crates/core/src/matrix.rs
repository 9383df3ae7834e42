//! Generic 2x2 matrices.
//!
//! Entries are stored column-major: the first column is `(a, b)` and the
//! second is `(c, d)`, so the matrix reads
//!
//! ```text
//! [ a  c ]
//! [ b  d ]
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Float;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::padic::{PAdicApprox, ZInvP};
use crate::plane::QpVec2;
use crate::scalar::{Field, PAdicValued, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Scalar> Mat2<T> {
    /// `[[a, c], [b, d]]` given row by row.
    pub fn from_rows(top: [T; 2], bottom: [T; 2]) -> Self {
        let [a, c] = top;
        let [b, d] = bottom;
        Mat2 { a, b, c, d }
    }

    /// Columns `(a, b)` and `(c, d)`.
    pub fn from_cols(first: (T, T), second: (T, T)) -> Self {
        Mat2 { a: first.0, b: first.1, c: second.0, d: second.1 }
    }

    pub fn identity_like(w: &T) -> Self {
        Mat2 { a: w.one_like(), b: w.zero_like(), c: w.zero_like(), d: w.one_like() }
    }

    pub fn diag(x: T, y: T) -> Self {
        let z = x.zero_like();
        Mat2 { a: x, b: z.clone(), c: z, d: y }
    }

    /// Upper unipotent `[[1, x], [0, 1]]`.
    pub fn upper(x: T) -> Self {
        Mat2 { a: x.one_like(), b: x.zero_like(), c: x.clone(), d: x.one_like() }
    }

    /// Lower unipotent `[[1, 0], [z, 1]]`.
    pub fn lower(z: T) -> Self {
        Mat2 { a: z.one_like(), b: z.clone(), c: z.zero_like(), d: z.one_like() }
    }

    pub fn det(&self) -> T {
        self.a.clone() * self.d.clone() - self.b.clone() * self.c.clone()
    }

    pub fn trace(&self) -> T {
        self.a.clone() + self.d.clone()
    }

    /// Adjugate `[[d, -c], [-b, a]]`; the inverse when the determinant is one.
    pub fn adjugate(&self) -> Self {
        Mat2 { a: self.d.clone(), b: -self.b.clone(), c: -self.c.clone(), d: self.a.clone() }
    }

    pub fn transpose(&self) -> Self {
        Mat2 { a: self.a.clone(), b: self.c.clone(), c: self.b.clone(), d: self.d.clone() }
    }

    pub fn first_col(&self) -> (T, T) {
        (self.a.clone(), self.b.clone())
    }

    pub fn second_col(&self) -> (T, T) {
        (self.c.clone(), self.d.clone())
    }

    pub fn is_special_linear(&self) -> bool {
        let det = self.det();
        det == det.one_like()
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        Mat2 {
            a: self.a.clone() * o.a.clone() + self.c.clone() * o.b.clone(),
            b: self.b.clone() * o.a.clone() + self.d.clone() * o.b.clone(),
            c: self.a.clone() * o.c.clone() + self.c.clone() * o.d.clone(),
            d: self.b.clone() * o.c.clone() + self.d.clone() * o.d.clone(),
        }
    }

    pub fn apply(&self, v: (T, T)) -> (T, T) {
        (
            self.a.clone() * v.0.clone() + self.c.clone() * v.1.clone(),
            self.b.clone() * v.0 + self.d.clone() * v.1,
        )
    }

    pub fn map<U, F: FnMut(&T) -> U>(&self, mut f: F) -> Mat2<U> {
        Mat2 { a: f(&self.a), b: f(&self.b), c: f(&self.c), d: f(&self.d) }
    }

    pub fn try_map<U, F: FnMut(&T) -> Result<U>>(&self, mut f: F) -> Result<Mat2<U>> {
        Ok(Mat2 { a: f(&self.a)?, b: f(&self.b)?, c: f(&self.c)?, d: f(&self.d)? })
    }

    pub fn entries(&self) -> [&T; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        Mat2 {
            a: self.a.clone() - o.a.clone(),
            b: self.b.clone() - o.b.clone(),
            c: self.c.clone() - o.c.clone(),
            d: self.d.clone() - o.d.clone(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|x| x.clone() * s.clone())
    }
}

impl<T: Field> Mat2<T> {
    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.is_zero_value() {
            return Err(Error::Singular);
        }
        let inv = det.try_inv()?;
        Ok(self.adjugate().scale(&inv))
    }

    /// `diag(u, u^{-1})`.
    pub fn torus(u: T) -> Result<Self> {
        let inv = u.try_inv()?;
        Ok(Self::diag(u, inv))
    }
}

impl<T: Scalar + PAdicValued> Mat2<T> {
    /// `diag(p^{-t}, p^t)` built in the scalar type of `w`.
    pub fn a_factor(w: &T, p: u64, t: i64) -> Self {
        let one = w.one_like();
        Self::diag(one.mul_pow_p(p, -t), one.mul_pow_p(p, t))
    }
}

impl<F: Float + Scalar> Mat2<F> {
    /// Rotation by `theta`: `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(theta: F) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2 { a: c, b: s, c: -s, d: c }
    }

    pub fn max_abs_diff(&self, o: &Self) -> F {
        let d = self.sub_ref(o);
        d.a.abs().max(d.b.abs()).max(d.c.abs()).max(d.d.abs())
    }
}

impl Mat2<ZInvP> {
    pub fn from_int_rows(p: u64, top: [i64; 2], bottom: [i64; 2]) -> Self {
        Mat2::from_rows(
            [ZInvP::from_int(p, top[0]), ZInvP::from_int(p, top[1])],
            [ZInvP::from_int(p, bottom[0]), ZInvP::from_int(p, bottom[1])],
        )
    }

    pub fn identity(p: u64) -> Self {
        Self::identity_like(&ZInvP::one(p))
    }

    pub fn to_rational(&self) -> Mat2<BigRational> {
        self.map(ZInvP::to_rational)
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        self.map(ZInvP::to_f64)
    }

    pub fn to_approx(&self, prec: u32) -> Mat2<PAdicApprox> {
        self.map(|x| PAdicApprox::from_zinvp(x, prec))
    }
}

impl Mat2<BigRational> {
    pub fn from_int_rows_q(top: [i64; 2], bottom: [i64; 2]) -> Self {
        let q = |n: i64| BigRational::from_integer(BigInt::from(n));
        Mat2::from_rows([q(top[0]), q(top[1])], [q(bottom[0]), q(bottom[1])])
    }

    pub fn to_f64(&self) -> Mat2<f64> {
        use num_traits::ToPrimitive;
        self.map(|x| x.to_f64().unwrap_or(f64::NAN))
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<'a, T: Scalar> Mul<&'a Mat2<T>> for &'a Mat2<T> {
    type Output = Mat2<T>;
    fn mul(self, rhs: &Mat2<T>) -> Mat2<T> {
        self.mul_ref(rhs)
    }
}

impl<T: Scalar + PAdicValued> Mat2<T> {
    pub fn apply_vec(&self, v: &QpVec2<T>) -> QpVec2<T> {
        let (x, y) = self.apply((v.x.clone(), v.y.clone()));
        QpVec2 { p: v.p, x, y }
    }
}

impl<T: fmt::Display> fmt::Display for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.c, self.b, self.d)
    }
}

/// Random element of Z[1/p] of the form `k * p^e` with `|k| <= p^3` and
/// `|e| <= 3`.
pub fn random_zinvp<R: Rng + ?Sized>(p: u64, rng: &mut R) -> ZInvP {
    let bound = (p * p * p) as i64;
    let k = rng.gen_range(-bound..=bound);
    let e = rng.gen_range(-3..=3);
    ZInvP::new(p, BigInt::from(k), e)
}

/// Random element of SL2(Z[1/p]) built from unipotent and diagonal
/// generators; `steps` controls the word length.
pub fn random_sl2_zinvp<R: Rng + ?Sized>(p: u64, steps: usize, rng: &mut R) -> Mat2<ZInvP> {
    let mut g = Mat2::identity(p);
    for _ in 0..steps {
        let gen = match rng.gen_range(0..3) {
            0 => Mat2::upper(random_zinvp(p, rng)),
            1 => Mat2::lower(random_zinvp(p, rng)),
            _ => {
                let e = rng.gen_range(-2..=2);
                let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
                Mat2::diag(ZInvP::new(p, BigInt::from(sign), e), ZInvP::new(p, BigInt::from(sign), -e))
            }
        };
        g = g * gen;
    }
    g
}

/// Haar-random element of SL2(Z_p) known modulo `p^prec`: a uniform element
/// of SL2(Z/p^prec) with entries lifted to truncated p-adic integers.
pub fn random_sl2_zp<R: Rng + ?Sized>(p: u64, prec: u32, rng: &mut R) -> Mat2<PAdicApprox> {
    let [a, b, c, d] = random_sl2_residue(p, prec, rng);
    let lift = |r: u64| PAdicApprox::from_residue(p, r, prec).expect("valid precision");
    Mat2 { a: lift(a), b: lift(b), c: lift(c), d: lift(d) }
}

/// Uniform element `[a, b, c, d]` (column-major) of SL2(Z/p^prec).
///
/// The first column is uniform among pairs with a unit entry; each such
/// column has exactly `p^prec` completions, one of which is drawn uniformly.
pub fn random_sl2_residue<R: Rng + ?Sized>(p: u64, prec: u32, rng: &mut R) -> [u64; 4] {
    use crate::padic::{inv_mod, mul_mod};
    let m = p.pow(prec);
    loop {
        let (a, b) = (rng.gen_range(0..m), rng.gen_range(0..m));
        if a % p != 0 {
            let c = rng.gen_range(0..m);
            let d = mul_mod((1 + mul_mod(b, c, m)) % m, inv_mod(a, m).expect("unit"), m);
            return [a, b, c, d];
        }
        if b % p != 0 {
            let d = rng.gen_range(0..m);
            let c = mul_mod((mul_mod(a, d, m) + m - 1) % m, inv_mod(b, m).expect("unit"), m);
            return [a, b, c, d];
        }
    }
}
