//! Real Iwasawa (KAN) decomposition of SL2(R) and the Bruhat-Iwasawa (QAN)
//! decomposition of the chart `|a|_p >= |b|_p` of SL2(Q_p).

use num_rational::BigRational;
use num_traits::{Float, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat2;
use crate::padic::{Valuation, ZInvP};
use crate::scalar::{Field, PAdicValued, Scalar};

/// `g = K(θ) · diag(α, 1/α) · n(x)` with `K(θ)` the rotation by θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IwasawaRealFactors<F> {
    pub theta: F,
    pub alpha: F,
    pub x: F,
}

/// Real Iwasawa factors of a rational matrix together with the exact data
/// membership tests use: `α²`, `x`, and the (unnormalized) first column.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactIwasawa {
    pub factors: IwasawaRealFactors<f64>,
    pub alpha_sq: BigRational,
    pub x: BigRational,
    pub column: (BigRational, BigRational),
}

fn float<F: Float>(v: f64) -> F {
    F::from(v).expect("every float type holds small constants")
}

/// Iwasawa factors of a floating-point matrix of determinant one.
pub fn iwasawa_real_float<F: Float + Scalar>(g: &Mat2<F>) -> Result<IwasawaRealFactors<F>> {
    let n2 = g.a * g.a + g.b * g.b;
    if n2 == F::zero() {
        return Err(Error::ZeroInput);
    }
    let mut theta = g.b.atan2(g.a);
    if theta < F::zero() {
        theta = theta + float(std::f64::consts::TAU);
    }
    Ok(IwasawaRealFactors { theta, alpha: n2.sqrt(), x: (g.a * g.c + g.b * g.d) / n2 })
}

/// Iwasawa factors of a rational matrix; `x = (ac+bd)/(a²+b²)` is computed
/// exactly before any conversion to floating point.
pub fn iwasawa_real(g: &Mat2<BigRational>) -> Result<ExactIwasawa> {
    if !g.is_special_linear() {
        return Err(Error::NotSpecialLinear);
    }
    let alpha_sq = &g.a * &g.a + &g.b * &g.b;
    if alpha_sq.is_zero() {
        return Err(Error::ZeroInput);
    }
    let x = (&g.a * &g.c + &g.b * &g.d) / &alpha_sq;
    let fa = g.a.to_f64().unwrap_or(f64::NAN);
    let fb = g.b.to_f64().unwrap_or(f64::NAN);
    let factors = IwasawaRealFactors {
        theta: crate::plane::angle_of(fa, fb),
        alpha: alpha_sq.to_f64().unwrap_or(f64::NAN).sqrt(),
        x: x.to_f64().unwrap_or(f64::NAN),
    };
    Ok(ExactIwasawa { factors, alpha_sq, x, column: (g.a.clone(), g.b.clone()) })
}

/// `K(θ) · diag(α, 1/α) · n(x)`.
pub fn compose_iwasawa<F: Float + Scalar>(f: &IwasawaRealFactors<F>) -> Mat2<F> {
    let k = Mat2::rotation(f.theta);
    let a = Mat2::diag(f.alpha, f.alpha.recip());
    let n = Mat2::upper(f.x);
    k * a * n
}

/// Coordinates `(u, m, t, β)` of `g = Q · A · N` with
/// `Q = [[u, 0], [m, u⁻¹]]`, `A = diag(p^{-t}, p^t)`, `N = [[1, β], [0, 1]]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BruhatFactors<T> {
    pub u: T,
    pub m: T,
    pub t: i64,
    pub beta: T,
}

impl<T: Field + PAdicValued> BruhatFactors<T> {
    pub fn q_factor(&self) -> Result<Mat2<T>> {
        let inv = self.u.try_inv()?;
        Ok(Mat2::from_cols((self.u.clone(), self.m.clone()), (self.u.zero_like(), inv)))
    }

    pub fn a_factor(&self, p: u64) -> Mat2<T> {
        Mat2::a_factor(&self.u, p, self.t)
    }

    pub fn n_factor(&self) -> Mat2<T> {
        Mat2::upper(self.beta.clone())
    }

    /// `|u|_p = 1` and `m ∈ Z_p`.
    pub fn validate(&self, p: u64) -> Result<()> {
        if self.u.valuation_at(p)? != Valuation::Finite(0) {
            return Err(Error::InvalidConfig("Bruhat u-coordinate must be a p-adic unit".into()));
        }
        if self.m.valuation_at(p)? < Valuation::Finite(0) {
            return Err(Error::InvalidConfig("Bruhat m-coordinate must be a p-adic integer".into()));
        }
        Ok(())
    }
}

/// `|a|_p >= |b|_p` for the first column `(a, b)`.
pub fn in_gplus<T: PAdicValued>(g: &Mat2<T>, p: u64) -> Result<bool> {
    Ok(g.a.valuation_at(p)? <= g.b.valuation_at(p)?)
}

/// Determinant one, exactly for exact scalars and up to the tracked
/// precision for truncated ones.
fn det_is_one<T: Scalar + PAdicValued>(g: &Mat2<T>, p: u64) -> bool {
    let diff = g.det() - g.a.one_like();
    diff.is_zero_value() || diff.valuation_at(p).is_err()
}

/// Bruhat-Iwasawa coordinates of `g` in the chart `|a|_p >= |b|_p`:
/// `u = a p^{-ν(a)}`, `m = b p^{-ν(a)}`, `t = -ν(a)`, `β = c / a`.
pub fn bruhat_padic<T: Field + PAdicValued>(g: &Mat2<T>, p: u64) -> Result<BruhatFactors<T>> {
    if !det_is_one(g, p) {
        return Err(Error::NotSpecialLinear);
    }
    if !in_gplus(g, p)? {
        return Err(Error::NotInGPlus);
    }
    let Valuation::Finite(v) = g.a.valuation_at(p)? else {
        return Err(Error::NotInGPlus);
    };
    let u = g.a.mul_pow_p(p, -v);
    let m = g.b.mul_pow_p(p, -v);
    let beta = g.c.try_div(&g.a)?;
    Ok(BruhatFactors { u, m, t: -v, beta })
}

/// `Q · A · N` from Bruhat coordinates.
pub fn compose_bruhat<T: Field + PAdicValued>(f: &BruhatFactors<T>, p: u64) -> Result<Mat2<T>> {
    f.validate(p)?;
    Ok(f.q_factor()? * f.a_factor(p) * f.n_factor())
}

/// Exact Bruhat coordinates of a Z[1/p] matrix. The coordinates `β = c/a` and
/// `u⁻¹` generally leave Z[1/p], so they are returned as rationals.
pub fn bruhat_exact(g: &Mat2<ZInvP>) -> Result<BruhatFactors<BigRational>> {
    let p = g.a.p();
    bruhat_padic(&g.to_rational(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_sl2_zinvp, random_sl2_zp};
    use num_bigint::BigInt;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn iwasawa_identity() {
        let f = iwasawa_real(&Mat2::from_int_rows_q([1, 0], [0, 1])).unwrap();
        assert_eq!(f.factors, IwasawaRealFactors { theta: 0.0, alpha: 1.0, x: 0.0 });
        assert_eq!(f.x, q(0, 1));
    }

    #[test]
    fn iwasawa_three_four_five() {
        let g = Mat2::from_int_rows_q([3, 2], [4, 3]);
        let f = iwasawa_real(&g).unwrap();
        assert_eq!(f.alpha_sq, q(25, 1));
        assert_eq!(f.x, q(18, 25));
        assert!((f.factors.alpha - 5.0).abs() < 1e-15);
        let back = compose_iwasawa(&f.factors);
        assert!(back.max_abs_diff(&g.to_f64()) < 1e-12);
    }

    #[test]
    fn compose_quarter_turn() {
        let g = compose_iwasawa(&IwasawaRealFactors { theta: FRAC_PI_2, alpha: 1.0, x: 0.0 });
        assert!(g.max_abs_diff(&Mat2::from_rows([0.0, -1.0], [1.0, 0.0])) < 1e-12);
    }

    #[test]
    fn iwasawa_generic_f32() {
        let g = Mat2::<f32>::from_rows([3.0, 2.0], [4.0, 3.0]);
        let f = iwasawa_real_float(&g).unwrap();
        assert!((f.alpha - 5.0).abs() < 1e-5);
        assert!(compose_iwasawa(&f).max_abs_diff(&g) < 1e-5);
    }

    #[test]
    fn iwasawa_rejects_non_sl2() {
        assert_eq!(iwasawa_real(&Mat2::from_int_rows_q([2, 0], [0, 1])), Err(Error::NotSpecialLinear));
    }

    #[test]
    fn gplus_membership() {
        assert!(in_gplus(&Mat2::identity(3), 3).unwrap());
        assert!(!in_gplus(&Mat2::from_int_rows(3, [3, 1], [1, 0]), 3).unwrap());
        assert!(in_gplus(&Mat2::from_int_rows(3, [1, 0], [3, 1]), 3).unwrap());
    }

    #[test]
    fn bruhat_examples() {
        let id = bruhat_exact(&Mat2::identity(5)).unwrap();
        assert_eq!(id, BruhatFactors { u: q(1, 1), m: q(0, 1), t: 0, beta: q(0, 1) });

        let p = 3;
        let a = Mat2::diag(ZInvP::pow(p, -1), ZInvP::pow(p, 1));
        let f = bruhat_exact(&a).unwrap();
        assert_eq!((f.u.clone(), f.m.clone(), f.t, f.beta.clone()), (q(1, 1), q(0, 1), 1, q(0, 1)));

        // [[2,1],[1,1]] over Q_3: a = 2 is a unit, so m = b = 1 and β = 1/2.
        let g = Mat2::from_int_rows(3, [2, 1], [1, 1]);
        let f = bruhat_exact(&g).unwrap();
        assert_eq!(f, BruhatFactors { u: q(2, 1), m: q(1, 1), t: 0, beta: q(1, 2) });
        assert_eq!(compose_bruhat(&f, 3).unwrap(), g.to_rational());
    }

    #[test]
    fn bruhat_rejects_outside_chart() {
        let h = Mat2::from_int_rows(3, [3, -1], [1, 0]);
        assert_eq!(bruhat_exact(&h), Err(Error::NotInGPlus));
        assert_eq!(bruhat_exact(&Mat2::from_int_rows(3, [1, 1], [0, 2])), Err(Error::NotSpecialLinear));
    }

    #[test]
    fn compose_identity_factors() {
        let f = BruhatFactors { u: q(1, 1), m: q(0, 1), t: 0, beta: q(0, 1) };
        assert_eq!(compose_bruhat(&f, 7).unwrap(), Mat2::from_int_rows_q([1, 0], [0, 1]));
    }

    #[test]
    fn bruhat_on_zinvp_when_factors_stay_in_ring() {
        let g = Mat2::from_int_rows(2, [1, 5], [4, 21]);
        let f = bruhat_padic(&g, 2).unwrap();
        assert_eq!(f.beta, ZInvP::from_int(2, 5));
        assert_eq!(compose_bruhat(&f, 2).unwrap(), g);
        let h = Mat2::from_int_rows(2, [3, 1], [2, 1]);
        assert!(matches!(bruhat_padic(&h, 2), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn bruhat_on_truncated_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut done = 0;
        while done < 200 {
            let g = random_sl2_zp(3, 6, &mut rng);
            if !in_gplus(&g, 3).unwrap_or(false) {
                continue;
            }
            let f = bruhat_padic(&g, 3).unwrap();
            let back = compose_bruhat(&f, 3).unwrap();
            for (x, y) in back.entries().into_iter().zip(g.entries()) {
                let diff = *x - *y;
                assert!(diff.is_exact_zero() || diff.is_exhausted(), "{diff}");
            }
            done += 1;
        }
    }

    #[test]
    fn round_trip_random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for p in [2, 3, 5] {
            let mut n = 0;
            while n < 300 {
                let g = random_sl2_zinvp(p, 5, &mut rng);
                if !in_gplus(&g, p).unwrap() {
                    continue;
                }
                let f = bruhat_exact(&g).unwrap();
                assert_eq!(compose_bruhat(&f, p).unwrap(), g.to_rational());
                assert_eq!(bruhat_padic(&compose_bruhat(&f, p).unwrap(), p).unwrap(), f);
                n += 1;
            }
        }
    }

    #[test]
    fn big_cell_frequency_grows_with_precision() {
        // The complement of the big cell is {a = 0}; at level N it shows up as
        // an unreadable a with frequency p^{-N}.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut misses = Vec::new();
        for n in 1..=4 {
            let miss = (0..4000).filter(|_| random_sl2_zp(2, n, &mut rng).a.valuation().is_err()).count();
            misses.push(miss);
        }
        assert!(misses.windows(2).all(|w| w[1] < w[0]), "{misses:?}");
    }
}
