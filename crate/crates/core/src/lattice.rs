//! Primitive vectors over Z and Z[1/p], the gcd equation, the fundamental
//! domain `[-1/2, 1/2) × Z_p` of Z[1/p] in R × Q_p, and the bijection
//! between primitive vectors and the matrices `γ_{v,D}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::decomp::{bruhat_exact, in_gplus, iwasawa_real};
use crate::error::{Error, Result};
use crate::matrix::Mat2;
use crate::padic::{valuation_rational, rational_frac_part, Valuation, ZInvP};
use crate::plane::{PAdicArc, QpVec2, RealArc};

/// A coprime integer pair.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimVecZ {
    a: BigInt,
    b: BigInt,
}

impl PrimVecZ {
    pub fn new(a: BigInt, b: BigInt) -> Result<Self> {
        if !is_primitive_z(&a, &b) {
            return Err(Error::NotPrimitive);
        }
        Ok(PrimVecZ { a, b })
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }
}

/// `gcd(a, b) = 1`.
pub fn is_primitive_z(a: &BigInt, b: &BigInt) -> bool {
    a.gcd(b).is_one()
}

/// A vector of Z[1/p]^2 whose gcd equation is solvable in Z[1/p].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrimVecZInvP {
    v: QpVec2<ZInvP>,
}

impl PrimVecZInvP {
    pub fn new(v: QpVec2<ZInvP>) -> Result<Self> {
        strip_p(&v)?;
        Ok(PrimVecZInvP { v })
    }

    pub fn from_ints(p: u64, a: i64, b: i64) -> Result<Self> {
        Self::new(QpVec2::from_ints(p, a, b))
    }

    pub fn p(&self) -> u64 {
        self.v.p
    }

    pub fn vec(&self) -> &QpVec2<ZInvP> {
        &self.v
    }

    pub fn a(&self) -> &ZInvP {
        &self.v.x
    }

    pub fn b(&self) -> &ZInvP {
        &self.v.y
    }

    /// Squared Euclidean norm, exactly.
    pub fn norm_sq(&self) -> BigRational {
        let a = self.v.x.to_rational();
        let b = self.v.y.to_rational();
        &a * &a + &b * &b
    }
}

/// Writes `v = p^α · w` with `w` a coprime integer pair. Fails with
/// `NotPrimitive` when the stripped pair still has a common factor.
pub fn strip_p(v: &QpVec2<ZInvP>) -> Result<(i64, PrimVecZ)> {
    let Valuation::Finite(alpha) = v.x.valuation().min(v.y.valuation()) else {
        return Err(Error::ZeroInput);
    };
    let w = v.scale_pow_p(-alpha);
    let a = w.x.to_bigint().expect("stripped coordinates are integers");
    let b = w.y.to_bigint().expect("stripped coordinates are integers");
    Ok((alpha, PrimVecZ::new(a, b)?))
}

/// A solution `(x0, y0)` of `a x0 + b y0 = 1` in Z[1/p].
pub fn gcd_solve(v: &QpVec2<ZInvP>) -> Result<(ZInvP, ZInvP)> {
    let p = v.p;
    let (alpha, w) = strip_p(v)?;
    let e = w.a.extended_gcd(&w.b);
    let (x, y) = if e.gcd.is_negative() { (-e.x, -e.y) } else { (e.x, e.y) };
    Ok((ZInvP::new(p, x, -alpha), ZInvP::new(p, y, -alpha)))
}

/// The fundamental domain `[-1/2, 1/2) × Z_p` for Z[1/p] embedded diagonally
/// in R × Q_p.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FundDomain;

impl FundDomain {
    pub fn contains(&self, p: u64, x: &BigRational, alpha: &BigRational) -> bool {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        -&half <= *x && *x < half && valuation_rational(alpha, p) >= Valuation::Finite(0)
    }
}

/// The unique `f ∈ Z[1/p]` with `(x - f, α - f) ∈ [-1/2, 1/2) × Z_p`:
/// `f = {α} + floor(x - {α} + 1/2)`.
pub fn fund_reduce(p: u64, x: &BigRational, alpha: &BigRational) -> ZInvP {
    let frac = rational_frac_part(alpha, p);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let m = (x - frac.to_rational() + half).floor().to_integer();
    frac + ZInvP::from_bigint(p, m)
}

/// `γ_{v,D} = [v⊥ | w]` for a primitive vector `v`.
///
/// The Bruhat chart needs `|top-left|_p >= |bottom-left|_p`. When `v = (a, b)`
/// has `|b|_p < |a|_p` the construction runs on the swapped vector `(b, a)`
/// and `swapped` is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaMatrix {
    pub gamma: Mat2<ZInvP>,
    pub v: PrimVecZInvP,
    pub swapped: bool,
    /// Real Iwasawa N-coordinate of `gamma`.
    pub x: BigRational,
    /// p-adic Bruhat N-coordinate of `gamma`.
    pub beta: BigRational,
}

impl GammaMatrix {
    pub fn w(&self) -> (ZInvP, ZInvP) {
        self.gamma.second_col()
    }

    /// The vector the construction actually ran on.
    pub fn chart_vector(&self) -> (ZInvP, ZInvP) {
        if self.swapped {
            (self.v.b().clone(), self.v.a().clone())
        } else {
            (self.v.a().clone(), self.v.b().clone())
        }
    }
}

pub fn gamma_from_prim(v: &PrimVecZInvP) -> Result<GammaMatrix> {
    let p = v.p();
    let swapped = v.b().valuation() > v.a().valuation();
    let (a, b) = if swapped { (v.b().clone(), v.a().clone()) } else { (v.a().clone(), v.b().clone()) };
    let (x0, y0) = gcd_solve(&QpVec2::new(p, a.clone(), b.clone()))?;
    // γ0 = [[b, x0], [-a, y0]] has determinant a x0 + b y0 = 1.
    let (ra, rb) = (a.to_rational(), b.to_rational());
    let (rx0, ry0) = (x0.to_rational(), y0.to_rational());
    let x_real = (&rb * &rx0 - &ra * &ry0) / (&ra * &ra + &rb * &rb);
    let beta0 = &rx0 / &rb;
    let f = fund_reduce(p, &x_real, &beta0);
    let rf = f.to_rational();
    // Shifting w by -f·v⊥ moves both N-coordinates by -f.
    let c = &x0 - &(&f * &b);
    let d = &y0 + &(&f * &a);
    let gamma = Mat2::from_cols((b, -a), (c, d));
    Ok(GammaMatrix { gamma, v: v.clone(), swapped, x: x_real - &rf, beta: beta0 - rf })
}

/// Box conditions on a primitive vector: `‖v‖ <= R`, `p^{t1} <= ‖v‖_p <= p^{t2}`,
/// real direction in `theta`, p-adic direction in `theta_p` (`None` = whole
/// circle).
#[derive(Clone, Debug)]
pub struct VectorBox {
    pub theta: RealArc,
    pub theta_p: Option<PAdicArc>,
    pub radius_sq: BigRational,
    pub t1: i64,
    pub t2: i64,
}

impl VectorBox {
    fn norm_ok(&self, t: i64) -> bool {
        self.t1 <= t && t <= self.t2
    }
}

/// Membership evaluated directly on `v`.
pub fn membership(v: &PrimVecZInvP, bx: &VectorBox) -> Result<bool> {
    if v.norm_sq() > bx.radius_sq {
        return Ok(false);
    }
    let Valuation::Finite(vmin) = v.vec().min_valuation()? else {
        return Err(Error::ZeroInput);
    };
    if !bx.norm_ok(-vmin) {
        return Ok(false);
    }
    if !bx.theta.contains_vec(v.a().to_f64(), v.b().to_f64()).is_inside() {
        return Ok(false);
    }
    match &bx.theta_p {
        None => Ok(true),
        Some(arc) => arc.contains(&v.vec().direction_p()?),
    }
}

/// Membership evaluated on the factors of `γ_{v,D}`: the real K- and A-factors
/// and the p-adic Q- and A-factors.
pub fn membership_via_factors(g: &GammaMatrix, bx: &VectorBox) -> Result<bool> {
    let p = g.v.p();
    let real = iwasawa_real(&g.gamma.to_rational())?;
    if real.alpha_sq > bx.radius_sq {
        return Ok(false);
    }
    if !in_gplus(&g.gamma, p)? {
        return Err(Error::NotInGPlus);
    }
    let bruhat = bruhat_exact(&g.gamma)?;
    if !bx.norm_ok(bruhat.t) {
        return Ok(false);
    }
    // The K-factor points along v⊥ = (b, -a); rotating by a quarter turn
    // recovers the chart vector, and undoing the swap recovers v.
    let (cx, cy) = real.column;
    let (vx, vy) = unswap(g.swapped, -cy, cx);
    use num_traits::ToPrimitive;
    let inside = bx
        .theta
        .contains_vec(vx.to_f64().unwrap_or(f64::NAN), vy.to_f64().unwrap_or(f64::NAN))
        .is_inside();
    if !inside {
        return Ok(false);
    }
    match &bx.theta_p {
        None => Ok(true),
        Some(arc) => {
            let (qx, qy) = unswap(g.swapped, -bruhat.m, bruhat.u);
            arc.contains(&QpVec2::new(p, qx, qy))
        }
    }
}

fn unswap<T>(swapped: bool, x: T, y: T) -> (T, T) {
    if swapped {
        (y, x)
    } else {
        (x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::iwasawa_real;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn zv(p: u64, x: ZInvP, y: ZInvP) -> QpVec2<ZInvP> {
        QpVec2::new(p, x, y)
    }

    #[test]
    fn primitivity_over_z() {
        let b = |n: i64| BigInt::from(n);
        assert!(is_primitive_z(&b(3), &b(5)));
        assert!(is_primitive_z(&b(0), &b(1)));
        assert!(!is_primitive_z(&b(0), &b(2)));
        for p in [2, 3, 5, 7, 11] {
            assert!(!is_primitive_z(&b(p), &b(0)));
        }
    }

    #[test]
    fn strip_examples() {
        let (alpha, w) = strip_p(&QpVec2::from_ints(5, 5, 0)).unwrap();
        assert_eq!((alpha, w.a().clone(), w.b().clone()), (1, BigInt::from(1), BigInt::from(0)));
        let v = zv(2, ZInvP::pow(2, -1), ZInvP::from_int(2, 3));
        let (alpha, w) = strip_p(&v).unwrap();
        assert_eq!((alpha, w.a().clone(), w.b().clone()), (-1, BigInt::from(1), BigInt::from(6)));
        assert_eq!(strip_p(&QpVec2::from_ints(3, 2, 2)), Err(Error::NotPrimitive));
        assert_eq!(strip_p(&QpVec2::from_ints(3, 0, 0)), Err(Error::ZeroInput));
    }

    #[test]
    fn strip_scales() {
        let v = QpVec2::from_ints(3, 4, 9);
        let (alpha, w) = strip_p(&v).unwrap();
        for k in -3..=3 {
            assert_eq!(strip_p(&v.scale_pow_p(k)).unwrap(), (alpha + k, w.clone()));
        }
    }

    #[test]
    fn gcd_examples() {
        let check = |v: QpVec2<ZInvP>| {
            let (x, y) = gcd_solve(&v).unwrap();
            assert!((&v.x * &x + &v.y * &y).is_one());
        };
        check(QpVec2::from_ints(7, 3, 5));
        check(QpVec2::from_ints(3, 3, 0));
        check(zv(2, ZInvP::pow(2, -1), ZInvP::from_int(2, 3)));
        assert_eq!(gcd_solve(&QpVec2::from_ints(3, 0, 3)).unwrap(), (ZInvP::zero(3), ZInvP::pow(3, -1)));
    }

    #[test]
    fn fund_reduce_examples() {
        assert!(fund_reduce(3, &q(0, 1), &q(0, 1)).is_zero());
        assert_eq!(fund_reduce(3, &q(7, 10), &q(1, 3)), ZInvP::pow(3, -1));
        assert_eq!(fund_reduce(2, &q(0, 1), &q(7, 4)), ZInvP::new(2, BigInt::from(-1), -2));
        let dom = FundDomain;
        for (p, x, a) in [(3, q(7, 10), q(1, 3)), (2, q(0, 1), q(7, 4)), (5, q(-13, 3), q(2, 35))] {
            let f = fund_reduce(p, &x, &a).to_rational();
            assert!(dom.contains(p, &(&x - &f), &(&a - &f)));
        }
    }

    #[test]
    fn fund_domain_edges() {
        let dom = FundDomain;
        assert!(dom.contains(2, &q(-1, 2), &q(0, 1)));
        assert!(!dom.contains(2, &q(1, 2), &q(0, 1)));
        assert!(!dom.contains(2, &q(0, 1), &q(1, 2)));
        assert!(dom.contains(2, &q(0, 1), &q(1, 3)));
    }

    #[test]
    fn gamma_for_e2_is_identity() {
        let v = PrimVecZInvP::from_ints(5, 0, 1).unwrap();
        let g = gamma_from_prim(&v).unwrap();
        assert_eq!(g.gamma, Mat2::identity(5));
        assert!(!g.swapped);
    }

    #[test]
    fn gamma_invariants_small() {
        for p in [2u64, 3, 5] {
            for a in -12i64..=12 {
                for b in -12i64..=12 {
                    let Ok(v) = PrimVecZInvP::from_ints(p, a, b) else { continue };
                    let g = gamma_from_prim(&v).unwrap();
                    assert!(g.gamma.is_special_linear());
                    let (ca, cb) = g.chart_vector();
                    assert_eq!(g.gamma.first_col(), (cb, -ca));
                    assert!(FundDomain.contains(p, &g.x, &g.beta), "{a},{b}");
                    let real = iwasawa_real(&g.gamma.to_rational()).unwrap();
                    assert_eq!(real.x, g.x);
                    assert_eq!(bruhat_exact(&g.gamma).unwrap().beta, g.beta);
                }
            }
        }
    }

    #[test]
    fn gamma_for_one_two() {
        let v = PrimVecZInvP::from_ints(3, 1, 2).unwrap();
        let g = gamma_from_prim(&v).unwrap();
        assert_eq!(g.gamma.first_col(), (ZInvP::from_int(3, 2), ZInvP::from_int(3, -1)));
        assert!(g.gamma.is_special_linear());
    }

    #[test]
    fn gamma_on_zinvp_vectors() {
        let p = 2;
        let v = PrimVecZInvP::new(zv(p, ZInvP::pow(p, -1), ZInvP::from_int(p, 3))).unwrap();
        let g = gamma_from_prim(&v).unwrap();
        assert!(g.gamma.is_special_linear());
        assert!(FundDomain.contains(p, &g.x, &g.beta));
        let t = bruhat_exact(&g.gamma).unwrap().t;
        assert_eq!(t, 1);
    }

    #[test]
    fn membership_examples() {
        let full = |r: i64, t1: i64, t2: i64, arc: Option<PAdicArc>| VectorBox {
            theta: RealArc::full(),
            theta_p: arc,
            radius_sq: q(r * r, 1),
            t1,
            t2,
        };
        let v = PrimVecZInvP::from_ints(2, 1, 0).unwrap();
        assert!(membership(&v, &full(1, 0, 0, None)).unwrap());
        let v = PrimVecZInvP::from_ints(2, 1, 2).unwrap();
        assert!(!membership(&v, &full(2, 0, 0, None)).unwrap());
        let arc = PAdicArc::new(2, 1, 1, 0).unwrap();
        let v = PrimVecZInvP::from_ints(2, 3, 4).unwrap();
        assert!(membership(&v, &full(5, 0, 0, Some(arc))).unwrap());
    }

    #[test]
    fn factor_membership_agrees_small() {
        let arcs = crate::plane::arc_partition(3, 1).unwrap();
        for a in -15i64..=15 {
            for b in -15i64..=15 {
                let Ok(v) = PrimVecZInvP::from_ints(3, a, b) else { continue };
                let g = gamma_from_prim(&v).unwrap();
                for s in 0..4 {
                    for arc in arcs.iter().map(|a| Some(*a)).chain([None]) {
                        let bx = VectorBox { theta: RealArc::sector(s, 4), theta_p: arc, radius_sq: q(150, 1), t1: 0, t2: 0 };
                        assert_eq!(membership(&v, &bx).unwrap(), membership_via_factors(&g, &bx).unwrap());
                    }
                }
            }
        }
    }
}
