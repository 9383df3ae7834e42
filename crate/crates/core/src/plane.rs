//! Vectors in Q_p^2, the p-adic unit circle, arcs and their Haar measures,
//! plus the real angle sectors used for binning.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::padic::{pow_p_rational, PNorm, Valuation, ZInvP};
use crate::scalar::{PAdicValued, Scalar};

/// A vector in Q_p^2 with coordinates of any p-adically valued scalar type.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QpVec2<T> {
    pub p: u64,
    pub x: T,
    pub y: T,
}

impl<T: Scalar + PAdicValued> QpVec2<T> {
    pub fn new(p: u64, x: T, y: T) -> Self {
        QpVec2 { p, x, y }
    }

    /// `max(|x|_p, |y|_p)`; the zero vector has norm `PNorm::Zero`.
    pub fn norm_p(&self) -> Result<PNorm> {
        let vx = self.x.valuation_at(self.p)?;
        let vy = self.y.valuation_at(self.p)?;
        Ok(vx.min(vy).abs())
    }

    pub fn min_valuation(&self) -> Result<Valuation> {
        Ok(self.x.valuation_at(self.p)?.min(self.y.valuation_at(self.p)?))
    }

    pub fn in_unit_circle(&self) -> Result<bool> {
        Ok(self.norm_p()? == PNorm::ONE)
    }

    /// `|x|_p >= |y|_p`.
    pub fn in_plus_half(&self) -> Result<bool> {
        Ok(self.x.valuation_at(self.p)? <= self.y.valuation_at(self.p)?)
    }

    /// `‖v‖_p · v`, the point of the unit circle on the line through v.
    pub fn direction_p(&self) -> Result<Self> {
        match self.min_valuation()? {
            Valuation::Infinity => Err(Error::ZeroInput),
            Valuation::Finite(v) => Ok(self.scale_pow_p(-v)),
        }
    }

    /// Multiplies both coordinates by `p^k`.
    pub fn scale_pow_p(&self, k: i64) -> Self {
        QpVec2 { p: self.p, x: self.x.mul_pow_p(self.p, k), y: self.y.mul_pow_p(self.p, k) }
    }

    /// Residues of both coordinates modulo `p^k`.
    pub fn residues(&self, k: u32) -> Result<(u64, u64)> {
        Ok((self.x.residue_mod(self.p, k)?, self.y.residue_mod(self.p, k)?))
    }
}

impl QpVec2<ZInvP> {
    pub fn from_ints(p: u64, x: i64, y: i64) -> Self {
        QpVec2 { p, x: ZInvP::from_int(p, x), y: ZInvP::from_int(p, y) }
    }

    /// Exact norm; infallible for exact coordinates.
    pub fn norm(&self) -> PNorm {
        self.x.valuation().min(self.y.valuation()).abs()
    }
}

/// A ball `θ + p^N Z_p^2` around a point of the unit circle, stored with its
/// canonical center in `[0, p^N)^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PAdicArc {
    pub p: u64,
    pub level: u32,
    pub cx: u64,
    pub cy: u64,
}

impl PAdicArc {
    /// Arc of radius `p^{-level}` around the residue class `(cx, cy)`.
    pub fn new(p: u64, level: u32, cx: u64, cy: u64) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidConfig("arc level must be at least 1".into()));
        }
        let m = p
            .checked_pow(level)
            .ok_or_else(|| Error::InvalidConfig(format!("{p}^{level} overflows")))?;
        let (cx, cy) = (cx % m, cy % m);
        if cx % p == 0 && cy % p == 0 {
            return Err(Error::NotOnUnitCircle);
        }
        Ok(PAdicArc { p, level, cx, cy })
    }

    /// Arc of radius `p^{-level}` around an arbitrary center on the unit circle.
    pub fn around<T: Scalar + PAdicValued>(center: &QpVec2<T>, level: u32) -> Result<Self> {
        if !center.in_unit_circle()? {
            return Err(Error::NotOnUnitCircle);
        }
        let (cx, cy) = center.residues(level)?;
        Self::new(center.p, level, cx, cy)
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.level)
    }

    pub fn center(&self) -> QpVec2<ZInvP> {
        QpVec2::from_ints(self.p, self.cx as i64, self.cy as i64)
    }

    /// Whether the arc lies in the half `|x|_p >= |y|_p` (then `|x|_p = 1`).
    pub fn in_plus_half(&self) -> bool {
        !self.cx.is_multiple_of(self.p)
    }

    /// Both coordinates of `v - θ` have valuation at least the level.
    pub fn contains<T: Scalar + PAdicValued>(&self, v: &QpVec2<T>) -> Result<bool> {
        if v.p != self.p {
            return Err(Error::PrimeMismatch(v.p, self.p));
        }
        let vx = v.x.valuation_at(self.p)?;
        let vy = v.y.valuation_at(self.p)?;
        if vx < Valuation::Finite(0) || vy < Valuation::Finite(0) {
            return Ok(false);
        }
        Ok(v.residues(self.level)? == (self.cx, self.cy))
    }

    /// Haar measure `p^{-2N}`.
    pub fn measure(&self) -> BigRational {
        pow_p_rational(self.p, -2 * self.level as i64)
    }

    /// The `p^2` arcs of the next level inside this one.
    pub fn children(&self) -> Vec<PAdicArc> {
        let m = self.modulus();
        let mut out = Vec::with_capacity((self.p * self.p) as usize);
        for i in 0..self.p {
            for j in 0..self.p {
                out.push(PAdicArc { p: self.p, level: self.level + 1, cx: self.cx + i * m, cy: self.cy + j * m });
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for PAdicArc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^-{}@({},{})", self.p, self.level, self.cx, self.cy)
    }
}

impl FromStr for PAdicArc {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected an arc like 2^-1@(1,0), got {s:?}"));
        let (radius, center) = s.trim().split_once('@').ok_or_else(bad)?;
        let (p, level) = radius.split_once("^-").ok_or_else(bad)?;
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let level: u32 = level.trim().parse().map_err(|_| bad())?;
        let inner = center.trim().strip_prefix('(').and_then(|c| c.strip_suffix(')')).ok_or_else(bad)?;
        let (cx, cy) = inner.split_once(',').ok_or_else(bad)?;
        let cx: i64 = cx.trim().parse().map_err(|_| bad())?;
        let cy: i64 = cy.trim().parse().map_err(|_| bad())?;
        let m = p.checked_pow(level).ok_or_else(bad)? as i64;
        PAdicArc::new(p, level, cx.rem_euclid(m) as u64, cy.rem_euclid(m) as u64)
    }
}

/// Haar measure of the unit circle, `1 - p^{-2}`.
pub fn circle_measure(p: u64) -> BigRational {
    BigRational::one() - pow_p_rational(p, -2)
}

/// Haar measure of the half `|x|_p >= |y|_p` of the unit circle, `1 - 1/p`.
pub fn half_circle_measure(p: u64) -> BigRational {
    BigRational::one() - pow_p_rational(p, -1)
}

/// The level-N arcs covering the unit circle, with an O(1) residue lookup.
///
/// Arcs in the `|x|_p = 1` half come first, each group in lexicographic order
/// of the center.
#[derive(Clone, Debug)]
pub struct ArcPartition {
    p: u64,
    level: u32,
    modulus: u64,
    arcs: Vec<PAdicArc>,
    lookup: Vec<u32>,
}

impl ArcPartition {
    /// Largest supported `p^N`; the lookup table has `p^{2N}` entries.
    pub const MAX_MODULUS: u64 = 1 << 12;

    pub fn new(p: u64, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidConfig("arc level must be at least 1".into()));
        }
        let modulus = p
            .checked_pow(level)
            .filter(|&m| m <= Self::MAX_MODULUS)
            .ok_or_else(|| Error::LevelTooLarge(format!("{p}^{level} exceeds {}", Self::MAX_MODULUS)))?;
        let mut plus = Vec::new();
        let mut rest = Vec::new();
        for cx in 0..modulus {
            for cy in 0..modulus {
                if cx % p != 0 {
                    plus.push(PAdicArc { p, level, cx, cy });
                } else if cy % p != 0 {
                    rest.push(PAdicArc { p, level, cx, cy });
                }
            }
        }
        plus.extend(rest);
        let mut lookup = vec![u32::MAX; (modulus * modulus) as usize];
        for (i, arc) in plus.iter().enumerate() {
            lookup[(arc.cx * modulus + arc.cy) as usize] = i as u32;
        }
        Ok(ArcPartition { p, level, modulus, arcs: plus, lookup })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn arcs(&self) -> &[PAdicArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Index of the arc containing the integer vector `(a, b)`, which must lie
    /// on the unit circle (for example a coprime pair).
    #[inline]
    pub fn index_of(&self, a: i64, b: i64) -> Option<usize> {
        let m = self.modulus as i64;
        let key = a.rem_euclid(m) as u64 * self.modulus + b.rem_euclid(m) as u64;
        match self.lookup[key as usize] {
            u32::MAX => None,
            i => Some(i as usize),
        }
    }
}

/// `arc_partition(p, N)` as a plain list.
pub fn arc_partition(p: u64, level: u32) -> Result<Vec<PAdicArc>> {
    Ok(ArcPartition::new(p, level)?.arcs)
}

/// Half-open angle interval `[lo, hi)` of the real circle, in radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealArc {
    pub lo: f64,
    pub hi: f64,
}

/// Outcome of a real-arc membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleMembership {
    Inside,
    Outside,
    /// Within the tie tolerance of a boundary; the half-open rule was applied
    /// to the floating-point angle and the answer is `inside`.
    Tie { inside: bool },
}

impl AngleMembership {
    pub fn is_inside(self) -> bool {
        matches!(self, AngleMembership::Inside | AngleMembership::Tie { inside: true })
    }
}

impl RealArc {
    pub const TIE_TOLERANCE: f64 = 1e-12;

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(0.0 <= lo && lo < hi && hi <= TAU) {
            return Err(Error::InvalidConfig(format!("bad angle interval [{lo}, {hi})")));
        }
        Ok(RealArc { lo, hi })
    }

    pub fn full() -> Self {
        RealArc { lo: 0.0, hi: TAU }
    }

    /// The i-th of n equal sectors.
    pub fn sector(i: usize, n: usize) -> Self {
        let w = TAU / n as f64;
        RealArc { lo: w * i as f64, hi: if i + 1 == n { TAU } else { w * (i + 1) as f64 } }
    }

    pub fn lebesgue(&self) -> f64 {
        self.hi - self.lo
    }

    /// Lebesgue measure normalized so the whole circle has measure 1.
    pub fn normalized_measure(&self) -> f64 {
        (self.hi - self.lo) / TAU
    }

    pub fn contains_angle(&self, theta: f64) -> AngleMembership {
        let inside = self.lo <= theta && theta < self.hi;
        let near = |edge: f64| {
            let d = (theta - edge).abs();
            d < Self::TIE_TOLERANCE || (TAU - d).abs() < Self::TIE_TOLERANCE
        };
        if near(self.lo) || near(self.hi) {
            AngleMembership::Tie { inside }
        } else if inside {
            AngleMembership::Inside
        } else {
            AngleMembership::Outside
        }
    }

    pub fn contains_vec(&self, a: f64, b: f64) -> AngleMembership {
        self.contains_angle(angle_of(a, b))
    }
}

/// Angle of `(a, b)` in `[0, 2π)`.
pub fn angle_of(a: f64, b: f64) -> f64 {
    let t = b.atan2(a);
    if t < 0.0 {
        (t + TAU).min(TAU.next_down())
    } else {
        t
    }
}

/// Octant `k` with angle of `(a, b)` in `[kπ/4, (k+1)π/4)`, decided exactly.
#[inline]
pub fn octant_of(a: i64, b: i64) -> usize {
    debug_assert!(a != 0 || b != 0);
    if a > 0 && b >= 0 {
        usize::from(b >= a)
    } else if a <= 0 && b > 0 {
        2 + usize::from(-a >= b)
    } else if a < 0 && b <= 0 {
        4 + usize::from(-b >= -a)
    } else {
        6 + usize::from(a >= -b)
    }
}

/// Sector index among `n` equal sectors; exact when `n` divides 8.
pub fn sector_of(a: i64, b: i64, n: usize) -> (usize, bool) {
    if 8 % n == 0 {
        return (octant_of(a, b) / (8 / n), false);
    }
    let theta = angle_of(a as f64, b as f64);
    let w = TAU / n as f64;
    let idx = ((theta / w) as usize).min(n - 1);
    let frac = theta / w - idx as f64;
    let tie = frac * w < RealArc::TIE_TOLERANCE || (1.0 - frac) * w < RealArc::TIE_TOLERANCE;
    (idx, tie)
}

/// Sum of measures over a list of arcs.
pub fn total_measure(arcs: &[PAdicArc]) -> BigRational {
    arcs.iter().fold(BigRational::zero(), |acc, a| acc + a.measure())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use std::f64::consts::PI;

    fn ratio(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    fn zv(p: u64, x: ZInvP, y: ZInvP) -> QpVec2<ZInvP> {
        QpVec2::new(p, x, y)
    }

    #[test]
    fn norm_examples() {
        let v = zv(3, ZInvP::pow(3, -1), ZInvP::from_int(3, 2));
        assert_eq!(v.norm(), PNorm::Pow(1));
        assert_eq!(QpVec2::from_ints(7, 5, 12).norm(), PNorm::ONE);
        assert_eq!(QpVec2::from_ints(2, 4, 6).norm(), PNorm::Pow(-1));
        assert_eq!(QpVec2::from_ints(2, 0, 0).norm(), PNorm::Zero);
    }

    #[test]
    fn circle_and_half() {
        let v = QpVec2::from_ints(5, 3, 10);
        assert!(v.in_unit_circle().unwrap() && v.in_plus_half().unwrap());
        let w = QpVec2::from_ints(5, 10, 3);
        assert!(w.in_unit_circle().unwrap() && !w.in_plus_half().unwrap());
        assert!(!QpVec2::from_ints(2, 2, 4).in_unit_circle().unwrap());
    }

    #[test]
    fn direction_examples() {
        let v = QpVec2::from_ints(3, 5, 7);
        assert_eq!(v.direction_p().unwrap(), v);
        assert_eq!(QpVec2::from_ints(3, 3, 9).direction_p().unwrap(), QpVec2::from_ints(3, 1, 3));
        let half = zv(2, ZInvP::pow(2, -1), ZInvP::from_int(2, 3));
        assert_eq!(half.direction_p().unwrap(), QpVec2::from_ints(2, 1, 6));
        assert_eq!(QpVec2::from_ints(2, 0, 0).direction_p(), Err(Error::ZeroInput));
    }

    #[test]
    fn arc_examples() {
        let arc = PAdicArc::new(2, 1, 1, 0).unwrap();
        assert!(arc.contains(&arc.center()).unwrap());
        assert!(arc.contains(&QpVec2::from_ints(2, 3, 4)).unwrap());
        assert!(!arc.contains(&QpVec2::from_ints(2, 1, 1)).unwrap());
        assert_eq!(PAdicArc::new(2, 1, 0, 0), Err(Error::NotOnUnitCircle));
        let v = zv(2, ZInvP::pow(2, -1), ZInvP::zero(2));
        assert!(!arc.contains(&v).unwrap());
    }

    #[test]
    fn measures() {
        assert_eq!(PAdicArc::new(3, 2, 1, 0).unwrap().measure(), ratio(1, 81));
        assert_eq!(half_circle_measure(2), ratio(1, 2));
        assert_eq!(circle_measure(2), ratio(3, 4));
        for p in [2, 3, 5] {
            for n in 1..=3 {
                assert_eq!(total_measure(&arc_partition(p, n).unwrap()), circle_measure(p));
            }
        }
    }

    #[test]
    fn circle_measure_by_residue_count() {
        // Unit-circle residues mod p^2 over all residues.
        for p in [2u64, 3, 5] {
            let m = p * p;
            let on = (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|(x, y)| x % p != 0 || y % p != 0).count();
            assert_eq!(ratio(on as i64, (m * m) as i64), circle_measure(p));
        }
    }

    #[test]
    fn partition_shape() {
        let arcs = arc_partition(2, 1).unwrap();
        let centers: Vec<_> = arcs.iter().map(|a| (a.cx, a.cy)).collect();
        assert_eq!(centers, vec![(1, 0), (1, 1), (0, 1)]);
        assert_eq!(arc_partition(3, 1).unwrap().len(), 8);
        assert_eq!(arc_partition(2, 3).unwrap().len(), 48);
    }

    #[test]
    fn partition_lookup_matches_contains() {
        let part = ArcPartition::new(3, 2).unwrap();
        for a in -20i64..20 {
            for b in -20i64..20 {
                let v = QpVec2::from_ints(3, a, b);
                let idx = part.index_of(a, b);
                if v.in_unit_circle().unwrap() {
                    let i = idx.unwrap();
                    assert!(part.arcs()[i].contains(&v).unwrap());
                } else {
                    assert!(idx.is_none());
                }
            }
        }
    }

    #[test]
    fn children_add_up() {
        let arc = PAdicArc::new(3, 1, 2, 1).unwrap();
        let kids = arc.children();
        assert_eq!(kids.len(), 9);
        assert_eq!(total_measure(&kids), arc.measure());
    }

    #[test]
    fn arc_text_form() {
        let arc = PAdicArc::new(2, 3, 5, 2).unwrap();
        assert_eq!(arc.to_string(), "2^-3@(5,2)");
        assert_eq!("2^-3@(5,2)".parse::<PAdicArc>().unwrap(), arc);
        assert_eq!("2^-3@(-3, 10)".parse::<PAdicArc>().unwrap(), arc);
        assert!("2^3@(1,0)".parse::<PAdicArc>().is_err());
    }

    #[test]
    fn octants_match_atan2() {
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                if a == 0 && b == 0 {
                    continue;
                }
                let k = octant_of(a, b);
                let theta = angle_of(a as f64, b as f64);
                let edge = k as f64 * PI / 4.0;
                assert!(theta >= edge - 1e-12 && theta < edge + PI / 4.0 - 1e-12 || (a.abs() == b.abs() || a == 0 || b == 0));
                assert_eq!(k, ((theta + 1e-12) / (PI / 4.0)) as usize % 8, "({a},{b})");
            }
        }
    }

    #[test]
    fn real_arc_membership() {
        let q1 = RealArc::sector(1, 4);
        assert!(q1.contains_vec(-1.0, 1.0).is_inside());
        assert!(!q1.contains_vec(1.0, -1.0).is_inside());
        assert!(matches!(q1.contains_vec(0.0, 1.0), AngleMembership::Tie { inside: true }));
        assert!(RealArc::new(1.0, 0.5).is_err());
        assert_eq!(sector_of(-1, 1, 4), (1, false));
        assert_eq!(sector_of(1, -1, 4), (3, false));
        assert_eq!(sector_of(0, 1, 3).0, 0);
    }
}
