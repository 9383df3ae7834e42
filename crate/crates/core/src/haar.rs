//! Haar measure of Bruhat boxes and the oracles that decide between the
//! candidate volume formulas.
//!
//! Two p-adic formulas are carried side by side:
//!
//! * variant L: `μ(Θ_p) · Σ_t p^{2t} · p^{-ψ}` (density `p^{2t}` on the A-factor,
//!   coset measure `p^{-ψ}` on the N-factor);
//! * variant T: `μ(Θ_p) · Σ_t p^{-2t} · (1 - p^{-ψ})`.
//!
//! and two real ones for `{‖v‖ <= R}` in Iwasawa coordinates:
//!
//! * variant E: `Leb(Θ) · |Ψ| · ∫_1^R α^{-2} dα`;
//! * variant P: `Leb(Θ) · |Ψ| · ∫_1^R α dα`.
//!
//! The residue oracle enumerates SL2(Z/p^N) exactly, the growth oracle counts
//! primitive vectors of Z[1/p]^2 by p-adic norm, and the primitive-count oracle
//! compares against `#{v ∈ Z^2_prim : ‖v‖ <= R}`. Measures are normalized so
//! that SL2(Z_p) has mass `1 - p^{-2}` (the measure of the unit circle), which
//! gives the compact part of the chart `|a|_p >= |b|_p` mass `1 - 1/p`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::padic::{inv_mod, mul_mod, pow_p_rational, rational_residue, valuation_rational, Valuation, ZInvP};
use crate::plane::{half_circle_measure, ArcPartition, PAdicArc, RealArc};

/// Which printed formula a quantity follows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    L,
    T,
    /// Both formulas give the oracle value.
    Both,
    Neither,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::L => "L",
            Variant::T => "T",
            Variant::Both => "both",
            Variant::Neither => "neither",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RealVariant {
    E,
    P,
    Neither,
}

impl fmt::Display for RealVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RealVariant::E => "E",
            RealVariant::P => "P",
            RealVariant::Neither => "neither",
        };
        f.write_str(s)
    }
}

/// Outcome of the growth oracle: the A-factor density is `p^{2t}`.
pub const T_EXPONENT_WINNER: Variant = Variant::L;
/// Outcome of the residue oracle: the N-factor contributes `p^{-ψ}`.
pub const N_FACTOR_WINNER: Variant = Variant::L;
/// Outcome of the primitive-count oracle: the radial density is `α dα`.
pub const REAL_DENSITY_WINNER: RealVariant = RealVariant::P;

/// Relative tolerance used by the growth and primitive-count oracles.
pub const ARBITRATION_TOLERANCE: f64 = 0.05;

/// `ζ(2) = π²/6`, the covolume factor relating box volumes to lattice counts.
pub const ZETA_2: f64 = PI * PI / 6.0;

/// The Q-factor constraint of a box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QRegion {
    /// All of `S^{1,+}_p`.
    HalfSphere,
    /// One arc inside `S^{1,+}_p`.
    Arc(PAdicArc),
}

/// `Q_{Θ_p} · A_{[t1, t2]} · N_{α + p^ψ Z_p}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BruhatBox {
    pub p: u64,
    pub region: QRegion,
    pub t1: i64,
    pub t2: i64,
    pub alpha: ZInvP,
    pub psi: i64,
}

impl BruhatBox {
    pub fn new(p: u64, region: QRegion, t1: i64, t2: i64, alpha: ZInvP, psi: i64) -> Result<Self> {
        if t1 > t2 {
            return Err(Error::InvalidConfig(format!("empty t-range [{t1}, {t2}]")));
        }
        if let QRegion::Arc(arc) = region {
            if arc.p != p {
                return Err(Error::PrimeMismatch(arc.p, p));
            }
            if !arc.in_plus_half() {
                return Err(Error::NotInGPlus);
            }
        }
        if alpha.p() != p {
            return Err(Error::PrimeMismatch(alpha.p(), p));
        }
        Ok(BruhatBox { p, region, t1, t2, alpha, psi })
    }

    /// Haar measure of the Q-factor region on the circle.
    pub fn q_measure(&self) -> BigRational {
        match self.region {
            QRegion::HalfSphere => half_circle_measure(self.p),
            QRegion::Arc(arc) => arc.measure(),
        }
    }

    pub fn arc_level(&self) -> u32 {
        match self.region {
            QRegion::HalfSphere => 1,
            QRegion::Arc(arc) => arc.level,
        }
    }

    pub fn label(&self) -> String {
        let q = match self.region {
            QRegion::HalfSphere => "half".to_string(),
            QRegion::Arc(arc) => arc.to_string(),
        };
        format!("Q={q};t={}..{};N={}+{}^{}Z_{}", self.t1, self.t2, self.alpha.to_fraction_string(), self.p, self.psi, self.p)
    }
}

/// Both candidate volumes of a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VolumeVariants {
    pub l: BigRational,
    pub t: BigRational,
}

pub fn volume_bruhat_box(bx: &BruhatBox) -> VolumeVariants {
    let p = bx.p;
    let q = bx.q_measure();
    let mut sum_l = BigRational::zero();
    let mut sum_t = BigRational::zero();
    for t in bx.t1..=bx.t2 {
        sum_l += pow_p_rational(p, 2 * t);
        sum_t += pow_p_rational(p, -2 * t);
    }
    let coset = pow_p_rational(p, -bx.psi);
    let l = &q * sum_l * &coset;
    let t = q * sum_t * (BigRational::one() - coset);
    VolumeVariants { l, t }
}

/// `|SL2(Z/p^n)| = p^{3n} (1 - p^{-2})`.
pub fn sl2_order(p: u64, n: u32) -> u64 {
    p.pow(3 * n) / (p * p) * (p * p - 1)
}

/// `|SL2(Z/p^n)|` by enumerating all quadruples.
pub fn sl2_order_by_enumeration(p: u64, n: u32) -> u64 {
    let m = p.pow(n);
    (0..m)
        .into_par_iter()
        .map(|a| {
            let mut count = 0u64;
            for b in 0..m {
                for c in 0..m {
                    let bc = b * c % m;
                    for d in 0..m {
                        if (a * d % m + m - bc) % m == 1 % m {
                            count += 1;
                        }
                    }
                }
            }
            count
        })
        .sum()
}

/// Default cap on `p^N` for the residue oracle.
pub const RESIDUE_CAP: u64 = 32;

/// Haar measure of a `t = 0` box computed from SL2(Z/p^n): the fraction of
/// residue classes whose lifts lie in the box, times the mass `1 - p^{-2}` of
/// SL2(Z_p).
pub fn residue_haar_oracle(bx: &BruhatBox, n: u32, cap: u64) -> Result<BigRational> {
    let p = bx.p;
    if bx.t1 != 0 || bx.t2 != 0 {
        return Err(Error::Infeasible("the residue oracle only sees t = 0".into()));
    }
    if bx.psi < 0 || valuation_rational(&bx.alpha.to_rational(), p) < Valuation::Finite(0) {
        return Err(Error::Infeasible("N-coset leaves Z_p, so the box leaves SL2(Z_p)".into()));
    }
    let m = p
        .checked_pow(n)
        .filter(|&m| m <= cap)
        .ok_or_else(|| Error::LevelTooLarge(format!("{p}^{n} exceeds the cap {cap}")))?;
    let psi = bx.psi as u32;
    let k = match bx.region {
        QRegion::HalfSphere => 0,
        QRegion::Arc(arc) => arc.level,
    };
    if n < k.max(psi) {
        return Err(Error::InsufficientPrecision { needed: k.max(psi) as i64, available: n as i64 });
    }
    let mod_k = p.pow(k);
    let mod_psi = p.pow(psi);
    let alpha_res = rational_residue(&bx.alpha.to_rational(), p, psi)?;
    let (cx, cy) = match bx.region {
        QRegion::HalfSphere => (0, 0),
        QRegion::Arc(arc) => (arc.cx, arc.cy),
    };
    // For a unit a, each (a, b, c) has exactly one d with ad - bc = 1.
    let hits: u64 = (0..m)
        .into_par_iter()
        .filter(|a| a % p != 0)
        .map(|a| {
            if a % mod_k != cx % mod_k {
                return 0;
            }
            let a_inv = inv_mod(a, m).expect("unit");
            let mut count = 0u64;
            for b in 0..m {
                if b % mod_k != cy % mod_k {
                    continue;
                }
                for c in 0..m {
                    if mul_mod(c, a_inv, m) % mod_psi == alpha_res {
                        count += 1;
                    }
                }
            }
            count
        })
        .sum();
    let frac = BigRational::new(BigInt::from(hits), BigInt::from(sl2_order(p, n)));
    Ok(frac * (BigRational::one() - pow_p_rational(p, -2)))
}

/// One row of a measure report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureRow {
    #[serde(rename = "box")]
    pub bx: String,
    #[serde(rename = "variant_L")]
    pub variant_l: String,
    #[serde(rename = "variant_T")]
    pub variant_t: String,
    pub oracle: String,
    pub winner: Variant,
}

/// Formula values against the oracle at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureReport {
    pub formula: VolumeVariants,
    pub oracle: BigRational,
    pub level: u32,
    pub winner: Variant,
}

impl MeasureReport {
    /// Agreement of the winning formula with the oracle.
    pub fn agree(&self) -> bool {
        match N_FACTOR_WINNER {
            Variant::L => self.formula.l == self.oracle,
            Variant::T => self.formula.t == self.oracle,
            _ => false,
        }
    }

    pub fn row(&self, bx: &BruhatBox) -> MeasureRow {
        MeasureRow {
            bx: bx.label(),
            variant_l: self.formula.l.to_string(),
            variant_t: self.formula.t.to_string(),
            oracle: self.oracle.to_string(),
            winner: self.winner,
        }
    }
}

fn pick(l_ok: bool, t_ok: bool) -> Variant {
    match (l_ok, t_ok) {
        (true, true) => Variant::Both,
        (true, false) => Variant::L,
        (false, true) => Variant::T,
        (false, false) => Variant::Neither,
    }
}

pub fn arbitrate_box(bx: &BruhatBox, n: u32, cap: u64) -> Result<MeasureReport> {
    let formula = volume_bruhat_box(bx);
    let oracle = residue_haar_oracle(bx, n, cap)?;
    let winner = pick(formula.l == oracle, formula.t == oracle);
    Ok(MeasureReport { formula, oracle, level: n, winner })
}

/// Every `t = 0` box with arc level `<= max_level` (plus the half-sphere) and
/// `ψ <= max_psi`, one per residue `α mod p^ψ`.
pub fn standard_boxes(p: u64, max_level: u32, max_psi: u32) -> Result<Vec<BruhatBox>> {
    let mut regions = vec![QRegion::HalfSphere];
    for level in 1..=max_level {
        for arc in ArcPartition::new(p, level)?.arcs() {
            if arc.in_plus_half() {
                regions.push(QRegion::Arc(*arc));
            }
        }
    }
    let mut boxes = Vec::new();
    for region in regions {
        for psi in 0..=max_psi {
            for alpha in 0..p.pow(psi) {
                boxes.push(BruhatBox::new(p, region, 0, 0, ZInvP::from_int(p, alpha as i64), psi as i64)?);
            }
        }
    }
    Ok(boxes)
}

/// Primitive vectors `w ∈ Z^2` with `‖w‖² <= num/den`.
pub fn primitive_count(num: u128, den: u128) -> Result<u64> {
    if den == 0 {
        return Err(Error::DivisionByZero);
    }
    let f = num / den;
    if f > 1u128 << 48 {
        return Err(Error::Infeasible(format!("radius² {f} is beyond the counting budget")));
    }
    let f = f as u64;
    let x = isqrt(f);
    let mu = mobius(x as usize);
    let mut total: i64 = 0;
    for d in 1..=x {
        let sign = mu[d as usize];
        if sign == 0 {
            continue;
        }
        let bound = f / (d * d);
        total += sign as i64 * lattice_points(bound) as i64;
    }
    Ok(total as u64)
}

/// Nonzero integer points with `a² + b² <= bound`.
fn lattice_points(bound: u64) -> u64 {
    let r = isqrt(bound);
    let mut total = 0u64;
    for a in 0..=r {
        let h = isqrt(bound - a * a);
        total += if a == 0 { 2 * h + 1 } else { 2 * (2 * h + 1) };
    }
    total - 1
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn mobius(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut is_composite = vec![false; n + 1];
    for i in 2..=n {
        if !is_composite[i] {
            for j in (i..=n).step_by(i) {
                if j > i {
                    is_composite[j] = true;
                }
                mu[j] = -mu[j];
            }
            let sq = i * i;
            for j in (sq..=n).step_by(sq) {
                mu[j] = 0;
            }
        }
    }
    mu
}

/// `#{v ∈ Z[1/p]^2 primitive : ‖v‖_p = p^t, ‖v‖ <= R}`. Such v are exactly
/// `p^{-t} w` with `w ∈ Z^2_prim`, `‖w‖ <= R p^t`.
pub fn lattice_growth_oracle(p: u64, r: u64, t: i64) -> Result<u64> {
    let scale = p.checked_pow(2 * t.unsigned_abs() as u32).map(u128::from);
    let scale = scale.ok_or_else(|| Error::Infeasible(format!("p^{} overflows", 2 * t)))?;
    let r2 = (r as u128) * (r as u128);
    if t >= 0 {
        primitive_count(r2.checked_mul(scale).ok_or_else(|| Error::Infeasible("overflow".into()))?, 1)
    } else {
        primitive_count(r2, scale)
    }
}

/// Counts and ratios of the growth oracle over consecutive `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthVerdict {
    pub p: u64,
    pub radius: u64,
    pub counts: Vec<(i64, u64)>,
    pub ratios: Vec<f64>,
    pub winner: Variant,
}

pub fn arbitrate_t_exponent(p: u64, r: u64, ts: &[i64]) -> Result<GrowthVerdict> {
    let mut counts = Vec::with_capacity(ts.len());
    for &t in ts {
        counts.push((t, lattice_growth_oracle(p, r, t)?));
    }
    let ratios: Vec<f64> = counts.windows(2).map(|w| w[1].1 as f64 / w[0].1 as f64).collect();
    let close = |target: f64| !ratios.is_empty() && ratios.iter().all(|r| (r / target - 1.0).abs() <= ARBITRATION_TOLERANCE);
    let pf = p as f64;
    let winner = pick(close(pf * pf), close(1.0 / (pf * pf)));
    Ok(GrowthVerdict { p, radius: r, counts, ratios, winner })
}

/// Both candidate real volumes of `{K(θ) a_α n(x) : θ ∈ Θ, 1 <= α <= R, x ∈ Ψ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealVolume {
    pub e: f64,
    pub p: f64,
}

pub fn real_iwasawa_volume(theta: &RealArc, r: f64, psi_len: f64) -> Result<RealVolume> {
    if r <= 1.0 {
        return Err(Error::InvalidConfig(format!("radius {r} must exceed 1")));
    }
    let base = theta.lebesgue() * psi_len;
    Ok(RealVolume { e: base * (1.0 - 1.0 / r), p: base * (r * r - 1.0) / 2.0 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealDensityVerdict {
    pub radius: u64,
    pub count: u64,
    pub predicted_e: f64,
    pub predicted_p: f64,
    pub winner: RealVariant,
}

/// Compares `#{v ∈ Z^2_prim : ‖v‖ <= R}` with `volume / ζ(2)` for the full
/// circle and `Ψ = [-1/2, 1/2)`.
pub fn arbitrate_real_density(r: u64) -> Result<RealDensityVerdict> {
    let count = primitive_count((r as u128) * (r as u128), 1)?;
    let vol = real_iwasawa_volume(&RealArc::full(), r as f64, 1.0)?;
    let predicted_e = vol.e / ZETA_2;
    let predicted_p = vol.p / ZETA_2;
    let close = |pred: f64| (count as f64 / pred - 1.0).abs() <= ARBITRATION_TOLERANCE;
    let winner = match (close(predicted_e), close(predicted_p)) {
        (false, true) => RealVariant::P,
        (true, false) => RealVariant::E,
        _ => RealVariant::Neither,
    };
    Ok(RealDensityVerdict { radius: r, count, predicted_e, predicted_p, winner })
}

/// Exact value as a float, for reports.
pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::Integer;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn half_box(p: u64, psi: i64) -> BruhatBox {
        BruhatBox::new(p, QRegion::HalfSphere, 0, 0, ZInvP::zero(p), psi).unwrap()
    }

    #[test]
    fn sl2_order_matches_enumeration() {
        assert_eq!(sl2_order_by_enumeration(3, 2), 648);
        assert_eq!(sl2_order(3, 2), 648);
        for (p, n) in [(2, 1), (2, 2), (2, 3), (3, 1), (5, 1)] {
            assert_eq!(sl2_order_by_enumeration(p, n), sl2_order(p, n));
        }
    }

    #[test]
    fn full_box_mass() {
        for p in [2, 3, 5] {
            let bx = half_box(p, 0);
            assert_eq!(volume_bruhat_box(&bx).l, half_circle_measure(p));
            assert!(volume_bruhat_box(&bx).t.is_zero());
            for n in 1..=2 {
                if p.pow(n) <= RESIDUE_CAP {
                    assert_eq!(residue_haar_oracle(&bx, n, RESIDUE_CAP).unwrap(), half_circle_measure(p));
                }
            }
        }
    }

    #[test]
    fn single_arc_box() {
        for p in [2u64, 3, 5] {
            let arc = PAdicArc::new(p, 1, 1, 0).unwrap();
            let bx = BruhatBox::new(p, QRegion::Arc(arc), 0, 0, ZInvP::zero(p), 0).unwrap();
            assert_eq!(volume_bruhat_box(&bx).l, pow_p_rational(p, -2));
        }
    }

    #[test]
    fn variants_diverge_off_zero() {
        let arc = PAdicArc::new(2, 1, 1, 1).unwrap();
        let bx = BruhatBox::new(2, QRegion::Arc(arc), -1, 1, ZInvP::zero(2), 1).unwrap();
        let v = volume_bruhat_box(&bx);
        // Symmetric t-range and ψ = 1 at p = 2: the formulas coincide.
        assert_eq!(v.l, q(1, 4) * q(21, 4) * q(1, 2));
        assert_eq!(v.t, q(1, 4) * q(21, 4) * q(1, 2));
        let bx = BruhatBox::new(2, QRegion::Arc(arc), 0, 1, ZInvP::zero(2), 2).unwrap();
        let v = volume_bruhat_box(&bx);
        assert_eq!(v.l, q(1, 4) * q(5, 1) * q(1, 4));
        assert_eq!(v.t, q(1, 4) * q(5, 4) * q(3, 4));
        assert_ne!(v.l, v.t);
    }

    #[test]
    fn oracle_is_stable_in_level() {
        let arc = PAdicArc::new(2, 2, 3, 2).unwrap();
        let bx = BruhatBox::new(2, QRegion::Arc(arc), 0, 0, ZInvP::from_int(2, 1), 1).unwrap();
        let v2 = residue_haar_oracle(&bx, 2, RESIDUE_CAP).unwrap();
        for n in 3..=5 {
            assert_eq!(residue_haar_oracle(&bx, n, RESIDUE_CAP).unwrap(), v2);
        }
    }

    #[test]
    fn oracle_is_additive() {
        for p in [2u64, 3] {
            for psi in 0..=2u32 {
                let mut total = BigRational::zero();
                for arc in ArcPartition::new(p, 1).unwrap().arcs().iter().filter(|a| a.in_plus_half()) {
                    for alpha in 0..p.pow(psi) {
                        let bx = BruhatBox::new(p, QRegion::Arc(*arc), 0, 0, ZInvP::from_int(p, alpha as i64), psi as i64)
                            .unwrap();
                        total += residue_haar_oracle(&bx, 2, RESIDUE_CAP).unwrap();
                    }
                }
                assert_eq!(total, half_circle_measure(p));
            }
        }
    }

    #[test]
    fn oracle_errors() {
        let bx = half_box(2, 0);
        assert!(matches!(residue_haar_oracle(&bx, 6, RESIDUE_CAP), Err(Error::LevelTooLarge(_))));
        let deep = BruhatBox::new(2, QRegion::HalfSphere, 0, 0, ZInvP::zero(2), 3).unwrap();
        assert!(matches!(residue_haar_oracle(&deep, 2, RESIDUE_CAP), Err(Error::InsufficientPrecision { .. })));
        let off = BruhatBox::new(2, QRegion::HalfSphere, 0, 0, ZInvP::pow(2, -1), 0).unwrap();
        assert!(matches!(residue_haar_oracle(&off, 2, RESIDUE_CAP), Err(Error::Infeasible(_))));
        let tilted = BruhatBox::new(2, QRegion::HalfSphere, 1, 1, ZInvP::zero(2), 0).unwrap();
        assert!(residue_haar_oracle(&tilted, 2, RESIDUE_CAP).is_err());
        let minus = PAdicArc::new(2, 1, 0, 1).unwrap();
        assert_eq!(BruhatBox::new(2, QRegion::Arc(minus), 0, 0, ZInvP::zero(2), 0), Err(Error::NotInGPlus));
    }

    fn brute_primitive_count(r2: u64) -> u64 {
        let r = isqrt(r2) as i64;
        let mut n = 0;
        for a in -r..=r {
            for b in -r..=r {
                if (a * a + b * b) as u64 <= r2 && a.gcd(&b) == 1 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn primitive_count_matches_brute_force() {
        for r2 in [1u64, 2, 4, 5, 50, 99, 100, 1000, 4321, 10_000] {
            assert_eq!(primitive_count(r2 as u128, 1).unwrap(), brute_primitive_count(r2), "{r2}");
        }
        assert_eq!(primitive_count(1, 1).unwrap(), 4);
        assert_eq!(primitive_count(4, 1).unwrap(), 8);
        assert_eq!(primitive_count(10_000, 4).unwrap(), brute_primitive_count(2500));
    }

    #[test]
    fn growth_oracle_basics() {
        assert_eq!(lattice_growth_oracle(2, 100, 0).unwrap(), brute_primitive_count(10_000));
        assert_eq!(lattice_growth_oracle(2, 100, 1).unwrap(), brute_primitive_count(40_000));
        assert_eq!(lattice_growth_oracle(2, 3, -2).unwrap(), 0);
    }

    #[test]
    fn growth_matches_direct_zinvp_enumeration() {
        // Direct count of Z[1/2]-primitive vectors with ‖v‖_2 = 2^t.
        let p = 2u64;
        for t in -1i64..=1 {
            let mut n = 0;
            let bound = 40i64;
            for a in -bound..=bound {
                for b in -bound..=bound {
                    let v = crate::plane::QpVec2::new(p, ZInvP::new(p, a.into(), -t), ZInvP::new(p, b.into(), -t));
                    if a == 0 && b == 0 || a.gcd(&b) != 1 {
                        continue;
                    }
                    let ns = (a * a + b * b) as f64 * 4f64.powi(-t as i32);
                    if ns <= 100.0 && v.norm() == crate::padic::PNorm::Pow(t) {
                        n += 1;
                    }
                }
            }
            assert_eq!(lattice_growth_oracle(p, 10, t).unwrap(), n, "t={t}");
        }
    }

    #[test]
    fn real_volume_variants() {
        let near_one = real_iwasawa_volume(&RealArc::full(), 1.0 + 1e-9, 1.0).unwrap();
        assert!(near_one.e < 1e-6 && near_one.p < 1e-6);
        let big = real_iwasawa_volume(&RealArc::full(), 1e9, 1.0).unwrap();
        assert!(big.e < std::f64::consts::TAU + 1e-9);
        assert!(real_iwasawa_volume(&RealArc::full(), 1.0, 1.0).is_err());
    }

    #[test]
    fn arbitration_winners_are_frozen() {
        assert_eq!(arbitrate_t_exponent(2, 500, &[-1, 0, 1]).unwrap().winner, T_EXPONENT_WINNER);
        assert_eq!(arbitrate_real_density(500).unwrap().winner, REAL_DENSITY_WINNER);
        for bx in standard_boxes(2, 2, 2).unwrap() {
            let w = arbitrate_box(&bx, 2, RESIDUE_CAP).unwrap().winner;
            assert!(w == N_FACTOR_WINNER || w == Variant::Both, "{}", bx.label());
        }
    }
}
