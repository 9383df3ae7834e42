//! Congruence neighbourhoods of the identity, adjoint operator norms, the
//! effective Bruhat-Iwasawa perturbation bounds, and an exact residue-level
//! check that Bruhat boxes are bi-invariant under `O_ε`.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::bruhat_padic;
use crate::error::{Error, Result};
use crate::haar::BruhatBox;
use crate::haar::QRegion;
use crate::matrix::Mat2;
use crate::padic::{checked_pow, inv_mod, mul_mod, pow_mod, pow_p_rational, strip_p_int, valuation_rational, PNorm, Valuation, ZInvP};
use crate::scalar::{Field, PAdicValued, Scalar};

/// Subgroup that a neighbourhood is intersected with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subgroup {
    G,
    /// Lower triangular `[[u, 0], [m, u^-1]]`.
    Q,
    /// Upper unipotent.
    Upper,
    /// Lower unipotent.
    Lower,
    /// Diagonal torus.
    Torus,
}

/// `O_ε^H = (I + p^N Mat2(Z_p)) ∩ H` with `ε = p^{-N}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NbhdSpec {
    pub level: u32,
    pub subgroup: Subgroup,
}

impl NbhdSpec {
    pub fn new(level: u32, subgroup: Subgroup) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidConfig("neighbourhood level must be at least 1".into()));
        }
        Ok(NbhdSpec { level, subgroup })
    }
}

/// Whether `x` is known to have valuation `>= n`.
fn at_least<T: PAdicValued>(x: &T, p: u64, n: i64) -> Result<bool> {
    match x.valuation_at(p) {
        Ok(v) => Ok(v >= Valuation::Finite(n)),
        Err(Error::PrecisionExhausted { abs_prec }) if abs_prec >= n => Ok(true),
        Err(Error::PrecisionExhausted { abs_prec }) => Err(Error::InsufficientPrecision { needed: n, available: abs_prec }),
        Err(e) => Err(e),
    }
}

fn vanishes<T: Scalar + PAdicValued>(x: &T, p: u64) -> bool {
    x.is_zero_value() || matches!(x.valuation_at(p), Err(Error::PrecisionExhausted { .. }))
}

pub fn nbhd_contains<T: Scalar + PAdicValued>(g: &Mat2<T>, p: u64, spec: &NbhdSpec) -> Result<bool> {
    let n = spec.level as i64;
    if !vanishes(&(g.det() - g.a.one_like()), p) {
        return Err(Error::NotSpecialLinear);
    }
    let one = g.a.one_like();
    let diff = g.sub_ref(&Mat2::identity_like(&one));
    for e in diff.entries() {
        if !at_least(e, p, n)? {
            return Ok(false);
        }
    }
    let shape = match spec.subgroup {
        Subgroup::G => true,
        Subgroup::Q => vanishes(&g.c, p),
        Subgroup::Upper => vanishes(&g.b, p) && vanishes(&diff.a, p) && vanishes(&diff.d, p),
        Subgroup::Lower => vanishes(&g.c, p) && vanishes(&diff.a, p) && vanishes(&diff.d, p),
        Subgroup::Torus => vanishes(&g.b, p) && vanishes(&g.c, p),
    };
    Ok(shape)
}

/// `g = q · n` with `q ∈ O^Q`, `n ∈ O^N`. Writing `g = I + p^N [[a, b], [c, d]]`,
/// `q = [[1 + p^N a, 0], [p^N c, (1 + p^N a)^{-1}]]` and `n = n(p^N b / (1 + p^N a))`.
pub fn split_nbhd<T: Field + PAdicValued>(g: &Mat2<T>, p: u64, level: u32) -> Result<(Mat2<T>, Mat2<T>)> {
    if !nbhd_contains(g, p, &NbhdSpec::new(level, Subgroup::G)?)? {
        return Err(Error::NotInNeighborhood { level });
    }
    let q = Mat2 { a: g.a.clone(), b: g.b.clone(), c: g.a.zero_like(), d: g.a.try_inv()? };
    let n = Mat2::upper(g.c.try_div(&g.a)?);
    Ok((q, n))
}

/// `q = n⁻ · m` for `q = I + p^N [[a, 0], [c, d]] ∈ O^Q`: `m = diag(1 + p^N a, 1 + p^N d)`
/// and `n⁻ = n⁻(p^N z)` with `z = c / (1 + p^N a)`.
pub fn split_q<T: Field + PAdicValued>(q: &Mat2<T>, p: u64, level: u32) -> Result<(Mat2<T>, Mat2<T>)> {
    if !nbhd_contains(q, p, &NbhdSpec::new(level, Subgroup::Q)?)? {
        return Err(Error::NotInNeighborhood { level });
    }
    let lower = Mat2::lower(q.b.try_div(&q.a)?);
    let torus = Mat2::diag(q.a.clone(), q.d.clone());
    Ok((lower, torus))
}

/// Exact element of `O_{p^{-N}}`: `a, b, c` uniform mod `p^{N + extra}`,
/// `d` solved so that the determinant is 1.
pub fn random_nbhd_element<R: Rng + ?Sized>(p: u64, level: u32, extra: u32, rng: &mut R) -> Mat2<BigRational> {
    let m = p.pow(extra.max(1));
    let pn = pow_p_rational(p, level as i64);
    let mut draw = || BigRational::from_integer(BigInt::from(rng.gen_range(0..m)));
    let (a, b, c) = (draw(), draw(), draw());
    let one = BigRational::one();
    // (1 + p^N a)(1 + p^N d) - p^{2N} b c = 1  gives  d = (p^N b c - a) / (1 + p^N a).
    let d = (&pn * &b * &c - &a) / (&one + &pn * &a);
    Mat2 { a: &one + &pn * a, b: &pn * c, c: &pn * b, d: one + pn * d }
}

/// Matrix of `T ↦ g T g^{-1}` on `Mat2` in the basis `E11, E21, E12, E22`.
pub fn ad_matrix<T: Field>(g: &Mat2<T>) -> Result<[[T; 4]; 4]> {
    let inv = g.inverse()?;
    let gr = [[&g.a, &g.c], [&g.b, &g.d]];
    let ir = [[&inv.a, &inv.c], [&inv.b, &inv.d]];
    let idx = [(0, 0), (1, 0), (0, 1), (1, 1)];
    let mut out: [[T; 4]; 4] = std::array::from_fn(|_| std::array::from_fn(|_| g.a.zero_like()));
    // (g E_ij g^{-1})_kl = g_ki · inv_jl
    for (col, &(i, j)) in idx.iter().enumerate() {
        for (row, &(k, l)) in idx.iter().enumerate() {
            out[row][col] = gr[k][i].clone() * ir[j][l].clone();
        }
    }
    Ok(out)
}

/// Max-norm of a list of entries. Errors when an entry with unknown
/// valuation could dominate.
pub fn max_norm<'a, T: PAdicValued + 'a>(entries: impl IntoIterator<Item = &'a T>, p: u64) -> Result<PNorm> {
    let mut known: Option<i64> = None;
    let mut bound: Option<i64> = None;
    for e in entries {
        match e.valuation_at(p) {
            Ok(Valuation::Finite(v)) => known = Some(known.map_or(v, |k| k.min(v))),
            Ok(Valuation::Infinity) => {}
            Err(Error::PrecisionExhausted { abs_prec }) => bound = Some(bound.map_or(abs_prec, |b| b.min(abs_prec))),
            Err(err) => return Err(err),
        }
    }
    match (known, bound) {
        (Some(v), Some(b)) if b < v => Err(Error::InsufficientPrecision { needed: v, available: b }),
        (Some(v), _) => Ok(PNorm::Pow(-v)),
        (None, Some(b)) => Err(Error::PrecisionExhausted { abs_prec: b }),
        (None, None) => Ok(PNorm::Zero),
    }
}

/// `‖Ad g‖_op`, the largest `|·|_p` among the 16 entries of [`ad_matrix`].
pub fn ad_opnorm<T: Field + PAdicValued>(g: &Mat2<T>, p: u64) -> Result<PNorm> {
    let m = ad_matrix(g)?;
    max_norm(m.iter().flatten(), p)
}

/// Both readings of the constant `c(a, n)` as exponents of p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EffectiveConstants {
    /// `‖Ad n‖ · max(p^{-t}, 1)`.
    pub statement: i64,
    /// `C(a)^2 C(n)` with `C(a) = max(p^{-2t}, 1)`, `C(n) = ‖Ad n‖`.
    pub proof: i64,
}

pub fn effective_constant(p: u64, t: i64, x: &BigRational) -> EffectiveConstants {
    let ad_n = match valuation_rational(x, p) {
        Valuation::Finite(v) if v < 0 => -2 * v,
        _ => 0,
    };
    EffectiveConstants { statement: ad_n + (-t).max(0), proof: 2 * (-2 * t).max(0) + ad_n }
}

/// Outcome of a sampled inclusion check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionOutcome {
    pub samples: usize,
    pub failures: usize,
    /// `(u, v)` of the first failure.
    pub witness: Option<(String, String)>,
}

impl InclusionOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Samples `u, v ∈ O_{p^{-N}}` and checks that `u·q·a_t·n_x·v` has Bruhat
/// factors `q' ∈ q O^Q_{cε}`, `t' = t` and `n' ∈ O^N_{cε} n` with `c = p^{c_exp}`.
#[allow(clippy::too_many_arguments)]
pub fn effective_inclusion_check<R: Rng + ?Sized>(
    p: u64,
    q: &Mat2<BigRational>,
    t: i64,
    x: &BigRational,
    level: u32,
    c_exp: i64,
    samples: usize,
    rng: &mut R,
) -> Result<InclusionOutcome> {
    if level as i64 <= c_exp {
        return Err(Error::InvalidConfig(format!("ε = {p}^-{level} is not below 1/c = {p}^-{c_exp}")));
    }
    let target = level as i64 - c_exp;
    let a = Mat2::a_factor(&BigRational::one(), p, t);
    let g = q * &a * Mat2::upper(x.clone());
    let q_inv = q.inverse()?;
    let mut failures = 0;
    let mut witness = None;
    for _ in 0..samples {
        let u = random_nbhd_element(p, level, level + 2, rng);
        let v = random_nbhd_element(p, level, level + 2, rng);
        let h = &(&u * &g) * &v;
        let ok = match bruhat_padic(&h, p) {
            Ok(f) => {
                let dq = &q_inv * &f.q_factor()?;
                let dq_ok = nbhd_contains(&dq, p, &NbhdSpec::new(target as u32, Subgroup::Q)?)?;
                let dn_ok = valuation_rational(&(&f.beta - x), p) >= Valuation::Finite(target);
                f.t == t && dq_ok && dn_ok
            }
            Err(Error::NotInGPlus) => false,
            Err(e) => return Err(e),
        };
        if !ok {
            failures += 1;
            if witness.is_none() {
                witness = Some((u.to_string(), v.to_string()));
            }
        }
    }
    Ok(InclusionOutcome { samples, failures, witness })
}

/// `g O_{p^{-N}} g^{-1} ⊆ O_{‖Ad g‖ p^{-N}}`, checked on one `u ∈ O_{p^{-N}}`:
/// every entry of `g u g^{-1} - I` has `|·|_p <= ‖Ad g‖ p^{-N}`.
pub fn conjugation_inclusion(g: &Mat2<BigRational>, u: &Mat2<BigRational>, p: u64, level: u32) -> Result<bool> {
    let PNorm::Pow(ad) = ad_opnorm(g, p)? else {
        return Err(Error::Singular);
    };
    let conj = &(g * u) * &g.inverse()?;
    let diff = conj.sub_ref(&Mat2::identity_like(&BigRational::one()));
    let bound = Valuation::Finite(level as i64 - ad);
    Ok(diff.entries().iter().all(|e| valuation_rational(e, p) >= bound))
}

/// `a^{-1} n_x a = n_{x p^{2t}}` and `a n⁻_y a^{-1} = n⁻_{y p^{2t}}` for
/// `a = diag(p^{-t}, p^t)`, computed in Z[1/p].
pub fn conjugation_identities_hold(p: u64, t: i64, x: &ZInvP, y: &ZInvP) -> bool {
    let a = Mat2::a_factor(&ZInvP::one(p), p, t);
    let a_inv = Mat2::a_factor(&ZInvP::one(p), p, -t);
    let upper = &(&a_inv * &Mat2::upper(x.clone())) * &a;
    let lower = &(&a * &Mat2::lower(y.clone())) * &a_inv;
    upper == Mat2::upper(x.mul_pow_p(2 * t)) && lower == Mat2::lower(y.mul_pow_p(2 * t))
}

/// Default cap on residue cells enumerated per box.
pub const WR_BUDGET: u64 = 500_000;

/// Result of the residue-level bi-invariance check of one box at one ε.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WRVerdict {
    #[serde(rename = "box")]
    pub bx: String,
    pub p: u64,
    /// `ε = p^{-eps_level}`.
    pub eps_level: u32,
    /// Residue level at which the clopen sets were compared.
    pub residue_level: u32,
    pub classes: u64,
    pub exhaustive: bool,
    /// Whether `ε` is below the threshold at which equality is guaranteed.
    pub in_regime: bool,
    /// `O_ε B O_ε = B`.
    pub plus_set_equal: bool,
    /// `{g : O_ε g O_ε ⊆ B} = B`.
    pub minus_set_equal: bool,
    /// Classes of B with a one-step neighbour outside B; these lie outside `B⁻(ε)`.
    pub minus_defects: u64,
}

impl WRVerdict {
    pub fn holds(&self) -> bool {
        self.plus_set_equal && self.minus_set_equal
    }
}

/// Residue data of a box: elements `g ∈ B` are tracked through `p^s g mod p^W`.
struct ResidueBox {
    p: u64,
    w: u32,
    modulus: u64,
    s: i64,
    t1: i64,
    t2: i64,
    k: u32,
    cx: u64,
    cy: u64,
    psi: i64,
    /// `α = alpha_num / p^alpha_den_exp`.
    alpha_num: i128,
    alpha_den_exp: i64,
    /// `min(ν(α), ψ)`.
    e_beta: i64,
}

fn res_val(x: u64, p: u64, w: u32) -> u32 {
    if x == 0 {
        return w;
    }
    let mut x = x;
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

fn mod_i128(x: i128, m: u64) -> u64 {
    x.rem_euclid(m as i128) as u64
}

fn mat_mul_mod(x: &[u64; 4], y: &[u64; 4], m: u64) -> [u64; 4] {
    let f = |i: u64, j: u64, k: u64, l: u64| (mul_mod(i, j, m) + mul_mod(k, l, m)) % m;
    // column-major [a, b, c, d] = [[a, c], [b, d]]
    [f(x[0], y[0], x[2], y[1]), f(x[1], y[0], x[3], y[1]), f(x[0], y[2], x[2], y[3]), f(x[1], y[2], x[3], y[3])]
}

impl ResidueBox {
    fn new(bx: &BruhatBox, w: u32) -> Result<Self> {
        let p = bx.p;
        let modulus = checked_pow(p, w).filter(|m| *m < 1 << 40).ok_or_else(|| Error::LevelTooLarge(format!("{p}^{w}")))?;
        let alpha = bx.alpha.to_rational();
        let (alpha_num, alpha_den_exp) = if alpha.is_zero() {
            (0, 0)
        } else {
            let (m, e) = strip_p_int(alpha.numer(), p);
            let m = m.to_i128().ok_or_else(|| Error::Infeasible("α too large".into()))?;
            let m = m * i128::from(p).pow(e.max(0) as u32);
            (m, (-bx.alpha.exponent()).max(0))
        };
        let e_beta = match valuation_rational(&alpha, p) {
            Valuation::Finite(v) => v.min(bx.psi),
            Valuation::Infinity => bx.psi,
        };
        let s = (bx.t2 - e_beta.min(0)).max(-bx.t1).max(0);
        let (k, cx, cy) = match bx.region {
            QRegion::HalfSphere => (0, 0, 0),
            QRegion::Arc(arc) => (arc.level, arc.cx, arc.cy),
        };
        Ok(ResidueBox { p, w, modulus, s, t1: bx.t1, t2: bx.t2, k, cx, cy, psi: bx.psi, alpha_num, alpha_den_exp, e_beta })
    }

    fn pow(&self, e: i64) -> u64 {
        pow_mod(self.p, e as u64, self.modulus)
    }

    /// Coordinate precisions `(W_q, W_β)` for slice t.
    fn cell_precisions(&self, t: i64) -> (u32, u32) {
        let w = self.w as i64;
        let wq = (w - self.s + t - self.e_beta.min(0)).max(w - self.s - t).max(self.k as i64).max(1);
        let wb = (w - self.s + t - self.psi).max(0);
        (wq as u32, wb as u32)
    }

    fn cell_count(&self) -> Option<u64> {
        let mut total: u64 = 0;
        for t in self.t1..=self.t2 {
            let (wq, wb) = self.cell_precisions(t);
            let per = checked_pow(self.p, wq - self.k.min(wq))?;
            let (us, ms) = if self.k == 0 { (per / self.p * (self.p - 1), per) } else { (per, per) };
            total = total.checked_add(us.checked_mul(ms)?.checked_mul(checked_pow(self.p, wb)?)?)?;
        }
        Some(total)
    }

    /// `p^{s-t} (α + p^ψ j) mod p^W`.
    fn scaled_beta(&self, t: i64, j: u64) -> u64 {
        let shift = self.s - t - self.alpha_den_exp;
        let head = mod_i128(self.alpha_num, self.modulus);
        let head = mul_mod(head, self.pow(shift), self.modulus);
        let tail = mul_mod(j % self.modulus, self.pow(self.s - t + self.psi), self.modulus);
        (head + tail) % self.modulus
    }

    /// Every residue class `p^s g mod p^W` of an element of the box.
    fn classes(&self) -> HashSet<[u64; 4]> {
        let m = self.modulus;
        let mut out = HashSet::new();
        for t in self.t1..=self.t2 {
            let (wq, wb) = self.cell_precisions(t);
            let mq = self.p.pow(wq);
            let step = self.p.pow(self.k);
            let start = |c: u64| if self.k == 0 { 0 } else { c % step };
            let (scale, scale_inv) = (self.pow(self.s - t), self.pow(self.s + t));
            let mut u = start(self.cx);
            while u < mq {
                if u % self.p != 0 {
                    let u_inv = inv_mod(u % m, m).expect("unit");
                    let mut mm = start(self.cy);
                    while mm < mq {
                        for j in 0..self.p.pow(wb) {
                            let beta = self.scaled_beta(t, j);
                            let a = mul_mod(u, scale, m);
                            let b = mul_mod(mm, scale, m);
                            let c = mul_mod(u, beta, m);
                            let d = (mul_mod(mm, beta, m) + mul_mod(u_inv, scale_inv, m)) % m;
                            out.insert([a, b, c, d]);
                        }
                        mm += step;
                    }
                }
                u += step;
            }
        }
        out
    }

    /// Whether every lift of the class lies in the box; `None` when the
    /// residue level is too coarse to tell.
    fn decide(&self, x: &[u64; 4]) -> Option<bool> {
        let (p, w) = (self.p, self.w);
        let [a, b, c, _] = *x;
        let va = res_val(a, p, w);
        if va >= w {
            return if w as i64 > self.s - self.t1 { Some(false) } else { None };
        }
        let t = self.s - va as i64;
        if t < self.t1 || t > self.t2 {
            return Some(false);
        }
        if res_val(b, p, w) < va {
            return Some(false);
        }
        let prec_u = w - va;
        let pv = p.pow(va);
        let (u, m) = (a / pv, b / pv);
        if self.k > 0 {
            if self.k > prec_u {
                return None;
            }
            let step = p.pow(self.k);
            if u % step != self.cx % step || m % step != self.cy % step {
                return Some(false);
            }
        }
        // ν(β - α) >= ψ  iff  ν(p^e c' u^{-1} - p^{va} A) >= ψ + va + e
        let vc = res_val(c, p, w);
        let w_x = w.min(vc + prec_u);
        let tau = self.psi + va as i64 + self.alpha_den_exp;
        if tau <= 0 {
            return Some(true);
        }
        let avail = w_x as i64 + self.alpha_den_exp;
        if avail < tau {
            return None;
        }
        let mx = p.pow(tau as u32);
        let mx_x = p.pow(w_x);
        let xr = mul_mod(c % mx_x, inv_mod(u % mx_x, mx_x).unwrap_or(0), mx_x);
        let y = mod_i128(
            xr as i128 * (p as i128).pow(self.alpha_den_exp as u32) - (pv as i128) * self.alpha_num,
            mx,
        );
        Some(y == 0)
    }

    fn generators(&self, level: u32) -> (Vec<[u64; 4]>, Vec<[u64; 4]>) {
        let m = self.modulus;
        let pn = pow_mod(self.p, level as u64, m);
        let neg = |x: u64| (m - x % m) % m;
        let h = (1 + pn) % m;
        let h_inv = inv_mod(h, m).expect("unit");
        let mut fwd = vec![[1 % m, 0, pn, 1 % m], [1 % m, pn, 0, 1 % m], [h, 0, 0, h_inv]];
        let mut back = vec![[1 % m, 0, neg(pn), 1 % m], [1 % m, neg(pn), 0, 1 % m], [h_inv, 0, 0, h]];
        if self.p == 2 && level == 1 {
            fwd.push([neg(1), 0, 0, neg(1)]);
            back.push([neg(1), 0, 0, neg(1)]);
        }
        (fwd, back)
    }
}

/// Checks `O_ε B O_ε = B` and `B⁻(ε) = B` for `ε = p^{-level}` by comparing
/// residue classes. `O_ε` is topologically generated by `n(p^N)`, `n⁻(p^N)`
/// and `diag(1 + p^N, ·)` (with `diag(-1, -1)` added for `p = 2, N = 1`), so
/// closure of the class set of B under these on both sides is exact.
pub fn wr_box_equality_at(bx: &BruhatBox, level: u32, budget: u64) -> Result<WRVerdict> {
    if level == 0 {
        return Err(Error::InvalidConfig("ε = 1 is not a congruence neighbourhood".into()));
    }
    let p = bx.p;
    let worst_x = match valuation_rational(&bx.alpha.to_rational(), p) {
        Valuation::Finite(v) => pow_p_rational(p, v.min(bx.psi)),
        Valuation::Infinity => pow_p_rational(p, bx.psi),
    };
    let c_exp = effective_constant(p, bx.t1, &worst_x).proof;
    let k = match bx.region {
        QRegion::HalfSphere => 0,
        QRegion::Arc(arc) => arc.level as i64,
    };
    let in_regime = level as i64 >= k.max(bx.psi) + c_exp;

    // Prefer a level where the generators act nontrivially, fall back to
    // coarser ones when the budget is exceeded.
    let upward = (level + 1..).take(4);
    let downward = (1..=level).rev();
    for w in upward.chain(downward) {
        let rb = match ResidueBox::new(bx, w) {
            Ok(rb) => rb,
            Err(_) => continue,
        };
        if rb.cell_count().is_none_or(|c| c > budget) {
            continue;
        }
        let classes = rb.classes();
        let mut undecided = false;
        for cls in &classes {
            match rb.decide(cls) {
                Some(true) => {}
                Some(false) => return Err(Error::Infeasible(format!("class {cls:?} of {} decided outside", bx.label()))),
                None => undecided = true,
            }
        }
        if undecided {
            continue;
        }
        let (fwd, back) = rb.generators(level);
        let m = rb.modulus;
        let mut sorted: Vec<_> = classes.iter().copied().collect();
        sorted.sort_unstable();
        let closed = |gens: &[[u64; 4]], cls: &[u64; 4]| {
            gens.iter().all(|s| classes.contains(&mat_mul_mod(s, cls, m)) && classes.contains(&mat_mul_mod(cls, s, m)))
        };
        let plus = sorted.iter().all(|c| closed(&fwd, c));
        let minus_defects = sorted.iter().filter(|c| !closed(&fwd, c) || !closed(&back, c)).count() as u64;
        return Ok(WRVerdict {
            bx: bx.label(),
            p,
            eps_level: level,
            residue_level: w,
            classes: classes.len() as u64,
            exhaustive: true,
            in_regime,
            plus_set_equal: plus,
            minus_set_equal: minus_defects == 0,
            minus_defects,
        });
    }
    Err(Error::LevelTooLarge(format!("no residue level within budget {budget} decides {}", bx.label())))
}

pub fn wr_box_equality(bx: &BruhatBox, eps_levels: &[u32]) -> Result<Vec<WRVerdict>> {
    eps_levels.iter().map(|&n| wr_box_equality_at(bx, n, WR_BUDGET)).collect()
}

/// Pass count over a number of trials.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: usize,
    pub passes: usize,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.trials += 1;
        self.passes += usize::from(ok);
    }

    pub fn all_passed(&self) -> bool {
        self.trials == self.passes
    }
}

/// Seeded randomized checks of the neighbourhood machinery.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledSuite {
    pub p: u64,
    pub precision: u32,
    pub level: u32,
    /// `‖Ad k‖ = 1` for `k ∈ SL2(Z_p)` at the given precision.
    pub ad_integral: Tally,
    /// `g O g^{-1} ⊆ O_{‖Ad g‖ε}` for random `g ∈ SL2(Z[1/p])`.
    pub conjugation: Tally,
    /// Conjugation of `n_x`, `n⁻_y` by `a_t`.
    pub identities: Tally,
    /// Both neighbourhood splittings reconstruct and land in their subgroups.
    pub splitting: Tally,
    /// Perturbation bounds at `t = 0` with the proof constant.
    pub inclusion_t0: Tally,
    /// Perturbation of `a_{-1} n_1` under the statement and proof constants.
    pub inclusion_statement: Tally,
    pub inclusion_proof: Tally,
}

impl SampledSuite {
    /// The checks that must hold exactly.
    pub fn exact_checks_pass(&self) -> bool {
        self.ad_integral.all_passed()
            && self.conjugation.all_passed()
            && self.identities.all_passed()
            && self.splitting.all_passed()
            && self.inclusion_t0.all_passed()
            && self.inclusion_proof.all_passed()
    }
}

fn random_q_factor<R: Rng + ?Sized>(p: u64, rng: &mut R) -> Mat2<BigRational> {
    let u = BigRational::from_integer(BigInt::from(rng.gen_range(1..p) + p * rng.gen_range(0..p * p)));
    let m = BigRational::from_integer(BigInt::from(rng.gen_range(0..p * p * p)));
    Mat2 { a: u.clone(), b: m, c: BigRational::zero(), d: BigRational::one() / u }
}

pub fn sampled_suite(p: u64, precision: u32, level: u32, samples: usize, seed: u64) -> Result<SampledSuite> {
    use crate::matrix::{random_sl2_zinvp, random_sl2_zp, random_zinvp};
    use rand::SeedableRng;
    if level == 0 {
        return Err(Error::InvalidConfig("ε = 1 is not a congruence neighbourhood".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ p.rotate_left(32));
    let mut suite = SampledSuite {
        p,
        precision,
        level,
        ad_integral: Tally::default(),
        conjugation: Tally::default(),
        identities: Tally::default(),
        splitting: Tally::default(),
        inclusion_t0: Tally::default(),
        inclusion_statement: Tally::default(),
        inclusion_proof: Tally::default(),
    };
    let spec = |h| NbhdSpec::new(level, h);
    for _ in 0..samples {
        let k = random_sl2_zp(p, precision, &mut rng);
        suite.ad_integral.record(ad_opnorm(&k, p)? == PNorm::ONE);

        let g = random_sl2_zinvp(p, 5, &mut rng).to_rational();
        let u = random_nbhd_element(p, level, 3, &mut rng);
        suite.conjugation.record(conjugation_inclusion(&g, &u, p, level)?);

        let t = rng.gen_range(-4..=4);
        let (x, y) = (random_zinvp(p, &mut rng), random_zinvp(p, &mut rng));
        suite.identities.record(conjugation_identities_hold(p, t, &x, &y));

        let (q, n) = split_nbhd(&u, p, level)?;
        let (lower, torus) = split_q(&q, p, level)?;
        suite.splitting.record(
            &q * &n == u
                && &lower * &torus == q
                && nbhd_contains(&q, p, &spec(Subgroup::Q)?)?
                && nbhd_contains(&n, p, &spec(Subgroup::Upper)?)?
                && nbhd_contains(&lower, p, &spec(Subgroup::Lower)?)?
                && nbhd_contains(&torus, p, &spec(Subgroup::Torus)?)?,
        );
    }
    // Sampled perturbations are costlier; a tenth of the budget each.
    let rounds = samples.div_ceil(10).max(1);
    for _ in 0..rounds {
        let q = random_q_factor(p, &mut rng);
        let x = pow_p_rational(p, rng.gen_range(-1..=1)) * BigRational::from_integer(BigInt::from(rng.gen_range(0..3 * p)));
        let c = effective_constant(p, 0, &x).proof;
        let n = level.max(c as u32 + 1);
        let out = effective_inclusion_check(p, &q, 0, &x, n, c, 10, &mut rng)?;
        suite.inclusion_t0.record(out.passed());

        let one = BigRational::one();
        let consts = effective_constant(p, -1, &one);
        let n = level.max(consts.proof as u32 + 1);
        let stmt = effective_inclusion_check(p, &q, -1, &one, n, consts.statement, 10, &mut rng)?;
        suite.inclusion_statement.record(stmt.passed());
        let proof = effective_inclusion_check(p, &q, -1, &one, n, consts.proof, 10, &mut rng)?;
        suite.inclusion_proof.record(proof.passed());
    }
    Ok(suite)
}
