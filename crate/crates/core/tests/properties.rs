use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

use primdir::decomp::{bruhat_exact, compose_bruhat, in_gplus};
use primdir::experiment::{normalized_arc_measures, predicted_totals, sums_to_one};
use primdir::lattice::{fund_reduce, FundDomain};
use primdir::matrix::Mat2;
use primdir::padic::rational_residue;
use primdir::plane::{ArcPartition, QpVec2};
use primdir::{PAdicApprox, ZInvP};

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

fn zinvp(p: u64) -> impl Strategy<Value = ZInvP> {
    (-10_000i64..10_000, -6i64..6).prop_map(move |(m, e)| ZInvP::new(p, BigInt::from(m), e))
}

fn rational(m: i64, e: i64, p: u64) -> BigRational {
    let r = BigRational::from_integer(BigInt::from(m));
    let pe = BigRational::from_integer(BigInt::from(p).pow(e.unsigned_abs() as u32));
    if e >= 0 { r * pe } else { r / pe }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn zinvp_ring_ops_match_rationals(
        p in prime(), m1 in -10_000i64..10_000, e1 in -6i64..6, m2 in -10_000i64..10_000, e2 in -6i64..6,
    ) {
        let (x, y) = (ZInvP::new(p, BigInt::from(m1), e1), ZInvP::new(p, BigInt::from(m2), e2));
        let (rx, ry) = (rational(m1, e1, p), rational(m2, e2, p));
        prop_assert_eq!((&x + &y).to_rational(), &rx + &ry);
        prop_assert_eq!((&x - &y).to_rational(), &rx - &ry);
        prop_assert_eq!((&x * &y).to_rational(), &rx * &ry);
        for z in [&x + &y, &x * &y] {
            prop_assert!(z.is_zero() || !z.mantissa().is_multiple_of(&BigInt::from(p)));
            prop_assert!(!z.is_zero() || z.exponent() == 0);
        }
    }

    #[test]
    fn zinvp_text_round_trips(x in prime().prop_flat_map(zinvp)) {
        let p = x.p();
        prop_assert_eq!(ZInvP::parse(p, &x.to_string()).unwrap(), x.clone());
        prop_assert_eq!(ZInvP::parse(p, &x.to_fraction_string()).unwrap(), x);
    }

    #[test]
    fn approx_residues_match_rational(p in prime(), num in 1i64..1_000_000, den in 0i64..1_000, r in 1u64..7, k in 1u32..6) {
        let den = den * p as i64 + (r % p).max(1) as i64;
        let q = BigRational::new(BigInt::from(num), BigInt::from(den));
        let a = PAdicApprox::from_rational(p, &q, 12).unwrap();
        prop_assert_eq!(a.residue(k).unwrap(), rational_residue(&q, p, k).unwrap());
    }

    #[test]
    fn approx_products_agree_with_exact((x, y) in prime().prop_flat_map(|p| (zinvp(p), zinvp(p)))) {
        let (ax, ay) = (PAdicApprox::from_zinvp(&x, 8), PAdicApprox::from_zinvp(&y, 8));
        prop_assert!((ax * ay).agrees_with(&(&x * &y)));
        prop_assert!((ax + ay).agrees_with(&(&x + &y)));
    }

    #[test]
    fn fund_reduce_lands_in_domain_and_is_unique(
        p in prime(), xn in -100_000i64..100_000, an in -100_000i64..100_000, e in 0i64..5, shift in -50i64..50, se in -4i64..4,
    ) {
        let x = rational(xn, -3, 7);
        let alpha = rational(an, -e, p);
        let f = fund_reduce(p, &x, &alpha).to_rational();
        prop_assert!(FundDomain.contains(p, &(&x - &f), &(&alpha - &f)));
        // Translates by a nonzero element of Z[1/p] leave the domain.
        prop_assume!(shift != 0);
        let g = &f + rational(shift, se, p);
        prop_assert!(!FundDomain.contains(p, &(&x - &g), &(&alpha - &g)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 2_000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bruhat_round_trip(p in prime(), a in -500i64..500, e in -3i64..3, b in -500i64..500, c in -500i64..500) {
        // g = [[a', c], [b, d]] with det 1, built from a' = a p^e.
        // A word in the elementary generators and the diagonal torus.
        let x = ZInvP::new(p, BigInt::from(a), e);
        let (y, z) = (ZInvP::new(p, BigInt::from(b), -e), ZInvP::from_int(p, c));
        let h = Mat2::diag(ZInvP::pow(p, e), ZInvP::pow(p, -e));
        let g = &(&(&Mat2::upper(x) * &Mat2::lower(y)) * &Mat2::upper(z)) * &h;
        prop_assert!(g.is_special_linear());
        prop_assume!(in_gplus(&g, p).unwrap());
        let f = bruhat_exact(&g).unwrap();
        prop_assert_eq!(compose_bruhat(&f, p).unwrap(), g.to_rational());
    }

    #[test]
    fn arcs_partition_the_circle(p in prime(), level in 1u32..3, a in -2_000i64..2_000, b in -2_000i64..2_000) {
        prop_assume!(a != 0 || b != 0);
        let g = a.gcd(&b);
        let (a, b) = (a / g, b / g);
        let part = ArcPartition::new(p, level).unwrap();
        let v = QpVec2::from_ints(p, a, b);
        let hits: Vec<usize> = (0..part.len()).filter(|&i| part.arcs()[i].contains(&v).unwrap()).collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert_eq!(part.index_of(a, b), Some(hits[0]));
    }
}

#[test]
fn arc_measures_and_predictions_sum_to_one() {
    for p in [2u64, 3, 5, 7] {
        for level in 1..=3 {
            assert!(sums_to_one(&normalized_arc_measures(p, level).unwrap()));
            for sectors in [1, 4, 7] {
                let (real, padic) = predicted_totals(p, level, sectors).unwrap();
                assert!((real - 1.0).abs() < 1e-12);
                assert!(padic.is_one(), "p={p} N={level}");
            }
        }
    }
}
