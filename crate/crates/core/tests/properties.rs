use num_bigint::{BigInt, BigUint};
use proptest::prelude::*;

use pclass_core::padic::{dlog_gamma, padic_log, pow_p, teichmuller, PadicScalar};
use pclass_core::structure::{predict_structures, rank_formula_shape, GroupStructure};

const PRIMES: [u64; 6] = [5, 7, 11, 13, 37, 101];

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

fn nonzero() -> impl Strategy<Value = i64> {
    (-1_000_000_000i64..1_000_000_000).prop_filter("nonzero", |x| *x != 0)
}

fn scalar(p: u64, x: i64, k: u32) -> PadicScalar {
    PadicScalar::from_integer(p, x, k)
}

fn exact(p: u64, x: impl Into<BigInt>) -> PadicScalar {
    PadicScalar::from_integer(p, x, 80)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn ring_operations_agree_with_integers(p in prime(), x in nonzero(), y in nonzero(), k in 2u32..12) {
        let (a, b) = (scalar(p, x, k), scalar(p, y, k));
        let sum = &a + &b;
        prop_assert!(sum.eq_at_precision(&exact(p, x + y)));
        prop_assert!(sum.abs_precision() >= a.abs_precision().min(b.abs_precision()));
        let prod = &a * &b;
        prop_assert!(prod.eq_at_precision(&exact(p, BigInt::from(x) * y)));
        prop_assert_eq!(prod.abs_precision(), a.abs_precision() + b.abs_precision() - i64::from(k));
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn ring_laws(p in prime(), x in nonzero(), y in nonzero(), z in nonzero(), k in 2u32..10) {
        let (a, b, c) = (scalar(p, x, k), scalar(p, y, k), scalar(p, z, k));
        prop_assert!((&a + &b).eq_at_precision(&(&b + &a)));
        prop_assert!((&(&a * &b) * &c).eq_at_precision(&(&a * &(&b * &c))));
        prop_assert!((&a * &(&b + &c)).eq_at_precision(&(&(&a * &b) + &(&a * &c))));
    }

    #[test]
    fn division_inverts_multiplication(p in prime(), x in nonzero(), y in nonzero(), k in 2u32..10) {
        let (a, b) = (scalar(p, x, k), scalar(p, y, k));
        let q = (&a * &b).try_div(&b).unwrap();
        prop_assert!(q.eq_at_precision(&a));
        prop_assert_eq!(q.valuation(), a.valuation());
    }

    #[test]
    fn log_is_a_homomorphism(p in prime(), s in 0u64..1_000_000, t in 0u64..1_000_000, k in 3u32..10) {
        let m = pow_p(p, k);
        let u = |s: u64| BigUint::from(1 + p * s) % &m;
        let (x, y) = (u(s), u(t));
        let xy = (&x * &y) % &m;
        let lx = padic_log(&PadicScalar::from_residue(p, &x, k), i64::from(k)).unwrap();
        let ly = padic_log(&PadicScalar::from_residue(p, &y, k), i64::from(k)).unwrap();
        let lxy = padic_log(&PadicScalar::from_residue(p, &xy, k), i64::from(k)).unwrap();
        prop_assert!(lxy.eq_at_precision(&(&lx + &ly)));
        prop_assert!(lx.valuation_lower_bound() >= 1);
    }

    #[test]
    fn dlog_is_additive(p in prime(), s in 0u64..1_000_000, t in 0u64..1_000_000, n in 1u32..6) {
        let m = pow_p(p, n + 1);
        let gamma = BigUint::from(p + 1);
        let a = gamma.modpow(&BigUint::from(s), &m);
        let b = gamma.modpow(&BigUint::from(t), &m);
        let pn = pow_p(p, n);
        prop_assert_eq!(dlog_gamma(p, &a, n).unwrap(), BigUint::from(s) % &pn);
        let ab = (&a * &b) % &m;
        let sum = (dlog_gamma(p, &a, n).unwrap() + dlog_gamma(p, &b, n).unwrap()) % &pn;
        prop_assert_eq!(dlog_gamma(p, &ab, n).unwrap(), sum);
    }

    #[test]
    fn teichmuller_is_multiplicative(p in prime(), a in 1u64..10_000, b in 1u64..10_000, k in 1u32..8) {
        prop_assume!(a % p != 0 && b % p != 0);
        let wa = teichmuller(p, a, k).unwrap();
        let wb = teichmuller(p, b, k).unwrap();
        let wab = teichmuller(p, a * b % p, k).unwrap();
        prop_assert!((&wa * &wb).eq_at_precision(&wab));
        prop_assert_eq!(wa.residue(1).unwrap(), BigUint::from(a % p));
        prop_assert!(wa.pow((p - 1) as u32).eq_at_precision(&PadicScalar::one(p, k)));
    }

    #[test]
    fn group_structure_ignores_order(p in prime(), mut exps in prop::collection::vec(0u32..6, 0..8)) {
        let g = GroupStructure::new(p, exps.clone());
        exps.reverse();
        prop_assert_eq!(&g, &GroupStructure::new(p, exps.clone()));
        prop_assert_eq!(g.order_exponent(), exps.iter().sum::<u32>());
        prop_assert!(g.embeds_in(&g));
    }

    #[test]
    fn rank_formula_matches_closed_form(p in prime(), r in 1u32..5, extra in 0u32..5, n in 1u32..5) {
        let lambda = r + extra;
        let pred = predict_structures(p, n, r, lambda).unwrap();
        let mut ranks = vec![r];
        ranks.extend(std::iter::repeat_n(lambda, n as usize));
        prop_assert_eq!(&pred.rank_formula, &rank_formula_shape(p, n, &ranks).unwrap());
        prop_assert_eq!(pred.v.order_exponent(), r * n + (lambda - r) * (n - 1));
        prop_assert_eq!(pred.s.order_exponent(), r * (n + 1) + (lambda - r) * n);
        prop_assert!(pred.v.embeds_in(&pred.s));
    }
}
