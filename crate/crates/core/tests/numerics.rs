use std::cmp::Ordering;

use dspec_core::exact_numerics::*;
use dspec_core::Error;
use num_bigint::BigInt;
use proptest::prelude::*;

fn iv(lo: Rational, hi: Rational) -> RationalInterval {
    RationalInterval::new(lo, hi).unwrap()
}

#[test]
fn cmp_sqrt_examples() {
    assert_eq!(cmp_sqrt(&rat(4, 1), &rat(9, 1)).unwrap(), Ordering::Less);
    assert_eq!(cmp_sqrt(&rat(1, 4), &rat(1, 4)).unwrap(), Ordering::Equal);
    // 17/12 > √2
    assert_eq!(cmp_sqrt(&rat(2, 1), &rat(289, 144)).unwrap(), Ordering::Less);
    assert!(matches!(cmp_sqrt(&rat(-1, 1), &rat(1, 1)), Err(Error::Domain(_))));
}

#[test]
fn sqrt_enclosure_examples() {
    let two = sqrt_enclosure(&rat(4, 1), 30).unwrap();
    assert!(two.contains(&rat(2, 1)));
    assert!(two.width() <= rat(1, 1 << 30));

    let r2 = sqrt_enclosure(&rat(2, 1), 20).unwrap();
    assert!(r2.lo >= rat(141421, 100000) && r2.hi <= rat(141422, 100000), "{r2}");

    let z = sqrt_enclosure(&rat(0, 1), 5).unwrap();
    assert_eq!(z, RationalInterval::point(rat(0, 1)));
    assert!(matches!(sqrt_enclosure(&rat(-1, 3), 8), Err(Error::Domain(_))));
}

#[test]
fn interval_examples() {
    let s = interval_arith(IntervalOp::Add, &iv(rat(1, 1), rat(2, 1)), &iv(rat(3, 1), rat(4, 1))).unwrap();
    assert_eq!(s, iv(rat(4, 1), rat(6, 1)));
    let m = interval_arith(IntervalOp::Mul, &iv(rat(-1, 1), rat(1, 1)), &iv(rat(-1, 1), rat(1, 1))).unwrap();
    assert_eq!(m, iv(rat(-1, 1), rat(1, 1)));
    let d = interval_arith(IntervalOp::Div, &iv(rat(1, 1), rat(1, 1)), &iv(rat(2, 1), rat(4, 1))).unwrap();
    assert_eq!(d, iv(rat(1, 4), rat(1, 2)));
    let bad = interval_arith(IntervalOp::Div, &iv(rat(1, 1), rat(2, 1)), &iv(rat(-1, 1), rat(1, 1)));
    assert!(matches!(bad, Err(Error::Domain(_))));
    assert!(RationalInterval::new(rat(2, 1), rat(1, 1)).is_err());
}

#[test]
fn two_over_sqrt3_is_tight() {
    let e = two_over_sqrt3(64);
    assert!(e.lo > rat(115470, 100000) && e.hi < rat(115471, 100000));
    assert!(&e.lo * &e.lo <= rat(4, 3) && &e.hi * &e.hi >= rat(4, 3));
}

#[test]
fn rational_text_round_trip() {
    // always num/den, even for integers
    for s in ["0/1", "7/1", "-3/4", "123456789012345678901234567891/2"] {
        assert_eq!(fmt_rational(&parse_rational(s).unwrap()), s);
    }
    assert_eq!(parse_rational("7").unwrap(), rat(7, 1));
    assert_eq!(parse_rational("6/8").unwrap(), rat(3, 4));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("x").is_err());
    assert!(parse_int("12a").is_err());
}

#[test]
fn centered_mod_range() {
    let m = BigInt::from(7);
    for a in -20..20 {
        let r = centered_mod(&BigInt::from(a), &m);
        assert!(r > BigInt::from(-4) && r <= BigInt::from(3));
        assert_eq!((BigInt::from(a) - &r) % &m, BigInt::from(0));
    }
}

fn small_rat() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..1_000).prop_map(|(n, d)| rat(n, d))
}

fn small_iv() -> impl Strategy<Value = RationalInterval> {
    (small_rat(), small_rat()).prop_map(|(a, b)| if a <= b { iv(a, b) } else { iv(b, a) })
}

proptest! {
    #[test]
    fn sqrt_enclosure_is_sound_and_narrow(n in 0i64..1_000_000_000, d in 1i64..1_000_000, bits in 8u32..96) {
        let r = rat(n, d);
        let e = sqrt_enclosure(&r, bits).unwrap();
        prop_assert!(&e.lo * &e.lo <= r);
        prop_assert!(&e.hi * &e.hi >= r);
        let scale = if e.hi > rat(1, 1) { e.hi.clone() } else { rat(1, 1) };
        let tol = scale * Rational::new(BigInt::from(1), BigInt::from(1) << bits as usize);
        prop_assert!(e.width() <= tol);
    }

    #[test]
    fn cmp_sqrt_agrees_with_squares(a in small_rat(), b in small_rat()) {
        let (a, b) = (&a * &a, &b * &b);
        prop_assert_eq!(cmp_sqrt(&a, &b).unwrap(), a.cmp(&b));
    }

    #[test]
    fn sum_sqrt_le_matches_enclosures(a in 0i64..500, b in 0i64..500, c in 0i64..2_000) {
        let (a, b, c) = (rat(a, 1), rat(b, 1), rat(c, 1));
        let lhs = sqrt_enclosure(&a, 80).unwrap().add(&sqrt_enclosure(&b, 80).unwrap());
        let rhs = sqrt_enclosure(&c, 80).unwrap();
        let exact = sum_sqrt_le(&a, &b, &c);
        if lhs.hi < rhs.lo { prop_assert!(exact); }
        if lhs.lo > rhs.hi { prop_assert!(!exact); }
    }

    #[test]
    fn interval_ops_contain_pointwise_results(
        a in small_iv(), b in small_iv(), s in 0u32..=8, t in 0u32..=8
    ) {
        let pick = |i: &RationalInterval, k: u32| &i.lo + i.width() * rat(k as i64, 8);
        let (x, y) = (pick(&a, s), pick(&b, t));
        prop_assert!(a.add(&b).contains(&(&x + &y)));
        prop_assert!(a.sub(&b).contains(&(&x - &y)));
        prop_assert!(a.mul(&b).contains(&(&x * &y)));
        prop_assert!(a.square().contains(&(&x * &x)));
        if !b.contains_zero() {
            prop_assert!(a.div(&b).unwrap().contains(&(&x / &y)));
        }
    }

    #[test]
    fn interval_ops_are_inclusion_monotone(a in small_iv(), b in small_iv(), grow in 0i64..50) {
        let g = rat(grow, 7);
        let wide = |i: &RationalInterval| iv(&i.lo - &g, &i.hi + &g);
        let (aw, bw) = (wide(&a), wide(&b));
        for op in [IntervalOp::Add, IntervalOp::Sub, IntervalOp::Mul] {
            let narrow = interval_arith(op, &a, &b).unwrap();
            let broad = interval_arith(op, &aw, &bw).unwrap();
            prop_assert!(narrow.is_subset(&broad), "{:?}", op);
        }
    }

    #[test]
    fn floor_ceil_sqrt_bracket(n in 0i64..10_000_000, d in 1i64..1_000) {
        let r = rat(n, d);
        let f = rat_int(&floor_sqrt(&r).unwrap());
        let c = rat_int(&ceil_sqrt(&r).unwrap());
        prop_assert!(&f * &f <= r && r <= &c * &c);
        prop_assert!(&c - &f <= rat(1, 1));
        let f1 = &f + rat(1, 1);
        prop_assert!(&f1 * &f1 > r);
    }
}
