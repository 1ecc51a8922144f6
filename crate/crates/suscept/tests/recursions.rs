//! Cross-recursion consistency of the polynomial families: the linear and
//! quadratic constructions must agree, the stated identities must hold, and
//! every structural fact about degrees, anchors, leading and trailing terms
//! must come out exactly.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, Zero};
use suscept::families::{leading_constant_c, PolyCache};
use suscept::poly::{double_factorial, factorial, Polynomial};

#[test]
fn linear_and_quadratic_routes_agree_up_to_k20() {
    let mut cache = PolyCache::new();
    assert_eq!(cache.p(2).unwrap(), Polynomial::x());
    for k in 3..=20 {
        let via_linear = cache.p(k).unwrap();
        let via_q = cache.q(k).unwrap().mul_xpow(k as usize);
        assert_eq!(
            via_linear, via_q,
            "p_{k} differs between the two recursions"
        );
    }
}

#[test]
fn r_equals_shifted_p_up_to_m19() {
    let mut cache = PolyCache::new();
    for m in 1..=19 {
        assert_eq!(cache.r(m).unwrap(), cache.p(m + 1).unwrap(), "r_{m}");
    }
}

#[test]
fn x_pi_equals_next_p_up_to_k19() {
    let mut cache = PolyCache::new();
    for k in 2..=19 {
        assert_eq!(
            cache.pi(k).unwrap().mul_xpow(1),
            cache.p(k + 1).unwrap(),
            "x * pi_{k}"
        );
    }
}

#[test]
fn anchors_at_one() {
    let mut cache = PolyCache::new();
    let one = BigRational::one();
    for k in 2..=20 {
        assert_eq!(cache.p(k).unwrap().eval_i64(1), one, "p_{k}(1)");
    }
    for k in 3..=20 {
        assert_eq!(cache.q(k).unwrap().eval_i64(1), one, "q_{k}(1)");
    }
    for k in 2..=8 {
        assert!(cache.py(k).unwrap().eval_i64(1).is_zero(), "py_{k}(1)");
    }
}

#[test]
fn leading_terms() {
    let mut cache = PolyCache::new();
    for k in 2..=20 {
        let p = cache.p(k).unwrap();
        assert_eq!(
            p.leading_coeff().unwrap(),
            &BigRational::from_integer(double_factorial(2 * k as i64 - 5)),
            "leading coefficient of p_{k}"
        );
    }
    for k in 2..=10u64 {
        for l in 2..=10u64 {
            let hp = cache.hp(k, l).unwrap();
            assert_eq!(
                hp.leading_coeff().unwrap(),
                &BigRational::from_integer(leading_constant_c(k, l)),
                "leading coefficient of hp_{k},{l}"
            );
        }
    }
}

#[test]
fn trailing_terms_of_p() {
    let mut cache = PolyCache::new();
    for k in 3..=20u64 {
        let p = cache.p(k).unwrap();
        let low = p
            .coeffs()
            .iter()
            .position(|c| !c.is_zero())
            .expect("nonzero polynomial");
        assert_eq!(low as u64, k, "lowest power of p_{k}");
        let sign = if k % 2 == 1 { 1 } else { -1 };
        assert_eq!(
            p.coeff(low),
            BigRational::from_integer(BigInt::from(sign) * factorial(k - 2)),
            "trailing coefficient of p_{k}"
        );
    }
}

#[test]
fn degrees_and_integrality() {
    let mut cache = PolyCache::new();
    for k in 2..=16u64 {
        let p = cache.p(k).unwrap();
        assert_eq!(p.degree(), Some((2 * k - 3) as usize));
        assert!(p.has_integer_coeffs());
    }
    for k in 3..=16u64 {
        let q = cache.q(k).unwrap();
        assert_eq!(q.degree(), Some((k - 3) as usize));
        assert!(q.has_integer_coeffs());
    }
    for k in 2..=8u64 {
        for l in 2..=8u64 {
            let hp = cache.hp(k, l).unwrap();
            assert_eq!(hp.degree(), Some((2 * k + 2 * l - 3) as usize));
            assert!(hp.has_integer_coeffs());
            assert_eq!(hp, cache.hp(l, k).unwrap(), "symmetry hp_{k},{l}");
        }
    }
    for k in 2..=12u64 {
        let pi = cache.pi(k).unwrap();
        assert_eq!(pi.degree(), Some((2 * k - 2) as usize));
        assert!(pi.has_integer_coeffs());
    }
    for m in 1..=12u64 {
        let r = cache.r(m).unwrap();
        assert_eq!(r.degree(), Some((2 * m - 1) as usize));
        assert!(r.has_integer_coeffs());
    }
    for k in 2..=8u64 {
        assert_eq!(cache.px(k).unwrap().degree(), Some((2 * k - 2) as usize));
        assert_eq!(cache.py(k).unwrap().degree(), Some((2 * k - 3) as usize));
    }
}

#[test]
fn px_q_form_equals_p_form() {
    // the construction uses products of q's scaled by x^2; the equivalent
    // route through products of p's divided by x^{2k} must agree exactly
    let mut cache = PolyCache::new();
    for k in 2..=6u64 {
        let mut sum = Polynomial::zero();
        for l in 1..k {
            for m in 1..k {
                let coeff = BigRational::new(
                    suscept::poly::binomial(k, l) * suscept::poly::binomial(k, m),
                    2.into(),
                );
                let term = &cache.p(l + m + 1).unwrap() * &cache.p(2 * k + 1 - l - m).unwrap();
                sum = &sum + &term.scale(&coeff);
            }
        }
        let via_p = sum.div_xpow(2 * k as usize).unwrap();
        assert_eq!(via_p, cache.px(k).unwrap(), "px_{k} route mismatch");
    }
}

#[test]
fn p_is_positive_and_nondecreasing_on_grid() {
    // spot check on x in {1, 3/2, 2, 4, 10}: values positive, derivative
    // nonnegative, all evaluated exactly over the rationals
    let mut cache = PolyCache::new();
    let grid = [
        BigRational::from_integer(1.into()),
        BigRational::new(3.into(), 2.into()),
        BigRational::from_integer(2.into()),
        BigRational::from_integer(4.into()),
        BigRational::from_integer(10.into()),
    ];
    for k in 2..=12 {
        let p = cache.p(k).unwrap();
        let dp = p.derivative();
        for x in &grid {
            assert!(p.eval(x).is_positive(), "p_{k}({x}) > 0");
            assert!(!dp.eval(x).is_negative(), "p_{k}'({x}) >= 0");
        }
    }
}
