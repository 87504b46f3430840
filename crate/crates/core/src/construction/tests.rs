use super::*;
use crate::exact::rat;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn finite(ell: usize, beta: BigRational, seed: u64) -> ConstructionParams {
    ConstructionParams::new(ell, Beta::Rational(beta), None, seed).unwrap()
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

#[test]
fn thresholds_match_closed_forms() {
    let golden = (3.0 + 5f64.sqrt()) / 2.0;
    assert!((beta_threshold(1).to_f64() - golden).abs() < 1e-15);
    assert!((beta_threshold(2).to_f64() - (5.0 + 17f64.sqrt()) / 4.0).abs() < 1e-15);
    assert!(!beta_threshold(1).admits(&q(13, 5)));
    assert!(beta_threshold(1).admits(&q(21, 8)));
    assert!(beta_threshold(2).admits(&q(5, 2)));
    assert!(!beta_threshold(2).admits(&rat(2)));
}

#[test]
fn theta_defaults() {
    let t: Vec<BigUint> = (1..=3).map(theta_for).collect();
    assert_eq!(t, vec![5u32.into(), 53u32.into(), 2063u32.into()]);
    assert_eq!(theta_bound(3), BigUint::from(2058u32));
}

#[test]
fn exponent_schedules() {
    let ints = |v: Vec<BigInt>| v.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>();
    assert_eq!(ints(floor_alpha_powers(&q(5, 2), 4)), vec![1, 2, 6, 15, 39]);
    let p = finite(1, rat(3), 0);
    assert_eq!(ints((0..4).map(|k| p.exponent(k)).collect()), vec![1, 3, 9, 27]);
    let p = finite(2, q(5, 2), 0);
    assert_eq!(ints((0..4).map(|k| p.exponent(k)).collect()), vec![1, 5, 25, 125]);
    let inf = ConstructionParams::new(1, Beta::Infinite, None, 0).unwrap();
    assert_eq!(ints((1..4).map(|k| inf.exponent(k)).collect()), vec![1, 4, 27]);
    assert_eq!(inf.first_index(), 1);
}

#[test]
fn parameter_validation() {
    let reject = |ell, beta: Beta, theta: Option<u32>| {
        ConstructionParams::new(ell, beta, theta.map(BigUint::from), 0).unwrap_err()
    };
    assert!(matches!(reject(1, Beta::Rational(rat(2)), None), ConstructionError::BetaBelowThreshold { .. }));
    assert!(matches!(reject(1, Beta::Rational(rat(3)), Some(3)), ConstructionError::InvalidTheta { .. }));
    assert!(matches!(reject(1, Beta::Rational(rat(3)), Some(9)), ConstructionError::InvalidTheta { .. }));
    assert!(matches!(reject(1, Beta::Infinite, Some(5)), ConstructionError::InvalidTheta { .. }));
    assert!(matches!(reject(0, Beta::Rational(rat(3)), None), ConstructionError::InvalidEll));
    let p = ConstructionParams::new(1, Beta::Rational(rat(3)), Some(7u32.into()), 0).unwrap();
    assert_eq!(p.theta(), &BigUint::from(7u32));
}

#[test]
fn beta_parsing() {
    assert_eq!("5/2".parse::<Beta>().unwrap(), Beta::Rational(q(5, 2)));
    assert_eq!("3".parse::<Beta>().unwrap(), Beta::Rational(rat(3)));
    assert_eq!("inf".parse::<Beta>().unwrap(), Beta::Infinite);
    assert!("0".parse::<Beta>().is_err());
    assert!("1/0".parse::<Beta>().is_err());
    assert!("x".parse::<Beta>().is_err());
    assert_eq!(Beta::Rational(q(5, 2)).to_string(), "5/2");
}

fn explicit() -> ConstructionParams {
    finite(1, rat(3), 0).with_digit_prefix(0, 0, vec![2, 3, 2]).unwrap()
}

#[test]
fn explicit_digits_give_known_convergents() {
    let p = explicit();
    let b0 = build_bn(&p, 0).unwrap();
    assert_eq!(b0.subspace.pluecker().coords(), &[big(5), big(2)]);
    let b1 = build_bn(&p, 1).unwrap();
    assert_eq!(b1.subspace.pluecker().coords(), &[big(125), big(53)]);
    assert_eq!(b1.subspace.height_squared(), &big(18434));
    let b2 = build_bn(&p, 2).unwrap();
    assert_eq!(b2.f_matrix[0][0], big(828127));
    assert_eq!(b2.exponent, big(9));
    let xi = xi_truncation(&p, 0, 0, 2).unwrap();
    assert_eq!(xi.value, BigRational::new(big(828127), big(5).pow(9)));
    assert_eq!(p.tail_upper(1).unwrap(), BigRational::new(big(6), big(5).pow(9)));
}

#[test]
fn invalid_prefix_digit() {
    let err = finite(1, rat(3), 0).with_digit_prefix(0, 0, vec![1]).unwrap_err();
    assert_eq!(err, ConstructionError::InvalidDigit { i: 0, j: 0, digit: 1 });
    let err = finite(2, q(5, 2), 0).with_digit_prefix(0, 1, vec![4]).unwrap_err();
    assert_eq!(err, ConstructionError::InvalidDigit { i: 0, j: 1, digit: 4 });
}

#[test]
fn infinite_variant_convergents() {
    let p =
        ConstructionParams::new(1, Beta::Infinite, None, 0).unwrap().with_digit_prefix(0, 0, vec![1, 2, 1]).unwrap();
    assert!(matches!(build_bn(&p, 0), Err(ConstructionError::InvalidIndex(0))));
    assert_eq!(build_bn(&p, 1).unwrap().subspace.pluecker().coords(), &[big(3), big(1)]);
    let b2 = build_infinite_variant(&p, 2).unwrap();
    assert_eq!(b2.subspace.pluecker().coords(), &[big(81), big(29)]);
    assert!(build_infinite_variant(&explicit(), 1).is_err());
}

#[test]
fn digit_stream_is_deterministic() {
    let a = DigitStream::seeded(2, 7, Variant::Finite);
    let b = DigitStream::seeded(2, 7, Variant::Finite);
    let c = DigitStream::seeded(2, 8, Variant::Finite);
    let seq = |s: &DigitStream| (0..64).map(|k| s.digit(0, 1, k)).collect::<Vec<_>>();
    assert_eq!(seq(&a), seq(&b));
    assert_ne!(seq(&a), seq(&c));
    assert!((0..64).all(|k| matches!(a.digit(1, 1, k), 4 | 5)));
    assert!((0..64).all(|k| matches!(a.digit(1, 0, k), 1 | 2)));
}

#[test]
fn certification_passes_small_instance() {
    let p = finite(1, rat(3), 3);
    let report = certify_instance(&p, 3, &CertifyOptions::default()).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    assert_eq!(report.summaries.len(), 3);
    assert_eq!(report.depth, 5);
    for n in 1..=3 {
        for check in ["primitivity", "tailBound", "entryBound", "heightUpperBound", "digitMatrix", "angle"] {
            assert!(report.check(n, check).is_some(), "{check} missing for {n}");
        }
    }
    assert!(report.check(3, "ratioConvergence").is_some());
    assert!(report.check(3, "angleBand").is_some());
    assert!(report.burn_in.is_some());
}

#[test]
fn certification_modes_agree() {
    let p = finite(2, q(5, 2), 11);
    let run = |exec| {
        let opts = CertifyOptions { exec, ..CertifyOptions::default() };
        let r = certify_instance(&p, 1, &opts).unwrap();
        serde_json::to_string(&r.records).unwrap()
    };
    assert_eq!(run(Execution::Sequential), run(Execution::Parallel));
}

#[test]
fn infinite_certification() {
    let p = ConstructionParams::new(1, Beta::Infinite, None, 5).unwrap();
    let report = certify_instance(&p, 2, &CertifyOptions::default()).unwrap();
    assert!(report.passed(), "{:?}", report.first_failure());
    assert!(report.check(2, "exponentSlope").is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tails_bracket_the_series(seed in any::<u64>(), n in 0usize..3) {
        let p = finite(1, rat(3), seed);
        let depth = n + 2;
        let xi = xi_truncation(&p, 0, 0, depth).unwrap();
        let approx = BigRational::new(p.partial_numerator(0, 0, n).unwrap(), BigInt::from(5).pow(p.exponent(n).to_u32().unwrap()));
        let gap = &xi.value - approx;
        prop_assert!(gap.is_positive());
        prop_assert!(gap + &xi.tail_upper < p.tail_upper(n).unwrap());
    }

    #[test]
    fn digit_matrices_are_dominant(seed in any::<u64>(), ell in 1usize..4, k in 0usize..50) {
        let d = DigitStream::seeded(ell, seed, Variant::Finite);
        for j in 0..ell {
            let off: u32 = (0..ell).filter(|&i| i != j).map(|i| d.digit(i, j, k)).sum();
            prop_assert!(d.digit(j, j, k) > off);
        }
    }
}

#[test]
fn threshold_stays_above_two() {
    for ell in [1usize, 2, 3, 10, 1000, 1_000_000] {
        let t = beta_threshold(ell);
        assert!(!t.admits(&rat(2)), "ell = {ell}");
    }
}

#[test]
fn floor_powers_grow_within_alpha_step() {
    let alpha = rat(3);
    let s = floor_alpha_powers(&alpha, 12);
    for w in s.windows(2).skip(1) {
        assert!(w[1] > w[0]);
        assert!(BigRational::from_integer(w[1].clone()) <= &alpha * BigRational::from_integer(w[0].clone()) + &alpha);
    }
}

#[test]
fn generator_matrix_shape() {
    let p = explicit();
    let g = build_generators_a(&p, 0).unwrap();
    assert_eq!(g.matrix.column(0), vec![rat(1), q(2, 5)]);
    let p = finite(2, q(5, 2), 4);
    let g = build_generators_a(&p, 3).unwrap();
    assert_eq!(g.matrix.rank(), 2);
    assert_eq!(g.xi_block().rows(), 2);
    let d = p.digits();
    assert!((0..10).all(|k| matches!(d.digit(0, 0, k), 4 | 5) && matches!(d.digit(0, 1, k), 1 | 2)));
}
