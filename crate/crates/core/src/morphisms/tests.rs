use super::*;
use crate::construction::{build_generators_a, Beta, ConstructionParams};
use crate::exact::{primitive_integer_vector, rat};
use crate::exec::Execution;
use proptest::prelude::*;

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn line(v: &[i64]) -> RationalSubspace {
    RationalSubspace::from_i64_columns(&[v]).unwrap()
}

fn opts() -> ScanOptions {
    ScanOptions { exec: Execution::Sequential, ..Default::default() }
}

#[test]
fn images_of_subspaces() {
    let b = line(&[3, 4]);
    assert_eq!(RationalMap::identity(2).apply_to_subspace(&b).unwrap(), b);
    let up = RationalMap::coordinate_embedding(2, 3).apply_to_subspace(&b).unwrap();
    assert_eq!(up, line(&[3, 4, 0]));
    assert_eq!(up.height_squared(), &BigInt::from(25));
    let mut d = ExactMatrix::identity(2);
    d.set(1, 1, q(1, 2));
    let map = RationalMap::new(d);
    assert_eq!(map.denominator_clearing(), &BigInt::from(2));
    let img = map.apply_to_subspace(&line(&[1, 1])).unwrap();
    assert_eq!(img, line(&[2, 1]));
    assert_eq!(img.height_squared(), &BigInt::from(5));
}

#[test]
fn rank_loss_is_reported() {
    let map = RationalMap::new(ExactMatrix::from_i64_rows(&[&[1, 1]]).unwrap());
    let err = map.apply_to_subspace(&line(&[1, -1])).unwrap_err();
    assert_eq!(err, MorphismError::DimensionCollapse { rank: 0, expected: 1 });
}

#[test]
fn distortion_constants_of_simple_maps() {
    for e in 1..=3 {
        assert!(height_distortion_constant(&RationalMap::identity(3), e).unwrap() >= rat(1));
    }
    let embed = RationalMap::coordinate_embedding(2, 3);
    let c = height_distortion_constant(&embed, 1).unwrap();
    // The Frobenius norm of the 3×2 embedding is √2.
    assert!(&c * &c >= rat(2) && c < q(1_414_214, 1_000_000));
    for v in [[1i64, 0], [3, 4], [5, -12]] {
        let img = embed.apply_to_subspace(&line(&v)).unwrap();
        assert_eq!(img.height_squared(), line(&v).height_squared());
    }
}

fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-4i64..=4, rows * cols)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn image_pluecker_is_the_compound_image(s in small_matrix(4, 4), b in small_matrix(4, 2)) {
        let rows: Vec<&[i64]> = s.chunks(4).collect();
        let map = RationalMap::new(ExactMatrix::from_i64_rows(&rows).unwrap());
        let cols: Vec<&[i64]> = b.chunks(4).collect();
        let basis = ExactMatrix::from_i64_columns(&cols).unwrap();
        prop_assume!(basis.rank() == 2);
        let sub = RationalSubspace::from_integer_basis(basis).unwrap();
        match map.apply_to_subspace(&sub) {
            Ok(img) => {
                let compound = compound_matrix(map.matrix(), 2).unwrap();
                let xi: Vec<BigRational> = sub.pluecker().coords().iter().map(|c| BigRational::from_integer(c.clone())).collect();
                let column = ExactMatrix::from_columns(&[xi]).unwrap();
                let pushed = primitive_integer_vector(&compound.mul(&column).unwrap().column(0));
                let expected = img.pluecker().coords();
                let negated: Vec<BigInt> = pushed.iter().map(|x| -x).collect();
                prop_assert!(pushed.as_slice() == expected || negated.as_slice() == expected);
                let c = height_distortion_constant(&map, 2).unwrap();
                let lhs = BigRational::from_integer(img.height_squared().clone());
                prop_assert!(lhs <= &c * &c * BigRational::from_integer(sub.height_squared().clone()));
            }
            Err(MorphismError::DimensionCollapse { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

fn golden(k: usize) -> ExactTarget {
    let (mut a, mut b) = (BigInt::from(0), BigInt::from(1));
    for _ in 0..k {
        let next = &a + &b;
        a = b;
        b = next;
    }
    let gens = ExactMatrix::from_columns(&[vec![rat(1), BigRational::new(&a + &b, b.clone())]]).unwrap();
    ExactTarget::new(gens, BigRational::new(1.into(), &b * &b)).unwrap()
}

#[test]
fn golden_line_in_three_space() {
    let setup = HarnessSetup::coordinate(golden(120), 3, 1, 1, 1000).unwrap();
    assert_eq!(setup.ambient_target().unwrap().perturbation(), golden(120).perturbation());
    let report = embedding_harness(&setup, &opts()).unwrap();
    assert!(report.delta <= 0.3, "{}", report.delta);
    assert!(report.all_images_are_records());
    assert!(report.matched_heights());
    assert!(report.record_pairs.iter().all(|p| p.distortion_holds));
}

#[test]
fn identity_embedding_gives_identical_estimates() {
    let setup = HarnessSetup::coordinate(golden(120), 2, 1, 1, 2000).unwrap();
    let report = embedding_harness(&setup, &opts()).unwrap();
    assert_eq!(report.delta, 0.0);
    assert_eq!(report.intrinsic_records, report.ambient_records);
}

#[test]
fn skewed_embedding_widens_the_perturbation() {
    // F = Span((1,0,1), (0,1,1)) with φ the projection to the first two coordinates.
    let f = RationalSubspace::from_i64_columns(&[&[1, 0, 1], &[0, 1, 1]]).unwrap();
    let phi = RationalMap::new(ExactMatrix::from_i64_rows(&[&[1, 0, 0], &[0, 1, 0]]).unwrap());
    let setup = HarnessSetup { intrinsic_target: golden(60), f, phi, e: 1, j: 1, height_squared_max: 300 };
    let lift = setup.lifting_map().unwrap();
    assert_eq!(lift.matrix(), &ExactMatrix::from_i64_columns(&[&[1, 0, 1], &[0, 1, 1]]).unwrap());
    assert!(setup.ambient_target().unwrap().perturbation() > golden(60).perturbation());
    let report = embedding_harness(&setup, &opts()).unwrap();
    assert!(report.record_pairs.iter().all(|p| p.distortion_holds));
}

#[test]
fn construction_embedded_in_r4() {
    let params = ConstructionParams::new(1, Beta::Rational(rat(3)), None, 0).unwrap();
    let target = build_generators_a(&params, 3).unwrap().target().unwrap();
    let setup = HarnessSetup::coordinate(target, 4, 1, 1, 400).unwrap();
    let report = embedding_harness(&setup, &opts()).unwrap();
    assert!(report.record_pairs.iter().all(|p| p.distortion_holds));
    assert!(report.matched_heights());
}

#[test]
fn non_exact_shapes_are_refused() {
    let gens = ExactMatrix::from_i64_columns(&[&[1, 2, 3, 4, 5]]).unwrap();
    let setup = HarnessSetup::coordinate(ExactTarget::exact(gens).unwrap(), 5, 2, 1, 10).unwrap();
    assert!(matches!(embedding_harness(&setup, &opts()), Err(MorphismError::HeuristicEnumeration { .. })));
}
