use cuntz_core::operators::{build_block, DEFAULT_MAX_DIM};
use cuntz_core::spectral::{diagonal_spectrum, heat_trace};
use cuntz_core::{Alphabet, GradeIndex, OpName, Variant, Q};

#[test]
fn oracle_block_is_positive_on_its_span() {
    let al = Alphabet::new(3).unwrap();
    let op = build_block(al, OpName::TOracle, GradeIndex::new(0, 1).unwrap(), DEFAULT_MAX_DIM).unwrap();
    let i = op.inertia();
    // 9 labels, one sibling relation per parent
    assert_eq!(i.positive + i.negative + i.zero, 8);
    assert_eq!(i.negative, 0);
}

#[test]
fn diagonal_multiplicities_count_the_span() {
    let al = Alphabet::new(3).unwrap();
    for v in [Variant::DKappa, Variant::DTilde] {
        let total: Q = diagonal_spectrum(al, v, GradeIndex::new(0, 1).unwrap()).unwrap().into_iter().map(|(_, m)| m).sum();
        assert_eq!(total, Q::from_integer(8.into()));
    }
    assert!(diagonal_spectrum(al, Variant::DOracle, GradeIndex::new(0, 1).unwrap()).is_err());
}

#[test]
fn heat_trace_grows_with_grade() {
    let al = Alphabet::new(2).unwrap();
    for row in heat_trace(al, Variant::DKappa, &[1.0, 0.5], 6, DEFAULT_MAX_DIM).unwrap() {
        assert!(row.monotone);
        assert!(row.by_grade.windows(2).all(|w| w[0] <= w[1]));
        assert!(row.tail_bound.is_finite() && row.tail_bound > 0.0);
    }
}
