use num_bigint::BigUint;
use prank::bounds::{count_monomials_exact, precise_corner_bound};
use prank::constructions::{
    build_corner_tensor, build_jk_partition_decomposition, build_thm1_slice_decomposition, restrict_tensor,
    CornerTensorSpec,
};
use prank::field::GaloisField;
use prank::mpoly::DEFAULT_MONOMIAL_BUDGET;
use prank::tensor::{diagonal_lower_bound, DiagonalBound};

#[test]
fn right_angle_certificate_q3_n4() {
    let f = GaloisField::with_order(3).unwrap();
    let built = build_thm1_slice_decomposition(&f, 4, DEFAULT_MONOMIAL_BUDGET).unwrap();
    assert!(built.verification.is_verified());
    let terms = built.decomposition.terms.len();
    assert!(terms <= 42, "{terms}");
    let c = |d| count_monomials_exact(3, 4, d);
    assert_eq!(built.report.bound, BigUint::from(2u32) * (c(2) + c(1)) + 2u32);
}

#[test]
fn right_angle_certificate_q7_n1() {
    let f = GaloisField::with_order(7).unwrap();
    let built = build_thm1_slice_decomposition(&f, 1, DEFAULT_MONOMIAL_BUDGET).unwrap();
    assert!(built.verification.is_verified());
    assert!(BigUint::from(built.decomposition.terms.len()) <= built.report.bound);
}

#[test]
fn jk_certificate_k3_q5_n2() {
    let f = GaloisField::with_order(5).unwrap();
    let built = build_jk_partition_decomposition(&f, 3, 2, DEFAULT_MONOMIAL_BUDGET).unwrap();
    assert!(built.verification.is_verified());
    let bound = precise_corner_bound(3, 5, 2).unwrap();
    assert!(BigUint::from(built.decomposition.terms.len()) <= *bound.exact_value());
    for (s, c) in &built.report.per_subset_counts {
        assert!(BigUint::from(*c) <= built.report.per_subset_bounds[s], "{s}: {c}");
    }
}

#[test]
fn jk_certificate_over_extension_field() {
    // GF(9) has p = 3 > k = 2
    let f = GaloisField::with_order(9).unwrap();
    let built = build_jk_partition_decomposition(&f, 2, 1, DEFAULT_MONOMIAL_BUDGET).unwrap();
    assert!(built.verification.is_verified());
    assert!(BigUint::from(built.decomposition.terms.len()) <= built.report.bound);
}

#[test]
fn diagonal_restriction_on_corner_free_line() {
    // {0, 1} in F_5 has no 2-right corner (needs three points)
    let f = GaloisField::with_order(5).unwrap();
    let j = build_corner_tensor(&f, &CornerTensorSpec::jk(2, 1)).unwrap();
    let sub = restrict_tensor(&j, &[0, 1]).unwrap();
    assert_eq!(diagonal_lower_bound(&sub), DiagonalBound::Diagonal(2));
}
