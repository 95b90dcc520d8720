mod common;

use common::{fixture, pmat, poly};
use num_traits::Zero;
use pfaffian::error::{Axis, Error};
use pfaffian::linalg::QMatrix;
use pfaffian::ods::*;
use pfaffian::rational::{rat, ratio};
use pfaffian::series::SeriesMatrix;

fn ods_from(p: u32, rows: Vec<Vec<pfaffian::series::BiSeries>>, trunc: u32) -> OdsSystem {
    OdsSystem::new(p, pmat(rows).truncate(trunc, 1)).unwrap()
}

#[test]
fn exm_x_part() {
    let ods = associated_ods(&fixture("exm"), Axis::X);
    let parts = exponential_parts_ods(&ods).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].multiplicity, 2);
    assert_eq!(parts[0].q_terms(), vec![(rat(-1), rat(-1))]);
    assert_eq!(parts[0].katz(), rat(1));
    assert_eq!(parts[0].format_q("x"), "-1/x");
}

#[test]
fn exm_y_part() {
    let ods = associated_ods(&fixture("exm"), Axis::Y);
    let parts = exponential_parts_ods(&ods).unwrap();
    assert_eq!(parts.len(), 1);
    assert_eq!(parts[0].multiplicity, 2);
    assert_eq!(parts[0].q_terms(), vec![(rat(-2), rat(3)), (rat(-1), rat(2))]);
    assert_eq!(parts[0].katz(), rat(2));
    assert_eq!(parts[0].format_q("y"), "3/y^2 + 2/y");
}

#[test]
fn airy_is_ramified() {
    let ods = ods_from(
        1,
        vec![vec![poly(&[]), poly(&[(0, 0, 1)])], vec![poly(&[(1, 0, 1)]), poly(&[])]],
        8,
    );
    assert_eq!(katz_invariant_ods(&ods).unwrap().value, ratio(1, 2));
    let (parts, trace) = exponential_parts_traced(&ods).unwrap();
    assert_eq!(parts.len(), 2);
    for part in &parts {
        assert_eq!(part.s, 2);
        assert_eq!(part.multiplicity, 1);
        assert_eq!(part.katz(), ratio(1, 2));
    }
    let mut leading: Vec<_> = parts.iter().map(|p| p.q_terms()[0].1.clone()).collect();
    leading.sort();
    assert_eq!(leading, vec![rat(-2), rat(2)]);
    assert!(trace.iter().any(|n| n.action == "ramification"));
}

#[test]
fn distinct_eigenvalues_split() {
    let ods = ods_from(
        1,
        vec![
            vec![poly(&[(0, 0, 1), (1, 0, 1)]), poly(&[(1, 0, 3)])],
            vec![poly(&[(2, 0, 1)]), poly(&[(0, 0, 2)])],
        ],
        6,
    );
    let (t, blocks) = split_leading(&ods).unwrap();
    assert_eq!(blocks.len(), 2);
    let g = ods.apply_gauge(&t).unwrap();
    assert!(g.mat.is_block_diagonal(&[1, 1]));
    let parts = exponential_parts_ods(&ods).unwrap();
    let c: Vec<_> = parts.iter().map(|p| p.xi[&2].clone()).collect();
    assert_eq!(c, vec![rat(1), rat(2)]);
}

#[test]
fn irreducible_factor_keeps_its_block() {
    let a0 = QMatrix::from_ints(&[&[0, -1, 0], &[1, 0, 0], &[0, 0, 1]]);
    let c = QMatrix::from_ints(&[&[1, 2, 3], &[0, 1, 1], &[1, 1, 0]]);
    let a0 = c.mul(&a0).mul(&c.inverse().unwrap());
    let mut mat = SeriesMatrix::from_qmatrix(&a0, 5, 1);
    mat = mat.add(&SeriesMatrix::from_coeff_matrices(3, 3, &[((1, 0), QMatrix::identity(3))], 5, 1));
    let ods = OdsSystem::new(1, mat).unwrap();
    let (_, blocks) = split_leading(&ods).unwrap();
    let mut sizes: Vec<_> = blocks.iter().map(|b| b.n()).collect();
    sizes.sort();
    assert_eq!(sizes, vec![1, 2]);
    assert!(matches!(
        exponential_parts_ods(&ods),
        Err(Error::AlgebraicExtensionRequired { .. })
    ));
}

#[test]
fn nilpotent_leading_does_not_split() {
    let ods = associated_ods(&fixture("exmnaive"), Axis::X);
    assert!(matches!(split_leading(&ods), Err(Error::NotSplittable(_))));
}

#[test]
fn scalar_first_kind_is_exponential() {
    let ods = ods_from(0, vec![vec![poly(&[(0, 0, 3), (1, 0, 1)])]], 8);
    let fk = first_kind_fundamental_ods(&ods).unwrap();
    assert!(!fk.is_resonant());
    assert_eq!(fk.lambda, QMatrix::from_ints(&[&[3]]));
    let mut fact = 1i64;
    for k in 0..8u32 {
        if k > 0 {
            fact *= k as i64;
        }
        assert_eq!(fk.phi.get(0, 0).coeff(k, 0), ratio(1, fact));
    }
    assert!(fk.residual(&ods).is_zero());
}

#[test]
fn resonant_first_kind_retains_monomial() {
    // eigenvalues 1 and 0 differ by one; the x coupling is resonant
    let ods = ods_from(
        0,
        vec![vec![poly(&[(0, 0, 1)]), poly(&[(1, 0, 1)])], vec![poly(&[]), poly(&[])]],
        6,
    );
    let fk = first_kind_fundamental_ods(&ods).unwrap();
    assert!(fk.is_resonant());
    assert_eq!(fk.retained[0].0, 1);
    assert!(fk.residual(&ods).is_zero());
    assert!(!fk.retained[0].1.get(0, 1).is_zero());
}
