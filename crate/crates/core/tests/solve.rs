mod common;

use common::{fixture, pmat, poly};
use pfaffian::error::{Axis, Error};
use pfaffian::linalg::QMatrix;
use pfaffian::rational::rat;
use pfaffian::solve::*;
use pfaffian::system::{apply_gauge, GaugeTransform, PfaffianSystem};

fn u_system() -> PfaffianSystem {
    let a = pmat(vec![vec![poly(&[(0, 0, -2)]), poly(&[])], vec![poly(&[(0, 1, -1)]), poly(&[(0, 0, 1)])]]);
    let b = pmat(vec![vec![poly(&[(0, 0, -2)]), poly(&[])], vec![poly(&[(3, 0, -2)]), poly(&[(0, 0, -1)])]]);
    PfaffianSystem::new(0, a.truncate(8, 8), 0, b.truncate(8, 8)).unwrap()
}

fn constant_pair(sys: &PfaffianSystem, l1: &QMatrix, l2: &QMatrix) -> bool {
    let w = sys.window();
    let c1 = pfaffian::series::SeriesMatrix::from_qmatrix(l1, w.x.unwrap() as u32, w.y.unwrap() as u32);
    let c2 = pfaffian::series::SeriesMatrix::from_qmatrix(l2, w.x.unwrap() as u32, w.y.unwrap() as u32);
    sys.p() == 0 && sys.q() == 0 && sys.amat().eq_within(&c1) && sys.bmat().eq_within(&c2)
}

#[test]
fn u_system_regular_solve() {
    let sys = u_system();
    let sol = regular_fundamental(&sys).unwrap();
    assert_eq!(sol.lambda1, QMatrix::diag(&[rat(-2), rat(1)]));
    assert_eq!(sol.lambda2, QMatrix::diag(&[rat(-2), rat(-1)]));
    let out = apply_gauge(&sys, &sol.gauge).unwrap();
    assert!(constant_pair(&out, &sol.lambda1, &sol.lambda2));
}

#[test]
fn known_diagonalizing_gauge_as_external() {
    let sys = u_system();
    let t2 = pmat(vec![
        vec![poly(&[(0, 0, 1)]), poly(&[])],
        vec![common::poly_q(&[(0, 1, 1, 3), (3, 0, 2, 1)]), poly(&[(0, 0, -1)])],
    ]);
    let out = apply_gauge(&sys, &GaugeTransform::external(t2)).unwrap();
    assert!(constant_pair(&out, &QMatrix::diag(&[rat(-2), rat(1)]), &QMatrix::diag(&[rat(-2), rat(-1)])));
}

#[test]
fn exm_end_to_end() {
    let sys = fixture("exm");
    let data = formal_fundamental(&sys).map_err(|p| format!("{}: {}", p.step, p.error)).unwrap();
    assert_eq!(data.s, (1, 1));
    assert_eq!(data.katz, KatzPair { kappa1: rat(1), kappa2: rat(2) });
    assert_eq!(data.blocks.len(), 1);
    assert_eq!(data.blocks[0].q1.format_q("x"), "-1/x");
    assert_eq!(data.blocks[0].q2.format_q("y"), "3/y^2 + 2/y");
    let spectrum = |m: &QMatrix| {
        let mut r: Vec<_> = m.charpoly().rational_roots();
        r.sort();
        r
    };
    assert_eq!(spectrum(data.lambda1.as_ref().unwrap()), vec![rat(-2), rat(1)]);
    assert_eq!(spectrum(data.lambda2.as_ref().unwrap()), vec![rat(-2), rat(-1)]);
    assert!(verify_substitution(&sys, &data).unwrap().0);
}

#[test]
fn exmnaive_is_regular_singular() {
    let sys = fixture("exmnaive");
    let data = formal_fundamental(&sys).map_err(|p| format!("{}: {}", p.step, p.error)).unwrap();
    assert_eq!(data.s, (1, 1));
    assert!(data.blocks.iter().all(|b| b.q1.is_zero() && b.q2.is_zero()));
    assert_eq!(true_poincare_rank(&sys).unwrap(), (0, 0));
    assert_eq!(katz_pair(&sys).unwrap(), KatzPair { kappa1: rat(0), kappa2: rat(0) });
}

fn split_candidate() -> PfaffianSystem {
    let a = pmat(vec![
        vec![poly(&[(0, 0, 1), (1, 0, 1)]), poly(&[])],
        vec![poly(&[]), poly(&[(0, 0, 2), (1, 0, 1)])],
    ]);
    let b = pmat(vec![
        vec![poly(&[(0, 0, 3), (0, 1, 1)]), poly(&[])],
        vec![poly(&[]), poly(&[(0, 0, 5)])],
    ]);
    let d = PfaffianSystem::new(1, a.truncate(6, 6), 1, b.truncate(6, 6)).unwrap();
    let t = pmat(vec![
        vec![poly(&[(0, 0, 1)]), poly(&[(1, 0, 1), (0, 1, 1)])],
        vec![poly(&[(1, 1, 1)]), poly(&[(0, 0, 1)])],
    ]);
    apply_gauge(&d, &GaugeTransform::external(t.truncate(6, 6))).unwrap()
}

#[test]
fn splitting_decouples_both_subsystems() {
    let sys = split_candidate();
    assert!(!sys.amat().is_block_diagonal(&[1, 1]));
    let (g, blocks) = bivariate_splitting(&sys).unwrap();
    assert_eq!(blocks.len(), 2);
    let out = apply_gauge(&sys, &g).unwrap();
    assert!(out.amat().is_block_diagonal(&[1, 1]));
    assert!(out.bmat().is_block_diagonal(&[1, 1]));
    let data = formal_fundamental(&sys).map_err(|p| format!("{}: {}", p.step, p.error)).unwrap();
    let mut q: Vec<_> = data.blocks.iter().map(|b| b.q1.format_q("x")).collect();
    q.sort();
    assert_eq!(q, vec!["-1/x", "-2/x"]);
    assert!(verify_substitution(&sys, &data).unwrap().0);
}

#[test]
fn nilpotent_pair_is_not_splittable() {
    assert!(matches!(bivariate_splitting(&fixture("exmnaive")), Err(Error::NotSplittable(_))));
}

#[test]
fn shift_reproduces_z_system() {
    let sys = fixture("exm");
    let shift = ScalarShift {
        x: [(1, rat(1))].into(),
        y: [(2, rat(-6)), (1, rat(-2))].into(),
    };
    let z = bivariate_shift(&sys, &shift).unwrap();
    assert!(z.eq_within(&fixture("exmnaive")));
    assert!(bivariate_shift(&sys, &ScalarShift::default()).unwrap().eq_within(&sys));
}

#[test]
fn shift_by_non_eigenvalue_is_rejected() {
    let sys = fixture("exm");
    let shift = ScalarShift {
        x: [(3, rat(1))].into(),
        y: Default::default(),
    };
    assert!(matches!(bivariate_shift(&sys, &shift), Err(Error::PreconditionViolated(_))));
}

#[test]
fn exm_invariants() {
    let sys = fixture("exm");
    assert_eq!(true_poincare_rank(&sys).unwrap(), (1, 2));
    let (px, py) = exponential_parts(&sys).unwrap();
    assert_eq!((px.len(), py.len()), (1, 1));
}

#[test]
fn ramified_system_returns_partial_data() {
    let a = pmat(vec![vec![poly(&[]), poly(&[(0, 0, 1)])], vec![poly(&[(1, 0, 1)]), poly(&[])]]);
    let b = pmat(vec![vec![poly(&[]), poly(&[])], vec![poly(&[]), poly(&[])]]);
    let sys = PfaffianSystem::new(1, a.truncate(8, 4), 0, b.truncate(8, 4)).unwrap();
    let p = formal_fundamental(&sys).unwrap_err();
    assert!(matches!(p.error, Error::RamificationRequired { axis: Axis::X, index: 2 }));
    assert_eq!(p.data.s, (2, 1));
    assert_eq!(p.data.katz.kappa1, pfaffian::rational::ratio(1, 2));
    assert!(p.data.phi.is_none());
}

#[test]
fn scalar_system_closed_form() {
    // integrable: delta_y a = delta_x b = x y
    let a = pmat(vec![vec![poly(&[(0, 0, 2), (1, 1, 1)])]]);
    let b = pmat(vec![vec![poly(&[(0, 0, 3), (1, 1, 1)])]]);
    let sys = PfaffianSystem::new(0, a.truncate(6, 6), 0, b.truncate(6, 6)).unwrap();
    let data = formal_fundamental(&sys).map_err(|p| format!("{}: {}", p.step, p.error)).unwrap();
    assert_eq!(data.lambda1.unwrap(), QMatrix::from_ints(&[&[2]]));
    assert_eq!(data.lambda2.unwrap(), QMatrix::from_ints(&[&[3]]));
    // phi = exp(x y)
    let phi = data.phi.unwrap();
    let mut fact = 1i64;
    for k in 0..6u32 {
        if k > 0 {
            fact *= k as i64;
        }
        assert_eq!(phi.get(0, 0).coeff(k, k), pfaffian::rational::ratio(1, fact));
    }
}
