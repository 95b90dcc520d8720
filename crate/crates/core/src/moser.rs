//! Moser reduction of the Poincaré rank, one subsystem at a time, with
//! gauges that keep the other subsystem free of new poles.
//!
//! All constructions are written for the `x` subsystem; the `y` case runs
//! the same code on the system with the variables exchanged.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::echelon::{column_reduce, saturated_kernel};
use crate::error::{Axis, Error, Result};
use crate::rational::{rat, Rational};
use crate::series::{BiSeries, SeriesMatrix, UniSeries, Window, EXACT};
use crate::system::{apply_gauge, leading_data, GaugeKind, GaugeTransform, PfaffianSystem};

/// `m(A) = max(0, p + r/n)`.
pub fn moser_rank(sys: &PfaffianSystem, axis: Axis) -> Result<Rational> {
    let ld = leading_data(sys)?;
    let r = match axis {
        Axis::X => ld.rank_a0,
        Axis::Y => ld.rank_b0,
    };
    Ok(moser_rank_of(sys.pole(axis), r, sys.n()))
}

pub(crate) fn moser_rank_of(p: u32, r: usize, n: usize) -> Rational {
    let m = rat(p as i64) + Rational::new((r as i64).into(), (n as i64).into());
    if m < Rational::zero() {
        Rational::zero()
    } else {
        m
    }
}

/// Coefficients of `theta(lambda)` from degree 0 upward, each a series in
/// the other variable.
#[derive(Clone, Debug)]
pub struct ThetaPolynomial {
    pub coefficients: Vec<UniSeries>,
}

impl ThetaPolynomial {
    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(UniSeries::is_zero)
    }

    /// Truncation order of the least precise coefficient.
    pub fn window(&self) -> u32 {
        self.coefficients.iter().map(UniSeries::trunc).min().unwrap_or(EXACT)
    }
}

/// Coefficient of `x^(n-r)` in `det(A0 + x (A1 + lambda I))`, recovered by
/// exact interpolation at `lambda = 0..=n-r`.
pub fn theta_poly(sys: &PfaffianSystem, axis: Axis) -> Result<ThetaPolynomial> {
    if axis == Axis::Y {
        return theta_poly(&sys.swap(), Axis::X);
    }
    let n = sys.n();
    let ld = leading_data(sys)?;
    let r = ld.rank_a0;
    if moser_rank_of(sys.p(), r, n) <= Rational::one() {
        return Err(Error::PreconditionViolated(
            "theta is only defined when the Moser rank exceeds 1".into(),
        ));
    }
    if sys.amat().trunc_x() < 2 {
        return Err(Error::TruncationExhausted {
            context: "theta needs the coefficient of x^1".into(),
            window: sys.coefficient(Axis::X).window(),
        });
    }
    let a0 = &ld.a0;
    let a1 = sys.amat().slice(Axis::X, 1);
    let k = n - r;
    let x = BiSeries::exact_monomial(Rational::one(), 1, 0);
    let values: Vec<BiSeries> = (0..=k)
        .map(|l| {
            let shifted = a1.add(&SeriesMatrix::eye(n).scale(&rat(l as i64)));
            let m = a0.add(&shifted.scale_series(&x));
            m.det().slice(Axis::X, k as u32)
        })
        .collect();
    let coefficients = interpolate(&values)
        .into_iter()
        .map(|c| c.eval_zero(Axis::X))
        .collect();
    Ok(ThetaPolynomial { coefficients })
}

/// Coefficients of the polynomial of degree `< values.len()` taking
/// `values[i]` at `i`.
fn interpolate(values: &[BiSeries]) -> Vec<BiSeries> {
    let m = values.len();
    let mut out: Vec<Option<BiSeries>> = vec![None; m];
    for (i, v) in values.iter().enumerate() {
        // Lagrange basis polynomial for node i.
        let mut basis = vec![Rational::one()];
        let mut denom = Rational::one();
        for j in (0..m).filter(|&j| j != i) {
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (e, c) in basis.iter().enumerate() {
                next[e + 1] += c;
                next[e] -= c * rat(j as i64);
            }
            basis = next;
            denom *= rat(i as i64 - j as i64);
        }
        for (e, c) in basis.iter().enumerate() {
            let term = v.scale(&(c / &denom));
            out[e] = Some(match out[e].take() {
                Some(acc) => acc.add(&term),
                None => term,
            });
        }
    }
    out.into_iter()
        .map(|c| c.unwrap_or_else(|| BiSeries::zero(EXACT, EXACT)))
        .collect()
}

/// Output of [`column_reduce_leading`]: the gauge and the block sizes of
/// the new leading matrix.
#[derive(Clone, Debug)]
pub struct GaussForm {
    pub gauge: GaugeTransform,
    pub r: usize,
    pub d: usize,
}

/// Block sizes `(r, d)` when the leading matrix already has the shape
/// `[[A11, 0, 0], [A21, 0, 0], [A31, A32, 0]]` with both column stacks of
/// full rank.
fn gauss_shape(a0: &SeriesMatrix, r: usize) -> Result<Option<usize>> {
    let n = a0.rows();
    if !a0.block(0..n, r..n).is_zero() {
        return Ok(None);
    }
    let top = a0.block(0..r, 0..r);
    let d = column_reduce(&top)?.rank;
    let ok = top.block(0..r, d..r).is_zero()
        && column_reduce(&top.block(0..r, 0..d))?.rank == d
        && column_reduce(&a0.block(0..n, 0..r))?.rank == r;
    Ok(ok.then_some(d))
}

/// A unimodular `U(y)` bringing the leading matrix to the shape described
/// in `gauss_shape`.
pub fn column_reduce_leading(sys: &PfaffianSystem, axis: Axis) -> Result<GaussForm> {
    if axis == Axis::Y {
        let g = column_reduce_leading(&sys.swap(), Axis::X)?;
        return Ok(GaussForm {
            gauge: g.gauge.swap_vars(),
            ..g
        });
    }
    let n = sys.n();
    let a0 = sys.amat().freeze_zero(Axis::X);
    let red = column_reduce(&a0)?;
    let r = red.rank;
    if let Some(d) = gauss_shape(&a0, r)? {
        return Ok(GaussForm {
            gauge: GaugeTransform::identity(n),
            r,
            d,
        });
    }
    let u1 = red.v;
    let m = u1.inverse()?.to_series()?.mul(&a0).mul(&u1);
    let red2 = column_reduce(&m.block(0..r, 0..r))?;
    let d = red2.rank;
    let u = u1.mul(&SeriesMatrix::block_diag(&[red2.v, SeriesMatrix::eye(n - r)]));
    Ok(GaussForm {
        gauge: GaugeTransform::new(
            u,
            GaugeKind::Unimodular,
            Some(Axis::X),
            format!("column reduction of the leading matrix, r = {r}, d = {d}"),
        ),
        r,
        d,
    })
}

/// `diag(t I_r, I_(n-r-rho), t I_rho)` for the variable `t` of `axis`.
pub fn shearing_matrix(r: usize, rho: usize, n: usize, axis: Axis) -> Result<GaugeTransform> {
    if r + rho > n {
        return Err(Error::PreconditionViolated(format!(
            "shearing needs r + rho <= n, got r = {r}, rho = {rho}, n = {n}"
        )));
    }
    let exps: Vec<u32> = (0..n)
        .map(|i| u32::from(i < r || i >= n - rho))
        .collect();
    Ok(GaugeTransform::new(
        SeriesMatrix::monomial_diag(axis, &exps),
        GaugeKind::Shearing,
        Some(axis),
        format!("shearing r = {r}, rho = {rho}"),
    ))
}

/// `G_lambda` at `lambda = 0` with its block layout and the verdicts of
/// the two rank conditions required for a shearing.
#[derive(Clone, Debug, Serialize)]
pub struct GLambdaForm {
    #[serde(skip)]
    pub matrix: SeriesMatrix,
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub rho: usize,
    /// Appending the last `rho` rows does not raise the rank.
    pub rows_dependent: bool,
    /// The rank of the top `r` rows is below `r`.
    pub rank_deficient: bool,
    /// The last `rho` rows vanish on the second column block.
    pub corner_null: bool,
}

impl GLambdaForm {
    pub fn holds(&self) -> bool {
        self.rows_dependent && self.rank_deficient && self.corner_null
    }
}

fn leading_pair(sys: &PfaffianSystem) -> Result<(SeriesMatrix, SeriesMatrix)> {
    if sys.amat().trunc_x() < 2 {
        return Err(Error::TruncationExhausted {
            context: "rank reduction needs the coefficient of x^1".into(),
            window: sys.coefficient(Axis::X).window(),
        });
    }
    Ok((sys.amat().freeze_zero(Axis::X), sys.amat().slice(Axis::X, 1)))
}

fn rank(m: &SeriesMatrix) -> Result<usize> {
    Ok(column_reduce(m)?.rank)
}

/// Columns forming a basis of the module spanned by the columns of `m`.
fn span_basis(m: &SeriesMatrix) -> Result<SeriesMatrix> {
    let red = column_reduce(m)?;
    Ok(red.reduced.block(0..m.rows(), 0..red.rank))
}

/// Reads off `G_lambda` for a system whose leading matrix is in Gauss form.
pub fn g_lambda_form(sys: &PfaffianSystem, r: usize, d: usize, rho: usize) -> Result<GLambdaForm> {
    let n = sys.n();
    let (a0, a1) = leading_pair(sys)?;
    let matrix = SeriesMatrix::hstack(&[&a0.block(0..n, 0..r), &a1.block(0..n, r..n)]);
    let c3 = r..n - rho;
    let top = SeriesMatrix::hstack(&[&a0.block(0..r, 0..d), &a1.block(0..r, c3.clone())]);
    let low = SeriesMatrix::hstack(&[&a0.block(n - rho..n, 0..d), &a1.block(n - rho..n, c3)]);
    let rk_top = rank(&top)?;
    let rk_full = rank(&SeriesMatrix::vstack(&[&top, &low]))?;
    Ok(GLambdaForm {
        matrix,
        n,
        r,
        d,
        rho,
        rows_dependent: rk_full == rk_top,
        rank_deficient: rk_top < r,
        corner_null: a0.block(n - rho..n, d..r).is_zero(),
    })
}

/// Output of [`arrange_g`].
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub gauge: GaugeTransform,
    pub rho: usize,
    pub form: GLambdaForm,
}

/// Finds `Q = diag(I_r, Q22(y))` with `det Q = ±1` so that a shearing
/// lowers the rank of the leading matrix.
///
/// With `P = A0[top, ..d]`, `X = A1[top, r..]`, `Z1 = A0[bottom, ..d]`,
/// `Z2 = A0[bottom, d..r]` and `Y = A1[bottom, r..]`, the column space
/// `N'` of the third block must contain `Z2` and every `Z1 a + Y c` with
/// `c` in `N'` and `P a + X c = 0`. The smallest such `N'` is reached by
/// iteration; the arrangement exists iff `rank [P | X N'] < r`. `Q22`
/// puts a basis of `N'` first and a complement last, so `rho` is the
/// codimension of `N'`.
pub fn arrange_g(sys: &PfaffianSystem, gauss: &GaussForm) -> Result<Arrangement> {
    let (n, r, d) = (sys.n(), gauss.r, gauss.d);
    if r == 0 || moser_rank_of(sys.p(), r, n) <= Rational::one() {
        return Err(Error::PreconditionViolated(
            "arrangement needs a Moser rank above 1".into(),
        ));
    }
    let (a0, a1) = leading_pair(sys)?;
    let pm = a0.block(0..r, 0..d);
    let xm = a1.block(0..r, r..n);
    let z1 = a0.block(r..n, 0..d);
    let z2 = a0.block(r..n, d..r);
    let ym = a1.block(r..n, r..n);

    let mut basis = span_basis(&z2)?;
    loop {
        let k = basis.cols();
        let h = SeriesMatrix::hstack(&[&pm, &xm.mul(&basis)]);
        let ker = saturated_kernel(&h)?;
        let m = ker.cols();
        let a = ker.block(0..d, 0..m);
        let c = ker.block(d..d + k, 0..m);
        let image = z1.mul(&a).add(&ym.mul(&basis).mul(&c));
        let next = span_basis(&SeriesMatrix::hstack(&[&basis, &image]))?;
        if next.cols() == k {
            break;
        }
        basis = next;
    }
    let k = basis.cols();
    if rank(&SeriesMatrix::hstack(&[&pm, &xm.mul(&basis)]))? >= r {
        return Err(Error::PreconditionViolated(
            "no arrangement lowers the rank: the system is Moser-irreducible".into(),
        ));
    }
    let rho = n - r - k;
    let q22 = if k == 0 || rho == 0 {
        SeriesMatrix::eye(n - r)
    } else {
        let ann = saturated_kernel(&basis.transpose())?.transpose();
        let v = column_reduce(&ann)?.v;
        SeriesMatrix::hstack(&[&v.block(0..n - r, rho..n - r), &v.block(0..n - r, 0..rho)])
    };
    let gauge = if q22.eq_within(&SeriesMatrix::eye(n - r)) {
        GaugeTransform::identity(n)
    } else {
        GaugeTransform::new(
            SeriesMatrix::block_diag(&[SeriesMatrix::eye(r), q22]),
            GaugeKind::Unimodular,
            Some(Axis::X),
            format!("arrangement of G_lambda, rho = {rho}"),
        )
    };
    let arranged = apply_gauge(sys, &gauge)?;
    let form = g_lambda_form(&arranged, r, d, rho)?;
    if !form.holds() {
        return Err(Error::InvariantViolation(format!(
            "arranged G_lambda violates its rank conditions (rho = {rho})"
        )));
    }
    Ok(Arrangement { gauge, rho, form })
}

/// One entry of a [`ReductionReport`].
#[derive(Clone, Debug, Serialize)]
pub struct ReductionStep {
    pub axis: Axis,
    pub gauges: Vec<GaugeKind>,
    pub pole_before: u32,
    pub pole_after: u32,
    pub rank_before: usize,
    pub rank_after: usize,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub moser_before: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub moser_after: Rational,
    pub compatible: bool,
}

/// A zero verdict and the window it was certified in.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroCertificate {
    pub claim: String,
    pub window: Window,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub steps: Vec<ReductionStep>,
    #[serde(serialize_with = "crate::rational::serialize_vec")]
    pub moser_rank_final: Vec<Rational>,
    pub certificates: Vec<ZeroCertificate>,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub gauge: GaugeTransform,
    pub system: PfaffianSystem,
    pub report: ReductionReport,
}

fn pole_and_rank(sys: &PfaffianSystem) -> Result<(u32, usize)> {
    Ok((sys.p(), column_reduce(&sys.amat().freeze_zero(Axis::X))?.rank))
}

/// Arrangement and shearing for a system already in Gauss form.
fn shear_step(sys: &PfaffianSystem, gauss: &GaussForm) -> Result<(GaugeTransform, PfaffianSystem)> {
    let before = pole_and_rank(sys)?;
    let arr = arrange_g(sys, gauss)?;
    let arranged = apply_gauge(sys, &arr.gauge)?;
    let s = shearing_matrix(gauss.r, arr.rho, sys.n(), Axis::X)?;
    let out = apply_gauge(&arranged, &s)?;
    if !out.is_normal_crossing() {
        return Err(Error::IntegrabilityViolation {
            context: "shearing introduced a pole in the other variable".into(),
            window: arranged.window(),
        });
    }
    let after = pole_and_rank(&out)?;
    if after >= before {
        return Err(Error::InvariantViolation(format!(
            "shearing did not lower (p, r): {before:?} -> {after:?}"
        )));
    }
    Ok((arr.gauge.then(&s), out))
}

/// Gauss form, arrangement and shearing on one axis.
pub fn reduce_subsystem_step(sys: &PfaffianSystem, axis: Axis) -> Result<(GaugeTransform, PfaffianSystem)> {
    if axis == Axis::Y {
        let (g, s) = reduce_subsystem_step(&sys.swap(), Axis::X)?;
        return Ok((g.swap_vars(), s.swap()));
    }
    if sys.p() == 0 || !theta_poly(sys, Axis::X)?.is_zero() {
        return Err(Error::PreconditionViolated(
            "subsystem is Moser-irreducible".into(),
        ));
    }
    let gauss = column_reduce_leading(sys, Axis::X)?;
    let reduced = apply_gauge(sys, &gauss.gauge)?;
    let (g, out) = shear_step(&reduced, &gauss)?;
    Ok((gauss.gauge.then(&g), out))
}

/// Runs the reduction loop on the `x` subsystem, labelling records with
/// `label`.
pub(crate) fn reduce_x(
    sys: &PfaffianSystem,
    label: Axis,
    steps: &mut Vec<ReductionStep>,
    certificates: &mut Vec<ZeroCertificate>,
) -> Result<(GaugeTransform, PfaffianSystem)> {
    let n = sys.n();
    let mut gauge = GaugeTransform::identity(n);
    let mut cur = sys.clone();
    if cur.p() == 0 {
        return Ok((gauge, cur));
    }
    let mut gauss = column_reduce_leading(&cur, Axis::X)?;
    cur = apply_gauge(&cur, &gauss.gauge)?;
    gauge = gauge.then(&gauss.gauge);
    while cur.p() > 0 && moser_rank_of(cur.p(), gauss.r, n) > Rational::one() {
        let theta = theta_poly(&cur, Axis::X)?;
        if !theta.is_zero() {
            break;
        }
        certificates.push(ZeroCertificate {
            claim: format!("theta vanishes on the {label} subsystem (p = {}, r = {})", cur.p(), gauss.r),
            window: Window::from_trunc(EXACT, theta.window(), (0, 0)).swapped_if(label == Axis::Y),
        });
        let (pb, rb) = (cur.p(), gauss.r);
        let qb = cur.q();
        let (g, next) = shear_step(&cur, &gauss)?;
        let mut kinds: Vec<GaugeKind> = gauss.gauge.provenance.iter().map(|s| s.kind).collect();
        kinds.extend(g.provenance.iter().map(|s| s.kind));
        gauge = gauge.then(&g);
        cur = next;
        if cur.p() > 0 {
            gauss = column_reduce_leading(&cur, Axis::X)?;
            cur = apply_gauge(&cur, &gauss.gauge)?;
            gauge = gauge.then(&gauss.gauge);
        } else {
            gauss = GaussForm {
                gauge: GaugeTransform::identity(n),
                r: column_reduce(&cur.amat().freeze_zero(Axis::X))?.rank,
                d: 0,
            };
        }
        steps.push(ReductionStep {
            axis: label,
            gauges: kinds,
            pole_before: pb,
            pole_after: cur.p(),
            rank_before: rb,
            rank_after: gauss.r,
            moser_before: moser_rank_of(pb, rb, n),
            moser_after: moser_rank_of(cur.p(), gauss.r, n),
            compatible: cur.is_normal_crossing() && cur.q() <= qb,
        });
    }
    Ok((gauge, cur))
}

/// Reduces the `x` subsystem, then the `y` subsystem, to Moser-irreducible
/// form with compatible gauges.
pub fn rank_reduce(sys: &PfaffianSystem) -> Result<Reduction> {
    let v = crate::system::check_integrability(sys);
    if !v.integrable {
        return Err(Error::IntegrabilityViolation {
            context: "input system".into(),
            window: v.window,
        });
    }
    let mut steps = Vec::new();
    let mut certificates = Vec::new();
    let (gx, sx) = reduce_x(sys, Axis::X, &mut steps, &mut certificates)?;
    let (gy, sy) = reduce_x(&sx.swap(), Axis::Y, &mut steps, &mut certificates)?;
    let system = sy.swap();
    let gauge = gx.then(&gy.swap_vars());
    let moser_rank_final = vec![moser_rank(&system, Axis::X)?, moser_rank(&system, Axis::Y)?];
    Ok(Reduction {
        gauge,
        system,
        report: ReductionReport {
            steps,
            moser_rank_final,
            certificates,
        },
    })
}
