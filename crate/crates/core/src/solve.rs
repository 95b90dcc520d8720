//! Bivariate assembly of formal fundamental matrices.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Axis, Error, Result};
use crate::linalg::QMatrix;
use crate::moser::rank_reduce;
use crate::ods::{associated_ods, exponential_parts_ods, moser_reduce_ods, ExponentialPart};
use crate::rational::{format_rational, rat, Rational};
use crate::series::{BiSeries, LaurentMatrix, SeriesMatrix, Window, EXACT};
use crate::system::{
    apply_gauge, check_integrability, GaugeKind, GaugeTransform, PfaffianSystem,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KatzPair {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub kappa1: Rational,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub kappa2: Rational,
}

fn require_integrable(sys: &PfaffianSystem) -> Result<()> {
    let v = check_integrability(sys);
    if v.integrable {
        Ok(())
    } else {
        Err(Error::IntegrabilityViolation {
            context: "input system".into(),
            window: v.window,
        })
    }
}

/// Exponential parts in `x` and in `y`, read off the associated ordinary
/// systems.
pub fn exponential_parts(sys: &PfaffianSystem) -> Result<(Vec<ExponentialPart>, Vec<ExponentialPart>)> {
    require_integrable(sys)?;
    let px = exponential_parts_ods(&associated_ods(sys, Axis::X))?;
    let py = exponential_parts_ods(&associated_ods(sys, Axis::Y))?;
    Ok((px, py))
}

fn max_katz(parts: &[ExponentialPart]) -> Rational {
    parts.iter().map(|p| p.katz()).max().unwrap_or_else(Rational::zero)
}

pub fn katz_pair(sys: &PfaffianSystem) -> Result<KatzPair> {
    let (px, py) = exponential_parts(sys)?;
    Ok(KatzPair {
        kappa1: max_katz(&px),
        kappa2: max_katz(&py),
    })
}

/// Pole orders of the Moser-reduced associated systems, checked against
/// `gamma - 1 < kappa <= gamma`.
pub fn true_poincare_rank(sys: &PfaffianSystem) -> Result<(u32, u32)> {
    let k = katz_pair(sys)?;
    let mut out = [0u32; 2];
    for (slot, (axis, kappa)) in [(Axis::X, &k.kappa1), (Axis::Y, &k.kappa2)].into_iter().enumerate() {
        let (_, red) = moser_reduce_ods(&associated_ods(sys, axis))?;
        let g = rat(red.p as i64);
        let consistent = if red.p == 0 {
            kappa.is_zero()
        } else {
            &(g.clone() - Rational::one()) < kappa && kappa <= &g
        };
        if !consistent {
            return Err(Error::InvariantViolation(format!(
                "pole order {} of the reduced {axis}-system disagrees with Katz invariant {}",
                red.p,
                format_rational(kappa)
            )));
        }
        out[slot] = red.p;
    }
    Ok((out[0], out[1]))
}

/// Scalar factors removed by a shift: `gamma[k]` multiplies `x^-k` (resp.
/// `y^-k`) in the normal-form coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ScalarShift {
    pub x: BTreeMap<u32, Rational>,
    pub y: BTreeMap<u32, Rational>,
}

impl ScalarShift {
    pub fn is_zero(&self) -> bool {
        self.x.values().all(Zero::is_zero) && self.y.values().all(Zero::is_zero)
    }

    pub fn merge(&mut self, o: &ScalarShift) {
        for (k, c) in &o.x {
            *self.x.entry(*k).or_insert_with(Rational::zero) += c;
        }
        for (k, c) in &o.y {
            *self.y.entry(*k).or_insert_with(Rational::zero) += c;
        }
    }

    pub fn part(&self, axis: Axis, multiplicity: u32) -> ExponentialPart {
        let m = match axis {
            Axis::X => &self.x,
            Axis::Y => &self.y,
        };
        ExponentialPart::from_polar(1, m, multiplicity)
    }

    /// Shift removing the given unramified parts.
    pub fn from_parts(px: &ExponentialPart, py: &ExponentialPart) -> ScalarShift {
        let polar = |p: &ExponentialPart| p.xi.iter().map(|(j, c)| (j - 1, c.clone())).collect();
        ScalarShift {
            x: polar(px),
            y: polar(py),
        }
    }
}

fn scalar_laurent(n: usize, gamma: &BTreeMap<u32, Rational>, axis: Axis) -> Option<LaurentMatrix> {
    let top = gamma.iter().filter(|(_, c)| !c.is_zero()).map(|(k, _)| *k).max()?;
    let terms: Vec<((u32, u32), Rational)> = gamma
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(k, c)| {
            let e = top - k;
            (if axis == Axis::X { (e, 0) } else { (0, e) }, c.clone())
        })
        .collect();
    let s = BiSeries::from_terms(terms, EXACT, EXACT);
    let shift = if axis == Axis::X { (-(top as i64), 0) } else { (0, -(top as i64)) };
    Some(LaurentMatrix::new(shift, SeriesMatrix::eye(n).scale_series(&s)))
}

/// Subtracts the scalar polar terms of `shift` from both subsystems.
pub fn bivariate_shift(sys: &PfaffianSystem, shift: &ScalarShift) -> Result<PfaffianSystem> {
    let n = sys.n();
    let mut coeffs = [sys.coefficient(Axis::X), sys.coefficient(Axis::Y)];
    for (slot, (axis, gamma)) in [(Axis::X, &shift.x), (Axis::Y, &shift.y)].into_iter().enumerate() {
        let pole = sys.pole(axis);
        if let Some((&k, _)) = gamma.iter().find(|(k, c)| **k > pole && !c.is_zero()) {
            return Err(Error::PreconditionViolated(format!(
                "shift term {axis}^-{k} exceeds pole order {pole}"
            )));
        }
        if pole > 0 {
            if let Some(g) = gamma.get(&pole).filter(|c| !c.is_zero()) {
                let lead = sys.subsystem(axis).mat.constant_matrix();
                if !lead.sub(&QMatrix::scalar(n, g)).is_nilpotent() {
                    return Err(Error::PreconditionViolated(format!(
                        "{} is not the only eigenvalue of the leading {axis}-matrix",
                        format_rational(g)
                    )));
                }
            }
        }
        if let Some(l) = scalar_laurent(n, gamma, axis) {
            coeffs[slot] = coeffs[slot].sub(&l);
        }
    }
    PfaffianSystem::from_laurent(&coeffs[0], &coeffs[1], "eigenvalue shift")
}

/// Monomials `(i, j)` inside the window by total degree, then `x` first.
fn monomials(tx: u32, ty: u32) -> Vec<(u32, u32)> {
    let mut m: Vec<(u32, u32)> = (0..tx).flat_map(|i| (0..ty).map(move |j| (i, j))).collect();
    m.sort_by_key(|&(i, j)| (i + j, std::cmp::Reverse(i)));
    m
}

fn finite_window(mats: &[&SeriesMatrix], context: &str) -> Result<(u32, u32)> {
    let tx = mats.iter().map(|m| m.trunc_x()).min().unwrap_or(EXACT);
    let ty = mats.iter().map(|m| m.trunc_y()).min().unwrap_or(EXACT);
    if tx == EXACT || ty == EXACT {
        return Err(Error::PreconditionViolated(format!(
            "{context} needs a finite truncation window"
        )));
    }
    Ok((tx, ty))
}

fn coeff_map(m: &SeriesMatrix, tx: u32, ty: u32) -> BTreeMap<(u32, u32), QMatrix> {
    monomials(tx, ty)
        .into_iter()
        .map(|ij| (ij, m.coeff_matrix(ij.0, ij.1)))
        .collect()
}

/// `sum A_ab T_cd - T_cd N_ab` over `(a, b) + (c, d) = (i, j)` with both
/// summands away from the origin.
fn convolution(
    ij: (u32, u32),
    a: &BTreeMap<(u32, u32), QMatrix>,
    t: &BTreeMap<(u32, u32), QMatrix>,
    nf: &BTreeMap<(u32, u32), QMatrix>,
    n: usize,
) -> QMatrix {
    let mut r = QMatrix::zeros(n, n);
    for (&(c, d), tcd) in t {
        if (c, d) == (0, 0) || c > ij.0 || d > ij.1 || (c, d) == ij {
            continue;
        }
        let ab = (ij.0 - c, ij.1 - d);
        if let Some(aab) = a.get(&ab) {
            r = r.add(&aab.mul(tcd));
        }
        if let Some(nab) = nf.get(&ab) {
            r = r.sub(&tcd.mul(nab));
        }
    }
    r
}

fn block_systems(sys: &PfaffianSystem, sizes: &[usize]) -> Result<Vec<PfaffianSystem>> {
    let (ca, cb) = (sys.coefficient(Axis::X), sys.coefficient(Axis::Y));
    crate::ods::block_ranges(sizes)
        .into_iter()
        .map(|r| {
            let a = LaurentMatrix::new(ca.shift(), ca.series().block(r.clone(), r.clone()));
            let b = LaurentMatrix::new(cb.shift(), cb.series().block(r.clone(), r));
            PfaffianSystem::from_laurent(&a, &b, "diagonal block")
        })
        .collect()
}

fn split_on_x(sys: &PfaffianSystem) -> Result<Option<(GaugeTransform, Vec<usize>)>> {
    let p = sys.p();
    let a00 = sys.amat().constant_matrix();
    let factors = a00.charpoly().coprime_factors();
    if p == 0 || factors.len() < 2 {
        return Ok(None);
    }
    let (pm, sizes) = crate::ods::eigenspace_basis(&a00, &factors);
    let pg = GaugeTransform::constant(&pm);
    let conj = apply_gauge(sys, &pg)?;
    let la = conj.amat().constant_matrix();
    let lb = conj.bmat().constant_matrix();
    let leading_blocks = |m: &QMatrix| {
        SeriesMatrix::from_qmatrix(m, EXACT, EXACT).is_block_diagonal(&sizes)
    };
    if !leading_blocks(&la) || !leading_blocks(&lb) {
        return Err(Error::NotSplittable(
            "leading pair is not simultaneously block diagonal".into(),
        ));
    }
    let n = sys.n();
    let (tx, ty) = finite_window(&[conj.amat()], "splitting")?;
    let a = coeff_map(conj.amat(), tx, ty);
    let owner: Vec<usize> = sizes.iter().enumerate().flat_map(|(b, &s)| std::iter::repeat_n(b, s)).collect();
    let ranges = crate::ods::block_ranges(&sizes);
    let mut t: BTreeMap<(u32, u32), QMatrix> = BTreeMap::new();
    let mut nf: BTreeMap<(u32, u32), QMatrix> = BTreeMap::new();
    t.insert((0, 0), QMatrix::identity(n));
    nf.insert((0, 0), la.clone());
    for ij in monomials(tx, ty).into_iter().skip(1) {
        let mut r = a[&ij].add(&convolution(ij, &a, &t, &nf, n));
        if ij.0 >= p {
            if let Some(prev) = t.get(&(ij.0 - p, ij.1)) {
                r = r.sub(&prev.scale(&rat(ij.0 as i64 - p as i64)));
            }
        }
        let mut tij = QMatrix::zeros(n, n);
        let mut nij = QMatrix::zeros(n, n);
        for (bi, ri) in ranges.iter().enumerate() {
            for (bj, rj) in ranges.iter().enumerate() {
                let rows: Vec<usize> = ri.clone().collect();
                let cols: Vec<usize> = rj.clone().collect();
                if bi == bj {
                    for &u in &rows {
                        for &v in &cols {
                            nij.set(u, v, r.get(u, v).clone());
                        }
                    }
                    continue;
                }
                let x = QMatrix::sylvester(
                    &la.submatrix(&rows, &rows),
                    &la.submatrix(&cols, &cols),
                    &r.submatrix(&rows, &cols).scale(&rat(-1)),
                )
                .ok_or_else(|| Error::NotSplittable("leading blocks share an eigenvalue".into()))?;
                for (u, &ii) in rows.iter().enumerate() {
                    for (v, &jj) in cols.iter().enumerate() {
                        tij.set(ii, jj, x.get(u, v).clone());
                    }
                }
            }
        }
        debug_assert!((0..n).all(|u| (0..n).all(|v| owner[u] == owner[v] || nij.get(u, v).is_zero())));
        t.insert(ij, tij);
        nf.insert(ij, nij);
    }
    let terms: Vec<_> = t.into_iter().collect();
    let tm = SeriesMatrix::from_coeff_matrices(n, n, &terms, tx, ty);
    let gauge = pg.then(&GaugeTransform::new(tm, GaugeKind::Splitting, Some(Axis::X), "off-diagonal corrections"));
    Ok(Some((gauge, sizes)))
}

/// Block-diagonalizes both subsystems along disjoint spectra of one
/// leading constant matrix.
pub fn bivariate_splitting(sys: &PfaffianSystem) -> Result<(GaugeTransform, Vec<PfaffianSystem>)> {
    if !sys.is_normal_crossing() {
        return Err(Error::PreconditionViolated("splitting needs normal crossings".into()));
    }
    let (gauge, sizes) = match split_on_x(sys)? {
        Some(g) => g,
        None => match split_on_x(&sys.swap())? {
            Some((g, s)) => (g.swap_vars(), s),
            None => {
                return Err(Error::NotSplittable(
                    "no leading matrix with a pole has two coprime factors".into(),
                ))
            }
        },
    };
    let out = apply_gauge(sys, &gauge)?;
    if !out.amat().is_block_diagonal(&sizes) || !out.bmat().is_block_diagonal(&sizes) {
        return Err(Error::NotSplittable(
            "transformed system is not block diagonal within the window".into(),
        ));
    }
    Ok((gauge, block_systems(&out, &sizes)?))
}

/// Gauge `T = I + ...` reducing a regular system to the constant pair
/// `(lambda1, lambda2)`.
#[derive(Clone, Debug)]
pub struct RegularSolution {
    pub gauge: GaugeTransform,
    pub lambda1: QMatrix,
    pub lambda2: QMatrix,
}

/// Solves the regular case monomial by monomial, using whichever of the two
/// commutator equations is invertible on each entry.
pub fn regular_fundamental(sys: &PfaffianSystem) -> Result<RegularSolution> {
    if sys.p() != 0 || sys.q() != 0 || !sys.is_normal_crossing() {
        return Err(Error::PreconditionViolated(format!(
            "regular solve needs pole orders (0, 0), got ({}, {})",
            sys.p(),
            sys.q()
        )));
    }
    let n = sys.n();
    let (tx, ty) = finite_window(&[sys.amat(), sys.bmat()], "regular solve")?;
    let a = coeff_map(sys.amat(), tx, ty);
    let b = coeff_map(sys.bmat(), tx, ty);
    let (a00, b00) = (a[&(0, 0)].clone(), b[&(0, 0)].clone());
    let mut t: BTreeMap<(u32, u32), QMatrix> = BTreeMap::new();
    let mut na: BTreeMap<(u32, u32), QMatrix> = BTreeMap::new();
    let mut nb: BTreeMap<(u32, u32), QMatrix> = BTreeMap::new();
    t.insert((0, 0), QMatrix::identity(n));
    na.insert((0, 0), a00.clone());
    nb.insert((0, 0), b00.clone());
    let mut retained = Vec::new();
    let nn = n * n;
    for ij in monomials(tx, ty).into_iter().skip(1) {
        let r1 = a[&ij].add(&convolution(ij, &a, &t, &na, n));
        let r2 = b[&ij].add(&convolution(ij, &b, &t, &nb, n));
        let l1 = crate::linalg::sylvester_operator(&a00.sub(&QMatrix::scalar(n, &rat(ij.0 as i64))), &a00);
        let l2 = crate::linalg::sylvester_operator(&b00.sub(&QMatrix::scalar(n, &rat(ij.1 as i64))), &b00);
        let mut cols: Vec<Vec<Rational>> = (0..nn)
            .map(|c| {
                let mut v = l1.column(c);
                v.extend(l2.column(c));
                v
            })
            .collect();
        let stacked = QMatrix::from_columns(&cols);
        let comp = crate::ods::image_complement(&stacked);
        for &c in &comp {
            let mut e = vec![Rational::zero(); 2 * nn];
            e[c] = -Rational::one();
            cols.push(e);
        }
        let mut rhs = crate::linalg::vectorize(&r1.scale(&rat(-1)));
        rhs.extend(crate::linalg::vectorize(&r2.scale(&rat(-1))));
        let sol = QMatrix::from_columns(&cols)
            .solve(&rhs)
            .ok_or_else(|| Error::InvariantViolation("regular recursion has no solution".into()))?;
        let mut slack = vec![Rational::zero(); 2 * nn];
        for (s, &c) in comp.iter().enumerate() {
            slack[c] = sol[nn + s].clone();
        }
        let sa = crate::linalg::unvectorize(&slack[..nn], n, n);
        let sb = crate::linalg::unvectorize(&slack[nn..], n, n);
        if !sa.is_zero() || !sb.is_zero() {
            retained.push(ij);
        }
        t.insert(ij, crate::linalg::unvectorize(&sol[..nn], n, n));
        na.insert(ij, sa);
        nb.insert(ij, sb);
    }
    if !retained.is_empty() {
        return Err(Error::JointResonance { monomials: retained });
    }
    let terms: Vec<_> = t.into_iter().collect();
    let tm = SeriesMatrix::from_coeff_matrices(n, n, &terms, tx, ty);
    Ok(RegularSolution {
        gauge: GaugeTransform::new(tm, GaugeKind::Regular, None, "regular normal form"),
        lambda1: a00,
        lambda2: b00,
    })
}

/// Diagonal block of the fundamental matrix carrying one pair of
/// exponential parts.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionBlock {
    pub size: usize,
    pub q1: ExponentialPart,
    pub q2: ExponentialPart,
}

/// `Y = phi x^lambda1 y^lambda2 exp(Q1) exp(Q2)` with `Q1`, `Q2` scalar on
/// each block. On failure the fields past the blocking step stay empty.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionData {
    pub s: (u32, u32),
    pub katz: KatzPair,
    pub parts_x: Vec<ExponentialPart>,
    pub parts_y: Vec<ExponentialPart>,
    pub blocks: Vec<SolutionBlock>,
    #[serde(skip)]
    pub lambda1: Option<QMatrix>,
    #[serde(skip)]
    pub lambda2: Option<QMatrix>,
    #[serde(skip)]
    pub phi: Option<SeriesMatrix>,
    #[serde(skip)]
    pub gauge_trace: Vec<GaugeTransform>,
}

#[derive(Clone, Debug)]
pub struct PartialSolution {
    pub data: SolutionData,
    pub step: String,
    pub error: Error,
}

struct Assembled {
    gauge: GaugeTransform,
    lambda1: QMatrix,
    lambda2: QMatrix,
    blocks: Vec<SolutionBlock>,
    trace: Vec<GaugeTransform>,
}

type StepResult<T> = std::result::Result<T, (String, Error)>;

fn at<T>(step: &str, r: Result<T>) -> StepResult<T> {
    r.map_err(|e| (step.to_string(), e))
}

fn add_polar(part: &ExponentialPart, gamma: &BTreeMap<u32, Rational>) -> ExponentialPart {
    let mut polar: BTreeMap<u32, Rational> = part.xi.iter().map(|(j, c)| (j - 1, c.clone())).collect();
    for (k, c) in gamma {
        *polar.entry(*k).or_insert_with(Rational::zero) += c;
    }
    ExponentialPart::from_polar(1, &polar, part.multiplicity)
}

fn leading_shift(sys: &PfaffianSystem) -> ScalarShift {
    let mut shift = ScalarShift::default();
    for axis in [Axis::X, Axis::Y] {
        let pole = sys.pole(axis);
        if pole == 0 {
            continue;
        }
        let f = sys.subsystem(axis).mat.constant_matrix().charpoly().coprime_factors();
        if let [single] = f.as_slice() {
            if let Some(g) = single.root.clone().filter(|g| !g.is_zero()) {
                match axis {
                    Axis::X => shift.x.insert(pole, g),
                    Axis::Y => shift.y.insert(pole, g),
                };
            }
        }
    }
    shift
}

fn assemble(sys: &PfaffianSystem) -> StepResult<Assembled> {
    let n = sys.n();
    let px = at("x exponential parts", exponential_parts_ods(&associated_ods(sys, Axis::X)))?;
    let py = at("y exponential parts", exponential_parts_ods(&associated_ods(sys, Axis::Y)))?;
    if px.len() == 1 && py.len() == 1 {
        let shift = ScalarShift::from_parts(&px[0], &py[0]);
        let z = at("eigenvalue shift", bivariate_shift(sys, &shift))?;
        let red = at("rank reduction", rank_reduce(&z))?;
        if red.system.p() != 0 || red.system.q() != 0 {
            return Err((
                "rank reduction".into(),
                Error::InvariantViolation(format!(
                    "single exponential part left pole orders ({}, {})",
                    red.system.p(),
                    red.system.q()
                )),
            ));
        }
        let reg = at("regular solve", regular_fundamental(&red.system))?;
        return Ok(Assembled {
            gauge: red.gauge.then(&reg.gauge),
            lambda1: reg.lambda1,
            lambda2: reg.lambda2,
            blocks: vec![SolutionBlock {
                size: n,
                q1: px[0].clone(),
                q2: py[0].clone(),
            }],
            trace: vec![red.gauge, reg.gauge],
        });
    }
    match bivariate_splitting(sys) {
        Ok((split, parts)) => {
            let mut subs = Vec::new();
            for b in &parts {
                subs.push(assemble(b)?);
            }
            let diag = SeriesMatrix::block_diag(&subs.iter().map(|s| s.gauge.mat.clone()).collect::<Vec<_>>());
            let inner = GaugeTransform {
                mat: diag,
                provenance: subs.iter().flat_map(|s| s.gauge.provenance.clone()).collect(),
            };
            let mut trace = vec![split.clone()];
            trace.extend(subs.iter().flat_map(|s| s.trace.clone()));
            Ok(Assembled {
                gauge: split.then(&inner),
                lambda1: QMatrix::block_diag(&subs.iter().map(|s| s.lambda1.clone()).collect::<Vec<_>>()),
                lambda2: QMatrix::block_diag(&subs.iter().map(|s| s.lambda2.clone()).collect::<Vec<_>>()),
                blocks: subs.into_iter().flat_map(|s| s.blocks).collect(),
                trace,
            })
        }
        Err(Error::NotSplittable(_)) => {
            let shift = leading_shift(sys);
            let z = at("eigenvalue shift", bivariate_shift(sys, &shift))?;
            let red = at("rank reduction", rank_reduce(&z))?;
            let progressed = !shift.is_zero() || (red.system.p(), red.system.q()) != (sys.p(), sys.q());
            if !progressed {
                return Err((
                    "splitting".into(),
                    Error::NotSplittable(
                        "several exponential parts but an irreducible nilpotent leading pair".into(),
                    ),
                ));
            }
            let sub = assemble(&red.system)?;
            let mut trace = vec![red.gauge.clone()];
            trace.extend(sub.trace);
            Ok(Assembled {
                gauge: red.gauge.then(&sub.gauge),
                lambda1: sub.lambda1,
                lambda2: sub.lambda2,
                blocks: sub
                    .blocks
                    .into_iter()
                    .map(|b| SolutionBlock {
                        size: b.size,
                        q1: add_polar(&b.q1, &shift.x),
                        q2: add_polar(&b.q2, &shift.y),
                    })
                    .collect(),
                trace,
            })
        }
        Err(e) => Err(("splitting".into(), e)),
    }
}

/// Diagonal of `delta Q` over the blocks, as a Laurent matrix.
fn polar_diag(blocks: &[SolutionBlock], axis: Axis) -> LaurentMatrix {
    let n: usize = blocks.iter().map(|b| b.size).sum();
    let polar = |b: &SolutionBlock| -> BTreeMap<u32, Rational> {
        let part = if axis == Axis::X { &b.q1 } else { &b.q2 };
        part.xi.iter().map(|(j, c)| (j - 1, c.clone())).collect()
    };
    let top = blocks.iter().flat_map(|b| polar(b).into_keys()).max().unwrap_or(0);
    let mut m = SeriesMatrix::zeros(n, n, EXACT, EXACT);
    let mut off = 0;
    for b in blocks {
        let terms: Vec<((u32, u32), Rational)> = polar(b)
            .into_iter()
            .map(|(k, c)| {
                let e = top - k;
                (if axis == Axis::X { (e, 0) } else { (0, e) }, c)
            })
            .collect();
        let s = BiSeries::from_terms(terms, EXACT, EXACT);
        for i in off..off + b.size {
            m.set(i, i, s.clone());
        }
        off += b.size;
    }
    let t = -(top as i64);
    LaurentMatrix::new(if axis == Axis::X { (t, 0) } else { (0, t) }, m)
}

/// `C phi - delta phi - phi (lambda + delta Q)` for both axes, where `C` is
/// the coefficient of the system.
pub fn substitution_residual(sys: &PfaffianSystem, data: &SolutionData) -> Result<[LaurentMatrix; 2]> {
    let (Some(phi), Some(l1), Some(l2)) = (&data.phi, &data.lambda1, &data.lambda2) else {
        return Err(Error::PreconditionViolated("solution data is partial".into()));
    };
    let phi = LaurentMatrix::from_series(phi.clone());
    let mut out = Vec::new();
    for (axis, lam) in [(Axis::X, l1), (Axis::Y, l2)] {
        let rhs = LaurentMatrix::from_series(SeriesMatrix::from_qmatrix(lam, EXACT, EXACT))
            .add(&polar_diag(&data.blocks, axis));
        let r = sys
            .coefficient(axis)
            .mul(&phi)
            .sub(&phi.delta(axis))
            .sub(&phi.mul(&rhs));
        out.push(r);
    }
    Ok([out[0].clone(), out[1].clone()])
}

/// Whether both residuals vanish, and the window they were checked in.
pub fn verify_substitution(sys: &PfaffianSystem, data: &SolutionData) -> Result<(bool, Window)> {
    let [r1, r2] = substitution_residual(sys, data)?;
    Ok((r1.is_zero() && r2.is_zero(), r1.window().meet(r2.window())))
}

/// Formal fundamental matrix data, or the data gathered before the step
/// that blocked.
pub fn formal_fundamental(sys: &PfaffianSystem) -> std::result::Result<SolutionData, Box<PartialSolution>> {
    let mut data = SolutionData {
        s: (1, 1),
        katz: KatzPair {
            kappa1: Rational::zero(),
            kappa2: Rational::zero(),
        },
        parts_x: Vec::new(),
        parts_y: Vec::new(),
        blocks: Vec::new(),
        lambda1: None,
        lambda2: None,
        phi: None,
        gauge_trace: Vec::new(),
    };
    let fail = |data: SolutionData, step: &str, error: Error| {
        Box::new(PartialSolution {
            data,
            step: step.to_string(),
            error,
        })
    };
    let (px, py) = match exponential_parts(sys) {
        Ok(p) => p,
        Err(e) => return Err(fail(data, "exponential parts", e)),
    };
    data.s = (
        px.iter().map(|p| p.s).max().unwrap_or(1),
        py.iter().map(|p| p.s).max().unwrap_or(1),
    );
    data.katz = KatzPair {
        kappa1: max_katz(&px),
        kappa2: max_katz(&py),
    };
    data.parts_x = px;
    data.parts_y = py;
    for (axis, s) in [(Axis::X, data.s.0), (Axis::Y, data.s.1)] {
        if s > 1 {
            return Err(fail(data, "ramification", Error::RamificationRequired { axis, index: s }));
        }
    }
    let asm = match assemble(sys) {
        Ok(a) => a,
        Err((step, e)) => return Err(fail(data, &step, e)),
    };
    data.blocks = asm.blocks;
    data.lambda1 = Some(asm.lambda1);
    data.lambda2 = Some(asm.lambda2);
    data.phi = Some(asm.gauge.mat.clone());
    data.gauge_trace = asm.trace;
    match verify_substitution(sys, &data) {
        Ok((true, _)) => Ok(data),
        Ok((false, w)) => Err(fail(
            data,
            "substitution check",
            Error::InvariantViolation(format!("assembled solution leaves a residual within {w}")),
        )),
        Err(e) => Err(fail(data, "substitution check", e)),
    }
}
