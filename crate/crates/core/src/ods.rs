//! Formal reduction of a single ordinary system `t dY/dt = t^-p A(t) Y`:
//! splitting, eigenvalue shifting, Moser reduction, ramification and the
//! exponential parts they produce.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::echelon::column_reduce;
use crate::error::{Axis, Error, Result};
use crate::linalg::{CoprimeFactor, QMatrix};
use crate::moser::{moser_rank_of, reduce_x, theta_poly};
use crate::rational::{format_rational, rat, Rational};
use crate::series::{LaurentMatrix, SeriesMatrix, EXACT};
use crate::system::{apply_gauge, GaugeKind, GaugeTransform, PfaffianSystem, Subsystem};

/// `t dY/dt = t^-p mat Y`. Entries of `mat` are series in `x`, which plays
/// the role of `t` whatever the original variable was.
#[derive(Clone, Debug)]
pub struct OdsSystem {
    pub p: u32,
    pub mat: SeriesMatrix,
}

impl OdsSystem {
    pub fn new(p: u32, mat: SeriesMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} coefficient",
                mat.rows(),
                mat.cols()
            )));
        }
        if mat.entries().iter().any(|e| e.max_exponent(Axis::Y).unwrap_or(0) > 0) {
            return Err(Error::PreconditionViolated(
                "an ordinary system has coefficients in one variable".into(),
            ));
        }
        let mat = mat.freeze_zero(Axis::Y);
        if p > 0 && mat.freeze_zero(Axis::X).is_zero() {
            return Err(Error::InvariantViolation(format!(
                "leading matrix vanishes with p = {p}"
            )));
        }
        Ok(OdsSystem { p, mat })
    }

    pub fn n(&self) -> usize {
        self.mat.rows()
    }

    pub fn leading(&self) -> QMatrix {
        self.mat.constant_matrix()
    }

    /// Coefficient of `t^k` in `mat`.
    pub fn coeff(&self, k: u32) -> QMatrix {
        self.mat.coeff_matrix(k, 0)
    }

    pub fn trunc(&self) -> u32 {
        self.mat.trunc_x()
    }

    /// The system with `y` absent: `B = 0`.
    pub fn to_system(&self) -> PfaffianSystem {
        let n = self.n();
        PfaffianSystem::from_subsystems(
            Subsystem {
                pole: self.p,
                cross_pole: 0,
                mat: self.mat.clone(),
            },
            Subsystem {
                pole: 0,
                cross_pole: 0,
                mat: SeriesMatrix::zeros(n, n, EXACT, EXACT),
            },
        )
    }

    fn from_system(sys: &PfaffianSystem) -> OdsSystem {
        OdsSystem {
            p: sys.p(),
            mat: sys.amat().clone(),
        }
    }

    pub fn coefficient(&self) -> LaurentMatrix {
        LaurentMatrix::new((-(self.p as i64), 0), self.mat.clone())
    }

    fn from_laurent(l: &LaurentMatrix) -> Result<OdsSystem> {
        let s = Subsystem::from_laurent(l, Axis::X, "ordinary system")?;
        Ok(OdsSystem { p: s.pole, mat: s.mat })
    }

    pub fn apply_gauge(&self, t: &GaugeTransform) -> Result<OdsSystem> {
        Ok(OdsSystem::from_system(&apply_gauge(&self.to_system(), t)?))
    }

    pub fn eq_within(&self, o: &Self) -> bool {
        self.coefficient().eq_within(&o.coefficient())
    }
}

/// The ordinary system obtained by setting the other variable to zero.
pub fn associated_ods(sys: &PfaffianSystem, axis: Axis) -> OdsSystem {
    match axis {
        Axis::X => OdsSystem {
            p: sys.p(),
            mat: sys.amat().freeze_zero(Axis::Y),
        },
        Axis::Y => OdsSystem {
            p: sys.q(),
            mat: sys.bmat().freeze_zero(Axis::X).swap_vars(),
        },
    }
}

/// Scalar term `gamma t^-pole` removed by an eigenvalue shift.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShiftRecord {
    pub pole: u32,
    #[serde(serialize_with = "crate::rational::serialize")]
    pub gamma: Rational,
}

/// `A - gamma t^-p I`, requiring `A0 - gamma I` nilpotent.
pub fn eigenvalue_shift(ods: &OdsSystem, gamma: &Rational) -> Result<(ShiftRecord, OdsSystem)> {
    let n = ods.n();
    let shifted = ods.leading().sub(&QMatrix::scalar(n, gamma));
    if ods.p == 0 || !shifted.is_nilpotent() {
        return Err(Error::PreconditionViolated(format!(
            "{} is not the only eigenvalue of the leading matrix",
            format_rational(gamma)
        )));
    }
    let record = ShiftRecord {
        pole: ods.p,
        gamma: gamma.clone(),
    };
    if gamma.is_zero() {
        return Ok((record, ods.clone()));
    }
    let mat = ods.mat.sub(&SeriesMatrix::eye(n).scale(gamma));
    let out = OdsSystem::from_laurent(&LaurentMatrix::new((-(ods.p as i64), 0), mat))?;
    Ok((record, out))
}

/// Substitutes `t = s^m`; the coefficient becomes `m A(s^m)` with pole
/// order `m p`.
pub fn ramify_ods(ods: &OdsSystem, m: u32) -> Result<OdsSystem> {
    if m == 0 {
        return Err(Error::PreconditionViolated("ramification index must be positive".into()));
    }
    Ok(OdsSystem {
        p: ods.p * m,
        mat: ods.mat.ramify(Axis::X, m).scale(&rat(m as i64)),
    })
}

/// Moser reduction of the ordinary system.
pub fn moser_reduce_ods(ods: &OdsSystem) -> Result<(GaugeTransform, OdsSystem)> {
    let mut steps = Vec::new();
    let mut certs = Vec::new();
    let (g, sys) = reduce_x(&ods.to_system(), Axis::X, &mut steps, &mut certs)?;
    Ok((g, OdsSystem::from_system(&sys)))
}

fn is_moser_irreducible(ods: &OdsSystem) -> Result<bool> {
    if ods.p == 0 {
        return Ok(true);
    }
    let r = column_reduce(&ods.mat.freeze_zero(Axis::X))?.rank;
    if moser_rank_of(ods.p, r, ods.n()) <= Rational::one() {
        return Ok(true);
    }
    Ok(!theta_poly(&ods.to_system(), Axis::X)?.is_zero())
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct KatzValue {
    #[serde(serialize_with = "crate::rational::serialize")]
    pub value: Rational,
}

/// Largest slope of the Newton polygon of `det(lambda I - t^-p A)`,
/// floored at zero. Requires a Moser-irreducible input.
pub fn katz_invariant_ods(ods: &OdsSystem) -> Result<KatzValue> {
    if !is_moser_irreducible(ods)? {
        return Err(Error::PreconditionViolated(
            "the Katz invariant is read off a Moser-irreducible system".into(),
        ));
    }
    newton_katz(ods)
}

fn newton_katz(ods: &OdsSystem) -> Result<KatzValue> {
    let n = ods.n();
    let c = ods.mat.charpoly();
    let mut best = Rational::zero();
    for (k, ck) in c.iter().enumerate().take(n) {
        if ck.is_zero() {
            continue;
        }
        let v = ck.valuation(Axis::X) as i64 - (ods.p as i64) * (n - k) as i64;
        let slope = Rational::new((-v).into(), ((n - k) as i64).into());
        if slope > best {
            best = slope;
        }
    }
    Ok(KatzValue { value: best })
}

/// Constant change of basis to generalized eigenspaces of the coprime
/// factors, with the block sizes.
pub(crate) fn eigenspace_basis(a0: &QMatrix, factors: &[CoprimeFactor]) -> (QMatrix, Vec<usize>) {
    let mut cols = Vec::new();
    let mut sizes = Vec::new();
    for f in factors {
        let ker = a0.eval_poly(&f.power()).nullspace();
        sizes.push(ker.len());
        cols.extend(ker);
    }
    (QMatrix::from_columns(&cols), sizes)
}

pub(crate) fn block_ranges(sizes: &[usize]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut s = 0;
    for &k in sizes {
        out.push(s..s + k);
        s += k;
    }
    out
}

fn owner_of(sizes: &[usize]) -> Vec<usize> {
    let mut owner = Vec::new();
    for (b, &s) in sizes.iter().enumerate() {
        owner.extend(std::iter::repeat_n(b, s));
    }
    owner
}

/// Off-block-diagonal corrections `T = I + sum T_k t^k` decoupling a
/// system whose coefficients `a[k]` (of `t^(k-p)`) have a block-diagonal
/// leading term with pairwise disjoint block spectra.
pub(crate) fn splitting_series(a: &[QMatrix], p: u32, sizes: &[usize]) -> Result<Vec<QMatrix>> {
    let n = a[0].rows();
    let ranges = block_ranges(sizes);
    let owner = owner_of(sizes);
    let mut t: Vec<QMatrix> = vec![QMatrix::identity(n)];
    let mut at: Vec<QMatrix> = vec![a[0].clone()];
    for k in 1..a.len() {
        // r = A_k + sum_{i=1}^{k-1} (A_i T_{k-i} - T_{k-i} At_i) - (k-p) T_{k-p}
        let mut r = a[k].clone();
        for i in 1..k {
            r = r.add(&a[i].mul(&t[k - i])).sub(&t[k - i].mul(&at[i]));
        }
        if k as u32 >= p {
            let j = k - p as usize;
            r = r.sub(&t[j].scale(&rat(k as i64 - p as i64)));
        }
        let mut tk = QMatrix::zeros(n, n);
        for (bi, ri) in ranges.iter().enumerate() {
            for (bj, rj) in ranges.iter().enumerate() {
                if bi == bj {
                    continue;
                }
                let rows: Vec<usize> = ri.clone().collect();
                let cols: Vec<usize> = rj.clone().collect();
                let a_ii = a[0].submatrix(&rows, &rows);
                let a_jj = a[0].submatrix(&cols, &cols);
                let rhs = r.submatrix(&rows, &cols).scale(&rat(-1));
                let x = QMatrix::sylvester(&a_ii, &a_jj, &rhs).ok_or_else(|| {
                    Error::NotSplittable("leading blocks share an eigenvalue".into())
                })?;
                for (u, &ii) in rows.iter().enumerate() {
                    for (v, &jj) in cols.iter().enumerate() {
                        tk.set(ii, jj, x.get(u, v).clone());
                    }
                }
            }
        }
        let mut atk = QMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if owner[i] == owner[j] {
                    atk.set(i, j, r.get(i, j).clone());
                }
            }
        }
        t.push(tk);
        at.push(atk);
    }
    Ok(t)
}

pub(crate) fn series_from_coeffs(coeffs: &[QMatrix], axis: Axis, tx: u32, ty: u32) -> SeriesMatrix {
    let n = coeffs[0].rows();
    let terms: Vec<((u32, u32), QMatrix)> = coeffs
        .iter()
        .enumerate()
        .map(|(k, m)| match axis {
            Axis::X => ((k as u32, 0), m.clone()),
            Axis::Y => ((0, k as u32), m.clone()),
        })
        .collect();
    SeriesMatrix::from_coeff_matrices(n, n, &terms, tx, ty)
}

/// Decouples the system along the coprime factors of the characteristic
/// polynomial of its leading matrix.
pub fn split_leading(ods: &OdsSystem) -> Result<(GaugeTransform, Vec<OdsSystem>)> {
    let a0 = ods.leading();
    let factors = a0.charpoly().coprime_factors();
    if factors.len() < 2 || ods.p == 0 {
        return Err(Error::NotSplittable(format!(
            "characteristic polynomial {} has a single coprime factor",
            a0.charpoly()
        )));
    }
    let (pm, sizes) = eigenspace_basis(&a0, &factors);
    let pinv = pm.inverse().expect("generalized eigenspaces span");
    let k = ods.trunc();
    if k == EXACT {
        return Err(Error::TruncationExhausted {
            context: "splitting an exact system needs a truncation order".into(),
            window: ods.coefficient().window(),
        });
    }
    let coeffs: Vec<QMatrix> = (0..k).map(|i| pinv.mul(&ods.coeff(i)).mul(&pm)).collect();
    let t = splitting_series(&coeffs, ods.p, &sizes)?;
    let tmat = SeriesMatrix::from_qmatrix(&pm, EXACT, EXACT).mul(&series_from_coeffs(&t, Axis::X, k, EXACT));
    let gauge = GaugeTransform::new(
        tmat,
        GaugeKind::Splitting,
        Some(Axis::X),
        format!("splitting into blocks {sizes:?}"),
    );
    let out = ods.apply_gauge(&gauge)?;
    if !out.mat.is_block_diagonal(&sizes) {
        return Err(Error::InvariantViolation("splitting left coupling terms".into()));
    }
    let blocks = block_ranges(&sizes)
        .into_iter()
        .map(|r| {
            let m = out.mat.block(r.clone(), r);
            OdsSystem::from_laurent(&LaurentMatrix::new((-(out.p as i64), 0), m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((gauge, blocks))
}

/// One exponential part with multiplicity. `xi[j]` is the coefficient of
/// `t^-j` (`j >= 2`) in the `d/dt` normal form, where `t = x^(1/s)`; `s` is
/// reduced as far as the exponents allow.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ExponentialPart {
    pub s: u32,
    pub xi: BTreeMap<u32, Rational>,
    pub multiplicity: u32,
}

impl ExponentialPart {
    /// From polar coefficients `c[k]` of `t^-k` in the `t d/dt` form.
    pub fn from_polar(s: u32, polar: &BTreeMap<u32, Rational>, multiplicity: u32) -> Self {
        let nz: Vec<(u32, &Rational)> = polar.iter().filter(|(_, c)| !c.is_zero()).map(|(k, c)| (*k, c)).collect();
        let g = nz.iter().fold(s, |g, (k, _)| g.gcd(k));
        let xi = nz
            .iter()
            .map(|(k, c)| (k / g + 1, *c / rat(g as i64)))
            .collect();
        ExponentialPart {
            s: if nz.is_empty() { 1 } else { s / g },
            xi,
            multiplicity,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.xi.is_empty()
    }

    /// Terms `(e, q)` of the formal integral `Q = sum q x^e`, most singular
    /// first.
    pub fn q_terms(&self) -> Vec<(Rational, Rational)> {
        self.xi
            .iter()
            .rev()
            .map(|(&j, c)| {
                let k = (j - 1) as i64;
                (
                    Rational::new((-k).into(), (self.s as i64).into()),
                    -c / rat(k),
                )
            })
            .collect()
    }

    /// Renders `Q` in the variable `var`.
    pub fn format_q(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (e, q)) in self.q_terms().into_iter().enumerate() {
            let neg = q.is_negative();
            let mag = q.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let d = -e;
            let pow = if d.is_one() {
                var.to_string()
            } else {
                format!("{var}^{}", paren(&d))
            };
            out.push_str(&format!("{}/{pow}", paren(&mag)));
        }
        out
    }

    /// Pole order of `Q`.
    pub fn katz(&self) -> Rational {
        match self.xi.keys().next_back() {
            Some(&j) => Rational::new(((j - 1) as i64).into(), (self.s as i64).into()),
            None => Rational::zero(),
        }
    }
}

fn paren(q: &Rational) -> String {
    let s = format_rational(q);
    if s.contains('/') {
        format!("({s})")
    } else {
        s
    }
}

impl Serialize for ExponentialPart {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = ser.serialize_struct("ExponentialPart", 4)?;
        st.serialize_field("s", &self.s)?;
        let xi: BTreeMap<String, String> = self
            .xi
            .iter()
            .map(|(j, c)| (j.to_string(), format_rational(c)))
            .collect();
        st.serialize_field("xi", &xi)?;
        let q: Vec<(String, String)> = self
            .q_terms()
            .iter()
            .map(|(e, c)| (format_rational(e), format_rational(c)))
            .collect();
        st.serialize_field("q_terms", &q)?;
        st.serialize_field("multiplicity", &self.multiplicity)?;
        st.end()
    }
}

impl fmt::Display for ExponentialPart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q = {} (s = {}, multiplicity {})", self.format_q("x"), self.s, self.multiplicity)
    }
}

/// Merges equal parts and sorts.
pub fn canonical_parts(parts: Vec<ExponentialPart>) -> Vec<ExponentialPart> {
    let mut merged: BTreeMap<(u32, Vec<(u32, Rational)>), u32> = BTreeMap::new();
    for p in parts {
        let key = (p.s, p.xi.into_iter().collect());
        *merged.entry(key).or_insert(0) += p.multiplicity;
    }
    merged
        .into_iter()
        .map(|((s, xi), m)| ExponentialPart {
            s,
            xi: xi.into_iter().collect(),
            multiplicity: m,
        })
        .collect()
}

/// One call of the exponential-part recursion.
#[derive(Clone, Debug, Serialize)]
pub struct RecursionNode {
    pub parent: Option<usize>,
    pub n: usize,
    pub p: u32,
    pub rank: usize,
    pub action: &'static str,
}

struct Recursion {
    trace: Vec<RecursionNode>,
}

/// Exponential parts of the system, with multiplicities summing to `n`.
pub fn exponential_parts_ods(ods: &OdsSystem) -> Result<Vec<ExponentialPart>> {
    Ok(exponential_parts_traced(ods)?.0)
}

/// As [`exponential_parts_ods`], also returning the recursion tree.
pub fn exponential_parts_traced(ods: &OdsSystem) -> Result<(Vec<ExponentialPart>, Vec<RecursionNode>)> {
    let mut rec = Recursion { trace: Vec::new() };
    let mut out = Vec::new();
    rec.run(ods, &BTreeMap::new(), 1, None, &mut out)?;
    Ok((canonical_parts(out), rec.trace))
}

fn scaled_prefix(prefix: &BTreeMap<u32, Rational>, m: u32) -> BTreeMap<u32, Rational> {
    prefix
        .iter()
        .map(|(k, c)| (k * m, c * rat(m as i64)))
        .collect()
}

impl Recursion {
    fn node(&mut self, ods: &OdsSystem, parent: Option<usize>) -> Result<usize> {
        let rank = column_reduce(&ods.mat.freeze_zero(Axis::X))?.rank;
        self.trace.push(RecursionNode {
            parent,
            n: ods.n(),
            p: ods.p,
            rank,
            action: "",
        });
        Ok(self.trace.len() - 1)
    }

    fn run(
        &mut self,
        ods: &OdsSystem,
        prefix: &BTreeMap<u32, Rational>,
        s: u32,
        parent: Option<usize>,
        out: &mut Vec<ExponentialPart>,
    ) -> Result<()> {
        let id = self.node(ods, parent)?;
        let n = ods.n();
        if ods.p == 0 {
            self.trace[id].action = "first kind";
            out.push(ExponentialPart::from_polar(s, prefix, n as u32));
            return Ok(());
        }
        if n == 1 {
            self.trace[id].action = "scalar";
            if ods.trunc() < ods.p {
                return Err(Error::TruncationExhausted {
                    context: "scalar polar part".into(),
                    window: ods.coefficient().window(),
                });
            }
            let mut pre = prefix.clone();
            for i in 0..ods.p {
                let c = ods.mat.get(0, 0).coeff(i, 0);
                *pre.entry(ods.p - i).or_insert_with(Rational::zero) += c;
            }
            out.push(ExponentialPart::from_polar(s, &pre, 1));
            return Ok(());
        }
        let factors = ods.leading().charpoly().coprime_factors();
        if factors.len() >= 2 {
            self.trace[id].action = "split";
            let (_, blocks) = split_leading(ods)?;
            for b in &blocks {
                self.run(b, prefix, s, Some(id), out)?;
            }
            return Ok(());
        }
        let f = &factors[0];
        let Some(gamma) = f.root.clone() else {
            return Err(Error::AlgebraicExtensionRequired {
                factor: f.base.to_string(),
            });
        };
        if !gamma.is_zero() {
            self.trace[id].action = "shift";
            let (rec, shifted) = eigenvalue_shift(ods, &gamma)?;
            let mut pre = prefix.clone();
            *pre.entry(rec.pole).or_insert_with(Rational::zero) += &rec.gamma;
            return self.run(&shifted, &pre, s, Some(id), out);
        }
        let (_, red) = moser_reduce_ods(ods)?;
        let before = (self.trace[id].p, self.trace[id].rank);
        let r_after = column_reduce(&red.mat.freeze_zero(Axis::X))?.rank;
        if (red.p, r_after) < before {
            self.trace[id].action = "moser reduction";
            return self.run(&red, prefix, s, Some(id), out);
        }
        self.trace[id].action = "ramification";
        let kappa = newton_katz(&red)?.value;
        let m: u32 = u32::try_from(kappa.denom()).map_err(|_| {
            Error::InvariantViolation("ramification index overflow".into())
        })?;
        if m == 1 {
            return Err(Error::InvariantViolation(format!(
                "nilpotent Moser-irreducible system with integral Katz invariant {}",
                format_rational(&kappa)
            )));
        }
        let (_, ram) = moser_reduce_ods(&ramify_ods(&red, m)?)?;
        let pre = scaled_prefix(prefix, m);
        let factors = ram.leading().charpoly().coprime_factors();
        if factors.len() < 2 {
            return match factors.iter().find(|f| f.root.is_none()) {
                Some(f) => Err(Error::AlgebraicExtensionRequired {
                    factor: f.base.to_string(),
                }),
                None => Err(Error::InvariantViolation(
                    "ramified system has a single leading eigenvalue".into(),
                )),
            };
        }
        let (_, blocks) = split_leading(&ram)?;
        for b in &blocks {
            self.run(b, &pre, s * m, Some(id), out)?;
        }
        Ok(())
    }
}

/// `Y = phi * Z` with `t dZ/dt = (lambda + sum_k t^k retained[k]) Z`.
/// Without resonances `retained` is empty and `Z = t^lambda`.
#[derive(Clone, Debug)]
pub struct FirstKind {
    pub phi: SeriesMatrix,
    pub lambda: QMatrix,
    pub retained: Vec<(u32, QMatrix)>,
}

impl FirstKind {
    pub fn is_resonant(&self) -> bool {
        !self.retained.is_empty()
    }

    /// The normal-form coefficient `lambda + sum t^k retained[k]`.
    pub fn normal_form(&self) -> SeriesMatrix {
        let n = self.lambda.rows();
        let mut terms = vec![((0, 0), self.lambda.clone())];
        terms.extend(self.retained.iter().map(|(k, m)| ((*k, 0), m.clone())));
        SeriesMatrix::from_coeff_matrices(n, n, &terms, EXACT, EXACT)
    }

    /// `A phi - t phi' - phi N` for the normal form `N`.
    pub fn residual(&self, ods: &OdsSystem) -> SeriesMatrix {
        let lhs = ods.mat.mul(&self.phi).sub(&self.phi.delta(Axis::X));
        lhs.sub(&self.phi.mul(&self.normal_form()))
    }
}

/// Indices of standard basis vectors spanning a complement of the column
/// space of `op`.
pub(crate) fn image_complement(op: &QMatrix) -> Vec<usize> {
    let n = op.rows();
    let mut cols: Vec<Vec<Rational>> = (0..op.cols()).map(|j| op.column(j)).collect();
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        cols.push(e);
    }
    let (_, pivots) = QMatrix::from_columns(&cols).rref();
    pivots
        .into_iter()
        .filter(|&c| c >= op.cols())
        .map(|c| c - op.cols())
        .collect()
}

/// Fundamental solution of a system with a singularity of the first kind.
pub fn first_kind_fundamental_ods(ods: &OdsSystem) -> Result<FirstKind> {
    if ods.p != 0 {
        return Err(Error::PreconditionViolated(format!(
            "first kind requires p = 0, got {}",
            ods.p
        )));
    }
    let n = ods.n();
    let tr = ods.trunc();
    if tr == EXACT {
        return Err(Error::PreconditionViolated(
            "an exact coefficient needs an explicit truncation".into(),
        ));
    }
    let a0 = ods.leading();
    let a: Vec<QMatrix> = (0..tr).map(|k| ods.coeff(k)).collect();
    let mut phi = vec![QMatrix::identity(n)];
    let mut lam: Vec<QMatrix> = vec![a0.clone()];
    let mut retained = Vec::new();
    for k in 1..tr as usize {
        let mut rhs = QMatrix::zeros(n, n);
        for i in 1..=k {
            rhs = rhs.sub(&a[i].mul(&phi[k - i]));
        }
        for i in 1..k {
            rhs = rhs.add(&phi[k - i].mul(&lam[i]));
        }
        let shifted = a0.sub(&QMatrix::scalar(n, &rat(k as i64)));
        let op = crate::linalg::sylvester_operator(&shifted, &a0);
        let comp = image_complement(&op);
        let mut cols: Vec<Vec<Rational>> = (0..op.cols()).map(|j| op.column(j)).collect();
        for &c in &comp {
            let mut e = vec![Rational::zero(); n * n];
            e[c] = -Rational::one();
            cols.push(e);
        }
        let sol = QMatrix::from_columns(&cols)
            .solve(&crate::linalg::vectorize(&rhs))
            .ok_or_else(|| Error::InvariantViolation("first-kind recursion has no solution".into()))?;
        let phik = crate::linalg::unvectorize(&sol[..n * n], n, n);
        let mut lk = vec![Rational::zero(); n * n];
        for (s, &c) in comp.iter().enumerate() {
            lk[c] = sol[n * n + s].clone();
        }
        let lk = crate::linalg::unvectorize(&lk, n, n);
        if !lk.is_zero() {
            retained.push((k as u32, lk.clone()));
        }
        phi.push(phik);
        lam.push(lk);
    }
    Ok(FirstKind {
        phi: series_from_coeffs(&phi, Axis::X, tr, EXACT),
        lambda: a0,
        retained,
    })
}
