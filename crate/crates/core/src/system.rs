//! Pfaffian systems `x dY/dx = A Y`, `y dY/dy = B Y` and gauge transformations.

use serde::Serialize;

use crate::echelon::series_rank;
use crate::error::{Axis, Error, Result};
use crate::linalg::QMatrix;
use crate::series::{LaurentMatrix, SeriesMatrix, Window, EXACT};

/// One subsystem: coefficient `t^-pole s^-cross_pole * mat`, where `t` is
/// the subsystem's own variable and `s` the other one. Normal crossings
/// means `cross_pole == 0`.
#[derive(Clone, Debug)]
pub struct Subsystem {
    pub pole: u32,
    pub cross_pole: u32,
    pub mat: SeriesMatrix,
}

impl Subsystem {
    fn shift(&self, own: Axis) -> (i64, i64) {
        let (a, b) = (-(self.pole as i64), -(self.cross_pole as i64));
        match own {
            Axis::X => (a, b),
            Axis::Y => (b, a),
        }
    }

    pub fn coefficient(&self, own: Axis) -> LaurentMatrix {
        LaurentMatrix::new(self.shift(own), self.mat.clone())
    }

    /// Normal form of a Laurent coefficient: the pole orders are the
    /// negated leading exponents, clamped at zero.
    pub fn from_laurent(l: &LaurentMatrix, own: Axis, context: &str) -> Result<Subsystem> {
        let l = l.normalize();
        let n = l.rows();
        if l.is_zero() {
            let w = l.window();
            let blind = |v: Option<i64>| v.is_some_and(|t| t <= 0);
            if blind(w.x) || blind(w.y) {
                return Err(Error::TruncationExhausted {
                    context: format!("{context}: coefficient vanishes inside the window"),
                    window: w,
                });
            }
            let tx = w.x.map_or(EXACT, |t| t as u32);
            let ty = w.y.map_or(EXACT, |t| t as u32);
            return Ok(Subsystem {
                pole: 0,
                cross_pole: 0,
                mat: SeriesMatrix::zeros(n, n, tx, ty),
            });
        }
        let (sx, sy) = l.shift();
        let (own_s, other_s) = match own {
            Axis::X => (sx, sy),
            Axis::Y => (sy, sx),
        };
        let up = |s: i64| if s > 0 { s as u32 } else { 0 };
        let (dx, dy) = match own {
            Axis::X => (up(own_s), up(other_s)),
            Axis::Y => (up(other_s), up(own_s)),
        };
        let mat = l.series().shift_up(dx, dy);
        Ok(Subsystem {
            pole: (-own_s).max(0) as u32,
            cross_pole: (-other_s).max(0) as u32,
            mat,
        })
    }
}

/// A pair of commuting subsystems in `x` and `y`.
#[derive(Clone, Debug)]
pub struct PfaffianSystem {
    a: Subsystem,
    b: Subsystem,
}

impl PfaffianSystem {
    /// The system `x^-p amat`, `y^-q bmat`.
    pub fn new(p: u32, amat: SeriesMatrix, q: u32, bmat: SeriesMatrix) -> Result<Self> {
        if !amat.is_square() || !bmat.is_square() || amat.rows() != bmat.rows() {
            return Err(Error::DimensionMismatch(format!(
                "A is {}x{}, B is {}x{}",
                amat.rows(),
                amat.cols(),
                bmat.rows(),
                bmat.cols()
            )));
        }
        if p > 0 && amat.freeze_zero(Axis::X).is_zero() {
            return Err(Error::InvariantViolation(format!(
                "A(0, y) vanishes with p = {p}"
            )));
        }
        if q > 0 && bmat.freeze_zero(Axis::Y).is_zero() {
            return Err(Error::InvariantViolation(format!(
                "B(x, 0) vanishes with q = {q}"
            )));
        }
        Ok(PfaffianSystem {
            a: Subsystem {
                pole: p,
                cross_pole: 0,
                mat: amat,
            },
            b: Subsystem {
                pole: q,
                cross_pole: 0,
                mat: bmat,
            },
        })
    }

    pub fn from_subsystems(a: Subsystem, b: Subsystem) -> Self {
        PfaffianSystem { a, b }
    }

    pub fn from_laurent(a: &LaurentMatrix, b: &LaurentMatrix, context: &str) -> Result<Self> {
        Ok(PfaffianSystem {
            a: Subsystem::from_laurent(a, Axis::X, context)?,
            b: Subsystem::from_laurent(b, Axis::Y, context)?,
        })
    }

    pub fn n(&self) -> usize {
        self.a.mat.rows()
    }

    pub fn p(&self) -> u32 {
        self.a.pole
    }

    pub fn q(&self) -> u32 {
        self.b.pole
    }

    pub fn amat(&self) -> &SeriesMatrix {
        &self.a.mat
    }

    pub fn bmat(&self) -> &SeriesMatrix {
        &self.b.mat
    }

    pub fn subsystem(&self, axis: Axis) -> &Subsystem {
        match axis {
            Axis::X => &self.a,
            Axis::Y => &self.b,
        }
    }

    pub fn pole(&self, axis: Axis) -> u32 {
        self.subsystem(axis).pole
    }

    /// Full Laurent coefficient of the subsystem in `axis`.
    pub fn coefficient(&self, axis: Axis) -> LaurentMatrix {
        self.subsystem(axis).coefficient(axis)
    }

    pub fn is_normal_crossing(&self) -> bool {
        self.a.cross_pole == 0 && self.b.cross_pole == 0
    }

    /// Exchanges the roles of `x` and `y`.
    pub fn swap(&self) -> Self {
        let sw = |s: &Subsystem| Subsystem {
            pole: s.pole,
            cross_pole: s.cross_pole,
            mat: s.mat.swap_vars(),
        };
        PfaffianSystem {
            a: sw(&self.b),
            b: sw(&self.a),
        }
    }

    pub fn window(&self) -> Window {
        self.coefficient(Axis::X).window().meet(self.coefficient(Axis::Y).window())
    }

    pub fn truncate(&self, tx: u32, ty: u32) -> Self {
        let t = |s: &Subsystem| Subsystem {
            pole: s.pole,
            cross_pole: s.cross_pole,
            mat: s.mat.truncate(tx, ty),
        };
        PfaffianSystem {
            a: t(&self.a),
            b: t(&self.b),
        }
    }

    /// Equality of both Laurent coefficients on the common window.
    pub fn eq_within(&self, o: &Self) -> bool {
        self.n() == o.n()
            && self.coefficient(Axis::X).eq_within(&o.coefficient(Axis::X))
            && self.coefficient(Axis::Y).eq_within(&o.coefficient(Axis::Y))
    }
}

/// `A0 = Amat(0, y)`, `B0 = Bmat(x, 0)` and their constant terms.
#[derive(Clone, Debug)]
pub struct LeadingData {
    pub a0: SeriesMatrix,
    pub b0: SeriesMatrix,
    pub a00: QMatrix,
    pub b00: QMatrix,
    pub rank_a0: usize,
    pub rank_b0: usize,
}

pub fn leading_data(sys: &PfaffianSystem) -> Result<LeadingData> {
    let a0 = sys.amat().freeze_zero(Axis::X);
    let b0 = sys.bmat().freeze_zero(Axis::Y);
    Ok(LeadingData {
        a00: a0.constant_matrix(),
        b00: b0.constant_matrix(),
        rank_a0: series_rank(&a0, Axis::X)?,
        rank_b0: series_rank(&b0, Axis::Y)?,
        a0,
        b0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeKind {
    Constant,
    Unimodular,
    Shearing,
    Splitting,
    Regular,
    External,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GaugeStep {
    pub kind: GaugeKind,
    pub axis: Option<Axis>,
    pub detail: String,
}

/// A change of basis `Y = T Z` with its construction history.
#[derive(Clone, Debug)]
pub struct GaugeTransform {
    pub mat: SeriesMatrix,
    pub provenance: Vec<GaugeStep>,
}

impl GaugeTransform {
    pub fn identity(n: usize) -> Self {
        GaugeTransform {
            mat: SeriesMatrix::eye(n),
            provenance: vec![],
        }
    }

    pub fn new(mat: SeriesMatrix, kind: GaugeKind, axis: Option<Axis>, detail: impl Into<String>) -> Self {
        GaugeTransform {
            mat,
            provenance: vec![GaugeStep {
                kind,
                axis,
                detail: detail.into(),
            }],
        }
    }

    pub fn external(mat: SeriesMatrix) -> Self {
        Self::new(mat, GaugeKind::External, None, "supplied")
    }

    pub fn constant(m: &QMatrix) -> Self {
        Self::new(
            SeriesMatrix::from_qmatrix(m, EXACT, EXACT),
            GaugeKind::Constant,
            None,
            "constant change of basis",
        )
    }

    pub fn is_identity(&self) -> bool {
        self.provenance.is_empty() || self.mat.eq_within(&SeriesMatrix::eye(self.mat.rows()))
    }

    /// `self` followed by `next`, i.e. the matrix product `self * next`.
    pub fn then(&self, next: &GaugeTransform) -> GaugeTransform {
        let mut provenance = self.provenance.clone();
        provenance.extend(next.provenance.iter().cloned());
        GaugeTransform {
            mat: self.mat.mul(&next.mat),
            provenance,
        }
    }

    /// Inverse, when it is again a power-series matrix.
    pub fn inverse(&self) -> Result<GaugeTransform> {
        let inv = self.mat.inverse()?.to_series().map_err(|_| {
            Error::SingularMatrix("inverse gauge has poles".into())
        })?;
        Ok(GaugeTransform {
            mat: inv,
            provenance: self.provenance.iter().rev().cloned().collect(),
        })
    }

    /// Swaps the variables, for use on a swapped system.
    pub fn swap_vars(&self) -> GaugeTransform {
        GaugeTransform {
            mat: self.mat.swap_vars(),
            provenance: self
                .provenance
                .iter()
                .map(|s| GaugeStep {
                    axis: s.axis.map(Axis::other),
                    ..s.clone()
                })
                .collect(),
        }
    }
}

/// `T[A] = T^-1 (A T - delta T)` on both subsystems, with pole orders
/// re-read from the result.
pub fn apply_gauge(sys: &PfaffianSystem, t: &GaugeTransform) -> Result<PfaffianSystem> {
    if t.mat.rows() != sys.n() || !t.mat.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "gauge is {}x{}, system has n = {}",
            t.mat.rows(),
            t.mat.cols(),
            sys.n()
        )));
    }
    let tl = LaurentMatrix::from_series(t.mat.clone());
    let tinv = t.mat.inverse()?;
    let new = |axis: Axis| {
        let c = sys.coefficient(axis);
        tinv.mul(&c.mul(&tl).sub(&tl.delta(axis)))
    };
    PfaffianSystem::from_laurent(&new(Axis::X), &new(Axis::Y), "gauge transformation")
}

#[derive(Clone, Debug, Serialize)]
pub struct IntegrabilityVerdict {
    pub integrable: bool,
    pub window: Window,
}

/// Evaluates `x dB/dx + B A - y dA/dy - A B`.
pub fn check_integrability(sys: &PfaffianSystem) -> IntegrabilityVerdict {
    let a = sys.coefficient(Axis::X);
    let b = sys.coefficient(Axis::Y);
    let r = b
        .delta(Axis::X)
        .add(&b.mul(&a))
        .sub(&a.delta(Axis::Y))
        .sub(&a.mul(&b));
    IntegrabilityVerdict {
        integrable: r.is_zero(),
        window: r.window(),
    }
}

#[derive(Clone, Debug)]
pub struct CompatibilityVerdict {
    pub compatible: bool,
    pub transformed: PfaffianSystem,
}

/// A gauge is compatible when the result still has normal crossings and
/// neither pole order grew.
pub fn check_compatible(sys: &PfaffianSystem, t: &GaugeTransform) -> Result<CompatibilityVerdict> {
    let transformed = apply_gauge(sys, t)?;
    let compatible = transformed.is_normal_crossing()
        && transformed.p() <= sys.p()
        && transformed.q() <= sys.q();
    Ok(CompatibilityVerdict {
        compatible,
        transformed,
    })
}
