use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::{t_add, t_mul, t_sub, UniSeries, EXACT};
use crate::error::{Axis, Error, Result};
use crate::rational::{format_rational, rat, Rational};

/// Truncated series in `x, y` with sparse exact coefficients.
///
/// Stored exponents satisfy `i < trunc_x` and `j < trunc_y`; no stored
/// coefficient is zero.
#[derive(Clone, Debug)]
pub struct BiSeries {
    coeffs: BTreeMap<(u32, u32), Rational>,
    tx: u32,
    ty: u32,
}

impl BiSeries {
    pub fn zero(tx: u32, ty: u32) -> Self {
        BiSeries {
            coeffs: BTreeMap::new(),
            tx,
            ty,
        }
    }

    pub fn one(tx: u32, ty: u32) -> Self {
        Self::constant(Rational::one(), tx, ty)
    }

    pub fn constant(c: Rational, tx: u32, ty: u32) -> Self {
        Self::monomial(c, 0, 0, tx, ty)
    }

    pub fn monomial(c: Rational, i: u32, j: u32, tx: u32, ty: u32) -> Self {
        let mut s = Self::zero(tx, ty);
        s.set(i, j, c);
        s
    }

    /// Exact monomial `c x^i y^j`.
    pub fn exact_monomial(c: Rational, i: u32, j: u32) -> Self {
        Self::monomial(c, i, j, EXACT, EXACT)
    }

    pub fn from_terms<I>(terms: I, tx: u32, ty: u32) -> Self
    where
        I: IntoIterator<Item = ((u32, u32), Rational)>,
    {
        let mut s = Self::zero(tx, ty);
        for ((i, j), c) in terms {
            let cur = s.coeff(i, j);
            s.set(i, j, cur + c);
        }
        s
    }

    /// Convenience for tests and fixtures: integer coefficients.
    pub fn from_ints(terms: &[((u32, u32), i64)], tx: u32, ty: u32) -> Self {
        Self::from_terms(terms.iter().map(|&(e, c)| (e, rat(c))), tx, ty)
    }

    pub fn trunc_x(&self) -> u32 {
        self.tx
    }

    pub fn trunc_y(&self) -> u32 {
        self.ty
    }

    pub fn trunc(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.tx,
            Axis::Y => self.ty,
        }
    }

    pub fn coeff(&self, i: u32, j: u32) -> Rational {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, i: u32, j: u32, c: Rational) {
        if i >= self.tx || j >= self.ty {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&(i, j));
        } else {
            self.coeffs.insert((i, j), c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Rational)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Zero within the truncation window.
    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(0, 0)
    }

    /// True when the only stored term is the constant one.
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|&(i, j)| i == 0 && j == 0)
    }

    /// Lowest stored exponent in `axis`, or the truncation order if zero.
    pub fn valuation(&self, axis: Axis) -> u32 {
        let v = match axis {
            Axis::X => self.coeffs.keys().map(|k| k.0).min(),
            Axis::Y => self.coeffs.keys().map(|k| k.1).min(),
        };
        v.unwrap_or(self.trunc(axis))
    }

    pub fn max_exponent(&self, axis: Axis) -> Option<u32> {
        match axis {
            Axis::X => self.coeffs.keys().map(|k| k.0).max(),
            Axis::Y => self.coeffs.keys().map(|k| k.1).max(),
        }
    }

    /// Restricts to a smaller window.
    pub fn truncate(&self, tx: u32, ty: u32) -> Self {
        let tx = tx.min(self.tx);
        let ty = ty.min(self.ty);
        BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(k, _)| k.0 < tx && k.1 < ty)
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
            tx,
            ty,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let tx = self.tx.min(other.tx);
        let ty = self.ty.min(other.ty);
        let mut out = self.truncate(tx, ty);
        for (&(i, j), c) in &other.coeffs {
            if i < tx && j < ty {
                let cur = out.coeff(i, j);
                out.set(i, j, cur + c);
            }
        }
        out
    }

    pub fn neg(&self) -> Self {
        BiSeries {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, -v)).collect(),
            tx: self.tx,
            ty: self.ty,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.tx, self.ty);
        }
        BiSeries {
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v * c)).collect(),
            tx: self.tx,
            ty: self.ty,
        }
    }

    /// Cauchy product. The result window is limited by each factor's window
    /// shifted by the other factor's valuation.
    pub fn mul(&self, other: &Self) -> Self {
        let tx = t_add(self.tx, other.valuation(Axis::X))
            .min(t_add(other.tx, self.valuation(Axis::X)));
        let ty = t_add(self.ty, other.valuation(Axis::Y))
            .min(t_add(other.ty, self.valuation(Axis::Y)));
        let mut acc: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for (&(i1, j1), a) in &self.coeffs {
            for (&(i2, j2), b) in &other.coeffs {
                let (i, j) = (i1 + i2, j1 + j2);
                if i < tx && j < ty {
                    *acc.entry((i, j)).or_insert_with(Rational::zero) += a * b;
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        BiSeries { coeffs: acc, tx, ty }
    }

    /// Multiplies by the exact monomial `x^dx y^dy`.
    pub fn shift_up(&self, dx: u32, dy: u32) -> Self {
        BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| ((i + dx, j + dy), v.clone()))
                .collect(),
            tx: t_add(self.tx, dx),
            ty: t_add(self.ty, dy),
        }
    }

    /// Divides by `x^dx y^dy`. Every stored term must be divisible.
    pub fn shift_down(&self, dx: u32, dy: u32) -> Result<Self> {
        if self.coeffs.keys().any(|&(i, j)| i < dx || j < dy) {
            return Err(Error::PreconditionViolated(format!(
                "series not divisible by x^{dx} y^{dy}"
            )));
        }
        Ok(BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| ((i - dx, j - dy), v.clone()))
                .collect(),
            tx: t_sub(self.tx, dx),
            ty: t_sub(self.ty, dy),
        })
    }

    /// Inverse of a unit series, to the same window.
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::ZeroConstantTerm);
        }
        let inv0 = c0.recip();
        let span = |t: u32, axis: Axis| -> Result<u32> {
            if t != EXACT {
                return Ok(t);
            }
            match self.max_exponent(axis) {
                Some(0) | None => Ok(1),
                Some(_) => Err(Error::TruncationExhausted {
                    context: format!("inverting a non-constant series exact in {axis}"),
                    window: super::Window::EXACT,
                }),
            }
        };
        let nx = span(self.tx, Axis::X)?;
        let ny = span(self.ty, Axis::Y)?;
        let mut out = BiSeries::zero(self.tx, self.ty);
        // Coefficients of the inverse in graded order; b_ij depends on b_kl
        // with (k,l) < (i,j) componentwise.
        let mut dense: BTreeMap<(u32, u32), Rational> = BTreeMap::new();
        for d in 0..(nx as u64 + ny as u64) {
            for i in 0..nx {
                let j64 = d as i64 - i as i64;
                if j64 < 0 || j64 >= ny as i64 {
                    continue;
                }
                let j = j64 as u32;
                let v = if i == 0 && j == 0 {
                    inv0.clone()
                } else {
                    let mut s = Rational::zero();
                    for (&(k, l), a) in &self.coeffs {
                        if (k, l) == (0, 0) || k > i || l > j {
                            continue;
                        }
                        if let Some(b) = dense.get(&(i - k, j - l)) {
                            s += a * b;
                        }
                    }
                    -s * &inv0
                };
                if !v.is_zero() {
                    dense.insert((i, j), v);
                }
            }
        }
        for ((i, j), v) in dense {
            out.set(i, j, v);
        }
        Ok(out)
    }

    /// Euler operator `x d/dx` (or `y d/dy`).
    pub fn delta(&self, axis: Axis) -> Self {
        BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .filter_map(|(&(i, j), v)| {
                    let e = match axis {
                        Axis::X => i,
                        Axis::Y => j,
                    };
                    (e != 0).then(|| ((i, j), v * rat(e as i64)))
                })
                .collect(),
            tx: self.tx,
            ty: self.ty,
        }
    }

    /// Sets `axis` to zero, giving a series in the other variable.
    pub fn eval_zero(&self, axis: Axis) -> UniSeries {
        match axis {
            Axis::Y => UniSeries::from_terms(
                self.coeffs
                    .iter()
                    .filter(|(k, _)| k.1 == 0)
                    .map(|(k, v)| (k.0, v.clone())),
                self.tx,
            ),
            Axis::X => UniSeries::from_terms(
                self.coeffs
                    .iter()
                    .filter(|(k, _)| k.0 == 0)
                    .map(|(k, v)| (k.1, v.clone())),
                self.ty,
            ),
        }
    }

    /// Keeps the part with exponent 0 in `axis`, as a bivariate series that
    /// is exact in that variable.
    pub fn freeze_zero(&self, axis: Axis) -> Self {
        match axis {
            Axis::X => {
                let mut out = BiSeries::zero(EXACT, self.ty);
                if self.tx > 0 {
                    for (&(i, j), v) in &self.coeffs {
                        if i == 0 {
                            out.set(0, j, v.clone());
                        }
                    }
                    out
                } else {
                    BiSeries::zero(0, self.ty)
                }
            }
            Axis::Y => self.swap_vars().freeze_zero(Axis::X).swap_vars(),
        }
    }

    /// Coefficient of `x^k` as a series in `y` (exact in `x`), or the
    /// analogous slice in `y`.
    pub fn slice(&self, axis: Axis, k: u32) -> Self {
        match axis {
            Axis::X => {
                let mut out = BiSeries::zero(EXACT, self.ty);
                for (&(i, j), v) in &self.coeffs {
                    if i == k {
                        out.set(0, j, v.clone());
                    }
                }
                out
            }
            Axis::Y => self.swap_vars().slice(Axis::X, k).swap_vars(),
        }
    }

    pub fn swap_vars(&self) -> Self {
        BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| ((j, i), v.clone()))
                .collect(),
            tx: self.ty,
            ty: self.tx,
        }
    }

    /// Substitutes `axis = t^s`.
    pub fn ramify(&self, axis: Axis, s: u32) -> Self {
        assert!(s >= 1, "ramification index must be positive");
        let (tx, ty) = match axis {
            Axis::X => (t_mul(self.tx, s), self.ty),
            Axis::Y => (self.tx, t_mul(self.ty, s)),
        };
        BiSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|(&(i, j), v)| {
                    let k = match axis {
                        Axis::X => (i * s, j),
                        Axis::Y => (i, j * s),
                    };
                    (k, v.clone())
                })
                .collect(),
            tx,
            ty,
        }
    }

    /// Coefficientwise equality on the common window.
    pub fn eq_within(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl PartialEq for BiSeries {
    fn eq(&self, other: &Self) -> bool {
        self.eq_within(other)
    }
}

impl fmt::Display for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (&(i, j), c) in &self.coeffs {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let mono = match (i, j) {
                (0, 0) => String::new(),
                (i, 0) => format!("x^{i}"),
                (0, j) => format!("y^{j}"),
                (i, j) => format!("x^{i}*y^{j}"),
            };
            if mono.is_empty() {
                write!(f, "{}", format_rational(c))?;
            } else if c.is_one() {
                f.write_str(&mono)?;
            } else {
                write!(f, "({})*{mono}", format_rational(c))?;
            }
        }
        Ok(())
    }
}
