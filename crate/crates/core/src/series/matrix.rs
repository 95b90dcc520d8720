use std::fmt;
use std::ops::Range;

use num_traits::{One, Zero};

use super::{ring, BiSeries, LaurentMatrix, EXACT};
use crate::error::{Axis, Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{rat, Rational};

/// Dense matrix of bivariate series. Each entry keeps its own window; the
/// matrix window is the entrywise minimum.
#[derive(Clone, Debug)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BiSeries>,
}

impl SeriesMatrix {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BiSeries) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        SeriesMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<BiSeries>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        SeriesMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn zeros(rows: usize, cols: usize, tx: u32, ty: u32) -> Self {
        Self::from_fn(rows, cols, |_, _| BiSeries::zero(tx, ty))
    }

    pub fn identity(n: usize, tx: u32, ty: u32) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                BiSeries::one(tx, ty)
            } else {
                BiSeries::zero(tx, ty)
            }
        })
    }

    /// Exact identity.
    pub fn eye(n: usize) -> Self {
        Self::identity(n, EXACT, EXACT)
    }

    pub fn from_qmatrix(m: &QMatrix, tx: u32, ty: u32) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| BiSeries::constant(m.get(i, j).clone(), tx, ty))
    }

    /// `sum_k m_k x^i_k y^j_k` for constant matrices `m_k`.
    pub fn from_coeff_matrices(
        rows: usize,
        cols: usize,
        terms: &[((u32, u32), QMatrix)],
        tx: u32,
        ty: u32,
    ) -> Self {
        let mut out = Self::zeros(rows, cols, tx, ty);
        for ((ei, ej), m) in terms {
            for i in 0..rows {
                for j in 0..cols {
                    let c = out.get(i, j).coeff(*ei, *ej) + m.get(i, j);
                    out.get_mut(i, j).set(*ei, *ej, c);
                }
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BiSeries {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut BiSeries {
        &mut self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BiSeries) {
        self.data[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[BiSeries] {
        &self.data
    }

    pub fn trunc_x(&self) -> u32 {
        self.data.iter().map(BiSeries::trunc_x).min().unwrap_or(EXACT)
    }

    pub fn trunc_y(&self) -> u32 {
        self.data.iter().map(BiSeries::trunc_y).min().unwrap_or(EXACT)
    }

    pub fn trunc(&self, axis: Axis) -> u32 {
        match axis {
            Axis::X => self.trunc_x(),
            Axis::Y => self.trunc_y(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BiSeries::is_zero)
    }

    /// Minimal exponent in `axis` over nonzero entries.
    pub fn valuation(&self, axis: Axis) -> Option<u32> {
        self.data
            .iter()
            .filter(|e| !e.is_zero())
            .map(|e| e.valuation(axis))
            .min()
    }

    fn map(&self, f: impl Fn(&BiSeries) -> BiSeries) -> Self {
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(&BiSeries, &BiSeries) -> BiSeries) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch");
        SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, BiSeries::add)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, BiSeries::sub)
    }

    pub fn neg(&self) -> Self {
        self.map(BiSeries::neg)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|e| e.scale(c))
    }

    pub fn scale_series(&self, s: &BiSeries) -> Self {
        self.map(|e| e.mul(s))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "inner dimensions");
        Self::from_fn(self.rows, o.cols, |i, j| {
            let mut acc: Option<BiSeries> = None;
            for k in 0..self.cols {
                let t = self.get(i, k).mul(o.get(k, j));
                acc = Some(match acc {
                    Some(a) => a.add(&t),
                    None => t,
                });
            }
            acc.unwrap_or_else(|| BiSeries::zero(EXACT, EXACT))
        })
    }

    pub fn checked_mul(&self, o: &Self) -> Result<Self> {
        if self.cols != o.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, o.rows, o.cols
            )));
        }
        Ok(self.mul(o))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    fn entry_rows(&self) -> Vec<Vec<BiSeries>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn det(&self) -> BiSeries {
        assert!(self.is_square());
        if self.rows == 0 {
            return BiSeries::one(EXACT, EXACT);
        }
        ring::det(&self.entry_rows())
    }

    /// Coefficients of `det(lambda I - self)`, low to high.
    pub fn charpoly(&self) -> Vec<BiSeries> {
        assert!(self.is_square());
        if self.rows == 0 {
            return vec![BiSeries::one(EXACT, EXACT)];
        }
        ring::charpoly(&self.entry_rows())
    }

    pub fn minor(&self, skip_row: usize, skip_col: usize) -> Self {
        let rows: Vec<usize> = (0..self.rows).filter(|&i| i != skip_row).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&j| j != skip_col).collect();
        self.select(&rows, &cols)
    }

    pub fn adjugate(&self) -> Self {
        assert!(self.is_square());
        let n = self.rows;
        if n == 1 {
            return Self::eye(1);
        }
        Self::from_fn(n, n, |i, j| {
            let d = self.minor(j, i).det();
            if (i + j) % 2 == 0 {
                d
            } else {
                d.neg()
            }
        })
    }

    /// Inverse as `x^-vx y^-vy adj(M) u^-1` where `det M = x^vx y^vy u` with
    /// `u(0,0) != 0`.
    pub fn inverse(&self) -> Result<LaurentMatrix> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "cannot invert a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let d = self.det();
        if d.is_zero() {
            return Err(Error::SingularMatrix(
                "determinant vanishes within the truncation window".into(),
            ));
        }
        let vx = d.valuation(Axis::X);
        let vy = d.valuation(Axis::Y);
        let u = d.shift_down(vx, vy).map_err(|_| {
            Error::SingularMatrix("determinant is not a monomial times a unit".into())
        })?;
        if u.constant_term().is_zero() {
            return Err(Error::SingularMatrix(
                "determinant is not a monomial times a unit".into(),
            ));
        }
        let uinv = u.invert_unit()?;
        let m = self.adjugate().scale_series(&uinv);
        Ok(LaurentMatrix::new((-(vx as i64), -(vy as i64)), m))
    }

    pub fn delta(&self, axis: Axis) -> Self {
        self.map(|e| e.delta(axis))
    }

    /// Coefficient matrix of `x^i y^j`.
    pub fn coeff_matrix(&self, i: u32, j: u32) -> QMatrix {
        let mut m = QMatrix::zeros(self.rows, self.cols);
        for a in 0..self.rows {
            for b in 0..self.cols {
                m.set(a, b, self.get(a, b).coeff(i, j));
            }
        }
        m
    }

    pub fn constant_matrix(&self) -> QMatrix {
        self.coeff_matrix(0, 0)
    }

    pub fn slice(&self, axis: Axis, k: u32) -> Self {
        self.map(|e| e.slice(axis, k))
    }

    pub fn freeze_zero(&self, axis: Axis) -> Self {
        self.map(|e| e.freeze_zero(axis))
    }

    pub fn swap_vars(&self) -> Self {
        self.map(BiSeries::swap_vars)
    }

    pub fn ramify(&self, axis: Axis, s: u32) -> Self {
        self.map(|e| e.ramify(axis, s))
    }

    pub fn shift_up(&self, dx: u32, dy: u32) -> Self {
        self.map(|e| e.shift_up(dx, dy))
    }

    pub fn shift_down(&self, dx: u32, dy: u32) -> Result<Self> {
        let data = self
            .data
            .iter()
            .map(|e| e.shift_down(dx, dy))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn truncate(&self, tx: u32, ty: u32) -> Self {
        self.map(|e| e.truncate(tx, ty))
    }

    /// Truncates every entry to the common matrix window.
    pub fn equalize(&self) -> Self {
        self.truncate(self.trunc_x(), self.trunc_y())
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |a, b| self.get(rows[a], cols[b]).clone())
    }

    pub fn block(&self, rows: Range<usize>, cols: Range<usize>) -> Self {
        let r: Vec<usize> = rows.collect();
        let c: Vec<usize> = cols.collect();
        self.select(&r, &c)
    }

    pub fn block_diag(blocks: &[SeriesMatrix]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m, EXACT, EXACT);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Writes `b` into the block starting at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &SeriesMatrix) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    /// Entries off the diagonal blocks of the given sizes are all zero.
    pub fn is_block_diagonal(&self, sizes: &[usize]) -> bool {
        let mut owner = Vec::new();
        for (b, &s) in sizes.iter().enumerate() {
            owner.extend(std::iter::repeat_n(b, s));
        }
        assert_eq!(owner.len(), self.rows);
        (0..self.rows).all(|i| (0..self.cols).all(|j| owner[i] == owner[j] || self.get(i, j).is_zero()))
    }

    pub fn eq_within(&self, o: &Self) -> bool {
        self.rows == o.rows && self.cols == o.cols && self.sub(o).is_zero()
    }

    /// Diagonal matrix of exact monomials `x^e_i` (or `y^e_i`).
    pub fn monomial_diag(axis: Axis, exps: &[u32]) -> Self {
        let n = exps.len();
        Self::from_fn(n, n, |i, j| {
            if i != j {
                return BiSeries::zero(EXACT, EXACT);
            }
            match axis {
                Axis::X => BiSeries::exact_monomial(Rational::one(), exps[i], 0),
                Axis::Y => BiSeries::exact_monomial(Rational::one(), 0, exps[i]),
            }
        })
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> BiSeries {
        (0..self.rows.min(self.cols))
            .fold(BiSeries::zero(EXACT, EXACT), |acc, i| acc.add(self.get(i, i)))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn num_terms(&self) -> usize {
        self.data.iter().map(BiSeries::num_terms).sum()
    }

    pub fn scalar(n: usize, c: i64) -> Self {
        Self::eye(n).scale(&rat(c))
    }
}

impl PartialEq for SeriesMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.eq_within(other)
    }
}

impl fmt::Display for SeriesMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl SeriesMatrix {
    pub fn hstack(parts: &[&SeriesMatrix]) -> Self {
        let rows = parts.first().map_or(0, |p| p.rows);
        assert!(parts.iter().all(|p| p.rows == rows), "row counts differ");
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(rows, cols, EXACT, EXACT);
        let mut c0 = 0;
        for p in parts {
            out.set_block(0, c0, p);
            c0 += p.cols;
        }
        out
    }

    pub fn vstack(parts: &[&SeriesMatrix]) -> Self {
        let t: Vec<SeriesMatrix> = parts.iter().map(|p| p.transpose()).collect();
        let refs: Vec<&SeriesMatrix> = t.iter().collect();
        Self::hstack(&refs).transpose()
    }
}
