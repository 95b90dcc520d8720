use std::fmt;

use num_traits::{One, Zero};

use super::QPoly;
use crate::rational::{format_rational, rat, Rational};
use crate::series::ring;

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn scalar(n: usize, c: &Rational) -> Self {
        Self::identity(n).scale(c)
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        QMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_ints(rows: &[&[i64]]) -> Self {
        Self::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect())
    }

    pub fn from_columns(cols: &[Vec<Rational>]) -> Self {
        let c = cols.len();
        let r = cols.first().map_or(0, |v| v.len());
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn diag(entries: &[Rational]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
            m.set(i, i, v.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rational) {
        self.data[i * self.cols + j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).clone()).collect())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "inner dimensions");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let v = out.get(i, j) + a * o.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                continue;
            };
            if p != row {
                for j in 0..m.cols {
                    let t = m.get(p, j).clone();
                    let u = m.get(row, j).clone();
                    m.set(p, j, u);
                    m.set(row, j, t);
                }
            }
            let inv = m.get(row, col).recip();
            for j in 0..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for i in 0..m.rows {
                if i != row && !m.get(i, col).is_zero() {
                    let f = m.get(i, col).clone();
                    for j in 0..m.cols {
                        let v = m.get(i, j) - &f * m.get(row, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right kernel.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = -r.get(row, f).clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self * v = b`, if consistent.
    pub fn solve(&self, b: &[Rational]) -> Option<Vec<Rational>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Self::zeros(self.rows, self.cols + 1);
        for (i, bi) in b.iter().enumerate() {
            for j in 0..self.cols {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, self.cols, bi.clone());
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut v = vec![Rational::zero(); self.cols];
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = r.get(row, self.cols).clone();
        }
        Some(v)
    }

    pub fn inverse(&self) -> Option<QMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rational::one());
        }
        let (r, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Some(r.submatrix(&rows, &cols))
    }

    pub fn det(&self) -> Rational {
        assert_eq!(self.rows, self.cols);
        if self.rows == 0 {
            return Rational::one();
        }
        ring::det(&self.to_rows())
    }

    /// `det(lambda I - self)`.
    pub fn charpoly(&self) -> QPoly {
        assert_eq!(self.rows, self.cols);
        if self.rows == 0 {
            return QPoly::one();
        }
        QPoly::new(ring::charpoly(&self.to_rows()))
    }

    /// Evaluates a polynomial at this matrix (Horner).
    pub fn eval_poly(&self, p: &QPoly) -> QMatrix {
        let n = self.rows;
        let mut acc = QMatrix::zeros(n, n);
        for c in p.coeffs().iter().rev() {
            acc = acc.mul(self).add(&QMatrix::scalar(n, c));
        }
        acc
    }

    pub fn pow(&self, k: u32) -> QMatrix {
        (0..k).fold(QMatrix::identity(self.rows), |acc, _| acc.mul(self))
    }

    pub fn is_nilpotent(&self) -> bool {
        self.pow(self.rows as u32).is_zero()
    }

    pub fn commutes_with(&self, o: &Self) -> bool {
        self.mul(o) == o.mul(self)
    }

    /// Solves `a X - X b = c` for `X`; `None` when the operator is singular
    /// and `c` is outside its image.
    pub fn sylvester(a: &QMatrix, b: &QMatrix, c: &QMatrix) -> Option<QMatrix> {
        let op = sylvester_operator(a, b);
        let rhs = vectorize(c);
        op.solve(&rhs).map(|v| unvectorize(&v, a.rows, b.rows))
    }

    pub fn block_diag(blocks: &[QMatrix]) -> QMatrix {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let mut out = QMatrix::zeros(n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(off + i, off + j, b.get(i, j).clone());
                }
            }
            off += b.rows;
        }
        out
    }
}

/// Matrix of `X -> a X - X b` acting on row-major vectorized `X`.
pub(crate) fn sylvester_operator(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let (p, q) = (a.rows, b.rows);
    let mut op = QMatrix::zeros(p * q, p * q);
    for i in 0..p {
        for j in 0..q {
            let row = i * q + j;
            for k in 0..p {
                let v = op.get(row, k * q + j) + a.get(i, k);
                op.set(row, k * q + j, v);
            }
            for k in 0..q {
                let v = op.get(row, i * q + k) - b.get(k, j);
                op.set(row, i * q + k, v);
            }
        }
    }
    op
}

pub(crate) fn vectorize(m: &QMatrix) -> Vec<Rational> {
    m.data.clone()
}

pub(crate) fn unvectorize(v: &[Rational], rows: usize, cols: usize) -> QMatrix {
    QMatrix {
        rows,
        cols,
        data: v.to_vec(),
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|i| {
                let r: Vec<String> = (0..self.cols).map(|j| format_rational(self.get(i, j))).collect();
                format!("[{}]", r.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn rank_and_nullspace() {
        let m = QMatrix::from_ints(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.len(), 1);
        let v = QMatrix::from_columns(&ns);
        assert!(m.mul(&v).is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let m = QMatrix::from_ints(&[&[2, 1], &[7, 4]]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), QMatrix::identity(2));
        assert!(QMatrix::from_ints(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn sylvester_disjoint_spectra() {
        let a = QMatrix::from_ints(&[&[1, 1], &[0, 1]]);
        let b = QMatrix::from_ints(&[&[3]]);
        let c = QMatrix::from_ints(&[&[1], &[2]]);
        let x = QMatrix::sylvester(&a, &b, &c).unwrap();
        assert_eq!(a.mul(&x).sub(&x.mul(&b)), c);
        assert_eq!(*x.get(1, 0), rat(-1));
        assert_eq!(*x.get(0, 0), rat(-1));
    }

    #[test]
    fn charpoly_and_cayley_hamilton() {
        let m = QMatrix::from_ints(&[&[0, 1, 0], &[0, 0, 1], &[2, -1, 3]]);
        let p = m.charpoly();
        assert!(m.eval_poly(&p).is_zero());
    }
}
