//! Minimal commutative-ring abstraction shared by the rational and series
//! matrix code (determinants and characteristic polynomials).

use num_traits::{One, Zero};

use super::BiSeries;
use crate::rational::Rational;

pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl Ring for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn one_like(&self) -> Self {
        Rational::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl Ring for BiSeries {
    fn zero_like(&self) -> Self {
        BiSeries::zero(self.trunc_x(), self.trunc_y())
    }
    fn one_like(&self) -> Self {
        BiSeries::one(self.trunc_x(), self.trunc_y())
    }
    fn add(&self, other: &Self) -> Self {
        BiSeries::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        BiSeries::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        BiSeries::mul(self, other)
    }
    fn neg(&self) -> Self {
        BiSeries::neg(self)
    }
}

/// Division-free characteristic polynomial (Berkowitz). `m` is square,
/// row-major, of size `n >= 1`. Returns `c` with
/// `det(lambda I - m) = sum_k c[k] lambda^k`, `c[n] = 1`.
pub fn charpoly<R: Ring>(m: &[Vec<R>]) -> Vec<R> {
    let n = m.len();
    assert!(n > 0, "charpoly of empty matrix");
    let one = m[0][0].one_like();
    // Coefficients highest degree first.
    let mut vect = vec![one.clone(), m[0][0].neg()];
    for r in 1..n {
        // Toeplitz column: 1, -a, -R C, -R A C, ..., -R A^{r-1} C
        let a = &m[r][r];
        let row: Vec<R> = (0..r).map(|j| m[r][j].clone()).collect();
        let mut col: Vec<R> = (0..r).map(|i| m[i][r].clone()).collect();
        let mut t = Vec::with_capacity(r + 2);
        t.push(one.clone());
        t.push(a.neg());
        for k in 0..r {
            let dot = row
                .iter()
                .zip(&col)
                .fold(one.zero_like(), |acc, (u, v)| acc.add(&u.mul(v)));
            t.push(dot.neg());
            if k + 1 < r {
                col = (0..r)
                    .map(|i| {
                        (0..r).fold(one.zero_like(), |acc, j| acc.add(&m[i][j].mul(&col[j])))
                    })
                    .collect();
            }
        }
        let mut next = Vec::with_capacity(r + 2);
        for i in 0..(r + 2) {
            let mut acc = one.zero_like();
            for j in 0..vect.len() {
                if i >= j && i - j < t.len() {
                    acc = acc.add(&t[i - j].mul(&vect[j]));
                }
            }
            next.push(acc);
        }
        vect = next;
    }
    vect.reverse();
    vect
}

/// Determinant via the characteristic polynomial: `det m = (-1)^n c[0]`.
pub fn det<R: Ring>(m: &[Vec<R>]) -> R {
    let c = charpoly(m);
    if m.len().is_multiple_of(2) {
        c[0].clone()
    } else {
        c[0].neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn q(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
    }

    // Laplace expansion as an independent oracle.
    fn laplace(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = rat(0);
        for c in 0..n {
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][c] * laplace(&minor);
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn charpoly_2x2() {
        let c = charpoly(&q(&[&[1, 2], &[3, 4]]));
        assert_eq!(c, vec![rat(-2), rat(-5), rat(1)]);
    }

    #[test]
    fn det_matches_laplace() {
        let m = q(&[&[2, -1, 0, 3], &[1, 1, 4, -2], &[0, 5, -3, 1], &[7, 2, 2, 2]]);
        assert_eq!(det(&m), laplace(&m));
        let m3 = q(&[&[0, 1, 2], &[3, 0, 1], &[1, 1, 0]]);
        assert_eq!(det(&m3), laplace(&m3));
    }

    #[test]
    fn charpoly_trace_and_det() {
        let m = q(&[&[2, -1, 0], &[1, 1, 4], &[0, 5, -3]]);
        let c = charpoly(&m);
        assert_eq!(c[3], rat(1));
        assert_eq!(c[2], rat(0)); // -trace
        assert_eq!(-c[0].clone(), laplace(&m));
    }
}
