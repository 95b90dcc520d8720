//! Column reduction over the discrete valuation ring of power series in `y`.
//!
//! Entries are `BiSeries` that only involve `y` (exact in `x`, no positive
//! `x` powers). Callers working in the other variable swap first.

use crate::error::{Axis, Error, Result};
use crate::series::{BiSeries, SeriesMatrix};

/// `m * v = reduced`, where `reduced` has its first `rank` columns of full
/// column rank and the rest zero within the window. `v` is a product of
/// column swaps and unit-diagonal elementary operations, so `det v = ±1`.
#[derive(Clone, Debug)]
pub struct ColumnReduction {
    pub v: SeriesMatrix,
    pub reduced: SeriesMatrix,
    pub rank: usize,
    /// Row of the pivot used for each of the first `rank` columns.
    pub pivot_rows: Vec<usize>,
    pub swaps: usize,
}

/// `a / b` in the ring, given `val(a) >= val(b)`.
pub(crate) fn exact_quotient(a: &BiSeries, b: &BiSeries) -> Result<BiSeries> {
    let v = b.valuation(Axis::Y);
    let a = a.shift_down(0, v)?;
    let b = b.shift_down(0, v)?;
    Ok(a.mul(&b.invert_unit()?))
}

fn swap_cols(m: &mut SeriesMatrix, a: usize, b: usize) {
    if a == b {
        return;
    }
    for i in 0..m.rows() {
        let t = m.get(i, a).clone();
        let u = m.get(i, b).clone();
        m.set(i, a, u);
        m.set(i, b, t);
    }
}

/// `col_dst -= q * col_src`.
fn axpy_col(m: &mut SeriesMatrix, dst: usize, src: usize, q: &BiSeries) {
    for i in 0..m.rows() {
        let v = m.get(i, dst).sub(&q.mul(m.get(i, src)));
        m.set(i, dst, v);
    }
}

/// Pivot is the entry of minimal valuation among unused rows and active
/// columns; ties go to the smallest row, then the smallest column.
pub fn column_reduce(m: &SeriesMatrix) -> Result<ColumnReduction> {
    if m.entries().iter().any(|e| e.max_exponent(Axis::X).unwrap_or(0) > 0) {
        return Err(Error::PreconditionViolated(
            "column reduction expects entries free of x".into(),
        ));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let mut cur = m.clone();
    let mut v = SeriesMatrix::eye(cols);
    let mut used = vec![false; rows];
    let mut pivot_rows = Vec::new();
    let mut swaps = 0;
    let mut k = 0;
    while k < cols {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in (0..rows).filter(|&i| !used[i]) {
            for j in k..cols {
                let e = cur.get(i, j);
                if e.is_zero() {
                    continue;
                }
                let val = e.valuation(Axis::Y);
                if best.is_none_or(|(bv, _, _)| val < bv) {
                    best = Some((val, i, j));
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        if pj != k {
            swap_cols(&mut cur, pj, k);
            swap_cols(&mut v, pj, k);
            swaps += 1;
        }
        let piv = cur.get(pi, k).clone();
        for l in k + 1..cols {
            if cur.get(pi, l).is_zero() {
                continue;
            }
            let q = exact_quotient(cur.get(pi, l), &piv)?;
            axpy_col(&mut cur, l, k, &q);
            axpy_col(&mut v, l, k, &q);
        }
        used[pi] = true;
        pivot_rows.push(pi);
        k += 1;
    }
    Ok(ColumnReduction {
        v,
        reduced: cur,
        rank: k,
        pivot_rows,
        swaps,
    })
}

/// Rank over the fraction field of the series ring in `axis`'s partner
/// variable: entries must involve only the variable other than `axis`.
pub fn series_rank(m: &SeriesMatrix, frozen: Axis) -> Result<usize> {
    match frozen {
        Axis::X => Ok(column_reduce(m)?.rank),
        Axis::Y => Ok(column_reduce(&m.swap_vars())?.rank),
    }
}

/// Basis of the saturated right kernel: columns `w` with `m w = 0` and
/// `O^cols / span` torsion free.
pub fn saturated_kernel(m: &SeriesMatrix) -> Result<SeriesMatrix> {
    let red = column_reduce(m)?;
    let cols: Vec<usize> = (0..m.cols()).collect();
    let rows: Vec<usize> = (0..m.cols()).collect();
    Ok(red.v.select(&rows, &cols[red.rank..]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::series::EXACT;

    fn y(terms: &[(u32, i64)]) -> BiSeries {
        BiSeries::from_terms(terms.iter().map(|&(j, c)| ((0, j), rat(c))), EXACT, 10)
    }

    #[test]
    fn rank_one_leading_matrix() {
        // [[y, y^2], [-1, -y]]
        let m = SeriesMatrix::from_rows(vec![
            vec![y(&[(1, 1)]), y(&[(2, 1)])],
            vec![y(&[(0, -1)]), y(&[(1, -1)])],
        ]);
        let red = column_reduce(&m).unwrap();
        assert_eq!(red.rank, 1);
        assert!(m.mul(&red.v).eq_within(&red.reduced));
        assert!(red.reduced.block(0..2, 1..2).is_zero());
        let d = red.v.det();
        assert!(d.eq_within(&BiSeries::one(EXACT, 10)) || d.eq_within(&BiSeries::one(EXACT, 10).neg()));
    }

    #[test]
    fn kernel_is_saturated() {
        // [y, y^2] has kernel spanned by (-y, 1), not (-y^2, y).
        let m = SeriesMatrix::from_rows(vec![vec![y(&[(1, 1)]), y(&[(2, 1)])]]);
        let k = saturated_kernel(&m).unwrap();
        assert_eq!(k.cols(), 1);
        assert!(m.mul(&k).is_zero());
        assert_eq!(k.get(1, 0).constant_term(), rat(1));
    }
}
