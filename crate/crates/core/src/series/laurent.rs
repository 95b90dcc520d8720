use std::fmt;

use super::{SeriesMatrix, Window};
use crate::error::{Axis, Error, Result};
use crate::rational::{rat, Rational};

/// `x^sx y^sy M` with `M` a series matrix.
#[derive(Clone, Debug)]
pub struct LaurentMatrix {
    shift: (i64, i64),
    mat: SeriesMatrix,
}

impl LaurentMatrix {
    pub fn new(shift: (i64, i64), mat: SeriesMatrix) -> Self {
        LaurentMatrix { shift, mat }
    }

    pub fn from_series(mat: SeriesMatrix) -> Self {
        Self::new((0, 0), mat)
    }

    pub fn shift(&self) -> (i64, i64) {
        self.shift
    }

    pub fn series(&self) -> &SeriesMatrix {
        &self.mat
    }

    pub fn into_parts(self) -> ((i64, i64), SeriesMatrix) {
        (self.shift, self.mat)
    }

    pub fn rows(&self) -> usize {
        self.mat.rows()
    }

    pub fn cols(&self) -> usize {
        self.mat.cols()
    }

    /// Absolute exponent window in which this matrix is known.
    pub fn window(&self) -> Window {
        Window::from_trunc(self.mat.trunc_x(), self.mat.trunc_y(), self.shift)
    }

    pub fn is_zero(&self) -> bool {
        self.mat.is_zero()
    }

    /// Pulls the largest monomial out of the series part.
    pub fn normalize(&self) -> Self {
        let (Some(vx), Some(vy)) = (self.mat.valuation(Axis::X), self.mat.valuation(Axis::Y)) else {
            return self.clone();
        };
        let mat = self
            .mat
            .shift_down(vx, vy)
            .expect("valuations divide every entry");
        LaurentMatrix {
            shift: (self.shift.0 + vx as i64, self.shift.1 + vy as i64),
            mat,
        }
    }

    /// Re-expresses with the given (smaller or equal) shift.
    pub fn with_shift(&self, target: (i64, i64)) -> Result<Self> {
        let dx = self.shift.0 - target.0;
        let dy = self.shift.1 - target.1;
        if dx >= 0 && dy >= 0 {
            return Ok(LaurentMatrix {
                shift: target,
                mat: self.mat.shift_up(dx as u32, dy as u32),
            });
        }
        let n = self.normalize();
        let dx = n.shift.0 - target.0;
        let dy = n.shift.1 - target.1;
        if n.is_zero() || (dx >= 0 && dy >= 0) {
            return Ok(LaurentMatrix {
                shift: target,
                mat: if n.is_zero() {
                    n.mat.clone()
                } else {
                    n.mat.shift_up(dx as u32, dy as u32)
                },
            });
        }
        Err(Error::PreconditionViolated(format!(
            "matrix has terms below x^{} y^{}",
            target.0, target.1
        )))
    }

    /// The series part when the shift is nonnegative after normalizing.
    pub fn to_series(&self) -> Result<SeriesMatrix> {
        Ok(self.with_shift((0, 0))?.mat)
    }

    pub fn add(&self, o: &Self) -> Self {
        let s = (self.shift.0.min(o.shift.0), self.shift.1.min(o.shift.1));
        let a = self.with_shift(s).expect("shift is below both");
        let b = o.with_shift(s).expect("shift is below both");
        LaurentMatrix {
            shift: s,
            mat: a.mat.add(&b.mat),
        }
    }

    pub fn neg(&self) -> Self {
        LaurentMatrix {
            shift: self.shift,
            mat: self.mat.neg(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Rational) -> Self {
        LaurentMatrix {
            shift: self.shift,
            mat: self.mat.scale(c),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        LaurentMatrix {
            shift: (self.shift.0 + o.shift.0, self.shift.1 + o.shift.1),
            mat: self.mat.mul(&o.mat),
        }
    }

    /// `delta(x^s M) = x^s (s M + delta M)`.
    pub fn delta(&self, axis: Axis) -> Self {
        let s = match axis {
            Axis::X => self.shift.0,
            Axis::Y => self.shift.1,
        };
        LaurentMatrix {
            shift: self.shift,
            mat: self.mat.scale(&rat(s)).add(&self.mat.delta(axis)),
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.mat.inverse()?;
        Ok(LaurentMatrix {
            shift: (inv.shift.0 - self.shift.0, inv.shift.1 - self.shift.1),
            mat: inv.mat,
        })
    }

    pub fn swap_vars(&self) -> Self {
        LaurentMatrix {
            shift: (self.shift.1, self.shift.0),
            mat: self.mat.swap_vars(),
        }
    }

    pub fn eq_within(&self, o: &Self) -> bool {
        self.sub(o).is_zero()
    }
}

impl From<SeriesMatrix> for LaurentMatrix {
    fn from(m: SeriesMatrix) -> Self {
        Self::from_series(m)
    }
}

impl fmt::Display for LaurentMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "x^{} y^{} *", self.shift.0, self.shift.1)?;
        write!(f, "{}", self.mat)
    }
}
