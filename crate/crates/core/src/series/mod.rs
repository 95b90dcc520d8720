//! Truncated power series in one and two variables over the rationals.
//!
//! Every series carries explicit truncation orders: a `BiSeries` with orders
//! `(tx, ty)` knows its coefficient of `x^i y^j` exactly for `i < tx` and
//! `j < ty`. Arithmetic propagates these windows pessimistically, so a zero
//! verdict always means "zero inside the reported window".

mod bi;
mod laurent;
mod matrix;
pub mod ring;
mod uni;

pub use bi::BiSeries;
pub use laurent::LaurentMatrix;
pub use matrix::SeriesMatrix;
pub use uni::UniSeries;

use std::fmt;

/// Truncation order meaning "known to all orders".
pub const EXACT: u32 = u32::MAX;

pub(crate) fn t_add(t: u32, k: u32) -> u32 {
    if t == EXACT || k == EXACT {
        EXACT
    } else {
        t.saturating_add(k).min(EXACT - 1)
    }
}

pub(crate) fn t_sub(t: u32, k: u32) -> u32 {
    if t == EXACT {
        EXACT
    } else {
        t.saturating_sub(k)
    }
}

pub(crate) fn t_mul(t: u32, s: u32) -> u32 {
    if t == EXACT {
        EXACT
    } else {
        t.saturating_mul(s).min(EXACT - 1)
    }
}

/// A certification window in absolute exponents (Laurent exponents may be
/// negative). `None` on an axis means exact in that variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Window {
    pub x: Option<i64>,
    pub y: Option<i64>,
}

impl Window {
    pub const EXACT: Window = Window { x: None, y: None };

    pub fn from_trunc(tx: u32, ty: u32, shift: (i64, i64)) -> Window {
        let f = |t: u32, s: i64| (t != EXACT).then(|| t as i64 + s);
        Window {
            x: f(tx, shift.0),
            y: f(ty, shift.1),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.x.is_none() && self.y.is_none()
    }

    /// Componentwise minimum, treating `None` as +infinity.
    pub fn meet(self, other: Window) -> Window {
        let m = |a: Option<i64>, b: Option<i64>| match (a, b) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, None) => a,
            (None, b) => b,
        };
        Window {
            x: m(self.x, other.x),
            y: m(self.y, other.y),
        }
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |v: Option<i64>, n: &str| match v {
            Some(t) => format!("{n}^k, k<{t}"),
            None => format!("{n} exact"),
        };
        write!(f, "[{}; {}]", part(self.x, "x"), part(self.y, "y"))
    }
}

impl Window {
    pub(crate) fn swapped_if(self, swap: bool) -> Window {
        if swap {
            Window { x: self.y, y: self.x }
        } else {
            self
        }
    }
}
