use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::{t_add, t_mul, BiSeries, EXACT};
use crate::error::Axis;
use crate::rational::{format_rational, rat, Rational};

/// Truncated series in a single variable; coefficients known below `trunc`.
#[derive(Clone, Debug)]
pub struct UniSeries {
    coeffs: BTreeMap<u32, Rational>,
    trunc: u32,
}

impl UniSeries {
    pub fn zero(trunc: u32) -> Self {
        UniSeries {
            coeffs: BTreeMap::new(),
            trunc,
        }
    }

    pub fn constant(c: Rational, trunc: u32) -> Self {
        Self::from_terms([(0, c)], trunc)
    }

    pub fn from_terms<I: IntoIterator<Item = (u32, Rational)>>(terms: I, trunc: u32) -> Self {
        let mut s = Self::zero(trunc);
        for (k, c) in terms {
            let cur = s.coeff(k);
            s.set(k, cur + c);
        }
        s
    }

    pub fn from_ints(terms: &[(u32, i64)], trunc: u32) -> Self {
        Self::from_terms(terms.iter().map(|&(k, c)| (k, rat(c))), trunc)
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn coeff(&self, k: u32) -> Rational {
        self.coeffs.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn set(&mut self, k: u32, c: Rational) {
        if k >= self.trunc {
            return;
        }
        if c.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &Rational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest stored exponent, or `trunc` when zero within the window.
    pub fn valuation(&self) -> u32 {
        self.coeffs.keys().next().copied().unwrap_or(self.trunc)
    }

    pub fn add(&self, other: &Self) -> Self {
        let trunc = self.trunc.min(other.trunc);
        Self::from_terms(
            self.coeffs
                .iter()
                .chain(other.coeffs.iter())
                .filter(|(k, _)| **k < trunc)
                .map(|(k, v)| (*k, v.clone())),
            trunc,
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_terms(self.coeffs.iter().map(|(k, v)| (*k, v * c)), self.trunc)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let trunc = t_add(self.trunc, other.valuation()).min(t_add(other.trunc, self.valuation()));
        let mut out = Self::zero(trunc);
        for (&i, a) in &self.coeffs {
            for (&j, b) in &other.coeffs {
                if i + j < trunc {
                    let cur = out.coeff(i + j);
                    out.set(i + j, cur + a * b);
                }
            }
        }
        out
    }

    /// Substitutes `t^s` for the variable.
    pub fn ramify(&self, s: u32) -> Self {
        assert!(s >= 1, "ramification index must be positive");
        UniSeries {
            coeffs: self.coeffs.iter().map(|(&k, v)| (k * s, v.clone())).collect(),
            trunc: t_mul(self.trunc, s),
        }
    }

    /// Embeds as a bivariate series in `axis`, exact in the other variable.
    pub fn to_bi(&self, axis: Axis) -> BiSeries {
        match axis {
            Axis::X => BiSeries::from_terms(
                self.coeffs.iter().map(|(&k, v)| ((k, 0), v.clone())),
                self.trunc,
                EXACT,
            ),
            Axis::Y => BiSeries::from_terms(
                self.coeffs.iter().map(|(&k, v)| ((0, k), v.clone())),
                EXACT,
                self.trunc,
            ),
        }
    }

    pub fn eq_within(&self, other: &Self) -> bool {
        let t = self.trunc.min(other.trunc);
        (0..t.min(self.max_key().max(other.max_key()).saturating_add(1)))
            .all(|k| self.coeff(k) == other.coeff(k))
    }

    fn max_key(&self) -> u32 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }
}

impl PartialEq for UniSeries {
    fn eq(&self, other: &Self) -> bool {
        self.eq_within(other)
    }
}

impl fmt::Display for UniSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(&k, c)| match k {
                0 => format_rational(c),
                _ => format!("({})*t^{k}", format_rational(c)),
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}
