use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{format_rational, rat, Rational};

/// Dense univariate polynomial, coefficients from low to high degree,
/// without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    coeffs: Vec<Rational>,
}

/// A factor `base^multiplicity` of a coprime factorization. `root` is set
/// when `base` is linear.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeFactor {
    pub base: QPoly,
    pub multiplicity: u32,
    pub root: Option<Rational>,
}

impl CoprimeFactor {
    pub fn power(&self) -> QPoly {
        self.base.pow(self.multiplicity)
    }

    pub fn degree(&self) -> usize {
        self.base.degree().unwrap_or(0) * self.multiplicity as usize
    }
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// `x - c`.
    pub fn linear(c: &Rational) -> Self {
        Self::new(vec![-c.clone(), Rational::one()])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| rat(v)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(&rat(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Self::one(), |acc, _| acc.mul(self))
    }

    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.degree().unwrap();
        let lead = d.leading();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rational::zero(); r.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() / &lead;
            for (i, dc) in d.coeffs.iter().enumerate() {
                r[k + i] -= &c * dc;
            }
            q[k] = c;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (Self::new(q), Self::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        self.scale(&self.leading().recip())
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * rat(k as i64))
                .collect(),
        )
    }

    /// Yun's algorithm: monic squarefree `s_m` with `self ~ prod s_m^m`.
    pub fn squarefree(&self) -> Vec<(QPoly, u32)> {
        let f = self.monic();
        if f.degree().unwrap_or(0) == 0 {
            return vec![];
        }
        let fp = f.derivative();
        let mut a = f.gcd(&fp);
        let mut b = f.div_rem(&a).0;
        let mut c = fp.div_rem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut m = 1;
        while b.degree().unwrap_or(0) > 0 {
            a = b.gcd(&d);
            if a.degree().unwrap_or(0) > 0 {
                out.push((a.clone(), m));
            }
            b = b.div_rem(&a).0;
            c = d.div_rem(&a).0;
            d = c.sub(&b.derivative());
            m += 1;
        }
        out
    }

    /// Distinct rational roots, by the rational root theorem.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.is_zero() {
            return vec![];
        }
        let mut roots = Vec::new();
        let mut p = self.clone();
        if p.coeff(0).is_zero() {
            roots.push(Rational::zero());
            let k = p.coeffs.iter().position(|c| !c.is_zero()).unwrap();
            p = Self::new(p.coeffs[k..].to_vec());
        }
        if p.degree().unwrap_or(0) == 0 {
            return roots;
        }
        let ints = p.integer_coeffs();
        let a0 = ints[0].abs();
        let an = ints.last().unwrap().abs();
        for num in divisors(&a0) {
            for den in divisors(&an) {
                for sign in [1, -1] {
                    let cand = Rational::new(num.clone() * BigInt::from(sign), den.clone());
                    if !roots.contains(&cand) && p.eval(&cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        roots
    }

    /// Scales by the lcm of denominators to integer coefficients.
    fn integer_coeffs(&self) -> Vec<BigInt> {
        let l = self
            .coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        self.coeffs
            .iter()
            .map(|c| (c * Rational::from_integer(l.clone())).to_integer())
            .collect()
    }

    /// Pairwise coprime factorization: rational roots are split off as
    /// linear powers; the root-free remainder of each squarefree layer is
    /// kept as one factor.
    pub fn coprime_factors(&self) -> Vec<CoprimeFactor> {
        let mut out = Vec::new();
        for (s, m) in self.squarefree() {
            let mut rest = s.clone();
            for r in s.rational_roots() {
                let lin = QPoly::linear(&r);
                rest = rest.div_rem(&lin).0;
                out.push(CoprimeFactor {
                    base: lin,
                    multiplicity: m,
                    root: Some(r),
                });
            }
            if rest.degree().unwrap_or(0) > 0 {
                out.push(CoprimeFactor {
                    base: rest.monic(),
                    multiplicity: m,
                    root: None,
                });
            }
        }
        out
    }
}

fn divisors(n: &BigInt) -> Vec<BigInt> {
    if n.is_zero() {
        return vec![BigInt::one()];
    }
    let mut out = Vec::new();
    let mut d = BigInt::one();
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            out.push(d.clone());
            let q = n / &d;
            if q != d {
                out.push(q);
            }
        }
        d += 1;
    }
    out
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format_rational(c),
                1 => format!("({})*t", format_rational(c)),
                _ => format!("({})*t^{k}", format_rational(c)),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
