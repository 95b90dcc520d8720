//! JSON system documents with exact rational entries.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::QMatrix;
use crate::rational::{format_rational, parse_rational};
use crate::series::SeriesMatrix;
use crate::system::PfaffianSystem;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub i: u32,
    pub j: u32,
    pub matrix: Vec<Vec<String>>,
}

/// `A = x^-p sum A_ij x^i y^j`, `B = y^-q sum B_ij x^i y^j`, with every
/// coefficient below `(trunc_x, trunc_y)` given (absent terms are zero).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDocument {
    pub n: usize,
    pub p: u32,
    pub q: u32,
    pub trunc_x: u32,
    pub trunc_y: u32,
    #[serde(rename = "A_terms")]
    pub a_terms: Vec<TermDocument>,
    #[serde(rename = "B_terms")]
    pub b_terms: Vec<TermDocument>,
}

impl SystemDocument {
    pub fn from_json(text: &str) -> Result<SystemDocument> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialize")
    }

    /// Builds the system, optionally with overridden truncation orders.
    pub fn to_system(&self, trunc: Option<(u32, u32)>) -> Result<PfaffianSystem> {
        let (tx, ty) = trunc.unwrap_or((self.trunc_x, self.trunc_y));
        let a = self.build(&self.a_terms, "A_terms", tx, ty)?;
        let b = self.build(&self.b_terms, "B_terms", tx, ty)?;
        PfaffianSystem::new(self.p, a, self.q, b)
    }

    fn build(&self, terms: &[TermDocument], field: &str, tx: u32, ty: u32) -> Result<SeriesMatrix> {
        let n = self.n;
        if n == 0 {
            return Err(Error::Parse {
                location: "n".into(),
                message: "dimension must be positive".into(),
            });
        }
        let mut coeffs = Vec::with_capacity(terms.len());
        for (k, t) in terms.iter().enumerate() {
            let loc = |s: &str| format!("{field}[{k}]{s}");
            if t.i >= self.trunc_x || t.j >= self.trunc_y {
                return Err(Error::Parse {
                    location: loc(""),
                    message: format!(
                        "exponent ({}, {}) outside truncation ({}, {})",
                        t.i, t.j, self.trunc_x, self.trunc_y
                    ),
                });
            }
            if t.matrix.len() != n || t.matrix.iter().any(|r| r.len() != n) {
                return Err(Error::Parse {
                    location: loc(".matrix"),
                    message: format!("expected a {n}x{n} array"),
                });
            }
            let mut rows = Vec::with_capacity(n);
            for (r, row) in t.matrix.iter().enumerate() {
                let mut out = Vec::with_capacity(n);
                for (c, v) in row.iter().enumerate() {
                    out.push(parse_rational(v).map_err(|e| match e {
                        Error::Parse { message, .. } => Error::Parse {
                            location: loc(&format!(".matrix[{r}][{c}]")),
                            message,
                        },
                        other => other,
                    })?);
                }
                rows.push(out);
            }
            coeffs.push(((t.i, t.j), QMatrix::from_rows(rows)));
        }
        Ok(SeriesMatrix::from_coeff_matrices(n, n, &coeffs, tx, ty))
    }

    /// Canonical document of a normal-crossing system.
    pub fn from_system(sys: &PfaffianSystem) -> Result<SystemDocument> {
        if !sys.is_normal_crossing() {
            return Err(Error::PreconditionViolated(
                "only normal-crossing systems can be written".into(),
            ));
        }
        let tx = sys.amat().trunc_x().min(sys.bmat().trunc_x());
        let ty = sys.amat().trunc_y().min(sys.bmat().trunc_y());
        Ok(SystemDocument {
            n: sys.n(),
            p: sys.p(),
            q: sys.q(),
            trunc_x: tx,
            trunc_y: ty,
            a_terms: terms_of(sys.amat(), tx, ty),
            b_terms: terms_of(sys.bmat(), tx, ty),
        })
    }
}

/// Nonzero coefficient matrices of `m` inside its window.
pub fn series_terms(m: &SeriesMatrix) -> Vec<TermDocument> {
    terms_of(m, m.trunc_x(), m.trunc_y())
}

fn terms_of(m: &SeriesMatrix, tx: u32, ty: u32) -> Vec<TermDocument> {
    let mut support = BTreeMap::new();
    for e in m.entries() {
        for (&(i, j), _) in e.terms() {
            if i < tx && j < ty {
                support.insert((i, j), ());
            }
        }
    }
    support
        .keys()
        .map(|&(i, j)| {
            let c = m.coeff_matrix(i, j);
            TermDocument {
                i,
                j,
                matrix: c
                    .to_rows()
                    .iter()
                    .map(|r| r.iter().map(format_rational).collect())
                    .collect(),
            }
        })
        .collect()
}

pub fn parse_system(path: &Path, trunc: Option<(u32, u32)>) -> Result<PfaffianSystem> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SystemDocument::from_json(&text)?.to_system(trunc)
}

pub fn write_system(path: &Path, sys: &PfaffianSystem) -> Result<()> {
    let doc = SystemDocument::from_system(sys)?;
    std::fs::write(path, doc.to_json() + "\n")
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
