#![allow(dead_code)]

use pfaffian::io::SystemDocument;
use pfaffian::rational::rat;
use pfaffian::series::{BiSeries, SeriesMatrix, EXACT};
use pfaffian::system::PfaffianSystem;

pub fn fixture(name: &str) -> PfaffianSystem {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    SystemDocument::from_json(&text).unwrap().to_system(None).unwrap()
}

/// Exact polynomial from `(i, j, c)` triples.
pub fn poly(terms: &[(u32, u32, i64)]) -> BiSeries {
    BiSeries::from_terms(terms.iter().map(|&(i, j, c)| ((i, j), rat(c))), EXACT, EXACT)
}

pub fn pmat(rows: Vec<Vec<BiSeries>>) -> SeriesMatrix {
    SeriesMatrix::from_rows(rows)
}

/// Exact polynomial from `(i, j, num, den)` quadruples.
pub fn poly_q(terms: &[(u32, u32, i64, i64)]) -> BiSeries {
    BiSeries::from_terms(
        terms.iter().map(|&(i, j, a, b)| ((i, j), pfaffian::rational::ratio(a, b))),
        EXACT,
        EXACT,
    )
}
