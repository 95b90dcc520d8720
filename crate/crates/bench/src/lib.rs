//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use pfaffian::io::parse_system;
use pfaffian::system::PfaffianSystem;

/// A shipped fixture, optionally at other truncation orders.
pub fn fixture(name: &str, trunc: Option<(u32, u32)>) -> PfaffianSystem {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../../fixtures/{name}.json"));
    parse_system(&path, trunc).expect("fixtures parse")
}
