//! Named free functions.

use super::eval::FreeFunction;
use crate::error::{Error, Result};
use crate::opsys::OpSysBasis;

const ENTRIES: &[(&str, &str, &str)] = &[
    ("schur_complement", "block2", "X[1,1] - X[1,2]*inv(X[2,2])*X[2,1]"),
    ("geometric_mean", "diagonal(2)", "sqrt(X1)*sqrt(inv(sqrt(X1))*X2*inv(sqrt(X1)))*sqrt(X1)"),
    ("neg_inverse", "scalar", "-inv(X1)"),
    ("inverse", "scalar", "inv(X1)"),
    ("identity", "scalar", "X1"),
    ("square", "scalar", "X1*X1"),
    ("msqrt", "scalar", "sqrt(X1)"),
];

pub fn catalog_names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.0).collect()
}

/// Looks up a catalog function. All of them map into the scalar system and live on the pd cone.
pub fn catalog(name: &str) -> Result<FreeFunction> {
    let (_, system, text) = ENTRIES
        .iter()
        .find(|e| e.0 == name)
        .ok_or_else(|| Error::Unknown { kind: "function", name: name.to_string() })?;
    FreeFunction::from_text(name, text, OpSysBasis::builtin(system)?, OpSysBasis::scalar())
}
