//! Fixed inputs shared by the criterion benches.

use ncloewner_core::linalg::{random_matrix, CMatrix, MatrixKind, Rng};

/// A reproducible matrix of the given kind and size.
pub fn fixture(kind: MatrixKind, n: usize) -> CMatrix {
    random_matrix(kind, n, &mut Rng::new(0xBE7C, n as u64))
}
