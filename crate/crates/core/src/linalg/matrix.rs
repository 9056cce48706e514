use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Hermitian tolerance: `‖A − A*‖ ≤ TOL_HERM·(1+‖A‖)`.
pub const TOL_HERM: f64 = 1e-12;
/// Default relative tolerance for semidefinite tests.
pub const TOL_PSD: f64 = 1e-8;
/// Relative tolerance for reconstructions (`S² = A`, `A = UΛU*`).
pub const TOL_RECON: f64 = 1e-10;
/// Inverses with a 1-norm condition estimate above this are treated as singular.
pub const MAX_COND: f64 = 1e12;

/// Dense square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        CMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        CMatrix(DMatrix::from_fn(n, n, f))
    }

    /// Builds a matrix from complex rows; fails unless the rows form a square grid.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("empty matrix".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::DimensionMismatch(format!("row {bad} has {} entries, expected {n}", rows[bad].len())));
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "non-square real rows");
        Self::from_fn(n, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn scalar(z: C64) -> Self {
        CMatrix(DMatrix::from_element(1, 1, z))
    }

    pub fn from_dmatrix(m: DMatrix<C64>) -> Self {
        assert!(m.is_square(), "CMatrix must be square");
        CMatrix(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn adjoint(&self) -> Self {
        CMatrix(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        CMatrix(&self.0 * c)
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (max column sum).
    pub fn norm_1(&self) -> f64 {
        (0..self.n()).map(|j| self.0.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Spectral (operator) norm, the largest singular value.
    pub fn op_norm(&self) -> f64 {
        let gram = HMatrix::symmetrize(&(&self.adjoint() * self));
        match super::eig::herm_eigenvalues(&gram) {
            Ok(vals) => vals.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            // Frobenius bounds the spectral norm; only reachable on solver breakdown.
            Err(_) => self.frobenius_norm(),
        }
    }

    /// `‖A − A*‖ ≤ tol·(1+‖A‖)`
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let skew = self - &self.adjoint();
        skew.max_abs() == 0.0 || skew.op_norm() <= tol * (1.0 + self.op_norm())
    }

    /// The `bs × bs` block at block-row `p`, block-column `q` (zero based).
    pub fn block(&self, p: usize, q: usize, bs: usize) -> Self {
        CMatrix(self.0.view((p * bs, q * bs), (bs, bs)).into_owned())
    }

    pub fn set_block(&mut self, p: usize, q: usize, b: &CMatrix) {
        let bs = b.n();
        self.0.view_mut((p * bs, q * bs), (bs, bs)).copy_from(&b.0);
    }

    /// Block-diagonal `A ⊕ B`.
    pub fn direct_sum(&self, other: &CMatrix) -> Self {
        let (n, m) = (self.n(), other.n());
        let mut out = DMatrix::zeros(n + m, n + m);
        out.view_mut((0, 0), (n, n)).copy_from(&self.0);
        out.view_mut((n, n), (m, m)).copy_from(&other.0);
        CMatrix(out)
    }

    /// Inverse through LU, refusing matrices whose 1-norm condition estimate exceeds `max_cond`.
    pub fn inverse(&self, max_cond: f64) -> Result<Self> {
        let inv = self.0.clone().lu().try_inverse().ok_or(Error::Singular { cond: f64::INFINITY })?;
        let inv = CMatrix(inv);
        let cond = self.norm_1() * inv.norm_1();
        if !cond.is_finite() || cond > max_cond || !inv.is_finite() {
            return Err(Error::Singular { cond });
        }
        Ok(inv)
    }

    /// `S⁻¹·A·S`
    pub fn similarity(&self, s: &CMatrix, s_inv: &CMatrix) -> Self {
        &(s_inv * self) * s
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        (self - other).max_abs()
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{}", self.0)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(&self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(self.0 $op rhs.0)
            }
        }
        impl $trait<&CMatrix> for CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: &CMatrix) -> CMatrix {
                CMatrix(self.0 $op &rhs.0)
            }
        }
        impl $trait<CMatrix> for &CMatrix {
            type Output = CMatrix;
            fn $method(self, rhs: CMatrix) -> CMatrix {
                CMatrix(&self.0 $op rhs.0)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

impl Neg for CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        CMatrix(-self.0)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<[f64; 2]>>,
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.n();
        let entries = (0..n).map(|i| (0..n).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect()).collect();
        MatrixJson { n, entries }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        if raw.n == 0 || raw.entries.len() != raw.n || raw.entries.iter().any(|r| r.len() != raw.n) {
            return Err(D::Error::custom(format!("matrix entries are not {0}x{0}", raw.n)));
        }
        let m = CMatrix::from_fn(raw.n, |i, j| C64::new(raw.entries[i][j][0], raw.entries[i][j][1]));
        if !m.is_finite() {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        Ok(m)
    }
}

/// A Hermitian matrix, stored symmetrized as `(A + A*)/2`.
#[derive(Clone, PartialEq)]
pub struct HMatrix(CMatrix);

impl HMatrix {
    /// Accepts `a` if it is Hermitian within [`TOL_HERM`].
    pub fn new(a: CMatrix) -> Result<Self> {
        if !a.is_hermitian(TOL_HERM) {
            return Err(Error::Invalid("matrix is not Hermitian".into()));
        }
        Ok(Self::symmetrize(&a))
    }

    /// `(A + A*)/2`, without checking how far `a` was from Hermitian.
    pub fn symmetrize(a: &CMatrix) -> Self {
        let mut h = (a + &a.adjoint()).scale_real(0.5);
        for i in 0..h.n() {
            let d = h.get(i, i);
            h.set(i, i, C64::new(d.re, 0.0));
        }
        HMatrix(h)
    }

    pub fn identity(n: usize) -> Self {
        HMatrix(CMatrix::identity(n))
    }

    pub fn diag(values: &[f64]) -> Self {
        HMatrix(CMatrix::diag_real(values))
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn as_cmatrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_cmatrix(self) -> CMatrix {
        self.0
    }

    /// Spectral norm, `max |λ|`.
    pub fn op_norm(&self) -> f64 {
        match super::eig::herm_eigenvalues(self) {
            Ok(v) => v.iter().map(|x| x.abs()).fold(0.0, f64::max),
            Err(_) => self.0.frobenius_norm(),
        }
    }
}

impl fmt::Debug for HMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HMatrix{}", self.0.as_dmatrix())
    }
}

impl Serialize for HMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = CMatrix::deserialize(d)?;
        HMatrix::new(m).map_err(D::Error::custom)
    }
}

/// `Im A = (A − A*)/2i`, Hermitian by construction.
pub fn imag_part(a: &CMatrix) -> HMatrix {
    let n = a.n();
    let mut out = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            // ((a_ij − conj(a_ji)) / 2i
            let d = a.get(i, j) - a.get(j, i).conj();
            out.set(i, j, C64::new(d.im * 0.5, -d.re * 0.5));
        }
        let d = out.get(i, i);
        out.set(i, i, C64::new(d.re, 0.0));
    }
    HMatrix(out)
}

/// `Re A = (A + A*)/2`
pub fn real_part(a: &CMatrix) -> HMatrix {
    HMatrix::symmetrize(a)
}
