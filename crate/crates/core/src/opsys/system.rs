use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::point::NCPoint;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, HMatrix, C64};

/// Residual above which `decode` reports a matrix as outside the realization image.
pub const DECODE_TOL: f64 = 1e-9;

/// A finite-dimensional operator system: the real span of self-adjoint `k×k` matrices
/// `E_1..E_m`, containing the identity.
#[derive(Debug, Clone)]
pub struct OpSysBasis {
    name: String,
    k: usize,
    basis: Vec<HMatrix>,
    id_coeffs: Vec<f64>,
    /// Dual frame under `⟨A, B⟩ = Re tr(A*B)`: `Re tr(dual_i·E_j) = δ_ij`.
    dual: Vec<CMatrix>,
}

impl PartialEq for OpSysBasis {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.k == other.k && self.basis == other.basis && self.id_coeffs == other.id_coeffs
    }
}

impl OpSysBasis {
    /// Validates Hermitian basis elements, real linear independence and `Σ c_j E_j = I`.
    pub fn new(name: impl Into<String>, basis: Vec<CMatrix>, id_coeffs: Vec<f64>) -> Result<Self> {
        let name = name.into();
        let m = basis.len();
        if m == 0 {
            return Err(Error::InvalidSystem(format!("`{name}` has an empty basis")));
        }
        let k = basis[0].n();
        if basis.iter().any(|e| e.n() != k) {
            return Err(Error::InvalidSystem(format!("`{name}`: basis elements differ in size")));
        }
        if id_coeffs.len() != m {
            return Err(Error::InvalidSystem(format!(
                "`{name}`: {} identity coefficients for {m} basis elements",
                id_coeffs.len()
            )));
        }
        let basis = basis
            .into_iter()
            .enumerate()
            .map(|(j, e)| {
                HMatrix::new(e)
                    .map_err(|_| Error::InvalidSystem(format!("`{name}`: basis element {} is not Hermitian", j + 1)))
            })
            .collect::<Result<Vec<_>>>()?;

        let gram =
            DMatrix::<f64>::from_fn(m, m, |i, j| (basis[i].as_cmatrix().adjoint() * basis[j].as_cmatrix()).trace().re);
        let gram_inv = gram
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidSystem(format!("`{name}`: basis is linearly dependent")))?;
        let gram_scale = gram.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let inv_scale = gram_inv.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if !(gram_scale * inv_scale).is_finite() || gram_scale * inv_scale > 1e12 {
            return Err(Error::InvalidSystem(format!("`{name}`: basis is linearly dependent")));
        }
        let dual = (0..m)
            .map(|i| {
                (0..m).fold(CMatrix::zeros(k), |acc, l| &acc + &basis[l].as_cmatrix().scale_real(gram_inv[(i, l)]))
            })
            .collect();

        let mut id = CMatrix::zeros(k);
        for (c, e) in id_coeffs.iter().zip(&basis) {
            id = &id + &e.as_cmatrix().scale_real(*c);
        }
        if id.max_abs_diff(&CMatrix::identity(k)) > 1e-12 {
            return Err(Error::InvalidSystem(format!("`{name}`: identity coefficients do not sum to I")));
        }
        Ok(OpSysBasis { name, k, basis, id_coeffs, dual })
    }

    pub fn scalar() -> Self {
        Self::new("scalar", vec![CMatrix::identity(1)], vec![1.0]).expect("scalar system")
    }

    /// `ℝ^d` as diagonal matrices.
    pub fn diagonal(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Unknown { kind: "system", name: "diagonal(0)".into() });
        }
        let basis = (0..d)
            .map(|j| CMatrix::from_fn(d, |p, q| if p == j && q == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
            .collect();
        Self::new(format!("diagonal({d})"), basis, vec![1.0; d])
    }

    /// `S_2(ℂ)`, the Hermitian 2×2 matrices: `e11, e22, e12+e21, i(e12−e21)`.
    pub fn block2() -> Self {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let basis = vec![
            CMatrix::from_rows(&[vec![one, z], vec![z, z]]).unwrap(),
            CMatrix::from_rows(&[vec![z, z], vec![z, one]]).unwrap(),
            CMatrix::from_rows(&[vec![z, one], vec![one, z]]).unwrap(),
            CMatrix::from_rows(&[vec![z, i], vec![-i, z]]).unwrap(),
        ];
        Self::new("block2", basis, vec![1.0, 1.0, 0.0, 0.0]).expect("block2 system")
    }

    /// `scalar`, `diagonal(d)` or `block2`.
    pub fn builtin(name: &str) -> Result<Self> {
        let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "scalar" => Ok(Self::scalar()),
            "block2" => Ok(Self::block2()),
            other => {
                let d = other
                    .strip_prefix("diagonal(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|d| d.parse::<usize>().ok())
                    .ok_or_else(|| Error::Unknown { kind: "system", name: name.to_string() })?;
                Self::diagonal(d)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Ambient side length.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of basis elements.
    pub fn m(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[HMatrix] {
        &self.basis
    }

    pub fn id_coeffs(&self) -> &[f64] {
        &self.id_coeffs
    }

    /// True when every basis element is diagonal, i.e. points are tuples of commuting-compatible
    /// coordinates.
    pub fn is_diagonal(&self) -> bool {
        self.basis.iter().all(|e| {
            let e = e.as_cmatrix();
            (0..self.k).all(|p| (0..self.k).all(|q| p == q || e.get(p, q).norm() == 0.0))
        })
    }

    fn check_point(&self, p: &NCPoint) -> Result<()> {
        if p.system() != self.name {
            return Err(Error::DimensionMismatch(format!(
                "point over `{}` used with system `{}`",
                p.system(),
                self.name
            )));
        }
        if p.coeffs().len() != self.m() {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coefficients, system `{}` has {}",
                p.coeffs().len(),
                self.name,
                self.m()
            )));
        }
        Ok(())
    }

    /// `Σ_j E_j ⊗ A_j` as an `nk × nk` matrix: a `k×k` grid of `n×n` blocks with block
    /// `(p, q) = Σ_j (E_j)_{pq}·A_j`.
    pub fn realize(&self, p: &NCPoint) -> Result<CMatrix> {
        self.check_point(p)?;
        let n = p.level();
        let mut out = CMatrix::zeros(n * self.k);
        for (e, a) in self.basis.iter().zip(p.coeffs()) {
            let e = e.as_cmatrix();
            for bp in 0..self.k {
                for bq in 0..self.k {
                    let w = e.get(bp, bq);
                    if w.norm() == 0.0 {
                        continue;
                    }
                    for i in 0..n {
                        for j in 0..n {
                            let (r, c) = (bp * n + i, bq * n + j);
                            out.set(r, c, out.get(r, c) + w * a.get(i, j));
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Least-squares coordinates of `m` (orthogonal projection onto the realization image),
    /// without a residual check.
    pub fn project(&self, m: &CMatrix, n: usize) -> Result<NCPoint> {
        if n == 0 || m.n() != n * self.k {
            return Err(Error::DimensionMismatch(format!(
                "matrix of side {} cannot be a level-{n} point over `{}` (k = {})",
                m.n(),
                self.name,
                self.k
            )));
        }
        let coeffs = self
            .dual
            .iter()
            .map(|d| {
                let mut a = CMatrix::zeros(n);
                for bp in 0..self.k {
                    for bq in 0..self.k {
                        let w = d.get(bp, bq).conj();
                        if w.norm() == 0.0 {
                            continue;
                        }
                        for i in 0..n {
                            for j in 0..n {
                                a.set(i, j, a.get(i, j) + w * m.get(bp * n + i, bq * n + j));
                            }
                        }
                    }
                }
                a
            })
            .collect();
        Ok(NCPoint::new_unchecked(self.name.clone(), n, coeffs))
    }

    /// Inverse of [`realize`](Self::realize); fails with [`Error::NotInImage`] when `m` is not of
    /// the form `Σ E_j ⊗ A_j`.
    pub fn decode(&self, m: &CMatrix, n: usize) -> Result<NCPoint> {
        let p = self.project(m, n)?;
        let back = self.realize(&p)?;
        let scale = 1.0 + m.op_norm();
        let residual = (&back - m).op_norm();
        if residual > DECODE_TOL * scale {
            return Err(Error::NotInImage { system: self.name.clone(), residual });
        }
        Ok(p)
    }

    /// The point realizing `I_{nk}`.
    pub fn identity_point(&self, n: usize) -> NCPoint {
        let coeffs = self.id_coeffs.iter().map(|&c| CMatrix::identity(n).scale_real(c)).collect();
        NCPoint::new_unchecked(self.name.clone(), n, coeffs)
    }

    pub fn zero_point(&self, n: usize) -> NCPoint {
        NCPoint::new_unchecked(self.name.clone(), n, vec![CMatrix::zeros(n); self.m()])
    }

    /// A point over this system, validating coefficient count and sizes.
    pub fn point(&self, coeffs: Vec<CMatrix>) -> Result<NCPoint> {
        let n = coeffs.first().map(CMatrix::n).unwrap_or(0);
        let p = NCPoint::new(self.name.clone(), n, coeffs)?;
        self.check_point(&p)?;
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct SystemJson {
    k: usize,
    basis: Vec<CMatrix>,
    id_coeffs: Vec<f64>,
    name: String,
}

impl Serialize for OpSysBasis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SystemJson {
            k: self.k,
            basis: self.basis.iter().map(|e| e.as_cmatrix().clone()).collect(),
            id_coeffs: self.id_coeffs.clone(),
            name: self.name.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for OpSysBasis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SystemJson::deserialize(d)?;
        if raw.basis.iter().any(|e| e.n() != raw.k) {
            return Err(D::Error::custom(format!("basis elements must be {0}x{0}", raw.k)));
        }
        OpSysBasis::new(raw.name, raw.basis, raw.id_coeffs).map_err(D::Error::custom)
    }
}

/// Index map `π` with `realize(P ⊕ Q)[r, c] = (realize(P) ⊕ realize(Q))[π[r], π[c]]` for
/// points at levels `n` and `m` over a system with ambient size `k`.
///
/// Rows of `realize(P ⊕ Q)` are ordered (block `p`, summand, inner index); rows of the plain
/// direct sum are ordered (summand, block `p`, inner index).
pub fn shuffle_permutation(k: usize, n: usize, m: usize) -> Vec<usize> {
    let mut perm = Vec::with_capacity(k * (n + m));
    for p in 0..k {
        for i in 0..n + m {
            perm.push(if i < n { p * n + i } else { k * n + p * m + (i - n) });
        }
    }
    perm
}

/// `out[r, c] = a[perm[r], perm[c]]`
pub fn permute(a: &CMatrix, perm: &[usize]) -> CMatrix {
    CMatrix::from_fn(perm.len(), |r, c| a.get(perm[r], perm[c]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, MatrixKind, Rng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_point(sys: &OpSysBasis, n: usize, rng: &mut Rng) -> NCPoint {
        sys.point((0..sys.m()).map(|_| random_matrix(MatrixKind::Ginibre, n, rng)).collect()).unwrap()
    }

    #[test]
    fn builtin_identity_coefficients() {
        let s = OpSysBasis::scalar();
        assert_eq!((s.m(), s.id_coeffs()), (1, &[1.0][..]));
        let d = OpSysBasis::builtin("diagonal(3)").unwrap();
        assert_eq!(d.id_coeffs(), &[1.0, 1.0, 1.0]);
        let b = OpSysBasis::builtin("block2").unwrap();
        assert_eq!((b.m(), b.id_coeffs()), (4, &[1.0, 1.0, 0.0, 0.0][..]));
        assert!(OpSysBasis::builtin("quaternion").is_err());
        assert!(OpSysBasis::builtin("diagonal(0)").is_err());
    }

    #[test]
    fn realize_scalar_is_identity_embedding() {
        let s = OpSysBasis::scalar();
        let a = random_matrix(MatrixKind::Ginibre, 3, &mut Rng::new(1, 0));
        let p = s.point(vec![a.clone()]).unwrap();
        assert_eq!(s.realize(&p).unwrap(), a);
        assert_eq!(s.decode(&a, 3).unwrap(), p);
    }

    #[test]
    fn realize_diagonal_is_block_diagonal() {
        let d = OpSysBasis::diagonal(2).unwrap();
        let mut rng = Rng::new(2, 0);
        let (a1, a2) =
            (random_matrix(MatrixKind::Ginibre, 2, &mut rng), random_matrix(MatrixKind::Ginibre, 2, &mut rng));
        let p = d.point(vec![a1.clone(), a2.clone()]).unwrap();
        assert_eq!(d.realize(&p).unwrap(), a1.direct_sum(&a2));
    }

    #[test]
    fn realize_block2_level_one() {
        let b = OpSysBasis::block2();
        let (a1, a2, a3, a4) = (c(1.5, 0.2), c(-0.5, 1.0), c(0.25, -2.0), c(3.0, 0.5));
        let p = b.point([a1, a2, a3, a4].iter().map(|&z| CMatrix::scalar(z)).collect()).unwrap();
        let want = CMatrix::from_rows(&[vec![a1, a3 + c(0.0, 1.0) * a4], vec![a3 - c(0.0, 1.0) * a4, a2]]).unwrap();
        assert!(b.realize(&p).unwrap().max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn decode_block2_example() {
        let b = OpSysBasis::block2();
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let p = b.decode(&m, 1).unwrap();
        let got: Vec<C64> = p.coeffs().iter().map(|a| a.get(0, 0)).collect();
        let want = [c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() < 1e-15, "{got:?}");
        }
    }

    #[test]
    fn decode_rejects_off_image() {
        let d = OpSysBasis::diagonal(2).unwrap();
        let full = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(d.decode(&full, 1), Err(Error::NotInImage { .. })));
        assert!(matches!(d.decode(&full, 2), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn decode_realize_round_trip() {
        let mut rng = Rng::new(3, 0);
        for sys in [OpSysBasis::scalar(), OpSysBasis::diagonal(3).unwrap(), OpSysBasis::block2()] {
            for _ in 0..500 {
                let n = rng.int_in(1, 4);
                let p = random_point(&sys, n, &mut rng);
                let m = sys.realize(&p).unwrap();
                let q = sys.decode(&m, n).unwrap();
                for (a, b) in p.coeffs().iter().zip(q.coeffs()) {
                    assert!(a.max_abs_diff(b) <= 1e-12 * (1.0 + a.max_abs()));
                }
                let back = sys.realize(&q).unwrap();
                assert!(back.max_abs_diff(&m) <= 1e-12 * (1.0 + m.max_abs()));
            }
        }
    }

    #[test]
    fn shuffle_identity_is_exact() {
        let mut rng = Rng::new(4, 0);
        for sys in [
            OpSysBasis::scalar(),
            OpSysBasis::diagonal(2).unwrap(),
            OpSysBasis::diagonal(3).unwrap(),
            OpSysBasis::block2(),
        ] {
            for _ in 0..200 {
                let (n, m) = (rng.int_in(1, 3), rng.int_in(1, 3));
                let p = random_point(&sys, n, &mut rng);
                let q = random_point(&sys, m, &mut rng);
                let lhs = sys.realize(&p.direct_sum(&q).unwrap()).unwrap();
                let plain = sys.realize(&p).unwrap().direct_sum(&sys.realize(&q).unwrap());
                let rhs = permute(&plain, &shuffle_permutation(sys.k(), n, m));
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn user_system_validation() {
        let e = CMatrix::identity(2);
        let dup = OpSysBasis::new("dup", vec![e.clone(), e.clone()], vec![1.0, 0.0]);
        assert!(matches!(dup, Err(Error::InvalidSystem(_))));
        let skew = CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(OpSysBasis::new("skew", vec![e.clone(), skew], vec![1.0, 0.0]).is_err());
        assert!(OpSysBasis::new("noid", vec![e.scale_real(2.0)], vec![1.0]).is_err());
        let ok = OpSysBasis::new("half", vec![e.scale_real(2.0)], vec![0.5]).unwrap();
        let json = serde_json::to_string(&ok).unwrap();
        let back: OpSysBasis = serde_json::from_str(&json).unwrap();
        assert_eq!(back, ok);
    }
}
