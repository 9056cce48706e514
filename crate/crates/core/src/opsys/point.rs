use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{imag_part, CMatrix, HMatrix, C64, MAX_COND, TOL_HERM};

/// A point of `M_n ⊗ R`: one `n×n` complex coefficient per basis element of the system `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NCPoint {
    system: String,
    level: usize,
    coeffs: Vec<CMatrix>,
}

impl NCPoint {
    pub fn new(system: impl Into<String>, level: usize, coeffs: Vec<CMatrix>) -> Result<Self> {
        if level == 0 {
            return Err(Error::DimensionMismatch("level must be at least 1".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::DimensionMismatch("point has no coefficients".into()));
        }
        if let Some(j) = coeffs.iter().position(|a| a.n() != level) {
            return Err(Error::DimensionMismatch(format!(
                "coefficient {} is {}x{}, expected level {level}",
                j + 1,
                coeffs[j].n(),
                coeffs[j].n()
            )));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::Invalid("point coefficients must be finite".into()));
        }
        Ok(NCPoint { system: system.into(), level, coeffs })
    }

    pub(crate) fn new_unchecked(system: String, level: usize, coeffs: Vec<CMatrix>) -> Self {
        debug_assert!(coeffs.iter().all(|a| a.n() == level));
        NCPoint { system, level, coeffs }
    }

    pub fn system(&self) -> &str {
        &self.system
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coeffs(&self) -> &[CMatrix] {
        &self.coeffs
    }

    fn same_shape(&self, other: &NCPoint) -> Result<()> {
        if self.system != other.system || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::DimensionMismatch(format!(
                "points over `{}` and `{}` cannot be combined",
                self.system, other.system
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &NCPoint, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<NCPoint> {
        self.same_shape(other)?;
        if self.level != other.level {
            return Err(Error::DimensionMismatch(format!("levels {} and {} differ", self.level, other.level)));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect();
        Ok(NCPoint::new_unchecked(self.system.clone(), self.level, coeffs))
    }

    pub fn map(&self, f: impl Fn(&CMatrix) -> CMatrix) -> NCPoint {
        NCPoint::new_unchecked(self.system.clone(), self.level, self.coeffs.iter().map(f).collect())
    }

    pub fn add(&self, other: &NCPoint) -> Result<NCPoint> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &NCPoint) -> Result<NCPoint> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: C64) -> NCPoint {
        self.map(|a| a.scale(c))
    }

    /// Every coefficient Hermitian; equivalent to a Hermitian realization.
    pub fn is_hermitian(&self) -> bool {
        self.coeffs.iter().all(|a| a.is_hermitian(TOL_HERM))
    }

    /// Coefficientwise `(A_j − A_j*)/2i`.
    pub fn im_point(&self) -> NCPoint {
        self.map(|a| imag_part(a).into_cmatrix())
    }

    /// Coefficientwise `(A_j + A_j*)/2`.
    pub fn re_point(&self) -> NCPoint {
        self.map(|a| HMatrix::symmetrize(a).into_cmatrix())
    }

    /// Coefficientwise `A_j ⊕ B_j`, a point at level `n + m`.
    pub fn direct_sum(&self, other: &NCPoint) -> Result<NCPoint> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.direct_sum(b)).collect();
        Ok(NCPoint::new_unchecked(self.system.clone(), self.level + other.level, coeffs))
    }

    /// Coefficientwise `S⁻¹·A_j·S`.
    pub fn conjugate(&self, s: &CMatrix) -> Result<NCPoint> {
        if s.n() != self.level {
            return Err(Error::DimensionMismatch(format!(
                "similarity is {0}x{0}, point level is {1}",
                s.n(),
                self.level
            )));
        }
        let s_inv = s.inverse(MAX_COND)?;
        Ok(self.map(|a| a.similarity(s, &s_inv)))
    }

    /// Coefficientwise `U*·A_j·U` for a unitary `U` (no inversion).
    pub fn unitary_conjugate(&self, u: &CMatrix) -> NCPoint {
        let ua = u.adjoint();
        self.map(|a| &(&ua * a) * u)
    }
}

#[derive(Deserialize)]
struct PointJson {
    system: String,
    level: usize,
    coeffs: Vec<CMatrix>,
}

impl<'de> Deserialize<'de> for NCPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = PointJson::deserialize(d)?;
        NCPoint::new(raw.system, raw.level, raw.coeffs).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, MatrixKind, Rng, I};
    use crate::opsys::OpSysBasis;

    #[test]
    fn point_json_layout() {
        let p = OpSysBasis::scalar().point(vec![CMatrix::zeros(1)]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"system":"scalar","level":1,"coeffs":[{"n":1,"entries":[[[0.0,0.0]]]}]}"#);
        assert_eq!(serde_json::from_str::<NCPoint>(&s).unwrap(), p);
        let bad = r#"{"system":"scalar","level":2,"coeffs":[{"n":1,"entries":[[[0.0,0.0]]]}]}"#;
        assert!(serde_json::from_str::<NCPoint>(bad).is_err());
    }

    #[test]
    fn hermitian_point_routes_agree() {
        let b = OpSysBasis::block2();
        let mut rng = Rng::new(11, 0);
        for trial in 0..500 {
            let n = rng.int_in(1, 3);
            let coeffs: Vec<CMatrix> = (0..4)
                .map(|j| {
                    if trial % 2 == 0 || j != 1 {
                        random_matrix(MatrixKind::Hermitian, n, &mut rng)
                    } else {
                        random_matrix(MatrixKind::Ginibre, n, &mut rng)
                    }
                })
                .collect();
            let p = b.point(coeffs).unwrap();
            let realized = b.realize(&p).unwrap();
            assert_eq!(p.is_hermitian(), realized.is_hermitian(TOL_HERM), "trial {trial}");
        }
        let s = OpSysBasis::scalar();
        assert!(!s.point(vec![CMatrix::scalar(I)]).unwrap().is_hermitian());
    }

    #[test]
    fn im_point_matches_imag_part_of_realization() {
        let mut rng = Rng::new(12, 0);
        for sys in [OpSysBasis::scalar(), OpSysBasis::diagonal(2).unwrap(), OpSysBasis::block2()] {
            for _ in 0..1000 {
                let n = rng.int_in(1, 3);
                let p =
                    sys.point((0..sys.m()).map(|_| random_matrix(MatrixKind::Ginibre, n, &mut rng)).collect()).unwrap();
                let lhs = sys.realize(&p.im_point()).unwrap();
                let rhs = imag_part(&sys.realize(&p).unwrap()).into_cmatrix();
                assert!(lhs.max_abs_diff(&rhs) <= 1e-14 * (1.0 + rhs.max_abs()));
            }
        }
    }

    #[test]
    fn im_point_examples() {
        let mut rng = Rng::new(13, 0);
        let h = OpSysBasis::block2()
            .point((0..4).map(|_| random_matrix(MatrixKind::Hermitian, 2, &mut rng)).collect())
            .unwrap();
        assert!(h.im_point().coeffs().iter().all(|a| a.max_abs() == 0.0));
        let ih = h.scale(I).im_point();
        for (a, b) in ih.coeffs().iter().zip(h.coeffs()) {
            assert!(a.max_abs_diff(b) < 1e-15);
        }
    }

    #[test]
    fn conjugation_examples() {
        let sys = OpSysBasis::block2();
        let mut rng = Rng::new(14, 0);
        let p = sys.point((0..4).map(|_| random_matrix(MatrixKind::Hermitian, 3, &mut rng)).collect()).unwrap();
        assert_eq!(p.conjugate(&CMatrix::identity(3)).unwrap(), p);

        let u = random_matrix(MatrixKind::Unitary, 3, &mut rng);
        assert!(p.conjugate(&u).unwrap().is_hermitian());

        // realize(S⁻¹PS) = (I_k ⊗ S)⁻¹·realize(P)·(I_k ⊗ S)
        let s = random_matrix(MatrixKind::Ginibre, 3, &mut rng);
        let lifted = CMatrix::from_fn(6, |r, c| if r / 3 == c / 3 { s.get(r % 3, c % 3) } else { C64::new(0.0, 0.0) });
        let lhs = sys.realize(&p.conjugate(&s).unwrap()).unwrap();
        let rhs = sys.realize(&p).unwrap().similarity(&lifted, &lifted.inverse(MAX_COND).unwrap());
        assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * (1.0 + rhs.max_abs()));

        let singular = CMatrix::from_real_rows(&[&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(matches!(p.conjugate(&singular), Err(Error::Singular { .. })));
    }

    #[test]
    fn direct_sum_levels() {
        let s = OpSysBasis::scalar();
        let a = s.point(vec![CMatrix::scalar(C64::new(2.0, 0.0))]).unwrap();
        let b = s.point(vec![CMatrix::scalar(C64::new(3.0, 0.0))]).unwrap();
        let ab = a.direct_sum(&b).unwrap();
        assert_eq!(ab.level(), 2);
        assert_eq!(ab.coeffs()[0], CMatrix::diag_real(&[2.0, 3.0]));
        let other = OpSysBasis::block2().identity_point(1);
        assert!(a.direct_sum(&other).is_err());
    }
}
