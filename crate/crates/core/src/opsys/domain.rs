use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::point::NCPoint;
use super::system::OpSysBasis;
use crate::error::{Error, Result};
use crate::linalg::{herm_eigenvalues, imag_part, psd_margin, HMatrix};

/// Built-in free domains. Each is closed under direct sums and unitary conjugation, and every
/// level slice is convex and open.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainKind {
    Full,
    /// Hermitian points with positive definite realization.
    PdCone,
    /// Hermitian points whose realization has spectrum in `(lo, hi)`; either end may be infinite.
    Interval {
        lo: f64,
        hi: f64,
    },
    /// `Π(R)`: points with positive definite `Im`.
    HalfPlane,
}

impl DomainKind {
    /// Interval of admissible realization eigenvalues, `None` for the half-plane.
    pub fn spectral_window(&self) -> Option<(f64, f64)> {
        match *self {
            DomainKind::Full => Some((f64::NEG_INFINITY, f64::INFINITY)),
            DomainKind::PdCone => Some((0.0, f64::INFINITY)),
            DomainKind::Interval { lo, hi } => Some((lo, hi)),
            DomainKind::HalfPlane => None,
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainKind::Full => f.write_str("full"),
            DomainKind::PdCone => f.write_str("pd_cone"),
            DomainKind::Interval { lo, hi } => write!(f, "interval({lo},{hi})"),
            DomainKind::HalfPlane => f.write_str("half_plane"),
        }
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "full" => Ok(DomainKind::Full),
            "pd_cone" | "pd" => Ok(DomainKind::PdCone),
            "half_plane" => Ok(DomainKind::HalfPlane),
            other => {
                let parsed = other
                    .strip_prefix("interval(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.split_once(','))
                    .and_then(|(a, b)| Some((parse_bound(a)?, parse_bound(b)?)));
                match parsed {
                    Some((lo, hi)) if lo < hi => Ok(DomainKind::Interval { lo, hi }),
                    _ => Err(Error::Unknown { kind: "domain", name: s.to_string() }),
                }
            }
        }
    }
}

fn parse_bound(s: &str) -> Option<f64> {
    match s {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok().filter(|x: &f64| x.is_finite()),
    }
}

impl Serialize for DomainKind {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DomainKind {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// A free domain over a named system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub system: String,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, system: &OpSysBasis) -> Self {
        DomainSpec { kind, system: system.name().to_string() }
    }

    pub fn pd_cone(system: &OpSysBasis) -> Self {
        Self::new(DomainKind::PdCone, system)
    }

    pub fn half_plane(system: &OpSysBasis) -> Self {
        Self::new(DomainKind::HalfPlane, system)
    }
}

/// Membership with the open boundary shrunk by `tol`.
pub fn in_domain(sys: &OpSysBasis, p: &NCPoint, d: &DomainSpec, tol: f64) -> bool {
    if p.system() != d.system || p.system() != sys.name() {
        return false;
    }
    let Ok(m) = sys.realize(p) else { return false };
    match d.kind {
        DomainKind::Full => true,
        DomainKind::PdCone => p.is_hermitian() && psd_margin(&HMatrix::symmetrize(&m)).is_ok_and(|mg| mg > tol),
        DomainKind::Interval { lo, hi } => {
            p.is_hermitian()
                && herm_eigenvalues(&HMatrix::symmetrize(&m))
                    .is_ok_and(|v| v[0] > lo + tol && v[v.len() - 1] < hi - tol)
        }
        DomainKind::HalfPlane => psd_margin(&imag_part(&m)).is_ok_and(|mg| mg > tol),
    }
}

/// Smallest eigenvalue of `realize(Q) − realize(P)`.
pub fn order_margin(sys: &OpSysBasis, p: &NCPoint, q: &NCPoint) -> Result<f64> {
    if p.level() != q.level() {
        return Err(Error::DimensionMismatch(format!("levels {} and {} differ", p.level(), q.level())));
    }
    if !p.is_hermitian() || !q.is_hermitian() {
        return Err(Error::Invalid("order is only defined between Hermitian points".into()));
    }
    let diff = &sys.realize(q)? - &sys.realize(p)?;
    psd_margin(&HMatrix::symmetrize(&diff))
}

/// `P ≤ Q`: `realize(Q) − realize(P)` is PSD up to `tol·(1+‖realize(Q−P)‖)`.
pub fn order_leq(sys: &OpSysBasis, p: &NCPoint, q: &NCPoint, tol: f64) -> Result<bool> {
    let margin = order_margin(sys, p, q)?;
    let diff = &sys.realize(q)? - &sys.realize(p)?;
    Ok(margin >= -tol * (1.0 + diff.op_norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, CMatrix, MatrixKind, Rng, I};

    #[test]
    fn parse_and_print_kinds() {
        for s in ["full", "pd_cone", "half_plane", "interval(0,1)", "interval(-inf,2.5)"] {
            let k: DomainKind = s.parse().unwrap();
            assert_eq!(k.to_string().parse::<DomainKind>().unwrap(), k);
        }
        assert!("interval(2,1)".parse::<DomainKind>().is_err());
        assert!("ball".parse::<DomainKind>().is_err());
    }

    #[test]
    fn membership_examples() {
        let sys = OpSysBasis::block2();
        let pd = DomainSpec::pd_cone(&sys);
        assert!(in_domain(&sys, &sys.identity_point(2), &pd, 0.0));
        assert!(!in_domain(&sys, &sys.zero_point(2), &pd, 0.0));
        let hp = DomainSpec::half_plane(&sys);
        assert!(in_domain(&sys, &sys.identity_point(2).scale(I), &hp, 0.0));
        assert!(!in_domain(&sys, &sys.identity_point(2), &hp, 0.0));
        let full = DomainSpec::new(DomainKind::Full, &sys);
        assert!(in_domain(&sys, &sys.zero_point(3), &full, 0.0));
        let unit = DomainSpec::new(DomainKind::Interval { lo: 0.0, hi: 1.0 }, &sys);
        assert!(in_domain(&sys, &sys.identity_point(1).scale(0.5.into()), &unit, 1e-9));
        assert!(!in_domain(&sys, &sys.identity_point(1), &unit, 1e-9));
    }

    #[test]
    fn order_examples() {
        let sys = OpSysBasis::block2();
        assert!(order_leq(&sys, &sys.zero_point(2), &sys.identity_point(2), 0.0).unwrap());
        let p = sys.point([1.0, 1.0, 0.0, 0.0].iter().map(|&x| CMatrix::diag_real(&[x])).collect()).unwrap();
        let q = sys.point([2.0, 1.0, 0.0, 0.0].iter().map(|&x| CMatrix::diag_real(&[x])).collect()).unwrap();
        assert!(order_leq(&sys, &p, &q, 0.0).unwrap());
        assert_eq!(order_margin(&sys, &p, &q).unwrap(), 0.0);
        assert!(!order_leq(&sys, &q, &p, 1e-8).unwrap());
    }

    #[test]
    fn diagonal_order_is_coordinatewise() {
        let sys = OpSysBasis::diagonal(2).unwrap();
        let mut rng = Rng::new(21, 0);
        for _ in 0..200 {
            let n = rng.int_in(1, 3);
            let herm = |rng: &mut Rng| random_matrix(MatrixKind::Hermitian, n, rng);
            let p = sys.point(vec![herm(&mut rng), herm(&mut rng)]).unwrap();
            // push one coordinate up by a PSD amount so that both outcomes occur
            let up = random_matrix(MatrixKind::Psd, n, &mut rng);
            let second = if rng.uniform() < 0.5 {
                random_matrix(MatrixKind::Psd, n, &mut rng)
            } else {
                herm(&mut rng).scale_real(0.01)
            };
            let q = sys.point(vec![&p.coeffs()[0] + &up, &p.coeffs()[1] + &second]).unwrap();
            let joint = order_leq(&sys, &p, &q, 1e-10).unwrap();
            let s = OpSysBasis::scalar();
            let coords = (0..2).all(|j| {
                let a = s.point(vec![p.coeffs()[j].clone()]).unwrap();
                let b = s.point(vec![q.coeffs()[j].clone()]).unwrap();
                order_leq(&s, &a, &b, 1e-10).unwrap()
            });
            assert_eq!(joint, coords);
        }
    }
}
