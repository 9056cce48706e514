use std::fmt;

use serde::Serialize;

use crate::linalg::C64;

/// A noncommutative expression over matrix variables.
///
/// `Var(j)` is coefficient `A_j` of the input point; `Block(p, q)` is block `(p, q)` of its
/// realization. Indices are 1-based as written. There is deliberately no adjoint node: a free
/// function evaluates the same formula off the Hermitian slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FreeExpr {
    Var(usize),
    Block(usize, usize),
    Const(C64),
    Add(Box<FreeExpr>, Box<FreeExpr>),
    Sub(Box<FreeExpr>, Box<FreeExpr>),
    Mul(Box<FreeExpr>, Box<FreeExpr>),
    /// A bare scalar literal times an expression, e.g. `2*X1`.
    ScalarMul(C64, Box<FreeExpr>),
    Neg(Box<FreeExpr>),
    Inv(Box<FreeExpr>),
    /// Principal square root.
    Sqrt(Box<FreeExpr>),
}

#[allow(clippy::should_implement_trait)]
impl FreeExpr {
    pub fn add(a: FreeExpr, b: FreeExpr) -> Self {
        FreeExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: FreeExpr, b: FreeExpr) -> Self {
        FreeExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: FreeExpr, b: FreeExpr) -> Self {
        FreeExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn neg(a: FreeExpr) -> Self {
        FreeExpr::Neg(Box::new(a))
    }

    pub fn inv(a: FreeExpr) -> Self {
        FreeExpr::Inv(Box::new(a))
    }

    pub fn sqrt(a: FreeExpr) -> Self {
        FreeExpr::Sqrt(Box::new(a))
    }

    pub fn depth(&self) -> usize {
        match self {
            FreeExpr::Var(_) | FreeExpr::Block(..) | FreeExpr::Const(_) => 1,
            FreeExpr::Add(a, b) | FreeExpr::Sub(a, b) | FreeExpr::Mul(a, b) => 1 + a.depth().max(b.depth()),
            FreeExpr::ScalarMul(_, a) | FreeExpr::Neg(a) | FreeExpr::Inv(a) | FreeExpr::Sqrt(a) => 1 + a.depth(),
        }
    }

    /// Largest `Var` index and largest `Block` index used, if any.
    pub fn max_indices(&self) -> (Option<usize>, Option<usize>) {
        fn join(a: Option<usize>, b: Option<usize>) -> Option<usize> {
            a.max(b)
        }
        match self {
            FreeExpr::Var(j) => (Some(*j), None),
            FreeExpr::Block(p, q) => (None, Some(*p.max(q))),
            FreeExpr::Const(_) => (None, None),
            FreeExpr::Add(a, b) | FreeExpr::Sub(a, b) | FreeExpr::Mul(a, b) => {
                let (va, ba) = a.max_indices();
                let (vb, bb) = b.max_indices();
                (join(va, vb), join(ba, bb))
            }
            FreeExpr::ScalarMul(_, a) | FreeExpr::Neg(a) | FreeExpr::Inv(a) | FreeExpr::Sqrt(a) => a.max_indices(),
        }
    }
}

// Binding strength used by the printer; mirrors the grammar levels.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;

fn write_scalar(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    match (c.re, c.im) {
        (re, im) if im == 0.0 && re >= 0.0 => write!(f, "{re}"),
        (re, im) if re == 0.0 && im > 0.0 => write!(f, "{im}i"),
        (re, 0.0) => write!(f, "(-{})", -re),
        (re, im) => write!(f, "({re} + {im}i)"),
    }
}

fn is_bare_scalar(c: C64) -> bool {
    (c.im == 0.0 && c.re >= 0.0) || (c.re == 0.0 && c.im > 0.0)
}

#[allow(clippy::should_implement_trait)]
impl FreeExpr {
    fn write_at(&self, f: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
        let own = match self {
            FreeExpr::Add(..) | FreeExpr::Sub(..) => SUM,
            FreeExpr::Mul(..) | FreeExpr::ScalarMul(..) => PRODUCT,
            FreeExpr::Neg(_) => UNARY,
            _ => u8::MAX,
        };
        let wrap = own < ctx;
        if wrap {
            f.write_str("(")?;
        }
        match self {
            FreeExpr::Var(j) => write!(f, "X{j}")?,
            FreeExpr::Block(p, q) => write!(f, "X[{p},{q}]")?,
            FreeExpr::Const(c) => write_scalar(f, *c)?,
            FreeExpr::Add(a, b) => {
                a.write_at(f, SUM)?;
                f.write_str(" + ")?;
                b.write_at(f, PRODUCT)?;
            }
            FreeExpr::Sub(a, b) => {
                a.write_at(f, SUM)?;
                f.write_str(" - ")?;
                b.write_at(f, PRODUCT)?;
            }
            FreeExpr::Mul(a, b) => {
                // a bare literal on the left would read back as a scalar multiple
                if matches!(**a, FreeExpr::Const(_)) {
                    f.write_str("(")?;
                    a.write_at(f, 0)?;
                    f.write_str(")")?;
                } else {
                    a.write_at(f, PRODUCT)?;
                }
                f.write_str("*")?;
                b.write_at(f, UNARY)?;
            }
            FreeExpr::ScalarMul(c, b) => {
                if is_bare_scalar(*c) {
                    write_scalar(f, *c)?;
                } else {
                    // not expressible as a bare literal; prints as a product
                    f.write_str("(")?;
                    write_scalar(f, *c)?;
                    f.write_str(")")?;
                }
                f.write_str("*")?;
                b.write_at(f, UNARY)?;
            }
            FreeExpr::Neg(a) => {
                f.write_str("-")?;
                a.write_at(f, UNARY)?;
            }
            FreeExpr::Inv(a) => {
                f.write_str("inv(")?;
                a.write_at(f, 0)?;
                f.write_str(")")?;
            }
            FreeExpr::Sqrt(a) => {
                f.write_str("sqrt(")?;
                a.write_at(f, 0)?;
                f.write_str(")")?;
            }
        }
        if wrap {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Prints in the input grammar; `parse(print(e)) == e` whenever every constant is a
/// non-negative real or a positive imaginary number.
impl fmt::Display for FreeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
