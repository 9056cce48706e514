use serde::Serialize;

use super::ast::FreeExpr;
use super::parser::{check_ranges, parse};
use crate::error::{Error, Result};
use crate::linalg::{principal_sqrt, CMatrix, MAX_COND};
use crate::opsys::{DomainKind, NCPoint, OpSysBasis};

/// How a function's output point is assembled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Body {
    /// One expression per coefficient of the output system.
    Coefficients(Vec<FreeExpr>),
    /// A `k×k` grid of blocks, decoded into the output system.
    Grid(Vec<Vec<FreeExpr>>),
}

/// A free function given by expressions over an input system, landing in an output system.
#[derive(Debug, Clone)]
pub struct FreeFunction {
    name: String,
    input: OpSysBasis,
    output: OpSysBasis,
    body: Body,
    domain: DomainKind,
}

impl FreeFunction {
    pub fn new(
        name: impl Into<String>,
        input: OpSysBasis,
        output: OpSysBasis,
        body: Body,
        domain: DomainKind,
    ) -> Result<Self> {
        let exprs: Vec<&FreeExpr> = match &body {
            Body::Coefficients(es) => {
                if es.len() != output.m() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} expressions for {} output coefficients",
                        es.len(),
                        output.m()
                    )));
                }
                es.iter().collect()
            }
            Body::Grid(rows) => {
                if rows.len() != output.k() || rows.iter().any(|r| r.len() != output.k()) {
                    return Err(Error::DimensionMismatch(format!("block grid must be {0}x{0}", output.k())));
                }
                rows.iter().flatten().collect()
            }
        };
        for e in exprs {
            check_ranges(e, &input)?;
        }
        Ok(FreeFunction { name: name.into(), input, output, body, domain })
    }

    /// A single expression into a one-coefficient output system.
    pub fn from_text(name: impl Into<String>, text: &str, input: OpSysBasis, output: OpSysBasis) -> Result<Self> {
        let e = parse(text, &input)?;
        FreeFunction::new(name, input, output, Body::Coefficients(vec![e]), DomainKind::PdCone)
    }

    pub fn with_domain(mut self, domain: DomainKind) -> Self {
        self.domain = domain;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self) -> &OpSysBasis {
        &self.input
    }

    pub fn output(&self) -> &OpSysBasis {
        &self.output
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    /// Natural domain used by the checks when none is given.
    pub fn domain(&self) -> DomainKind {
        self.domain
    }

    /// The expressions in print form, one per output slot.
    pub fn texts(&self) -> Vec<String> {
        match &self.body {
            Body::Coefficients(es) => es.iter().map(|e| e.to_string()).collect(),
            Body::Grid(rows) => rows.iter().flatten().map(|e| e.to_string()).collect(),
        }
    }

    fn uses_blocks(&self) -> bool {
        let has = |e: &FreeExpr| e.max_indices().1.is_some();
        match &self.body {
            Body::Coefficients(es) => es.iter().any(has),
            Body::Grid(rows) => rows.iter().flatten().any(has),
        }
    }

    /// `f(P)` as a point over the output system, at the level of `P`.
    pub fn eval(&self, p: &NCPoint) -> Result<NCPoint> {
        if p.system() != self.input.name() {
            return Err(Error::DimensionMismatch(format!(
                "`{}` takes points over `{}`, got `{}`",
                self.name,
                self.input.name(),
                p.system()
            )));
        }
        let n = p.level();
        let realized = if self.uses_blocks() { Some(self.input.realize(p)?) } else { None };
        let env = Env { coeffs: p.coeffs(), realized: realized.as_ref(), n };
        match &self.body {
            Body::Coefficients(es) => {
                let values = es.iter().map(|e| env.eval(e)).collect::<Result<Vec<_>>>()?;
                NCPoint::new(self.output.name(), n, values)
            }
            Body::Grid(rows) => {
                let k = self.output.k();
                let mut m = CMatrix::zeros(k * n);
                for (bp, row) in rows.iter().enumerate() {
                    for (bq, e) in row.iter().enumerate() {
                        m.set_block(bp, bq, &env.eval(e)?);
                    }
                }
                self.output.decode(&m, n)
            }
        }
    }

    /// `realize(f(P))` in the output system.
    pub fn eval_realized(&self, p: &NCPoint) -> Result<CMatrix> {
        self.output.realize(&self.eval(p)?)
    }
}

struct Env<'a> {
    coeffs: &'a [CMatrix],
    realized: Option<&'a CMatrix>,
    n: usize,
}

impl Env<'_> {
    fn eval(&self, e: &FreeExpr) -> Result<CMatrix> {
        Ok(match e {
            FreeExpr::Var(j) => self.coeffs[j - 1].clone(),
            FreeExpr::Block(p, q) => {
                let m = self.realized.expect("realization computed for block variables");
                m.block(p - 1, q - 1, self.n)
            }
            FreeExpr::Const(c) => CMatrix::identity(self.n).scale(*c),
            FreeExpr::Add(a, b) => self.eval(a)? + self.eval(b)?,
            FreeExpr::Sub(a, b) => self.eval(a)? - self.eval(b)?,
            FreeExpr::Mul(a, b) => self.eval(a)? * self.eval(b)?,
            FreeExpr::ScalarMul(c, a) => self.eval(a)?.scale(*c),
            FreeExpr::Neg(a) => -self.eval(a)?,
            FreeExpr::Inv(a) => self.eval(a)?.inverse(MAX_COND)?,
            FreeExpr::Sqrt(a) => principal_sqrt(&self.eval(a)?)?,
        })
    }
}
