//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr    := term { ("+"|"-") term } ;
//! term    := unary { "*" unary } ;
//! unary   := "-" unary | postfix ;
//! postfix := atom [ "^-1" ] ;
//! atom    := var | scalar | "(" expr ")" | "sqrt" "(" expr ")" | "inv" "(" expr ")" ;
//! var     := "X" digits | "X[" digits "," digits "]" ;
//! scalar  := decimal | decimal "i" | "i" ;
//! ```
//!
//! Whitespace between tokens is ignored. Offsets in errors are byte offsets into the input.

use super::ast::FreeExpr;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::opsys::OpSysBasis;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    X,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Plus,
    Minus,
    Star,
    Caret,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::X => "`X`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'[' => Tok::LBracket,
            b']' => Tok::RBracket,
            b',' => Tok::Comma,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'X' => Tok::X,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s = &text[start..i];
                if s == "." {
                    return Err(Error::Syntax { offset: start, message: "expected digits".into() });
                }
                out.push((Tok::Num(s.to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphabetic() && bytes[i] != b'X' {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(Error::Syntax { offset: start, message: format!("unexpected character `{ch}`") });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn index(&mut self) -> Result<usize> {
        match self.peek().clone() {
            Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                let at = self.offset();
                self.bump();
                match s.parse::<usize>() {
                    Ok(0) | Err(_) => {
                        Err(Error::Syntax { offset: at, message: format!("index `{s}` must be a positive integer") })
                    }
                    Ok(v) => Ok(v),
                }
            }
            _ => self.fail("digits"),
        }
    }

    fn expr(&mut self) -> Result<FreeExpr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = FreeExpr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = FreeExpr::sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<FreeExpr> {
        let (mut lhs, mut bare) = self.unary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            let (rhs, _) = self.unary()?;
            lhs = match lhs {
                FreeExpr::Const(c) if bare => FreeExpr::ScalarMul(c, Box::new(rhs)),
                lhs => FreeExpr::mul(lhs, rhs),
            };
            bare = false;
        }
        Ok(lhs)
    }

    /// Returns the parsed node and whether it is a bare scalar literal.
    fn unary(&mut self) -> Result<(FreeExpr, bool)> {
        if *self.peek() == Tok::Minus {
            self.bump();
            let (inner, _) = self.unary()?;
            return Ok((FreeExpr::neg(inner), false));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<(FreeExpr, bool)> {
        let (atom, bare) = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            self.expect(Tok::Minus, "`-1` after `^`")?;
            match self.peek() {
                Tok::Num(s) if s == "1" => {
                    self.bump();
                }
                _ => return self.fail("`1` after `^-`"),
            }
            return Ok((FreeExpr::inv(atom), false));
        }
        Ok((atom, bare))
    }

    fn call(&mut self) -> Result<FreeExpr> {
        self.expect(Tok::LParen, "`(`")?;
        let e = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(e)
    }

    fn atom(&mut self) -> Result<(FreeExpr, bool)> {
        match self.peek().clone() {
            Tok::X => {
                self.bump();
                match self.peek() {
                    Tok::LBracket => {
                        self.bump();
                        let p = self.index()?;
                        self.expect(Tok::Comma, "`,`")?;
                        let q = self.index()?;
                        self.expect(Tok::RBracket, "`]`")?;
                        Ok((FreeExpr::Block(p, q), false))
                    }
                    _ => Ok((FreeExpr::Var(self.index()?), false)),
                }
            }
            Tok::Num(s) => {
                let at = self.offset();
                self.bump();
                let v: f64 =
                    s.parse().map_err(|_| Error::Syntax { offset: at, message: format!("malformed number `{s}`") })?;
                if matches!(self.peek(), Tok::Ident(id) if id == "i") {
                    self.bump();
                    Ok((FreeExpr::Const(C64::new(0.0, v)), true))
                } else {
                    Ok((FreeExpr::Const(C64::new(v, 0.0)), true))
                }
            }
            Tok::Ident(id) => match id.as_str() {
                "i" => {
                    self.bump();
                    Ok((FreeExpr::Const(C64::new(0.0, 1.0)), true))
                }
                "sqrt" => {
                    self.bump();
                    Ok((FreeExpr::sqrt(self.call()?), false))
                }
                "inv" => {
                    self.bump();
                    Ok((FreeExpr::inv(self.call()?), false))
                }
                _ => self.fail("a variable, number, `sqrt` or `inv`"),
            },
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok((e, false))
            }
            _ => self.fail("a variable, number, `(`, `sqrt` or `inv`"),
        }
    }
}

/// Parses `text` without checking variable ranges.
pub fn parse_unchecked(text: &str) -> Result<FreeExpr> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("an operator or end of input");
    }
    Ok(e)
}

/// Parses `text` and checks `Var` indices against the basis size and `Block` indices against
/// the ambient size of `input`.
pub fn parse(text: &str, input: &OpSysBasis) -> Result<FreeExpr> {
    let e = parse_unchecked(text)?;
    check_ranges(&e, input)?;
    Ok(e)
}

pub fn check_ranges(e: &FreeExpr, input: &OpSysBasis) -> Result<()> {
    let (var, block) = e.max_indices();
    if let Some(j) = var.filter(|&j| j > input.m()) {
        return Err(Error::VariableRange {
            name: format!("X{j}"),
            message: format!("system `{}` has {} coefficients", input.name(), input.m()),
        });
    }
    if let Some(p) = block.filter(|&p| p > input.k()) {
        return Err(Error::VariableRange {
            name: format!("block index {p}"),
            message: format!("system `{}` realizes as a {}x{} block grid", input.name(), input.k(), input.k()),
        });
    }
    Ok(())
}
