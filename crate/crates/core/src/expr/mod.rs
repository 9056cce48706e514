//! The expression language for free functions: AST, parser, evaluator and the named catalog.

mod ast;
mod catalog;
mod eval;
mod parser;

pub use ast::FreeExpr;
pub use catalog::{catalog, catalog_names};
pub use eval::{Body, FreeFunction};
pub use parser::{check_ranges, parse, parse_unchecked};
