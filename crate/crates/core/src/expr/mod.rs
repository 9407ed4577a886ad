//! Arithmetic expression language over named chart coordinates.
//!
//! Expressions are lexed and parsed from text, evaluated at a point, and
//! differentiated exactly with forward-mode dual numbers. The grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! NUMBER := [0-9]+('.'[0-9]+)?([eE][+-]?[0-9]+)?
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! parses as `-(x^2)`. Identifiers are either chart coordinates or one of
//! the builtin functions `sin cos tan exp ln sqrt`. `#` starts a comment
//! running to the end of the line.

mod ast;
mod dual;
mod eval;
mod lexer;
mod parser;

pub use ast::{BinaryOp, Expr, Function};
pub use dual::Dual;
pub use eval::{eval, eval_dual, EvalError};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::{parse, ParseError};

/// Lex or parse failure from [`parse_source`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Tokenize and parse a source string against an ordered coordinate list.
pub fn parse_source(source: &str, coordinates: &[&str]) -> Result<Expr, ExprError> {
    let tokens = tokenize(source)?;
    Ok(parse(&tokens, coordinates)?)
}
