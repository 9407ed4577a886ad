//! Recursive-descent parser for the expression grammar.

use super::ast::{BinaryOp, Expr, Function};
use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("unknown identifier `{name}` at byte {position}")]
    UnknownIdentifier { name: String, position: usize },
    #[error("unknown function `{name}` at byte {position}")]
    UnknownFunction { name: String, position: usize },
    #[error("expected operand at byte {position}")]
    ExpectedOperand { position: usize },
    #[error("expected operand at end of input")]
    UnexpectedEnd,
    #[error("unbalanced parenthesis at byte {position}")]
    UnbalancedParen { position: usize },
    #[error("unexpected token `{lexeme}` at byte {position}")]
    UnexpectedToken { lexeme: String, position: usize },
}

/// Parse a token sequence against an ordered list of coordinate names.
///
/// Bare identifiers must be coordinate names; identifiers followed by `(`
/// must be builtin function names.
pub fn parse(tokens: &[Token], coordinates: &[&str]) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        tokens,
        pos: 0,
        coordinates,
    };
    let expr = parser.expr()?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::UnexpectedToken {
            lexeme: tok.lexeme.clone(),
            position: tok.position,
        });
    }
    Ok(expr)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    coordinates: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let tok = self.tokens.get(self.pos);
        self.pos += 1;
        tok
    }

    fn peek_operator(&self, ops: &[&str]) -> Option<&'a Token> {
        let tok = self.peek()?;
        if tok.kind == TokenKind::Operator && ops.contains(&tok.lexeme.as_str()) {
            Some(tok)
        } else {
            None
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(tok) = self.peek_operator(&["+", "-"]) {
            let op = if tok.lexeme == "+" {
                BinaryOp::Add
            } else {
                BinaryOp::Sub
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(tok) = self.peek_operator(&["*", "/"]) {
            let op = if tok.lexeme == "*" {
                BinaryOp::Mul
            } else {
                BinaryOp::Div
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.peek_operator(&["-"]).is_some() {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Negate(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek_operator(&["^"]).is_some() {
            self.bump();
            // Right-associative: the exponent is a full factor.
            let exponent = self.factor()?;
            return Ok(Expr::binary(BinaryOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let tok = match self.bump() {
            Some(tok) => tok,
            None => return Err(ParseError::UnexpectedEnd),
        };
        match tok.kind {
            TokenKind::Number => {
                // Lexeme matches the numeric grammar, so this cannot fail.
                let value: f64 = tok.lexeme.parse().expect("lexer-validated number");
                Ok(Expr::Constant(value))
            }
            TokenKind::Identifier => {
                let is_call = self
                    .peek()
                    .map(|t| t.kind == TokenKind::LeftParen)
                    .unwrap_or(false);
                if is_call {
                    let function = Function::from_name(&tok.lexeme).ok_or_else(|| {
                        ParseError::UnknownFunction {
                            name: tok.lexeme.clone(),
                            position: tok.position,
                        }
                    })?;
                    let open = self.bump().expect("peeked left paren");
                    let argument = self.expr()?;
                    match self.bump() {
                        Some(t) if t.kind == TokenKind::RightParen => {
                            Ok(Expr::call(function, argument))
                        }
                        _ => Err(ParseError::UnbalancedParen {
                            position: open.position,
                        }),
                    }
                } else {
                    let index = self
                        .coordinates
                        .iter()
                        .position(|c| *c == tok.lexeme)
                        .ok_or_else(|| ParseError::UnknownIdentifier {
                            name: tok.lexeme.clone(),
                            position: tok.position,
                        })?;
                    Ok(Expr::Variable(index))
                }
            }
            TokenKind::LeftParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(t) if t.kind == TokenKind::RightParen => Ok(inner),
                    _ => Err(ParseError::UnbalancedParen {
                        position: tok.position,
                    }),
                }
            }
            _ => Err(ParseError::ExpectedOperand {
                position: tok.position,
            }),
        }
    }
}
