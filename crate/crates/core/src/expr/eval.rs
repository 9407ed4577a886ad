//! Plain and dual-number evaluation of expression trees.

use super::ast::{BinaryOp, Expr, Function};
use super::dual::Dual;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero in `{node}`")]
    DivisionByZero { node: String },
    #[error("logarithm of non-positive value in `{node}`")]
    LogDomain { node: String },
    #[error("square root of negative value in `{node}`")]
    SqrtDomain { node: String },
    #[error("derivative of sqrt at zero in `{node}`")]
    SqrtDerivativeAtZero { node: String },
    #[error("power domain error in `{node}`")]
    PowDomain { node: String },
    #[error("variable index {index} outside point of dimension {dimension}")]
    VariableOutOfRange { index: usize, dimension: usize },
}

fn node_text(expr: &Expr) -> String {
    expr.pretty_generic()
}

/// Evaluate an expression at a point. Deterministic real arithmetic;
/// domain violations (ln of non-positive, sqrt of negative, division by
/// zero, undefined powers) are reported with the offending subexpression.
pub fn eval<T: Scalar>(expr: &Expr, point: &[T]) -> Result<T, EvalError> {
    match expr {
        Expr::Constant(c) => Ok(T::of(*c)),
        Expr::Variable(i) => point.get(*i).copied().ok_or(EvalError::VariableOutOfRange {
            index: *i,
            dimension: point.len(),
        }),
        Expr::Negate(inner) => Ok(-eval(inner, point)?),
        Expr::Binary { op, lhs, rhs } => {
            let a = eval(lhs, point)?;
            let b = eval(rhs, point)?;
            match op {
                BinaryOp::Add => Ok(a + b),
                BinaryOp::Sub => Ok(a - b),
                BinaryOp::Mul => Ok(a * b),
                BinaryOp::Div => {
                    if b.is_zero() {
                        Err(EvalError::DivisionByZero {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a / b)
                    }
                }
                BinaryOp::Pow => pow_value(a, b).map_err(|_| EvalError::PowDomain {
                    node: node_text(expr),
                }),
            }
        }
        Expr::Call { function, argument } => {
            let a = eval(argument, point)?;
            match function {
                Function::Sin => Ok(a.sin()),
                Function::Cos => Ok(a.cos()),
                Function::Tan => Ok(a.tan()),
                Function::Exp => Ok(a.exp()),
                Function::Ln => {
                    if a <= T::zero() {
                        Err(EvalError::LogDomain {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a.ln())
                    }
                }
                Function::Sqrt => {
                    if a < T::zero() {
                        Err(EvalError::SqrtDomain {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a.sqrt())
                    }
                }
            }
        }
    }
}

struct PowUndefined;

/// `base^exponent` restricted to real arithmetic: a negative base requires
/// an integer exponent, and a zero base a non-negative one.
fn pow_value<T: Scalar>(base: T, exponent: T) -> Result<T, PowUndefined> {
    if base < T::zero() && !exponent.fract().is_zero() {
        return Err(PowUndefined);
    }
    if base.is_zero() && exponent < T::zero() {
        return Err(PowUndefined);
    }
    Ok(base.powf(exponent))
}

/// Evaluate with dual numbers: the value component equals [`eval`] and the
/// partials are exact analytical first derivatives.
pub fn eval_dual<T: Scalar>(expr: &Expr, point: &[T]) -> Result<Dual<T>, EvalError> {
    let n = point.len();
    match expr {
        Expr::Constant(c) => Ok(Dual::constant(T::of(*c), n)),
        Expr::Variable(i) => {
            let value = *point.get(*i).ok_or(EvalError::VariableOutOfRange {
                index: *i,
                dimension: n,
            })?;
            Ok(Dual::variable(value, *i, n))
        }
        Expr::Negate(inner) => Ok(-eval_dual(inner, point)?),
        Expr::Binary { op, lhs, rhs } => {
            let a = eval_dual(lhs, point)?;
            let b = eval_dual(rhs, point)?;
            match op {
                BinaryOp::Add => Ok(a + b),
                BinaryOp::Sub => Ok(a - b),
                BinaryOp::Mul => Ok(a * b),
                BinaryOp::Div => {
                    if b.value.is_zero() {
                        Err(EvalError::DivisionByZero {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a / b)
                    }
                }
                BinaryOp::Pow => pow_dual(a, b).map_err(|_| EvalError::PowDomain {
                    node: node_text(expr),
                }),
            }
        }
        Expr::Call { function, argument } => {
            let a = eval_dual(argument, point)?;
            match function {
                Function::Sin => Ok(a.sin()),
                Function::Cos => Ok(a.cos()),
                Function::Tan => Ok(a.tan()),
                Function::Exp => Ok(a.exp()),
                Function::Ln => {
                    if a.value <= T::zero() {
                        Err(EvalError::LogDomain {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a.ln())
                    }
                }
                Function::Sqrt => {
                    if a.value < T::zero() {
                        Err(EvalError::SqrtDomain {
                            node: node_text(expr),
                        })
                    } else if a.value.is_zero() {
                        Err(EvalError::SqrtDerivativeAtZero {
                            node: node_text(expr),
                        })
                    } else {
                        Ok(a.sqrt())
                    }
                }
            }
        }
    }
}

/// Dual-number power. A constant exponent `c` uses d(u^c) = c u^(c-1) du,
/// which stays defined for negative bases with integer exponents; a
/// non-constant exponent requires a positive base.
fn pow_dual<T: Scalar>(base: Dual<T>, exponent: Dual<T>) -> Result<Dual<T>, PowUndefined> {
    if exponent.is_constant() {
        let c = exponent.value;
        let value = pow_value(base.value, c)?;
        if c.is_zero() {
            return Ok(Dual::constant(value, base.partials.len()));
        }
        if base.value.is_zero() && c < T::one() {
            // u^(c-1) diverges at zero for c < 1.
            return Err(PowUndefined);
        }
        let factor = c * pow_value(base.value, c - T::one())?;
        let mut out = base;
        for p in &mut out.partials {
            *p = *p * factor;
        }
        out.value = value;
        Ok(out)
    } else {
        if base.value <= T::zero() {
            return Err(PowUndefined);
        }
        let value = base.value.powf(exponent.value);
        let ln_u = base.value.ln();
        let mut out = base.clone();
        for ((p, du), dv) in out
            .partials
            .iter_mut()
            .zip(&base.partials)
            .zip(&exponent.partials)
        {
            *p = value * (*dv * ln_u + exponent.value * *du / base.value);
        }
        out.value = value;
        Ok(out)
    }
}
