//! Expression tree and precedence-aware printing.

/// Binary arithmetic operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Builtin function of one argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
}

impl Function {
    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Exp => "exp",
            Function::Ln => "ln",
            Function::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Function> {
        match name {
            "sin" => Some(Function::Sin),
            "cos" => Some(Function::Cos),
            "tan" => Some(Function::Tan),
            "exp" => Some(Function::Exp),
            "ln" => Some(Function::Ln),
            "sqrt" => Some(Function::Sqrt),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 6] = ["sin", "cos", "tan", "exp", "ln", "sqrt"];
}

/// Parsed arithmetic expression over chart coordinates.
///
/// Variables store the coordinate index into the chart's ordered name list.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Constant(f64),
    Variable(usize),
    Negate(Box<Expr>),
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        function: Function,
        argument: Box<Expr>,
    },
}

impl Expr {
    pub fn binary(op: BinaryOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(function: Function, argument: Expr) -> Expr {
        Expr::Call {
            function,
            argument: Box::new(argument),
        }
    }

    /// Largest coordinate index referenced, if any variable occurs.
    pub fn max_variable(&self) -> Option<usize> {
        match self {
            Expr::Constant(_) => None,
            Expr::Variable(i) => Some(*i),
            Expr::Negate(x) => x.max_variable(),
            Expr::Binary { lhs, rhs, .. } => match (lhs.max_variable(), rhs.max_variable()) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            },
            Expr::Call { argument, .. } => argument.max_variable(),
        }
    }

    // Precedence levels: Add/Sub 1, Mul/Div 2, unary minus 3, Pow 4, atoms 5.
    fn precedence(&self) -> u8 {
        match self {
            Expr::Constant(_) | Expr::Variable(_) | Expr::Call { .. } => 5,
            Expr::Negate(_) => 3,
            Expr::Binary { op, .. } => match op {
                BinaryOp::Add | BinaryOp::Sub => 1,
                BinaryOp::Mul | BinaryOp::Div => 2,
                BinaryOp::Pow => 4,
            },
        }
    }

    /// Render with the given coordinate names, inserting parentheses only
    /// where the grammar requires them; reparsing the output reproduces the
    /// tree (for trees the parser can produce, i.e. non-negative constants).
    pub fn pretty(&self, names: &[&str]) -> String {
        self.fmt_prec(&|i| names[i].to_string(), 0)
    }

    /// Render with positional placeholder names `x0, x1, ...` for error
    /// messages when no chart is at hand.
    pub fn pretty_generic(&self) -> String {
        self.fmt_prec(&|i| format!("x{i}"), 0)
    }

    fn fmt_prec(&self, name: &dyn Fn(usize) -> String, min: u8) -> String {
        let body = match self {
            Expr::Constant(c) => format!("{c}"),
            Expr::Variable(i) => name(*i),
            Expr::Negate(x) => format!("-{}", x.fmt_prec(name, 3)),
            Expr::Binary { op, lhs, rhs } => match op {
                BinaryOp::Add => format!(
                    "{} + {}",
                    lhs.fmt_prec(name, 1),
                    rhs.fmt_prec(name, 2)
                ),
                BinaryOp::Sub => format!(
                    "{} - {}",
                    lhs.fmt_prec(name, 1),
                    rhs.fmt_prec(name, 2)
                ),
                BinaryOp::Mul => format!("{}*{}", lhs.fmt_prec(name, 2), rhs.fmt_prec(name, 3)),
                BinaryOp::Div => format!("{}/{}", lhs.fmt_prec(name, 2), rhs.fmt_prec(name, 3)),
                BinaryOp::Pow => format!("{}^{}", lhs.fmt_prec(name, 5), rhs.fmt_prec(name, 3)),
            },
            Expr::Call { function, argument } => {
                format!("{}({})", function.name(), argument.fmt_prec(name, 0))
            }
        };
        if self.precedence() < min {
            format!("({body})")
        } else {
            body
        }
    }
}
