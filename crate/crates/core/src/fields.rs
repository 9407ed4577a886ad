//! Valence-tagged tensor fields over a single chart, pointwise evaluation,
//! exact component partials, and the small index algebra the identity
//! checks contract with.
//!
//! Components are stored densely in row-major order over the `p + q`
//! indices, each running over the chart dimension. Everything here is
//! immutable after construction and evaluation is pure.

use std::sync::Arc;

use crate::expr::{self, Expr, EvalError, ExprError};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("chart requires at least one coordinate")]
    EmptyChart,
    #[error("duplicate coordinate name `{name}`")]
    DuplicateCoordinate { name: String },
    #[error("coordinate name `{name}` collides with a builtin function")]
    ReservedCoordinate { name: String },
    #[error("invalid coordinate name `{name}`")]
    InvalidCoordinate { name: String },
    #[error("valence ({p},{q}) exceeds the supported rank")]
    UnsupportedValence { p: usize, q: usize },
    #[error("expected {expected} components, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("component references coordinate {index} outside chart of dimension {dimension}")]
    ComponentOutOfChart { index: usize, dimension: usize },
    #[error("point has {got} coordinates, chart has {expected}")]
    PointDimension { expected: usize, got: usize },
    #[error("component {index:?}: {source}")]
    Component {
        index: Vec<usize>,
        source: EvalError,
    },
    #[error("metric is singular at the sampled point (|det| below 1e-12)")]
    SingularMetric,
    #[error("operation requires valence ({p},{q})")]
    WrongValence { p: usize, q: usize },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Ordered coordinate names of one chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    /// Names must be distinct, non-empty identifiers and must not shadow a
    /// builtin function name.
    pub fn new(names: Vec<String>) -> Result<Chart, FieldError> {
        if names.is_empty() {
            return Err(FieldError::EmptyChart);
        }
        for (i, name) in names.iter().enumerate() {
            let mut chars = name.chars();
            let head_ok = chars
                .next()
                .map(|c| c.is_ascii_alphabetic() || c == '_')
                .unwrap_or(false);
            if !head_ok || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(FieldError::InvalidCoordinate { name: name.clone() });
            }
            if expr::Function::NAMES.contains(&name.as_str()) {
                return Err(FieldError::ReservedCoordinate { name: name.clone() });
            }
            if names[..i].contains(name) {
                return Err(FieldError::DuplicateCoordinate { name: name.clone() });
            }
        }
        Ok(Chart { names })
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Parse an expression in this chart's coordinates.
    pub fn parse_expr(&self, source: &str) -> Result<Expr, ExprError> {
        let refs: Vec<&str> = self.names.iter().map(|s| s.as_str()).collect();
        expr::parse_source(source, &refs)
    }
}

/// Tensor valence: `p` contravariant and `q` covariant slots, `p + q <= 3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Valence {
    pub contravariant: usize,
    pub covariant: usize,
}

impl Valence {
    pub const SCALAR: Valence = Valence::new(0, 0);
    pub const VECTOR: Valence = Valence::new(1, 0);
    pub const ONE_FORM: Valence = Valence::new(0, 1);
    pub const ENDOMORPHISM: Valence = Valence::new(1, 1);
    pub const BILINEAR: Valence = Valence::new(0, 2);

    pub const fn new(contravariant: usize, covariant: usize) -> Valence {
        Valence {
            contravariant,
            covariant,
        }
    }

    pub fn rank(&self) -> usize {
        self.contravariant + self.covariant
    }
}

/// A tensor field: one component expression per multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    chart: Arc<Chart>,
    valence: Valence,
    components: Vec<Expr>,
}

impl TensorField {
    pub fn new(
        chart: Arc<Chart>,
        valence: Valence,
        components: Vec<Expr>,
    ) -> Result<TensorField, FieldError> {
        if valence.rank() > 3 {
            return Err(FieldError::UnsupportedValence {
                p: valence.contravariant,
                q: valence.covariant,
            });
        }
        let n = chart.dimension();
        let expected = n.pow(valence.rank() as u32);
        if components.len() != expected {
            return Err(FieldError::ComponentCount {
                expected,
                got: components.len(),
            });
        }
        for c in &components {
            if let Some(max) = c.max_variable() {
                if max >= n {
                    return Err(FieldError::ComponentOutOfChart {
                        index: max,
                        dimension: n,
                    });
                }
            }
        }
        Ok(TensorField {
            chart,
            valence,
            components,
        })
    }

    /// All components zero.
    pub fn zeros(chart: Arc<Chart>, valence: Valence) -> TensorField {
        let size = chart.dimension().pow(valence.rank() as u32);
        TensorField {
            chart,
            valence,
            components: vec![Expr::Constant(0.0); size],
        }
    }

    /// Constant components from a flat array.
    pub fn constant(
        chart: Arc<Chart>,
        valence: Valence,
        values: &[f64],
    ) -> Result<TensorField, FieldError> {
        let components = values.iter().map(|v| Expr::Constant(*v)).collect();
        TensorField::new(chart, valence, components)
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn valence(&self) -> Valence {
        self.valence
    }

    pub fn size(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.valence.rank());
        let n = self.chart.dimension();
        index.iter().fold(0, |acc, i| acc * n + i)
    }

    pub fn component(&self, index: &[usize]) -> &Expr {
        &self.components[self.flat_index(index)]
    }

    pub fn set_component(&mut self, index: &[usize], value: Expr) {
        let flat = self.flat_index(index);
        self.components[flat] = value;
    }

    fn check_point<T: Scalar>(&self, point: &[T]) -> Result<(), FieldError> {
        if point.len() != self.chart.dimension() {
            return Err(FieldError::PointDimension {
                expected: self.chart.dimension(),
                got: point.len(),
            });
        }
        Ok(())
    }

    fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let n = self.chart.dimension();
        let rank = self.valence.rank();
        let mut index = vec![0; rank];
        for slot in (0..rank).rev() {
            index[slot] = flat % n;
            flat /= n;
        }
        index
    }

    /// Entry-wise evaluation at a point; the output is the flat component
    /// array of shape `n^(p+q)`.
    pub fn evaluate<T: Scalar>(&self, point: &[T]) -> Result<Vec<T>, FieldError> {
        self.check_point(point)?;
        self.components
            .iter()
            .enumerate()
            .map(|(flat, c)| {
                expr::eval(c, point).map_err(|source| FieldError::Component {
                    index: self.unflatten(flat),
                    source,
                })
            })
            .collect()
    }

    /// Exact partial derivatives of every component: entry `(I, k)` of the
    /// output, stored at `I * n + k`, is the k-th partial of component `I`.
    pub fn partials<T: Scalar>(&self, point: &[T]) -> Result<Vec<T>, FieldError> {
        self.check_point(point)?;
        let n = self.chart.dimension();
        let mut out = Vec::with_capacity(self.components.len() * n);
        for (flat, c) in self.components.iter().enumerate() {
            let dual = expr::eval_dual(c, point).map_err(|source| FieldError::Component {
                index: self.unflatten(flat),
                source,
            })?;
            out.extend(dual.partials);
        }
        Ok(out)
    }
}

/// The fundamental 2-form as a field: `'F(e_i, e_j) = g(F e_i, e_j)`, built
/// symbolically so its components can be evaluated and differentiated like
/// any other field.
pub fn fundamental_form_field(
    f: &TensorField,
    g: &TensorField,
) -> Result<TensorField, FieldError> {
    if f.valence() != Valence::ENDOMORPHISM {
        return Err(FieldError::WrongValence { p: 1, q: 1 });
    }
    if g.valence() != Valence::BILINEAR {
        return Err(FieldError::WrongValence { p: 0, q: 2 });
    }
    let chart = f.chart().clone();
    let n = chart.dimension();
    let mut components = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // Sum over l of g_{lj} F^l_i.
            let mut sum: Option<Expr> = None;
            for l in 0..n {
                let term = Expr::binary(
                    expr::BinaryOp::Mul,
                    g.component(&[l, j]).clone(),
                    f.component(&[l, i]).clone(),
                );
                sum = Some(match sum {
                    None => term,
                    Some(acc) => Expr::binary(expr::BinaryOp::Add, acc, term),
                });
            }
            components.push(sum.expect("dimension is positive"));
        }
    }
    TensorField::new(chart, Valence::BILINEAR, components)
}

// ---------------------------------------------------------------------------
// Index algebra on evaluated component arrays.
// ---------------------------------------------------------------------------

/// Apply a (1,1) array to a vector: the overbar map `v -> F v`.
pub fn apply_endomorphism<T: Scalar>(n: usize, f: &[T], v: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).fold(T::zero(), |acc, j| acc + f[i * n + j] * v[j]))
        .collect()
}

/// Pair a covector array with a vector.
pub fn pairing<T: Scalar>(w: &[T], v: &[T]) -> T {
    w.iter()
        .zip(v)
        .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
}

/// Contract a (0,2) array with two vectors.
pub fn bilinear_form<T: Scalar>(n: usize, b: &[T], x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            acc = acc + b[i * n + j] * x[i] * y[j];
        }
    }
    acc
}

/// `'F(X, Y) = g(F X, Y)` from evaluated metric and endomorphism arrays.
pub fn fundamental_form_value<T: Scalar>(n: usize, g: &[T], f: &[T], x: &[T], y: &[T]) -> T {
    let fx = apply_endomorphism(n, f, x);
    bilinear_form(n, g, &fx, y)
}

/// Matrix of the fundamental form: `'F_{ij} = sum_l g_{lj} F^l_i`.
pub fn fundamental_form_matrix<T: Scalar>(n: usize, g: &[T], f: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = T::zero();
            for l in 0..n {
                acc = acc + g[l * n + j] * f[l * n + i];
            }
            out[i * n + j] = acc;
        }
    }
    out
}

/// Evaluate a (0,2) metric field and invert it by Gauss-Jordan elimination
/// with partial pivoting. A pivot product below `1e-12` in magnitude is
/// reported as a singular metric.
pub fn metric_at<T: Scalar>(g: &TensorField, point: &[T]) -> Result<(Vec<T>, Vec<T>), FieldError> {
    if g.valence() != Valence::BILINEAR {
        return Err(FieldError::WrongValence { p: 0, q: 2 });
    }
    let n = g.chart().dimension();
    let matrix = g.evaluate(point)?;
    let inverse = invert(n, &matrix)?;
    Ok((matrix, inverse))
}

/// Invert an `n x n` array by Gauss-Jordan elimination with partial
/// pivoting; errors when the determinant magnitude falls below `1e-12`.
pub fn invert<T: Scalar>(n: usize, matrix: &[T]) -> Result<Vec<T>, FieldError> {
    let mut a = matrix.to_vec();
    let mut inv = vec![T::zero(); n * n];
    for i in 0..n {
        inv[i * n + i] = T::one();
    }
    let mut det = T::one();
    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_mag = a[col * n + col].abs();
        for row in (col + 1)..n {
            let mag = a[row * n + col].abs();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = row;
            }
        }
        if pivot_row != col {
            for j in 0..n {
                a.swap(col * n + j, pivot_row * n + j);
                inv.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = a[col * n + col];
        det = det * pivot;
        if pivot.is_zero() {
            return Err(FieldError::SingularMetric);
        }
        for j in 0..n {
            a[col * n + j] = a[col * n + j] / pivot;
            inv[col * n + j] = inv[col * n + j] / pivot;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col];
            if factor.is_zero() {
                continue;
            }
            for j in 0..n {
                a[row * n + j] = a[row * n + j] - factor * a[col * n + j];
                inv[row * n + j] = inv[row * n + j] - factor * inv[col * n + j];
            }
        }
    }
    if det.abs() < T::of(1e-12) {
        return Err(FieldError::SingularMetric);
    }
    Ok(inv)
}
