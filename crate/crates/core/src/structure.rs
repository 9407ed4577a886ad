//! Almost contact metric structures: the quadruple of structure
//! endomorphism, structure vector, structure 1-form and metric over one
//! chart, together with axiom validation, builtin example structures and
//! the manifold-spec file format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::expr::Expr;
use crate::fields::{
    self, fundamental_form_field, fundamental_form_matrix, FieldError, TensorField, Valence,
};
use crate::report::CheckReport;
use crate::sample::{sample_frames, PointFrame};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StructureError {
    #[error("unknown builtin `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },
    #[error("structure dimension must be odd and at least 3, got {dimension}")]
    BadDimension { dimension: usize },
    #[error("{field} has wrong valence")]
    FieldValence { field: &'static str },
    #[error("fields do not share the structure's chart")]
    ChartMismatch,
    #[error("builtin `{name}` failed its construction self-check (residual {residual:e})")]
    BuiltinSelfCheck { name: String, residual: f64 },
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("structure has not been validated")]
    NotValidated,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Record that axiom validation passed: sample count, seed, tolerance and
/// the per-axiom reports.
#[derive(Debug, Clone)]
pub struct ValidationCertificate {
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_residual: f64,
    pub reports: Vec<CheckReport>,
}

/// The structure quadruple over one chart. The fundamental 2-form is built
/// symbolically at construction so it can be differentiated like any other
/// field.
#[derive(Debug, Clone)]
pub struct AlmostContactStructure {
    chart: Arc<Chart>,
    name: String,
    f: TensorField,
    t: TensorField,
    a: TensorField,
    g: TensorField,
    fprime: TensorField,
    known_generalized_cosymplectic: bool,
    known_generalized_quasi_sasakian: bool,
    validation: Option<ValidationCertificate>,
}

use crate::fields::Chart;

impl AlmostContactStructure {
    pub fn new(
        chart: Arc<Chart>,
        name: impl Into<String>,
        f: TensorField,
        t: TensorField,
        a: TensorField,
        g: TensorField,
    ) -> Result<AlmostContactStructure, StructureError> {
        let n = chart.dimension();
        if n < 3 || n.is_multiple_of(2) {
            return Err(StructureError::BadDimension { dimension: n });
        }
        if f.valence() != Valence::ENDOMORPHISM {
            return Err(StructureError::FieldValence { field: "F" });
        }
        if t.valence() != Valence::VECTOR {
            return Err(StructureError::FieldValence { field: "T" });
        }
        if a.valence() != Valence::ONE_FORM {
            return Err(StructureError::FieldValence { field: "A" });
        }
        if g.valence() != Valence::BILINEAR {
            return Err(StructureError::FieldValence { field: "g" });
        }
        for field in [&f, &t, &a, &g] {
            if field.chart().as_ref() != chart.as_ref() {
                return Err(StructureError::ChartMismatch);
            }
        }
        let fprime = fundamental_form_field(&f, &g)?;
        Ok(AlmostContactStructure {
            chart,
            name: name.into(),
            f,
            t,
            a,
            g,
            fprime,
            known_generalized_cosymplectic: false,
            known_generalized_quasi_sasakian: false,
            validation: None,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f(&self) -> &TensorField {
        &self.f
    }

    pub fn t(&self) -> &TensorField {
        &self.t
    }

    pub fn a(&self) -> &TensorField {
        &self.a
    }

    pub fn g(&self) -> &TensorField {
        &self.g
    }

    /// The fundamental 2-form `'F(X, Y) = g(F X, Y)` as a field.
    pub fn fprime(&self) -> &TensorField {
        &self.fprime
    }

    /// Whether the structure is known (by construction) to satisfy the
    /// generalized co-symplectic identity. True for the builtins, false for
    /// loaded specs.
    pub fn known_generalized_cosymplectic(&self) -> bool {
        self.known_generalized_cosymplectic
    }

    pub fn known_generalized_quasi_sasakian(&self) -> bool {
        self.known_generalized_quasi_sasakian
    }

    pub fn validation(&self) -> Option<&ValidationCertificate> {
        self.validation.as_ref()
    }

    pub fn is_validated(&self) -> bool {
        self.validation.is_some()
    }

    /// Run the axiom checks at sampled points and frames. One report per
    /// axiom; a singular metric or an expression domain error at a sample
    /// marks the affected axiom failed with the point attached.
    pub fn validate<T: Scalar>(&self, points: usize, seed: u64, tol: f64) -> Vec<CheckReport> {
        validate_structure::<T>(self, points, seed, tol)
    }

    /// Validate and, when every axiom passes, attach the certificate.
    pub fn certify<T: Scalar>(&mut self, points: usize, seed: u64, tol: f64) -> Vec<CheckReport> {
        let reports = self.validate::<T>(points, seed, tol);
        if reports.iter().all(|r| r.passed()) {
            let max_residual = reports
                .iter()
                .map(|r| r.max_abs_residual)
                .fold(0.0, f64::max);
            self.validation = Some(ValidationCertificate {
                points,
                seed,
                tolerance: tol,
                max_residual,
                reports: reports.clone(),
            });
        } else {
            self.validation = None;
        }
        reports
    }
}

// ---------------------------------------------------------------------------
// Axiom validation
// ---------------------------------------------------------------------------

const AXIOMS: [(&str, &str); 8] = [
    ("AX0", "metric is invertible at every sampled point"),
    ("AX1", "F^2 X + X = A(X) T"),
    ("AX2", "A(F X) = 0"),
    ("AX3", "fundamental 2-form is antisymmetric"),
    ("AX4", "g(F X, F Y) = g(X, Y) - A(X) A(Y)"),
    ("AX5", "A(T) = 1"),
    ("AX6", "F T = 0"),
    ("AX7", "A is the metric dual of T"),
];

fn point_text<T: Scalar>(point: &[T]) -> String {
    let coords: Vec<String> = point.iter().map(|c| format!("{c}")).collect();
    format!("({})", coords.join(", "))
}

/// Evaluate the structure axioms at `points` seeded samples.
pub fn validate_structure<T: Scalar>(
    s: &AlmostContactStructure,
    points: usize,
    seed: u64,
    tol: f64,
) -> Vec<CheckReport> {
    let n = s.chart.dimension();
    let mut worst = [0.0_f64; 8];
    let mut notes: [Option<String>; 8] = Default::default();
    let samples = sample_frames::<T>(n, points, seed);
    for fr in &samples {
        match axiom_residuals(s, fr) {
            Ok(res) => {
                for (slot, r) in res.iter().enumerate() {
                    let r = if r.is_finite() { *r } else { f64::MAX };
                    if r > worst[slot] {
                        worst[slot] = r;
                        if r == f64::MAX && notes[slot].is_none() {
                            notes[slot] =
                                Some(format!("non-finite residual at {}", point_text(&fr.point)));
                        }
                    }
                }
            }
            Err(err) => {
                // A singular metric only obstructs AX0; expression errors
                // poison every axiom at this point.
                let slots: &[usize] = match err {
                    FieldError::SingularMetric => &[0],
                    _ => &[0, 1, 2, 3, 4, 5, 6, 7],
                };
                for &slot in slots {
                    worst[slot] = f64::MAX;
                    if notes[slot].is_none() {
                        notes[slot] = Some(format!("{err} at {}", point_text(&fr.point)));
                    }
                }
            }
        }
    }
    AXIOMS
        .iter()
        .enumerate()
        .map(|(slot, (id, text))| {
            let description = match &notes[slot] {
                Some(note) => format!("{text} | {note}"),
                None => text.to_string(),
            };
            CheckReport::graded(*id, description, points, seed, worst[slot], tol)
        })
        .collect()
}

/// Residuals of the eight axioms at one sample, in AX order.
fn axiom_residuals<T: Scalar>(
    s: &AlmostContactStructure,
    fr: &PointFrame<T>,
) -> Result<[f64; 8], FieldError> {
    let n = s.chart.dimension();
    let point = &fr.point;
    let f = s.f.evaluate(point)?;
    let t = s.t.evaluate(point)?;
    let a = s.a.evaluate(point)?;
    let g = s.g.evaluate(point)?;
    let fp = fundamental_form_matrix(n, &g, &f);

    let ax0 = match fields::invert(n, &g) {
        Ok(_) => 0.0,
        Err(_) => return Err(FieldError::SingularMetric),
    };

    let mut ax1 = T::zero();
    let mut ax2 = T::zero();
    let mut ax7 = T::zero();
    for v in [&fr.x, &fr.y, &fr.z] {
        let fv = fields::apply_endomorphism(n, &f, v);
        let ffv = fields::apply_endomorphism(n, &f, &fv);
        let av = fields::pairing(&a, v);
        for i in 0..n {
            ax1 = ax1.max((ffv[i] + v[i] - av * t[i]).abs());
        }
        ax2 = ax2.max(fields::pairing(&a, &fv).abs());
        let gvt = fields::bilinear_form(n, &g, v, &t);
        ax7 = ax7.max((av - gvt).abs());
    }

    let mut ax3 = T::zero();
    for i in 0..n {
        for j in 0..n {
            ax3 = ax3.max((fp[i * n + j] + fp[j * n + i]).abs());
        }
    }

    let mut ax4 = T::zero();
    for (u, v) in [(&fr.x, &fr.y), (&fr.x, &fr.z), (&fr.y, &fr.z)] {
        let fu = fields::apply_endomorphism(n, &f, u);
        let fv = fields::apply_endomorphism(n, &f, v);
        let lhs = fields::bilinear_form(n, &g, &fu, &fv);
        let rhs = fields::bilinear_form(n, &g, u, v)
            - fields::pairing(&a, u) * fields::pairing(&a, v);
        ax4 = ax4.max((lhs - rhs).abs());
    }

    let ax5 = (fields::pairing(&a, &t) - T::one()).abs();

    let ft = fields::apply_endomorphism(n, &f, &t);
    let mut ax6 = T::zero();
    for i in 0..n {
        ax6 = ax6.max(ft[i].abs());
    }

    Ok([
        ax0,
        ax1.as_f64(),
        ax2.as_f64(),
        ax3.as_f64(),
        ax4.as_f64(),
        ax5.as_f64(),
        ax6.as_f64(),
        ax7.as_f64(),
    ])
}

// ---------------------------------------------------------------------------
// Builtin structures
// ---------------------------------------------------------------------------

pub const BUILTIN_NAMES: [&str; 4] = [
    "flat-cosymplectic-3",
    "flat-cosymplectic-5",
    "sasakian-3",
    "sasakian-5",
];

/// Coordinate names `(x1, y1, ..., xm, ym, z)`, shortened to `(x, y, z)`
/// in dimension three.
fn builtin_chart(pairs: usize) -> Arc<Chart> {
    let mut names = Vec::with_capacity(2 * pairs + 1);
    if pairs == 1 {
        names.push("x".to_string());
        names.push("y".to_string());
    } else {
        for i in 1..=pairs {
            names.push(format!("x{i}"));
            names.push(format!("y{i}"));
        }
    }
    names.push("z".to_string());
    Arc::new(Chart::new(names).expect("builtin chart names are valid"))
}

/// Look up a builtin example structure by name.
///
/// Construction runs a self-check of the family's defining derivative
/// identity (parallel structure for the flat family, the classical contact
/// identity for the Sasakian family) and refuses to return a miscoded
/// builtin.
pub fn builtin(name: &str) -> Result<AlmostContactStructure, StructureError> {
    let s = match name {
        "flat-cosymplectic-3" => flat_cosymplectic(1)?,
        "flat-cosymplectic-5" => flat_cosymplectic(2)?,
        "sasakian-3" => sasakian(1)?,
        "sasakian-5" => sasakian(2)?,
        _ => {
            return Err(StructureError::UnknownBuiltin {
                name: name.to_string(),
                available: BUILTIN_NAMES.join(", "),
            })
        }
    };
    builtin_self_check(&s, name)?;
    Ok(s)
}

/// Flat structure on `R^(2m+1)`: identity metric, constant block rotation
/// on each coordinate pair, structure vector along the last coordinate.
fn flat_cosymplectic(pairs: usize) -> Result<AlmostContactStructure, StructureError> {
    let chart = builtin_chart(pairs);
    let n = chart.dimension();
    let mut g = TensorField::zeros(chart.clone(), Valence::BILINEAR);
    for i in 0..n {
        g.set_component(&[i, i], Expr::Constant(1.0));
    }
    let mut f = TensorField::zeros(chart.clone(), Valence::ENDOMORPHISM);
    for p in 0..pairs {
        let xi = 2 * p;
        let yi = 2 * p + 1;
        f.set_component(&[yi, xi], Expr::Constant(1.0));
        f.set_component(&[xi, yi], Expr::Negate(Box::new(Expr::Constant(1.0))));
    }
    let mut t = TensorField::zeros(chart.clone(), Valence::VECTOR);
    t.set_component(&[n - 1], Expr::Constant(1.0));
    let mut a = TensorField::zeros(chart.clone(), Valence::ONE_FORM);
    a.set_component(&[n - 1], Expr::Constant(1.0));
    let mut s = AlmostContactStructure::new(
        chart,
        format!("flat-cosymplectic-{n}"),
        f,
        t,
        a,
        g,
    )?;
    s.known_generalized_cosymplectic = true;
    s.known_generalized_quasi_sasakian = true;
    Ok(s)
}

/// The standard contact metric structure on `R^(2m+1)` with contact form
/// `(dz - sum on pairs of y dx) / 2`, structure vector `2 dz-dual`, and
/// metric `A (x) A + (sum of dx^2 + dy^2) / 4`.
fn sasakian(pairs: usize) -> Result<AlmostContactStructure, StructureError> {
    let chart = builtin_chart(pairs);
    let n = chart.dimension();
    let zc = n - 1;
    let names = chart.names().to_vec();
    let parse = |src: &str| chart.parse_expr(src).expect("builtin expression parses");

    let mut g = TensorField::zeros(chart.clone(), Valence::BILINEAR);
    for p in 0..pairs {
        let xp = 2 * p;
        let yp = 2 * p + 1;
        let ynm = &names[yp];
        for q in 0..pairs {
            let xq = 2 * q;
            let yqn = &names[2 * q + 1];
            let src = if p == q {
                format!("({ynm}*{yqn} + 1)/4")
            } else {
                format!("{ynm}*{yqn}/4")
            };
            let e = parse(&src);
            g.set_component(&[xp, xq], e.clone());
            g.set_component(&[xq, xp], e);
        }
        g.set_component(&[yp, yp], parse("1/4"));
        let cross = parse(&format!("-{ynm}/4"));
        g.set_component(&[xp, zc], cross.clone());
        g.set_component(&[zc, xp], cross);
    }
    g.set_component(&[zc, zc], parse("1/4"));

    let mut f = TensorField::zeros(chart.clone(), Valence::ENDOMORPHISM);
    for p in 0..pairs {
        let xp = 2 * p;
        let yp = 2 * p + 1;
        f.set_component(&[yp, xp], Expr::Constant(1.0));
        f.set_component(&[xp, yp], parse("-1"));
        f.set_component(&[zc, yp], parse(&format!("-{}", names[yp])));
    }

    let mut t = TensorField::zeros(chart.clone(), Valence::VECTOR);
    t.set_component(&[zc], Expr::Constant(2.0));

    let mut a = TensorField::zeros(chart.clone(), Valence::ONE_FORM);
    for p in 0..pairs {
        let xp = 2 * p;
        a.set_component(&[xp], parse(&format!("-{}/2", names[2 * p + 1])));
    }
    a.set_component(&[zc], parse("1/2"));

    let mut s = AlmostContactStructure::new(chart, format!("sasakian-{n}"), f, t, a, g)?;
    s.known_generalized_cosymplectic = true;
    s.known_generalized_quasi_sasakian = true;
    Ok(s)
}

/// Construction check: the flat family must be parallel under the metric
/// connection, the Sasakian family must satisfy the classical contact
/// identity `(D_X F)(Y) = A(Y) X - g(X, Y) T` (the sign pairing forced by
/// the chosen orientation of F), both to `1e-9` at seeded samples.
fn builtin_self_check(s: &AlmostContactStructure, name: &str) -> Result<(), StructureError> {
    use crate::connections::PointContext;
    let n = s.chart.dimension();
    let sasakian_family = name.starts_with("sasakian");
    let mut worst = 0.0_f64;
    for fr in sample_frames::<f64>(n, 20, 0xACC) {
        let cx = PointContext::new(s, &fr.point).map_err(StructureError::Field)?;
        if sasakian_family {
            let dxf = cx.deriv_endo(&cx.d_f, &fr.x, &fr.y);
            let gxy = cx.g_of(&fr.x, &fr.y);
            let ay = cx.a_of(&fr.y);
            for i in 0..n {
                let r = (dxf[i] - (ay * fr.x[i] - gxy * cx.t[i])).abs();
                worst = worst.max(r);
            }
        } else {
            for v in &cx.d_f {
                worst = worst.max(v.abs());
            }
        }
    }
    if worst > 1e-9 {
        return Err(StructureError::BuiltinSelfCheck {
            name: name.to_string(),
            residual: worst,
        });
    }
    Ok(())
}

/// Degenerate double with a vanishing endomorphism; not a valid structure,
/// used to exercise the zero-correction path of the semi-symmetric
/// connection.
#[doc(hidden)]
pub fn test_double_zero_f() -> AlmostContactStructure {
    let chart = builtin_chart(1);
    let n = chart.dimension();
    let mut g = TensorField::zeros(chart.clone(), Valence::BILINEAR);
    for i in 0..n {
        g.set_component(&[i, i], Expr::Constant(1.0));
    }
    let f = TensorField::zeros(chart.clone(), Valence::ENDOMORPHISM);
    let mut t = TensorField::zeros(chart.clone(), Valence::VECTOR);
    t.set_component(&[n - 1], Expr::Constant(1.0));
    let mut a = TensorField::zeros(chart.clone(), Valence::ONE_FORM);
    a.set_component(&[n - 1], Expr::Constant(1.0));
    AlmostContactStructure::new(chart, "zero-f-double", f, t, a, g)
        .expect("test double shapes are valid")
}

// ---------------------------------------------------------------------------
// Manifold-spec file format
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Metric,
    F,
    T,
    A,
}

/// Parse the line-oriented manifold-spec format:
///
/// ```text
/// dimension = 3
/// coordinates = x y z
/// [metric]
/// g 1 1 = 1
/// [F]
/// F 2 1 = 1
/// [T]
/// T 3 = 1
/// [A]
/// A 3 = 1
/// ```
///
/// Indices are 1-based; unspecified components default to zero; a metric
/// entry fills both `(i, j)` and `(j, i)`. The loaded structure is not
/// validated; the caller decides.
pub fn parse_manifold_spec(
    source: &str,
    name: impl Into<String>,
) -> Result<AlmostContactStructure, StructureError> {
    let mut dimension: Option<usize> = None;
    let mut chart: Option<Arc<Chart>> = None;
    let mut section = Section::None;
    // slot -> (line, source text, parsed) for conflict detection
    let mut seen: HashMap<(char, usize, usize), (usize, String)> = HashMap::new();
    let mut f: Option<TensorField> = None;
    let mut t: Option<TensorField> = None;
    let mut a: Option<TensorField> = None;
    let mut g: Option<TensorField> = None;

    let err = |line: usize, message: String| StructureError::Format { line, message };

    for (line_idx, raw) in source.lines().enumerate() {
        let line_no = line_idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("dimension") {
            let rest = rest.trim_start();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| err(line_no, "expected `dimension = <int>`".into()))?
                .trim();
            let dim: usize = value
                .parse()
                .map_err(|_| err(line_no, format!("invalid dimension `{value}`")))?;
            if dim < 3 || dim.is_multiple_of(2) {
                return Err(err(
                    line_no,
                    format!("dimension must be odd and at least 3, got {dim}"),
                ));
            }
            dimension = Some(dim);
            continue;
        }
        if let Some(rest) = line.strip_prefix("coordinates") {
            let rest = rest.trim_start();
            let value = rest
                .strip_prefix('=')
                .ok_or_else(|| err(line_no, "expected `coordinates = <names>`".into()))?;
            let names: Vec<String> = value.split_whitespace().map(str::to_string).collect();
            let dim = dimension
                .ok_or_else(|| err(line_no, "dimension must precede coordinates".into()))?;
            if names.len() != dim {
                return Err(err(
                    line_no,
                    format!("expected {dim} coordinate names, got {}", names.len()),
                ));
            }
            let c = Chart::new(names).map_err(|e| err(line_no, e.to_string()))?;
            let c = Arc::new(c);
            f = Some(TensorField::zeros(c.clone(), Valence::ENDOMORPHISM));
            t = Some(TensorField::zeros(c.clone(), Valence::VECTOR));
            a = Some(TensorField::zeros(c.clone(), Valence::ONE_FORM));
            g = Some(TensorField::zeros(c.clone(), Valence::BILINEAR));
            chart = Some(c);
            continue;
        }
        if line.starts_with('[') {
            section = match line {
                "[metric]" => Section::Metric,
                "[F]" => Section::F,
                "[T]" => Section::T,
                "[A]" => Section::A,
                other => return Err(err(line_no, format!("unknown section `{other}`"))),
            };
            continue;
        }

        // Component line: `<letter> <indices> = <expr>`.
        let chart_ref = chart
            .as_ref()
            .ok_or_else(|| err(line_no, "component before coordinates".into()))?;
        let n = chart_ref.dimension();
        let (head, expr_src) = line
            .split_once('=')
            .ok_or_else(|| err(line_no, "expected `= <expression>`".into()))?;
        let mut parts = head.split_whitespace();
        let letter = parts
            .next()
            .ok_or_else(|| err(line_no, "missing component name".into()))?;
        let indices: Vec<usize> = parts
            .map(|p| {
                p.parse::<usize>()
                    .map_err(|_| err(line_no, format!("invalid index `{p}`")))
            })
            .collect::<Result<_, _>>()?;
        for &i in &indices {
            if i == 0 || i > n {
                return Err(err(line_no, format!("index {i} outside 1..={n}")));
            }
        }
        let expr_src = expr_src.trim();
        let parsed = chart_ref
            .parse_expr(expr_src)
            .map_err(|e| err(line_no, e.to_string()))?;

        let expected = |want: Section, rank: usize| -> Result<(), StructureError> {
            if section != want {
                return Err(err(
                    line_no,
                    format!("component `{letter}` outside its section"),
                ));
            }
            if indices.len() != rank {
                return Err(err(
                    line_no,
                    format!("component `{letter}` takes {rank} indices"),
                ));
            }
            Ok(())
        };

        match letter {
            "g" => {
                expected(Section::Metric, 2)?;
                let (i, j) = (indices[0] - 1, indices[1] - 1);
                let slot = ('g', i.min(j), i.max(j));
                if let Some((_, prev)) = seen.get(&slot) {
                    if prev != expr_src {
                        return Err(err(
                            line_no,
                            format!("conflicting component g[{}][{}]", indices[0], indices[1]),
                        ));
                    }
                } else {
                    seen.insert(slot, (line_no, expr_src.to_string()));
                }
                let gf = g.as_mut().expect("chart seen");
                gf.set_component(&[i, j], parsed.clone());
                gf.set_component(&[j, i], parsed);
            }
            "F" => {
                expected(Section::F, 2)?;
                let (i, j) = (indices[0] - 1, indices[1] - 1);
                let slot = ('F', i, j);
                if let Some((_, prev)) = seen.get(&slot) {
                    if prev != expr_src {
                        return Err(err(
                            line_no,
                            format!("conflicting component F[{}][{}]", indices[0], indices[1]),
                        ));
                    }
                } else {
                    seen.insert(slot, (line_no, expr_src.to_string()));
                }
                f.as_mut().expect("chart seen").set_component(&[i, j], parsed);
            }
            "T" => {
                expected(Section::T, 1)?;
                let i = indices[0] - 1;
                let slot = ('T', i, 0);
                if let Some((_, prev)) = seen.get(&slot) {
                    if prev != expr_src {
                        return Err(err(line_no, format!("conflicting component T[{}]", indices[0])));
                    }
                } else {
                    seen.insert(slot, (line_no, expr_src.to_string()));
                }
                t.as_mut().expect("chart seen").set_component(&[i], parsed);
            }
            "A" => {
                expected(Section::A, 1)?;
                let i = indices[0] - 1;
                let slot = ('A', i, 0);
                if let Some((_, prev)) = seen.get(&slot) {
                    if prev != expr_src {
                        return Err(err(line_no, format!("conflicting component A[{}]", indices[0])));
                    }
                } else {
                    seen.insert(slot, (line_no, expr_src.to_string()));
                }
                a.as_mut().expect("chart seen").set_component(&[i], parsed);
            }
            other => return Err(err(line_no, format!("unknown component `{other}`"))),
        }
    }

    let chart = chart.ok_or_else(|| StructureError::Format {
        line: 0,
        message: "missing dimension/coordinates header".into(),
    })?;
    AlmostContactStructure::new(
        chart,
        name,
        f.expect("chart seen"),
        t.expect("chart seen"),
        a.expect("chart seen"),
        g.expect("chart seen"),
    )
}

/// Load a manifold-spec file. The structure is not auto-validated.
pub fn load_spec(path: &std::path::Path) -> Result<AlmostContactStructure, StructureError> {
    let source = std::fs::read_to_string(path).map_err(|e| StructureError::Format {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| path.display().to_string());
    parse_manifold_spec(&source, name)
}

/// Pretty-print a structure in the manifold-spec format. Zero components
/// are omitted; the metric is emitted on its upper triangle. Reloading the
/// output reproduces every component expression structurally.
pub fn save_spec(s: &AlmostContactStructure) -> String {
    let chart = s.chart();
    let n = chart.dimension();
    let names: Vec<&str> = chart.names().iter().map(|s| s.as_str()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "dimension = {n}");
    let _ = writeln!(out, "coordinates = {}", names.join(" "));
    let is_zero = |e: &Expr| matches!(e, Expr::Constant(c) if *c == 0.0);

    let _ = writeln!(out, "\n[metric]");
    for i in 0..n {
        for j in i..n {
            let c = s.g().component(&[i, j]);
            if !is_zero(c) {
                let _ = writeln!(out, "g {} {} = {}", i + 1, j + 1, c.pretty(&names));
            }
        }
    }
    let _ = writeln!(out, "\n[F]");
    for i in 0..n {
        for j in 0..n {
            let c = s.f().component(&[i, j]);
            if !is_zero(c) {
                let _ = writeln!(out, "F {} {} = {}", i + 1, j + 1, c.pretty(&names));
            }
        }
    }
    let _ = writeln!(out, "\n[T]");
    for i in 0..n {
        let c = s.t().component(&[i]);
        if !is_zero(c) {
            let _ = writeln!(out, "T {} = {}", i + 1, c.pretty(&names));
        }
    }
    let _ = writeln!(out, "\n[A]");
    for i in 0..n {
        let c = s.a().component(&[i]);
        if !is_zero(c) {
            let _ = writeln!(out, "A {} = {}", i + 1, c.pretty(&names));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_validate() {
        for name in BUILTIN_NAMES {
            let s = builtin(name).unwrap();
            let reports = s.validate::<f64>(100, 42, 1e-9);
            for r in &reports {
                assert!(r.passed(), "{name} {}: residual {}", r.check_id, r.max_abs_residual);
            }
        }
    }

    #[test]
    fn flat_builtin_is_exact() {
        let s = builtin("flat-cosymplectic-3").unwrap();
        let reports = s.validate::<f64>(100, 42, 1e-12);
        for r in &reports {
            assert!(r.passed(), "{}: {}", r.check_id, r.max_abs_residual);
        }
    }

    #[test]
    fn unknown_builtin_lists_names() {
        match builtin("nope") {
            Err(StructureError::UnknownBuiltin { available, .. }) => {
                assert!(available.contains("sasakian-3"));
            }
            other => panic!("expected lookup error, got {other:?}"),
        }
    }

    #[test]
    fn flat_structure_vector_components() {
        let s = builtin("flat-cosymplectic-3").unwrap();
        let t: Vec<f64> = s.t().evaluate(&[0.7, -0.3, 1.9]).unwrap();
        assert_eq!(t, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn sasakian_one_form_at_reference_point() {
        let s = builtin("sasakian-3").unwrap();
        let a: Vec<f64> = s.a().evaluate(&[0.0, 4.0, 0.0]).unwrap();
        assert_eq!(a, vec![-2.0, 0.0, 0.5]);
    }

    #[test]
    fn sasakian_metric_at_y_zero() {
        let s = builtin("sasakian-3").unwrap();
        let (m, inv) = fields::metric_at(s.g(), &[1.3_f64, 0.0, -0.8]).unwrap();
        let want = [0.25, 0.0, 0.0, 0.0, 0.25, 0.0, 0.0, 0.0, 0.25];
        for (got, expect) in m.iter().zip(&want) {
            assert!((got - expect).abs() < 1e-15);
        }
        for (i, v) in inv.iter().enumerate() {
            let expect = if i % 4 == 0 { 4.0 } else { 0.0 };
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_flipped_one_form_fails_validation() {
        let s = builtin("flat-cosymplectic-3").unwrap();
        let mut a = TensorField::zeros(s.chart().clone(), Valence::ONE_FORM);
        a.set_component(&[2], Expr::Constant(-1.0));
        let bad = AlmostContactStructure::new(
            s.chart().clone(),
            "flipped",
            s.f().clone(),
            s.t().clone(),
            a,
            s.g().clone(),
        )
        .unwrap();
        let reports = bad.validate::<f64>(50, 42, 1e-9);
        let ax5 = reports.iter().find(|r| r.check_id == "AX5").unwrap();
        assert!(!ax5.passed());
        assert!((ax5.max_abs_residual - 2.0).abs() < 1e-12);
    }

    #[test]
    fn certify_attaches_certificate_only_on_pass() {
        let mut s = builtin("sasakian-3").unwrap();
        assert!(!s.is_validated());
        s.certify::<f64>(50, 42, 1e-9);
        assert!(s.is_validated());
        let cert = s.validation().unwrap();
        assert_eq!(cert.points, 50);
        assert_eq!(cert.seed, 42);
        assert!(cert.max_residual <= 1e-9);
    }

    const FLAT3_SPEC: &str = "\
# flat structure on R^3
dimension = 3
coordinates = x y z

[metric]
g 1 1 = 1
g 2 2 = 1
g 3 3 = 1

[F]
F 2 1 = 1
F 1 2 = -1

[T]
T 3 = 1

[A]
A 3 = 1
";

    #[test]
    fn spec_file_reproduces_builtin() {
        let loaded = parse_manifold_spec(FLAT3_SPEC, "flat3").unwrap();
        let b = builtin("flat-cosymplectic-3").unwrap();
        for fr in sample_frames::<f64>(3, 10, 42) {
            for (lf, bf) in [
                (loaded.f(), b.f()),
                (loaded.t(), b.t()),
                (loaded.a(), b.a()),
                (loaded.g(), b.g()),
            ] {
                let lv = lf.evaluate(&fr.point).unwrap();
                let bv = bf.evaluate(&fr.point).unwrap();
                assert_eq!(lv, bv);
            }
        }
        assert!(!loaded.is_validated());
        assert!(!loaded.known_generalized_cosymplectic());
    }

    #[test]
    fn conflicting_metric_component_is_rejected() {
        let text = "dimension = 3\ncoordinates = x y z\n[metric]\ng 1 1 = 1\ng 1 1 = 2\n";
        match parse_manifold_spec(text, "bad") {
            Err(StructureError::Format { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("conflicting component g[1][1]"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn symmetric_metric_slot_conflict_detected() {
        let text = "dimension = 3\ncoordinates = x y z\n[metric]\ng 1 2 = x\ng 2 1 = y\n";
        assert!(matches!(
            parse_manifold_spec(text, "bad"),
            Err(StructureError::Format { line: 5, .. })
        ));
    }

    #[test]
    fn duplicate_identical_component_is_allowed() {
        let text = "dimension = 3\ncoordinates = x y z\n[metric]\ng 1 2 = x\ng 2 1 = x\ng 1 1 = 1\ng 2 2 = 1\ng 3 3 = 1\n";
        assert!(parse_manifold_spec(text, "ok").is_ok());
    }

    #[test]
    fn omitted_structure_vector_fails_validation() {
        let text = "dimension = 3\ncoordinates = x y z\n[metric]\ng 1 1 = 1\ng 2 2 = 1\ng 3 3 = 1\n[A]\nA 3 = 1\n";
        let s = parse_manifold_spec(text, "no-t").unwrap();
        let reports = s.validate::<f64>(20, 42, 1e-9);
        let ax5 = reports.iter().find(|r| r.check_id == "AX5").unwrap();
        assert!(!ax5.passed(), "A(T) = 1 must fail when T defaults to zero");
    }

    #[test]
    fn expression_errors_carry_line_numbers() {
        let text = "dimension = 3\ncoordinates = x y z\n[metric]\ng 1 1 = 1 +\n";
        assert!(matches!(
            parse_manifold_spec(text, "bad"),
            Err(StructureError::Format { line: 4, .. })
        ));
    }

    #[test]
    fn save_then_load_round_trips_components() {
        for name in ["flat-cosymplectic-3", "sasakian-5"] {
            let s = builtin(name).unwrap();
            let text = save_spec(&s);
            let reloaded = parse_manifold_spec(&text, "reloaded").unwrap();
            assert_eq!(s.f().components(), reloaded.f().components());
            assert_eq!(s.t().components(), reloaded.t().components());
            assert_eq!(s.a().components(), reloaded.a().components());
            assert_eq!(s.g().components(), reloaded.g().components());
        }
    }

    #[test]
    fn sasakian_fundamental_form_is_proportional_to_da() {
        // Audit-style check: 'F agrees with the exterior derivative of A up
        // to the convention-dependent factor of +-2 or +-1/2; no sign or
        // normalization is asserted beyond proportionality.
        use crate::connections::PointContext;
        let s = builtin("sasakian-5").unwrap();
        for fr in sample_frames::<f64>(5, 50, 42) {
            let cx = PointContext::new(&s, &fr.point).unwrap();
            let fp = cx.fprime_of(&fr.x, &fr.y);
            let da = cx.deriv2(&cx.d_a, &fr.x, &fr.y) - cx.deriv2(&cx.d_a, &fr.y, &fr.x);
            let best = [2.0, -2.0, 0.5, -0.5]
                .iter()
                .map(|c| (fp - c * da).abs())
                .fold(f64::MAX, f64::min);
            assert!(best <= 1e-9, "'F vs dA proportionality residual {best}");
        }
    }

    #[test]
    fn even_dimension_is_rejected() {
        let text = "dimension = 4\ncoordinates = x y z w\n";
        assert!(matches!(
            parse_manifold_spec(text, "bad"),
            Err(StructureError::Format { .. })
        ));
    }
}
