//! Residual evaluators for the classification identities, the Nijenhuis
//! form, and the check registry.
//!
//! Checks run in three modes. `Assert` checks are machine-derivable
//! identities that must hold on every validated structure and fail the
//! run when their residual exceeds the tolerance. `Conditional` checks
//! assert their conclusion only when the premise holds (measured, or known
//! by construction for the builtins) and otherwise report. `Audit` checks
//! are claims whose derivations contain steps the engine will not vouch
//! for; they record premise and conclusion residuals side by side and
//! never affect the outcome of a run.

use std::cmp::Ordering;

use crate::analytic::{
    analytic_transfer_residual, exterior_derivative_forms, fuzzed_one_forms, one_form_at,
    OneFormAt,
};
use crate::connections::{torsion_form, torsion_vector, Connection, PointContext};
use crate::fields::FieldError;
use crate::report::{fmt_real_full, CheckReport};
use crate::sample::{sample_frames, PointFrame};
use crate::structure::AlmostContactStructure;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IdentityError {
    #[error("unknown check id `{id}`")]
    UnknownCheck { id: String },
    #[error("structure has not been validated")]
    NotValidated,
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// How a registry entry participates in a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Assert,
    AssertEquivalence,
    Conditional,
    Audit,
}

impl CheckMode {
    pub fn label(self) -> &'static str {
        match self {
            CheckMode::Assert => "assert",
            CheckMode::AssertEquivalence => "assert-equivalence",
            CheckMode::Conditional => "conditional",
            CheckMode::Audit => "audit",
        }
    }

    /// Whether the check can contribute a failure to the exit status.
    pub fn can_assert(self) -> bool {
        self != CheckMode::Audit
    }
}

/// Registry entry: identifier, mode, location label and description.
#[derive(Debug, Clone)]
pub struct CheckDef {
    pub id: &'static str,
    pub mode: CheckMode,
    pub location: &'static str,
    pub description: &'static str,
}

pub const REGISTRY: [CheckDef; 25] = [
    CheckDef {
        id: "E5",
        mode: CheckMode::Conditional,
        location: "§1 Eq. 5",
        description: "generalized co-symplectic identity for (D'F) against A-weighted (D A) terms",
    },
    CheckDef {
        id: "E6",
        mode: CheckMode::Conditional,
        location: "§1 Eq. 6",
        description: "generalized quasi-Sasakian cyclic identity",
    },
    CheckDef {
        id: "E7",
        mode: CheckMode::Audit,
        location: "§1 Eq. 7",
        description: "Nijenhuis form magnitude over sampled frames (normality indicator)",
    },
    CheckDef {
        id: "E8",
        mode: CheckMode::Audit,
        location: "§1 Eq. 8",
        description: "first-class chain residual including (D_T F) = 0",
    },
    CheckDef {
        id: "E9",
        mode: CheckMode::Audit,
        location: "§1 Eq. 9",
        description: "second-class chain residual including (D_T F) = 0",
    },
    CheckDef {
        id: "E11",
        mode: CheckMode::Assert,
        location: "§2 Eq. 11",
        description: "torsion two-path: coefficient route against 2 'F(X,Y) T",
    },
    CheckDef {
        id: "E12",
        mode: CheckMode::Assert,
        location: "§2 Eq. 12",
        description: "non-metricity two-path: coefficient route against the closed form",
    },
    CheckDef {
        id: "E13",
        mode: CheckMode::Assert,
        location: "§2 Eq. 13",
        description: "torsion (0,3) form two-path: g(S(X,Y),Z) against 2 A(Z) 'F(X,Y)",
    },
    CheckDef {
        id: "E14",
        mode: CheckMode::Assert,
        location: "§2 Eq. 14",
        description: "derivative of F under the torsion connection gains g(FX,FY) T",
    },
    CheckDef {
        id: "E15",
        mode: CheckMode::Assert,
        location: "§2 Eq. 15",
        description: "derivative of A under the torsion connection loses g(FX,Y)",
    },
    CheckDef {
        id: "E22",
        mode: CheckMode::Assert,
        location: "§2 Eq. 22",
        description: "'F has the same covariant derivative under both connections",
    },
    CheckDef {
        id: "E25",
        mode: CheckMode::Audit,
        location: "§2 Eq. 25",
        description: "normality condition residual under the metric connection",
    },
    CheckDef {
        id: "E26",
        mode: CheckMode::Audit,
        location: "§2 Eq. 26",
        description: "torsion-connection form of the co-symplectic condition",
    },
    CheckDef {
        id: "E40",
        mode: CheckMode::Audit,
        location: "§3 Eq. 40",
        description: "exterior-derivative gap of the structure 1-form (asserted as T3.2)",
    },
    CheckDef {
        id: "T2.1",
        mode: CheckMode::Assert,
        location: "§2 Theorem 2.1",
        description: "torsion (0,3) form is hybrid: S(FX,FY,Z) = S(X,Y,Z)",
    },
    CheckDef {
        id: "T2.2",
        mode: CheckMode::Conditional,
        location: "§2 Theorem 2.2",
        description: "first class persists under the torsion connection (corrected second argument in the antisymmetry chain)",
    },
    CheckDef {
        id: "T2.3",
        mode: CheckMode::Audit,
        location: "§2 Theorem 2.3",
        description: "vanishing cyclic (B'F) sum against the quasi-Sasakian identity",
    },
    CheckDef {
        id: "T2.4",
        mode: CheckMode::AssertEquivalence,
        location: "§2 Theorem 2.4",
        description: "normality: metric-connection residual equals the torsion-connection form (bracket sign algebraically forced)",
    },
    CheckDef {
        id: "T2.5",
        mode: CheckMode::AssertEquivalence,
        location: "§2 Theorem 2.5",
        description: "co-symplectic condition: metric-connection residual equals the torsion-connection form",
    },
    CheckDef {
        id: "T2.6",
        mode: CheckMode::Audit,
        location: "§2 Theorem 2.6",
        description: "Killing F under the torsion connection against (B_X A)(FZ) + g(X,Z)",
    },
    CheckDef {
        id: "T2.7",
        mode: CheckMode::Audit,
        location: "§2 Theorem 2.7",
        description: "with the Killing field read as the structure vector: 'N - d'F(X,Y,FZ) against 2 A(Z)(B_FY A)(FX)",
    },
    CheckDef {
        id: "T2.8",
        mode: CheckMode::Conditional,
        location: "§2 Theorem 2.8",
        description: "symmetric (B'F)(.,.,T) forces the cyclic (D'F) sum to vanish",
    },
    CheckDef {
        id: "C2.1",
        mode: CheckMode::Audit,
        location: "§2 Corollary 2.1",
        description: "closed 'F forces 'N(X,Y,FZ) = 0",
    },
    CheckDef {
        id: "T3.1",
        mode: CheckMode::Assert,
        location: "§3 Theorem 3.1",
        description: "analyticity-transfer gap equals 2 w(T) g(FX,FY) for fuzzed test forms",
    },
    CheckDef {
        id: "T3.2",
        mode: CheckMode::Assert,
        location: "§3 Theorem 3.2",
        description: "exterior-derivative relation for the structure 1-form (premise unused; holds unconditionally)",
    },
];

pub fn find_check(id: &str) -> Option<&'static CheckDef> {
    REGISTRY.iter().find(|def| def.id == id)
}

/// Sampling parameters of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub points: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            points: 100,
            seed: 42,
            tol: 1e-9,
        }
    }
}

/// Frames and per-point contexts shared by every check of one run.
pub struct PreparedRun<T> {
    pub frames: Vec<PointFrame<T>>,
    pub contexts: Vec<PointContext<T>>,
}

pub fn prepare<T: Scalar>(
    s: &AlmostContactStructure,
    cfg: &RunConfig,
) -> Result<PreparedRun<T>, IdentityError> {
    let frames = sample_frames::<T>(s.chart().dimension(), cfg.points, cfg.seed);
    let contexts = frames
        .iter()
        .map(|fr| PointContext::new(s, &fr.point))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PreparedRun { frames, contexts })
}

// ---------------------------------------------------------------------------
// Residual evaluators
// ---------------------------------------------------------------------------

/// Residual of the generalized co-symplectic identity:
/// `(D_X 'F)(Y,Z) - A(Y)(D_X A)(FZ) + A(Z)(D_X A)(FY)`.
pub fn gen_cosymplectic_residual<T: Scalar>(
    cx: &PointContext<T>,
    x: &[T],
    y: &[T],
    z: &[T],
) -> T {
    let zb = cx.bar(z);
    let yb = cx.bar(y);
    cx.deriv3(&cx.d_fprime, x, y, z) - cx.a_of(y) * cx.deriv2(&cx.d_a, x, &zb)
        + cx.a_of(z) * cx.deriv2(&cx.d_a, x, &yb)
}

/// Residual of the generalized quasi-Sasakian cyclic identity. With a
/// repeated frame argument both sides cancel term by term, so the residual
/// is exactly zero.
pub fn gen_quasi_sasakian_residual<T: Scalar>(
    cx: &PointContext<T>,
    x: &[T],
    y: &[T],
    z: &[T],
) -> T {
    let lhs = exterior_fprime(cx, x, y, z);
    let xb = cx.bar(x);
    let yb = cx.bar(y);
    let zb = cx.bar(z);
    let da = |u: &[T], v: &[T]| cx.deriv2(&cx.d_a, u, v);
    let rhs = cx.a_of(x) * (da(y, &zb) - da(z, &yb))
        + cx.a_of(y) * (da(z, &xb) - da(x, &zb))
        + cx.a_of(z) * (da(x, &yb) - da(y, &xb));
    lhs - rhs
}

/// The Nijenhuis form
/// `'N(X,Y,Z) = (D_FX 'F)(Y,Z) - (D_FY 'F)(X,Z) + (D_X 'F)(Y,FZ) - (D_Y 'F)(X,FZ)`.
/// The grouping makes the X <-> Y antisymmetry exact in floating point.
pub fn nijenhuis_form<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let xb = cx.bar(x);
    let yb = cx.bar(y);
    let zb = cx.bar(z);
    let c = |a: &[T], b: &[T], d: &[T]| cx.deriv3(&cx.d_fprime, a, b, d);
    (c(&xb, y, z) - c(&yb, x, z)) + (c(x, y, &zb) - c(y, x, &zb))
}

fn lex_cmp<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return Ordering::Less;
        }
        if x > y {
            return Ordering::Greater;
        }
    }
    Ordering::Equal
}

/// Exterior derivative of the fundamental form as the plain cyclic sum
/// `(D_X 'F)(Y,Z) + (D_Y 'F)(Z,X) + (D_Z 'F)(X,Y)`, no normalization.
///
/// The arguments are brought into a canonical order first and the parity
/// sign applied afterwards, which makes the form alternating to the bit:
/// swapping any two arguments negates the result exactly and a repeated
/// argument gives exactly zero.
pub fn exterior_fprime<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let mut v = [x, y, z];
    let mut sign = T::one();
    for i in 1..3 {
        let mut j = i;
        while j > 0 {
            match lex_cmp(v[j - 1], v[j]) {
                Ordering::Greater => {
                    v.swap(j - 1, j);
                    sign = -sign;
                    j -= 1;
                }
                Ordering::Equal => return T::zero(),
                Ordering::Less => break,
            }
        }
    }
    let c = |a: &[T], b: &[T], d: &[T]| cx.deriv3(&cx.d_fprime, a, b, d);
    sign * (c(v[0], v[1], v[2]) + c(v[1], v[2], v[0]) + c(v[2], v[0], v[1]))
}

/// Normality residual under the metric connection:
/// `(D_X 'F)(Y,Z) - A(Y)(D_Z A)(FX) - A(Z)(D_FX A)(Y)`.
pub fn normality_residual<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let xb = cx.bar(x);
    cx.deriv3(&cx.d_fprime, x, y, z)
        - cx.a_of(y) * cx.deriv2(&cx.d_a, z, &xb)
        - cx.a_of(z) * cx.deriv2(&cx.d_a, &xb, y)
}

/// Torsion-connection form of the normality condition, with the bracket
/// sign fixed by the algebra:
/// `(B_X 'F)(Y,Z) - A(Y)[(B_Z A)(FX) + g(X,Z)] - A(Z)[(B_FX A)(Y) - g(X,Y)]`.
pub fn normality_residual_b<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let xb = cx.bar(x);
    cx.deriv3(&cx.b_fprime, x, y, z)
        - cx.a_of(y) * (cx.deriv2(&cx.b_a, z, &xb) + cx.g_of(x, z))
        - cx.a_of(z) * (cx.deriv2(&cx.b_a, &xb, y) - cx.g_of(x, y))
}

/// Torsion-connection form of the co-symplectic condition:
/// `(B_X 'F)(Y,Z) - A(Y)[(B_X A)(FZ) + g(X,Z)] + A(Z)[(B_X A)(FY) + g(X,Y)]`.
pub fn cosymplectic_residual_b<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T], z: &[T]) -> T {
    let zb = cx.bar(z);
    let yb = cx.bar(y);
    cx.deriv3(&cx.b_fprime, x, y, z)
        - cx.a_of(y) * (cx.deriv2(&cx.b_a, x, &zb) + cx.g_of(x, z))
        + cx.a_of(z) * (cx.deriv2(&cx.b_a, x, &yb) + cx.g_of(x, y))
}

fn first_class_residual<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T]) -> T {
    let xb = cx.bar(x);
    let yb = cx.bar(y);
    let da = |u: &[T], v: &[T]| cx.deriv2(&cx.d_a, u, v);
    let r1 = (da(x, &yb) + da(&xb, y)).abs();
    let r2 = (da(x, &yb) - da(y, &xb)).abs();
    r1.max(r2)
}

fn second_class_residual<T: Scalar>(cx: &PointContext<T>, x: &[T], y: &[T]) -> T {
    let xb = cx.bar(x);
    let yb = cx.bar(y);
    let da = |u: &[T], v: &[T]| cx.deriv2(&cx.d_a, u, v);
    let r1 = (da(x, &yb) - da(&xb, y)).abs();
    let r2 = (da(x, &yb) + da(y, &xb)).abs();
    r1.max(r2)
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// Class labels with the worst chain residuals that produced them.
#[derive(Debug, Clone)]
pub struct Classification {
    pub first_class: bool,
    pub second_class: bool,
    pub first_chain_residual: f64,
    pub second_chain_residual: f64,
    pub d_t_f_residual: f64,
    pub points: usize,
    pub seed: u64,
    pub tolerance: f64,
}

/// Evaluate the first- and second-class symmetry chains together with
/// `(D_T F) = 0` over sampled frames. Requires a validated structure
/// unless `allow_unvalidated` is set.
pub fn classify_structure<T: Scalar>(
    s: &AlmostContactStructure,
    cfg: &RunConfig,
    allow_unvalidated: bool,
) -> Result<Classification, IdentityError> {
    if !s.is_validated() && !allow_unvalidated {
        return Err(IdentityError::NotValidated);
    }
    let prepared = prepare::<T>(s, cfg)?;
    let mut first = 0.0_f64;
    let mut second = 0.0_f64;
    let mut dtf = 0.0_f64;
    for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
        first = first.max(first_class_residual(cx, &fr.x, &fr.y).as_f64());
        second = second.max(second_class_residual(cx, &fr.x, &fr.y).as_f64());
        dtf = dtf.max(cx.derivative_along_t_of_f(Connection::LeviCivita).as_f64());
    }
    Ok(Classification {
        first_class: first.max(dtf) <= cfg.tol,
        second_class: second.max(dtf) <= cfg.tol,
        first_chain_residual: first,
        second_chain_residual: second,
        d_t_f_residual: dtf,
        points: cfg.points,
        seed: cfg.seed,
        tolerance: cfg.tol,
    })
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

fn max_over_frames<T: Scalar>(
    prepared: &PreparedRun<T>,
    mut residual: impl FnMut(&PointContext<T>, &PointFrame<T>) -> T,
) -> (f64, Option<usize>) {
    let mut worst = 0.0_f64;
    let mut at = None;
    for (idx, (cx, fr)) in prepared.contexts.iter().zip(&prepared.frames).enumerate() {
        let r = residual(cx, fr).abs().as_f64();
        let r = if r.is_finite() { r } else { f64::MAX };
        if r > worst || at.is_none() {
            worst = r;
            at = Some(idx);
        }
    }
    (worst, at)
}

fn frame_text<T: Scalar>(fr: &PointFrame<T>) -> String {
    let fmt = |v: &[T]| {
        let parts: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
        format!("({})", parts.join(", "))
    };
    format!(
        "point={} X={} Y={} Z={}",
        fmt(&fr.point),
        fmt(&fr.x),
        fmt(&fr.y),
        fmt(&fr.z)
    )
}

/// Number of fuzzed test 1-forms used by the analyticity-transfer check.
pub const TEST_FORM_COUNT: usize = 10;

struct Outcome {
    residual: f64,
    worst: Option<usize>,
    asserted: bool,
    note: Option<String>,
}

fn plain(residual: (f64, Option<usize>), asserted: bool) -> Outcome {
    Outcome {
        residual: residual.0,
        worst: residual.1,
        asserted,
        note: None,
    }
}

fn audited(premise: f64, conclusion: (f64, Option<usize>)) -> Outcome {
    Outcome {
        residual: conclusion.0,
        worst: conclusion.1,
        asserted: false,
        note: Some(format!("premise max residual {}", fmt_real_full(premise))),
    }
}

fn conditional(
    premise_holds: bool,
    premise_note: String,
    conclusion: (f64, Option<usize>),
) -> Outcome {
    Outcome {
        residual: conclusion.0,
        worst: conclusion.1,
        asserted: premise_holds,
        note: Some(premise_note),
    }
}

/// Run a single registry check against a prepared sample set.
pub fn run_check<T: Scalar>(
    s: &AlmostContactStructure,
    prepared: &PreparedRun<T>,
    def: &CheckDef,
    cfg: &RunConfig,
) -> Result<CheckReport, IdentityError> {
    let outcome = evaluate_check(s, prepared, def, cfg)?;
    let mut description = def.description.to_string();
    if let Some(note) = &outcome.note {
        description.push_str(" | ");
        description.push_str(note);
    }
    let report = if outcome.asserted {
        let mut r = CheckReport::graded(
            def.id,
            description.clone(),
            cfg.points,
            cfg.seed,
            outcome.residual,
            cfg.tol,
        );
        if !r.passed() {
            if let Some(idx) = outcome.worst {
                r.description = format!("{description} | worst {}", frame_text(&prepared.frames[idx]));
            }
        }
        r
    } else {
        CheckReport::reported(
            def.id,
            description,
            cfg.points,
            cfg.seed,
            outcome.residual,
            cfg.tol,
        )
    };
    Ok(report)
}

fn evaluate_check<T: Scalar>(
    s: &AlmostContactStructure,
    prepared: &PreparedRun<T>,
    def: &CheckDef,
    cfg: &RunConfig,
) -> Result<Outcome, IdentityError> {
    let two = T::of(2.0);
    let outcome = match def.id {
        "E5" => {
            let res = max_over_frames(prepared, |cx, fr| {
                gen_cosymplectic_residual(cx, &fr.x, &fr.y, &fr.z)
            });
            if s.known_generalized_cosymplectic() {
                plain(res, true)
            } else {
                Outcome {
                    residual: res.0,
                    worst: res.1,
                    asserted: false,
                    note: Some("class membership not known for this structure; reported".into()),
                }
            }
        }
        "E6" => {
            let res = max_over_frames(prepared, |cx, fr| {
                gen_quasi_sasakian_residual(cx, &fr.x, &fr.y, &fr.z)
            });
            if s.known_generalized_quasi_sasakian() {
                plain(res, true)
            } else {
                Outcome {
                    residual: res.0,
                    worst: res.1,
                    asserted: false,
                    note: Some("class membership not known for this structure; reported".into()),
                }
            }
        }
        "E7" => plain(
            max_over_frames(prepared, |cx, fr| nijenhuis_form(cx, &fr.x, &fr.y, &fr.z)),
            false,
        ),
        "E8" => plain(
            max_over_frames(prepared, |cx, fr| {
                first_class_residual(cx, &fr.x, &fr.y)
                    .max(cx.derivative_along_t_of_f(Connection::LeviCivita))
            }),
            false,
        ),
        "E9" => plain(
            max_over_frames(prepared, |cx, fr| {
                second_class_residual(cx, &fr.x, &fr.y)
                    .max(cx.derivative_along_t_of_f(Connection::LeviCivita))
            }),
            false,
        ),
        "E11" => plain(
            max_over_frames(prepared, |cx, fr| {
                let sv = torsion_vector(cx, &fr.x, &fr.y);
                let fp = cx.fprime_of(&fr.x, &fr.y);
                let mut worst = T::zero();
                for (k, v) in sv.iter().enumerate() {
                    worst = worst.max((*v - two * fp * cx.t[k]).abs());
                }
                worst
            }),
            true,
        ),
        "E12" => plain(
            max_over_frames(prepared, |cx, fr| {
                let lhs = cx.deriv3(&cx.b_g, &fr.x, &fr.y, &fr.z);
                let rhs = -cx.a_of(&fr.y) * cx.fprime_of(&fr.x, &fr.z)
                    - cx.a_of(&fr.z) * cx.fprime_of(&fr.x, &fr.y);
                lhs - rhs
            }),
            true,
        ),
        "E13" => plain(
            max_over_frames(prepared, |cx, fr| {
                torsion_form(cx, &fr.x, &fr.y, &fr.z)
                    - two * cx.a_of(&fr.z) * cx.fprime_of(&fr.x, &fr.y)
            }),
            true,
        ),
        "E14" => plain(
            max_over_frames(prepared, |cx, fr| {
                let lhs = cx.deriv_endo(&cx.b_f, &fr.x, &fr.y);
                let rhs = cx.deriv_endo(&cx.d_f, &fr.x, &fr.y);
                let xb = cx.bar(&fr.x);
                let yb = cx.bar(&fr.y);
                let gff = cx.g_of(&xb, &yb);
                let mut worst = T::zero();
                for i in 0..cx.n {
                    worst = worst.max((lhs[i] - rhs[i] - gff * cx.t[i]).abs());
                }
                worst
            }),
            true,
        ),
        "E15" => plain(
            max_over_frames(prepared, |cx, fr| {
                let xb = cx.bar(&fr.x);
                cx.deriv2(&cx.b_a, &fr.x, &fr.y)
                    - (cx.deriv2(&cx.d_a, &fr.x, &fr.y) - cx.g_of(&xb, &fr.y))
            }),
            true,
        ),
        "E22" => plain(
            max_over_frames(prepared, |cx, fr| {
                cx.deriv3(&cx.d_fprime, &fr.x, &fr.y, &fr.z)
                    - cx.deriv3(&cx.b_fprime, &fr.x, &fr.y, &fr.z)
            }),
            true,
        ),
        "E25" => plain(
            max_over_frames(prepared, |cx, fr| {
                normality_residual(cx, &fr.x, &fr.y, &fr.z)
            }),
            false,
        ),
        "E26" => plain(
            max_over_frames(prepared, |cx, fr| {
                cosymplectic_residual_b(cx, &fr.x, &fr.y, &fr.z)
            }),
            false,
        ),
        "E40" => plain(
            max_over_frames(prepared, |cx, fr| {
                exterior_derivative_forms(cx, &fr.x, &fr.y).2
            }),
            false,
        ),
        "T2.1" => plain(
            max_over_frames(prepared, |cx, fr| {
                let xb = cx.bar(&fr.x);
                let yb = cx.bar(&fr.y);
                torsion_form(cx, &xb, &yb, &fr.z) - torsion_form(cx, &fr.x, &fr.y, &fr.z)
            }),
            true,
        ),
        "T2.2" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                first_class_residual(cx, &fr.x, &fr.y)
                    .max(cx.derivative_along_t_of_f(Connection::LeviCivita))
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                let xb = cx.bar(&fr.x);
                let yb = cx.bar(&fr.y);
                let ba = |u: &[T], v: &[T]| cx.deriv2(&cx.b_a, u, v);
                let c1 = (ba(&fr.x, &yb) + ba(&xb, &fr.y)).abs();
                let c2 = (ba(&fr.x, &yb) - ba(&fr.y, &xb)).abs();
                let c3 = cx.derivative_along_t_of_f(Connection::SemiSymmetric);
                c1.max(c2).max(c3)
            });
            let holds = premise.0 <= cfg.tol;
            let note = if holds {
                format!(
                    "premise first class holds (max residual {})",
                    fmt_real_full(premise.0)
                )
            } else {
                format!(
                    "premise first class fails (max residual {}); reported",
                    fmt_real_full(premise.0)
                )
            };
            conditional(holds, note, conclusion)
        }
        "T2.3" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                cx.deriv3(&cx.b_fprime, &fr.x, &fr.y, &fr.z)
                    + cx.deriv3(&cx.b_fprime, &fr.y, &fr.z, &fr.x)
                    + cx.deriv3(&cx.b_fprime, &fr.z, &fr.x, &fr.y)
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                gen_quasi_sasakian_residual(cx, &fr.x, &fr.y, &fr.z)
            });
            audited(premise.0, conclusion)
        }
        "T2.4" => plain(
            max_over_frames(prepared, |cx, fr| {
                normality_residual(cx, &fr.x, &fr.y, &fr.z)
                    - normality_residual_b(cx, &fr.x, &fr.y, &fr.z)
            }),
            true,
        ),
        "T2.5" => plain(
            max_over_frames(prepared, |cx, fr| {
                gen_cosymplectic_residual(cx, &fr.x, &fr.y, &fr.z)
                    - cosymplectic_residual_b(cx, &fr.x, &fr.y, &fr.z)
            }),
            true,
        ),
        "T2.6" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                cx.deriv3(&cx.b_fprime, &fr.x, &fr.y, &fr.z)
                    + cx.deriv3(&cx.b_fprime, &fr.y, &fr.x, &fr.z)
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                let zb = cx.bar(&fr.z);
                cx.deriv2(&cx.b_a, &fr.x, &zb) + cx.g_of(&fr.x, &fr.z)
            });
            audited(premise.0, conclusion)
        }
        "T2.7" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                cx.deriv2(&cx.d_a, &fr.x, &fr.y) + cx.deriv2(&cx.d_a, &fr.y, &fr.x)
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                let xb = cx.bar(&fr.x);
                let yb = cx.bar(&fr.y);
                let zb = cx.bar(&fr.z);
                nijenhuis_form(cx, &fr.x, &fr.y, &fr.z)
                    - exterior_fprime(cx, &fr.x, &fr.y, &zb)
                    - two * cx.a_of(&fr.z) * cx.deriv2(&cx.b_a, &yb, &xb)
            });
            audited(premise.0, conclusion)
        }
        "T2.8" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                let t = cx.t.clone();
                cx.deriv3(&cx.b_fprime, &fr.x, &fr.y, &t)
                    - cx.deriv3(&cx.b_fprime, &fr.y, &fr.x, &t)
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                exterior_fprime(cx, &fr.x, &fr.y, &fr.z)
            });
            let known = s.known_generalized_cosymplectic();
            let holds = known && premise.0 <= cfg.tol;
            let note = if !known {
                "co-symplectic premise not known for this structure; reported".to_string()
            } else if holds {
                format!(
                    "premise symmetric (B'F)(.,.,T) holds (max residual {})",
                    fmt_real_full(premise.0)
                )
            } else {
                format!(
                    "premise symmetric (B'F)(.,.,T) fails (max residual {}); reported",
                    fmt_real_full(premise.0)
                )
            };
            conditional(holds, note, conclusion)
        }
        "C2.1" => {
            let premise = max_over_frames(prepared, |cx, fr| {
                exterior_fprime(cx, &fr.x, &fr.y, &fr.z)
            });
            let conclusion = max_over_frames(prepared, |cx, fr| {
                let zb = cx.bar(&fr.z);
                nijenhuis_form(cx, &fr.x, &fr.y, &zb)
            });
            audited(premise.0, conclusion)
        }
        "T3.1" => {
            let forms = fuzzed_one_forms(s, TEST_FORM_COUNT, cfg.seed);
            let mut worst = 0.0_f64;
            let mut at = None;
            for (idx, (cx, fr)) in prepared
                .contexts
                .iter()
                .zip(&prepared.frames)
                .enumerate()
            {
                for form in &forms {
                    let wat: OneFormAt<T> =
                        one_form_at(form, cx).map_err(IdentityError::Field)?;
                    let r = analytic_transfer_residual(cx, &wat, &fr.x, &fr.y)
                        .abs()
                        .as_f64();
                    let r = if r.is_finite() { r } else { f64::MAX };
                    if r > worst || at.is_none() {
                        worst = r;
                        at = Some(idx);
                    }
                }
            }
            plain((worst, at), true)
        }
        "T3.2" => plain(
            max_over_frames(prepared, |cx, fr| {
                exterior_derivative_forms(cx, &fr.x, &fr.y).2
            }),
            true,
        ),
        other => {
            return Err(IdentityError::UnknownCheck {
                id: other.to_string(),
            })
        }
    };
    Ok(outcome)
}

/// Run a set of registry checks over one prepared sample set. Requires a
/// validated structure unless `allow_unvalidated` is set.
pub fn run_registry<T: Scalar>(
    s: &AlmostContactStructure,
    defs: &[&CheckDef],
    cfg: &RunConfig,
    allow_unvalidated: bool,
) -> Result<Vec<CheckReport>, IdentityError> {
    if !s.is_validated() && !allow_unvalidated {
        return Err(IdentityError::NotValidated);
    }
    let prepared = prepare::<T>(s, cfg)?;
    defs.iter()
        .map(|def| run_check(s, &prepared, def, cfg))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::builtin;

    fn prep(name: &str, points: usize) -> (AlmostContactStructure, PreparedRun<f64>, RunConfig) {
        let mut s = builtin(name).unwrap();
        let cfg = RunConfig {
            points,
            ..RunConfig::default()
        };
        s.certify::<f64>(cfg.points, cfg.seed, cfg.tol);
        let prepared = prepare::<f64>(&s, &cfg).unwrap();
        (s, prepared, cfg)
    }

    #[test]
    fn flat_structure_zeroes_the_class_identities() {
        let (_, prepared, _) = prep("flat-cosymplectic-3", 50);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            assert_eq!(gen_cosymplectic_residual(cx, &fr.x, &fr.y, &fr.z), 0.0);
            assert_eq!(gen_quasi_sasakian_residual(cx, &fr.x, &fr.y, &fr.z), 0.0);
            assert_eq!(nijenhuis_form(cx, &fr.x, &fr.y, &fr.z), 0.0);
            assert_eq!(exterior_fprime(cx, &fr.x, &fr.y, &fr.z), 0.0);
        }
    }

    #[test]
    fn sasakian_satisfies_both_class_identities() {
        let (_, prepared, _) = prep("sasakian-3", 100);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            assert!(gen_cosymplectic_residual(cx, &fr.x, &fr.y, &fr.z).abs() <= 1e-9);
            assert!(gen_quasi_sasakian_residual(cx, &fr.x, &fr.y, &fr.z).abs() <= 1e-9);
        }
    }

    #[test]
    fn cosymplectic_residual_evaluates_with_repeated_arguments() {
        let (_, prepared, _) = prep("sasakian-3", 10);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            // No special-casing: the formula simply evaluates at Y = Z.
            let r = gen_cosymplectic_residual(cx, &fr.x, &fr.y, &fr.y);
            assert!(r.is_finite());
        }
    }

    #[test]
    fn quasi_sasakian_residual_exact_zero_on_repeated_frame() {
        let (_, prepared, _) = prep("sasakian-3", 20);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            assert_eq!(gen_quasi_sasakian_residual(cx, &fr.x, &fr.x, &fr.x), 0.0);
        }
    }

    #[test]
    fn nijenhuis_antisymmetry_is_exact() {
        let (_, prepared, _) = prep("sasakian-3", 30);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            let a = nijenhuis_form(cx, &fr.x, &fr.y, &fr.z);
            let b = nijenhuis_form(cx, &fr.y, &fr.x, &fr.z);
            assert_eq!(a + b, 0.0);
        }
    }

    #[test]
    fn nijenhuis_golden_value_at_origin() {
        // Coefficient route against the closed-form value -1/4 computed by
        // hand from (D_U 'F)(V, W) = A(V) g(U, W) - g(U, V) A(W) at the
        // origin with the coordinate frame (d/dx, d/dy, d/dz).
        let s = builtin("sasakian-3").unwrap();
        let cx = PointContext::new(&s, &[0.0_f64, 0.0, 0.0]).unwrap();
        let ex = vec![1.0, 0.0, 0.0];
        let ey = vec![0.0, 1.0, 0.0];
        let ez = vec![0.0, 0.0, 1.0];
        let n = nijenhuis_form(&cx, &ex, &ey, &ez);
        assert!((n + 0.25).abs() <= 1e-12, "golden Nijenhuis value, got {n}");
    }

    #[test]
    fn exterior_fprime_is_alternating_to_the_bit() {
        let (_, prepared, _) = prep("sasakian-3", 30);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            let base = exterior_fprime(cx, &fr.x, &fr.y, &fr.z);
            assert_eq!(exterior_fprime(cx, &fr.y, &fr.x, &fr.z), -base);
            assert_eq!(exterior_fprime(cx, &fr.x, &fr.z, &fr.y), -base);
            assert_eq!(exterior_fprime(cx, &fr.z, &fr.y, &fr.x), -base);
            assert_eq!(exterior_fprime(cx, &fr.x, &fr.x, &fr.z), 0.0);
        }
    }

    #[test]
    fn sasakian_fundamental_form_is_closed() {
        let (_, prepared, _) = prep("sasakian-3", 100);
        for (cx, fr) in prepared.contexts.iter().zip(&prepared.frames) {
            assert!(exterior_fprime(cx, &fr.x, &fr.y, &fr.z).abs() <= 1e-9);
        }
    }

    #[test]
    fn classify_flat_is_both_classes() {
        let mut s = builtin("flat-cosymplectic-3").unwrap();
        s.certify::<f64>(100, 42, 1e-9);
        let c = classify_structure::<f64>(&s, &RunConfig::default(), false).unwrap();
        assert!(c.first_class);
        assert!(c.second_class);
        assert_eq!(c.first_chain_residual, 0.0);
        assert_eq!(c.second_chain_residual, 0.0);
    }

    #[test]
    fn classify_sasakian_is_first_class_only() {
        let mut s = builtin("sasakian-3").unwrap();
        s.certify::<f64>(100, 42, 1e-9);
        let c = classify_structure::<f64>(&s, &RunConfig::default(), false).unwrap();
        assert!(c.first_class, "first chain residual {}", c.first_chain_residual);
        assert!(!c.second_class);
        assert!(c.second_chain_residual > 0.1, "worst second-class residual");
    }

    #[test]
    fn classify_refuses_unvalidated_structures() {
        let s = builtin("sasakian-3").unwrap();
        let r = classify_structure::<f64>(&s, &RunConfig::default(), false);
        assert!(matches!(r, Err(IdentityError::NotValidated)));
    }

    #[test]
    fn assert_suite_passes_on_builtins() {
        for name in ["flat-cosymplectic-3", "sasakian-3"] {
            let (s, prepared, cfg) = prep(name, 100);
            for def in REGISTRY.iter().filter(|d| d.mode.can_assert()) {
                let report = run_check(&s, &prepared, def, &cfg).unwrap();
                assert!(
                    report.passed(),
                    "{name} {}: {} (residual {})",
                    def.id,
                    report.description,
                    report.max_abs_residual
                );
            }
        }
    }

    #[test]
    fn theorem_2_2_asserts_on_first_class_builtin() {
        let (s, prepared, cfg) = prep("sasakian-3", 100);
        let def = find_check("T2.2").unwrap();
        let report = run_check(&s, &prepared, def, &cfg).unwrap();
        assert_eq!(report.verdict, crate::report::Verdict::Pass);
        assert!(report.description.contains("premise first class holds"));
    }

    #[test]
    fn audit_checks_report_premise_and_conclusion() {
        let (s, prepared, cfg) = prep("flat-cosymplectic-3", 50);
        for id in ["T2.3", "T2.6", "T2.7", "C2.1"] {
            let def = find_check(id).unwrap();
            let report = run_check(&s, &prepared, def, &cfg).unwrap();
            assert_eq!(report.verdict, crate::report::Verdict::Reported);
            assert!(report.description.contains("premise max residual"));
        }
    }

    #[test]
    fn equivalence_checks_hold_frame_wise() {
        for name in ["flat-cosymplectic-5", "sasakian-5"] {
            let (s, prepared, cfg) = prep(name, 100);
            for id in ["T2.4", "T2.5"] {
                let def = find_check(id).unwrap();
                let report = run_check(&s, &prepared, def, &cfg).unwrap();
                assert!(report.passed(), "{name} {id}: {}", report.max_abs_residual);
            }
        }
    }

    #[test]
    fn unknown_check_id_is_rejected() {
        assert!(find_check("BOGUS").is_none());
        let (s, prepared, cfg) = prep("flat-cosymplectic-3", 5);
        let fake = CheckDef {
            id: "BOGUS",
            mode: CheckMode::Audit,
            location: "",
            description: "",
        };
        let r = run_check(&s, &prepared, &fake, &cfg);
        assert!(matches!(r, Err(IdentityError::UnknownCheck { .. })));
    }

    #[test]
    fn registry_covers_twenty_plus_checks() {
        assert!(REGISTRY.len() >= 20);
        let asserted: Vec<&str> = REGISTRY
            .iter()
            .filter(|d| d.mode.can_assert())
            .map(|d| d.id)
            .collect();
        for id in [
            "E11", "E12", "E13", "E14", "E15", "E22", "T2.1", "T2.2", "T2.4", "T2.5", "E5",
            "E6", "T3.1", "T3.2",
        ] {
            assert!(asserted.contains(&id), "{id} must be assert-capable");
        }
    }

    #[test]
    fn run_registry_requires_validation() {
        let s = builtin("sasakian-3").unwrap();
        let defs: Vec<&CheckDef> = REGISTRY.iter().collect();
        let r = run_registry::<f64>(&s, &defs, &RunConfig::default(), false);
        assert!(matches!(r, Err(IdentityError::NotValidated)));
    }
}
