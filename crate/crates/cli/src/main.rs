//! Command-line harness: load or select a structure, validate its axioms,
//! classify it, and run the identity/theorem check registry with
//! deterministic text or JSON reports.
//!
//! Exit codes: 0 success, 1 assert failure, 2 usage or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use acmm::identities::{self, CheckDef, CheckMode, RunConfig, REGISTRY};
use acmm::report::{self, CheckReport, Verdict};
use acmm::structure::{self, AlmostContactStructure};

#[derive(Parser)]
#[command(
    name = "acmm",
    version,
    about = "Validate, classify and verify almost contact metric structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the structure axioms at sampled points
    Validate(ValidateCmd),
    /// Determine first-class / second-class membership
    Classify(ClassifyCmd),
    /// Run identity and theorem checks from the registry
    Verify(VerifyCmd),
    /// Run only the audit (report-only) checks
    Audit(AuditCmd),
    /// List the check registry
    List(ListCmd),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Builtin structure name (flat-cosymplectic-3, flat-cosymplectic-5,
    /// sasakian-3, sasakian-5)
    #[arg(long)]
    builtin: Option<String>,
    /// Path to a manifold-spec file
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    /// Number of sampled points (one frame triple per point)
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Seed of the deterministic sample stream
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Residual tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
}

impl SampleArgs {
    fn config(&self) -> Result<RunConfig, String> {
        if self.points < 1 {
            return Err("--points must be at least 1".into());
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err("--tol must be positive".into());
        }
        Ok(RunConfig {
            points: self.points,
            seed: self.seed,
            tol: self.tol,
        })
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeFilter {
    All,
    Assert,
    Audit,
}

#[derive(Args)]
struct ValidateCmd {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct ClassifyCmd {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Proceed even when axiom validation fails
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct VerifyCmd {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Restrict to specific check ids (repeatable)
    #[arg(long = "check", value_name = "ID")]
    checks: Vec<String>,
    /// Select assert-capable checks, audit checks, or all
    #[arg(long, value_enum, default_value_t = ModeFilter::All)]
    mode: ModeFilter,
    /// Proceed even when axiom validation fails
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct AuditCmd {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Restrict to specific check ids (repeatable)
    #[arg(long = "check", value_name = "ID")]
    checks: Vec<String>,
    /// Proceed even when axiom validation fails
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ListCmd {
    /// Select assert-capable checks, audit checks, or all
    #[arg(long, value_enum, default_value_t = ModeFilter::All)]
    mode: ModeFilter,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

/// Write to stdout, ignoring a closed pipe (e.g. `acmm list | head`).
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(text.as_bytes());
}

fn emit_line(text: &str) {
    emit(text);
    emit("\n");
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Cmd::Validate(cmd) => cmd_validate(cmd),
        Cmd::Classify(cmd) => cmd_classify(cmd),
        Cmd::Verify(cmd) => cmd_verify(
            cmd.source, cmd.sample, cmd.format, cmd.checks, cmd.mode, cmd.force,
        ),
        Cmd::Audit(cmd) => cmd_verify(
            cmd.source,
            cmd.sample,
            cmd.format,
            cmd.checks,
            ModeFilter::Audit,
            cmd.force,
        ),
        Cmd::List(cmd) => cmd_list(cmd),
    }
}

fn resolve_structure(source: &SourceArgs) -> Result<AlmostContactStructure, String> {
    match (&source.builtin, &source.spec) {
        (Some(name), None) => structure::builtin(name).map_err(|e| e.to_string()),
        (None, Some(path)) => structure::load_spec(path).map_err(|e| e.to_string()),
        _ => Err("exactly one of --builtin or --spec is required".into()),
    }
}

fn mode_column(report: &CheckReport) -> String {
    if report.check_id.starts_with("AX") {
        return "assert".to_string();
    }
    match identities::find_check(&report.check_id) {
        None => "info".to_string(),
        Some(def) => {
            if report.verdict == Verdict::Reported {
                "audit".to_string()
            } else {
                match def.mode {
                    CheckMode::AssertEquivalence => "assert-equivalence".to_string(),
                    _ => "assert".to_string(),
                }
            }
        }
    }
}

fn print_reports(reports: &[CheckReport], format: Format, header: Option<String>) {
    match format {
        Format::Json => emit(&report::render_json(reports)),
        Format::Text => {
            if let Some(h) = header {
                emit_line(&h);
            }
            emit(&report::render_text(reports, &mode_column));
        }
    }
}

fn text_header(kind: &str, name: &str, cfg: &RunConfig) -> String {
    format!(
        "# {kind}  structure: {name}  points: {}  seed: {}  tol: {}",
        cfg.points,
        cfg.seed,
        report::fmt_real_short(cfg.tol)
    )
}

fn cmd_validate(cmd: ValidateCmd) -> Result<ExitCode, String> {
    let cfg = cmd.sample.config()?;
    let s = resolve_structure(&cmd.source)?;
    let reports = s.validate::<f64>(cfg.points, cfg.seed, cfg.tol);
    let all_pass = reports.iter().all(|r| r.passed());
    print_reports(
        &reports,
        cmd.format,
        Some(text_header("validate", s.name(), &cfg)),
    );
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Validate and certify; on failure either error out (exit 2 path) or,
/// when forced, return the structure together with a banner report.
fn certified_structure(
    source: &SourceArgs,
    cfg: &RunConfig,
    force: bool,
) -> Result<(AlmostContactStructure, Option<CheckReport>), String> {
    let mut s = resolve_structure(source)?;
    let reports = s.certify::<f64>(cfg.points, cfg.seed, cfg.tol);
    if s.is_validated() {
        return Ok((s, None));
    }
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check_id.as_str())
        .collect();
    if !force {
        return Err(format!(
            "structure not validated (failing axioms: {}); rerun `validate` for details or pass --force",
            failing.join(", ")
        ));
    }
    let worst = reports
        .iter()
        .map(|r| r.max_abs_residual)
        .fold(0.0, f64::max);
    let banner = CheckReport::reported(
        "structure",
        format!(
            "structure not validated (failing axioms: {}); checks run on an unvalidated structure",
            failing.join(", ")
        ),
        cfg.points,
        cfg.seed,
        worst,
        cfg.tol,
    );
    Ok((s, Some(banner)))
}

fn cmd_classify(cmd: ClassifyCmd) -> Result<ExitCode, String> {
    let cfg = cmd.sample.config()?;
    let (s, banner) = certified_structure(&cmd.source, &cfg, cmd.force)?;
    let c = identities::classify_structure::<f64>(&s, &cfg, cmd.force).map_err(|e| e.to_string())?;
    match cmd.format {
        Format::Json => {
            emit_line(&format!(
                "{{\"structure\":\"{}\",\"validated\":{},\"points\":{},\"seed\":{},\"tolerance\":{},\"first_class\":{},\"second_class\":{},\"first_chain_residual\":{},\"second_chain_residual\":{},\"d_t_f_residual\":{}}}",
                s.name(),
                s.is_validated(),
                c.points,
                c.seed,
                report::fmt_real_full(c.tolerance),
                c.first_class,
                c.second_class,
                report::fmt_real_full(c.first_chain_residual),
                report::fmt_real_full(c.second_chain_residual),
                report::fmt_real_full(c.d_t_f_residual)
            ));
        }
        Format::Text => {
            emit_line(&text_header("classify", s.name(), &cfg));
            if banner.is_some() {
                emit_line("# warning: structure not validated");
            }
            let yn = |b: bool| if b { "yes" } else { "no" };
            emit_line(&format!(
                "first-class: {}; second-class: {}",
                yn(c.first_class),
                yn(c.second_class)
            ));
            emit_line(&format!(
                "  first-class chain residual:  {}",
                report::fmt_real_short(c.first_chain_residual)
            ));
            emit_line(&format!(
                "  second-class chain residual: {}",
                report::fmt_real_short(c.second_chain_residual)
            ));
            emit_line(&format!(
                "  (D_T F) residual:            {}",
                report::fmt_real_short(c.d_t_f_residual)
            ));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn selected_checks(
    checks: &[String],
    mode: ModeFilter,
) -> Result<Vec<&'static CheckDef>, String> {
    let mut defs: Vec<&'static CheckDef> = Vec::new();
    if checks.is_empty() {
        defs.extend(REGISTRY.iter());
    } else {
        for id in checks {
            let def = identities::find_check(id)
                .ok_or_else(|| format!("unknown check id `{id}`; run `acmm list` for the registry"))?;
            if !defs.iter().any(|d| d.id == def.id) {
                defs.push(def);
            }
        }
    }
    defs.retain(|def| match mode {
        ModeFilter::All => true,
        ModeFilter::Assert => def.mode.can_assert(),
        ModeFilter::Audit => def.mode == CheckMode::Audit,
    });
    Ok(defs)
}

fn cmd_verify(
    source: SourceArgs,
    sample: SampleArgs,
    format: Format,
    checks: Vec<String>,
    mode: ModeFilter,
    force: bool,
) -> Result<ExitCode, String> {
    let cfg = sample.config()?;
    let defs = selected_checks(&checks, mode)?;
    let (s, banner) = certified_structure(&source, &cfg, force)?;
    let mut reports =
        identities::run_registry::<f64>(&s, &defs, &cfg, force).map_err(|e| e.to_string())?;
    let mut header = text_header("verify", s.name(), &cfg);
    if let Some(banner) = banner {
        header.push_str("\n# warning: structure not validated");
        reports.insert(0, banner);
    }
    let all_pass = reports.iter().all(|r| r.passed());
    print_reports(&reports, format, Some(header));
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_list(cmd: ListCmd) -> Result<ExitCode, String> {
    let defs: Vec<&CheckDef> = REGISTRY
        .iter()
        .filter(|def| match cmd.mode {
            ModeFilter::All => true,
            ModeFilter::Assert => def.mode.can_assert(),
            ModeFilter::Audit => def.mode == CheckMode::Audit,
        })
        .collect();
    match cmd.format {
        Format::Json => {
            emit_line("[");
            for (i, def) in defs.iter().enumerate() {
                let comma = if i + 1 < defs.len() { "," } else { "" };
                emit_line(&format!(
                    "  {{\"id\":\"{}\",\"mode\":\"{}\",\"location\":\"{}\",\"description\":\"{}\"}}{comma}",
                    def.id,
                    def.mode.label(),
                    def.location,
                    def.description
                ));
            }
            emit_line("]");
        }
        Format::Text => {
            emit_line(&format!(
                "{:<6} {:<18} {:<20} {}",
                "id", "mode", "location", "description"
            ));
            for def in defs {
                emit_line(&format!(
                    "{:<6} {:<18} {:<20} {}",
                    def.id,
                    def.mode.label(),
                    def.location,
                    def.description
                ));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
