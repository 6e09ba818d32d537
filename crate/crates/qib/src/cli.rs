use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qib_core::analytic2q::{self, PureParams2Q};
use qib_core::divergence::{check_axioms, AxiomReport, MeasureId, Verdict, DEFAULT_GRID_STEPS, DEFAULT_M_LIST};
use qib_core::pauli::BasisIndex;
use qib_core::posterior::{posterior_info_upto, InfoReport};
use qib_core::Tolerances;
use serde_json::json;

use crate::error::{exit, CliError, Result};
use crate::experiment::{cmd_experiment, ExperimentConfig, FamilyCounts, Outputs};
use crate::formats::{resolve_order, StateFile};
use crate::tol;

#[derive(Debug, Parser)]
#[command(
    name = "qib",
    version,
    about = "Posterior chi-squared information content of qubit states"
)]
pub struct Cli {
    /// Tolerance overrides, `key=value[,key=value]`; applied after QIB_TOL_OVERRIDE.
    #[arg(long, global = true, value_name = "KEY=VALUE")]
    pub tol: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run seeded state families and write CSV, summary JSON and an SVG plot.
    Experiment(ExperimentArgs),
    /// Walk one state and print the report as JSON.
    Info(StateArgs),
    /// Print the interval table of a walk, optionally stopping at an index.
    Bounds(BoundsArgs),
    /// Check the divergence axioms on a probability grid.
    Axioms(AxiomsArgs),
    /// Evaluate the two-qubit closed form.
    ClosedForm(ClosedFormArgs),
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub pure: usize,
    #[arg(long, default_value_t = 0)]
    pub product: usize,
    #[arg(long, default_value_t = 0)]
    pub bell: usize,
    #[arg(long, default_value_t = 0)]
    pub ghz: usize,
    #[arg(long, default_value_t = 0)]
    pub mixed: usize,
    /// Rank of mixed states (full rank by default).
    #[arg(long)]
    pub mixed_rank: Option<usize>,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// `natural`, `base4` or a file of natural indices.
    #[arg(long, default_value = "natural")]
    pub order: String,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON path; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// JSON state file.
    pub state: PathBuf,
    #[arg(long, default_value = "natural")]
    pub order: String,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Last coefficient to visit.
    #[arg(long)]
    pub upto: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AxiomsArgs {
    /// Grid points per probability axis.
    #[arg(long, default_value_t = DEFAULT_GRID_STEPS)]
    pub grid: usize,
    /// Sample sizes for the likelihood axioms.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_M_LIST)]
    pub m_list: Vec<u64>,
    /// Print the full reports as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["mu", "angles"]))]
pub struct ClosedFormArgs {
    #[arg(long, requires_all = ["a1", "b1", "b2"], allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b2: Option<f64>,
    /// θ,φ,k,ω,φ′,k′,ω′ in radians.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub angles: Option<Vec<f64>>,
}

fn load_state(args: &StateArgs, tol: &Tolerances) -> Result<(qib_core::pauli::DensityMatrix, Option<Vec<usize>>)> {
    let rho = StateFile::read(&args.state)?.to_density(tol)?;
    let order = resolve_order(&args.order, rho.n())?;
    Ok((rho, order))
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io("stdout", e))
}

fn experiment(args: &ExperimentArgs, tolerances: Tolerances, out: &mut dyn Write) -> Result<()> {
    let counts = FamilyCounts {
        pure: args.pure,
        product: args.product,
        bell: args.bell,
        ghz: args.ghz,
        mixed: args.mixed,
    };
    if args.n == 0 || args.n > qib_core::pauli::MAX_QUBITS {
        return Err(qib_core::Error::QubitCount {
            n: args.n,
            max: qib_core::pauli::MAX_QUBITS,
        }
        .into());
    }
    if args.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be positive".into()));
    }
    let cfg = ExperimentConfig {
        mixed_rank: args.mixed_rank,
        order: resolve_order(&args.order, args.n)?,
        tolerances,
        jobs: args.jobs,
        ..ExperimentConfig::new(args.n, counts, args.seed)
    };
    let outputs = Outputs {
        csv: args.out.clone(),
        summary: args.summary.clone().unwrap_or_else(|| default_summary_path(&args.out)),
        svg: args.svg.clone(),
    };
    if outputs.summary == outputs.csv {
        return Err(CliError::Usage("summary path equals the CSV path".into()));
    }
    let (rows, summary) = cmd_experiment(&cfg, &outputs)?;
    for r in rows.iter().filter(|r| r.failed) {
        eprintln!(
            "state {} ({} seed {}): {}",
            r.index,
            r.family.name(),
            r.seed,
            r.error.as_deref().unwrap_or("failed")
        );
    }
    write_out(
        out,
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;
    if summary.failed > 0 {
        return Err(CliError::Failed(summary.failed));
    }
    if summary.violations > 0 {
        return Err(CliError::Violation {
            count: summary.violations,
            slack: summary.slack,
        });
    }
    Ok(())
}

fn info(args: &StateArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let (rho, order) = load_state(args, tol)?;
    let report = posterior_info_upto(&rho, order.as_deref(), tol, None)?;
    write_out(
        out,
        &(serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"),
    )
}

fn fmt_bound(x: f64) -> String {
    format!("{x:>12.9}")
}

/// Fixed-width interval table followed by the totals.
pub fn bounds_table(report: &InfoReport) -> String {
    let mut s = format!(
        "{:>4} {:>5} {:<6} {:>12} {:>12} {:>12} {:>12} {:>12}  {}\n",
        "step", "j", "label", "lower", "upper", "reference", "value", "contrib", "flag"
    );
    for (step, p) in report.intervals.iter().enumerate() {
        let label = BasisIndex::new(report.n, p.index)
            .map(|b| b.label())
            .unwrap_or_default();
        let flag = if p.degenerate { "determined" } else { p.status.name() };
        s += &format!(
            "{:>4} {:>5} {:<6} {} {} {} {} {}  {}\n",
            step + 1,
            p.index,
            label,
            fmt_bound(p.lower),
            fmt_bound(p.upper),
            fmt_bound(p.reference),
            fmt_bound(p.value),
            fmt_bound(p.contribution),
            flag
        );
    }
    s += &format!(
        "posterior_total {:.9}  prior_total {:.9}  order {}\n",
        report.posterior_total, report.prior_total, report.order_id
    );
    s
}

fn bounds(args: &BoundsArgs, tol: &Tolerances, out: &mut dyn Write) -> Result<()> {
    let (rho, order) = load_state(&args.state, tol)?;
    let report = posterior_info_upto(&rho, order.as_deref(), tol, args.upto)?;
    write_out(out, &bounds_table(&report))
}

fn cell(report: &AxiomReport, axiom: qib_core::divergence::Axiom) -> String {
    let c = report.check(axiom);
    let mark = match c.verdict {
        Verdict::Holds => "✓",
        Verdict::Fails => "✗",
        Verdict::Skipped => "skipped",
    };
    if c.disagrees() {
        format!("{mark}*")
    } else {
        mark.to_string()
    }
}

/// Measures by axioms, `*` marking a verdict that differs from the
/// reference table, then the counterexamples of every failing cell.
pub fn axiom_table(reports: &[AxiomReport]) -> String {
    use qib_core::divergence::Axiom;
    let mut s = format!("{:<7}", "");
    for a in Axiom::ALL {
        s += &format!("{:>9}", a.name());
    }
    s.push('\n');
    for r in reports {
        s += &format!("{:<7}", r.measure.name());
        for a in Axiom::ALL {
            s += &format!("{:>9}", cell(r, a));
        }
        s.push('\n');
    }
    for r in reports {
        for c in r.checks.iter().filter(|c| c.verdict == Verdict::Fails) {
            s += &format!(
                "{} {}: {} of {} checks fail",
                r.measure.name(),
                c.axiom.name(),
                c.violations,
                c.checked
            );
            for ce in &c.counterexamples {
                match ce.m {
                    Some(m) => s += &format!("; p={:.3} q={:.3} m={m}: {:.6} vs {:.6}", ce.p1, ce.q1, ce.lhs, ce.rhs),
                    None => s += &format!("; p={:.3} q={:.3}: {:.6} vs {:.6}", ce.p1, ce.q1, ce.lhs, ce.rhs),
                }
            }
            s.push('\n');
        }
    }
    s
}

fn axioms(args: &AxiomsArgs, out: &mut dyn Write) -> Result<()> {
    let reports = MeasureId::ALL
        .iter()
        .map(|&m| check_axioms(m, args.grid, &args.m_list))
        .collect::<qib_core::Result<Vec<_>>>()?;
    let text = if args.json {
        serde_json::to_string_pretty(&reports).expect("reports serialize") + "\n"
    } else {
        axiom_table(&reports)
    };
    write_out(out, &text)?;
    let csd = reports
        .iter()
        .find(|r| r.measure == MeasureId::Csd)
        .expect("CSD is checked");
    if csd.all_hold() {
        Ok(())
    } else {
        Err(CliError::AxiomsFailed)
    }
}

fn closed_form(args: &ClosedFormArgs, out: &mut dyn Write) -> Result<()> {
    let value = if let Some(a) = &args.angles {
        if a.len() != 7 {
            return Err(CliError::Usage(format!("--angles takes 7 values, got {}", a.len())));
        }
        let p = PureParams2Q::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6])?;
        let r = p.reduced();
        let (c11, c12) = analytic2q::c11_c12_bounds(r.mu, r.a1, r.b1, r.b2)?;
        json!({
            "mu": r.mu, "a1": r.a1, "b1": r.b1, "b2": r.b2,
            "c11": c11, "c12": c12,
            "bloch": analytic2q::params_to_bloch(&p).as_slice(),
            "posterior": analytic2q::closed_form_from_params(&p)?,
        })
    } else {
        let (mu, a1, b1, b2) = (
            args.mu.unwrap_or_default(),
            args.a1.unwrap_or_default(),
            args.b1.unwrap_or_default(),
            args.b2.unwrap_or_default(),
        );
        let (c11, c12) = analytic2q::c11_c12_bounds(mu, a1, b1, b2)?;
        json!({
            "mu": mu, "a1": a1, "b1": b1, "b2": b2,
            "c11": c11, "c12": c12,
            "posterior": analytic2q::closed_form_posterior(mu, a1, b1, b2)?,
        })
    };
    write_out(
        out,
        &(serde_json::to_string_pretty(&value).expect("json values serialize") + "\n"),
    )
}

/// Runs a parsed command.
pub fn execute(cli: &Cli, env_tol: Option<&str>, out: &mut dyn Write) -> Result<()> {
    let tolerances = tol::resolve(env_tol, &cli.tol)?;
    match &cli.command {
        Command::Experiment(a) => experiment(a, tolerances, out),
        Command::Info(a) => info(a, &tolerances, out),
        Command::Bounds(a) => bounds(a, &tolerances, out),
        Command::Axioms(a) => axioms(a, out),
        Command::ClosedForm(a) => closed_form(a, out),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
/// Errors go to stderr.
pub fn run<I, T>(args: I, env_tol: Option<&str>, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli, env_tol, out) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("qib: {e}");
            e.exit_code()
        }
    }
}

/// Summary path used when `--summary` is absent.
pub fn default_summary_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}
