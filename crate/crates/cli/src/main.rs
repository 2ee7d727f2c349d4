//! Command-line frontend: runs the schemes, prints scheme-comparison
//! tables, and dumps preprocessing allocation plans in text, JSON or CSV.

use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use qprog::analysis::{p_asymptotic, p_multicopy, p_preprocess, p_vmc};
use qprog::preprocess::{build_allocation, q_distribution};
use qprog::protocols::{
    run_multicopy_iterative, run_preprocess_pipeline, run_single_shot, run_vmc_iterative,
    scheme_equivalence_table, Mode, ProtocolResult,
};
use qprog::{ExactRational, StateVector};

#[derive(Parser)]
#[command(
    name = "qprog",
    version,
    about = "Simulate probabilistic programmable processors applying an unknown U(1) rotation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scheme and report exact, closed-form and sampled success rates
    Run(RunArgs),
    /// Tabulate every scheme's exact success probability over odd copy counts
    Table(TableArgs),
    /// Dump the preprocessing allocation plan for 2^x - 1 program copies
    Plan(PlanArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scheme to execute
    #[arg(long, value_enum)]
    scheme: Scheme,
    /// Number of program copies / program qubits
    #[arg(long)]
    n: Option<u32>,
    /// Preprocessing size: consumes 2^x - 1 program copies
    #[arg(long)]
    x: Option<u32>,
    /// Rotation angle encoded in the program state, in radians
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Trials for montecarlo mode
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Seed for montecarlo mode
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Data qubit as "a_re,a_im,b_re,b_im"; defaults to (|0>+|1>)/sqrt(2)
    #[arg(long, value_name = "A_RE,A_IM,B_RE,B_IM")]
    data: Option<String>,
}

#[derive(Args)]
struct TableArgs {
    /// Largest (odd) number of copies to tabulate
    #[arg(long, default_value_t = 15)]
    n_max: u32,
    /// Rotation angle used for the enumerated columns
    #[arg(long, default_value_t = 0.7)]
    theta: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct PlanArgs {
    /// Preprocessing size: plans for 2^x - 1 program copies
    #[arg(long)]
    x: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scheme {
    Cnot,
    Vmc,
    MulticopyIterative,
    SingleShot,
    Preprocess,
    EquivalenceTable,
}

impl Scheme {
    fn name(self) -> &'static str {
        match self {
            Scheme::Cnot => "cnot",
            Scheme::Vmc => "vmc",
            Scheme::MulticopyIterative => "multicopy-iterative",
            Scheme::SingleShot => "single-shot",
            Scheme::Preprocess => "preprocess",
            Scheme::EquivalenceTable => "equivalence-table",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Montecarlo,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

/// Exit codes: 2 for bad input, 3 for a broken internal invariant.
enum Failure {
    Validation(String),
    Internal(String),
}

impl Failure {
    fn validation(message: impl Into<String>) -> Self {
        Failure::Validation(message.into())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(message) | Failure::Internal(message) => message,
        }
    }
}

impl From<qprog::Error> for Failure {
    fn from(error: qprog::Error) -> Self {
        if error.is_internal() {
            Failure::Internal(error.to_string())
        } else {
            Failure::Validation(error.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Table(args) => cmd_table(args),
        Command::Plan(args) => cmd_plan(args),
    };
    match result {
        Ok(body) => emit(&body),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

/// Writes the report to stdout. A closed pipe (e.g. `qprog plan | head`)
/// is a normal way to stop reading, not an error.
fn emit(body: &str) -> ExitCode {
    let mut stdout = std::io::stdout().lock();
    let outcome = stdout.write_all(body.as_bytes()).and_then(|()| stdout.flush());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) if error.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: cannot write output: {error}");
            ExitCode::FAILURE
        }
    }
}

#[derive(Serialize)]
struct ProbabilityOut {
    rational: String,
    decimal: f64,
}

impl From<&ExactRational> for ProbabilityOut {
    fn from(value: &ExactRational) -> Self {
        ProbabilityOut {
            rational: value.to_string(),
            decimal: value.to_f64(),
        }
    }
}

#[derive(Serialize)]
struct HistogramEntry {
    m: i64,
    rational: String,
    decimal: f64,
}

#[derive(Serialize)]
struct LevelEntry {
    level: u32,
    rational: String,
    decimal: f64,
}

#[derive(Serialize)]
struct RunReport {
    scheme: String,
    n: Option<u32>,
    x: Option<u32>,
    theta: f64,
    mode: String,
    trials: Option<u64>,
    seed: Option<u64>,
    exact: ProbabilityOut,
    formula: ProbabilityOut,
    empirical_rate: Option<f64>,
    residual_fidelity_on_success: f64,
    failure_rotation_histogram: Vec<HistogramEntry>,
    q_table: Option<Vec<LevelEntry>>,
    notes: Vec<String>,
}

fn cmd_run(args: RunArgs) -> Result<String, Failure> {
    if args.scheme == Scheme::EquivalenceTable {
        return cmd_table(TableArgs {
            n_max: args.n.unwrap_or(15),
            theta: args.theta,
            format: args.format,
        });
    }

    let data = parse_data_state(args.data.as_deref())?;
    let mode = match args.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Montecarlo => {
            if args.trials == 0 {
                return Err(Failure::validation("montecarlo mode needs --trials >= 1"));
            }
            Mode::MonteCarlo {
                trials: args.trials,
                seed: args.seed,
            }
        }
    };

    let mut notes = Vec::new();
    let mut reported_n = args.n;
    let mut reported_x = None;
    let (result, formula): (ProtocolResult, ExactRational) = match args.scheme {
        Scheme::Cnot => {
            if let Some(n) = args.n {
                if n != 1 {
                    return Err(Failure::validation(
                        "the cnot scheme is fixed at a single program qubit; drop --n or pass --n 1",
                    ));
                }
            }
            reject_x(args.x)?;
            reported_n = Some(1);
            let result = run_vmc_iterative(args.theta, 1, &data, mode)?;
            (result, ExactRational::new(1, 2))
        }
        Scheme::Vmc => {
            reject_x(args.x)?;
            let n = require_n(args.n)?;
            (run_vmc_iterative(args.theta, n, &data, mode)?, p_vmc(n))
        }
        Scheme::MulticopyIterative => {
            reject_x(args.x)?;
            let n = require_n(args.n)?;
            if n % 2 == 0 {
                notes.push(even_copy_note(n));
            }
            (
                run_multicopy_iterative(args.theta, n, &data, mode)?,
                p_multicopy(n)?,
            )
        }
        Scheme::SingleShot => {
            reject_x(args.x)?;
            let n = require_n(args.n)?;
            if n % 2 == 0 {
                notes.push(even_copy_note(n));
            }
            (run_single_shot(args.theta, n, &data, mode)?, p_multicopy(n)?)
        }
        Scheme::Preprocess => {
            let x = resolve_preprocess_size(args.n, args.x)?;
            reported_n = Some((1 << x) - 1);
            reported_x = Some(x);
            (
                run_preprocess_pipeline(args.theta, x, &data, mode)?,
                p_preprocess(x)?,
            )
        }
        Scheme::EquivalenceTable => unreachable!(),
    };

    let q_table = reported_x.map(|x| {
        let plan = build_allocation(x).expect("validated above");
        q_distribution(&plan)
            .iter()
            .map(|(&level, q)| LevelEntry {
                level,
                rational: q.to_string(),
                decimal: q.to_f64(),
            })
            .collect()
    });

    let report = RunReport {
        scheme: args.scheme.name().to_string(),
        n: reported_n,
        x: reported_x,
        theta: args.theta,
        mode: match args.mode {
            ModeArg::Exact => "exact".to_string(),
            ModeArg::Montecarlo => "montecarlo".to_string(),
        },
        trials: (args.mode == ModeArg::Montecarlo).then_some(args.trials),
        seed: (args.mode == ModeArg::Montecarlo).then_some(args.seed),
        exact: (&result.success_probability_exact).into(),
        formula: (&formula).into(),
        empirical_rate: result.empirical_rate,
        residual_fidelity_on_success: result.residual_fidelity_on_success,
        failure_rotation_histogram: result
            .failure_rotation_histogram
            .iter()
            .map(|(&m, p)| HistogramEntry {
                m,
                rational: p.to_string(),
                decimal: p.to_f64(),
            })
            .collect(),
        q_table,
        notes,
    };

    if report.exact.rational != report.formula.rational {
        return Err(Failure::Internal(format!(
            "enumerated probability {} disagrees with the closed form {}",
            report.exact.rational, report.formula.rational
        )));
    }

    Ok(match args.format {
        Format::Json => json_body(&report)?,
        Format::Csv => run_csv_body(&report),
        Format::Text => run_text_body(&report),
    })
}

fn even_copy_note(n: u32) -> String {
    format!("an even number of copies performs exactly as {}; consider the odd count", n - 1)
}

fn require_n(n: Option<u32>) -> Result<u32, Failure> {
    n.ok_or_else(|| Failure::validation("this scheme needs --n"))
}

fn reject_x(x: Option<u32>) -> Result<(), Failure> {
    if x.is_some() {
        return Err(Failure::validation("--x applies only to the preprocess scheme"));
    }
    Ok(())
}

fn resolve_preprocess_size(n: Option<u32>, x: Option<u32>) -> Result<u32, Failure> {
    let x = match (n, x) {
        (None, Some(x)) => x,
        (Some(n), maybe_x) => {
            if !(n + 1).is_power_of_two() || n == 0 {
                return Err(Failure::validation(format!(
                    "preprocess needs a copy count of the form 2^x - 1, got {n}"
                )));
            }
            let from_n = (n + 1).trailing_zeros();
            if let Some(x) = maybe_x {
                if x != from_n {
                    return Err(Failure::validation(format!(
                        "--n {n} corresponds to --x {from_n}, but --x {x} was given"
                    )));
                }
            }
            from_n
        }
        (None, None) => {
            return Err(Failure::validation("preprocess needs --x (or --n of the form 2^x - 1)"))
        }
    };
    if x == 0 || x > 4 {
        return Err(Failure::validation(format!(
            "preprocess supports x in 1..=4, got {x}"
        )));
    }
    Ok(x)
}

fn parse_data_state(text: Option<&str>) -> Result<StateVector, Failure> {
    let Some(text) = text else {
        let w = std::f64::consts::FRAC_1_SQRT_2;
        return Ok(StateVector::qubit(Complex64::new(w, 0.0), Complex64::new(w, 0.0))
            .expect("balanced state is normalized"));
    };
    let parts: Vec<f64> = text
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::validation("--data expects four comma-separated numbers"))?;
    if parts.len() != 4 {
        return Err(Failure::validation(
            "--data expects exactly a_re,a_im,b_re,b_im",
        ));
    }
    let alpha = Complex64::new(parts[0], parts[1]);
    let beta = Complex64::new(parts[2], parts[3]);
    let norm2 = alpha.norm_sqr() + beta.norm_sqr();
    if (norm2 - 1.0).abs() > 1e-9 {
        return Err(Failure::validation(format!(
            "data state must be normalized within 1e-9, got |a|^2+|b|^2 = {norm2}"
        )));
    }
    Ok(StateVector::qubit(alpha, beta)?)
}

#[derive(Serialize)]
struct TableRow {
    n: u32,
    p_vmc: ProbabilityOut,
    p_multicopy: ProbabilityOut,
    p_single_shot: ProbabilityOut,
    p_preprocess: Option<ProbabilityOut>,
    p_asymptotic: f64,
}

fn cmd_table(args: TableArgs) -> Result<String, Failure> {
    if args.n_max > 15 {
        return Err(Failure::validation("--n-max is capped at 15"));
    }
    let ns: Vec<u32> = (1..=args.n_max).step_by(2).collect();
    let rows = scheme_equivalence_table(args.theta, &ns)?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        if row.p_iterative != row.p_formula || row.p_single_shot != row.p_formula {
            return Err(Failure::Internal(format!(
                "scheme probabilities diverge at n={}",
                row.n
            )));
        }
        if let Some(pipeline) = &row.p_pipeline {
            if *pipeline != row.p_formula {
                return Err(Failure::Internal(format!(
                    "pipeline probability diverges at n={}",
                    row.n
                )));
            }
        }
        out.push(TableRow {
            n: row.n,
            p_vmc: (&p_vmc(row.n)).into(),
            p_multicopy: (&row.p_iterative).into(),
            p_single_shot: (&row.p_single_shot).into(),
            p_preprocess: row.p_pipeline.as_ref().map(ProbabilityOut::from),
            p_asymptotic: p_asymptotic(row.n),
        });
    }

    let mut body = String::new();
    match args.format {
        Format::Json => return json_body(&out),
        Format::Csv => {
            body.push_str("N,p_vmc,p_multicopy,p_single_shot,p_preprocess,p_asymptotic\n");
            for row in &out {
                let _ = writeln!(
                    body,
                    "{},{},{},{},{},{}",
                    row.n,
                    row.p_vmc.rational,
                    row.p_multicopy.rational,
                    row.p_single_shot.rational,
                    row.p_preprocess
                        .as_ref()
                        .map(|p| p.rational.clone())
                        .unwrap_or_default(),
                    decimal15(row.p_asymptotic),
                );
            }
        }
        Format::Text => {
            let _ = writeln!(
                body,
                "{:>3}  {:>14}  {:>14}  {:>14}  {:>14}  {:>18}",
                "N", "p_vmc", "p_multicopy", "p_single_shot", "p_preprocess", "p_asymptotic"
            );
            for row in &out {
                let _ = writeln!(
                    body,
                    "{:>3}  {:>14}  {:>14}  {:>14}  {:>14}  {:>18}",
                    row.n,
                    row.p_vmc.rational,
                    row.p_multicopy.rational,
                    row.p_single_shot.rational,
                    row.p_preprocess
                        .as_ref()
                        .map(|p| p.rational.as_str())
                        .unwrap_or("-"),
                    decimal15(row.p_asymptotic),
                );
            }
        }
    }
    Ok(body)
}

#[derive(Serialize)]
struct PlanGroupOut {
    level: u32,
    run_start: usize,
    global_phase_exponent: usize,
    path: Vec<usize>,
}

#[derive(Serialize)]
struct PlanReport {
    x: u32,
    copies: usize,
    outcome_register_qubits: usize,
    group_counts: Vec<LevelCount>,
    q_table: Vec<LevelEntry>,
    groups: Vec<PlanGroupOut>,
}

#[derive(Serialize)]
struct LevelCount {
    level: u32,
    groups: u64,
}

fn cmd_plan(args: PlanArgs) -> Result<String, Failure> {
    let plan = build_allocation(args.x)?;
    let report = PlanReport {
        x: plan.x(),
        copies: plan.num_copies(),
        outcome_register_qubits: plan.outcome_register(),
        group_counts: (1..=plan.x())
            .rev()
            .map(|level| LevelCount {
                level,
                groups: plan.group_count(level),
            })
            .collect(),
        q_table: q_distribution(&plan)
            .iter()
            .map(|(&level, q)| LevelEntry {
                level,
                rational: q.to_string(),
                decimal: q.to_f64(),
            })
            .collect(),
        groups: plan
            .groups()
            .iter()
            .map(|group| PlanGroupOut {
                level: group.run.level,
                run_start: group.run.start,
                global_phase_exponent: group.run.global_phase_exponent(),
                path: group.path.clone(),
            })
            .collect(),
    };

    let mut body = String::new();
    match args.format {
        Format::Json => return json_body(&report),
        Format::Csv => {
            body.push_str("level,run_start,global_phase_exponent,path\n");
            for group in &report.groups {
                let _ = writeln!(
                    body,
                    "{},{},{},{}",
                    group.level,
                    group.run_start,
                    group.global_phase_exponent,
                    join_path(&group.path),
                );
            }
        }
        Format::Text => {
            let _ = writeln!(
                body,
                "plan for {} copies (x = {}), leading measurement of {} qubits",
                report.copies, report.x, report.outcome_register_qubits
            );
            for count in &report.group_counts {
                let _ = writeln!(body, "  W_{} = {}", count.level, count.groups);
            }
            for entry in &report.q_table {
                let _ = writeln!(
                    body,
                    "  q_{} = {} ({})",
                    entry.level,
                    entry.rational,
                    decimal15(entry.decimal)
                );
            }
            let _ = writeln!(
                body,
                "{:>6} {:>10} {:>13} {:>16}",
                "level", "run_start", "global_phase", "path"
            );
            for group in &report.groups {
                let _ = writeln!(
                    body,
                    "{:>6} {:>10} {:>13} {:>16}",
                    group.level,
                    group.run_start,
                    group.global_phase_exponent,
                    join_path(&group.path),
                );
            }
        }
    }
    Ok(body)
}

fn join_path(path: &[usize]) -> String {
    path.iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join("-")
}

fn json_body<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|error| Failure::Internal(format!("serialization failed: {error}")))?;
    body.push('\n');
    Ok(body)
}

fn run_csv_body(report: &RunReport) -> String {
    let mut body = String::from(
        "scheme,n,x,theta,mode,trials,seed,exact_rational,exact_decimal,formula_rational,\
formula_decimal,empirical_rate,residual_fidelity,failure_histogram,q_table\n",
    );
    let _ = writeln!(
        body,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.scheme,
        report.n.map(|n| n.to_string()).unwrap_or_default(),
        report.x.map(|x| x.to_string()).unwrap_or_default(),
        decimal15(report.theta),
        report.mode,
        report.trials.map(|t| t.to_string()).unwrap_or_default(),
        report.seed.map(|s| s.to_string()).unwrap_or_default(),
        report.exact.rational,
        decimal15(report.exact.decimal),
        report.formula.rational,
        decimal15(report.formula.decimal),
        report.empirical_rate.map(decimal15).unwrap_or_default(),
        decimal15(report.residual_fidelity_on_success),
        report
            .failure_rotation_histogram
            .iter()
            .map(|entry| format!("m={}:{}", entry.m, entry.rational))
            .collect::<Vec<_>>()
            .join(";"),
        report
            .q_table
            .as_ref()
            .map(|table| {
                table
                    .iter()
                    .map(|entry| format!("s={}:{}", entry.level, entry.rational))
                    .collect::<Vec<_>>()
                    .join(";")
            })
            .unwrap_or_default(),
    );
    body
}

fn run_text_body(report: &RunReport) -> String {
    let mut body = String::new();
    let _ = writeln!(body, "scheme: {}", report.scheme);
    if let Some(n) = report.n {
        let _ = writeln!(body, "copies: {n}");
    }
    if let Some(x) = report.x {
        let _ = writeln!(body, "levels: {x}");
    }
    let _ = writeln!(body, "theta:  {}", decimal15(report.theta));
    let _ = writeln!(body, "mode:   {}", report.mode);
    if let (Some(trials), Some(seed)) = (report.trials, report.seed) {
        let _ = writeln!(body, "trials: {trials} (seed {seed})");
    }
    let _ = writeln!(
        body,
        "exact success:   {} ({})",
        report.exact.rational,
        decimal15(report.exact.decimal)
    );
    let _ = writeln!(
        body,
        "closed form:     {} ({})",
        report.formula.rational,
        decimal15(report.formula.decimal)
    );
    if let Some(rate) = report.empirical_rate {
        let _ = writeln!(body, "empirical rate:  {}", decimal15(rate));
    }
    let _ = writeln!(
        body,
        "success residual fidelity: {}",
        decimal15(report.residual_fidelity_on_success)
    );
    if let Some(q_table) = &report.q_table {
        let _ = writeln!(body, "program-state distribution:");
        for entry in q_table {
            let _ = writeln!(
                body,
                "  level {}: {} ({})",
                entry.level,
                entry.rational,
                decimal15(entry.decimal)
            );
        }
    }
    let _ = writeln!(body, "failure rotations:");
    for entry in &report.failure_rotation_histogram {
        let _ = writeln!(
            body,
            "  U({} theta): {} ({})",
            entry.m,
            entry.rational,
            decimal15(entry.decimal)
        );
    }
    for note in &report.notes {
        let _ = writeln!(body, "note: {note}");
    }
    body
}

/// Renders a float with 15 significant digits.
fn decimal15(value: f64) -> String {
    if value == 0.0 {
        return "0".to_string();
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}
