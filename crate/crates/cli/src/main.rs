use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use trirank::bounds::{upper_bound, BoundReport};
use trirank::certify::{verify, Verdict};
use trirank::decompose::{decompose_with, Decomposition, MethodChoice};
use trirank::ensembles::{
    consistency_outcome, det_identity_error, random_tensor, run_criterion, skew_example, CriterionOutcome,
    CriterionRun, SelftestConfig,
};
use trirank::io::{certificate_from_json, certificate_to_json, tensor_from_json, tensor_to_json};
use trirank::linalg::{c, determinant, Field, Tolerances};
use trirank::spectrum::{find_singular_combination, slice_combination};
use trirank::Error;

const DEFAULT_SEED: u64 = 20_240_917;

#[derive(Parser)]
#[command(name = "trirank", version, about = "Constructive rank certificates for 3-tensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Relative Frobenius residual a certificate may have.
    #[arg(long, global = true)]
    tol_residual: Option<f64>,
    /// Relative singular-value cutoff for numerical rank.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Minimum eigenvalue separation.
    #[arg(long, global = true)]
    tol_margin: Option<f64>,
    /// Print machine-readable JSON instead of tables.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
    Both,
}

impl FieldArg {
    fn fields(self) -> Vec<Field> {
        match self {
            FieldArg::Real => vec![Field::Real],
            FieldArg::Complex => vec![Field::Complex],
            FieldArg::Both => vec![Field::Real, Field::Complex],
        }
    }

    fn single(self) -> Result<Field, Failure> {
        match self {
            FieldArg::Real => Ok(Field::Real),
            FieldArg::Complex => Ok(Field::Complex),
            FieldArg::Both => Err(Failure::Usage("--field both is only valid for bound and example".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a tensor and write its certificate.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Reinterpret the tensor over this field.
        #[arg(long, value_enum)]
        field: Option<FieldArg>,
        #[arg(long, default_value = "auto")]
        method: MethodChoice,
    },
    /// Check a certificate against a tensor.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        certificate: PathBuf,
    },
    /// Upper bounds on the maximal rank.
    Bound {
        /// A single shape m,n,p.
        #[arg(long, value_parser = parse_dims, conflicts_with = "grid")]
        dims: Option<(usize, usize, usize)>,
        /// Every shape with m ≤ n and all dims in a..b.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long, value_enum, default_value = "both")]
        field: FieldArg,
    },
    /// Write a random tensor with entries uniform in [-1, 1].
    Gen {
        #[arg(long, value_parser = parse_dims)]
        dims: (usize, usize, usize),
        #[arg(long, value_enum, default_value = "real")]
        field: FieldArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// The 4×4×3 tensor with no real singular slice combination.
    Example {
        #[arg(long, value_enum, default_value = "both")]
        field: FieldArg,
    },
    /// Run the acceptance ensembles.
    Selftest {
        /// Trials per shape and field.
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<usize> =
        s.split(',').map(|x| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"))).collect::<Result<_, _>>()?;
    match parts[..] {
        [m, n, p] if m > 0 && n > 0 && p > 0 => Ok((m, n, p)),
        _ => Err("expected three positive integers m,n,p".into()),
    }
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or("expected a..b")?;
    let a: usize = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    if a == 0 || a > b {
        return Err("expected 1 ≤ a ≤ b".into());
    }
    Ok((a, b))
}

enum Failure {
    /// Exit 1: a verdict or expectation failed.
    Verdict(String),
    /// Exit 2: bad usage, unreadable or malformed input.
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidInput(_) | Error::DimensionMismatch(_) => Failure::Usage(e.to_string()),
            other => Failure::Verdict(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn tolerances(common: &Common) -> Result<Tolerances, Failure> {
    let mut tol = Tolerances::default();
    if let Some(x) = common.tol_residual {
        tol.residual_tol = x;
    }
    if let Some(x) = common.tol_rank {
        tol.rank_tol = x;
    }
    if let Some(x) = common.tol_margin {
        tol.margin_tol = x;
    }
    tol.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(tol)
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_text(path: Option<&PathBuf>, text: &str) -> CmdResult {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

fn cmd_decompose(
    common: &Common,
    input: &PathBuf,
    output: Option<&PathBuf>,
    field: Option<FieldArg>,
    method: MethodChoice,
) -> CmdResult {
    let tol = tolerances(common)?;
    let mut t = tensor_from_json(&read_text(input)?)?;
    if let Some(f) = field {
        t = t.with_field(f.single()?)?;
    }
    let d = decompose_with(&t, &tol, common.seed, method)?;
    let report = verify(&t, &d, &tol);
    let cert = certificate_to_json(&d);
    let (m, n, p) = t.dims();
    let bound = upper_bound(m, n, p, t.field());
    // The certificate goes to --output or stdout; the summary takes the other stream.
    let mut summary: Box<dyn io::Write> = match output {
        Some(path) => {
            write_text(Some(path), &cert)?;
            Box::new(io::stdout())
        }
        None => {
            println!("{cert}");
            Box::new(io::stderr())
        }
    };
    if common.json {
        let _ = writeln!(summary, "{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    } else {
        print_summary(&d, &report, &bound, &mut summary);
    }
    match report.verdict {
        Verdict::Certified => Ok(()),
        v => Err(Failure::Verdict(format!("certificate {v:?}"))),
    }
}

fn print_summary(
    d: &Decomposition,
    report: &trirank::certify::CertificateReport,
    bound: &BoundReport,
    out: &mut dyn Write,
) {
    let (m, n, p) = d.dims;
    let _ = writeln!(out, "shape          {m}x{n}x{p} over {}", d.field);
    let _ = writeln!(out, "terms          {}", report.term_count);
    let _ = writeln!(out, "claimed bound  {}", report.claimed_bound);
    let _ = writeln!(out, "shape bound    {}", bound.value);
    let _ = writeln!(out, "lower bound    {}", report.lower_bound);
    let _ = writeln!(out, "residual       {:.3e}", report.relative_residual);
    let _ = writeln!(out, "method         {}", report.method_chain.join(" > "));
    let _ = writeln!(out, "verdict        {:?}", report.verdict);
    for note in bound.conditional_notes.iter().chain(&d.notes) {
        let _ = writeln!(out, "note           {note}");
    }
}

fn cmd_verify(common: &Common, input: &PathBuf, certificate: &PathBuf) -> CmdResult {
    let tol = tolerances(common)?;
    let t = tensor_from_json(&read_text(input)?)?;
    let d = certificate_from_json(&read_text(certificate)?)?;
    let report = verify(&t, &d, &tol);
    if common.json {
        print_json(&report);
    } else {
        println!("terms          {}", report.term_count);
        println!("claimed bound  {}", report.claimed_bound);
        println!("lower bound    {}", report.lower_bound);
        println!("residual       {:.3e}", report.relative_residual);
        println!("method         {}", report.method_chain.join(" > "));
        println!("verdict        {:?}", report.verdict);
    }
    match report.verdict {
        Verdict::Certified => Ok(()),
        v => Err(Failure::Verdict(format!("certificate {v:?}"))),
    }
}

fn cmd_bound(
    common: &Common,
    dims: Option<(usize, usize, usize)>,
    grid: Option<(usize, usize)>,
    field: FieldArg,
) -> CmdResult {
    let shapes: Vec<(usize, usize, usize)> = match (dims, grid) {
        (Some(d), _) => vec![d],
        (None, Some((a, b))) => {
            (a..=b).flat_map(|m| (m..=b).flat_map(move |n| (a..=b).map(move |p| (m, n, p)))).collect()
        }
        (None, None) => return Err(Failure::Usage("bound needs --dims or --grid".into())),
    };
    let reports: Vec<BoundReport> =
        shapes.iter().flat_map(|&(m, n, p)| field.fields().into_iter().map(move |f| upper_bound(m, n, p, f))).collect();
    if common.json {
        print_json(&reports);
        return Ok(());
    }
    println!("{:>3} {:>3} {:>3}  {:<5} {:>5} {:>6}  rule", "m", "n", "p", "field", "bound", "constr");
    for r in &reports {
        let (m, n, p) = r.dims;
        println!(
            "{m:>3} {n:>3} {p:>3}  {:<5} {:>5} {:>6}  {}",
            r.field.symbol(),
            r.value,
            r.constructive_value,
            r.provenance.first().map(String::as_str).unwrap_or("")
        );
        if dims.is_some() {
            for line in r.provenance.iter().skip(1) {
                println!("{:>27}{line}", "");
            }
            for note in &r.conditional_notes {
                println!("{:>27}conditional: {note}", "");
            }
        }
    }
    Ok(())
}

fn cmd_gen(common: &Common, dims: (usize, usize, usize), field: FieldArg, output: Option<&PathBuf>) -> CmdResult {
    let t = random_tensor(dims, field.single()?, common.seed)?;
    write_text(output, &tensor_to_json(&t))
}

#[derive(Serialize)]
struct ExampleRow {
    field: Field,
    singular_member: Option<Vec<[f64; 2]>>,
    normalized_det: Option<f64>,
    terms: usize,
    limit: usize,
    residual: f64,
    method: Vec<String>,
    passed: bool,
}

fn cmd_example(common: &Common, field: FieldArg) -> CmdResult {
    let tol = tolerances(common)?;
    let det_error = det_identity_error(50, common.seed);
    let mut rows = Vec::new();
    for f in field.fields() {
        let t = skew_example(f);
        let member = find_singular_combination(&t, &tol, 256, common.seed)?;
        let normalized_det = member.as_ref().map(|w| {
            let m = slice_combination(&t, w).expect("three coefficients");
            determinant(&(&m / c(m.norm()))).norm()
        });
        let d = decompose_with(&t, &tol, common.seed, MethodChoice::Auto)?;
        let report = verify(&t, &d, &tol);
        let limit = if f == Field::Real { 8 } else { 7 };
        let member_ok = match f {
            Field::Real => member.is_none(),
            Field::Complex => normalized_det.is_some_and(|x| x < 1e-8),
        };
        rows.push(ExampleRow {
            field: f,
            singular_member: member.map(|w| w.iter().map(|z| [z.re, z.im]).collect()),
            normalized_det,
            terms: d.len(),
            limit,
            residual: report.relative_residual,
            method: d.method.clone(),
            passed: member_ok && d.len() <= limit && report.verdict == Verdict::Certified,
        });
    }
    let passed = det_error < 1e-9 && rows.iter().all(|r| r.passed);
    if common.json {
        print_json(&serde_json::json!({ "det_identity_error": det_error, "rows": rows, "passed": passed }));
    } else {
        println!("det(xA1 + yA2 + zA3) = (x^2 + y^2 + z^2)^2 at 50 points: max relative error {det_error:.2e}");
        println!("{:<8} {:<16} {:>6} {:>6} {:>11}  method", "field", "singular member", "terms", "limit", "residual");
        for r in &rows {
            let member = match r.normalized_det {
                Some(d) => format!("yes, |det| {d:.0e}"),
                None => "none".into(),
            };
            println!(
                "{:<8} {:<16} {:>6} {:>6} {:>11.3e}  {}",
                r.field.name(),
                member,
                r.terms,
                r.limit,
                r.residual,
                r.method.join(" > ")
            );
        }
        println!("{}", if passed { "PASS" } else { "FAIL" });
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verdict("example expectations not met".into()))
    }
}

fn cmd_selftest(common: &Common, trials: usize) -> CmdResult {
    let cfg = SelftestConfig { trials: trials.max(1), seed: common.seed, tol: tolerances(common)? };
    let mut runs: Vec<CriterionRun> =
        [1, 2, 3, 4, 5, 6, 7, 8, 10].par_iter().map(|&id| run_criterion(id, &cfg)).collect();
    runs.sort_by_key(|r| r.outcome.id);
    let mut outcomes: Vec<CriterionOutcome> = runs.iter().map(|r| r.outcome.clone()).collect();
    outcomes.insert(8, consistency_outcome(&runs));
    let passed = outcomes.iter().all(|o| o.passed);
    if common.json {
        let rows: Vec<_> = outcomes
            .iter()
            .map(|o| serde_json::json!({ "id": o.id, "name": o.name, "passed": o.passed, "detail": o.detail }))
            .collect();
        print_json(&rows);
    } else {
        for o in &outcomes {
            println!("{} [{:>2}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.id, o.name, o.detail);
        }
        println!("{} of {} criteria passed", outcomes.iter().filter(|o| o.passed).count(), outcomes.len());
    }
    if passed {
        Ok(())
    } else {
        Err(Failure::Verdict("selftest failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = &cli.common;
    let result = match &cli.command {
        Command::Decompose { input, output, field, method } => {
            cmd_decompose(common, input, output.as_ref(), *field, *method)
        }
        Command::Verify { input, certificate } => cmd_verify(common, input, certificate),
        Command::Bound { dims, grid, field } => cmd_bound(common, *dims, *grid, *field),
        Command::Gen { dims, field, output } => cmd_gen(common, *dims, *field, output.as_ref()),
        Command::Example { field } => cmd_example(common, *field),
        Command::Selftest { trials } => cmd_selftest(common, *trials),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
