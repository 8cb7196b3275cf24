//! Argument handling for the `infsup` binary. `run` never exits the process,
//! so every command can be driven in-process.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{all_bounds, beta_inv_c11, beta_inv_lipschitz, check_weight_vectors, pf_constant, BoundReport};
use crate::error::{Error, Result};
use crate::gap::scaling_study;
use crate::geometry::ChannelGeometry;
use crate::rectangle::infsup_rectangle;
use crate::verify::{run_suite, Suite, GAP_HEIGHTS};
use crate::window::{compare_reference, global_c1_c2, search, CertificateCase, SMALL_NU_LIMIT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "infsup", version, about = "Certified inf-sup bounds for x-periodic channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Theorem {
    Auto,
    C11,
    Lip,
    Pf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    All,
    Lemma32,
    Thm31,
    Corollaries,
    #[value(name = "lemmasA", alias = "lemmas-a")]
    LemmasA,
    Gap,
    Pf,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::All => Suite::ALL.to_vec(),
            SuiteArg::Lemma32 => vec![Suite::Lemma32],
            SuiteArg::Thm31 => vec![Suite::Thm31],
            SuiteArg::Corollaries => vec![Suite::Corollaries],
            SuiteArg::LemmasA => vec![Suite::LemmasA],
            SuiteArg::Gap => vec![Suite::Gap],
            SuiteArg::Pf => vec![Suite::Pf],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    #[value(name = "table1")]
    Reference,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Search the window certificates for a threshold.
    Envelope {
        #[arg(long, default_value_t = 8.9)]
        c_thresh: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Compare against embedded reference rows; mismatches exit 1.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log-spaced samples of the certified (C1, C2) as CSV.
    PlotData {
        #[arg(long, default_value_t = 8.9)]
        c_thresh: f64,
        #[arg(long, default_value_t = 0.2)]
        nu_lo: f64,
        #[arg(long, default_value_t = 600.0)]
        nu_hi: f64,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the channel bounds for a geometry.
    Bound {
        /// Geometry JSON file, or inline JSON starting with '{'.
        #[arg(long)]
        geometry: String,
        #[arg(long, value_enum, default_value_t = Theorem::Auto)]
        theorem: Theorem,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated Fourier inf-sup oracle on a rectangle.
    OracleRect {
        #[arg(long = "L", default_value_t = 1.0)]
        l: f64,
        #[arg(long = "H", default_value_t = 1.0)]
        h: f64,
        #[arg(long = "N", default_value_t = 16)]
        n: usize,
        #[arg(long = "J", default_value_t = 64)]
        j: usize,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized property suites.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lower/upper bounds on the gap channel and the fitted exponent.
    GapScaling {
        #[arg(long, value_delimiter = ',')]
        h0_list: Option<Vec<f64>>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Exit code for a library error: bad input is a usage error, everything
/// else is a failed check.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Coverage { .. } | Error::NotCovered(_) | Error::Eigen(_) => EXIT_FAILURE,
        _ => EXIT_USAGE,
    }
}

struct Outcome {
    text: String,
    code: i32,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, code: EXIT_OK }
    }
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    if let Err(e) = check_weight_vectors() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_FAILURE;
    }
    let out_path = match &cli.command {
        Command::Envelope { out, .. }
        | Command::PlotData { out, .. }
        | Command::Bound { out, .. }
        | Command::OracleRect { out, .. }
        | Command::Verify { out, .. }
        | Command::GapScaling { out, .. } => out.clone(),
    };
    match execute(cli.command, err) {
        Ok(outcome) => {
            let written = match out_path {
                Some(p) => std::fs::write(&p, &outcome.text),
                None => out.write_all(outcome.text.as_bytes()),
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
            outcome.code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

fn unsupported(cmd: &str, f: Format) -> Error {
    usage(format!("{cmd} does not support --format {f:?}").to_lowercase())
}

fn with_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn execute(cmd: Command, err: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Envelope { c_thresh, format, expect, .. } => envelope(c_thresh, format, expect, err),
        Command::PlotData { c_thresh, nu_lo, nu_hi, samples, format, .. } => {
            plot_data(c_thresh, nu_lo, nu_hi, samples, format)
        }
        Command::Bound { geometry, theorem, format, .. } => bound(&geometry, theorem, format),
        Command::OracleRect { l, h, n, j, format, .. } => oracle_rect(l, h, n, j, format, err),
        Command::Verify { suite, seed, trials, .. } => verify(suite, seed, trials, err),
        Command::GapScaling { h0_list, format, .. } => gap_scaling(h0_list, format),
    }
}

fn envelope(c_thresh: f64, format: Format, expect: Option<Expect>, err: &mut dyn Write) -> Result<Outcome> {
    let table = search(c_thresh)?;
    let text = match format {
        Format::Json => with_newline(table.to_json()?),
        Format::Csv => table.to_csv(),
        Format::Table => return Err(unsupported("envelope", format)),
    };
    let _ = writeln!(
        err,
        "{} windows, contiguous over ({:.6}, {:.6})",
        table.len(),
        table.covered.0,
        table.covered.1
    );
    if table.covered.0 > SMALL_NU_LIMIT {
        let _ = writeln!(
            err,
            "note: ({SMALL_NU_LIMIT}, {:.6}) lies below the first window and is not certified",
            table.covered.0
        );
    }
    let mut code = EXIT_OK;
    if expect == Some(Expect::Reference) {
        let mismatches = compare_reference(&table);
        if mismatches.is_empty() {
            let _ = writeln!(err, "reference table: match");
        } else {
            for m in &mismatches {
                let _ = writeln!(err, "reference table mismatch: {m}");
            }
            code = EXIT_FAILURE;
        }
    }
    Ok(Outcome { text, code })
}

fn case_name(c: CertificateCase) -> &'static str {
    match c {
        CertificateCase::SmallNu => "small",
        CertificateCase::Window => "window",
        CertificateCase::LargeNu => "large",
    }
}

/// `samples` log-spaced points on `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    if samples == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..samples)
        .map(|i| if i + 1 == samples { hi } else { (a + (b - a) * i as f64 / (samples - 1) as f64).exp() })
        .collect()
}

fn plot_data(c_thresh: f64, nu_lo: f64, nu_hi: f64, samples: usize, format: Format) -> Result<Outcome> {
    if !(nu_lo > 0.0 && nu_lo < nu_hi) {
        return Err(usage(format!("need 0 < nu-lo < nu-hi, got {nu_lo}, {nu_hi}")));
    }
    if samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    let table = search(c_thresh)?;
    let rows = log_space(nu_lo, nu_hi, samples)
        .into_iter()
        .map(|nu| global_c1_c2(nu, &table))
        .collect::<Result<Vec<_>>>()?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from("nu,c1,c2,case\n");
            for r in &rows {
                s.push_str(&format!("{:.16e},{:.16e},{:.16e},{}\n", r.nu, r.c1, r.c2, case_name(r.case)));
            }
            s
        }
        Format::Json => with_newline(serde_json::to_string_pretty(&rows)?),
        Format::Table => return Err(unsupported("plot-data", format)),
    };
    Ok(Outcome::ok(text))
}

/// Reads a geometry from a file, or parses it directly when it looks like JSON.
pub fn load_geometry(arg: &str) -> Result<ChannelGeometry> {
    let src = if arg.trim_start().starts_with('{') { arg.to_string() } else { std::fs::read_to_string(arg)? };
    ChannelGeometry::from_json(&src)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

/// Fixed-width rendering, one row per report.
pub fn render_bound_table(reports: &[BoundReport]) -> String {
    let mut s = format!(
        "{:<10} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>14} {:>4}\n",
        "theorem", "value", "assembled", "H", "C1", "C2", "theta", "K", "rec"
    );
    for r in reports {
        let name = serde_json::to_value(r.theorem).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        s.push_str(&format!(
            "{:<10} {:>14.6e} {:>14.6e} {:>14.6e} {:>14} {:>14} {:>14} {:>14} {:>4}\n",
            name,
            r.value,
            r.assembled,
            r.h_ref,
            fmt_opt(r.c1),
            fmt_opt(r.c2),
            fmt_opt(r.theta),
            fmt_opt(r.k),
            if r.recommended { "*" } else { "" }
        ));
    }
    s
}

fn bound(geometry: &str, theorem: Theorem, format: Format) -> Result<Outcome> {
    let g = load_geometry(geometry)?;
    let reports = match theorem {
        Theorem::Auto => all_bounds(&g),
        Theorem::C11 => vec![beta_inv_c11(&g)?],
        Theorem::Lip => vec![beta_inv_lipschitz(&g)?],
        Theorem::Pf => vec![pf_constant(&g)],
    };
    let text = match format {
        Format::Json if theorem == Theorem::Auto => with_newline(serde_json::to_string_pretty(&reports)?),
        Format::Json => with_newline(reports[0].to_json()?),
        Format::Table => render_bound_table(&reports),
        Format::Csv => return Err(unsupported("bound", format)),
    };
    Ok(Outcome::ok(text))
}

fn oracle_rect(l: f64, h: f64, n: usize, j: usize, format: Format, err: &mut dyn Write) -> Result<Outcome> {
    if format != Format::Json {
        return Err(unsupported("oracle-rect", format));
    }
    let r = infsup_rectangle(l, h, n, j)?;
    if r.under_resolved() {
        let _ = writeln!(err, "warning: min eigenvalue moved by {:.3}% from J to 2J; increase --J", 100.0 * r.drift);
    }
    let code = if r.dominates_certified() {
        EXIT_OK
    } else {
        let _ = writeln!(err, "oracle beta {} is below the certified bound {}", r.beta, r.certified);
        EXIT_FAILURE
    };
    Ok(Outcome { text: with_newline(serde_json::to_string_pretty(&r)?), code })
}

fn verify(suite: SuiteArg, seed: u64, trials: usize, err: &mut dyn Write) -> Result<Outcome> {
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let reports = suite.suites().into_iter().map(|s| run_suite(s, seed, trials)).collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    for r in &reports {
        let _ = writeln!(
            err,
            "{:<12} {}  min residual {:.3e}",
            r.suite,
            if r.passed { "pass" } else { "FAIL" },
            r.min_residual()
        );
        for b in &r.failures {
            let _ = writeln!(err, "  repro: {}", serde_json::to_string(b)?);
        }
    }
    let doc = json!({ "seed": seed, "trials": trials, "passed": passed, "suites": reports });
    Ok(Outcome { text: with_newline(serde_json::to_string_pretty(&doc)?), code: if passed { EXIT_OK } else { EXIT_FAILURE } })
}

fn gap_scaling(h0_list: Option<Vec<f64>>, format: Format) -> Result<Outcome> {
    let hs = h0_list.unwrap_or_else(|| GAP_HEIGHTS.to_vec());
    let study = scaling_study(&hs)?;
    let text = match format {
        Format::Csv => study.to_csv(),
        Format::Json => with_newline(serde_json::to_string_pretty(&study)?),
        Format::Table => return Err(unsupported("gap-scaling", format)),
    };
    Ok(Outcome::ok(text))
}
