//! The `awlab` command line: argument parsing, report assembly and the
//! exit-code contract (0 pass, 1 failed check, 2 invalid input).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::araki_woods::{build_model, catalan, field_moment, semicircular_moment, RepModel};
use crate::error::{Error, Result};
use crate::io::{format_float, format_optional, load_model, load_phi, write_table};
use crate::multipliers::{circulant_deviation, full_hankel_size, hankel_matrix, projection_pd_norm, PhiSpec};
use crate::quantization::{net_element, NetElement};
use crate::suites::{run_suite, SuiteReport};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Default tolerance of the moment table against the Catalan numbers.
pub const MOMENT_TOLERANCE: f64 = 1e-10;
/// Default tolerance of the circulant column in `pdnorm`.
pub const CIRCULANT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "awlab", version, about = "Free Araki-Woods numerics on truncated Fock spaces")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Override of the pass/fail tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the table (pdnorm, moments) or the JSON report (other commands) here.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// cb norm of a radial multiplier.
    Cbnorm {
        /// φ as inline JSON or a path to a JSON file.
        #[arg(long)]
        phi: String,
    },
    /// Norms of the word-length projections for d = 0..=max-d.
    Pdnorm {
        #[arg(long)]
        max_d: usize,
    },
    /// Net element of the approximation property at level n.
    Cmap {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Run a verification suite.
    Verify { suite: String },
    /// Even moments of a field against the Catalan numbers.
    Moments {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
}

/// Text, JSON and optional table produced by a command.
struct Output {
    text: String,
    json: String,
    table: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
    passed: bool,
}

/// Exit code for an error: numerical failures are 1, everything else 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::SearchCap(_) | Error::NonConvergence { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_PASS };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    match run(&config) {
        Ok(out) => match emit(&config.common, &out, stdout) {
            Ok(()) => {
                if out.passed {
                    EXIT_PASS
                } else {
                    EXIT_CHECK_FAILED
                }
            }
            Err(e) => {
                let _ = writeln!(stderr, "error: {e}");
                EXIT_INVALID
            }
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn emit(common: &Common, out: &Output, stdout: &mut dyn Write) -> Result<()> {
    let rendered = &out.json;
    if common.json {
        stdout.write_all(rendered.as_bytes())?;
    } else {
        stdout.write_all(out.text.as_bytes())?;
    }
    if let Some(path) = &common.out {
        match &out.table {
            Some((header, rows)) => write_table(fs::File::create(path)?, header, rows)?,
            None => fs::write(path, rendered.as_bytes())?,
        }
    }
    Ok(())
}

fn run(config: &RunConfig) -> Result<Output> {
    let common = &config.common;
    if let Some(t) = common.tol {
        if !(t >= 0.0) {
            return Err(Error::InvalidInput(format!("--tol must be a nonnegative number (got {t})")));
        }
    }
    match &config.command {
        Command::Cbnorm { phi } => cbnorm(&load_phi(phi)?),
        Command::Pdnorm { max_d } => pdnorm(*max_d, common.tol.unwrap_or(CIRCULANT_TOLERANCE)),
        Command::Cmap { model, n } => cmap(&build_model(&load_model(model)?)?, *n, common.tol),
        Command::Verify { suite } => verify(run_suite(suite, common.seed, common.tol)?),
        Command::Moments { model, k_max } => {
            moments(&build_model(&load_model(model)?)?, *k_max, common.tol.unwrap_or(MOMENT_TOLERANCE))
        }
    }
}

#[derive(Serialize)]
struct CbnormReport {
    phi: PhiSpec,
    c1: [f64; 2],
    c2: [f64; 2],
    /// Largest `n` with `ψ(n) ≠ 0`, if any.
    psi_support: Option<usize>,
    hankel_size: usize,
    hankel_trace_norm: f64,
    norm: f64,
}

fn complex_text([re, im]: [f64; 2]) -> String {
    let sign = if im.is_sign_negative() { '-' } else { '+' };
    format!("{re} {sign} {}i", im.abs())
}

fn cbnorm(spec: &PhiSpec) -> Result<Output> {
    let s = spec.to_symbol()?;
    let b = hankel_matrix(&s, full_hankel_size(&s));
    let report = CbnormReport {
        phi: spec.clone(),
        c1: [s.c1.re, s.c1.im],
        c2: [s.c2.re, s.c2.im],
        psi_support: s.support_bound(),
        hankel_size: b.size,
        hankel_trace_norm: b.trace_norm,
        norm: s.c1.norm() + s.c2.norm() + b.trace_norm,
    };
    let mut text = String::new();
    let _ = writeln!(text, "c1            = {}", complex_text(report.c1));
    let _ = writeln!(text, "c2            = {}", complex_text(report.c2));
    let _ = match report.psi_support {
        Some(n) => writeln!(text, "psi support   = 0..={n}"),
        None => writeln!(text, "psi support   = empty"),
    };
    let _ = writeln!(text, "hankel size   = {}", report.hankel_size);
    let _ = writeln!(text, "||B||_1       = {}", format_float(report.hankel_trace_norm));
    let _ = writeln!(text, "||m_phi||_cb  = {}", format_float(report.norm));
    Ok(Output { text, json: render(&report)?, table: None, passed: true })
}

#[derive(Serialize)]
struct PdnormRow {
    d: usize,
    norm: f64,
    asymptote: f64,
    ratio: Option<f64>,
    circulant_deviation: f64,
}

#[derive(Serialize)]
struct PdnormReport {
    rows: Vec<PdnormRow>,
    max_circulant_deviation: f64,
    tolerance: f64,
    passed: bool,
}

fn pdnorm(max_d: usize, tol: f64) -> Result<Output> {
    let rows: Vec<PdnormRow> = (0..=max_d)
        .into_par_iter()
        .map(|d| {
            let r = projection_pd_norm(d);
            PdnormRow {
                d,
                norm: r.norm.value,
                asymptote: r.asymptote,
                ratio: r.ratio,
                circulant_deviation: circulant_deviation(d),
            }
        })
        .collect();
    let max_dev = rows.iter().map(|r| r.circulant_deviation).fold(0.0, f64::max);
    let passed = max_dev <= tol;
    let mut text = format!("{:>6} {:>24} {:>24} {:>24} {:>12}\n", "d", "norm", "asymptote", "ratio", "circ_dev");
    for r in &rows {
        let ratio = r.ratio.map_or_else(|| "-".to_string(), format_float);
        let _ = writeln!(
            text,
            "{:>6} {:>24} {:>24} {:>24} {:>12.3e}",
            r.d,
            format_float(r.norm),
            format_float(r.asymptote),
            ratio,
            r.circulant_deviation
        );
    }
    let _ = writeln!(text, "max circulant deviation {max_dev:.3e} (tolerance {tol:.1e}): {}", verdict(passed));
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.d.to_string(),
                format_float(r.norm),
                format_float(r.asymptote),
                format_optional(r.ratio),
                format_float(r.circulant_deviation),
            ]
        })
        .collect();
    let report = PdnormReport { rows, max_circulant_deviation: max_dev, tolerance: tol, passed };
    Ok(Output {
        text,
        json: render(&report)?,
        table: Some((vec!["d", "norm", "asymptote", "ratio", "circulant_deviation"], table)),
        passed,
    })
}

#[derive(Serialize)]
struct CmapReport {
    #[serde(flatten)]
    element: NetElement,
    certificate_target: f64,
    epsilon: f64,
    passed: bool,
}

fn cmap(model: &RepModel, n: usize, tol: Option<f64>) -> Result<Output> {
    if n == 0 {
        return Err(Error::InvalidInput("--n must be at least 1".into()));
    }
    let element = net_element(model, n)?;
    let slack = tol.unwrap_or(1e-12);
    let target = 1.0 + 1.0 / n as f64;
    let epsilon = 1.0 / n as f64;
    let passed = element.certificate <= target + slack && element.band_residual <= epsilon + slack;
    let mut text = String::new();
    let _ = writeln!(text, "n                = {n}");
    let _ = writeln!(text, "t                = {}", format_float(element.t));
    let _ = writeln!(text, "d_n              = {}", element.d);
    let _ = writeln!(text, "band rank        = {}", element.band_rank);
    let _ = writeln!(text, "band residual    = {:.3e} (epsilon {})", element.band_residual, format_float(epsilon));
    let _ = writeln!(text, "certificate      = {} (target {})", format_float(element.certificate), format_float(target));
    let _ = writeln!(text, "probe residual   = {}", format_float(element.probe_residual));
    let _ = match element.cmap_rank {
        Some(r) => writeln!(text, "cmap rank        = {r}"),
        None => writeln!(text, "cmap rank        = overflow"),
    };
    let _ = writeln!(text, "{}", verdict(passed));
    let report = CmapReport { element, certificate_target: target, epsilon, passed };
    Ok(Output { text, json: render(&report)?, table: None, passed })
}

fn verify(report: SuiteReport) -> Result<Output> {
    let mut text = format!("suite {} (seed {}): {} cases\n", report.suite, report.seed, report.cases);
    for c in &report.checks {
        let _ = writeln!(
            text,
            "  {:<28} {:>6} cases  residual {:.3e}  tol {:.1e}  {}",
            c.name,
            c.cases,
            c.residual,
            c.tolerance,
            verdict(c.passed)
        );
    }
    for (k, v) in &report.metrics {
        let _ = writeln!(text, "  {k} = {v:.6e}");
    }
    for f in &report.failures {
        let _ = writeln!(text, "  failure: {f}");
    }
    let _ = writeln!(text, "max residual {:.3e}: {}", report.max_residual, verdict(report.passed));
    Ok(Output { text, json: render(&report)?, table: None, passed: report.passed })
}

#[derive(Serialize)]
struct MomentRow {
    k: usize,
    moment: f64,
    catalan: u64,
    abs_error: f64,
    /// `|χ(W(ξ)^{2k-1})|`.
    odd_moment: f64,
}

#[derive(Serialize)]
struct MomentsReport {
    max_degree: usize,
    rows: Vec<MomentRow>,
    tolerance: f64,
    passed: bool,
}

/// Moments of `W(ξ)` for the first `K_R` basis vector.
fn moments(model: &RepModel, k_max: usize, tol: f64) -> Result<Output> {
    if 2 * k_max > model.max_degree() {
        return Err(Error::InvalidInput(format!(
            "k-max = {k_max} needs max_degree >= {} but the model has {}",
            2 * k_max,
            model.max_degree()
        )));
    }
    let xi = &model.kr_basis()[0];
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let moment = semicircular_moment(model, xi, k)?;
        let c = catalan(k);
        rows.push(MomentRow {
            k,
            moment,
            catalan: c,
            abs_error: (moment - c as f64).abs(),
            odd_moment: field_moment(model, xi, 2 * k - 1)?.norm(),
        });
    }
    let passed = rows.iter().all(|r| r.abs_error <= tol && r.odd_moment <= tol);
    let mut text = format!("{:>3} {:>24} {:>8} {:>12} {:>12}\n", "k", "moment", "catalan", "abs_error", "odd_moment");
    for r in &rows {
        let _ = writeln!(
            text,
            "{:>3} {:>24} {:>8} {:>12.3e} {:>12.3e}",
            r.k,
            format_float(r.moment),
            r.catalan,
            r.abs_error,
            r.odd_moment
        );
    }
    let _ = writeln!(text, "{}", verdict(passed));
    let table = rows
        .iter()
        .map(|r| {
            vec![
                r.k.to_string(),
                format_float(r.moment),
                r.catalan.to_string(),
                format_float(r.abs_error),
                format_float(r.odd_moment),
            ]
        })
        .collect();
    let report = MomentsReport { max_degree: model.max_degree(), rows, tolerance: tol, passed };
    Ok(Output {
        text,
        json: render(&report)?,
        table: Some((vec!["k", "moment", "catalan", "abs_error", "odd_moment"], table)),
        passed,
    })
}

fn render<T: Serialize>(report: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}
