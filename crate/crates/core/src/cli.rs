//! Command-line front end: flag and config-file merging, the five
//! commands, three output formats, and the exit-code contract.
//!
//! Exit codes: 0 success, 1 a verification or table check failed, 2 bad
//! usage or unparsable input, 3 a numerical failure, 4 requested object
//! not found.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dirac::DiracProblem;
use crate::error::{Error, Result};
use crate::expr::parse_coefficient;
use crate::integrate::{IntegratorConfig, Method};
use crate::presets::{preset, Preset, CLASSICAL_TOL, REFERENCE_ALPHAS, SUB_UNIT_TOL};
use crate::report::{csv_record, fmt_fixed, fmt_full, write_atomic, Table};
use crate::scaling::ScalingModel;
use crate::spectral::{
    scan_characteristic, sign_change_brackets, solve_spectrum, staircase_slope_quotient,
    Spectrum, DEFAULT_SCAN_POINTS, DEFAULT_TOL,
};
use crate::verify::{run_suite, Suite};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Solve,
    Scan,
    Table,
    Eigenfunction,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodKind {
    Fractal,
    Classical,
}

impl MethodKind {
    fn to_method(self) -> Method {
        match self {
            MethodKind::Fractal => Method::FractalRK4,
            MethodKind::Classical => Method::ClassicalRK4,
        }
    }

    fn label(self) -> &'static str {
        match self {
            MethodKind::Fractal => "fractal",
            MethodKind::Classical => "classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum FormatKind {
    #[serde(rename = "human-table", alias = "human")]
    #[value(name = "human")]
    Human,
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "json")]
    Json,
}

/// One fully merged run description. A config file carries exactly this
/// shape as JSON; command-line flags override individual fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub alpha: Vec<f64>,
    pub p: String,
    pub r: String,
    pub window: (f64, f64),
    pub steps: usize,
    pub scan_points: usize,
    pub tol: f64,
    pub method: MethodKind,
    #[serde(rename = "output_format")]
    pub format: FormatKind,
    #[serde(rename = "output_path", skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<u8>,
    pub index: usize,
    pub suite: String,
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: CommandKind::Solve,
            alpha: vec![1.0],
            p: "0".into(),
            r: "0".into(),
            window: (0.0, PI),
            steps: 4096,
            scan_points: DEFAULT_SCAN_POINTS,
            tol: DEFAULT_TOL,
            method: MethodKind::Fractal,
            format: FormatKind::Human,
            out: None,
            example: None,
            index: 1,
            suite: "all".into(),
            verbose: false,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(Error::InvalidConfig("at least one alpha is required".into()));
        }
        for &alpha in &self.alpha {
            ScalingModel::power_law(alpha)?;
        }
        let (min, max) = self.window;
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidWindow { min, max });
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidTolerance { tol: self.tol });
        }
        if self.steps < 2 {
            return Err(Error::TooFewSteps {
                min: 2,
                got: self.steps,
            });
        }
        if self.scan_points < 2 {
            return Err(Error::TooFewScanPoints {
                got: self.scan_points,
            });
        }
        if self.index == 0 {
            return Err(Error::InvalidConfig("--index is 1-based".into()));
        }
        if let Some(n) = self.example {
            preset(n)?;
        }
        Ok(())
    }
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected MIN,MAX, got '{s}'"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad window minimum '{lo}': {e}"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad window maximum '{hi}': {e}"))?;
    Ok((lo, hi))
}

#[derive(Subcommand, Debug, Clone, Copy)]
pub enum CommandArg {
    /// Find the eigenvalues in the window and report one row per alpha
    Solve,
    /// Sample the characteristic function over the window
    Scan,
    /// Reproduce a built-in example table and check it cell by cell
    Table,
    /// Write eigenfunction samples (x, S(x), f1, f2) for one eigenvalue
    Eigenfunction,
    /// Run an invariant suite over the built-in examples
    Verify,
}

impl From<CommandArg> for CommandKind {
    fn from(arg: CommandArg) -> Self {
        match arg {
            CommandArg::Solve => CommandKind::Solve,
            CommandArg::Scan => CommandKind::Scan,
            CommandArg::Table => CommandKind::Table,
            CommandArg::Eigenfunction => CommandKind::Eigenfunction,
            CommandArg::Verify => CommandKind::Verify,
        }
    }
}

/// Eigenvalue solver for 2x2 Dirac-type systems in a power-law staircase
/// coordinate.
#[derive(Parser, Debug)]
#[command(name = "fdirac", version, disable_help_subcommand = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandArg>,

    /// Coefficient p as an expression in S and x
    #[arg(long, global = true)]
    p: Option<String>,
    /// Coefficient r as an expression in S and x
    #[arg(long, global = true)]
    r: Option<String>,
    /// Scaling indices, comma separated, each in (0, 1]
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    /// Eigenvalue search window MIN,MAX
    #[arg(long, global = true, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    /// Grid steps over [0, pi]
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Number of window samples used to bracket sign changes
    #[arg(long = "scan-points", global = true)]
    scan_points: Option<usize>,
    /// Eigenvalue refinement tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Integration geometry
    #[arg(long, global = true, value_enum)]
    method: Option<MethodKind>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    format: Option<FormatKind>,
    /// Output file (written atomically); stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use a built-in example's coefficients
    #[arg(long, global = true)]
    example: Option<u8>,
    /// 1-based eigenvalue index for the eigenfunction command
    #[arg(long, global = true)]
    index: Option<usize>,
    /// Invariant suite name for the verify command
    #[arg(long, global = true)]
    suite: Option<String>,
    /// Write the merged configuration as JSON before running
    #[arg(long = "dump-config", global = true)]
    dump_config: Option<PathBuf>,
    /// Read defaults from a JSON configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Include weights, betas, residuals, and slopes in reports
    #[arg(long, global = true)]
    verbose: bool,
}

fn merged_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<RunConfig>(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(cmd) = cli.command {
        cfg.command = cmd.into();
    }
    if let Some(p) = &cli.p {
        cfg.p = p.clone();
    }
    if let Some(r) = &cli.r {
        cfg.r = r.clone();
    }
    if let Some(alpha) = &cli.alpha {
        cfg.alpha = alpha.clone();
    }
    if let Some(window) = cli.window {
        cfg.window = window;
    }
    if let Some(steps) = cli.steps {
        cfg.steps = steps;
    }
    if let Some(points) = cli.scan_points {
        cfg.scan_points = points;
    }
    if let Some(tol) = cli.tol {
        cfg.tol = tol;
    }
    if let Some(method) = cli.method {
        cfg.method = method;
    }
    if let Some(format) = cli.format {
        cfg.format = format;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    if let Some(example) = cli.example {
        cfg.example = Some(example);
    }
    if let Some(index) = cli.index {
        cfg.index = index;
    }
    if let Some(suite) = &cli.suite {
        cfg.suite = suite.clone();
    }
    cfg.verbose |= cli.verbose;
    cfg.validate()?;
    Ok(cfg)
}

/// Map every error to its contractual exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        // bad usage or unparsable input
        Error::Expr(_)
        | Error::InvalidScalingIndex { .. }
        | Error::NegativeAbscissa { .. }
        | Error::InvalidInterval { .. }
        | Error::TooFewSteps { .. }
        | Error::InvalidWindow { .. }
        | Error::TooFewScanPoints { .. }
        | Error::InvalidTolerance { .. }
        | Error::InvalidConfig(_)
        | Error::UnknownExample(_)
        | Error::Json(_)
        | Error::BadStudyLevels => 2,
        // numerical failure
        Error::CoefficientEval { .. }
        | Error::Divergence { .. }
        | Error::IterationCap { .. }
        | Error::DegenerateSlope { .. }
        | Error::BetaInconsistent { .. }
        | Error::ResidualTooLarge { .. }
        | Error::NonPositiveWeight { .. }
        | Error::StudyUnconverged { .. }
        | Error::LengthMismatch { .. }
        | Error::GridMismatch
        | Error::InvalidBracket { .. }
        | Error::Io(_) => 3,
        // requested object does not exist
        Error::IndexNotFound { .. } | Error::NoEigenpairs => 4,
    }
}

/// Parse the command line, run it, and return the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let cfg = merged_config(cli)?;
    if let Some(path) = &cli.dump_config {
        let mut text = serde_json::to_string_pretty(&cfg)?;
        text.push('\n');
        write_atomic(path, &text)?;
    }
    match cfg.command {
        CommandKind::Solve => cmd_solve(&cfg),
        CommandKind::Scan => cmd_scan(&cfg),
        CommandKind::Table => cmd_table(&cfg),
        CommandKind::Eigenfunction => cmd_eigenfunction(&cfg),
        CommandKind::Verify => cmd_verify(&cfg),
    }
}

fn coefficient_texts(cfg: &RunConfig) -> Result<(&str, &str)> {
    match cfg.example {
        Some(n) => {
            let pr = preset(n)?;
            Ok((pr.p, pr.r))
        }
        None => Ok((cfg.p.as_str(), cfg.r.as_str())),
    }
}

fn build_problem(cfg: &RunConfig, alpha: f64) -> Result<DiracProblem> {
    let (p_text, r_text) = coefficient_texts(cfg)?;
    let p = parse_coefficient(p_text)?;
    let r = parse_coefficient(r_text)?;
    let model = ScalingModel::power_law(alpha)?;
    DiracProblem::new(p, r, model, cfg.steps)
}

fn integrator_config(cfg: &RunConfig) -> Result<IntegratorConfig> {
    IntegratorConfig::new(cfg.method.to_method(), cfg.steps)
}

/// Print to stdout or write atomically to the configured path.
fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn alpha_path(path: &Path, alpha: f64) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-alpha-{alpha}.{ext}"),
        None => format!("{stem}-alpha-{alpha}"),
    };
    path.with_file_name(name)
}

#[derive(Serialize)]
struct JsonProblem {
    p: String,
    r: String,
    a: f64,
    b: f64,
}

impl JsonProblem {
    fn new(problem: &DiracProblem) -> Self {
        JsonProblem {
            p: problem.p().to_string(),
            r: problem.r().to_string(),
            a: problem.a(),
            b: problem.b(),
        }
    }
}

#[derive(Serialize)]
struct JsonMeta {
    steps: usize,
    tol: f64,
    version: &'static str,
}

impl JsonMeta {
    fn new(cfg: &RunConfig) -> Self {
        JsonMeta {
            steps: cfg.steps,
            tol: cfg.tol,
            version: VERSION,
        }
    }
}

#[derive(Serialize)]
struct JsonEigenvalue {
    lambda: f64,
    weight: f64,
    beta: f64,
    residual: f64,
}

#[derive(Serialize)]
struct JsonSolveEntry {
    problem: JsonProblem,
    alpha: f64,
    method: &'static str,
    eigenvalues: Vec<JsonEigenvalue>,
    meta: JsonMeta,
}

struct SolveRun {
    alpha: f64,
    problem: DiracProblem,
    spectrum: Spectrum,
    /// Staircase-coordinate slope quotients per pair, sub-unit alpha only.
    quotients: Vec<Option<f64>>,
}

fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let iconfig = integrator_config(cfg)?;
    let mut runs = Vec::new();
    for &alpha in &cfg.alpha {
        let problem = build_problem(cfg, alpha)?;
        let spectrum = solve_spectrum(cfg.window, &problem, &iconfig, cfg.scan_points, cfg.tol)?;
        for f in &spectrum.failures {
            eprintln!(
                "warning: alpha {alpha}: bracket [{}, {}] not converted: {}",
                f.lo, f.hi, f.reason
            );
        }
        let quotients = if cfg.verbose && alpha < 1.0 {
            spectrum
                .pairs
                .iter()
                .map(|pair| staircase_slope_quotient(pair.lambda_n, &problem, &iconfig).ok())
                .collect()
        } else {
            vec![None; spectrum.pairs.len()]
        };
        runs.push(SolveRun {
            alpha,
            problem,
            spectrum,
            quotients,
        });
    }

    let total: usize = runs.iter().map(|r| r.spectrum.pairs.len()).sum();
    if total == 0 {
        return Err(Error::NoEigenpairs);
    }

    let text = match cfg.format {
        FormatKind::Human => render_solve_human(cfg, &runs),
        FormatKind::Csv => render_solve_csv(cfg, &runs),
        FormatKind::Json => render_solve_json(cfg, &runs)?,
    };
    emit(&cfg.out, &text)?;
    Ok(0)
}

fn render_solve_human(cfg: &RunConfig, runs: &[SolveRun]) -> String {
    let columns = runs
        .iter()
        .map(|r| r.spectrum.pairs.len())
        .max()
        .unwrap_or(0);
    let mut headers = vec!["method".to_string(), "alpha".to_string()];
    for n in 1..=columns {
        headers.push(format!("lambda_{n}"));
    }
    let mut table = Table::new(headers);
    for run in runs {
        let mut row = vec![cfg.method.label().to_string(), fmt_full(run.alpha)];
        for i in 0..columns {
            row.push(match run.spectrum.pairs.get(i) {
                Some(pair) => fmt_fixed(pair.lambda_n),
                None => "-".to_string(),
            });
        }
        table.push_row(row);
    }
    let mut out = table.render();
    if cfg.verbose {
        for run in runs {
            let _ = write!(
                out,
                "\nalpha = {} ({}), {} eigenvalue(s)\n",
                fmt_full(run.alpha),
                cfg.method.label(),
                run.spectrum.pairs.len()
            );
            let mut detail = Table::new([
                "n",
                "lambda",
                "weight",
                "beta",
                "residual",
                "slope",
                "s_quotient",
            ]);
            for (pair, quotient) in run.spectrum.pairs.iter().zip(&run.quotients) {
                detail.push_row([
                    pair.index.to_string(),
                    fmt_fixed(pair.lambda_n),
                    fmt_fixed(pair.weight_alpha_n),
                    fmt_fixed(pair.beta_n),
                    format!("{:.3e}", pair.residual),
                    fmt_fixed(pair.delta_slope),
                    match quotient {
                        Some(q) => fmt_fixed(*q),
                        None => "-".to_string(),
                    },
                ]);
            }
            out.push_str(&detail.render());
        }
    }
    out
}

fn render_solve_csv(cfg: &RunConfig, runs: &[SolveRun]) -> String {
    let mut out = String::from("method,alpha,n,lambda,weight,beta,residual\n");
    for run in runs {
        for pair in &run.spectrum.pairs {
            out.push_str(&csv_record(&[
                cfg.method.label().to_string(),
                fmt_full(run.alpha),
                pair.index.to_string(),
                fmt_full(pair.lambda_n),
                fmt_full(pair.weight_alpha_n),
                fmt_full(pair.beta_n),
                fmt_full(pair.residual),
            ]));
        }
    }
    out
}

fn render_solve_json(cfg: &RunConfig, runs: &[SolveRun]) -> Result<String> {
    let entries: Vec<JsonSolveEntry> = runs
        .iter()
        .map(|run| JsonSolveEntry {
            problem: JsonProblem::new(&run.problem),
            alpha: run.alpha,
            method: cfg.method.label(),
            eigenvalues: run
                .spectrum
                .pairs
                .iter()
                .map(|pair| JsonEigenvalue {
                    lambda: pair.lambda_n,
                    weight: pair.weight_alpha_n,
                    beta: pair.beta_n,
                    residual: pair.residual,
                })
                .collect(),
            meta: JsonMeta::new(cfg),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&entries)?;
    text.push('\n');
    Ok(text)
}

#[derive(Serialize)]
struct JsonScanSample {
    lambda: f64,
    delta: f64,
    bracket_start: bool,
}

#[derive(Serialize)]
struct JsonBracket {
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct JsonScanEntry {
    problem: JsonProblem,
    alpha: f64,
    method: &'static str,
    samples: Vec<JsonScanSample>,
    brackets: Vec<JsonBracket>,
    meta: JsonMeta,
}

struct ScanRun {
    alpha: f64,
    problem: DiracProblem,
    samples: Vec<crate::spectral::CharacteristicSample>,
    brackets: Vec<(f64, f64)>,
    /// Sample indices that open a sign-change bracket.
    starts: Vec<bool>,
}

fn cmd_scan(cfg: &RunConfig) -> Result<i32> {
    let iconfig = integrator_config(cfg)?;
    let mut runs = Vec::new();
    for &alpha in &cfg.alpha {
        let problem = build_problem(cfg, alpha)?;
        let outcome = scan_characteristic(
            cfg.window.0,
            cfg.window.1,
            cfg.scan_points,
            &problem,
            &iconfig,
        )?;
        for f in &outcome.failures {
            eprintln!(
                "warning: alpha {alpha}: sample at lambda = {} skipped: {}",
                f.lambda, f.reason
            );
        }
        let brackets = sign_change_brackets(&outcome.samples);
        let mut starts = vec![false; outcome.samples.len()];
        for &(lo, _) in &brackets {
            if let Some(i) = outcome.samples.iter().position(|s| s.lambda == lo) {
                starts[i] = true;
            }
        }
        runs.push(ScanRun {
            alpha,
            problem,
            samples: outcome.samples,
            brackets,
            starts,
        });
    }

    let text = match cfg.format {
        FormatKind::Human => render_scan_human(cfg, &runs),
        FormatKind::Csv => render_scan_csv(&runs),
        FormatKind::Json => render_scan_json(cfg, &runs)?,
    };
    emit(&cfg.out, &text)?;
    Ok(0)
}

fn render_scan_human(cfg: &RunConfig, runs: &[ScanRun]) -> String {
    let mut out = String::new();
    for run in runs {
        let _ = write!(
            out,
            "alpha = {} ({}): {} sample(s), {} sign-change bracket(s)\n",
            fmt_full(run.alpha),
            cfg.method.label(),
            run.samples.len(),
            run.brackets.len()
        );
        let mut table = Table::new(["lambda", "delta", "bracket"]);
        for (sample, start) in run.samples.iter().zip(&run.starts) {
            table.push_row([
                fmt_fixed(sample.lambda),
                fmt_fixed(sample.delta),
                if *start { "*" } else { "" }.to_string(),
            ]);
        }
        out.push_str(&table.render());
        out.push('\n');
    }
    out
}

fn render_scan_csv(runs: &[ScanRun]) -> String {
    let mut out = String::from("alpha,lambda,delta,bracket_start\n");
    for run in runs {
        for (sample, start) in run.samples.iter().zip(&run.starts) {
            out.push_str(&csv_record(&[
                fmt_full(run.alpha),
                fmt_full(sample.lambda),
                fmt_full(sample.delta),
                if *start { "1" } else { "0" }.to_string(),
            ]));
        }
    }
    out
}

fn render_scan_json(cfg: &RunConfig, runs: &[ScanRun]) -> Result<String> {
    let entries: Vec<JsonScanEntry> = runs
        .iter()
        .map(|run| JsonScanEntry {
            problem: JsonProblem::new(&run.problem),
            alpha: run.alpha,
            method: cfg.method.label(),
            samples: run
                .samples
                .iter()
                .zip(&run.starts)
                .map(|(s, start)| JsonScanSample {
                    lambda: s.lambda,
                    delta: s.delta,
                    bracket_start: *start,
                })
                .collect(),
            brackets: run
                .brackets
                .iter()
                .map(|&(lo, hi)| JsonBracket { lo, hi })
                .collect(),
            meta: JsonMeta::new(cfg),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&entries)?;
    text.push('\n');
    Ok(text)
}

struct TableRow {
    label: String,
    alpha: f64,
    method: MethodKind,
    found: Vec<f64>,
    expected: &'static [f64],
    /// Absolute tolerance; `None` means 1% relative.
    abs_tol: Option<f64>,
}

fn table_rows(cfg: &RunConfig, preset: &Preset) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    let solve = |alpha: f64, method: MethodKind| -> Result<Vec<f64>> {
        let p = parse_coefficient(preset.p)?;
        let r = parse_coefficient(preset.r)?;
        let model = ScalingModel::power_law(alpha)?;
        let problem = DiracProblem::new(p, r, model, cfg.steps)?;
        let iconfig = IntegratorConfig::new(method.to_method(), cfg.steps)?;
        let spectrum =
            solve_spectrum(cfg.window, &problem, &iconfig, cfg.scan_points, cfg.tol)?;
        for f in &spectrum.failures {
            eprintln!(
                "warning: alpha {alpha}: bracket [{}, {}] not converted: {}",
                f.lo, f.hi, f.reason
            );
        }
        Ok(spectrum.pairs.iter().map(|p| p.lambda_n).collect())
    };

    rows.push(TableRow {
        label: "Classical".to_string(),
        alpha: 1.0,
        method: MethodKind::Classical,
        found: solve(1.0, MethodKind::Classical)?,
        expected: preset.classical_reference(),
        abs_tol: Some(CLASSICAL_TOL),
    });
    for alpha in REFERENCE_ALPHAS {
        let expected = preset
            .fractal_reference(alpha)
            .ok_or(Error::InvalidConfig(format!(
                "no reference row for alpha {alpha}"
            )))?;
        rows.push(TableRow {
            label: format!("Fractal {alpha}"),
            alpha,
            method: MethodKind::Fractal,
            found: solve(alpha, MethodKind::Fractal)?,
            expected,
            abs_tol: if alpha == 1.0 {
                Some(CLASSICAL_TOL)
            } else {
                None
            },
        });
    }
    Ok(rows)
}

fn cmd_table(cfg: &RunConfig) -> Result<i32> {
    let number = cfg.example.ok_or_else(|| {
        Error::InvalidConfig("the table command needs --example 1|2|3".into())
    })?;
    let preset = preset(number)?;
    let rows = table_rows(cfg, preset)?;

    let mut out = String::new();
    let _ = write!(
        out,
        "example {} ({}): p = {}, r = {}\n\n",
        preset.number, preset.label, preset.p, preset.r
    );

    // eigenvalue table
    let columns = rows
        .iter()
        .map(|r| r.found.len().max(r.expected.len()))
        .max()
        .unwrap_or(0);
    let mut headers = vec!["method".to_string()];
    for n in 1..=columns {
        headers.push(format!("lambda_{n}"));
    }
    let mut table = Table::new(headers);
    for row in &rows {
        let mut cells = vec![row.label.clone()];
        for i in 0..columns {
            cells.push(match row.found.get(i) {
                Some(v) => fmt_fixed(*v),
                None => "-".to_string(),
            });
        }
        table.push_row(cells);
    }
    out.push_str(&table.render());
    out.push('\n');

    // per-cell checks against the embedded reference rows
    let mut all_pass = true;
    let mut check = |line: String, pass: bool, out: &mut String| {
        all_pass &= pass;
        let _ = writeln!(out, "{line} {}", if pass { "PASS" } else { "FAIL" });
    };
    for row in &rows {
        let pass = row.found.len() == row.expected.len();
        check(
            format!(
                "{} count: got {} want {}",
                row.label,
                row.found.len(),
                row.expected.len()
            ),
            pass,
            &mut out,
        );
        for (i, want) in row.expected.iter().enumerate() {
            match row.found.get(i) {
                Some(got) => {
                    let (defect, bound, kind) = match row.abs_tol {
                        Some(tol) => ((got - want).abs(), tol, "abs"),
                        None => ((got - want).abs() / want.abs(), SUB_UNIT_TOL, "rel"),
                    };
                    check(
                        format!(
                            "{} n={}: got {} want {} ({kind} {:.1e} <= {bound:.0e})",
                            row.label,
                            i + 1,
                            fmt_fixed(*got),
                            fmt_fixed(*want),
                            defect
                        ),
                        defect <= bound,
                        &mut out,
                    );
                }
                None => check(
                    format!("{} n={}: missing (want {})", row.label, i + 1, fmt_fixed(*want)),
                    false,
                    &mut out,
                ),
            }
        }
    }

    // gap table: |classical - fractal@alpha=1| per eigenvalue
    let classical = &rows[0];
    let fractal_unit = rows
        .iter()
        .find(|r| r.method == MethodKind::Fractal && r.alpha == 1.0)
        .expect("the alpha = 1 fractal row is always present");
    out.push('\n');
    let mut gaps = Table::new(["n", "classical", "fractal 1.0", "gap"]);
    for (i, (c, f)) in classical
        .found
        .iter()
        .zip(&fractal_unit.found)
        .enumerate()
    {
        gaps.push_row([
            (i + 1).to_string(),
            fmt_fixed(*c),
            fmt_fixed(*f),
            format!("{:.3e}", (c - f).abs()),
        ]);
    }
    out.push_str(&gaps.render());
    for (i, (c, f)) in classical
        .found
        .iter()
        .zip(&fractal_unit.found)
        .enumerate()
    {
        let gap = (c - f).abs();
        check(
            format!("gap n={}: |classical - fractal@1.0| = {gap:.3e} <= 1e-9", i + 1),
            gap <= 1e-9,
            &mut out,
        );
    }

    print!("{out}");
    Ok(if all_pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct JsonFunctionSample {
    x: f64,
    s: f64,
    f1: f64,
    f2: f64,
}

#[derive(Serialize)]
struct JsonFunctionEntry {
    problem: JsonProblem,
    alpha: f64,
    method: &'static str,
    index: usize,
    lambda: f64,
    samples: Vec<JsonFunctionSample>,
    meta: JsonMeta,
}

struct FunctionRun {
    alpha: f64,
    problem: DiracProblem,
    lambda: f64,
    samples: Vec<JsonFunctionSample>,
}

fn cmd_eigenfunction(cfg: &RunConfig) -> Result<i32> {
    let iconfig = integrator_config(cfg)?;
    let mut runs = Vec::new();
    for &alpha in &cfg.alpha {
        let problem = build_problem(cfg, alpha)?;
        let spectrum = solve_spectrum(cfg.window, &problem, &iconfig, cfg.scan_points, cfg.tol)?;
        for f in &spectrum.failures {
            eprintln!(
                "warning: alpha {alpha}: bracket [{}, {}] not converted: {}",
                f.lo, f.hi, f.reason
            );
        }
        let pair = spectrum
            .pairs
            .iter()
            .find(|p| p.index == cfg.index)
            .ok_or(Error::IndexNotFound {
                index: cfg.index,
                found: spectrum.pairs.len(),
            })?;
        let grid = pair.phi.grid();
        let samples = grid
            .nodes()
            .iter()
            .zip(grid.staircase_nodes())
            .zip(pair.phi.states())
            .map(|((&x, &s), state)| JsonFunctionSample {
                x,
                s,
                f1: state.f1,
                f2: state.f2,
            })
            .collect();
        runs.push(FunctionRun {
            alpha,
            problem,
            lambda: pair.lambda_n,
            samples,
        });
    }

    match (&cfg.out, runs.len()) {
        (Some(path), n) if n > 1 => {
            for run in &runs {
                let text = render_function(cfg, std::slice::from_ref(run))?;
                write_atomic(&alpha_path(path, run.alpha), &text)?;
            }
        }
        (out, _) => {
            let text = render_function(cfg, &runs)?;
            emit(out, &text)?;
        }
    }
    Ok(0)
}

fn render_function(cfg: &RunConfig, runs: &[FunctionRun]) -> Result<String> {
    Ok(match cfg.format {
        FormatKind::Human => {
            let mut out = String::new();
            for run in runs {
                let _ = write!(
                    out,
                    "alpha = {}, n = {}, lambda = {}\n",
                    fmt_full(run.alpha),
                    cfg.index,
                    fmt_fixed(run.lambda)
                );
                let mut table = Table::new(["x", "S(x)", "f1", "f2"]);
                for s in &run.samples {
                    table.push_row([
                        fmt_fixed(s.x),
                        fmt_fixed(s.s),
                        fmt_fixed(s.f1),
                        fmt_fixed(s.f2),
                    ]);
                }
                out.push_str(&table.render());
                out.push('\n');
            }
            out
        }
        FormatKind::Csv => {
            let mut out = String::from("alpha,x,s,f1,f2\n");
            for run in runs {
                for s in &run.samples {
                    out.push_str(&csv_record(&[
                        fmt_full(run.alpha),
                        fmt_full(s.x),
                        fmt_full(s.s),
                        fmt_full(s.f1),
                        fmt_full(s.f2),
                    ]));
                }
            }
            out
        }
        FormatKind::Json => {
            let entries: Vec<JsonFunctionEntry> = runs
                .iter()
                .map(|run| JsonFunctionEntry {
                    problem: JsonProblem::new(&run.problem),
                    alpha: run.alpha,
                    method: cfg.method.label(),
                    index: cfg.index,
                    lambda: run.lambda,
                    samples: run
                        .samples
                        .iter()
                        .map(|s| JsonFunctionSample { ..*s })
                        .collect(),
                    meta: JsonMeta::new(cfg),
                })
                .collect();
            let mut text = serde_json::to_string_pretty(&entries)?;
            text.push('\n');
            text
        }
    })
}

fn cmd_verify(cfg: &RunConfig) -> Result<i32> {
    let suite: Suite = cfg.suite.parse()?;
    let checks = run_suite(suite, cfg.steps)?;
    let mut table = Table::new(["check", "defect", "bound", "result"]);
    let mut all_pass = true;
    for check in &checks {
        all_pass &= check.pass;
        table.push_row([
            check.name.clone(),
            format!("{:.3e}", check.defect),
            format!("{:.0e}", check.bound),
            if check.pass { "PASS" } else { "FAIL" }.to_string(),
        ]);
    }
    print!("{}", table.render());
    println!(
        "{}: {} check(s), {}",
        suite,
        checks.len(),
        if all_pass { "all passed" } else { "FAILURES" }
    );
    Ok(if all_pass { 0 } else { 1 })
}
