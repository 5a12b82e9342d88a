//! Experiment runner behind the `gamma-ops` binary.
//!
//! Configuration comes from flags, a TOML file (`--config`), or both, with
//! flags taking precedence. Every command produces one flat table that is
//! written as CSV (the default) or as an aligned human-readable table.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::builtin;
use crate::error::{Error, Result};
use crate::exact_moments::{
    central_moment, closed_form_mstar_central, mstar_central_moment, mstar_raw_moment, raw_moment,
    ratio_to_f64, OperatorParams,
};
use crate::operator_eval::{apply, apply_derivative, apply_gn, apply_mstar};
use crate::quadrature::{QuadratureConfig, SplitPolicy};
use crate::verify::{
    check_first_modulus_bound, check_order_lemma, check_second_modulus_bound, voronovskaja_sequence,
    voronovskaja_sequence_exact, BoundKind, BoundReport, VoronovskajaOptions, REFERENCE_C,
};

/// Default output directory when `--out` is not given.
pub const OUTPUT_DIR_ENV: &str = "GAMMA_OPS_OUTPUT_DIR";

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONSTRAINT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_BOUND_VIOLATION: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "gamma-ops", version, about = "Moments, evaluation and verification runs for generalized Gamma-type operators")]
pub struct Cli {
    /// TOML experiment manifest; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Option<CommandArgs>,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Exact moment coefficients as `p/q` strings.
    Moments(Options),
    /// Numerical evaluation of an operator at a set of points.
    Eval(Options),
    /// Scaled deviations E_n along a doubling ladder and their extrapolation.
    Voronovskaja(Options),
    /// Modulus-of-continuity error bound checks.
    Bounds(Options),
    /// Order table of the central moments.
    Order(Options),
}

/// Flags shared by every subcommand. Lists are comma separated; integer
/// lists also accept `a..b` (inclusive range) and `a:b` (doubling ladder).
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    #[arg(long, alias = "ladder")]
    pub n: Option<String>,
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    /// Builtin function id(s).
    #[arg(long)]
    pub f: Option<String>,
    /// moments: raw | central | mstar-raw | mstar-central | closed-form | all
    #[arg(long)]
    pub kind: Option<String>,
    /// eval: m | derivative | mstar | gn
    #[arg(long)]
    pub operator: Option<String>,
    /// bounds: omega1 | omega2 | both
    #[arg(long)]
    pub theorem: Option<String>,
    /// voronovskaja: use exact rational moments (polynomial f only).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    #[serde(default)]
    pub exact: Option<bool>,
    /// voronovskaja: allowed |extrapolated - target| for `converged`.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub node_budget: Option<usize>,
    /// mode-centered | uniform
    #[arg(long)]
    pub split: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

impl Options {
    /// Field-wise `self.or(base)`.
    fn overlay(self, base: Options) -> Options {
        Options {
            n: self.n.or(base.n),
            k: self.k.or(base.k),
            r: self.r.or(base.r),
            m: self.m.or(base.m),
            x: self.x.or(base.x),
            f: self.f.or(base.f),
            kind: self.kind.or(base.kind),
            operator: self.operator.or(base.operator),
            theorem: self.theorem.or(base.theorem),
            exact: self.exact.or(base.exact),
            tolerance: self.tolerance.or(base.tolerance),
            rel_tol: self.rel_tol.or(base.rel_tol),
            abs_tol: self.abs_tol.or(base.abs_tol),
            node_budget: self.node_budget.or(base.node_budget),
            split: self.split.or(base.split),
            out: self.out.or(base.out),
            format: self.format.or(base.format),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Moments,
    Eval,
    Voronovskaja,
    Bounds,
    Order,
}

impl CommandKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CommandKind::Moments => "moments",
            CommandKind::Eval => "eval",
            CommandKind::Voronovskaja => "voronovskaja",
            CommandKind::Bounds => "bounds",
            CommandKind::Order => "order",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentKind {
    Raw,
    Central,
    MstarRaw,
    MstarCentral,
    ClosedForm,
}

impl MomentKind {
    const ALL: [MomentKind; 5] = [
        MomentKind::Raw,
        MomentKind::Central,
        MomentKind::MstarRaw,
        MomentKind::MstarCentral,
        MomentKind::ClosedForm,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MomentKind::Raw => "raw",
            MomentKind::Central => "central",
            MomentKind::MstarRaw => "mstar-raw",
            MomentKind::MstarCentral => "mstar-central",
            MomentKind::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    M,
    Derivative,
    Mstar,
    Gn,
}

/// Fully resolved and validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub n_values: Vec<u32>,
    pub k_values: Vec<u32>,
    pub r_values: Vec<u32>,
    pub m_values: Vec<u32>,
    pub x_values: Vec<f64>,
    pub functions: Vec<String>,
    pub moment_kinds: Vec<MomentKind>,
    pub operator: OperatorKind,
    pub theorems: Vec<BoundKind>,
    pub exact: bool,
    pub tolerance: f64,
    pub quadrature: QuadratureConfig,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

/// TOML manifest: a `command` plus any [`Options`] field.
#[derive(Debug, Default)]
struct ConfigFile {
    command: Option<CommandKind>,
    options: Options,
}

impl ConfigFile {
    fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        let command = table
            .remove("command")
            .map(|v| v.try_into::<CommandKind>())
            .transpose()
            .map_err(|e| config_err(format!("command: {e}")))?;
        let options = table.try_into::<Options>().map_err(|e| config_err(e.to_string()))?;
        Ok(Self { command, options })
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Parses `5`, `1,2,3`, `0..4` (inclusive) and `25:400` (doubling) terms.
pub fn parse_u32_list(spec: &str) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for term in spec.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let num = |s: &str| {
            s.trim()
                .parse::<u32>()
                .map_err(|_| config_err(format!("`{s}` is not a non-negative integer")))
        };
        if let Some((a, b)) = term.split_once("..") {
            let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
            if b < a {
                return Err(config_err(format!("empty range `{term}`")));
            }
            out.extend(a..=b);
        } else if let Some((a, b)) = term.split_once(':') {
            out.extend(crate::verify::doubling_ladder(num(a)?, num(b)?)
                .map_err(|e| config_err(e.to_string()))?);
        } else {
            out.push(num(term)?);
        }
    }
    if out.is_empty() {
        return Err(config_err(format!("empty list `{spec}`")));
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

pub fn parse_f64_list(spec: &str) -> Result<Vec<f64>> {
    let mut out = spec
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| config_err(format!("`{t}` is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if out.is_empty() {
        return Err(config_err(format!("empty list `{spec}`")));
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    Ok(out)
}

fn parse_names(spec: &str) -> Vec<String> {
    let mut names: Vec<String> = spec
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect();
    names.sort();
    names.dedup();
    names
}

impl ExperimentConfig {
    /// Resolves options against command-specific defaults and validates
    /// every parameter constraint before any computation runs.
    pub fn resolve(command: CommandKind, o: Options) -> Result<Self> {
        let default_n = match command {
            CommandKind::Voronovskaja => "25:400",
            CommandKind::Order => "20:320",
            CommandKind::Bounds => "10,20,50,100,200",
            _ => "10",
        };
        let default_m = match command {
            CommandKind::Order => "2",
            _ => "0..4",
        };
        let n_values = parse_u32_list(o.n.as_deref().unwrap_or(default_n))?;
        let k_values = parse_u32_list(o.k.as_deref().unwrap_or("1"))?;
        let r_values = parse_u32_list(o.r.as_deref().unwrap_or("0"))?;
        let m_values = parse_u32_list(o.m.as_deref().unwrap_or(default_m))?;
        let x_values = parse_f64_list(o.x.as_deref().unwrap_or("1"))?;
        let functions = parse_names(o.f.as_deref().unwrap_or(match command {
            CommandKind::Eval => "one",
            _ => "exp-neg",
        }));

        let moment_kinds = match o.kind.as_deref().unwrap_or("raw") {
            "all" => MomentKind::ALL.to_vec(),
            spec => parse_names(spec)
                .iter()
                .map(|s| {
                    MomentKind::ALL
                        .iter()
                        .copied()
                        .find(|k| k.as_str() == s)
                        .ok_or_else(|| config_err(format!("unknown moment kind `{s}`")))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let operator = match o.operator.as_deref().unwrap_or("m") {
            "m" => OperatorKind::M,
            "derivative" => OperatorKind::Derivative,
            "mstar" => OperatorKind::Mstar,
            "gn" => OperatorKind::Gn,
            other => return Err(config_err(format!("unknown operator `{other}`"))),
        };
        let theorems = match o.theorem.as_deref().unwrap_or("both") {
            "both" => vec![BoundKind::FirstModulus, BoundKind::SecondModulus],
            "omega1" => vec![BoundKind::FirstModulus],
            "omega2" => vec![BoundKind::SecondModulus],
            other => return Err(config_err(format!("unknown theorem selector `{other}`"))),
        };

        let defaults = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            node_budget: o.node_budget.unwrap_or(defaults.node_budget),
            rel_tolerance: o.rel_tol.unwrap_or(defaults.rel_tolerance),
            abs_tolerance: o.abs_tol.unwrap_or(defaults.abs_tolerance),
            split_policy: match o.split.as_deref() {
                Some(s) => s.parse::<SplitPolicy>()?,
                None => defaults.split_policy,
            },
        };
        quadrature.validate()?;

        let config = ExperimentConfig {
            command,
            n_values,
            k_values,
            r_values,
            m_values,
            x_values,
            functions,
            moment_kinds,
            operator,
            theorems,
            exact: o.exact.unwrap_or(false),
            tolerance: o.tolerance.unwrap_or(VoronovskajaOptions::default().tolerance),
            quadrature,
            output: o.out,
            format: o.format.unwrap_or_default(),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if let Some(bad) = self.x_values.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::Domain(format!("x values must be positive, got {bad}")));
        }
        if self.command != CommandKind::Moments {
            for id in &self.functions {
                builtin::builtin(id)?;
            }
        }
        let uses_r = !matches!(self.command, CommandKind::Moments)
            || self
                .moment_kinds
                .iter()
                .any(|k| !matches!(k, MomentKind::Raw | MomentKind::Central));
        for &n in &self.n_values {
            for &k in &self.k_values {
                if self.command == CommandKind::Eval && self.operator == OperatorKind::Gn {
                    continue;
                }
                for &r in &self.r_values {
                    OperatorParams::new(n, k, if uses_r { r } else { 0 })?;
                }
            }
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(config_err("tolerance must be positive"));
        }
        Ok(())
    }
}

/// Builds the resolved configuration from parsed command-line arguments.
pub fn config_from_cli(cli: Cli) -> Result<ExperimentConfig> {
    let file = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            ConfigFile::parse(&text)
                .map_err(|e| config_err(format!("{}: {e}", path.display())))?
        }
        None => ConfigFile::default(),
    };
    let (command, flags) = match cli.command {
        Some(CommandArgs::Moments(o)) => (CommandKind::Moments, o),
        Some(CommandArgs::Eval(o)) => (CommandKind::Eval, o),
        Some(CommandArgs::Voronovskaja(o)) => (CommandKind::Voronovskaja, o),
        Some(CommandArgs::Bounds(o)) => (CommandKind::Bounds, o),
        Some(CommandArgs::Order(o)) => (CommandKind::Order, o),
        None => (
            file.command
                .ok_or_else(|| config_err("no subcommand given and the config file names none"))?,
            Options::default(),
        ),
    };
    ExperimentConfig::resolve(command, flags.overlay(file.options))
}

/// A flat result table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Human-readable summary lines (not part of the CSV).
    pub summary: Vec<String>,
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Self {
            header,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_human(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = String::new();
        out.push_str(&line(self.header.clone()));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
            out.push('\n');
        }
        for s in &self.summary {
            out.push_str(s);
            out.push('\n');
        }
        out
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let idx = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[idx].as_str()).collect())
    }
}

/// Fixed 17-significant-digit rendering used for every float column.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub table: Table,
    pub bound_violations: usize,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.bound_violations > 0 {
            EXIT_BOUND_VIOLATION
        } else {
            0
        }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Constraint(_)
        | Error::MomentUndefined { .. }
        | Error::Domain(_)
        | Error::GrowthViolation { .. }
        | Error::MissingDerivative { .. }
        | Error::MissingModulus { .. }
        | Error::LadderShape(_) => EXIT_CONSTRAINT,
        Error::NonConvergence { .. } => EXIT_NUMERIC,
        Error::Io(_) => 1,
    }
}

/// Runs the configured experiment and returns its table.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    match config.command {
        CommandKind::Moments => run_moments(config),
        CommandKind::Eval => run_eval(config),
        CommandKind::Voronovskaja => run_voronovskaja(config),
        CommandKind::Bounds => run_bounds(config),
        CommandKind::Order => run_order(config),
    }
}

fn no_violations(table: Table) -> RunOutcome {
    RunOutcome {
        table,
        bound_violations: 0,
    }
}

fn run_moments(c: &ExperimentConfig) -> Result<RunOutcome> {
    let mut table = Table::new(vec!["n", "k", "r", "m", "kind", "coefficient"]);
    let plain_only = c
        .moment_kinds
        .iter()
        .all(|k| matches!(k, MomentKind::Raw | MomentKind::Central));
    let rs: &[u32] = if plain_only { &[0] } else { &c.r_values };
    for &n in &c.n_values {
        for &k in &c.k_values {
            for &r in rs {
                let p = OperatorParams::new(n, k, r)?;
                for &m in &c.m_values {
                    for kind in &c.moment_kinds {
                        let value = match kind {
                            MomentKind::Raw => raw_moment(&p, m)?,
                            MomentKind::Central => central_moment(&p, m)?,
                            MomentKind::MstarRaw => mstar_raw_moment(&p, m)?,
                            MomentKind::MstarCentral => mstar_central_moment(&p, m)?,
                            MomentKind::ClosedForm => closed_form_mstar_central(&p, m)?,
                        };
                        table.rows.push(vec![
                            n.to_string(),
                            k.to_string(),
                            r.to_string(),
                            m.to_string(),
                            kind.as_str().to_string(),
                            value.to_string(),
                        ]);
                    }
                }
            }
        }
    }
    if c.moment_kinds.contains(&MomentKind::ClosedForm) {
        let mut mismatches = 0;
        let mut compared = 0;
        for &n in &c.n_values {
            for &k in &c.k_values {
                for &r in rs {
                    let p = OperatorParams::new(n, k, r)?;
                    for &m in c.m_values.iter().filter(|m| **m <= 4) {
                        compared += 1;
                        if closed_form_mstar_central(&p, m)? != mstar_central_moment(&p, m)? {
                            mismatches += 1;
                        }
                    }
                }
            }
        }
        table.summary.push(format!(
            "closed form vs binomial-sum oracle: {} of {compared} agree",
            compared - mismatches
        ));
    }
    Ok(no_violations(table))
}

fn run_eval(c: &ExperimentConfig) -> Result<RunOutcome> {
    let mut table = Table::new(vec!["operator", "n", "k", "r", "x", "f", "value"]);
    let op_name = match c.operator {
        OperatorKind::M => "m",
        OperatorKind::Derivative => "derivative",
        OperatorKind::Mstar => "mstar",
        OperatorKind::Gn => "gn",
    };
    for &n in &c.n_values {
        let (ks, rs): (&[u32], &[u32]) = match c.operator {
            OperatorKind::Gn => (&[0], &[0]),
            OperatorKind::M => (&c.k_values, &[0]),
            _ => (&c.k_values, &c.r_values),
        };
        for &k in ks {
            for &r in rs {
                for &x in &c.x_values {
                    for id in &c.functions {
                        let f = builtin::builtin(id)?;
                        let value = match c.operator {
                            OperatorKind::Gn => apply_gn(n, &f, x, &c.quadrature)?,
                            OperatorKind::M => apply(&OperatorParams::new(n, k, 0)?, &f, x, &c.quadrature)?,
                            OperatorKind::Derivative => {
                                apply_derivative(&OperatorParams::new(n, k, r)?, &f, x, &c.quadrature)?
                            }
                            OperatorKind::Mstar => {
                                apply_mstar(&OperatorParams::new(n, k, r)?, &f, x, &c.quadrature)?
                            }
                        };
                        table.rows.push(vec![
                            op_name.to_string(),
                            n.to_string(),
                            k.to_string(),
                            r.to_string(),
                            fmt_f64(x),
                            id.clone(),
                            fmt_f64(value),
                        ]);
                    }
                }
            }
        }
    }
    Ok(no_violations(table))
}

fn run_voronovskaja(c: &ExperimentConfig) -> Result<RunOutcome> {
    let mut table = Table::new(vec!["n", "k", "r", "x", "f", "E_n", "target", "extrapolated"]);
    let ladder = &c.n_values;
    let doubling = ladder.len() >= 2 && ladder.windows(2).all(|w| w[1] == 2 * w[0]);
    let options = VoronovskajaOptions {
        extrapolate: doubling,
        tolerance: c.tolerance,
    };
    for &k in &c.k_values {
        for &r in &c.r_values {
            for &x in &c.x_values {
                for id in &c.functions {
                    let f = builtin::builtin(id)?;
                    let (scaled, target, rungs, extrapolated) = if c.exact {
                        let ex = voronovskaja_sequence_exact(&f, x, k, r, ladder, doubling)?;
                        let scaled = ex.scaled_f64();
                        let mut rungs = vec![None];
                        for i in 1..scaled.len() {
                            rungs.push(doubling.then(|| {
                                let two = num_rational::BigRational::from_integer(2.into());
                                ratio_to_f64(
                                    &(two * &ex.scaled_deviations[i] - &ex.scaled_deviations[i - 1]),
                                )
                            }));
                        }
                        let extrapolated = ex.extrapolated.as_ref().map(ratio_to_f64);
                        (scaled, ratio_to_f64(&ex.target), rungs, extrapolated)
                    } else {
                        let rep = voronovskaja_sequence(&f, x, k, r, ladder, &c.quadrature, &options)?;
                        let rungs = rep.rung_extrapolations();
                        (rep.scaled_deviations, rep.target, rungs, rep.extrapolated)
                    };
                    for (i, &n) in ladder.iter().enumerate() {
                        table.rows.push(vec![
                            n.to_string(),
                            k.to_string(),
                            r.to_string(),
                            fmt_f64(x),
                            id.clone(),
                            fmt_f64(scaled[i]),
                            fmt_f64(target),
                            fmt_opt(rungs[i]),
                        ]);
                    }
                    let converged = extrapolated.is_some_and(|e| (e - target).abs() <= c.tolerance);
                    table.summary.push(format!(
                        "{id} k={k} r={r} x={x}: target {target:.6}, extrapolated {}, converged {converged}",
                        extrapolated.map(|e| format!("{e:.6}")).unwrap_or_else(|| "-".into())
                    ));
                }
            }
        }
    }
    Ok(no_violations(table))
}

fn run_bounds(c: &ExperimentConfig) -> Result<RunOutcome> {
    let mut table = Table::new(vec![
        "theorem", "n", "k", "r", "x", "f", "lhs", "rhs", "slack", "holds", "empirical_C",
    ]);
    let mut reports: Vec<BoundReport> = Vec::new();
    for &theorem in &c.theorems {
        for &n in &c.n_values {
            for &k in &c.k_values {
                for &r in &c.r_values {
                    for &x in &c.x_values {
                        for id in &c.functions {
                            let f = builtin::builtin(id)?;
                            let rep = match theorem {
                                BoundKind::FirstModulus => {
                                    check_first_modulus_bound(&f, x, n, k, r, &c.quadrature)?
                                }
                                BoundKind::SecondModulus => {
                                    check_second_modulus_bound(&f, x, n, k, r, &c.quadrature)?
                                }
                            };
                            reports.push(rep);
                        }
                    }
                }
            }
        }
    }
    let mut violations = 0;
    for rep in &reports {
        if rep.theorem == BoundKind::FirstModulus && !rep.holds {
            violations += 1;
        }
        table.rows.push(vec![
            rep.theorem.as_str().to_string(),
            rep.n.to_string(),
            rep.k.to_string(),
            rep.r.to_string(),
            fmt_f64(rep.x),
            rep.function.clone(),
            fmt_f64(rep.lhs),
            fmt_f64(rep.rhs),
            fmt_f64(rep.slack),
            rep.holds.to_string(),
            fmt_opt(rep.empirical_c),
        ]);
    }
    let mut c_by_n: BTreeMap<u32, f64> = BTreeMap::new();
    for rep in reports.iter().filter(|r| r.theorem == BoundKind::SecondModulus) {
        if let Some(v) = rep.empirical_c {
            let e = c_by_n.entry(rep.n).or_insert(0.0);
            *e = e.max(v);
        }
    }
    table.summary.push(format!(
        "omega1 bound violations: {violations} of {}",
        reports.iter().filter(|r| r.theorem == BoundKind::FirstModulus).count()
    ));
    for (n, v) in &c_by_n {
        table.summary.push(format!(
            "n={n}: max empirical C = {v:.6} (reference C = {REFERENCE_C})"
        ));
    }
    Ok(RunOutcome {
        table,
        bound_violations: violations,
    })
}

fn run_order(c: &ExperimentConfig) -> Result<RunOutcome> {
    let mut table = Table::new(vec!["m", "k", "r", "n", "coefficient", "scaled", "ratio", "pass"]);
    for &m in &c.m_values {
        for &k in &c.k_values {
            for &r in &c.r_values {
                let rep = check_order_lemma(m, k, r, &c.n_values)?;
                for row in &rep.rows {
                    table.rows.push(vec![
                        m.to_string(),
                        k.to_string(),
                        r.to_string(),
                        row.n.to_string(),
                        row.coefficient.to_string(),
                        fmt_f64(row.scaled),
                        fmt_opt(row.ratio),
                        rep.pass.to_string(),
                    ]);
                }
                table.summary.push(format!(
                    "m={m} k={k} r={r}: {}{}",
                    if rep.pass { "pass" } else { "FAIL" },
                    if rep.degenerate { " (all coefficients zero)" } else { "" }
                ));
            }
        }
    }
    Ok(no_violations(table))
}

/// Where the table goes: an explicit `--out`, else the directory named by
/// [`OUTPUT_DIR_ENV`], else standard output.
pub fn output_path(config: &ExperimentConfig) -> Option<PathBuf> {
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    match (&config.output, env_dir) {
        (Some(p), Some(dir)) if p.is_relative() => Some(dir.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            let ext = match config.format {
                OutputFormat::Csv => "csv",
                OutputFormat::Human => "txt",
            };
            Some(dir.join(format!("{}.{ext}", config.command.as_str())))
        }
        (None, None) => None,
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    generated_unix_seconds: u64,
    rows: usize,
    config: &'a ExperimentConfig,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// Renders the table and writes it (plus a metadata sidecar when writing to
/// a file). Returns the path written, if any.
pub fn emit(config: &ExperimentConfig, outcome: &RunOutcome) -> Result<Option<PathBuf>> {
    let body = match config.format {
        OutputFormat::Csv => outcome.table.to_csv()?,
        OutputFormat::Human => outcome.table.to_human(),
    };
    match output_path(config) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, body)?;
            let meta = Sidecar {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                generated_unix_seconds: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                rows: outcome.table.rows.len(),
                config,
            };
            let json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Io(e.to_string()))?;
            fs::write(sidecar_path(&path), json)?;
            Ok(Some(path))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(body.as_bytes())?;
            if config.format == OutputFormat::Csv {
                for line in &outcome.table.summary {
                    eprintln!("{line}");
                }
            }
            Ok(None)
        }
    }
}

/// Entry point used by the binary; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let result = config_from_cli(cli).and_then(|config| {
        let outcome = run(&config)?;
        emit(&config, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_parsing() {
        assert_eq!(parse_u32_list("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_u32_list("25:400").unwrap(), vec![25, 50, 100, 200, 400]);
        assert_eq!(parse_u32_list("5, 3,5").unwrap(), vec![3, 5]);
        assert!(parse_u32_list("a").is_err());
        assert!(parse_u32_list("4..1").is_err());
        assert!(parse_u32_list("25:300").is_err());
        assert_eq!(parse_f64_list("2,0.5").unwrap(), vec![0.5, 2.0]);
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse(
            r#"
            command = "moments"
            n = "7"
            k = "2"
            "#,
        )
        .unwrap();
        assert_eq!(file.command, Some(CommandKind::Moments));
        let flags = Options {
            n: Some("9".into()),
            ..Options::default()
        };
        let merged = flags.overlay(file.options);
        let cfg = ExperimentConfig::resolve(CommandKind::Moments, merged).unwrap();
        assert_eq!(cfg.n_values, vec![9]);
        assert_eq!(cfg.k_values, vec![2]);
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("command = \"nope\"").is_err());
    }

    #[test]
    fn constraint_errors_surface_before_running() {
        let o = Options {
            n: Some("3".into()),
            k: Some("4".into()),
            ..Options::default()
        };
        let err = ExperimentConfig::resolve(CommandKind::Moments, o).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_CONSTRAINT);
        let o = Options {
            f: Some("nope".into()),
            ..Options::default()
        };
        let err = ExperimentConfig::resolve(CommandKind::Eval, o).unwrap_err();
        assert_eq!(exit_code_for(&err), EXIT_CONFIG);
    }

    #[test]
    fn float_format_has_17_significant_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(2.0), "2.0000000000000000e0");
    }
}
