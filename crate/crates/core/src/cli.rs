//! Command-line front end. [`run`] parses arguments, dispatches and returns
//! the process exit code: 0 on success, 1 on domain or input errors, 2 on
//! usage errors.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    optimal_category_i_settings, optimize_category_i, robustness_sweep, scan_symmetric_ii,
    symmetric_category_ii_settings, threshold_visibility, DEFAULT_SCAN_STEP,
};
use crate::bounds::{
    min_abs_projection_angle_form, min_abs_projection_closed_form, pairwise_angles, Category,
    Settings, SettingsCategoryI, SettingsCategoryII,
};
use crate::error::Error;
use crate::geometry::UnitVec3;
use crate::hvchecks::{
    check_pointwise_identity, check_subensemble_inequality, check_triangle_step, OutcomeTable,
};
use crate::oracle::{
    random_independent_triple, sphere_min_bruteforce, vertex_minimum_check, DEFAULT_COARSE_STEP,
};
use crate::quantum::CorrelationModel;
use crate::settings_file::SettingsFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the default `--format`.
pub const FORMAT_ENV: &str = "LNR_FORMAT";

/// Largest pairwise angle of three equiangular unit vectors, 2π/3.
const CONE_LIMIT: f64 = 2.0 * std::f64::consts::FRAC_PI_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "lnr",
    version,
    about = "Alignment-free Leggett-type nonlocal realist inequality bounds"
)]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, env = FORMAT_ENV, default_value = "human")]
    pub format: Format,

    /// Read and write angles in radians instead of degrees
    #[arg(long, global = true)]
    pub radians: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the nonlocal-realist bound for a setting bundle
    Bound(SettingsCmd),
    /// Compare the singlet prediction with the bound; `ratio` is bound / lhs
    Violation(SettingsCmd),
    /// Scan the symmetric category II family over the cone angle
    Scan(ScanCmd),
    /// Find the category I settings with maximal violation
    Optimize(OptimizeCmd),
    /// Check the closed-form minimum against a brute-force sphere search
    Oracle(OracleCmd),
    /// Check the outcome-table inequalities on a CSV table (weight,A,B,B2)
    Hvcheck(HvcheckCmd),
    /// Supremum of bounds and infimum of the quantum side under imprecision
    Robustness(RobustnessCmd),
    /// Recompute every headline number and compare with the reference values
    Reproduce(ReproduceCmd),
}

#[derive(Debug, Args, Default)]
pub struct SettingsSource {
    /// JSON settings file
    #[arg(long, value_name = "PATH")]
    pub settings_file: Option<PathBuf>,
    /// Symmetric category II settings with this pairwise cone angle
    #[arg(long, value_name = "ANGLE", conflicts_with_all = ["settings_file", "optimal_beta", "category"])]
    pub symmetric: Option<f64>,
    /// Canonical category I settings with orthogonal n_i and this pair angle
    #[arg(long, value_name = "ANGLE", conflicts_with_all = ["settings_file", "category"])]
    pub optimal_beta: Option<f64>,
    /// Category of inline settings
    #[arg(long, value_enum, requires_all = ["a", "b"], conflicts_with = "settings_file")]
    pub category: Option<CategoryArg>,
    /// Alice's directions, "x,y,z;x,y,z;x,y,z"
    #[arg(long, requires = "category")]
    pub a: Option<String>,
    /// Bob's directions, "x,y,z;x,y,z;x,y,z"
    #[arg(long, requires = "category")]
    pub b: Option<String>,
    /// Bob's second directions (category I)
    #[arg(long, requires = "category")]
    pub b2: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CategoryArg {
    #[value(name = "I")]
    I,
    #[value(name = "II")]
    II,
}

#[derive(Debug, Args)]
pub struct SettingsCmd {
    #[command(flatten)]
    pub source: SettingsSource,
    /// Singlet visibility
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Write the resolved settings as JSON
    #[arg(long, value_name = "PATH")]
    pub emit_settings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanCmd {
    #[arg(long, default_value_t = 90.0)]
    pub from: f64,
    /// Upper end; values at the 120° limit are pulled just inside it
    #[arg(long, default_value_t = 120.0)]
    pub to: f64,
    /// Grid step (default 0.25°)
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
}

#[derive(Debug, Args)]
pub struct OptimizeCmd {
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    #[arg(long, value_name = "PATH")]
    pub emit_settings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleCmd {
    /// First vector "x,y,z"
    #[arg(long, requires_all = ["e2", "e3"], conflicts_with = "random")]
    pub e1: Option<String>,
    #[arg(long)]
    pub e2: Option<String>,
    #[arg(long)]
    pub e3: Option<String>,
    /// Run the agreement suite on this many random triples
    #[arg(long, value_name = "N")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Coarse grid step (default 0.02 rad)
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Args)]
pub struct HvcheckCmd {
    /// CSV table, `-` for stdin; without it the exhaustive identity check runs alone
    #[arg(long, value_name = "PATH")]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RobustnessCmd {
    /// Defaults to the maximal-violation category I settings
    #[command(flatten)]
    pub source: SettingsSource,
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Maximum rotation of each setting vector
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ReproduceCmd {
    #[arg(long, default_value_t = 1.0)]
    pub visibility: f64,
    /// Seed of the random oracle triples
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Random triples in the oracle agreement row
    #[arg(long, default_value_t = 100)]
    pub oracle_triples: usize,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

struct Ctx<'a> {
    format: Format,
    radians: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn angle_in(&self, x: f64) -> f64 {
        if self.radians {
            x
        } else {
            x.to_radians()
        }
    }

    fn angle_out(&self, x: f64) -> f64 {
        if self.radians {
            x
        } else {
            x.to_degrees()
        }
    }

    fn unit(&self) -> &'static str {
        if self.radians {
            "rad"
        } else {
            "deg"
        }
    }

    fn json<T: Serialize>(&mut self, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        writeln!(self.out, "{text}")?;
        Ok(())
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let mut ctx = Ctx {
        format: cli.format,
        radians: cli.radians,
        out,
        err,
    };
    match dispatch(cli.command, &mut ctx) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(ctx.err, "error: {e}");
            match e {
                CliError::Usage(_) => EXIT_USAGE,
                _ => EXIT_DOMAIN,
            }
        }
    }
}

fn dispatch(command: Command, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    match command {
        Command::Bound(c) | Command::Violation(c) => cmd_evaluate(c, ctx),
        Command::Scan(c) => cmd_scan(c, ctx),
        Command::Optimize(c) => cmd_optimize(c, ctx),
        Command::Oracle(c) => cmd_oracle(c, ctx),
        Command::Hvcheck(c) => cmd_hvcheck(c, ctx),
        Command::Robustness(c) => cmd_robustness(c, ctx),
        Command::Reproduce(c) => cmd_reproduce(c, ctx),
    }
}

fn parse_vector(text: &str) -> CliResult<UnitVec3> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(CliError::Input(format!("`{text}` is not a 3-vector x,y,z")));
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .map_err(|_| CliError::Input(format!("`{p}` is not a number")))?;
    }
    Ok(UnitVec3::from_array(v)?)
}

fn parse_triple(text: &str) -> CliResult<[UnitVec3; 3]> {
    let vs = text
        .split(';')
        .map(parse_vector)
        .collect::<CliResult<Vec<_>>>()?;
    vs.try_into()
        .map_err(|v: Vec<_>| CliError::Input(format!("expected 3 vectors, got {}", v.len())))
}

fn resolve_settings(src: &SettingsSource, ctx: &mut Ctx<'_>) -> CliResult<Option<Settings>> {
    if let Some(path) = &src.settings_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let (settings, warnings) = SettingsFile::from_json(&text)?.to_settings()?;
        for w in warnings {
            writeln!(ctx.err, "warning: {w}")?;
        }
        return Ok(Some(settings));
    }
    if let Some(delta) = src.symmetric {
        return Ok(Some(Settings::II(symmetric_category_ii_settings(
            ctx.angle_in(delta),
        )?)));
    }
    if let Some(beta) = src.optimal_beta {
        return Ok(Some(Settings::I(optimal_category_i_settings(
            ctx.angle_in(beta),
        ))));
    }
    if let Some(cat) = src.category {
        let a = parse_triple(src.a.as_deref().unwrap_or_default())?;
        let b = parse_triple(src.b.as_deref().unwrap_or_default())?;
        let settings = match (cat, &src.b2) {
            (CategoryArg::I, Some(b2)) => Settings::I(SettingsCategoryI {
                a,
                b,
                b2: parse_triple(b2)?,
            }),
            (CategoryArg::I, None) => {
                return Err(CliError::Usage("category I requires --b2".into()));
            }
            (CategoryArg::II, None) => Settings::II(SettingsCategoryII { a, b }),
            (CategoryArg::II, Some(_)) => {
                return Err(CliError::Usage("category II takes no --b2".into()));
            }
        };
        return Ok(Some(settings));
    }
    Ok(None)
}

fn emit_settings(path: &Option<PathBuf>, settings: &Settings) -> CliResult<()> {
    if let Some(path) = path {
        std::fs::write(path, SettingsFile::from_settings(settings).to_json() + "\n")?;
    }
    Ok(())
}

/// Row shared by `bound` and `violation`.
#[derive(Debug, Serialize)]
struct EvaluationRow {
    category: Category,
    visibility: f64,
    #[serde(rename = "L")]
    l: f64,
    extremal_angle_deg: f64,
    bound: f64,
    lhs: f64,
    #[serde(rename = "S")]
    s: f64,
    ratio: Option<f64>,
    degenerate: bool,
}

pub const EVALUATION_CSV_HEADER: &str = "category,visibility,L,extremal_angle_deg,bound,lhs,S,ratio,degenerate";
pub const SCAN_CSV_HEADER: &str = "delta,lhs,bound,S";

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_evaluate(c: SettingsCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let settings = resolve_settings(&c.source, ctx)?.ok_or_else(|| {
        CliError::Usage(
            "no settings given: use --settings-file, --symmetric, --optimal-beta or --category".into(),
        )
    })?;
    emit_settings(&c.emit_settings, &settings)?;
    let model = CorrelationModel::new(c.visibility)?;
    let r = model.evaluate_violation(&settings)?;
    let row = EvaluationRow {
        category: settings.category(),
        visibility: c.visibility,
        l: r.l,
        extremal_angle_deg: r.extremal_angle.to_degrees(),
        bound: r.bound,
        lhs: r.lhs,
        s: r.s,
        ratio: r.ratio,
        degenerate: r.degenerate,
    };
    match ctx.format {
        Format::Json => ctx.json(&row)?,
        Format::Csv => {
            writeln!(ctx.out, "{EVALUATION_CSV_HEADER}")?;
            writeln!(
                ctx.out,
                "{},{},{},{},{},{},{},{},{}",
                row.category,
                row.visibility,
                row.l,
                row.extremal_angle_deg,
                row.bound,
                row.lhs,
                row.s,
                opt(row.ratio),
                row.degenerate
            )?;
        }
        Format::Human => {
            let angle_name = match settings.category() {
                Category::I => "beta*",
                Category::II => "delta*",
            };
            writeln!(ctx.out, "category     {}", row.category)?;
            writeln!(ctx.out, "L            {:.10}", row.l)?;
            writeln!(
                ctx.out,
                "{angle_name:<12} {:.6} {}",
                ctx.angle_out(r.extremal_angle),
                ctx.unit()
            )?;
            writeln!(ctx.out, "bound        {:.10}", row.bound)?;
            writeln!(ctx.out, "lhs (V={})  {:.10}", row.visibility, row.lhs)?;
            writeln!(ctx.out, "S            {:.10}", row.s)?;
            match row.ratio {
                Some(x) => writeln!(ctx.out, "bound/lhs    {x:.10}")?,
                None => writeln!(ctx.out, "bound/lhs    undefined (lhs = 0)")?,
            }
            if row.degenerate {
                writeln!(ctx.out, "degenerate: derived directions are linearly dependent, bound is trivial")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_scan(c: ScanCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let model = CorrelationModel::new(c.visibility)?;
    let step = c.step.map(|s| ctx.angle_in(s)).unwrap_or(DEFAULT_SCAN_STEP);
    let mut to = ctx.angle_in(c.to);
    if (to - CONE_LIMIT).abs() <= 1e-9 {
        to = CONE_LIMIT - 1e-9;
    }
    let r = scan_symmetric_ii(&model, ctx.angle_in(c.from), to, step)?;
    match ctx.format {
        Format::Csv => {
            writeln!(ctx.out, "{SCAN_CSV_HEADER}")?;
            for row in &r.rows {
                writeln!(ctx.out, "{},{},{},{}", ctx.angle_out(row.delta), row.lhs, row.bound, row.s)?;
            }
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                unit: &'static str,
                rows: Vec<[f64; 4]>,
                violation_window: Option<[f64; 2]>,
                argmax_delta: f64,
                max_s: f64,
                argmax_ratio: f64,
            }
            let out = Out {
                unit: ctx.unit(),
                rows: r
                    .rows
                    .iter()
                    .map(|x| [ctx.angle_out(x.delta), x.lhs, x.bound, x.s])
                    .collect(),
                violation_window: r
                    .violation_window
                    .map(|(lo, hi)| [ctx.angle_out(lo), ctx.angle_out(hi)]),
                argmax_delta: ctx.angle_out(r.argmax_delta),
                max_s: r.max_s,
                argmax_ratio: r.argmax_ratio,
            };
            ctx.json(&out)?;
        }
        Format::Human => {
            let u = ctx.unit();
            writeln!(ctx.out, "{:>12} {:>12} {:>12} {:>12}", format!("delta/{u}"), "lhs", "bound", "S")?;
            for row in &r.rows {
                writeln!(
                    ctx.out,
                    "{:>12.4} {:>12.6} {:>12.6} {:>12.6}",
                    ctx.angle_out(row.delta),
                    row.lhs,
                    row.bound,
                    row.s
                )?;
            }
            match r.violation_window {
                Some((lo, hi)) => writeln!(
                    ctx.out,
                    "violation window [{:.4}, {:.4}] {u}",
                    ctx.angle_out(lo),
                    ctx.angle_out(hi)
                )?,
                None => writeln!(ctx.out, "no violation in range")?,
            }
            writeln!(
                ctx.out,
                "max S {:.6} at delta = {:.4} {u}, bound/lhs = {:.6}",
                r.max_s,
                ctx.angle_out(r.argmax_delta),
                r.argmax_ratio
            )?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_optimize(c: OptimizeCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let model = CorrelationModel::new(c.visibility)?;
    let opt = optimize_category_i(&model)?;
    let settings = Settings::I(opt.settings);
    emit_settings(&c.emit_settings, &settings)?;
    let threshold = threshold_visibility(&settings)?;
    match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                beta_deg: f64,
                threshold_visibility: f64,
                #[serde(flatten)]
                opt: &'a crate::analysis::CategoryIOptimum,
                settings: SettingsFile,
            }
            ctx.json(&Out {
                beta_deg: opt.beta.to_degrees(),
                threshold_visibility: threshold,
                opt: &opt,
                settings: SettingsFile::from_settings(&settings),
            })?;
        }
        Format::Csv => {
            writeln!(ctx.out, "beta_deg,lhs,bound,S,threshold_visibility,perturbation_gain")?;
            writeln!(
                ctx.out,
                "{},{},{},{},{},{}",
                opt.beta.to_degrees(),
                opt.report.lhs,
                opt.report.bound,
                opt.report.s,
                threshold,
                opt.perturbation_gain
            )?;
        }
        Format::Human => {
            writeln!(ctx.out, "beta*        {:.6} {}", ctx.angle_out(opt.beta), ctx.unit())?;
            writeln!(ctx.out, "lhs          {:.10}", opt.report.lhs)?;
            writeln!(ctx.out, "bound        {:.10}", opt.report.bound)?;
            writeln!(ctx.out, "S_max        {:.10}", opt.report.s)?;
            writeln!(ctx.out, "threshold V  {:.10}", threshold)?;
            writeln!(
                ctx.out,
                "local check  max gain {:.3e} ({})",
                opt.perturbation_gain,
                if opt.locally_optimal { "optimal" } else { "NOT optimal" }
            )?;
            let s = opt.settings;
            for i in 0..3 {
                writeln!(ctx.out, "a{}  = {}", i + 1, s.a[i])?;
                writeln!(ctx.out, "b{}  = {}", i + 1, s.b[i])?;
                writeln!(ctx.out, "b{}' = {}", i + 1, s.b2[i])?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct OracleSuite {
    triples: usize,
    seed: u64,
    max_abs_diff: f64,
    all_vertex_agree: bool,
    vertex_closed_form_max_diff: f64,
}

/// Oracle agreement over `n` random triples with `|triple product| > 0.05`.
fn oracle_suite(n: usize, seed: u64, step: f64) -> CliResult<OracleSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let triples: Vec<[UnitVec3; 3]> = (0..n).map(|_| random_independent_triple(&mut rng, 0.05)).collect();
    let results = triples
        .par_iter()
        .map(|[a, b, c]| -> crate::error::Result<(f64, bool, f64)> {
            let closed = min_abs_projection_closed_form(a, b, c);
            let brute = sphere_min_bruteforce(a, b, c, step)?;
            let vertex = vertex_minimum_check(a, b, c)?;
            Ok((
                (brute.l_est - closed).abs(),
                vertex.agrees,
                (vertex.vertex_min - closed).abs(),
            ))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    Ok(OracleSuite {
        triples: n,
        seed,
        max_abs_diff: results.iter().map(|r| r.0).fold(0.0, f64::max),
        all_vertex_agree: results.iter().all(|r| r.1),
        vertex_closed_form_max_diff: results.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

fn cmd_oracle(c: OracleCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let step = c.step.map(|s| ctx.angle_in(s)).unwrap_or(DEFAULT_COARSE_STEP);
    if let Some(n) = c.random {
        let suite = oracle_suite(n, c.seed, step)?;
        match ctx.format {
            Format::Json => ctx.json(&suite)?,
            Format::Csv => {
                writeln!(ctx.out, "triples,seed,max_abs_diff,all_vertex_agree,vertex_closed_form_max_diff")?;
                writeln!(
                    ctx.out,
                    "{},{},{},{},{}",
                    suite.triples, suite.seed, suite.max_abs_diff, suite.all_vertex_agree, suite.vertex_closed_form_max_diff
                )?;
            }
            Format::Human => {
                writeln!(ctx.out, "triples                 {}", suite.triples)?;
                writeln!(ctx.out, "max |closed - brute|    {:.3e}", suite.max_abs_diff)?;
                writeln!(ctx.out, "max |closed - vertex|   {:.3e}", suite.vertex_closed_form_max_diff)?;
                writeln!(ctx.out, "vertex checks agree     {}", suite.all_vertex_agree)?;
            }
        }
        return Ok(EXIT_OK);
    }
    let (Some(e1), Some(e2), Some(e3)) = (&c.e1, &c.e2, &c.e3) else {
        return Err(CliError::Usage("give --e1/--e2/--e3 or --random N".into()));
    };
    let [e1, e2, e3] = [parse_vector(e1)?, parse_vector(e2)?, parse_vector(e3)?];
    let closed = min_abs_projection_closed_form(&e1, &e2, &e3);
    let [a12, a23, a31] = pairwise_angles(&e1, &e2, &e3);
    let angle_form = min_abs_projection_angle_form(a12, a23, a31).ok();
    let brute = sphere_min_bruteforce(&e1, &e2, &e3, step)?;
    let vertex = vertex_minimum_check(&e1, &e2, &e3).ok();

    #[derive(Serialize)]
    struct Out {
        #[serde(rename = "L")]
        l: f64,
        angle_form: Option<f64>,
        l_est: f64,
        argmin: UnitVec3,
        resolution: f64,
        vertex_min: Option<f64>,
        agrees: Option<bool>,
    }
    let out = Out {
        l: closed,
        angle_form,
        l_est: brute.l_est,
        argmin: brute.argmin,
        resolution: brute.resolution,
        vertex_min: vertex.as_ref().map(|v| v.vertex_min),
        agrees: vertex.as_ref().map(|v| v.agrees),
    };
    match ctx.format {
        Format::Json => ctx.json(&out)?,
        Format::Csv => {
            writeln!(ctx.out, "L,angle_form,l_est,vertex_min,agrees")?;
            writeln!(
                ctx.out,
                "{},{},{},{},{}",
                out.l,
                opt(out.angle_form),
                out.l_est,
                opt(out.vertex_min),
                out.agrees.map(|b| b.to_string()).unwrap_or_default()
            )?;
        }
        Format::Human => {
            writeln!(ctx.out, "closed form L   {:.12}", out.l)?;
            match out.angle_form {
                Some(x) => writeln!(ctx.out, "angle form L    {x:.12}")?,
                None => writeln!(ctx.out, "angle form L    n/a")?,
            }
            writeln!(ctx.out, "brute force     {:.12} at {}", out.l_est, out.argmin)?;
            match (out.vertex_min, out.agrees) {
                (Some(v), Some(a)) => writeln!(ctx.out, "vertex minimum  {v:.12} (agrees: {a})")?,
                _ => writeln!(ctx.out, "vertex minimum  n/a (linearly dependent)")?,
            }
        }
    }
    Ok(EXIT_OK)
}

fn cmd_hvcheck(c: HvcheckCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let mut identity = Vec::new();
    for a in [1i8, -1] {
        for b in [1i8, -1] {
            identity.push(((a, b), check_pointwise_identity(a, b)?));
        }
    }
    let table = match &c.table {
        None => None,
        Some(p) if p.as_os_str() == "-" => Some(OutcomeTable::from_csv(std::io::stdin().lock())?),
        Some(p) => {
            let f = std::fs::File::open(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            Some(OutcomeTable::from_csv(f)?)
        }
    };
    let sub = table.as_ref().map(check_subensemble_inequality);
    let tri = table.as_ref().map(check_triangle_step);
    let identity_ok = identity.iter().all(|(_, ok)| *ok);
    let all_hold = identity_ok && sub.is_none_or(|r| r.holds) && tri.is_none_or(|r| r.holds);

    match ctx.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                pointwise_identity: bool,
                subensemble: Option<crate::hvchecks::SubensembleReport>,
                triangle: Option<crate::hvchecks::TriangleReport>,
                holds: bool,
            }
            ctx.json(&Out {
                pointwise_identity: identity_ok,
                subensemble: sub,
                triangle: tri,
                holds: all_hold,
            })?;
        }
        Format::Csv => {
            writeln!(ctx.out, "check,lhs_plus,rhs_plus,lhs_minus,rhs_minus,holds")?;
            writeln!(ctx.out, "pointwise_identity,,,,,{identity_ok}")?;
            if let Some(r) = sub {
                writeln!(
                    ctx.out,
                    "subensemble,{},{},{},{},{}",
                    r.lhs_plus, r.rhs_plus, r.lhs_minus, r.rhs_minus, r.holds
                )?;
            }
            if let Some(r) = tri {
                writeln!(
                    ctx.out,
                    "triangle,{},{},{},{},{}",
                    r.lhs_plus, r.rhs_plus, r.lhs_minus, r.rhs_minus, r.holds
                )?;
            }
        }
        Format::Human => {
            for ((a, b), ok) in &identity {
                writeln!(ctx.out, "identity A={a:+} B={b:+}   {}", pass(*ok))?;
            }
            if let Some(r) = sub {
                writeln!(
                    ctx.out,
                    "|A+B| <= 1+<AB>   {:.12} <= {:.12}   |A-B| <= 1-<AB>   {:.12} <= {:.12}   {}",
                    r.lhs_plus, r.rhs_plus, r.lhs_minus, r.rhs_minus, pass(r.holds)
                )?;
            }
            if let Some(r) = tri {
                writeln!(
                    ctx.out,
                    "triangle (+)   {:.12} <= {:.12}   triangle (-)   {:.12} <= {:.12}   {}",
                    r.lhs_plus, r.rhs_plus, r.lhs_minus, r.rhs_minus, pass(r.holds)
                )?;
            }
        }
    }
    Ok(if all_hold { EXIT_OK } else { EXIT_DOMAIN })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_robustness(c: RobustnessCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let settings = match resolve_settings(&c.source, ctx)? {
        Some(s) => s,
        None => Settings::I(optimal_category_i_settings(2.0 * (1.0f64 / 3.0).atan())),
    };
    let model = CorrelationModel::new(c.visibility)?;
    let r = robustness_sweep(&settings, &model, ctx.angle_in(c.epsilon), c.samples, c.seed)?;
    match ctx.format {
        Format::Json => ctx.json(&r)?,
        Format::Csv => {
            writeln!(ctx.out, "epsilon,n_samples,seed,nominal_S,sup_bound,inf_lhs,conclusive_margin")?;
            writeln!(
                ctx.out,
                "{},{},{},{},{},{},{}",
                ctx.angle_out(r.epsilon),
                r.n_samples,
                r.seed,
                r.nominal_s,
                r.sup_bound,
                r.inf_lhs,
                r.conclusive_margin
            )?;
        }
        Format::Human => {
            writeln!(ctx.out, "epsilon            {:.6} {}", ctx.angle_out(r.epsilon), ctx.unit())?;
            writeln!(ctx.out, "samples            {} (seed {})", r.n_samples, r.seed)?;
            writeln!(ctx.out, "nominal S          {:.10}", r.nominal_s)?;
            writeln!(ctx.out, "sup bound          {:.10}", r.sup_bound)?;
            writeln!(ctx.out, "inf lhs            {:.10}", r.inf_lhs)?;
            writeln!(
                ctx.out,
                "conclusive margin  {:.10} ({})",
                r.conclusive_margin,
                if r.conclusive_margin > 0.0 { "conclusive" } else { "inconclusive" }
            )?;
        }
    }
    Ok(EXIT_OK)
}

/// One line of the reproduction table.
#[derive(Debug, Clone, Serialize)]
pub struct ReproRow {
    pub name: &'static str,
    pub computed: Vec<f64>,
    pub expected: Vec<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl ReproRow {
    fn new(name: &'static str, computed: Vec<f64>, expected: Vec<f64>, tolerance: f64) -> Self {
        let pass = computed.len() == expected.len()
            && computed
                .iter()
                .zip(&expected)
                .all(|(c, e)| (c - e).abs() <= tolerance);
        ReproRow {
            name,
            computed,
            expected,
            tolerance,
            pass,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reproduction {
    pub visibility: f64,
    pub seed: u64,
    pub rows: Vec<ReproRow>,
    pub all_pass: bool,
}

/// Recomputes the headline numbers at visibility `v`.
pub fn reproduce(v: f64, seed: u64, oracle_triples: usize) -> crate::error::Result<Reproduction> {
    let model = CorrelationModel::new(v)?;
    let mut rows = Vec::new();

    let (s_max, beta) = match optimize_category_i(&model) {
        Ok(opt) => (vec![opt.report.s], vec![opt.beta.to_degrees()]),
        Err(Error::NoViolationPossible(_)) => (vec![], vec![]),
        Err(e) => return Err(e),
    };
    rows.push(ReproRow::new("category I maximum S", s_max, vec![0.108], 1e-3));
    rows.push(ReproRow::new("category I optimal beta (deg)", beta, vec![36.87], 0.1));

    let optimal = Settings::I(optimal_category_i_settings(2.0 * (1.0f64 / 3.0).atan()));
    rows.push(ReproRow::new(
        "category I threshold visibility",
        vec![threshold_visibility(&optimal)?],
        vec![0.9430],
        5e-4,
    ));

    let scan = scan_symmetric_ii(
        &model,
        90f64.to_radians(),
        CONE_LIMIT - 1e-9,
        DEFAULT_SCAN_STEP,
    )?;
    let window = scan
        .violation_window
        .map(|(lo, hi)| vec![lo.to_degrees(), hi.to_degrees()])
        .unwrap_or_default();
    rows.push(ReproRow::new(
        "category II violation window (deg)",
        window,
        vec![106.8, 116.5],
        0.3,
    ));
    let has_peak = scan.max_s > 0.0;
    rows.push(ReproRow::new(
        "category II maximal violation delta (deg)",
        if has_peak { vec![scan.argmax_delta.to_degrees()] } else { vec![] },
        vec![112.63],
        0.1,
    ));
    let peak = Settings::II(symmetric_category_ii_settings(scan.argmax_delta)?);
    rows.push(ReproRow::new(
        "category II threshold visibility",
        vec![threshold_visibility(&peak)?],
        vec![0.9836],
        5e-4,
    ));

    let suite = oracle_suite(oracle_triples, seed, DEFAULT_COARSE_STEP).map_err(|e| match e {
        CliError::Core(e) => e,
        other => Error::Settings(other.to_string()),
    })?;
    let mut oracle_row = ReproRow::new(
        "oracle vs closed-form L (max abs diff)",
        vec![suite.max_abs_diff],
        vec![0.0],
        5e-3,
    );
    oracle_row.pass &= suite.all_vertex_agree;
    rows.push(oracle_row);

    let identities = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        .into_iter()
        .filter(|&(a, b)| check_pointwise_identity(a, b).unwrap_or(false))
        .count();
    rows.push(ReproRow::new(
        "pointwise outcome identity (patterns holding)",
        vec![identities as f64],
        vec![4.0],
        0.0,
    ));

    let all_pass = rows.iter().all(|r| r.pass);
    Ok(Reproduction {
        visibility: v,
        seed,
        rows,
        all_pass,
    })
}

fn list(xs: &[f64]) -> String {
    match xs {
        [] => "none".to_string(),
        [x] => format!("{x:.6}"),
        _ => {
            let mut s = String::from("[");
            for (i, x) in xs.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                let _ = write!(s, "{x:.4}");
            }
            s.push(']');
            s
        }
    }
}

fn cmd_reproduce(c: ReproduceCmd, ctx: &mut Ctx<'_>) -> CliResult<i32> {
    let r = reproduce(c.visibility, c.seed, c.oracle_triples)?;
    match ctx.format {
        Format::Json => ctx.json(&r)?,
        Format::Csv => {
            writeln!(ctx.out, "name,computed,expected,tolerance,pass")?;
            for row in &r.rows {
                let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
                writeln!(
                    ctx.out,
                    "{},{},{},{},{}",
                    row.name,
                    join(&row.computed),
                    join(&row.expected),
                    row.tolerance,
                    row.pass
                )?;
            }
        }
        Format::Human => {
            writeln!(ctx.out, "visibility {}  seed {}", r.visibility, r.seed)?;
            writeln!(
                ctx.out,
                "{:<46} {:>24} {:>20} {:>9}  result",
                "quantity", "computed", "reference", "tol"
            )?;
            for row in &r.rows {
                writeln!(
                    ctx.out,
                    "{:<46} {:>24} {:>20} {:>9.0e}  {}",
                    row.name,
                    list(&row.computed),
                    list(&row.expected),
                    row.tolerance,
                    pass(row.pass)
                )?;
            }
        }
    }
    Ok(if r.all_pass { EXIT_OK } else { EXIT_DOMAIN })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("lnr").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn parse_vectors() {
        assert_eq!(parse_vector("1, 0, 0").unwrap(), UnitVec3::X);
        assert!(parse_vector("1,0").is_err());
        assert!(parse_vector("a,0,0").is_err());
        assert!(parse_vector("0,0,0").is_err());
        assert_eq!(parse_triple("1,0,0;0,1,0;0,0,1").unwrap()[2], UnitVec3::Z);
        assert!(parse_triple("1,0,0;0,1,0").is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["bound", "--nope"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["bound"]).0, EXIT_USAGE);
    }

    #[test]
    fn domain_errors_exit_one() {
        let (code, _, err) = run_str(&["bound", "--category", "II", "--a", "1,0,0;0,1,0;0,0,1", "--b", "1,0,0;-1,0,0;0,0,1"]);
        assert_eq!(code, EXIT_DOMAIN);
        assert!(err.contains("antipodal"), "{err}");
        assert_eq!(run_str(&["bound", "--symmetric", "130"]).0, EXIT_DOMAIN);
        assert_eq!(run_str(&["bound", "--category", "I", "--a", "0,0,0;0,1,0;0,0,1", "--b", "1,0,0;0,1,0;0,0,1", "--b2", "0,1,0;0,0,1;1,0,0"]).0, EXIT_DOMAIN);
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("reproduce"));
    }
}
