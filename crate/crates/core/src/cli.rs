//! Command-line front end. The `pcgauge` binary forwards to [`run`].
//!
//! Exit codes: `0` success (for `check`: consistent within tolerance), `1`
//! valid but inconsistent (`check` only), `2` invalid input or any error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::consistencize::{
    consistencize_abelian, consistencize_riemannian, epsilon_membership, DescentOptions,
};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::integration::{run_report, Observable};
use crate::io;
use crate::pc_matrix::{Indicator, PcMatrix, DEFAULT_CONSISTENCY_TOL};
use crate::simplicial::{curvature_values, global_ii, holonomy_pc_matrix, SimplicialComplex2};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INCONSISTENT: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pcgauge", version, about = "Group-valued pairwise comparison matrices and gauge holonomy")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a matrix and report consistency and inconsistency indicators.
    Check(CheckArgs),
    /// Replace a matrix by its nearest consistent matrix.
    Consistencize(ConsistencizeArgs),
    /// Build the holonomy PC matrix of an edge field on a complex.
    Holonomy(HolonomyArgs),
    /// Monte Carlo expectation under product Haar measure.
    Montecarlo(MonteCarloArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Abelian,
    Riemannian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IndicatorArg {
    /// `d(1, g⁻¹)`
    Distance,
    /// `1 − exp(−d(1, g⁻¹))`
    Ii3,
}

impl From<IndicatorArg> for Indicator {
    fn from(a: IndicatorArg) -> Self {
        match a {
            IndicatorArg::Distance => Indicator::Distance,
            IndicatorArg::Ii3 => Indicator::Ii3Scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObservableArg {
    #[value(name = "mean_curvature_In")]
    MeanCurvatureIn,
    #[value(name = "sup_curvature_In")]
    SupCurvatureIn,
    #[value(name = "wilson_character")]
    WilsonCharacter,
    #[value(name = "ii3_of_random_matrix")]
    Ii3OfRandomMatrix,
}

#[derive(Debug, Args)]
pub struct MatrixInput {
    /// Matrix file (JSON document, or CSV for rplus).
    pub matrix: PathBuf,
    /// Input format; inferred from the extension or content when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Expected group tag (rplus, u1, su2, zmod:<m>).
    #[arg(long)]
    pub group: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub input: MatrixInput,
    /// Consistency tolerance.
    #[arg(long, default_value_t = DEFAULT_CONSISTENCY_TOL)]
    pub tol: f64,
    /// Acceptance threshold on the ii3-scaled indicator.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub epsilon: f64,
    /// Indicator map used for `ii_In`.
    #[arg(long, value_enum, default_value_t = IndicatorArg::Distance)]
    pub indicator: IndicatorArg,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConsistencizeArgs {
    #[command(flatten)]
    pub input: MatrixInput,
    /// Minimization method; abelian for rplus/u1, riemannian otherwise.
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Write the consistent matrix here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format of the matrix written to `--out`.
    #[arg(long = "out-format", value_enum)]
    pub out_format: Option<Format>,
    #[arg(long, default_value_t = DescentOptions::default().max_iter)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct ComplexSource {
    /// Complex JSON file.
    #[arg(long, conflicts_with_all = ["simplex", "grid"])]
    pub complex: Option<PathBuf>,
    /// Use the full simplex of this dimension.
    #[arg(long, conflicts_with = "grid")]
    pub simplex: Option<usize>,
    /// Use the triangulated m×m grid.
    #[arg(long)]
    pub grid: Option<usize>,
}

impl ComplexSource {
    fn given(&self) -> bool {
        self.complex.is_some() || self.simplex.is_some() || self.grid.is_some()
    }

    fn load(&self) -> Result<SimplicialComplex2> {
        match (&self.complex, self.simplex, self.grid) {
            (Some(p), _, _) => io::complex_from_json_str(&read(p)?),
            (_, Some(d), _) => Ok(SimplicialComplex2::full_simplex(d)),
            (_, _, Some(m)) => Ok(SimplicialComplex2::grid(m)),
            _ => Err(Error::InvalidArgument(
                "one of --complex, --simplex, --grid is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct HolonomyArgs {
    #[command(flatten)]
    pub source: ComplexSource,
    /// Field JSON file.
    pub field: PathBuf,
    #[arg(long, value_enum, default_value_t = IndicatorArg::Distance)]
    pub indicator: IndicatorArg,
    #[arg(long, default_value_t = DEFAULT_CONSISTENCY_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonteCarloArgs {
    #[command(flatten)]
    pub source: ComplexSource,
    /// Sample random n×n PC matrices instead of fields on a complex.
    #[arg(long = "random-pc", conflicts_with_all = ["complex", "simplex", "grid"])]
    pub random_pc: Option<usize>,
    /// Group tag.
    #[arg(long)]
    pub group: String,
    #[arg(long, value_enum)]
    pub observable: Option<ObservableArg>,
    #[arg(long, value_enum, default_value_t = IndicatorArg::Distance)]
    pub indicator: IndicatorArg,
    /// Number of samples.
    #[arg(short = 'N', long = "samples", default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Write a histogram of the samples as CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INVALID
        }
    }
}

pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Check(a) => cmd_check(a, stdout),
        Command::Consistencize(a) => cmd_consistencize(a, stdout),
        Command::Holonomy(a) => cmd_holonomy(a, stdout),
        Command::Montecarlo(a) => cmd_montecarlo(a, stdout),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn emit(report: &Value, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let mut s = serde_json::to_string_pretty(report).expect("JSON values serialize");
    s.push('\n');
    match out {
        Some(p) => fs::write(p, s)?,
        None => stdout.write_all(s.as_bytes())?,
    }
    Ok(())
}

fn sniff_format(path: &Path, text: &str, explicit: Option<Format>) -> Format {
    if let Some(f) = explicit {
        return f;
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
        Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
        _ if text.trim_start().starts_with('{') => Format::Json,
        _ => Format::Csv,
    }
}

fn load_matrix(input: &MatrixInput) -> Result<PcMatrix> {
    let text = read(&input.matrix)?;
    let m = match sniff_format(&input.matrix, &text, input.format) {
        Format::Json => io::matrix_from_json_str(&text)?,
        Format::Csv => io::matrix_from_csv_str(&text)?,
    };
    if let Some(tag) = &input.group {
        let g: Group = tag.parse()?;
        if g != m.group() {
            return Err(Error::GroupMismatch(g.tag(), m.group().tag()));
        }
    }
    Ok(m)
}

fn triad_json(t: Option<(usize, usize, usize)>) -> Value {
    t.map_or(Value::Null, |(i, j, k)| json!([i, j, k]))
}

fn cmd_check(a: &CheckArgs, stdout: &mut dyn Write) -> Result<i32> {
    let m = load_matrix(&a.input)?;
    let violations = m.validate();
    let mut report = json!({
        "group": m.group().tag(),
        "n": m.n(),
        "variance": m.variance(),
        "valid": violations.is_empty(),
    });
    if !violations.is_empty() {
        report["violations"] = violations.iter().map(|v| json!(v.to_string())).collect();
        emit(&report, a.out.as_deref(), stdout)?;
        return Ok(EXIT_INVALID);
    }
    if a.epsilon < 0.0 || a.epsilon.is_nan() {
        return Err(Error::NegativeEpsilon(a.epsilon));
    }
    let indicator = Indicator::from(a.indicator);
    let gaps = m.has_gaps();
    report["gaps"] = json!(gaps);
    let consistent = if gaps {
        let defect = m.ii_indicator_present_triads(&Indicator::Distance)?;
        let ok = defect.value <= a.tol;
        report["max_defect"] = json!(defect.value);
        if !ok {
            report["witness"] = triad_json(defect.triad);
        }
        let score = m.ii_indicator_present_triads(&indicator)?;
        report["ii_In"] = json!(score.value);
        report["worst_triad"] = triad_json(score.triad);
        let eps = m.ii_indicator_present_triads(&Indicator::Ii3Scale)?.value;
        report["within_epsilon"] = json!(eps < a.epsilon);
        ok
    } else {
        let c = m.is_consistent(a.tol)?;
        report["max_defect"] = json!(c.max_defect);
        if let Some((i, j, k)) = c.witness {
            report["witness"] = json!([i, j, k]);
        }
        let score = m.ii_indicator(&indicator)?;
        report["ii_In"] = json!(score.value);
        report["worst_triad"] = triad_json(score.triad);
        if m.group() == Group::RPlus {
            report["ii3"] = json!(m.ii3_matrix()?.value);
            report["ii_n"] = json!(m.ii_n_chain()?);
        }
        report["within_epsilon"] = json!(epsilon_membership(&m, a.epsilon, &Indicator::Ii3Scale)?);
        c.consistent
    };
    report["consistent"] = json!(consistent);
    report["epsilon"] = json!(a.epsilon);
    report["tol"] = json!(a.tol);
    emit(&report, a.out.as_deref(), stdout)?;
    Ok(if consistent { EXIT_OK } else { EXIT_INCONSISTENT })
}

fn cmd_consistencize(a: &ConsistencizeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let m = load_matrix(&a.input)?;
    let violations = m.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidMatrix(violations));
    }
    let method = a.method.unwrap_or(match m.group() {
        Group::RPlus | Group::U1 => Method::Abelian,
        _ => Method::Riemannian,
    });
    let result = match method {
        Method::Abelian => consistencize_abelian(&m)?,
        Method::Riemannian => consistencize_riemannian(
            &m,
            &DescentOptions {
                max_iter: a.max_iter,
                ..DescentOptions::default()
            },
        )?,
    };
    if let Some(path) = &a.out {
        let fmt = a.out_format.unwrap_or(match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            _ => Format::Json,
        });
        let text = match fmt {
            Format::Csv => io::matrix_to_csv(&result.consistent)?,
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&io::matrix_to_json(&result.consistent))
                    .expect("JSON values serialize");
                s.push('\n');
                s
            }
        };
        fs::write(path, text)?;
    }
    let mut report = io::consistencization_to_json(&result);
    report["method"] = json!(match method {
        Method::Abelian => "abelian",
        Method::Riemannian => "riemannian",
    });
    emit(&report, None, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_holonomy(a: &HolonomyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let k = a.source.load()?;
    let field = io::field_from_json_str(&k, &read(&a.field)?)?;
    let indicator = Indicator::from(a.indicator);
    let matrix = holonomy_pc_matrix(&k, &field)?;
    let curv: Vec<Value> = curvature_values(&k, &field, &indicator)?
        .into_iter()
        .map(|(t, v)| json!({ "triangle": t, "value": v }))
        .collect();
    let g = global_ii(&k, &field, &indicator)?;
    let present = matrix.ii_indicator_present_triads(&Indicator::Distance)?;
    let report = json!({
        "matrix": io::matrix_to_json(&matrix),
        "curvatures": curv,
        "global_ii": g.value,
        "worst_triangle": g.triangle,
        "consistent_on_present_triads": present.value <= a.tol,
    });
    emit(&report, a.out.as_deref(), stdout)?;
    Ok(EXIT_OK)
}

fn cmd_montecarlo(a: &MonteCarloArgs, stdout: &mut dyn Write) -> Result<i32> {
    let group: Group = a.group.parse()?;
    if !group.is_compact() {
        return Err(Error::NoHaarMeasure(group.tag()));
    }
    let indicator = Indicator::from(a.indicator);
    let complex = if a.source.given() {
        Some(a.source.load()?)
    } else {
        None
    };
    let default_obs = if a.random_pc.is_some() {
        ObservableArg::Ii3OfRandomMatrix
    } else {
        ObservableArg::MeanCurvatureIn
    };
    let obs = match a.observable.unwrap_or(default_obs) {
        ObservableArg::MeanCurvatureIn => Observable::MeanCurvatureIn(indicator),
        ObservableArg::SupCurvatureIn => Observable::SupCurvatureIn(indicator),
        ObservableArg::WilsonCharacter => Observable::WilsonCharacter(None),
        ObservableArg::Ii3OfRandomMatrix => Observable::IiOfRandomMatrix {
            n: a.random_pc.ok_or_else(|| {
                Error::InvalidArgument("ii3_of_random_matrix needs --random-pc n".into())
            })?,
            indicator,
        },
    };
    if obs.needs_complex() && complex.is_none() {
        return Err(Error::InvalidArgument(format!(
            "{} needs one of --complex, --simplex, --grid",
            obs.tag()
        )));
    }
    let report = run_report(
        complex.as_ref(),
        group,
        &obs,
        a.samples,
        a.seed,
        a.workers,
        a.histogram.is_some(),
    )?;
    if let (Some(path), Some(h)) = (&a.histogram, &report.histogram) {
        fs::write(path, h.to_csv())?;
    }
    emit(
        &serde_json::to_value(&report).expect("report serializes"),
        a.out.as_deref(),
        stdout,
    )?;
    Ok(EXIT_OK)
}
