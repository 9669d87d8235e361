//! `ggchain`: correlations of Gaussian chain and cycle models from the
//! command line.

mod output;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ggchain::analysis::{fit_abs_error_rate, sweep_centered, sweep_open, RateFit, Sweep};
use ggchain::circulant::{correlation_sequence, integral_ik, omega_cycle_limit, riemann_sum};
use ggchain::model::{decay_params, gff_to_tau, xi_mass};
use ggchain::oracle::{model_correlation, sample, NORMAL_METHOD, RNG_NAME};
use ggchain::{analysis, Error, GffParams, GraphKind, GraphSpec, Tau};
use nalgebra::DMatrix;
use serde::Serialize;

use output::{g9, write_csv, write_json, Metadata, Table};

const EXIT_DOMAIN: u8 = 2;
const EXIT_SELF_CHECK: u8 = 3;
const EXIT_INSUFFICIENT: u8 = 4;
const EXIT_STATISTICAL: u8 = 5;

/// Largest closed-form vs oracle deviation tolerated by `corr --method both`.
const SELF_CHECK_TOL: f64 = 1e-8;
/// Largest Fisher-z discrepancy, in standard errors, accepted by `sample`.
const DISCREPANCY_LIMIT: f64 = 4.0;
const MIN_SAMPLE_COUNT: usize = 100;

#[derive(Parser)]
#[command(name = "ggchain", version, about = "Exact correlations of Gaussian chain and cycle models")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    format: Format,
    /// Accepted for scripting; output never contains timestamps and is always reproducible.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Graph {
    Open,
    Centered,
    Cycle,
}

impl From<Graph> for GraphKind {
    fn from(g: Graph) -> Self {
        match g {
            Graph::Open => GraphKind::OpenChain,
            Graph::Centered => GraphKind::CenteredChain,
            Graph::Cycle => GraphKind::Cycle,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Method {
    Closed,
    Oracle,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Decay rate and base for a partial correlation or a free-field mass.
    Decay(DecayArgs),
    /// Full correlation matrix of a graph.
    Corr(CorrArgs),
    /// Finite-size error of one correlation as the chain grows.
    Converge(ConvergeArgs),
    /// Cycle correlation sequence and its Riemann-sum view.
    Circulant(CirculantArgs),
    /// Monte Carlo check of the exact correlations.
    Sample(SampleArgs),
}

#[derive(Args, Serialize)]
struct DecayArgs {
    /// Partial correlation, in (0, 1/2).
    #[arg(long, conflicts_with_all = ["mass", "beta"], required_unless_present = "mass")]
    #[serde(skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
    /// Free-field mass; xi is always evaluated at beta = 1.
    #[arg(long, requires = "beta")]
    #[serde(skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
    /// Free-field coupling.
    #[arg(long, requires = "mass")]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
}

#[derive(Args, Serialize)]
struct CorrArgs {
    #[arg(long, value_enum)]
    graph: Graph,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tau: f64,
    #[arg(long, value_enum, default_value_t = Method::Closed)]
    method: Method,
}

#[derive(Args, Serialize)]
struct ConvergeArgs {
    #[arg(long, value_enum)]
    graph: Graph,
    #[arg(long, allow_hyphen_values = true)]
    i: i64,
    #[arg(long, allow_hyphen_values = true)]
    j: i64,
    #[arg(long, default_value_t = analysis::DEFAULT_TAU)]
    tau: f64,
    #[arg(long)]
    n_min: usize,
    #[arg(long)]
    n_max: usize,
    /// Also fit the exponential rate of the absolute error.
    #[arg(long)]
    fit: bool,
}

#[derive(Args, Serialize)]
struct CirculantArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tau: f64,
    /// Report only this lag.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    /// Add the Riemann sum, its integral and their gap.
    #[arg(long)]
    riemann: bool,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[arg(long, value_enum)]
    graph: Graph,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    tau: f64,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
}

/// A failed command: message for stderr and exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InsufficientData { .. } => EXIT_INSUFFICIENT,
            _ => EXIT_DOMAIN,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn domain(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_DOMAIN, message: message.into() }
}

type Outcome = std::result::Result<(), Failure>;

fn emit<T: Serialize>(fmt: Format, meta: Metadata, payload: T, table: impl FnOnce() -> Table) -> Outcome {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match fmt {
        Format::Json => write_json(&mut out, meta, payload)?,
        Format::Csv => write_csv(&mut out, &meta, &table())?,
    }
    out.flush()?;
    Ok(())
}

fn params<T: Serialize>(args: &T) -> serde_json::Value {
    serde_json::to_value(args).expect("arguments serialize")
}

#[derive(Serialize)]
struct DecayRow {
    tau: f64,
    lambda: f64,
    alpha: f64,
    xi: f64,
}

fn cmd_decay(fmt: Format, a: &DecayArgs) -> Outcome {
    let (tau, mass) = match (a.tau, a.mass, a.beta) {
        (Some(t), None, None) => {
            let tau = Tau::new(t)?.require_positive()?;
            // mass that gives this tau at beta = 1
            (tau, ((1.0 - 2.0 * t) / (2.0 * t)).sqrt())
        }
        (None, Some(m), Some(b)) => {
            if !(m > 0.0) {
                return Err(domain(format!("mass = {m} must be strictly positive")));
            }
            (gff_to_tau(GffParams::new(b, m, 1)?)?.require_positive()?, m)
        }
        _ => return Err(domain("give either --tau or both --mass and --beta")),
    };
    let d = decay_params(tau)?;
    let row = DecayRow {
        tau: tau.get(),
        lambda: d.lambda,
        alpha: d.alpha,
        xi: xi_mass(mass)?,
    };
    emit(fmt, Metadata::new("decay", params(a)), &row, || {
        let mut t = Table::new(["tau", "lambda", "alpha", "xi"]);
        t.rows.push(vec![g9(row.tau), g9(row.lambda), g9(row.alpha), g9(row.xi)]);
        t
    })
}

#[derive(Serialize)]
struct CorrPayload {
    indices: Vec<i64>,
    matrix: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_abs_deviation: Option<f64>,
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn cmd_corr(fmt: Format, a: &CorrArgs) -> Outcome {
    let g = GraphSpec::new(a.graph.into(), a.n)?;
    let tau = Tau::new(a.tau)?;
    let (matrix, deviation) = match a.method {
        Method::Closed => (analysis::closed_form_correlation(g, tau)?, None),
        Method::Oracle => (model_correlation(g, tau)?.psi, None),
        Method::Both => {
            let closed = analysis::closed_form_correlation(g, tau)?;
            let oracle = model_correlation(g, tau)?.psi;
            let dev = (&closed - &oracle).amax();
            (closed, Some(dev))
        }
    };
    let indices: Vec<i64> = match g.kind() {
        GraphKind::Cycle => (0..g.size() as i64).collect(),
        _ => g.indices().collect(),
    };
    let payload = CorrPayload {
        indices: indices.clone(),
        matrix: rows_of(&matrix),
        max_abs_deviation: deviation,
    };
    emit(fmt, Metadata::new("corr", params(a)), &payload, || {
        let mut t = Table::new(std::iter::once("index".to_string()).chain(indices.iter().map(i64::to_string)));
        for (r, idx) in indices.iter().enumerate() {
            let mut row = vec![idx.to_string()];
            row.extend(matrix.row(r).iter().map(|&v| g9(v)));
            t.rows.push(row);
        }
        if let Some(d) = deviation {
            t.footer.push(("max_abs_deviation".into(), g9(d)));
        }
        t
    })?;
    match deviation {
        Some(d) if !(d <= SELF_CHECK_TOL) => Err(Failure {
            code: EXIT_SELF_CHECK,
            message: format!("closed form and oracle differ by {d:e} > {SELF_CHECK_TOL:e}"),
        }),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct ConvergePayload<'a> {
    sweep: &'a Sweep,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit: Option<RateFit>,
}

fn cmd_converge(fmt: Format, a: &ConvergeArgs) -> Outcome {
    let tau = Tau::new(a.tau)?;
    let sweep = match a.graph {
        Graph::Open => sweep_open(a.i, a.j, tau, a.n_min, a.n_max)?,
        Graph::Centered => sweep_centered(a.i, a.j, tau, a.n_min, a.n_max)?,
        Graph::Cycle => return Err(domain("no asymptotic expansion available for cycle")),
    };
    let fit = if a.fit { Some(fit_abs_error_rate(&sweep)?) } else { None };
    let payload = ConvergePayload { sweep: &sweep, fit: fit.clone() };
    emit(fmt, Metadata::new("converge", params(a)), &payload, || {
        let mut t = Table::new(["n", "exact", "limit", "abs_err", "rel_err", "scaled_rel"]);
        for r in &sweep.records {
            t.rows.push(vec![
                r.n.to_string(),
                g9(r.exact),
                g9(r.limit),
                g9(r.abs_err),
                g9(r.rel_err),
                g9(r.scaled_rel),
            ]);
        }
        t.footer.push(("coefficient".into(), g9(sweep.coefficient)));
        if let Some(f) = &fit {
            t.footer.push(("fit".into(), serde_json::to_string(f).expect("fit serializes")));
        }
        t
    })
}

#[derive(Serialize)]
struct CirculantRow {
    k: usize,
    omega_k: f64,
    alpha_k: f64,
    diff: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    s_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

fn cmd_circulant(fmt: Format, a: &CirculantArgs) -> Outcome {
    let tau = Tau::new(a.tau)?;
    let seq = correlation_sequence(a.n, tau)?;
    let lags: Vec<usize> = match a.k {
        Some(k) if k >= a.n => return Err(domain(format!("k = {k} must be < n = {}", a.n))),
        Some(k) => vec![k],
        None => (0..a.n).collect(),
    };
    let rows = lags
        .into_iter()
        .map(|k| {
            let alpha_k = if tau.is_zero() {
                f64::from(u8::from(k == 0))
            } else {
                omega_cycle_limit(k, tau)?
            };
            let (s_k, i_k, gap) = if a.riemann {
                let s = riemann_sum(a.n, k, tau)?;
                let i = integral_ik(k, tau)?;
                (Some(s), Some(i), Some(s - i))
            } else {
                (None, None, None)
            };
            Ok(CirculantRow {
                k,
                omega_k: seq.omega[k],
                alpha_k,
                diff: seq.omega[k] - alpha_k,
                s_k,
                i_k,
                gap,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    emit(fmt, Metadata::new("circulant", params(a)), &rows, || {
        let mut header = vec!["k", "omega_k", "alpha^k", "omega_k-alpha^k"];
        if a.riemann {
            header.extend(["s_k", "i_k", "gap"]);
        }
        let mut t = Table::new(header);
        for r in &rows {
            let mut row = vec![r.k.to_string(), g9(r.omega_k), g9(r.alpha_k), g9(r.diff)];
            row.extend([r.s_k, r.i_k, r.gap].into_iter().flatten().map(g9));
            t.rows.push(row);
        }
        t
    })
}

#[derive(Serialize)]
struct SampleRow {
    i: i64,
    j: i64,
    exact: f64,
    empirical: f64,
    standard_error: f64,
    discrepancy: f64,
}

#[derive(Serialize)]
struct SamplePayload {
    count: usize,
    fisher_se: f64,
    max_discrepancy: f64,
    entries: Vec<SampleRow>,
}

fn cmd_sample(fmt: Format, a: &SampleArgs) -> Outcome {
    if a.count < MIN_SAMPLE_COUNT {
        return Err(domain(format!("count = {} must be >= {MIN_SAMPLE_COUNT}", a.count)));
    }
    let g = GraphSpec::new(a.graph.into(), a.n)?;
    let tau = Tau::new(a.tau)?;
    let batch = sample(g, tau, a.count, a.seed)?;
    let exact = model_correlation(g, tau)?.psi;
    let disc = batch.fisher_discrepancy(&exact);
    let labels: Vec<i64> = match g.kind() {
        GraphKind::Cycle => (0..g.size() as i64).collect(),
        _ => g.indices().collect(),
    };
    let mut entries = Vec::new();
    for r in 0..labels.len() {
        for c in (r + 1)..labels.len() {
            entries.push(SampleRow {
                i: labels[r],
                j: labels[c],
                exact: exact[(r, c)],
                empirical: batch.correlation[(r, c)],
                standard_error: batch.standard_errors[(r, c)],
                discrepancy: disc[(r, c)],
            });
        }
    }
    let max_discrepancy = disc.amax();
    let payload = SamplePayload {
        count: batch.count,
        fisher_se: batch.fisher_se,
        max_discrepancy,
        entries,
    };
    let mut meta = Metadata::new("sample", params(a));
    meta.seed = Some(a.seed);
    meta.rng = Some(RNG_NAME.into());
    meta.normal_method = Some(NORMAL_METHOD.into());
    emit(fmt, meta, &payload, || {
        let mut t = Table::new(["i", "j", "exact", "empirical", "standard_error", "discrepancy"]);
        for e in &payload.entries {
            t.rows.push(vec![
                e.i.to_string(),
                e.j.to_string(),
                g9(e.exact),
                g9(e.empirical),
                g9(e.standard_error),
                g9(e.discrepancy),
            ]);
        }
        t.footer.push(("max_discrepancy".into(), g9(max_discrepancy)));
        t
    })?;
    if max_discrepancy <= DISCREPANCY_LIMIT {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_STATISTICAL,
            message: format!("Fisher-z discrepancy {max_discrepancy:.3} exceeds {DISCREPANCY_LIMIT} standard errors"),
        })
    }
}

fn configure_threads() -> Outcome {
    let Ok(raw) = std::env::var("GGCHAIN_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| domain(format!("GGCHAIN_THREADS = {raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| domain(e.to_string()))
}

fn run(cli: &Cli) -> Outcome {
    configure_threads()?;
    match &cli.command {
        Command::Decay(a) => cmd_decay(cli.format, a),
        Command::Corr(a) => cmd_corr(cli.format, a),
        Command::Converge(a) => cmd_converge(cli.format, a),
        Command::Circulant(a) => cmd_circulant(cli.format, a),
        Command::Sample(a) => cmd_sample(cli.format, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("ggchain: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
