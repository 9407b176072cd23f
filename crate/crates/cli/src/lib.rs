//! `ridgeview` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
//! Results go to stdout as `key=value` lines; errors go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use ridgeview::dataset::{
    evaluate_oracle, load_design_table, sample_uniform_doe, DatasetError, DesignTable, DomainSpec, OracleKind,
    SyntheticOracle,
};
use ridgeview::demo::{generate_demo, write_demo, DemoConfig};
use ridgeview::linkage::{default_layout, parse_log, replay, DesignIndex};
use ridgeview::surrogate::export::{PlotFile, SubspaceFile};
use ridgeview::surrogate::{build_summary_plot, predict_ridge, subspace_angle, SurrogateError};
use ridgeview_service::{
    analyze_qoi, build_app, load_data_root, resolve_data_root, App, BundleError, BundleOptions, ServeError,
    ServiceConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Regime of the synthetic check: 25 variables (five per span section) and
/// 548 designs.
pub const SYNTHETIC_D: usize = 25;
pub const SYNTHETIC_N: usize = 548;
pub const SYNTHETIC_HELD_OUT: usize = 200;
pub const EXACT_ANGLE_TOL: f64 = 1e-6;
pub const NOISY_ANGLE_TOL: f64 = 0.05;
pub const SYNTHETIC_NOISE: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "ridgeview", version, about = "Active-subspace design-space exploration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a design table and report its shape.
    Ingest(TableArgs),
    /// Fit subspaces and write subspace-<qoi>.json and plot-<qoi>.json.
    Fit {
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        pipeline: PipelineArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Rebuild plot-<qoi>.json from the table and a saved subspace-<qoi>.json.
    ExportPlots {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Recover known ridges from synthetic data at d=25, N=548.
    VerifySynthetic {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Also write a demo dataset directory under <out-dir>/demo.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Re-apply a JSON-lines session log and print the final state.
    Replay {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        data_root: Option<PathBuf>,
    },
    /// Serve the datasets under the data root over HTTP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: String,
        #[arg(long)]
        data_root: Option<PathBuf>,
        /// Send permissive CORS headers.
        #[arg(long)]
        cors: bool,
        #[arg(long)]
        max_m: Option<usize>,
        #[arg(long)]
        degree: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    domain: PathBuf,
    /// Quantity of interest; repeatable. Defaults to every qoi column.
    #[arg(long)]
    qoi: Vec<String>,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long, default_value_t = 2)]
    max_m: usize,
    #[arg(long, default_value_t = 2)]
    degree: usize,
}

impl PipelineArgs {
    fn options(&self) -> BundleOptions {
        BundleOptions {
            max_m: self.max_m,
            degree: self.degree,
            ..BundleOptions::default()
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn data(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn surrogate(qoi: &str, e: SurrogateError) -> Self {
        let message = format!("qoi `{qoi}`: {e}");
        if e.is_numerical() {
            Self::numerical(message)
        } else {
            Self::data(message)
        }
    }
}

impl From<BundleError> for CliError {
    fn from(e: BundleError) -> Self {
        if e.is_numerical() {
            Self::numerical(e.to_string())
        } else {
            Self::data(e.to_string())
        }
    }
}

fn dataset_err(path: &Path) -> impl Fn(DatasetError) -> CliError + '_ {
    move |e| {
        let text = e.to_string();
        if text.contains(&*path.to_string_lossy()) {
            CliError::data(text)
        } else {
            CliError::data(format!("{}: {text}", path.display()))
        }
    }
}

type Out<'a> = &'a mut dyn Write;

macro_rules! emit {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(|e| CliError::data(format!("stdout: {e}")))?
    };
}

/// Run with explicit argument list and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(command: Command, out: Out) -> Result<(), CliError> {
    match command {
        Command::Ingest(t) => ingest(&t, out),
        Command::Fit {
            table,
            pipeline,
            out_dir,
        } => fit(&table, &pipeline.options(), &out_dir, out),
        Command::ExportPlots { table, out_dir } => export_plots(&table, &out_dir, out),
        Command::VerifySynthetic {
            seed,
            pipeline,
            out_dir,
        } => verify_synthetic(seed, &pipeline.options(), out_dir.as_deref(), out),
        Command::Replay { input, data_root } => replay_log(&input, data_root, out),
        Command::Serve {
            listen,
            data_root,
            cors,
            max_m,
            degree,
        } => {
            let root = resolve_data_root(data_root)
                .ok_or_else(|| CliError::usage("serve needs --data-root or AEROVR_DATA_ROOT"))?;
            let mut config = ServiceConfig::new(listen, root);
            config.cors_allowed = cors;
            config.bundle.max_m = max_m.unwrap_or(config.bundle.max_m);
            config.bundle.degree = degree.unwrap_or(config.bundle.degree);
            serve(config)
        }
    }
}

fn load_table(t: &TableArgs) -> Result<(DesignTable, Vec<String>), CliError> {
    let domain = DomainSpec::from_json_file(&t.domain).map_err(dataset_err(&t.domain))?;
    let table = load_design_table(&t.input, &domain).map_err(dataset_err(&t.input))?;
    let qois = if t.qoi.is_empty() {
        table.qoi_names().to_vec()
    } else {
        t.qoi.clone()
    };
    for q in &qois {
        if table.qoi_index(q).is_err() {
            return Err(CliError::data(format!(
                "{}: no qoi column `{q}` (have: {})",
                t.input.display(),
                table.qoi_names().join(", ")
            )));
        }
    }
    if qois.is_empty() {
        return Err(CliError::data(format!("{}: table has no qoi columns", t.input.display())));
    }
    Ok((table, qois))
}

fn ingest(t: &TableArgs, out: Out) -> Result<(), CliError> {
    let (table, qois) = load_table(t)?;
    emit!(out, "input={}", t.input.display());
    emit!(out, "n={}", table.len());
    emit!(out, "d={}", table.d());
    emit!(out, "qois={}", qois.join(","));
    emit!(out, "quadratic_terms={}", ridgeview::surrogate::quadratic_term_count(table.d()));
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::data(format!("{}: {e}", dir.display())))
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}

fn fit(t: &TableArgs, options: &BundleOptions, out_dir: &Path, out: Out) -> Result<(), CliError> {
    let (table, qois) = load_table(t)?;
    create_dir(out_dir)?;
    for qoi in &qois {
        let a = analyze_qoi(&table, qoi, options).map_err(|e| CliError::surrogate(qoi, e))?;
        let sub_path = out_dir.join(SubspaceFile::file_name(qoi));
        let plot_path = out_dir.join(PlotFile::file_name(qoi));
        let sub = SubspaceFile::new(qoi, &a.subspace).map_err(|e| CliError::surrogate(qoi, e))?;
        write_file(&sub_path, &ridgeview::json::to_vec(&sub).expect("subspace serializes"))?;
        write_file(&plot_path, &ridgeview::json::to_vec(&PlotFile::from(&a.plot)).expect("plot serializes"))?;
        emit!(out, "{qoi}.m={}", a.plot.m);
        emit!(out, "{qoi}.degenerate={}", a.subspace.is_degenerate());
        emit!(out, "{qoi}.eigenvalues={}", fmt_list(a.subspace.eigenvalues()));
        emit!(out, "{qoi}.profile_rmse={:e}", a.profile.training_rmse);
        emit!(out, "{qoi}.subspace_file={}", sub_path.display());
        emit!(out, "{qoi}.plot_file={}", plot_path.display());
    }
    Ok(())
}

/// Rewrites each plot file from the saved subspace, so an edited or
/// externally computed subspace can be re-projected without refitting.
fn export_plots(t: &TableArgs, out_dir: &Path, out: Out) -> Result<(), CliError> {
    let (table, qois) = load_table(t)?;
    for qoi in &qois {
        let sub_path = out_dir.join(SubspaceFile::file_name(qoi));
        let text = std::fs::read_to_string(&sub_path)
            .map_err(|e| CliError::data(format!("{}: {e}", sub_path.display())))?;
        let file: SubspaceFile = serde_json::from_str(&text)
            .map_err(|e| CliError::data(format!("{}: {e}", sub_path.display())))?;
        if file.qoi != *qoi {
            return Err(CliError::data(format!(
                "{}: file is for qoi `{}`, expected `{qoi}`",
                sub_path.display(),
                file.qoi
            )));
        }
        let subspace = file
            .to_subspace()
            .map_err(|e| CliError::data(format!("{}: {e}", sub_path.display())))?;
        if subspace.dim() != table.d() {
            return Err(CliError::data(format!(
                "{}: subspace has dimension {} but the table has {}",
                sub_path.display(),
                subspace.dim(),
                table.d()
            )));
        }
        let plot = build_summary_plot(&table, &subspace, qoi).map_err(|e| CliError::surrogate(qoi, e))?;
        let plot_path = out_dir.join(PlotFile::file_name(qoi));
        write_file(&plot_path, &ridgeview::json::to_vec(&PlotFile::from(&plot)).expect("plot serializes"))?;
        emit!(out, "{qoi}.m={}", plot.m);
        emit!(out, "{qoi}.points={}", plot.len());
        emit!(out, "{qoi}.plot_file={}", plot_path.display());
    }
    Ok(())
}

/// Outcome of one synthetic recovery case.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    pub name: String,
    pub noise_sd: f64,
    pub expected_m: usize,
    pub m: usize,
    /// Principal angle between the leading `expected_m` eigenvectors and
    /// the true ridge directions.
    pub angle: f64,
    /// `lambda_{k+1} / lambda_k` at the true dimension `k`.
    pub gap: f64,
    pub held_out_rmse: f64,
    pub tolerance: f64,
}

impl SyntheticCase {
    pub fn passed(&self) -> bool {
        self.m == self.expected_m && self.angle <= self.tolerance
    }
}

/// Both ridge oracles at d=25, N=548, without noise and with
/// `SYNTHETIC_NOISE`. Deterministic in `seed`.
pub fn synthetic_cases(seed: u64, options: &BundleOptions) -> Result<Vec<SyntheticCase>, CliError> {
    let domain = DomainSpec::unit(SYNTHETIC_D).expect("valid domain");
    let doe = sample_uniform_doe(&domain, SYNTHETIC_N, seed).map_err(|e| CliError::data(e.to_string()))?;
    let held_out = sample_uniform_doe(&domain, SYNTHETIC_HELD_OUT, seed.wrapping_add(0x5eed))
        .map_err(|e| CliError::data(e.to_string()))?;
    let mut cases = Vec::new();
    for (name, kind, k) in [
        ("ridge1d", OracleKind::ExactRidge1d, 1),
        ("ridge2d", OracleKind::ExactRidge2d, 2),
    ] {
        for noise in [0.0, SYNTHETIC_NOISE] {
            let oracle = SyntheticOracle::random_ridge(kind.clone(), SYNTHETIC_D, noise, seed.wrapping_add(k as u64))
                .map_err(|e| CliError::data(e.to_string()))?;
            let table = evaluate_oracle(&oracle, &doe, "f").map_err(|e| CliError::data(e.to_string()))?;
            let a = analyze_qoi(&table, "f", options).map_err(|e| CliError::surrogate(name, e))?;
            let eig = a.subspace.eigenvalues();
            let leading = a.subspace.eigenvectors().columns(0, k).into_owned();
            let angle = subspace_angle(&leading, oracle.directions());
            let mut sq = 0.0;
            for s in held_out.samples() {
                let truth = oracle.value(&s.x).map_err(|e| CliError::data(e.to_string()))?;
                let x = DVector::from_column_slice(&s.x);
                let pred = predict_ridge(&a.profile, &a.subspace, &x).map_err(|e| CliError::surrogate(name, e))?;
                sq += (pred - truth).powi(2);
            }
            cases.push(SyntheticCase {
                name: name.to_string(),
                noise_sd: noise,
                expected_m: k,
                m: a.plot.m,
                angle,
                gap: eig[k] / eig[k - 1],
                held_out_rmse: (sq / held_out.len() as f64).sqrt(),
                tolerance: if noise == 0.0 { EXACT_ANGLE_TOL } else { NOISY_ANGLE_TOL },
            });
        }
    }
    Ok(cases)
}

fn verify_synthetic(seed: u64, options: &BundleOptions, out_dir: Option<&Path>, out: Out) -> Result<(), CliError> {
    let cases = synthetic_cases(seed, options)?;
    emit!(out, "seed={seed}");
    emit!(out, "d={SYNTHETIC_D}");
    emit!(out, "n={SYNTHETIC_N}");
    for c in &cases {
        let key = format!("{}.noise_{}", c.name, c.noise_sd);
        emit!(out, "{key}.m={}", c.m);
        emit!(out, "{key}.angle={:e}", c.angle);
        emit!(out, "{key}.eigenvalue_gap={:e}", c.gap);
        emit!(out, "{key}.heldout_rmse={:e}", c.held_out_rmse);
        emit!(out, "{key}.status={}", if c.passed() { "pass" } else { "fail" });
    }
    if let Some(dir) = out_dir {
        let demo_dir = dir.join("demo");
        let ds = generate_demo(&DemoConfig {
            seed,
            ..DemoConfig::default()
        })
        .map_err(|e| CliError::data(e.to_string()))?;
        write_demo(&ds, &demo_dir).map_err(|e| CliError::data(e.to_string()))?;
        emit!(out, "demo_dir={}", demo_dir.display());
    }
    let failed: Vec<String> = cases
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{} noise {}: m={} (want {}), angle={:e} (tol {:e})", c.name, c.noise_sd, c.m, c.expected_m, c.angle, c.tolerance))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::numerical(format!("recovery tolerance violated: {}", failed.join("; "))))
    }
}

fn replay_log(input: &Path, data_root: Option<PathBuf>, out: Out) -> Result<(), CliError> {
    let root = resolve_data_root(data_root).ok_or_else(|| CliError::usage("replay needs --data-root or AEROVR_DATA_ROOT"))?;
    let text = std::fs::read_to_string(input).map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
    let records = parse_log(&text).map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
    let app = App::new(load_data_root(&root, &BundleOptions::default())?);
    let state = replay(records, &app, default_layout()).map_err(|e| CliError::data(format!("{}: {e}", input.display())))?;
    emit!(out, "events={}", state.history.len());
    emit!(out, "dataset_id={}", state.dataset_id);
    emit!(
        out,
        "selected_index={}",
        state.selected_index.map_or_else(|| "none".to_string(), |i| i.to_string())
    );
    emit!(out, "datasets={}", app.dataset_ids().join(","));
    emit!(out, "state={}", serde_json::to_string(&state).expect("state serializes"));
    Ok(())
}

fn serve(config: ServiceConfig) -> Result<(), CliError> {
    // surface data problems before starting the runtime
    build_app(&config)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::data(format!("tokio runtime: {e}")))?;
    runtime.block_on(ridgeview_service::serve(config)).map_err(|e| match e {
        ServeError::Bundle(b) => CliError::from(b),
        other => CliError::data(other.to_string()),
    })
}
