//! `cphaar`: Monte Carlo experiments on Haar approximation of compound
//! Poisson processes and Brownian motion.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cphaar::harness::{
    self, format_number, render_json, render_table, CsvRecord, Document, ExperimentConfig,
};
use cphaar::levy_sim::{brownian_grid, sample_path};
use cphaar::{Dictionary, Error, JumpLaw, ProcessKind, RandomStream, Scheme};

#[derive(Parser, Debug)]
#[command(name = "cphaar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo MSE of linear, greedy and best-M approximation.
    MseCurve(MseCurveArgs),
    /// Empirical against exact survival of the minimum jump spacing.
    LemmaCheck(LemmaArgs),
    /// Greedy MSE against the theoretical envelope.
    Theorem1Check(Theorem1Args),
    /// Best-M error under discrete Haar and DCT, for cp and bm.
    DictCompare(DictCompareArgs),
    /// Closed-form linear MSE, E[2^{-M/N}] and envelope per M.
    TheoryTable(TheoryArgs),
    /// One path: jumps for cp, grid values for bm.
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct Run {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all cores. Output does not depend on it.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Args, Debug)]
struct MseCurveArgs {
    #[arg(long, default_value = "cp")]
    process: ProcessKind,
    /// Jump rate (cp only).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    /// Gaussian jump variance; defaults to sigma0_sq / lambda.
    #[arg(long)]
    jump_variance: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "linear,greedy,best")]
    schemes: Vec<Scheme>,
    #[arg(long, default_value = "haar")]
    dictionary: Dictionary,
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    grid_log2: u32,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct LemmaArgs {
    /// Rate of the paths checked for Δ ≤ 1/N.
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,5")]
    n: Vec<u64>,
    /// δ grid; values above 1/n are skipped for that n.
    #[arg(long, value_delimiter = ',')]
    delta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct Theorem1Args {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128,256")]
    m: Vec<usize>,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DictCompareArgs {
    #[arg(long, default_value_t = 10.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
    m: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    grid_log2: u32,
    #[command(flatten)]
    run: Run,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct TheoryArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "1,2,4,8,16,32,64,128,256"
    )]
    m: Vec<u64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value = "cp")]
    process: ProcessKind,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(long)]
    jump_variance: Option<f64>,
    /// Grid exponent for bm.
    #[arg(long, default_value_t = 10)]
    grid_log2: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial index: the same path trial `t` of a run with this seed draws.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct LemmaConfig {
    lambda: f64,
    n_values: Vec<u64>,
    delta_grid: Vec<f64>,
    samples: usize,
    seed: u64,
    paths_with_jumps: usize,
    spacing_violations: usize,
}

#[derive(Serialize)]
struct Theorem1Config {
    lambda: f64,
    sigma0_sq: f64,
    m_values: Vec<usize>,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct DictCompareConfig {
    lambda: f64,
    sigma0_sq: f64,
    m_values: Vec<usize>,
    grid_log2: u32,
    trials: usize,
    seed: u64,
}

#[derive(Serialize)]
struct TheoryConfig {
    lambda: f64,
    sigma0_sq: f64,
    m_values: Vec<u64>,
}

#[derive(Serialize)]
struct SimulateConfig {
    process: ProcessKind,
    lambda: Option<f64>,
    sigma0_sq: f64,
    jump_law: Option<JumpLaw>,
    grid_log2: Option<u32>,
    seed: u64,
    trial: u64,
}

/// One jump (cp) or one grid sample (bm).
#[derive(Serialize)]
struct PointRow {
    index: usize,
    t: f64,
    value: f64,
}

impl CsvRecord for PointRow {
    fn header() -> &'static [&'static str] {
        &["index", "t", "value"]
    }

    fn fields(&self) -> Vec<String> {
        vec![
            self.index.to_string(),
            format_number(self.t),
            format_number(self.value),
        ]
    }
}

fn emit<C: Serialize, R: Serialize + CsvRecord>(
    output: &Output,
    config: C,
    records: Vec<R>,
) -> cphaar::Result<()> {
    let text = match output.format {
        Format::Csv => render_table(&records),
        Format::Json => render_json(&Document { config, records })?,
    };
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|source| io_error(path, source)),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| io_error(Path::new("<stdout>"), source)),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn with_jobs<T: Send>(
    jobs: usize,
    f: impl FnOnce() -> cphaar::Result<T> + Send,
) -> cphaar::Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Invariant(format!("cannot start worker pool: {e}")))?;
    pool.install(f)
}

fn jump_law(variance: Option<f64>) -> cphaar::Result<Option<JumpLaw>> {
    variance.map(JumpLaw::gaussian).transpose()
}

fn mse_curve(args: MseCurveArgs) -> cphaar::Result<()> {
    let config = ExperimentConfig {
        process: args.process,
        lambda: args.lambda,
        sigma0_sq: args.sigma0_sq,
        jump_law: jump_law(args.jump_variance)?,
        schemes: args.schemes,
        dictionary: args.dictionary,
        m_values: args.m,
        grid_log2: args.grid_log2,
        trials: args.run.trials,
        master_seed: args.run.seed,
        output_path: args.output.out.clone(),
    };
    config.validate()?;
    let records = with_jobs(args.run.jobs, || harness::run_mse_curve(&config))?;
    emit(&args.output, config, records)
}

fn lemma_check(args: LemmaArgs) -> cphaar::Result<()> {
    let delta_grid = args
        .delta
        .unwrap_or_else(|| (0..=100).map(|i| i as f64 / 100.0).collect());
    let report = with_jobs(args.jobs, || {
        harness::run_lemma_check(args.lambda, &args.n, &delta_grid, args.samples, args.seed)
    })?;
    for &n in &args.n {
        eprintln!(
            "n = {n}: sup |empirical - exact| = {:.4e}",
            report.sup_deviation(n)
        );
    }
    eprintln!(
        "Δ ≤ 1/N violated on {} of {} paths with jumps",
        report.spacing_violations, report.paths_with_jumps
    );
    let config = LemmaConfig {
        lambda: args.lambda,
        n_values: args.n,
        delta_grid,
        samples: args.samples,
        seed: args.seed,
        paths_with_jumps: report.paths_with_jumps,
        spacing_violations: report.spacing_violations,
    };
    emit(&args.output, config, report.rows)
}

fn theorem1_check(args: Theorem1Args) -> cphaar::Result<()> {
    let rows = with_jobs(args.run.jobs, || {
        harness::run_theorem1_check(
            args.lambda,
            args.sigma0_sq,
            &args.m,
            args.run.trials,
            args.run.seed,
        )
    })?;
    let config = Theorem1Config {
        lambda: args.lambda,
        sigma0_sq: args.sigma0_sq,
        m_values: args.m,
        trials: args.run.trials,
        seed: args.run.seed,
    };
    emit(&args.output, config, rows)
}

fn dict_compare(args: DictCompareArgs) -> cphaar::Result<()> {
    let records = with_jobs(args.run.jobs, || {
        harness::run_dict_compare(
            args.lambda,
            args.sigma0_sq,
            &args.m,
            args.grid_log2,
            args.run.trials,
            args.run.seed,
        )
    })?;
    let config = DictCompareConfig {
        lambda: args.lambda,
        sigma0_sq: args.sigma0_sq,
        m_values: args.m,
        grid_log2: args.grid_log2,
        trials: args.run.trials,
        seed: args.run.seed,
    };
    emit(&args.output, config, records)
}

fn theory_table(args: TheoryArgs) -> cphaar::Result<()> {
    let rows = harness::theory_table(args.lambda, args.sigma0_sq, &args.m)?;
    let config = TheoryConfig {
        lambda: args.lambda,
        sigma0_sq: args.sigma0_sq,
        m_values: args.m,
    };
    emit(&args.output, config, rows)
}

fn simulate(args: SimulateArgs) -> cphaar::Result<()> {
    let mut stream = RandomStream::new(args.seed, args.trial);
    let (rows, law, grid_log2) = match args.process {
        ProcessKind::Cp => {
            let lambda = args.lambda.ok_or_else(|| Error::InvalidParameter {
                name: "lambda",
                reason: "compound Poisson paths need --lambda".into(),
            })?;
            let law = match jump_law(args.jump_variance)? {
                Some(law) => law,
                None => JumpLaw::normalized(args.sigma0_sq, lambda)?,
            };
            let path = sample_path(lambda, law, &mut stream)?;
            let rows = path
                .jump_times()
                .into_iter()
                .zip(path.heights())
                .enumerate()
                .map(|(index, (t, &value))| PointRow { index, t, value })
                .collect();
            (rows, Some(law), None)
        }
        ProcessKind::Bm => {
            if args.lambda.is_some() || args.jump_variance.is_some() {
                return Err(Error::InvalidParameter {
                    name: "lambda",
                    reason: "Brownian motion has no jumps; drop --lambda and --jump-variance"
                        .into(),
                });
            }
            let grid = brownian_grid(args.sigma0_sq, args.grid_log2, &mut stream)?;
            let scale = 1.0 / grid.len() as f64;
            let rows = grid
                .values()
                .iter()
                .enumerate()
                .map(|(index, &value)| PointRow {
                    index,
                    t: index as f64 * scale,
                    value,
                })
                .collect();
            (rows, None, Some(args.grid_log2))
        }
    };
    let config = SimulateConfig {
        process: args.process,
        lambda: args.lambda,
        sigma0_sq: args.sigma0_sq,
        jump_law: law,
        grid_log2,
        seed: args.seed,
        trial: args.trial,
    };
    emit(&args.output, config, rows)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter { .. } | Error::Domain { .. } | Error::ScaleLimit { .. } => 2,
        Error::Io { .. } | Error::Json { .. } => 3,
        Error::Invariant(_) => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::MseCurve(a) => mse_curve(a),
        Command::LemmaCheck(a) => lemma_check(a),
        Command::Theorem1Check(a) => theorem1_check(a),
        Command::DictCompare(a) => dict_compare(a),
        Command::TheoryTable(a) => theory_table(a),
        Command::Simulate(a) => simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
