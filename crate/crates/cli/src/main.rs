//! `permoment`: exact permutation moments, p-values and validation tables for
//! Pearson's and Spearman's correlation.
//!
//! Machine-readable results go to stdout, diagnostics to stderr. Exit codes:
//! 0 ok, 2 input or configuration error, 3 degenerate data, 4 size limit.

mod bench;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use permoment::{
    load_csv, moment_pvalue, moment_vector, oracle_pvalue_mc, rank_transform, CdfMethod, Dataset,
    Error, ExactOracle, Header, Mode, Tail, DEFAULT_ENUMERATION_CAP, DEFAULT_ORDER, MAX_ORDER,
};

use crate::output::{Format, Report};

#[derive(Parser)]
#[command(name = "permoment", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact moments <rho^k> of the permutation distribution.
    Moments(MomentsArgs),
    /// p-value of the observed correlation.
    Pvalue(PvalueArgs),
    /// Closed-form moments against full enumeration on random data.
    Validate(validate::ValidateArgs),
    /// Spearman permutation moments for tie-free data, by n.
    SpearmanTable(SpearmanTableArgs),
    /// Timing of the moment, enumeration and Monte Carlo paths.
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Two-column CSV of x,y pairs.
    #[arg(long)]
    input: PathBuf,
    /// Treat the first line as a header (default: detect).
    #[arg(long)]
    header: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Pearson)]
    mode: ModeArg,
}

impl InputArgs {
    fn load(&self) -> permoment::Result<Dataset> {
        let header = if self.header {
            Header::Present
        } else {
            Header::Detect
        };
        load_csv(&self.input, header)
    }
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Highest moment order.
    #[arg(long = "k", default_value_t = DEFAULT_ORDER)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct PvalueArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum, default_value_t = PvalueMethodArg::Legendre)]
    method: PvalueMethodArg,
    #[arg(long, value_enum, default_value_t = TailArg::Two)]
    tail: TailArg,
    /// Moment order for the hausdorff and legendre methods.
    #[arg(long = "k", default_value_t = DEFAULT_ORDER)]
    k: usize,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest n accepted by --method exact.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 1)]
    threads: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    output: Format,
}

#[derive(Args)]
struct SpearmanTableArgs {
    #[arg(long, default_value_t = 3)]
    n_min: usize,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[arg(long = "k", default_value_t = DEFAULT_ORDER)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    output: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pearson,
    Spearman,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pearson => Mode::Pearson,
            ModeArg::Spearman => Mode::Spearman,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PvalueMethodArg {
    Exact,
    Mc,
    Hausdorff,
    Legendre,
}

#[derive(Clone, Copy, ValueEnum)]
enum TailArg {
    Two,
    Right,
    Left,
}

impl From<TailArg> for Tail {
    fn from(t: TailArg) -> Self {
        match t {
            TailArg::Two => Tail::Two,
            TailArg::Right => Tail::Right,
            TailArg::Left => Tail::Left,
        }
    }
}

/// A failure with its exit code; the message goes to stderr.
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let mut message = e.to_string();
        if let Error::TooLarge { .. } = e {
            message.push_str("; use --method mc, hausdorff or legendre for larger samples");
        }
        Self {
            code: e.exit_code() as u8,
            message,
        }
    }
}

pub type CmdResult = Result<Report, Failure>;

pub fn check_order(k: usize) -> Result<(), Failure> {
    if k == 0 || k > MAX_ORDER {
        return Err(Failure::config(format!(
            "--k must be between 1 and {MAX_ORDER}, got {k}"
        )));
    }
    Ok(())
}

pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    if threads == 0 {
        return Err(Failure::config("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn cmd_moments(args: &MomentsArgs) -> CmdResult {
    check_order(args.k)?;
    let data = args.input.load()?;
    let mv = with_threads(args.threads, || {
        moment_vector(&data, args.k, args.input.mode.into())
    })??;
    Ok(Report::Moments(mv))
}

fn cmd_pvalue(args: &PvalueArgs) -> CmdResult {
    let data = args.input.load()?;
    let mode: Mode = args.input.mode.into();
    let tail: Tail = args.tail.into();
    // the oracles work on whatever pairing they are given; rank first for
    // Spearman
    let oracle_data = match mode {
        Mode::Pearson => data.clone(),
        Mode::Spearman => rank_transform(&data),
    };
    let estimate = with_threads(args.threads, || match args.method {
        PvalueMethodArg::Exact => ExactOracle::with_cap(args.cap).pvalue(&oracle_data, tail),
        PvalueMethodArg::Mc => {
            if args.samples == 0 {
                return Err(Error::Range("--samples must be at least 1".into()));
            }
            oracle_pvalue_mc(&oracle_data, tail, args.samples, args.seed)
        }
        PvalueMethodArg::Hausdorff | PvalueMethodArg::Legendre => {
            if args.k == 0 || args.k > MAX_ORDER {
                return Err(Error::Range(format!(
                    "--k must be between 1 and {MAX_ORDER}, got {}",
                    args.k
                )));
            }
            let method = match args.method {
                PvalueMethodArg::Hausdorff => CdfMethod::Hausdorff,
                _ => CdfMethod::Legendre,
            };
            moment_pvalue(&data, args.k, method, tail, mode)
        }
    })??;
    Ok(Report::Pvalue {
        n: data.n(),
        mode,
        estimate,
    })
}

fn cmd_spearman_table(args: &SpearmanTableArgs) -> CmdResult {
    if args.k < 2 || args.k > MAX_ORDER {
        return Err(Failure::config(format!(
            "--k must be between 2 and {MAX_ORDER}, got {}",
            args.k
        )));
    }
    if args.n_min < 2 || args.n_min > args.n_max {
        return Err(Failure::config("need 2 <= --n-min <= --n-max"));
    }
    let mut rows = Vec::new();
    for n in args.n_min..=args.n_max {
        let ranks: Vec<f64> = (1..=n).map(|i| i as f64).collect();
        let data = Dataset::new(ranks.clone(), ranks)?;
        let mv = moment_vector(&data, args.k, Mode::Spearman)?;
        rows.push(mv);
    }
    Ok(Report::SpearmanTable(rows))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Moments(a) => cmd_moments(&a),
        Command::Pvalue(a) => cmd_pvalue(&a),
        Command::Validate(a) => validate::run(&a),
        Command::SpearmanTable(a) => cmd_spearman_table(&a),
        Command::Bench(a) => bench::run(&a),
    }
}

fn output_format(cli: &Cli) -> Format {
    match &cli.command {
        Command::Moments(a) => a.output,
        Command::Pvalue(a) => a.output,
        Command::Validate(a) => a.output,
        Command::SpearmanTable(a) => a.output,
        Command::Bench(a) => a.output,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = output_format(&cli);
    match run(cli) {
        Ok(report) => {
            print!("{}", report.render(format));
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
