use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ewtoda_cli::config::parse_box;
use ewtoda_cli::{export_levelset, parse_config, run_suite, show_conventions, suite_names, CliError, FileConfig, Format};

#[derive(Parser)]
#[command(name = "ewtoda", version, about = "Verification suites for the ewtoda geometry engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite; exits 1 if any check fails.
    Run(RunArgs),
    /// List registered suites.
    List,
    /// Print the sign, orientation and normalization conventions.
    Conventions,
    /// Export a level set U = U0 of a catalogue entry as CSV and OBJ.
    Levelset(LevelsetArgs),
}

#[derive(Args)]
struct RunArgs {
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Upper bound applied to every residual.
    #[arg(long)]
    tol: Option<f64>,
    /// Upper bound for one residual, as name=value; repeatable.
    #[arg(long = "tol-for", value_name = "NAME=VALUE")]
    tol_for: Vec<String>,
    /// Sampling box lo:hi,lo:hi,... for charts of matching dimension.
    #[arg(long = "box")]
    domain_box: Option<String>,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct LevelsetArgs {
    #[arg(long)]
    entry: String,
    #[arg(long = "u0", allow_hyphen_values = true)]
    u0: f64,
    #[arg(long, default_value_t = 24)]
    grid: usize,
    /// Output stem; writes <stem>.csv and <stem>.obj.
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> Result<bool, CliError> {
    let mut file = match &args.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => FileConfig::default(),
    };
    let name = args
        .suite
        .or(file.suite.take())
        .ok_or_else(|| CliError::Config("no suite given".into()))?;
    let out = args.out.or(file.out.take().map(PathBuf::from));
    let format = args.format.or(file.format).unwrap_or(Format::Json);
    let mut spec = file.into_spec(&name);
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(n) = args.samples {
        spec.samples = n;
    }
    if let Some(t) = args.tol {
        spec.tol = Some(t);
    }
    for kv in &args.tol_for {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--tol-for {kv:?} is not name=value")))?;
        let v = v
            .parse()
            .map_err(|_| CliError::Config(format!("--tol-for {kv:?}: bad number")))?;
        spec.tolerances.insert(k.to_string(), v);
    }
    if let Some(b) = &args.domain_box {
        spec.domain_box = Some(parse_box(b)?);
    }
    let report = run_suite(&spec)?;
    let text = match format {
        Format::Json => report.to_json()? + "\n",
        Format::Text => report.to_text(),
    };
    match out {
        Some(p) => {
            std::fs::write(&p, text)?;
            eprint!("{}", report.to_text());
        }
        None => print!("{text}"),
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::List => {
            for n in suite_names() {
                println!("{n}");
            }
            Ok(true)
        }
        Command::Conventions => {
            print!("{}", show_conventions());
            Ok(true)
        }
        Command::Levelset(a) => export_levelset(&a.entry, a.u0, a.grid).and_then(|ls| {
            ls.write(&a.out)?;
            println!("{}", ls.summary());
            Ok(true)
        }),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
