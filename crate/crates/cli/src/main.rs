//! `ghical` command line: generate fixtures, validate input files, run the
//! calibration pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical error.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ghical::ingest::FileKind;
use ghical::pipeline::{self, PipelineError, ShiftDirection, SynthRequest};
use ghical::regression::FitWarning;
use ghical::{ErrorClass, Unit};

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "ghical", version, about = "Satellite-to-ground GHI calibration")]
struct Cli {
    /// TOML file with optional [run] and [synth] tables; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic ground/satellite fixture pair.
    Synth(SynthArgs),
    /// Report row count, gaps, duplicates and non-finite values of one CSV file.
    Validate {
        path: PathBuf,
    },
    /// Run the full pipeline and write the report directory.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Direction {
    Advance,
    Delay,
}

impl From<Direction> for ShiftDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Advance => ShiftDirection::Advance,
            Direction::Delay => ShiftDirection::Delay,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    #[value(name = "J_per_m2_3h")]
    JoulesPerSqM3h,
    #[value(name = "W_per_m2")]
    WattsPerSqM,
}

#[derive(Debug, Args)]
struct ShiftArgs {
    /// Positional shift applied to the satellite series.
    #[arg(long)]
    shift_steps: Option<u32>,
    #[arg(long, value_enum)]
    shift_direction: Option<Direction>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value = "fixtures")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated calendar years.
    #[arg(long, value_delimiter = ',')]
    years: Option<Vec<i32>>,
    #[arg(long, allow_hyphen_values = true)]
    latitude: Option<f64>,
    #[arg(long)]
    bias_scale: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bias_offset: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
    #[arg(long)]
    noise_peak_fraction: Option<f64>,
    #[arg(long)]
    clearness_spread: Option<f64>,
    /// Unit written to the satellite file.
    #[arg(long, value_enum, default_value = "J_per_m2_3h")]
    unit: UnitArg,
    #[command(flatten)]
    shift: ShiftArgs,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    ground: Option<PathBuf>,
    #[arg(long)]
    satellite: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    shift: ShiftArgs,
    /// Daylight threshold in W/m².
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    split_ratio: Option<f64>,
    /// Month for the across-years boxplot.
    #[arg(long)]
    cross_year_month: Option<u32>,
    /// Fit months one after another instead of in parallel.
    #[arg(long)]
    sequential: bool,
}

fn exit_code(class: ErrorClass) -> ExitCode {
    ExitCode::from(match class {
        ErrorClass::Usage => 1,
        ErrorClass::Data => 2,
        ErrorClass::Numerical => 3,
    })
}

fn fail(err: &PipelineError) -> ExitCode {
    eprintln!("error: {err}");
    exit_code(err.class())
}

fn apply_shift(run: &mut ghical::pipeline::RunConfig, shift: &ShiftArgs) {
    if let Some(steps) = shift.shift_steps {
        run.shift_steps = steps;
    }
    if let Some(dir) = shift.shift_direction {
        run.shift_direction = dir.into();
    }
}

fn cmd_synth(mut file: FileConfig, args: SynthArgs) -> ExitCode {
    let c = &mut file.synth;
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.years {
        c.years = v;
    }
    if let Some(v) = args.latitude {
        c.latitude = v;
    }
    if let Some(v) = args.bias_scale {
        c.bias_scale = v;
    }
    if let Some(v) = args.bias_offset {
        c.bias_offset = v;
    }
    if let Some(v) = args.noise_sigma {
        c.noise_sigma = v;
    }
    if let Some(v) = args.noise_peak_fraction {
        c.noise_peak_fraction = v;
    }
    if let Some(v) = args.clearness_spread {
        c.clearness_spread = v;
    }
    apply_shift(&mut file.run, &args.shift);
    let req = SynthRequest {
        config: file.synth,
        shift: file.run.shift(),
        satellite_unit: match args.unit {
            UnitArg::JoulesPerSqM3h => Unit::JoulesPerSqMAccum,
            UnitArg::WattsPerSqM => Unit::WattsPerSqM,
        },
        output_dir: args.out,
    };
    if let Err(e) = req.config.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match pipeline::write_synth_fixtures(&req) {
        Ok(files) => {
            println!("wrote {} hourly rows", files.rows);
            println!("  ground:    {}", files.ground_path.display());
            println!("  satellite: {}", files.satellite_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn cmd_validate(path: PathBuf) -> ExitCode {
    match pipeline::validate_file(&path) {
        Ok((kind, r)) => {
            let kind = match kind {
                FileKind::Ground => "ground",
                FileKind::Satellite => "satellite",
            };
            println!("file:            {} ({kind})", path.display());
            println!("rows:            {}", r.row_count);
            println!("missing hours:   {}", r.gap_count);
            println!("duplicates:      {}", r.duplicate_count);
            println!("non-finite:      {}", r.nonfinite_count);
            match r.span {
                Some((a, b)) => println!("span:            {a} .. {b}"),
                None => println!("span:            (empty)"),
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn cmd_run(mut file: FileConfig, args: RunArgs) -> ExitCode {
    let run = &mut file.run;
    if let Some(v) = args.ground {
        run.ground_path = v;
    }
    if let Some(v) = args.satellite {
        run.satellite_path = v;
    }
    if let Some(v) = args.out {
        run.output_dir = v;
    }
    apply_shift(run, &args.shift);
    if let Some(v) = args.epsilon {
        run.epsilon = v;
    }
    if let Some(v) = args.seed {
        run.seed = v;
    }
    if let Some(v) = args.split_ratio {
        run.split_ratio = v;
    }
    if let Some(v) = args.cross_year_month {
        run.cross_year_month = v;
    }
    if args.sequential {
        run.parallel = false;
    }

    let outcome = match pipeline::run(run) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    let a = &outcome.analysis;
    println!(
        "joined {} rows, {} after daylight filter",
        a.aligned.len(),
        a.daylight.len()
    );
    println!("month  n_train  n_test  r2_train  r2_test");
    for f in &a.fits.results {
        println!(
            "{:>5}  {:>7}  {:>6}  {:>8.4}  {:>7.4}",
            f.month, f.n_train, f.n_test, f.r2_train, f.r2_test
        );
    }
    for w in &a.fits.warnings {
        match w {
            FitWarning::Skipped { month, reason } => eprintln!("warning: month {month} skipped: {reason}"),
            FitWarning::RankDeficient { month, columns } => {
                eprintln!("warning: month {month} rank deficient, zeroed {}", columns.join(", "))
            }
        }
    }
    println!(
        "report: {} ({} artifacts)",
        run.output_dir.display(),
        outcome.manifest.artifacts.len()
    );
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let file = match FileConfig::load(cli.config.as_deref()) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match cli.command {
        Command::Synth(args) => cmd_synth(file, args),
        Command::Validate { path } => cmd_validate(path),
        Command::Run(args) => cmd_run(file, args),
    }
}
