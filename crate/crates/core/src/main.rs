use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coopsec::runner::{self, Axis, Evaluator, SweepSpec, ValidateGrid};
use coopsec::{Scheme, SystemConfig};

#[derive(Parser)]
#[command(name = "coopsec", version, about = "Secrecy outage sweeps and checks for cooperative wiretap networks")]
struct Cli {
    /// Worker threads; defaults to RAYON_NUM_THREADS or the core count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Point,
    Acceptance,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one parameter and tabulate the requested evaluators.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// mer_db, snr_db, num_pairs or n_e
        #[arg(long, value_parser = parse_axis)]
        axis: Axis,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Comma-separated subset of noncoop,rsdps,tas
        #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "noncoop,rsdps,tas")]
        schemes: Vec<Scheme>,
        /// Comma-separated subset of mc,analytic,lower,upper
        #[arg(long, value_delimiter = ',', value_parser = parse_evaluator, default_value = "analytic")]
        evaluators: Vec<Evaluator>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Keep p_s fixed on SNR sweeps instead of tying it to p_t.
        #[arg(long)]
        fixed_source_power: bool,
    },
    /// Compare every closed form with simulation; nonzero exit on |z| > 4.
    Validate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "point")]
        grid: GridArg,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Fit the high-MER slope of the exact curve against the diversity order.
    Diversity {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_scheme, default_value = "rsdps")]
        scheme: Scheme,
        #[arg(long, default_value_t = 30.0)]
        window_low: f64,
        #[arg(long, default_value_t = 50.0)]
        window_high: f64,
        #[arg(long, default_value_t = 5)]
        points: usize,
        /// Use the config's powers and rates instead of the high-SNR limit.
        #[arg(long)]
        as_is: bool,
    },
}

fn parse_axis(s: &str) -> Result<Axis, String> {
    Axis::parse(s).ok_or_else(|| format!("unknown axis '{s}'"))
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).ok_or_else(|| format!("unknown scheme '{s}'"))
}

fn parse_evaluator(s: &str) -> Result<Evaluator, String> {
    Evaluator::parse(s).ok_or_else(|| format!("unknown evaluator '{s}'"))
}

fn load(path: &Option<PathBuf>) -> Result<SystemConfig, String> {
    match path {
        None => Ok(SystemConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
            SystemConfig::from_toml_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    match cli.command {
        Command::Sweep {
            config,
            axis,
            from,
            to,
            step,
            schemes,
            evaluators,
            trials,
            seed,
            out,
            format,
            fixed_source_power,
        } => {
            let base = load(&config)?;
            let spec = SweepSpec {
                axis,
                from,
                to,
                step,
                schemes,
                evaluators,
                trials,
                seed,
                output: out.clone(),
                tie_source_power: !fixed_source_power,
            };
            let table = runner::run_sweep(&spec, &base).map_err(|e| e.to_string())?;
            let text = runner::render(&table, matches!(format, Format::Json)).map_err(|e| e.to_string())?;
            match out {
                Some(p) => std::fs::write(&p, text).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Validate {
            config,
            grid,
            trials,
            seed,
        } => {
            let base = load(&config)?;
            let grid = match grid {
                GridArg::Point => ValidateGrid::Point,
                GridArg::Acceptance => ValidateGrid::Acceptance,
            };
            let report = runner::validate_command(&base, grid, trials, seed).map_err(|e| e.to_string())?;
            for c in &report.cells {
                println!(
                    "{:<18} analytic={:<24} mc={:<12} stderr={:<12.3e} z={:+.2}  [{}]",
                    c.evaluator, c.analytic, c.mc, c.stderr, c.z, c.config
                );
            }
            for (name, z) in &report.max_abs_z {
                println!("max |z| {name:<18} {z:.2}");
            }
            println!("{}", if report.passed { "PASS" } else { "FAIL" });
            Ok(report.passed)
        }
        Command::Diversity {
            config,
            scheme,
            window_low,
            window_high,
            points,
            as_is,
        } => {
            let base = load(&config)?;
            let r = runner::diversity_command(&base, scheme, (window_low, window_high), points, as_is)
                .map_err(|e| e.to_string())?;
            for (lambda, sop) in &r.curve {
                println!("mer_db={:<8.3} sop={sop:e}", 10.0 * lambda.log10());
            }
            println!(
                "scheme={} slope={:.4} expected=-{} tolerance={} residual={:.2e} {}",
                r.scheme.name(),
                r.fit.slope,
                r.expected_order,
                r.tolerance,
                r.fit.residual,
                if r.passed { "PASS" } else { "FAIL" }
            );
            Ok(r.passed)
        }
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
fn set_threads(_: usize) -> Result<(), String> {
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
