use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use paclab::experiments::runner::{self, unix_timestamp, RunReport, VERSION};
use paclab::experiments::{make_fixture, ExperimentConfig, FIXTURES};
use paclab::PacError;

/// Agnostic PAC learning experiments over finite domains.
#[derive(Debug, Parser)]
#[command(name = "paclab", version = VERSION)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file.
    Run {
        config: PathBuf,
        /// Worker threads; overrides PACLAB_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List the built-in fixtures with their optimal error and VC dimension.
    Fixtures,
    /// Run the identity suite plus a small sweep and lower-bound run.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for the three CSV files.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the version.
    Version,
}

fn write_file(path: &Path, text: &str) -> Result<(), PacError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| PacError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| PacError::Io(format!("{}: {e}", path.display())))
}

fn emit(report: &RunReport, output: Option<&Path>, trace: Option<&Path>) -> Result<(), PacError> {
    let stamp = unix_timestamp();
    match output {
        Some(p) => {
            write_file(p, &report.to_csv(stamp))?;
            print!("{}", report.summary_text());
            println!("wrote {} rows to {}", report.table.rows.len(), p.display());
        }
        None => {
            print!("{}", report.to_csv(stamp));
            eprint!("{}", report.summary_text());
        }
    }
    if let (Some(path), Some(table)) = (trace, &report.trace) {
        write_file(path, &format!("{}{}", report.metadata(stamp), table.to_csv()))?;
    }
    Ok(())
}

fn run(config: &Path, threads: Option<usize>) -> Result<(), PacError> {
    let cfg = ExperimentConfig::from_file(config)?;
    let report = runner::run(&cfg, threads)?;
    emit(&report, cfg.output.as_deref(), cfg.trace_output.as_deref())
}

fn fixtures() -> Result<(), PacError> {
    println!("{:<20} {:<30} {:>6} {:>10} {:>4}  description", "name", "arguments", "size", "tau", "vc");
    for (name, args, about) in FIXTURES {
        let f = make_fixture(name)?;
        println!("{name:<20} {args:<30} {:>6} {:>10.6} {:>4}  {about}", f.members.len(), f.tau, f.vc);
    }
    Ok(())
}

fn selftest(seed: u64, output: Option<&Path>, instances: usize, threads: Option<usize>) -> Result<bool, PacError> {
    let reports = runner::selftest(seed, instances, threads)?;
    let stamp = unix_timestamp();
    let mut ok = true;
    for (name, report) in &reports {
        println!("== {name}");
        print!("{}", report.summary_text());
        if let Some(dir) = output {
            write_file(&dir.join(format!("{name}.csv")), &report.to_csv(stamp))?;
        }
        if *name == "identities" {
            ok &= report
                .summary
                .iter()
                .filter(|s| s.metric == "failure_rate")
                .all(|s| s.mean == 0.0);
        }
    }
    println!("selftest {}", if ok { "passed" } else { "FAILED" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, threads } => run(&config, threads).map(|_| true),
        Command::Fixtures => fixtures().map(|_| true),
        Command::Selftest {
            seed,
            output,
            instances,
            threads,
        } => selftest(seed, output.as_deref(), instances, threads),
        Command::Version => {
            println!("paclab {VERSION}");
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e @ PacError::Config { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
