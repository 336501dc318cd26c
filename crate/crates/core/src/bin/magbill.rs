use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use magbill::cli::{emit_csv, load_config, parse_unitary_record, run_file, sae1d_table};
use magbill::gauge::PhysicalParams;
use magbill::selfadjoint1d::Interval;

#[derive(Parser)]
#[command(name = "magbill", version, about = "Spectra of magnetic Laplacians on planar billiards")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSVs plus manifest.txt.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; falls back to MAGBILL_THREADS.
        #[arg(long)]
        threads: Option<usize>,
        /// Solver seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Interval spectra for U = exp(i theta) I over a theta range, or for
    /// an explicit 2x2 unitary.
    Sae1d {
        #[arg(long, default_value_t = std::f64::consts::PI)]
        length: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        theta_from: f64,
        #[arg(long, default_value_t = 5.5)]
        theta_to: f64,
        #[arg(long, default_value_t = 11)]
        count: usize,
        /// Row-major `re,im` pairs of u11 u12 u21 u22.
        #[arg(long)]
        u: Option<String>,
        /// Write eigenvalues.csv here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a config without running it.
    Check { config: PathBuf },
}

fn threads(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("MAGBILL_THREADS").ok().and_then(|v| v.parse().ok()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, threads: t, seed } => {
            if let Some(n) = threads(t) {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("magbill: {e}");
                    return ExitCode::from(2);
                }
            }
            match run_file(&config, out.as_deref(), seed) {
                Ok(m) => {
                    print!("{}", m.render());
                    if m.passed() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("magbill: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Sae1d { length, n, k, theta_from, theta_to, count, u, out } => {
            let result = (|| {
                let interval = Interval::new(length, n)?;
                let unitary = u.as_deref().map(parse_unitary_record).transpose()?;
                let thetas: Vec<f64> = if count < 2 {
                    vec![theta_from]
                } else {
                    (0..count)
                        .map(|i| theta_from + (theta_to - theta_from) * i as f64 / (count - 1) as f64)
                        .collect()
                };
                let table = sae1d_table(&thetas, unitary.as_ref(), interval, k, PhysicalParams::default())?;
                match &out {
                    Some(dir) => emit_csv(&table, &dir.join("eigenvalues.csv")),
                    None => {
                        print!("{}", table.render());
                        Ok(())
                    }
                }
            })();
            match result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("magbill: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Check { config } => match load_config(&config) {
            Ok(_) => {
                println!("ok");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("magbill: {e}");
                ExitCode::from(1)
            }
        },
    }
}
