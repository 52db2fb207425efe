use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use quarklet::commands::{self, RunConfig};
use quarklet::falpha::{self, FalphaConfig};
use quarklet::instances::{random_coefficients, rng, InstanceShape};
use quarklet::io::{self, parse_coefficients};
use quarklet::CliError;
use quarklet_core::{CoefficientSequence, SplineOrder};

#[derive(Parser)]
#[command(
    name = "quarklet",
    version,
    about = "Near-best adaptive quarklet tree approximation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Dot,
}

#[derive(Args, Clone, Debug)]
struct ModelArgs {
    /// Spline order
    #[arg(long, default_value_t = 2)]
    m: u32,
    /// Dual order (vanishing moments)
    #[arg(long, default_value_t = 2)]
    mtilde: u32,
    /// Coarsest level; defaults to the smallest j with 2^j >= 2(m + mtilde)
    #[arg(long)]
    j0: Option<u32>,
    /// Weight exponent, must exceed 1
    #[arg(long, default_value_t = 2.0)]
    delta: f64,
}

impl ModelArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let order = SplineOrder::new(self.m, self.mtilde)?;
        let cfg = RunConfig {
            m: self.m,
            m_tilde: self.mtilde,
            j0: self.j0.unwrap_or(order.default_j0()),
            delta: self.delta,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Grow and trim a tree for a coefficient file
    Approximate {
        #[command(flatten)]
        model: ModelArgs,
        /// JSON coefficient file
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Directory for steps.csv, run.json, tree.json and tree.dot
        #[arg(long)]
        out: Option<PathBuf>,
        /// What to print on stdout
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Least-squares fits of x1^alpha on hand-built trees
    Falpha {
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 3)]
        mtilde: u32,
        #[arg(long)]
        j0: Option<u32>,
        #[arg(long, default_value_t = 2.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        /// Largest L; every L from 1 up is fitted
        #[arg(long, default_value_t = 5)]
        levels: u32,
        /// C(m, l) = count_factor * l nodes per level; defaults to m
        #[arg(long)]
        count_factor: Option<u32>,
        /// Growth steps for the adaptive comparison (0 skips it)
        #[arg(long, default_value_t = 150)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print the best errors sigma_n as CSV
    Oracle {
        #[command(flatten)]
        model: ModelArgs,
        /// Coefficient file; a seeded random instance is used otherwise
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest n
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the near-best inequality on seeded random instances
    Certify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        /// Largest N
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Convert a tree JSON file to DOT or normalised JSON
    ExportTree {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Dot)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(name), text)?;
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Approximate {
            model,
            input,
            steps,
            out,
            format,
        } => {
            let cfg = model.config()?;
            let (_, params) = cfg.validate()?;
            let c = parse_coefficients(&read(&input)?, params)?;
            let a = commands::approximate(&c, steps)?;
            if let Some(dir) = &out {
                emit(Some(dir), "steps.csv", &a.csv())?;
                emit(Some(dir), "run.json", &a.json())?;
                emit(Some(dir), "tree.json", &a.tree_json())?;
                emit(Some(dir), "tree.dot", &a.dot())?;
            }
            let text = match format {
                Format::Csv => a.csv(),
                Format::Json => a.json(),
                Format::Dot => a.dot(),
            };
            print!("{text}");
            Ok(())
        }
        Command::Falpha {
            m,
            mtilde,
            j0,
            delta,
            alpha,
            levels,
            count_factor,
            steps,
            out,
            format,
        } => {
            let order = SplineOrder::new(m, mtilde)?;
            let cfg = FalphaConfig {
                alpha,
                levels,
                order,
                j0: j0.unwrap_or(order.default_j0()),
                delta,
                count_factor: count_factor.unwrap_or(m),
                adaptive_steps: steps,
            };
            let report = falpha::run(&cfg)?;
            let (name, text) = match format {
                Format::Json => (
                    "falpha.json",
                    serde_json::to_string_pretty(&report).expect("report serializes"),
                ),
                Format::Csv => ("falpha.csv", falpha::report_to_csv(&report)),
                Format::Dot => {
                    let tree = falpha::literal_tree(levels, m, cfg.count_factor)?;
                    ("falpha_tree.dot", io::tree_to_dot(&tree))
                }
            };
            emit(out.as_deref(), name, &text)
        }
        Command::Oracle {
            model,
            input,
            seed,
            steps,
            out,
        } => {
            let cfg = model.config()?;
            let (_, params) = cfg.validate()?;
            let c: CoefficientSequence = match input {
                Some(p) => parse_coefficients(&read(&p)?, params)?,
                None => {
                    let shape = InstanceShape {
                        params,
                        ..InstanceShape::certification()
                    };
                    random_coefficients(&mut rng(seed), &shape)
                }
            };
            emit(
                out.as_deref(),
                "sigma.csv",
                &commands::oracle_table(&c, steps)?,
            )
        }
        Command::Certify {
            seed,
            instances,
            steps,
            out,
            format,
        } => {
            let reports = commands::certify(seed, instances, steps)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&reports).expect("reports serialize"),
                _ => commands::certify_csv(&reports),
            };
            emit(out.as_deref(), "certify.csv", &text)?;
            let failed: Vec<String> = reports
                .iter()
                .filter(|r| !r.passed())
                .map(|r| r.id.to_string())
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Certification(format!(
                    "instances {}",
                    failed.join(", ")
                )))
            }
        }
        Command::ExportTree { input, format, out } => {
            let tree = commands::import_tree(&read(&input)?)?;
            let (name, text) = match format {
                Format::Dot => ("tree.dot", io::tree_to_dot(&tree)),
                Format::Json => ("tree.json", io::tree_to_json(&tree)),
                Format::Csv => {
                    return Err(CliError::Input(
                        "export-tree supports --format dot or json".into(),
                    ))
                }
            };
            emit(out.as_deref(), name, &text)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
