use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kmatch::{parse_stream, write_stream, DynamicConfig, StreamFile};
use kmatch_harness::accept::{self, is_known_failure};
use kmatch_harness::bench::{bench, BenchMode, BenchSpec};
use kmatch_harness::gen::{self, RandomSpec, WeightDist};
use kmatch_harness::run::{render_text, run_dyn, run_ins, run_oracle};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "kmatch", version, about = "Streaming maximum-weight k-matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    /// Matching size; defaults to the stream header's k.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run the insert-only matcher over an `ins` stream file.
    RunIns {
        stream: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Failure probability; sets the number of partition hashes.
        #[arg(long, default_value_t = 0.0625)]
        epsilon: f64,
    },
    /// Run the dynamic matcher over a `dyn` stream file.
    RunDyn {
        stream: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Use the approximate matcher with this epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Sampler failure probability instead of the default for k.
        #[arg(long)]
        delta_override: Option<f64>,
        /// Reject illegal updates (duplicate inserts, phantom deletes).
        #[arg(long)]
        validate: bool,
    },
    /// Materialize a stream file and solve it exactly.
    Oracle {
        stream: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write a generated stream to standard output.
    Gen {
        #[command(subcommand)]
        family: Family,
    },
    /// Seeded trials on random streams with per-update instrumentation.
    Bench {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long, default_value_t = 100)]
        n: u32,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta_override: Option<f64>,
        #[arg(long, default_value_t = 500)]
        inserts: usize,
        #[arg(long, default_value_t = 0)]
        deletes: usize,
        #[arg(long, default_value_t = 1.0)]
        wmin: f64,
        #[arg(long, default_value_t = 100.0)]
        wmax: f64,
        #[arg(long)]
        log_uniform: bool,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Run the acceptance criteria and print one line per criterion.
    Accept {
        /// Run only these criteria (1 to 10).
        #[arg(long = "only", value_delimiter = ',')]
        only: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Exit with status 2 when a criterion outside the known failures fails.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ins,
    Dyn,
}

#[derive(Subcommand)]
enum Family {
    /// Random stream; `--deletes` > 0 or `--dyn` makes it dynamic.
    Random {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        inserts: usize,
        #[arg(long, default_value_t = 0)]
        deletes: usize,
        #[arg(long = "dyn")]
        dynamic: bool,
        #[arg(long, default_value_t = 1.0)]
        wmin: f64,
        #[arg(long, default_value_t = 100.0)]
        wmax: f64,
        #[arg(long)]
        log_uniform: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Index family: a 2k1-matching exists iff bit z of x is 1.
    IndexHard {
        /// Bit string such as 1010; the first character is bit 1.
        #[arg(long)]
        x: String,
        #[arg(long)]
        z: usize,
        #[arg(long)]
        n: u32,
    },
    /// Partial-maximum family: a path weighted by A, then deletions of B.
    PartialMaxHard {
        /// Comma-separated distinct values.
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<u64>,
        /// Comma-separated 1-based indices to delete.
        #[arg(long, value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long)]
        n: u32,
    },
}

fn read_stream(path: &PathBuf) -> Result<StreamFile, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_stream(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit<T: Serialize>(report: &T, format: Format) {
    match format {
        Format::Text => print!("{}", render_text(report)),
        Format::Json => println!("{}", serde_json::to_string_pretty(report).expect("reports serialize")),
    }
}

fn weights(wmin: f64, wmax: f64, log_uniform: bool) -> WeightDist {
    if log_uniform {
        WeightDist::LogUniform { lo: wmin, hi: wmax }
    } else {
        WeightDist::Uniform { lo: wmin, hi: wmax }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let err = |e: kmatch::Error| e.to_string();
    match cli.command {
        Command::RunIns {
            stream,
            common,
            epsilon,
        } => {
            let file = read_stream(&stream)?;
            emit(
                &run_ins(&file, common.k, epsilon, common.seed).map_err(err)?,
                common.format,
            );
        }
        Command::RunDyn {
            stream,
            common,
            epsilon,
            delta_override,
            validate,
        } => {
            let file = read_stream(&stream)?;
            let config = DynamicConfig {
                delta_override,
                validate,
            };
            emit(
                &run_dyn(&file, common.k, epsilon, config, common.seed).map_err(err)?,
                common.format,
            );
        }
        Command::Oracle { stream, common } => {
            let file = read_stream(&stream)?;
            emit(&run_oracle(&file, common.k).map_err(err)?, common.format);
        }
        Command::Gen { family } => {
            let text = match family {
                Family::Random {
                    n,
                    k,
                    inserts,
                    deletes,
                    dynamic,
                    wmin,
                    wmax,
                    log_uniform,
                    seed,
                } => {
                    let spec = RandomSpec {
                        n,
                        k,
                        inserts,
                        deletes,
                        weights: weights(wmin, wmax, log_uniform),
                        seed,
                    };
                    if dynamic || deletes > 0 {
                        write_stream(&gen::random_dynamic_stream(&spec).map_err(err)?)
                    } else {
                        write_stream(&gen::random_insert_stream(&spec).map_err(err)?)
                    }
                }
                Family::IndexHard { x, z, n } => {
                    let bits = x
                        .chars()
                        .map(|c| match c {
                            '0' => Ok(false),
                            '1' => Ok(true),
                            other => Err(format!("--x takes 0s and 1s, found `{other}`")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    write_stream(&gen::index_hard(&bits, z, n).map_err(err)?)
                }
                Family::PartialMaxHard { a, b, n } => {
                    let b: BTreeSet<usize> = b.into_iter().collect();
                    write_stream(&gen::partial_max_hard(&a, &b, n).map_err(err)?)
                }
            };
            print!("{text}");
        }
        Command::Bench {
            mode,
            n,
            k,
            epsilon,
            delta_override,
            inserts,
            deletes,
            wmin,
            wmax,
            log_uniform,
            trials,
            seed,
            format,
        } => {
            let spec = BenchSpec {
                mode: match mode {
                    ModeArg::Ins => BenchMode::Ins,
                    ModeArg::Dyn => BenchMode::Dyn,
                },
                n,
                k,
                epsilon,
                delta_override,
                inserts,
                deletes,
                weights: weights(wmin, wmax, log_uniform),
                trials,
                seed,
            };
            let report = bench(&spec).map_err(err)?;
            emit(&report, format);
            if !report.within_budget {
                eprintln!("error: per-update work exceeded its budget");
                return Ok(ExitCode::from(1));
            }
        }
        Command::Accept {
            only,
            seed,
            format,
            strict,
        } => {
            if let Some(bad) = only.iter().find(|&&id| !(1..=10).contains(&id)) {
                return Err(format!("--only takes criteria 1 to 10, got {bad}"));
            }
            let ids: Vec<u32> = if only.is_empty() { (1..=10).collect() } else { only };
            let mut outcomes = Vec::new();
            for id in ids {
                let o = accept::run_criterion(id, seed);
                if let Format::Text = format {
                    println!("{}", o.line());
                }
                outcomes.push(o);
            }
            if let Format::Json = format {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcomes).expect("outcomes serialize")
                );
            }
            let unexpected = outcomes.iter().any(|o| !o.passed && !is_known_failure(o.id));
            if strict && unexpected {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
