use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use f2::error::{CliError, Result};
use f2::suites::{run_suite, RunConfig, SuiteResult, SUITES};
use f2core::conjugacy::{c_path, classify_pair, line_points};
use f2core::export::{
    block_to_dot, block_to_json, farey_to_dot, farey_to_json, structure_from_json, structure_to_dot, structure_to_json,
};
use f2core::factor_graph::{build_ext, DEFAULT_LEVEL_CAP};
use f2core::farey::{build_farey, label_farey};
use f2core::model::{amalgamate, minimal_chain, removable_components, validate_admissible, AdmissibleStructure};
use f2core::primitive::{is_basis, is_basis_by_commutator, is_primitive, nielsen_reduce};
use f2core::{Vertex, Word};

#[derive(Parser)]
#[command(name = "f2", version, about = "Computations in the free factor complex of F2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites.
    Verify {
        /// Suite name, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        window: Option<u32>,
        #[arg(long)]
        trials: Option<usize>,
        /// Replay a single trial.
        #[arg(long)]
        trial: Option<u64>,
        #[arg(long)]
        level_cap: Option<u32>,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// List the registered suites and exit.
        #[arg(long)]
        list: bool,
    },
    /// Decide primitivity of a word.
    Primitive { word: Word },
    /// Decide whether two words form a basis, by both oracles.
    Basis { u: Word, v: Word },
    /// Build the block Ext_k(x, y).
    Ext {
        x: Vertex,
        y: Vertex,
        #[arg(long, short, default_value_t = 1)]
        level: u32,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build (and optionally label) the Farey graph.
    Farey {
        #[arg(long, default_value_t = 2)]
        levels: u32,
        #[arg(long)]
        labels: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// The unique C-path between two conjugate vertices.
    Cpath { u: Vertex, v: Vertex },
    /// Parallel or orthogonal, for vertices at C-distance 2.
    Classify { u: Vertex, v: Vertex },
    /// Windowed points of the line through a C-edge.
    Line {
        u: Vertex,
        v: Vertex,
        #[arg(long, default_value_t = 3)]
        window: u32,
    },
    /// Admissible structures stored as JSON.
    Admissible {
        #[command(subcommand)]
        action: Admissible,
    },
}

#[derive(Subcommand)]
enum Admissible {
    /// Check conditions (1)-(7) and list removable components.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Amalgamate B and C over A.
    Amalgamate {
        #[arg(long = "in", num_args = 3, value_names = ["A", "B", "C"])]
        inputs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A chain of minimal strong extensions from A to B.
    Chain {
        #[arg(long = "in", num_args = 2, value_names = ["A", "B"])]
        inputs: Vec<PathBuf>,
    },
}

fn level_cap() -> Result<u32> {
    match std::env::var("F2_LEVEL_CAP") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Config(format!("F2_LEVEL_CAP={s:?} is not a level"))),
        Err(_) => Ok(DEFAULT_LEVEL_CAP),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_structure(path: &Path) -> Result<AdmissibleStructure> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(structure_from_json(&text)?)
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn summary(r: &SuiteResult) -> String {
    let status = if r.passed() { "PASS" } else { "FAIL" };
    format!(
        "{status} {:<22} {} trials, {} skipped, {} failures, {} ms",
        r.suite,
        r.trials,
        r.skipped,
        r.failures.len(),
        r.wall_ms
    )
}

/// `Ok(false)` when a check fails (exit 1); errors are configuration or
/// input problems (exit 2).
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { suite, seed, window, trials, trial, level_cap: cap, out, list } => {
            if list {
                SUITES.iter().for_each(|s| println!("{s}"));
                return Ok(true);
            }
            let defaults = RunConfig::default();
            let cfg = RunConfig {
                seed: seed.unwrap_or(defaults.seed),
                window: window.unwrap_or(defaults.window),
                level_cap: match (cap, std::env::var_os("F2_LEVEL_CAP")) {
                    (Some(c), _) => c,
                    (None, Some(_)) => level_cap()?,
                    (None, None) => defaults.level_cap,
                },
                trials,
                only: trial,
            };
            let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite.as_str()] };
            let mut results = Vec::new();
            for name in names {
                let r = run_suite(name, &cfg)?;
                println!("{}", summary(&r));
                for f in r.failures.iter().take(5) {
                    println!(
                        "  trial {} (seed {}): {}: expected {}, got {}",
                        f.trial, f.seed, f.inputs, f.expected, f.actual
                    );
                }
                results.push(r);
            }
            if let Some(path) = out {
                emit(&json(&results), Some(&path))?;
            }
            Ok(results.iter().all(SuiteResult::passed))
        }
        Command::Primitive { word } => {
            let (primitive, cert) = is_primitive(&word);
            println!("{word}: {}", if primitive { "primitive" } else { "not primitive" });
            println!("{cert:?}");
            Ok(true)
        }
        Command::Basis { u, v } => {
            let red = nielsen_reduce(&u, &v);
            println!("Nielsen: {} ({} moves)", is_basis(&u, &v), red.moves.len());
            println!("commutator: {}", is_basis_by_commutator(&u, &v));
            Ok(true)
        }
        Command::Ext { x, y, level, format, out } => {
            let g = build_ext((&x, &y), level, level_cap()?)?;
            let text = match format {
                Format::Json => block_to_json(&g),
                Format::Dot => block_to_dot(&g),
            };
            emit(&text, out.as_deref())?;
            Ok(true)
        }
        Command::Farey { levels, labels, format, out } => {
            let mut g = build_farey(levels, f2::suites::FAREY_CAP)?;
            if labels {
                g = label_farey(&g);
            }
            let text = match format {
                Format::Json => farey_to_json(&g),
                Format::Dot => farey_to_dot(&g),
            };
            emit(&text, out.as_deref())?;
            Ok(true)
        }
        Command::Cpath { u, v } => {
            let path: Vec<String> = c_path(&u, &v)?.iter().map(|p| p.to_string()).collect();
            println!("{}", path.join(" ~ "));
            Ok(true)
        }
        Command::Classify { u, v } => {
            print!("{}", json(&classify_pair(&u, &v)?));
            Ok(true)
        }
        Command::Line { u, v, window } => {
            for p in line_points(&u, &v, window)? {
                println!("{p}");
            }
            Ok(true)
        }
        Command::Admissible { action } => match action {
            Admissible::Validate { input } => {
                let m = read_structure(&input)?;
                let report = validate_admissible(&m);
                print!("{}", json(&report));
                let removable: Vec<usize> = removable_components(&m).into_iter().collect();
                println!("removable: {removable:?}");
                Ok(report.is_valid())
            }
            Admissible::Amalgamate { inputs, format, out } => {
                let [a, b, c] = [&inputs[0], &inputs[1], &inputs[2]].map(|p| read_structure(p));
                let d = amalgamate(&a?, &b?, &c?)?;
                eprintln!("cases: {:?}; C ids in D: {:?}", d.cases, d.c_map);
                let text = match format {
                    Format::Json => structure_to_json(&d.structure),
                    Format::Dot => structure_to_dot(&d.structure),
                };
                emit(&text, out.as_deref())?;
                Ok(true)
            }
            Admissible::Chain { inputs } => {
                let (a, b) = (read_structure(&inputs[0])?, read_structure(&inputs[1])?);
                let chain = minimal_chain(&a, &b)?;
                for (i, step) in chain.iter().enumerate() {
                    let levels: Vec<String> = step.components().map(|c| format!("{}@{}", c.id, c.level)).collect();
                    println!("B{i}: {}", levels.join(" "));
                }
                Ok(true)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
