use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use baxter_cli::expr::{eval_expression, parse_expression, EvalResult};
use baxter_cli::report::{render_text, summarize_json};
use baxter_cli::suites::{poset_file_suite, run_suite, SuiteOptions, SuiteReport, DEFAULT_SEED};
use baxter_core::field::{euler_lagrange, moyal_star, PhaseSeries};
use baxter_core::poset::FinitePoset;
use baxter_core::qcalc::q_binomial;
use baxter_core::series::VarId;
use baxter_core::species::LinearSpecies;

#[derive(Parser)]
#[command(
    name = "baxter",
    version,
    about = "Exact-arithmetic workbench for Rota-Baxter operators on formal series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named check suite (all, laurent, integration, qcalc, species, poset, field)
    Check {
        suite: String,
        /// Check a poset from a JSON file {"n": k, "covers": [[i, j], ...]}
        /// (only with the poset suite)
        #[arg(long)]
        poset: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        order: Option<i64>,
        #[arg(long)]
        samples: Option<u64>,
        /// Print the machine-readable JSON report instead of text
        #[arg(long)]
        json: bool,
        /// Also write the JSON report to a file
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate an expression to an exact series or coefficient
    Eval {
        expr: String,
        #[arg(long, default_value_t = 8)]
        order: i64,
        #[arg(long)]
        json: bool,
    },
    /// Print the Gaussian binomial C(n, k)_q as a q-polynomial
    Qbinom { n: u32, k: u32 },
    /// Enumerate a species given by "E", "X", "L", "zero", "one" or a
    /// JSON tree {"sum": [...]}, {"prod": [...]}, {"P": ...}, {"pos": ...}
    Species {
        desc: String,
        #[arg(long, default_value_t = 8)]
        bound: u32,
        #[arg(long)]
        json: bool,
    },
    /// Run the down-set operator checks on a poset from a JSON file
    Poset {
        file: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Euler-Lagrange derivation of a Lagrangian (a phase-series JSON file)
    El {
        file: PathBuf,
        /// Field index to vary (1-based)
        #[arg(long)]
        field: u32,
        /// Cap on the jet orders swept (defaults to the maximum occurring)
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Moyal star product of two phase-series JSON files
    Moyal {
        f: PathBuf,
        g: PathBuf,
        #[arg(long, default_value_t = 1)]
        hbar_order: u32,
        #[arg(long)]
        json: bool,
    },
    /// Summarize a saved JSON report
    Report { file: PathBuf },
}

fn emit_suite(
    report: &SuiteReport,
    json: bool,
    out: Option<&PathBuf>,
) -> Result<ExitCode, String> {
    let rendered = report.to_json_string();
    if let Some(path) = out {
        fs::write(path, &rendered).map_err(|e| format!("cannot write {:?}: {}", path, e))?;
    }
    if json {
        println!("{}", rendered);
    } else {
        print!("{}", render_text(report));
    }
    Ok(if report.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check {
            suite,
            poset,
            seed,
            order,
            samples,
            json,
            out,
        } => {
            let opts = SuiteOptions {
                seed: seed.unwrap_or(DEFAULT_SEED),
                order,
                samples,
            };
            let report = match poset {
                Some(path) => {
                    if suite != "poset" {
                        return Err("--poset only applies to the poset suite".into());
                    }
                    let value = read_json(&path)?;
                    let poset = FinitePoset::from_json(&value).map_err(|e| e.to_string())?;
                    poset_file_suite(poset, &opts)?
                }
                None => run_suite(&suite, &opts)?,
            };
            emit_suite(&report, json, out.as_ref())
        }
        Command::Eval { expr, order, json } => {
            let parsed = parse_expression(&expr).map_err(|e| e.to_string())?;
            let value = eval_expression(&parsed, order).map_err(|e| e.to_string())?;
            match value {
                EvalResult::Coefficient(c) => {
                    if json {
                        println!("{}", serde_json::json!({ "coefficient": c.to_string() }));
                    } else {
                        println!("{}", c);
                    }
                }
                EvalResult::Series(s) => {
                    if json {
                        println!("{}", s.to_json());
                    } else {
                        println!("{}", s);
                    }
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Qbinom { n, k } => {
            let b = q_binomial(n, k).map_err(|e| e.to_string())?;
            println!("{}", b);
            Ok(ExitCode::SUCCESS)
        }
        Command::Species { desc, bound, json } => {
            let value = if desc.trim_start().starts_with(['{', '[', '"']) {
                serde_json::from_str(&desc).map_err(|e| e.to_string())?
            } else {
                serde_json::Value::String(desc.clone())
            };
            let species = LinearSpecies::from_json(&value, bound).map_err(|e| e.to_string())?;
            let var = VarId::intern("x");
            let egf = species.valuation(var);
            if json {
                let counts: Vec<u64> = (0..=bound).map(|n| species.count(n)).collect();
                println!(
                    "{}",
                    serde_json::json!({ "bound": bound, "counts": counts, "egf": egf.to_json() })
                );
            } else {
                for n in 0..=bound {
                    println!("n={}: {} structures", n, species.count(n));
                }
                println!("egf: {}", egf);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Poset {
            file,
            seed,
            samples,
            json,
            out,
        } => {
            let value = read_json(&file)?;
            let poset = FinitePoset::from_json(&value).map_err(|e| e.to_string())?;
            let opts = SuiteOptions {
                seed: seed.unwrap_or(DEFAULT_SEED),
                order: None,
                samples,
            };
            let report = poset_file_suite(poset, &opts)?;
            emit_suite(&report, json, out.as_ref())
        }
        Command::El {
            file,
            field,
            cap,
            json,
        } => {
            let value = read_json(&file)?;
            let lagrangian = PhaseSeries::from_json(&value).map_err(|e| e.to_string())?;
            let cap = cap.unwrap_or_else(|| lagrangian.max_jet_order());
            let e = euler_lagrange(&lagrangian, field, cap).map_err(|e| e.to_string())?;
            if json {
                println!("{}", e.to_json());
            } else {
                println!("{}", e.series());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Moyal {
            f,
            g,
            hbar_order,
            json,
        } => {
            let fv = PhaseSeries::from_json(&read_json(&f)?).map_err(|e| e.to_string())?;
            let gv = PhaseSeries::from_json(&read_json(&g)?).map_err(|e| e.to_string())?;
            let prod = moyal_star(&fv, &gv, hbar_order).map_err(|e| e.to_string())?;
            if json {
                println!("{}", prod.to_json());
            } else {
                println!("{}", prod.series());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { file } => {
            let value = read_json(&file)?;
            print!("{}", summarize_json(&value)?);
            let ok = value.get("ok").and_then(|v| v.as_bool()).unwrap_or(false);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn read_json(path: &PathBuf) -> Result<serde_json::Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {:?}: {}", path, e))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid JSON in {:?}: {}", path, e))
}
