//! `tangles` command-line driver.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 bad input.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use tangles::cft::{self, CftConfig, SweepAxis};
use tangles::qstate::{state_from_json, state_to_json};
use tangles::replica::{multi_invariant, ReplicaSpec, DEFAULT_PRODUCT_TOL};
use tangles::report::{measure_report, MeasureSet};
use tangles::separability::RoofOptions;
use tangles::states::{make_named, StateSpec};
use tangles::verify::{self, Suite, VerifyOptions};
use tangles::State;

#[derive(Parser, Debug)]
#[command(name = "tangles", version, about = "Multipartite entanglement measures and checks")]
struct Cli {
    /// Seed for every random choice (decimal or 0x-prefixed hex).
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    seed: u64,
    /// Tolerance override (roof convergence, product threshold, or verify residuals).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Sample count override for `verify`; restart count for `measure`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named state to a state file.
    State {
        /// One of ghz, w3, w4, cluster, dicke42, double_bell, g1..g9, acin.
        family: String,
        /// Family parameters, e.g. `a=0.6,b=0.8` or `q=3,R=3`.
        #[arg(long, default_value = "")]
        params: String,
        /// Keep the printed coefficients unnormalized.
        #[arg(long)]
        raw: bool,
    },
    /// Compute a measure report for a state file.
    Measure {
        state: PathBuf,
        #[arg(long, default_value = "all", value_parser = parse_set)]
        set: MeasureSet,
    },
    /// Run a verification suite.
    Verify {
        /// identities, bounds, table2, propositions, gour, wootters, named, cft or all.
        #[arg(value_parser = parse_suite)]
        suite: Suite,
    },
    /// Evaluate the replica multi-invariant Z.
    Replica {
        state: PathBuf,
        /// One permutation per site, e.g. `id;(123);(132)`.
        perms: String,
    },
    /// Third-order negativity of adjacent intervals in a large-c CFT.
    Cft {
        #[arg(long)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        z1: f64,
        #[arg(long, allow_negative_numbers = true)]
        z2: f64,
        #[arg(long, allow_negative_numbers = true)]
        z3: f64,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Sweep one of c, eps, z1, z2, z3 and emit CSV.
        #[arg(long, value_parser = parse_axis)]
        sweep: Option<SweepAxis>,
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn parse_set(s: &str) -> Result<MeasureSet, String> {
    s.parse().map_err(|e: tangles::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: tangles::Error| e.to_string())
}

fn parse_axis(s: &str) -> Result<SweepAxis, String> {
    s.parse().map_err(|e: tangles::Error| e.to_string())
}

enum Failure {
    Input(String),
    Check(String),
}

impl From<tangles::Error> for Failure {
    fn from(e: tangles::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read_state(path: &PathBuf) -> Result<State, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(state_from_json(&text)?)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn run(cli: &Cli) -> Result<String, Failure> {
    match &cli.command {
        Command::State { family, params, raw } => {
            let spec = StateSpec::parse(family, params)?;
            let psi: State = make_named(&spec, !raw)?;
            Ok(state_to_json(&psi))
        }
        Command::Measure { state, set } => {
            let psi = read_state(state)?;
            let defaults = RoofOptions::default();
            let opts = RoofOptions {
                seed: cli.seed,
                restarts: cli.samples.unwrap_or(defaults.restarts),
                tol: cli.tol.unwrap_or(defaults.tol),
                ..defaults
            };
            let report = measure_report(&psi, *set, &opts)?;
            Ok(match cli.format {
                Format::Table => report.to_table(),
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            })
        }
        Command::Verify { suite } => {
            let opts = VerifyOptions { samples: cli.samples, seed: cli.seed, tol: cli.tol };
            let report = verify::run(*suite, &opts)?;
            let text = match cli.format {
                Format::Table => report.to_table(),
                Format::Json => report.to_json(),
                Format::Csv => report.to_csv(),
            };
            if report.passed {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
        Command::Replica { state, perms } => {
            let psi = read_state(state)?;
            let spec = ReplicaSpec::parse(perms)?;
            let z = multi_invariant(&psi, &spec)?;
            let deficit = 1.0 - z.norm();
            let tol = cli.tol.unwrap_or(DEFAULT_PRODUCT_TOL);
            Ok(match cli.format {
                Format::Json => pretty(&json!({
                    "perms": spec.to_text(),
                    "replicas": spec.replicas(),
                    "z": [z.re, z.im],
                    "abs_z": z.norm(),
                    "deficit": deficit,
                    "product": spec.are_distinct() && deficit < tol,
                })),
                Format::Csv => format!("perms,replicas,re_z,im_z,abs_z,deficit\n\"{}\",{},{:e},{:e},{:e},{:e}\n", spec.to_text(), spec.replicas(), z.re, z.im, z.norm(), deficit),
                Format::Table => format!(
                    "perms     {}\nreplicas  {}\nZ         {:.15} {:+.15}i\n|Z|       {:.15}\n1 - |Z|   {:.3e}\n",
                    spec.to_text(),
                    spec.replicas(),
                    z.re,
                    z.im,
                    z.norm(),
                    deficit
                ),
            })
        }
        Command::Cft { c, z1, z2, z3, eps, sweep, from, to, steps } => {
            let cfg = CftConfig::new(*c, [*z1, *z2, *z3], *eps)?;
            if let Some(axis) = sweep {
                let (Some(from), Some(to)) = (from, to) else {
                    return Err(Failure::Input("--sweep needs --from and --to".into()));
                };
                return Ok(cft::sweep_csv(&cft::sweep(&cfg, *axis, *from, *to, *steps)?));
            }
            let b = cft::breakdown(&cfg)?;
            Ok(match cli.format {
                Format::Json => serde_json::to_string_pretty(&b).expect("breakdown serializes"),
                Format::Csv => cft::sweep_csv(&[b]),
                Format::Table => format!(
                    "twist dimension        {:.15}\nln C_123               {:.15}\ndistance term          {:.15}\nln Tr(rho^Gamma)^3     {:.15}\n",
                    b.twist_dimension, b.ln_ope, b.distance_term, b.ln_tr_neg3
                ),
            })
        }
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => match emit(&cli, &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(Failure::Check(text)) => {
            if let Err(e) = emit(&cli, &text) {
                eprintln!("error: {e}");
            }
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
