use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ncerg::acceptance::{run_suite, SuiteConfig};
use ncerg::averaging::DEFAULT_ORDER;
use ncerg::report::Report;
use ncerg::scenario::{self, SCENARIO_SCHEMA};

#[derive(Parser)]
#[command(name = "ncerg", version, about = "Finite-dimensional laboratory for local ergodic averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario and write its report (and CSV, if any).
    Run {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the embedded acceptance suite.
    Selftest {
        #[arg(long)]
        seed: Option<u64>,
        /// Also write selftest.json into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true)]
        debug_quad_order: Option<usize>,
    },
    /// Print the rearrangement μ(x), optionally sampled at --t points.
    Mu {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
    /// Evaluate a norm of x.
    Norm {
        #[command(flatten)]
        element: ElementArgs,
        /// JSON descriptor, or one of lp:P, l1+linf, l1&linf.
        #[arg(long)]
        norm: String,
    },
    /// Compute the average A_t(x) for a semigroup family.
    Average {
        #[command(flatten)]
        element: ElementArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "phi1", value_parser = ["phi1", "quad"])]
        method: String,
        #[arg(long, default_value_t = DEFAULT_ORDER)]
        order: usize,
    },
}

#[derive(Args)]
struct ElementArgs {
    /// Algebra as JSON, e.g. [[2,1.0],[1,0.5]] (dimension, weight) pairs.
    #[arg(long)]
    shape: Option<String>,
    /// Semigroup family as JSON, e.g. {"family":"heat_cycle","n":8}.
    #[arg(long)]
    family: Option<String>,
    /// Comma-separated block diagonals.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, group = "elem")]
    diag: Option<Vec<f64>>,
    /// Block literal as JSON: blocks of rows of [re, im] pairs.
    #[arg(long, group = "elem")]
    literal: Option<String>,
    #[arg(long, group = "elem")]
    random_positive: Option<u64>,
    #[arg(long, group = "elem")]
    random: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_json(flag: &str, s: &str) -> Result<Value, String> {
    serde_json::from_str(s).map_err(|e| format!("--{flag}: {e}"))
}

fn norm_value(s: &str) -> Result<Value, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return parse_json("norm", s);
    }
    if let Some(p) = s.strip_prefix("lp:") {
        let p: Value = if p == "inf" {
            json!("inf")
        } else {
            json!(p.parse::<f64>().map_err(|e| format!("--norm: {e}"))?)
        };
        return Ok(json!({ "kind": "lp", "p": p }));
    }
    match s {
        "l1+linf" | "l1&linf" => Ok(json!({ "kind": s })),
        _ => Err(format!("--norm: unrecognised descriptor {s:?}")),
    }
}

fn base_scenario(e: &ElementArgs, experiment: Value) -> Result<Value, String> {
    let mut sc = json!({ "schema": SCENARIO_SCHEMA, "experiment": experiment });
    if let Some(s) = &e.shape {
        sc["algebra"] = parse_json("shape", s)?;
    }
    if let Some(f) = &e.family {
        sc["semigroup"] = parse_json("family", f)?;
    }
    let element = if let Some(d) = &e.diag {
        json!({ "kind": "diagonal", "values": d })
    } else if let Some(l) = &e.literal {
        json!({ "kind": "literal", "blocks": parse_json("literal", l)? })
    } else if let Some(s) = e.random_positive {
        json!({ "kind": "random_positive", "seed": s })
    } else if let Some(s) = e.random {
        json!({ "kind": "random", "seed": s })
    } else {
        return Err("an element is required: --diag, --literal, --random-positive or --random".into());
    };
    sc["element"] = element;
    Ok(sc)
}

fn direct(e: &ElementArgs, experiment: Value) -> ExitCode {
    let sc = match base_scenario(e, experiment) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match scenario::execute(&sc.to_string(), e.seed) {
        Ok(out) => {
            print!("{}", out.report_json);
            ExitCode::from(out.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn selftest(seed: Option<u64>, out: Option<PathBuf>, quad_order: Option<usize>) -> ExitCode {
    let mut cfg = SuiteConfig::default();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(q) = quad_order {
        cfg.quad_order = q;
    }
    let suite = run_suite(&cfg);
    print!("{}", suite.table());
    let failed = suite.criteria.iter().filter(|c| !c.passed).count();
    println!("{} of {} criteria passed", suite.criteria.len() - failed, suite.criteria.len());
    if let Some(dir) = out {
        let rep = Report::new("selftest", cfg.seed, &suite);
        let res = std::fs::create_dir_all(&dir)
            .map_err(ncerg::Error::from)
            .and_then(|_| rep.write_json(&dir.join("selftest.json")));
        if let Err(e) = res {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if suite.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    ncerg::lab::configure_threads();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, seed } => match scenario::run_scenario(&scenario, &out, seed) {
            Ok(r) => {
                println!("{}", r.summary);
                println!("report: {}", r.report_path.display());
                if let Some(c) = r.csv_path {
                    println!("csv: {}", c.display());
                }
                ExitCode::from(r.exit_code as u8)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Selftest { seed, out, debug_quad_order } => selftest(seed, out, debug_quad_order),
        Command::Mu { element, t } => direct(&element, json!({ "type": "mu", "t": t })),
        Command::Norm { element, norm } => match norm_value(&norm) {
            Ok(n) => direct(&element, json!({ "type": "norm", "norm": n })),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(1)
            }
        },
        Command::Average { element, t, method, order } => {
            let m = if method == "quad" {
                json!({ "method": "quad", "order": order })
            } else {
                json!({ "method": "phi1" })
            };
            direct(&element, json!({ "type": "average", "t": t, "method": m }))
        }
    }
}
