//! JSON scenarios: parsing, validation and dispatch to the experiments.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{AlgebraShape, Operator, OperatorLiteral};
use crate::averaging::{average, average_quadrature, AveragingMethod};
use crate::dynamics::{
    cyclic_shift, make_family, verify_ds_plus, ComplexMatrixLiteral, FamilySpec, RealMatrix, Semigroup,
    Superoperator, DS_TOL,
};
use crate::error::{Error, Result};
use crate::lab::{self, MaximalStrategy, BOUND_SLACK};
use crate::random;
use crate::rearrangement::Rearrangeable;
use crate::report::{self, Report};
use crate::spaces::{space_traits, NormDescriptor};
use crate::{CMatrix, C64};

pub const SCENARIO_SCHEMA: &str = "ncerg.scenario/1";

/// Exit code for a completed run.
pub const EXIT_OK: i32 = 0;
/// Exit code for validation, parse and I/O failures.
pub const EXIT_INVALID: i32 = 1;
/// Exit code when a bound check reported a violation.
pub const EXIT_BOUND_VIOLATION: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub algebra: Option<AlgebraShape>,
    #[serde(default)]
    pub element: Option<ElementSpec>,
    #[serde(default)]
    pub semigroup: Option<FamilySpec>,
    pub experiment: Experiment,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ElementSpec {
    Literal { blocks: OperatorLiteral },
    /// Concatenated block diagonals.
    Diagonal { values: Vec<f64> },
    /// a*a / ‖a*a‖_∞ for Gaussian a.
    RandomPositive {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Gaussian self-adjoint element.
    Random {
        #[serde(default)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    /// x ↦ c·x.
    Scale { factor: f64 },
    /// T_u of the scenario semigroup.
    Evolve { u: Vec<f64> },
    /// The averaging map A_t of the scenario semigroup.
    Average { t: f64 },
    CyclicShift { n: usize },
    /// Matrix acting on the atoms of a commutative algebra.
    AtomMatrix { m: RealMatrix },
    /// Matrix in the Hilbert–Schmidt basis of the scenario algebra.
    Raw { matrix: ComplexMatrixLiteral },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateParams {
    pub t0: f64,
    pub t_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    Mu {
        #[serde(default)]
        t: Vec<f64>,
    },
    Norm {
        norm: NormDescriptor,
    },
    DsVerify {
        map: MapSpec,
    },
    Average {
        t: f64,
        #[serde(default)]
        method: AveragingMethod,
    },
    Converge {
        norm: NormDescriptor,
        t_grid: Vec<f64>,
    },
    Maximal {
        lambda: f64,
        #[serde(default = "default_strategy")]
        strategy: MaximalStrategy,
        #[serde(default)]
        t_grid: Option<Vec<f64>>,
        /// When present, run the discrete check for this map instead.
        #[serde(default)]
        map: Option<MapSpec>,
        #[serde(default = "default_n")]
        n: usize,
    },
    Bounds {
        #[serde(default = "default_p", with = "crate::spaces::exponent")]
        p: f64,
        #[serde(default = "default_slack")]
        slack: f64,
        #[serde(default)]
        rate: Option<RateParams>,
        #[serde(default)]
        continuity: Option<Vec<(f64, f64)>>,
        #[serde(default)]
        dyadic: Option<Vec<f64>>,
    },
}

fn default_strategy() -> MaximalStrategy {
    MaximalStrategy::Chebyshev
}

fn default_n() -> usize {
    50
}

fn default_p() -> f64 {
    1.0
}

fn default_slack() -> f64 {
    BOUND_SLACK
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Mu { .. } => "mu",
            Experiment::Norm { .. } => "norm",
            Experiment::DsVerify { .. } => "ds-verify",
            Experiment::Average { .. } => "average",
            Experiment::Converge { .. } => "converge",
            Experiment::Maximal { .. } => "maximal",
            Experiment::Bounds { .. } => "bounds",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report file name, relative to the output directory.
    #[serde(default)]
    pub report: Option<String>,
    /// CSV file name; `converge` always writes one.
    #[serde(default)]
    pub csv: Option<String>,
}

/// What a scenario produced, before anything is written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub report_json: String,
    pub csv: Option<String>,
    pub summary: String,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub report_path: PathBuf,
    pub csv_path: Option<PathBuf>,
    pub summary: String,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let sc: Scenario =
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    if sc.schema != SCENARIO_SCHEMA {
        return Err(Error::Scenario(format!(
            "schema: expected \"{SCENARIO_SCHEMA}\", got \"{}\"",
            sc.schema
        )));
    }
    Ok(sc)
}

fn field<T>(name: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Scenario(format!("{name}: {e}")))
}

struct Context {
    sc: Scenario,
    seed: u64,
    semigroup: Option<Semigroup>,
}

impl Context {
    fn new(sc: Scenario, seed: u64) -> Result<Self> {
        let semigroup = match &sc.semigroup {
            Some(spec) => Some(field("semigroup", make_family(spec))?),
            None => None,
        };
        if let (Some(a), Some(sg)) = (&sc.algebra, &semigroup) {
            if a != sg.shape() {
                return Err(Error::Scenario("algebra: does not match the semigroup's algebra".into()));
            }
        }
        Ok(Context { sc, seed, semigroup })
    }

    fn shape(&self) -> Result<AlgebraShape> {
        self.sc
            .algebra
            .clone()
            .or_else(|| self.semigroup.as_ref().map(|s| s.shape().clone()))
            .ok_or_else(|| Error::Scenario("algebra: required (or implied by semigroup)".into()))
    }

    fn semigroup(&self) -> Result<&Semigroup> {
        self.semigroup
            .as_ref()
            .ok_or_else(|| Error::Scenario(format!("semigroup: required by {}", self.sc.experiment.name())))
    }

    fn element(&self) -> Result<Operator> {
        let spec = self
            .sc
            .element
            .as_ref()
            .ok_or_else(|| Error::Scenario(format!("element: required by {}", self.sc.experiment.name())))?;
        let shape = self.shape()?;
        field(
            "element",
            match spec {
                ElementSpec::Literal { blocks } => Operator::from_literal(&shape, blocks),
                ElementSpec::Diagonal { values } => Operator::diagonal(&shape, values),
                ElementSpec::RandomPositive { seed } => {
                    Ok(random::positive(&mut random::rng(seed.unwrap_or(self.seed)), &shape))
                }
                ElementSpec::Random { seed } => {
                    Ok(random::selfadjoint(&mut random::rng(seed.unwrap_or(self.seed)), &shape))
                }
            },
        )
    }

    fn map(&self, spec: &MapSpec) -> Result<Superoperator> {
        field(
            "experiment.map",
            match spec {
                MapSpec::Scale { factor } => Ok(Superoperator::scaled_identity(&self.shape()?, *factor)),
                MapSpec::Evolve { u } => self.semigroup()?.map_at(u),
                MapSpec::Average { t } => crate::averaging::average_map_phi1(self.semigroup()?, *t),
                MapSpec::CyclicShift { n } => {
                    let m = cyclic_shift(*n)?;
                    match &self.sc.algebra {
                        Some(a) if a != m.shape() => {
                            Err(Error::ShapeMismatch("cyclic shift acts on n weight-1 atoms".into()))
                        }
                        _ => Ok(m),
                    }
                }
                MapSpec::AtomMatrix { m } => Superoperator::from_atom_matrix(&self.shape()?, m),
                MapSpec::Raw { matrix } => {
                    let n = matrix.len();
                    if matrix.iter().any(|r| r.len() != n) {
                        return Err(Error::Scenario("experiment.map: raw matrix is not square".into()));
                    }
                    let m = CMatrix::from_fn(n, n, |i, j| C64::new(matrix[i][j][0], matrix[i][j][1]));
                    Superoperator::new(self.shape()?, m)
                }
            },
        )
    }
}

/// Validate and run a scenario held in memory.
pub fn execute(text: &str, seed_override: Option<u64>) -> Result<Outcome> {
    let sc = parse_scenario(text)?;
    let seed = seed_override.or(sc.seed).unwrap_or(random::DEFAULT_SEED);
    let hash = report::sha256_hex(text.as_bytes());
    let name = sc.experiment.name();
    let ctx = Context::new(sc, seed)?;
    let mut exit_code = EXIT_OK;
    let mut csv = None;
    let (result, summary): (Value, String) = match &ctx.sc.experiment {
        Experiment::Mu { t } => {
            let x = ctx.element()?;
            let f = x.mu();
            if let Some(bad) = t.iter().find(|s| !(**s >= 0.0)) {
                return Err(Error::Scenario(format!("experiment.t: {bad} is negative")));
            }
            let samples: Vec<(f64, f64)> = t.iter().map(|&s| (s, f.eval(s))).collect();
            if ctx.sc.output.csv.is_some() {
                let rows: Vec<Vec<f64>> = samples.iter().map(|&(s, v)| vec![s, v]).collect();
                csv = Some(report::csv_table(&["t", "mu"], &rows));
            }
            let summary = format!("mu: {} pieces, mu_0 = {}", f.knots().len(), f.sup());
            (json!({ "mu": f, "samples": samples }), summary)
        }
        Experiment::Norm { norm } => {
            let x = ctx.element()?;
            let value = field("experiment.norm", norm.norm(&x))?;
            let traits = space_traits(norm)?;
            (
                json!({ "norm": norm, "label": norm.label(), "value": value, "traits": traits }),
                format!("{} = {}", norm.label(), value),
            )
        }
        Experiment::DsVerify { map } => {
            let t = ctx.map(map)?;
            let cert = verify_ds_plus(&t, DS_TOL);
            let summary = format!("DS+ verdict: {}", cert.verdict);
            (serde_json::to_value(cert)?, summary)
        }
        Experiment::Average { t, method } => {
            let sg = ctx.semigroup()?;
            let x = ctx.element()?;
            let value = field("experiment", average(sg, &x, *t, *method))?;
            let error_estimate = match method {
                AveragingMethod::Quadrature { order } => Some(average_quadrature(sg, &x, *t, *order)?.error_estimate),
                AveragingMethod::Phi1Exact => None,
            };
            let summary = format!("A_{t}(x): ‖·‖_∞ = {}", value.norm_inf());
            (
                json!({
                    "t": t,
                    "method": method,
                    "semigroup": sg.label,
                    "value": value.to_literal(),
                    "error_estimate": error_estimate,
                }),
                summary,
            )
        }
        Experiment::Converge { norm, t_grid } => {
            let sg = ctx.semigroup()?;
            let x = ctx.element()?;
            let rep = field("experiment", lab::mean_convergence_table(sg, &x, norm, t_grid))?;
            csv = Some(report::convergence_csv(&rep));
            let summary = format!("final_ratio = {}", rep.final_ratio);
            (serde_json::to_value(rep)?, summary)
        }
        Experiment::Maximal { lambda, strategy, t_grid, map, n } => {
            let x = ctx.element()?;
            let rep = match map {
                Some(m) => {
                    let t = ctx.map(m)?;
                    field("experiment", lab::yeadon_discrete_check(&t, &x, *lambda, *n))?
                }
                None => {
                    let sg = ctx.semigroup()?;
                    let grid = t_grid.clone().unwrap_or_else(lab::default_maximal_grid);
                    field("experiment", lab::maximal_projection_search(sg, &x, *lambda, &grid, *strategy))?
                }
            };
            let summary = format!(
                "projection_found = {}, achieved_constant = {}",
                rep.projection_found, rep.achieved_constant
            );
            (serde_json::to_value(rep)?, summary)
        }
        Experiment::Bounds { p, slack, rate, continuity, dyadic } => {
            let sg = ctx.semigroup()?;
            let x = ctx.element()?;
            if rate.is_none() && continuity.is_none() && dyadic.is_none() {
                return Err(Error::Scenario("experiment: bounds needs rate, continuity or dyadic".into()));
            }
            let mut reports = Vec::new();
            if let Some(r) = rate {
                reports.push(field("experiment.rate", lab::check_rate_l33(sg, &x, r.t0, *p, &r.t_grid, *slack))?);
            }
            if let Some(pairs) = continuity {
                reports.push(field(
                    "experiment.continuity",
                    lab::check_continuity_l333(sg, &x, *p, pairs, *slack),
                )?);
            }
            if let Some(grid) = dyadic {
                reports.push(field("experiment.dyadic", lab::check_dyadic_e8(sg, &x, grid, *slack))?);
            }
            let violations: usize = reports.iter().map(|r| r.violations).sum();
            if violations > 0 {
                exit_code = EXIT_BOUND_VIOLATION;
            }
            (serde_json::to_value(&reports)?, format!("bound violations: {violations}"))
        }
    };
    if csv.is_none() && ctx.sc.output.csv.is_some() {
        return Err(Error::Scenario(format!("output.csv: not supported for {name}")));
    }
    let report_json = Report::new(name, seed, result).with_scenario_hash(hash).to_json()?;
    Ok(Outcome { exit_code, report_json, csv, summary })
}

/// Run a scenario file and write its artifacts into `out_dir`.
pub fn run_scenario(path: &Path, out_dir: &Path, seed_override: Option<u64>) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let sc = parse_scenario(&text)?;
    let outcome = execute(&text, seed_override)?;
    std::fs::create_dir_all(out_dir)?;
    let report_path = out_dir.join(sc.output.report.as_deref().unwrap_or("report.json"));
    std::fs::write(&report_path, &outcome.report_json)?;
    let csv_path = match &outcome.csv {
        Some(c) => {
            let p = out_dir.join(sc.output.csv.as_deref().unwrap_or("convergence.csv"));
            std::fs::write(&p, c)?;
            Some(p)
        }
        None => None,
    };
    Ok(RunOutcome { exit_code: outcome.exit_code, report_path, csv_path, summary: outcome.summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(body: &str) -> String {
        format!("{{\"schema\": \"{SCENARIO_SCHEMA}\", {body}}}")
    }

    #[test]
    fn rejects_unknown_keys_and_schema() {
        let bad = scenario(r#""experiment": {"type": "mu"}, "surprise": 1"#);
        let e = execute(&bad, None).unwrap_err().to_string();
        assert!(e.contains("line 1"), "{e}");
        let wrong = r#"{"schema": "other/0", "experiment": {"type": "mu"}}"#;
        assert!(execute(wrong, None).is_err());
        let nested = scenario(r#""experiment": {"type": "norm", "norm": {"kind": "lp", "p": 1, "q": 2}}"#);
        assert!(execute(&nested, None).is_err());
    }

    #[test]
    fn converge_writes_csv() {
        let s = scenario(
            r#""semigroup": {"family": "heat_cycle", "n": 8},
               "element": {"kind": "random", "seed": 1},
               "experiment": {"type": "converge", "norm": {"kind": "lp", "p": 2}, "t_grid": [0.5, 0.25, 0.125]}"#,
        );
        let out = execute(&s, None).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        let csv = out.csv.unwrap();
        assert!(csv.starts_with("t,norm_value\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn ds_verify_doubling_is_data() {
        let s = scenario(
            r#""algebra": [[2, 1.0], [1, 0.5]],
               "experiment": {"type": "ds-verify", "map": {"map": "scale", "factor": 2.0}}"#,
        );
        let out = execute(&s, None).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        let v: Value = serde_json::from_str(&out.report_json).unwrap();
        assert_eq!(v["result"]["verdict"], false);
    }

    #[test]
    fn negative_slack_exits_two() {
        let s = scenario(
            r#""semigroup": {"family": "heat_cycle", "n": 4},
               "element": {"kind": "diagonal", "values": [1, 0, 0, 0]},
               "experiment": {"type": "bounds", "slack": -1, "dyadic": [0.3, 0.15]}"#,
        );
        assert_eq!(execute(&s, None).unwrap().exit_code, EXIT_BOUND_VIOLATION);
    }

    #[test]
    fn deterministic_with_seed() {
        let s = scenario(
            r#""semigroup": {"family": "heat_cycle", "n": 4},
               "element": {"kind": "random_positive"},
               "experiment": {"type": "maximal", "lambda": 0.5, "strategy": "brute_force", "t_grid": [0.1, 1, 10]}"#,
        );
        let a = execute(&s, Some(5)).unwrap().report_json;
        let b = execute(&s, Some(5)).unwrap().report_json;
        let c = execute(&s, Some(6)).unwrap().report_json;
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn missing_inputs_are_validation_errors() {
        let s = scenario(r#""experiment": {"type": "average", "t": 1.0}"#);
        assert!(execute(&s, None).unwrap_err().to_string().contains("semigroup"));
        let s = scenario(
            r#""semigroup": {"family": "heat_cycle", "n": 4},
               "element": {"kind": "random"},
               "experiment": {"type": "bounds"}"#,
        );
        assert!(execute(&s, None).is_err());
    }
}
