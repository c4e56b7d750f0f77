//! Argument parsing and verb dispatch for the `lbcalc` binary.
//!
//! Every verb prints one JSON document on standard output:
//! `{"verb": ..., "seed": ..., "ops": [...], "result": ...}` on success and
//! `{"verb": ..., "error": {"kind": ..., "message": ...}}` on failure.
//! Input files may be bare module JSON or a previous report, in which case
//! its `result` is used.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use lbcalc_core::dirichlet::{self, DirichletSeries, HalfPlaneParam};
use lbcalc_core::estimate::{self, AnalyticSample, EstimateOptions};
use lbcalc_core::germ::{self, Germ};
use lbcalc_core::limit::{
    self, ContinuityCertificate, DegreeBudget, LimitMap, StepDecomposition, StepElement, StepSpace,
};
use lbcalc_core::series::Series;
use lbcalc_core::{lie, suite, Error, Matrix};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// A validated invocation.
#[derive(Debug, Clone, PartialEq, Parser)]
#[command(
    name = "lbcalc",
    version,
    about = "Certified computations in Banach-Lie algebras and their direct limits"
)]
pub struct Command {
    /// Seed for every sampled quantity.
    #[arg(long, global = true, env = "LBCALC_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Verb {
    /// Truncated BCH product of two matrices.
    Bch {
        #[arg(long)]
        order: usize,
        x: PathBuf,
        y: PathBuf,
    },
    /// Bracket of two Dirichlet series; with --order also their BCH product at --s.
    DirichletBracket {
        #[arg(long, requires = "s")]
        order: Option<usize>,
        #[arg(long)]
        s: Option<f64>,
        a: PathBuf,
        b: PathBuf,
    },
    /// Weighted norm of a Dirichlet series.
    DirichletNorm {
        #[arg(long)]
        s: f64,
        series: PathBuf,
    },
    /// Value and pointwise exponential of a Dirichlet series at --z.
    DirichletEval {
        #[arg(long, allow_hyphen_values = true)]
        z: ComplexArg,
        series: PathBuf,
    },
    /// Composition of two germs; with two more files also its directional derivative.
    GermCompose {
        g1: PathBuf,
        g2: PathBuf,
        #[arg(requires = "h2")]
        h1: Option<PathBuf>,
        h2: Option<PathBuf>,
    },
    /// Inverse of `id + g` together with its residual.
    GermInvert { germ: PathBuf },
    /// Checks the weighted Taylor bound for a family of maps.
    EstimateVerify {
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 12)]
        degree: usize,
        family: PathBuf,
    },
    /// Builds a continuity certificate for a map on a direct limit.
    LimitCertify {
        #[arg(long = "R")]
        big_r: f64,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        epsilon: f64,
        problem: PathBuf,
    },
    /// Samples a certificate's neighbourhood and checks the map stays small.
    LimitVerify {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        problem: PathBuf,
        certificate: PathBuf,
        /// Optional decomposition to test for membership in the neighbourhood.
        decomposition: Option<PathBuf>,
    },
    /// Radius for the inclusion of weighted Dirichlet spaces; optionally checks a series.
    ModulusDirichlet {
        #[arg(long)]
        s: f64,
        #[arg(long)]
        epsilon: f64,
        /// Defaults to s + 2.
        #[arg(long)]
        u: Option<f64>,
        series: Option<PathBuf>,
    },
    /// Radius for the restriction of germs; optionally checks a germ.
    ModulusGerm {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        epsilon: f64,
        /// Defaults to 6n.
        #[arg(long)]
        l: Option<u64>,
        germ: Option<PathBuf>,
    },
    /// Runs acceptance criteria (all of them when no ids are given).
    Suite { ids: Vec<u8> },
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::Bch { .. } => "bch",
            Verb::DirichletBracket { .. } => "dirichlet-bracket",
            Verb::DirichletNorm { .. } => "dirichlet-norm",
            Verb::DirichletEval { .. } => "dirichlet-eval",
            Verb::GermCompose { .. } => "germ-compose",
            Verb::GermInvert { .. } => "germ-invert",
            Verb::EstimateVerify { .. } => "estimate-verify",
            Verb::LimitCertify { .. } => "limit-certify",
            Verb::LimitVerify { .. } => "limit-verify",
            Verb::ModulusDirichlet { .. } => "modulus-dirichlet",
            Verb::ModulusGerm { .. } => "modulus-germ",
            Verb::Suite { .. } => "suite",
        }
    }
}

/// Complex number written as `re` or `re,im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArg(pub Complex64);

impl FromStr for ComplexArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{s}' is not a complex number (expected re or re,im)"))
        };
        let z = match s.split_once(',') {
            Some((re, im)) => Complex64::new(parse(re)?, parse(im)?),
            None => Complex64::new(parse(s)?, 0.0),
        };
        Ok(ComplexArg(z))
    }
}

pub fn parse<I, T>(argv: I) -> Result<Command, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Command::try_parse_from(std::iter::once("lbcalc".into()).chain(argv.into_iter().map(Into::into)))
}

/// Exit code and the JSON document to print.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    pub fn render(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("reports are plain JSON")
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

struct Success {
    ops: Vec<&'static str>,
    verdict: bool,
    result: Value,
}

impl Success {
    fn new(ops: Vec<&'static str>, result: Value) -> Self {
        Success {
            ops,
            verdict: true,
            result,
        }
    }
}

pub fn execute(command: &Command) -> Outcome {
    let verb = command.verb.name();
    match dispatch(command) {
        Ok(s) => Outcome {
            code: if s.verdict { EXIT_OK } else { EXIT_VERDICT_FALSE },
            report: json!({ "verb": verb, "seed": command.seed, "ops": s.ops, "result": s.result }),
        },
        Err(failure) => {
            let (code, kind, message) = match failure {
                Failure::Usage(m) => (EXIT_USAGE, "usage", m),
                Failure::Core(e) => {
                    let (code, kind) = match e {
                        Error::Validation(_) | Error::Configuration(_) => (EXIT_USAGE, "validation"),
                        Error::Domain(_) => (EXIT_DOMAIN, "domain"),
                        Error::Internal(_) => (EXIT_INTERNAL, "internal"),
                    };
                    (code, kind, e.to_string())
                }
            };
            Outcome {
                code,
                report: json!({ "verb": verb, "error": { "kind": kind, "message": message } }),
            }
        }
    }
}

fn read<T: DeserializeOwned>(path: &Path) -> Run<T> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut value: Value =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{} is not JSON: {e}", path.display())))?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("verb") && obj.contains_key("result") {
            value = obj.remove("result").expect("checked key");
        }
    }
    serde_json::from_value(value).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("module types serialize")
}

fn dispatch(command: &Command) -> Run<Success> {
    let seed = command.seed;
    match &command.verb {
        Verb::Bch { order, x, y } => bch(*order, &read(x)?, &read(y)?),
        Verb::DirichletBracket { order, s, a, b } => dirichlet_bracket(*order, *s, &read(a)?, &read(b)?),
        Verb::DirichletNorm { s, series } => {
            let gamma: DirichletSeries = read(series)?;
            let norm = dirichlet::norm_s(&gamma, HalfPlaneParam::new(*s)?);
            Ok(Success::new(vec!["norm_s"], json!({ "s": s, "norm": norm })))
        }
        Verb::DirichletEval { z, series } => dirichlet_eval(z.0, &read(series)?),
        Verb::GermCompose { g1, g2, h1, h2 } => {
            let direction = match (h1, h2) {
                (Some(h1), Some(h2)) => Some((read(h1)?, read(h2)?)),
                _ => None,
            };
            germ_compose(&read(g1)?, &read(g2)?, direction)
        }
        Verb::GermInvert { germ } => germ_invert(&read(germ)?),
        Verb::EstimateVerify { r, degree, family } => estimate_verify(*r, *degree, seed, read(family)?),
        Verb::LimitCertify {
            big_r,
            r,
            epsilon,
            problem,
        } => limit_certify(*big_r, *r, *epsilon, &read(problem)?),
        Verb::LimitVerify {
            samples,
            problem,
            certificate,
            decomposition,
        } => {
            let decomposition = decomposition.as_deref().map(read).transpose()?;
            limit_verify(*samples, seed, &read(problem)?, &read(certificate)?, decomposition)
        }
        Verb::ModulusDirichlet { s, epsilon, u, series } => {
            let modulus = limit::dirichlet_regularity_modulus(*s, *epsilon, u.unwrap_or(s + 2.0))?;
            let mut ops = vec!["dirichlet_regularity_modulus"];
            let mut result = json!({ "modulus": modulus });
            let mut verdict = true;
            if let Some(path) = series {
                let check = modulus.check(&read(path)?)?;
                ops.push("norm_s");
                verdict = check.holds;
                result["check"] = to_value(&check);
            }
            Ok(Success { ops, verdict, result })
        }
        Verb::ModulusGerm { n, epsilon, l, germ } => {
            let modulus = limit::germ_regularity_modulus(*n, *epsilon, l.unwrap_or(6 * n), DegreeBudget::Cauchy)?;
            let mut ops = vec!["germ_regularity_modulus"];
            let mut result = json!({ "modulus": modulus });
            let mut verdict = true;
            if let Some(path) = germ {
                let g: Germ = read(path)?;
                if g.index() != *n {
                    return Err(Failure::Usage(format!("germ has index {} but --n is {n}", g.index())));
                }
                let check = modulus.check(&g);
                ops.push("sup_norm");
                verdict = check.holds;
                result["check"] = to_value(&check);
            }
            Ok(Success { ops, verdict, result })
        }
        Verb::Suite { ids } => {
            let ids: Vec<u8> = if ids.is_empty() {
                suite::CRITERIA.iter().map(|(id, _)| *id).collect()
            } else {
                ids.clone()
            };
            if let Some(bad) = ids.iter().find(|id| !suite::CRITERIA.iter().any(|(c, _)| c == *id)) {
                return Err(Failure::Usage(format!("unknown criterion {bad}")));
            }
            let report = suite::run(seed, &ids);
            Ok(Success {
                ops: vec!["suite"],
                verdict: report.passed,
                result: to_value(&report),
            })
        }
    }
}

fn bch(order: usize, x: &Matrix, y: &Matrix) -> Run<Success> {
    let product = lie::bch(x, y, order)?;
    let norm_sum = lie::compatible_norm(x) + lie::compatible_norm(y);
    let group = &lie::mat_exp(x) * &lie::mat_exp(y);
    let oracle = lie::mat_log(&group)
        .ok()
        .map(|log| json!({ "value": log, "gap": (&log - &product).norm1() }));
    Ok(Success::new(
        vec!["compatible_norm", "bch", "mat_exp", "mat_log"],
        json!({ "order": order, "norm_sum": norm_sum, "product": product, "oracle": oracle }),
    ))
}

fn dirichlet_bracket(order: Option<usize>, s: Option<f64>, a: &DirichletSeries, b: &DirichletSeries) -> Run<Success> {
    let mut ops = vec!["bracket"];
    let mut result = json!({ "bracket": dirichlet::bracket(a, b)? });
    if let (Some(order), Some(s)) = (order, s) {
        let product = dirichlet::bch_series(a, b, HalfPlaneParam::new(s)?, order)?;
        ops.push("bch_series");
        result["bch"] = json!({ "s": s, "order": order, "product": product });
    }
    Ok(Success::new(ops, result))
}

fn dirichlet_eval(z: Complex64, gamma: &DirichletSeries) -> Run<Success> {
    let value = dirichlet::evaluate(gamma, z);
    let exp = dirichlet::exp_pointwise(gamma, z);
    let leading = dirichlet::leading_coefficient(gamma, z.re.max(2.0))?;
    Ok(Success::new(
        vec!["evaluate", "exp_pointwise", "leading_coefficient"],
        json!({ "z": [z.re, z.im], "value": value, "exp": exp, "leading": leading }),
    ))
}

fn germ_compose(g1: &Germ, g2: &Germ, direction: Option<(Germ, Germ)>) -> Run<Success> {
    let composed = germ::compose(g1, g2)?;
    let mut ops = vec!["compose", "sup_norm", "d_norm"];
    let mut result = json!({ "composition": composed, "norms": composed.norms() });
    if let Some((h1, h2)) = direction {
        ops.push("compose_derivative");
        result["derivative"] = to_value(&germ::compose_derivative(g1, g2, &h1, &h2)?);
    }
    Ok(Success::new(ops, result))
}

fn germ_invert(g: &Germ) -> Run<Success> {
    let inverse = germ::invert(g)?;
    let residual = germ::residual(g, &inverse)?;
    let n = g.index();
    let bounds: Vec<f64> = (0..=3).map(|l| germ::derivative_bound(&inverse, l)).collect();
    Ok(Success::new(
        vec!["invert", "residual", "sup_norm", "d_norm", "derivative_bound"],
        json!({
            "inverse": inverse,
            "input_d_norm": g.d_norm(),
            "inverse_sup_norm": inverse.sup_norm(),
            "sup_bound": 1.0 / (6.0 * n as f64),
            "residual_max": residual.max_abs_coeff(),
            "derivative_bounds": bounds,
        }),
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    radius: f64,
    maps: Vec<MapFile>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapFile {
    center: Vec<[f64; 2]>,
    components: Vec<Vec<TermFile>>,
    /// Treat the map as an opaque evaluator and probe it by contour integrals.
    #[serde(default)]
    black_box: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    alpha: Vec<u8>,
    coeff: [f64; 2],
}

fn family(file: FamilyFile) -> Run<Vec<AnalyticSample>> {
    file.maps
        .into_iter()
        .map(|m| {
            let dim = m.center.len();
            let center: Vec<Complex64> = m.center.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
            let degree = m
                .components
                .iter()
                .flatten()
                .map(|t| t.alpha.iter().map(|&a| a as usize).sum::<usize>())
                .max()
                .unwrap_or(0)
                .max(1);
            let components = m
                .components
                .iter()
                .map(|terms| {
                    let mut s = Series::zero(dim, degree);
                    for t in terms {
                        s.set_coeff(&t.alpha, Complex64::new(t.coeff[0], t.coeff[1]))?;
                    }
                    Ok(s)
                })
                .collect::<lbcalc_core::Result<Vec<Series>>>()?;
            let known = AnalyticSample::polynomial(center.clone(), file.radius, components)?;
            if !m.black_box {
                return Ok(known);
            }
            let sup = known.sup_bound();
            let inner = known.clone();
            let evaluator: Arc<estimate::Evaluator> = Arc::new(move |x: &[Complex64]| inner.eval(x));
            Ok(AnalyticSample::black_box(evaluator, center, file.radius, sup)?)
        })
        .collect()
}

fn estimate_verify(r: f64, degree: usize, seed: u64, file: FamilyFile) -> Run<Success> {
    let maps = family(file)?;
    let options = EstimateOptions {
        degree,
        nodes: estimate::DEFAULT_NODES,
        seed,
    };
    let report = estimate::verify_bounded_series(&maps, r, options)?;
    let s = report.parameters.s;
    let mut axis = Vec::with_capacity(maps.len());
    for f in &maps {
        let mut e1 = vec![Complex64::new(0.0, 0.0); f.dim()];
        e1[0] = Complex64::new(1.0, 0.0);
        let per_degree = (0..=degree)
            .map(|k| {
                let c = estimate::cauchy_directional_coefficient(f, &e1, s, k, options.nodes)?;
                Ok(c.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
            })
            .collect::<lbcalc_core::Result<Vec<_>>>()?;
        axis.push(per_degree);
    }
    let polarization: Vec<_> = (0..=degree as u32).map(estimate::polarization_factor).collect();
    Ok(Success {
        ops: vec![
            "verify_bounded_series",
            "cauchy_directional_coefficient",
            "polarization_factor",
        ],
        verdict: report.verdict,
        result: json!({ "report": report, "first_axis_coefficients": axis, "polarization": polarization }),
    })
}

/// A map on a configured direct limit, truncated to `steps` steps.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitProblem {
    pub space: StepSpace,
    pub map: LimitMap,
    pub steps: usize,
}

fn limit_certify(big_r: f64, r: f64, epsilon: f64, problem: &LimitProblem) -> Run<Success> {
    problem.map.validate(&problem.space, problem.steps)?;
    let sups = problem.map.certificate_sups(problem.steps, big_r, r);
    let cert = limit::build_certificate(&sups, big_r, r, epsilon)?;
    Ok(Success::new(vec!["build_certificate"], to_value(&cert)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionFile {
    terms: Vec<(usize, StepElement)>,
}

fn limit_verify(
    samples: usize,
    seed: u64,
    problem: &LimitProblem,
    cert: &ContinuityCertificate,
    decomposition: Option<DecompositionFile>,
) -> Run<Success> {
    if cert.step_sups.len() != problem.steps {
        return Err(Failure::Usage(format!(
            "certificate covers {} steps but the problem has {}",
            cert.step_sups.len(),
            problem.steps
        )));
    }
    let report = limit::verify_certificate(&problem.space, &problem.map, cert, samples, seed)?;
    let mut ops = vec!["verify_certificate"];
    let mut result = to_value(&report);
    if let Some(d) = decomposition {
        let d = StepDecomposition::new(d.terms)?;
        ops.push("neighborhood_contains");
        result["decomposition_inside"] = json!(limit::neighborhood_contains(&problem.space, &cert.delta, &d)?);
    }
    Ok(Success {
        ops,
        verdict: report.verdict,
        result,
    })
}
