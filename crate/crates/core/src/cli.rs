//! Command-line front end.
//!
//! Every command produces one record, printed as `key: value` lines or, with
//! `--json`, as a single JSON object. The record echoes a canonical command
//! line in its `command` field; running that command again reproduces the
//! payload exactly.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 degenerate sample,
//! 4 coverage outside `gamma +- 5 stderr`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use crate::confidence::{
    alpha_point_reconciliation_c, eta_log_sigma, interval_mean_diff, interval_mean_known_sigma, interval_mean_t,
    interval_variance, interval_variance_alpha_point, Construction, ConfidenceDomain, EstimatorKind, Interval,
};
use crate::coverage::{run_coverage, run_coverage_with_threads, CoverageExperiment};
use crate::error::Error;
use crate::estimation::{mle, ConstraintSet};
use crate::measurement::{NormalState, Sample, TwoSample};
use crate::specfun::{quantile, DistributionKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_COVERAGE: i32 = 4;

/// Environment variable capping the number of coverage worker threads.
pub const THREADS_ENV: &str = "CI_DOMAIN_THREADS";

/// Accepted confidence levels on the command line.
const GAMMA_RANGE: (f64, f64) = (0.5, 0.9999);

/// Coverage tolerance in standard errors.
const COVERAGE_K: f64 = 5.0;

const DATA_HELP: &str = "Data files hold one decimal number per line; blank lines and lines starting \
with '#' are ignored. Pass '-' to read from stdin.";

#[derive(Debug, Parser)]
#[command(name = "ci-domain", version, about = "Confidence domains for normal samples", after_help = DATA_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a confidence domain from sample data.
    Interval(IntervalArgs),
    /// Estimate coverage by simulation.
    Coverage(CoverageArgs),
    /// Print the reference constants for n = 3, gamma = 0.95.
    Reproduce {
        #[arg(long)]
        json: bool,
    },
    /// Maximum likelihood state under a constraint.
    Mle(MleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum IntervalKind {
    MeanKnownSigma,
    Variance,
    VarianceAlphaPoint,
    MeanT,
    MeanDiff,
}

impl IntervalKind {
    fn name(self) -> &'static str {
        match self {
            IntervalKind::MeanKnownSigma => "mean-known-sigma",
            IntervalKind::Variance => "variance",
            IntervalKind::VarianceAlphaPoint => "variance-alpha-point",
            IntervalKind::MeanT => "mean-t",
            IntervalKind::MeanDiff => "mean-diff",
        }
    }
}

#[derive(Debug, Args)]
struct IntervalArgs {
    kind: IntervalKind,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    /// Known scale (mean-known-sigma).
    #[arg(long)]
    sigma: Option<f64>,
    /// Known scale of the first sample (mean-diff).
    #[arg(long)]
    sigma1: Option<f64>,
    /// Known scale of the second sample (mean-diff).
    #[arg(long)]
    sigma2: Option<f64>,
    /// mle | unbiased | scaled:<c> (variance).
    #[arg(long, value_parser = parse_estimator, default_value = "mle")]
    estimator: EstimatorKind,
    #[arg(long)]
    data: String,
    /// Second sample (mean-diff).
    #[arg(long)]
    data2: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct CoverageArgs {
    #[arg(long = "case")]
    case: IntervalKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    mu2: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma2: f64,
    #[arg(long)]
    n: usize,
    /// Second sample size (mean-diff); defaults to n.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, value_parser = parse_estimator, default_value = "mle")]
    estimator: EstimatorKind,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct MleArgs {
    /// full | fixed-sigma:<s> | fixed-mu:<m>
    #[arg(long, value_parser = parse_constraint, default_value = "full", allow_hyphen_values = true)]
    constraint: ConstraintSet,
    #[arg(long)]
    data: String,
    #[arg(long)]
    json: bool,
}

fn parse_estimator(s: &str) -> Result<EstimatorKind, String> {
    match s {
        "mle" => Ok(EstimatorKind::Mle),
        "unbiased" => Ok(EstimatorKind::Unbiased),
        _ => {
            let c = s
                .strip_prefix("scaled:")
                .ok_or_else(|| format!("unknown estimator {s:?} (mle | unbiased | scaled:<c>)"))?;
            let c: f64 = c.parse().map_err(|_| format!("bad scale in {s:?}"))?;
            EstimatorKind::Scaled(c).validate().map_err(|e| e.to_string())
        }
    }
}

fn parse_constraint(s: &str) -> Result<ConstraintSet, String> {
    if s == "full" {
        return Ok(ConstraintSet::Full);
    }
    let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number in {s:?}"));
    if let Some(v) = s.strip_prefix("fixed-sigma:") {
        let v = num(v)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("fixed sigma must be positive, got {v}"));
        }
        Ok(ConstraintSet::FixedSigma(v))
    } else if let Some(v) = s.strip_prefix("fixed-mu:") {
        Ok(ConstraintSet::FixedMu(num(v)?))
    } else {
        Err(format!("unknown constraint {s:?} (full | fixed-sigma:<s> | fixed-mu:<m>)"))
    }
}

fn estimator_arg(e: EstimatorKind) -> String {
    e.to_string()
}

fn constraint_arg(c: ConstraintSet) -> String {
    match c {
        ConstraintSet::Full => "full".into(),
        ConstraintSet::FixedSigma(s) => format!("fixed-sigma:{s}"),
        ConstraintSet::FixedMu(m) => format!("fixed-mu:{m}"),
    }
}

/// What a command run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn fail(code: i32, msg: impl Into<String>) -> Self {
        Outcome { code, stdout: String::new(), stderr: msg.into() }
    }
}

struct Failure(i32, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Degenerate(_) => EXIT_DEGENERATE,
            _ => EXIT_USAGE,
        };
        Failure(code, e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

/// An ordered set of output fields. Nested objects hold one level of
/// scalars (inputs, constants) and flatten to `group.key` in text form.
#[derive(Debug, Default)]
struct Record {
    fields: Vec<(String, Value)>,
}

impl Record {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.fields.push((key.to_string(), v.into()));
    }

    fn put_group(&mut self, key: &str, entries: &[(&str, Value)]) {
        let map: Map<String, Value> = entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
        self.fields.push((key.to_string(), Value::Object(map)));
    }

    fn to_json(&self) -> String {
        let map: Map<String, Value> = self.fields.iter().cloned().collect();
        serde_json::to_string(&Value::Object(map)).expect("record serializes")
    }

    fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            match v {
                Value::Object(map) => {
                    for (k2, v2) in map {
                        let _ = writeln!(out, "{k}.{k2}: {}", text_value(v2));
                    }
                }
                Value::Array(rows) => {
                    for row in rows {
                        let _ = writeln!(out, "{k}: {}", text_value(row));
                    }
                }
                _ => {
                    let _ = writeln!(out, "{k}: {}", text_value(v));
                }
            }
        }
        out
    }

    fn render(&self, json: bool) -> String {
        if json {
            let mut s = self.to_json();
            s.push('\n');
            s
        } else {
            self.to_text()
        }
    }
}

fn text_value(v: &Value) -> String {
    match v {
        Value::Number(n) if n.is_f64() => sig6(n.as_f64().unwrap()),
        Value::String(s) => s.clone(),
        Value::Object(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={}", text_value(v)))
            .collect::<Vec<_>>()
            .join(" "),
        other => other.to_string(),
    }
}

/// Formats with 6 significant digits, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        // rounding may have produced an extra digit (9.999995 -> 10.00000)
        trim(s)
    } else {
        let s = format!("{x:.5e}");
        let (mantissa, e) = s.split_once('e').expect("scientific");
        format!("{}e{e}", trim(mantissa.to_string()))
    }
}

fn read_sample(path: &str) -> Result<Sample, Failure> {
    let text = if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("reading stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("reading {path}: {e}")))?
    };
    Sample::parse(&text).map_err(|e| usage(format!("{path}: {e}")))
}

fn check_cli_gamma(gamma: f64) -> Result<(), Failure> {
    if gamma >= GAMMA_RANGE.0 && gamma <= GAMMA_RANGE.1 {
        Ok(())
    } else {
        Err(usage(format!("--gamma {gamma} outside [{}, {}]", GAMMA_RANGE.0, GAMMA_RANGE.1)))
    }
}

fn domain_fields(rec: &mut Record, d: &ConfidenceDomain) {
    rec.put("domain", d.tag());
    match *d {
        ConfidenceDomain::MeanCone { center, slope } => {
            rec.put("center", center);
            rec.put("slope", slope);
        }
        ConfidenceDomain::VarianceBand { lo, hi } => {
            rec.put("lo", lo);
            rec.put("hi", hi);
        }
        ConfidenceDomain::ThetaInterval { lo, hi } => {
            rec.put("lo", lo);
            rec.put("hi", hi);
            rec.put("center", 0.5 * (lo + hi));
            rec.put("half_width", 0.5 * (hi - lo));
        }
    }
}

fn cmd_interval(a: &IntervalArgs) -> Result<Record, Failure> {
    check_cli_gamma(a.gamma)?;
    let x = read_sample(&a.data)?;
    let mut cmd = format!("interval {} --gamma {}", a.kind.name(), a.gamma);
    let mut inputs: Vec<(&str, Value)> = vec![("n", x.len().into()), ("gamma", a.gamma.into())];

    let iv: Interval = match a.kind {
        IntervalKind::MeanKnownSigma => {
            let sigma = a.sigma.ok_or_else(|| usage("mean-known-sigma needs --sigma"))?;
            let _ = write!(cmd, " --sigma {sigma}");
            inputs.push(("sigma", sigma.into()));
            interval_mean_known_sigma(&x, a.gamma, Some(sigma))?
        }
        IntervalKind::Variance => {
            let _ = write!(cmd, " --estimator {}", estimator_arg(a.estimator));
            inputs.push(("estimator", a.estimator.to_string().into()));
            interval_variance(&x, a.gamma, a.estimator)?
        }
        IntervalKind::VarianceAlphaPoint => interval_variance_alpha_point(&x, a.gamma)?,
        IntervalKind::MeanT => interval_mean_t(&x, a.gamma)?,
        IntervalKind::MeanDiff => {
            let s1 = a.sigma1.ok_or_else(|| usage("mean-diff needs --sigma1"))?;
            let s2 = a.sigma2.ok_or_else(|| usage("mean-diff needs --sigma2"))?;
            let path2 = a.data2.as_deref().ok_or_else(|| usage("mean-diff needs --data2"))?;
            if path2 == "-" && a.data == "-" {
                return Err(usage("only one of --data/--data2 may read stdin"));
            }
            let y = read_sample(path2)?;
            let _ = write!(cmd, " --sigma1 {s1} --sigma2 {s2}");
            inputs.push(("m", y.len().into()));
            inputs.push(("sigma1", s1.into()));
            inputs.push(("sigma2", s2.into()));
            interval_mean_diff(&TwoSample::new(x, y), a.gamma, s1, s2)?
        }
    };
    let _ = write!(cmd, " --data {}", a.data);
    if let Some(d2) = &a.data2 {
        if a.kind == IntervalKind::MeanDiff {
            let _ = write!(cmd, " --data2 {d2}");
        }
    }
    if a.json {
        cmd.push_str(" --json");
    }

    let mut rec = Record::default();
    rec.put("command", cmd);
    rec.put_group("inputs", &inputs);
    domain_fields(&mut rec, &iv.domain);
    if let Some(ConfidenceDomain::ThetaInterval { lo, hi }) = iv.slice {
        rec.put("lo", lo);
        rec.put("hi", hi);
    }
    let consts: Vec<(&str, Value)> = iv.constants.iter().map(|&(k, v)| (k, v.into())).collect();
    rec.put_group("constants", &consts);
    Ok(rec)
}

fn coverage_threads() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}"))),
        },
    }
}

fn cmd_coverage(a: &CoverageArgs) -> Result<(Record, bool), Failure> {
    check_cli_gamma(a.gamma)?;
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let state = NormalState::new(a.mu, a.sigma)?;
    let mut cmd = format!("coverage --case {} --mu {} --sigma {}", a.case.name(), a.mu, a.sigma);
    let mut inputs: Vec<(&str, Value)> = vec![
        ("case", a.case.name().into()),
        ("mu", a.mu.into()),
        ("sigma", a.sigma.into()),
        ("n", a.n.into()),
    ];
    let exp = match a.case {
        IntervalKind::MeanDiff => {
            let second = NormalState::new(a.mu2, a.sigma2)?;
            let m = a.m.unwrap_or(a.n);
            let _ = write!(cmd, " --mu2 {} --sigma2 {} --m {m}", a.mu2, a.sigma2);
            inputs.extend([("mu2", a.mu2.into()), ("sigma2", a.sigma2.into()), ("m", m.into())]);
            CoverageExperiment::mean_diff(state, second, a.n, m, a.gamma, a.trials, a.seed)
        }
        other => {
            let construction = match other {
                IntervalKind::MeanKnownSigma => Construction::MeanKnownSigma,
                IntervalKind::Variance => {
                    let _ = write!(cmd, " --estimator {}", estimator_arg(a.estimator));
                    inputs.push(("estimator", a.estimator.to_string().into()));
                    Construction::Variance(a.estimator)
                }
                IntervalKind::VarianceAlphaPoint => Construction::VarianceAlphaPoint,
                IntervalKind::MeanT => Construction::MeanT,
                IntervalKind::MeanDiff => unreachable!(),
            };
            CoverageExperiment::single(state, construction, a.n, a.gamma, a.trials, a.seed)
        }
    };
    let _ = write!(cmd, " --n {} --gamma {} --trials {} --seed {}", a.n, a.gamma, a.trials, a.seed);
    if a.json {
        cmd.push_str(" --json");
    }
    inputs.extend([("gamma", a.gamma.into()), ("trials", a.trials.into()), ("seed", a.seed.into())]);

    let report = match coverage_threads()? {
        Some(t) => run_coverage_with_threads(&exp, t)?,
        None => run_coverage(&exp)?,
    };
    let ok = report.within(COVERAGE_K);

    let mut rec = Record::default();
    rec.put("command", cmd);
    rec.put_group("inputs", &inputs);
    rec.put("hits", report.hits);
    rec.put("trials", report.trials);
    rec.put("fraction", report.fraction);
    rec.put("gamma", report.gamma);
    rec.put("stderr", report.stderr);
    rec.put("degenerate_count", report.degenerate_count);
    rec.put("tolerance", COVERAGE_K * report.stderr);
    rec.put("within_tolerance", ok);
    Ok((rec, ok))
}

/// One line of the reference table.
#[derive(Debug, Clone, PartialEq)]
pub struct ReproRow {
    pub label: &'static str,
    pub computed: f64,
    /// Reference value at its printed precision, when one exists.
    pub reference: Option<f64>,
    pub note: Option<&'static str>,
}

impl ReproRow {
    pub fn delta(&self) -> Option<f64> {
        self.reference.map(|r| (self.computed - r).abs())
    }
}

/// The n = 3, gamma = 0.95 constants of the log-scale, unbiased, and
/// equal-tails constructions next to their reference values.
pub fn reproduce_rows() -> crate::error::Result<Vec<ReproRow>> {
    let (n, gamma) = (3usize, 0.95);
    let eta = eta_log_sigma(gamma, n, n as f64)?.eta;
    let eta_u = eta_log_sigma(gamma, n, (n - 1) as f64)?.eta;
    let kind = DistributionKind::chi_squared((n - 1) as u32)?;
    let chi0 = quantile(kind, 0.5 * (1.0 - gamma))?;
    let chi_inf = quantile(kind, 0.5 * (1.0 + gamma))?;
    let c = alpha_point_reconciliation_c(gamma, n)?;

    let row = |label, computed, reference: Option<f64>| ReproRow { label, computed, reference, note: None };
    Ok(vec![
        row("mle: exp(-eta)", (-eta).exp(), Some(0.1849)),
        row("mle: exp(eta)", eta.exp(), Some(5.4077)),
        row("mle: band coefficient exp(-2 eta)/3", (-2.0 * eta).exp() / 3.0, Some(0.0114)),
        row("mle: band coefficient exp(2 eta)/3", (2.0 * eta).exp() / 3.0, Some(9.748)),
        row("unbiased: exp(-eta')", (-eta_u).exp(), Some(0.2265)),
        row("unbiased: exp(eta')", eta_u.exp(), Some(4.4154)),
        ReproRow {
            label: "unbiased: band coefficient exp(-2 eta')/2",
            computed: (-2.0 * eta_u).exp() / 2.0,
            reference: Some(0.00256),
            note: Some("reference 0.00256 contradicts exp(-eta') = 0.2265, which gives 0.2265^2/2 = 0.02565"),
        },
        row("unbiased: band coefficient exp(2 eta')/2", (2.0 * eta_u).exp() / 2.0, Some(9.748)),
        row("alpha-point: chi2 lower point", chi0, Some(0.0506)),
        row("alpha-point: chi2 upper point", chi_inf, Some(7.378)),
        row("alpha-point: band coefficient 1/chi2 upper", 1.0 / chi_inf, Some(0.1355)),
        ReproRow {
            label: "alpha-point: band coefficient 1/chi2 lower",
            computed: 1.0 / chi0,
            reference: Some(19.763),
            note: Some("reference is 1/0.0506, computed from the rounded lower point"),
        },
        ReproRow {
            label: "reconciling scale c = sqrt(chi0 chi_inf)/n",
            computed: c,
            reference: Some(0.2037),
            note: Some("reference is sqrt(0.0506 * 7.378)/3, from the rounded chi2 points"),
        },
    ])
}

fn cmd_reproduce(json: bool) -> Result<Record, Failure> {
    let rows = reproduce_rows()?;
    let mut rec = Record::default();
    rec.put("command", if json { "reproduce --json" } else { "reproduce" });
    rec.put("n", 3);
    rec.put("gamma", 0.95);
    let table: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            m.insert("label".into(), r.label.into());
            m.insert("computed".into(), r.computed.into());
            m.insert("reference".into(), r.reference.map_or(Value::Null, Value::from));
            m.insert("delta".into(), r.delta().map_or(Value::Null, Value::from));
            if let Some(note) = r.note {
                m.insert("note".into(), note.into());
            }
            Value::Object(m)
        })
        .collect();
    rec.put("rows", Value::Array(table));
    Ok(rec)
}

fn reproduce_text(rows: &[ReproRow]) -> String {
    let mut out = String::from("n = 3, gamma = 0.95\n");
    let _ = writeln!(out, "{:<46} {:>12} {:>12} {:>10}", "quantity", "computed", "reference", "|delta|");
    let mut notes = Vec::new();
    for r in rows {
        let reference = r.reference.map_or("-".to_string(), sig6);
        let delta = r.delta().map_or("-".to_string(), |d| format!("{d:.2e}"));
        let mark = if let Some(note) = r.note {
            notes.push(note);
            format!(" [{}]", notes.len())
        } else {
            String::new()
        };
        let _ = writeln!(out, "{:<46} {:>12} {:>12} {:>10}{mark}", r.label, sig6(r.computed), reference, delta);
    }
    for (i, n) in notes.iter().enumerate() {
        let _ = writeln!(out, "[{}] {n}", i + 1);
    }
    out
}

fn cmd_mle(a: &MleArgs) -> Result<Record, Failure> {
    let x = read_sample(&a.data)?;
    let res = mle(&x, a.constraint)?;
    let mut cmd = format!("mle --constraint {} --data {}", constraint_arg(a.constraint), a.data);
    if a.json {
        cmd.push_str(" --json");
    }
    let mut rec = Record::default();
    rec.put("command", cmd);
    rec.put_group("inputs", &[("n", x.len().into()), ("constraint", constraint_arg(a.constraint).into())]);
    rec.put("mu", res.state.mu());
    rec.put("sigma", res.state.sigma());
    rec.put("log_likelihood", res.log_likelihood);
    Ok(rec)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome::fail(code, text)
            };
        }
    };

    let result = match &cli.command {
        Command::Interval(a) => cmd_interval(a).map(|r| (r.render(a.json), EXIT_OK)),
        Command::Coverage(a) => {
            cmd_coverage(a).map(|(r, ok)| (r.render(a.json), if ok { EXIT_OK } else { EXIT_COVERAGE }))
        }
        Command::Reproduce { json } => {
            if *json {
                cmd_reproduce(true).map(|r| (r.render(true), EXIT_OK))
            } else {
                reproduce_rows().map(|rows| (reproduce_text(&rows), EXIT_OK)).map_err(Failure::from)
            }
        }
        Command::Mle(a) => cmd_mle(a).map(|r| (r.render(a.json), EXIT_OK)),
    };
    match result {
        Ok((stdout, code)) => Outcome { code, stdout, stderr: String::new() },
        Err(Failure(code, msg)) => Outcome::fail(code, format!("error: {msg}\n")),
    }
}
