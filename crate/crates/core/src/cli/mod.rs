//! Command-line front end.
//!
//! Exit codes: `0` success (including an infeasible-but-reported bound
//! computation), `1` domain or assumption failure, `2` I/O or parse failure.
//! Action and state indices in printed output and CSV files are one-based.

pub mod tables;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::domains::{self, CostedOverrides, DomainError};
use crate::filter::{self, Belief};
use crate::mlr::{
    self, BoundCertificate, BoundMode, CertificateMode, CertificateOptions, MlrError, PolicyBounds, VectorObjective,
};
use crate::model::{self, ModelError, PomdpModel};
use crate::planner;
use crate::rewards::UncertaintyKind;
use crate::structure::{self, Assumption, CheckOutcome};
use tables::{fmt_real, GapCsvRow, PolicyMapRow, PruningCsvRow, SweepCsvRow};

#[derive(Debug, Parser)]
#[command(name = "infopomdp", version, about = "Bounded planning for POMDPs with information rewards")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the structural assumptions behind the policy bounds.
    Check(CheckArgs),
    /// Solve for the reward transforms and write a bound certificate.
    Bounds(BoundsArgs),
    /// Plan from one belief with branch-and-bound or exhaustive search.
    Plan(PlanArgs),
    /// Evaluate the action interval over a belief grid or sample.
    PolicyMap(PolicyMapArgs),
    /// Generate a tracking model file.
    GenDomain(GenDomainArgs),
    /// Run a pruning, bound-gap or action-pruning sweep experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
struct CheckArgs {
    model: PathBuf,
    /// Beliefs sampled for the update-ordering check.
    #[arg(long, default_value_t = 500)]
    samples: usize,
    /// Random directions per matrix for the sampled copositivity check.
    #[arg(long, default_value_t = 200)]
    copositivity_samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print a JSON report instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Nominal,
    Conservative,
    AtBelief,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    MinNorm,
    MaxSlack,
}

impl From<ObjectiveArg> for VectorObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::MinNorm => VectorObjective::MinNorm,
            ObjectiveArg::MaxSlack => VectorObjective::MaxSlack,
        }
    }
}

#[derive(Debug, Args)]
struct CertificateArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Nominal)]
    mode: ModeArg,
    /// Comma-separated belief for `--mode at-belief`.
    #[arg(long)]
    at: Option<String>,
    /// Inner-simplex margin for Shannon rewards (defaults to the model's).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::MinNorm)]
    objective: ObjectiveArg,
    /// Box on the transform vector entries.
    #[arg(long, default_value_t = mlr::DEFAULT_G_MAX)]
    g_max: f64,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    model: PathBuf,
    #[command(flatten)]
    cert: CertificateArgs,
    /// Certificate path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PlanArgs {
    model: PathBuf,
    #[arg(long, required_unless_present = "no_prune", conflicts_with = "no_prune")]
    cert: Option<PathBuf>,
    /// Exhaustive search over every action.
    #[arg(long)]
    no_prune: bool,
    /// Comma-separated belief; uniform when omitted.
    #[arg(long)]
    belief: Option<String>,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    depth: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct PolicyMapArgs {
    model: PathBuf,
    cert: PathBuf,
    /// Grid divisions per axis (two or three states).
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
    resolution: u64,
    /// Evaluate at this many uniformly drawn beliefs instead of a grid.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Tracking,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Variant {
    Small,
    Costed,
}

#[derive(Debug, Args)]
struct GenDomainArgs {
    #[arg(value_enum)]
    family: Family,
    #[arg(long, value_enum, default_value_t = Variant::Costed)]
    variant: Variant,
    /// Number of states (fixed at 3 for the small variant).
    #[arg(long)]
    states: Option<usize>,
    /// Number of actions (fixed at 3 for the small variant).
    #[arg(long)]
    actions: Option<usize>,
    /// Observation accuracy in (0, 1); 0.7 small, 0.8 costed by default.
    #[arg(long)]
    q: Option<f64>,
    /// Discount factor for the costed variant.
    #[arg(long)]
    discount: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ExperimentKind {
    Pruning,
    Gap,
    Sweep,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// Model file; defaults to the costed tracking model (8×3 for pruning,
    /// 16×8 for gap).
    #[arg(long)]
    model: Option<PathBuf>,
    /// Certificate file; computed from `--mode` when omitted.
    #[arg(long, conflicts_with = "trivial_cert")]
    cert: Option<PathBuf>,
    /// Use no bounds at all (every action allowed everywhere).
    #[arg(long)]
    trivial_cert: bool,
    #[command(flatten)]
    bounds: CertificateArgs,
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
    depths: Vec<usize>,
    /// Samples per depth or per cell (100 pruning/gap, 500 sweep).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep cells as `SxA`.
    #[arg(long, value_delimiter = ',', default_values_t = ["4x4".to_string(), "4x8".into(), "8x4".into(), "8x8".into(), "16x4".into(), "16x8".into()])]
    sizes: Vec<String>,
    /// Observation accuracy for generated sweep models.
    #[arg(long, default_value_t = 0.8)]
    q: f64,
    /// Maximum random filter steps from the uniform belief in sweeps.
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Expectimax depth for the gap experiment's reference action.
    #[arg(long, default_value_t = 3)]
    reference_depth: usize,
    /// Write zeros in the timing column so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    /// Exit code 1.
    Domain(String),
    /// Exit code 2.
    Input(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            Self::Domain(_) => 1,
            Self::Input(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Domain(m) | Self::Input(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<DomainError> for CliError {
    fn from(e: DomainError) -> Self {
        Self::Domain(e.to_string())
    }
}

impl From<MlrError> for CliError {
    fn from(e: MlrError) -> Self {
        match e {
            MlrError::File(m) => Self::Input(m),
            other => Self::Domain(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::Input(e.to_string())
    }
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (program name first) and runs the command, writing
/// reports to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Check(a) => cmd_check(&a, out),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Plan(a) => cmd_plan(&a, out),
        Command::PolicyMap(a) => cmd_policy_map(&a, out),
        Command::GenDomain(a) => cmd_gen_domain(&a, out),
        Command::Experiment(a) => cmd_experiment(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.code()
        }
    }
}

fn load(path: &Path) -> Result<PomdpModel<f64>, CliError> {
    model::load_model(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse_belief(text: &str, num_states: usize) -> Result<Belief<f64>, CliError> {
    let probs = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Input(format!("belief `{text}`: {e}")))?;
    if probs.len() != num_states {
        return Err(CliError::Input(format!(
            "belief has {} entries, model has {num_states} states",
            probs.len()
        )));
    }
    let belief = Belief::with_tolerance(probs, 1e-6).map_err(|e| CliError::Input(format!("belief `{text}`: {e}")))?;
    Belief::normalized(belief.into_vec()).map_err(|e| CliError::Input(e.to_string()))
}

fn one_based(indices: &[usize]) -> String {
    let parts: Vec<String> = indices.iter().map(|i| (i + 1).to_string()).collect();
    format!("({})", parts.join(", "))
}

fn assumption_label(a: Assumption) -> &'static str {
    match a {
        Assumption::A1 => "A1  (TP2 transitions and observations)",
        Assumption::A2Relaxed => "A2' (entrywise nonnegative D matrices)",
        Assumption::A2Sampled => "A2  (sampled copositivity of D matrices)",
        Assumption::A3 => "A3  (cumulative observation dominance)",
    }
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write) -> CliResult {
    let m = load(&args.model)?;
    let outcomes: Vec<CheckOutcome> = vec![
        structure::check_a1(&m),
        structure::check_a2_relaxed(&m),
        structure::check_a2_sampled(&m, args.copositivity_samples, args.seed),
        structure::check_a3(&m),
    ];
    let report = structure::StructureReport::from_outcomes(&outcomes);
    let ordering = structure::validate_update_ordering(&m, args.samples, args.seed);
    let pass = report.sufficient_conditions_hold();
    if args.json {
        let value = json!({
            "states": m.num_states(),
            "actions": m.num_actions(),
            "observations": m.num_observations(),
            "checks": outcomes.iter().map(|o| json!({
                "assumption": o.assumption,
                "pass": o.pass,
                "strength": o.assumption.strength(),
                "violations": o.violations,
                "counterexamples": o.counterexamples.iter().map(|c| json!({
                    "indices": c.indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "value": c.value,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "update_ordering": {
                "samples": ordering.samples,
                "likelihood_violations": ordering.likelihood_violations,
                "posterior_violations": ordering.posterior_violations,
                "posterior_checks": ordering.posterior_checks,
            },
            "sufficient_conditions_hold": pass,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("report serializes"))?;
        return Ok(if pass { 0 } else { 1 });
    }
    writeln!(
        out,
        "model: {} (S = {}, A = {}, Z = {})",
        args.model.display(),
        m.num_states(),
        m.num_actions(),
        m.num_observations()
    )?;
    for o in &outcomes {
        let verdict = if o.pass { "pass" } else { "FAIL" };
        writeln!(
            out,
            "{}: {verdict} [{}] violations = {}",
            assumption_label(o.assumption),
            o.assumption.strength(),
            o.violations
        )?;
        for c in &o.counterexamples {
            writeln!(out, "    counterexample {} value {}", one_based(&c.indices), fmt_real(c.value))?;
        }
    }
    writeln!(
        out,
        "update ordering: {} beliefs, {} likelihood violations, {} posterior violations in {} checks",
        ordering.samples, ordering.likelihood_violations, ordering.posterior_violations, ordering.posterior_checks
    )?;
    for v in &ordering.examples {
        let obs = v.observation.map(|z| format!(" observation {}", z + 1)).unwrap_or_default();
        writeln!(
            out,
            "    sample {} actions {} < {}{obs}",
            v.sample + 1,
            v.lower_action + 1,
            v.upper_action + 1
        )?;
    }
    writeln!(
        out,
        "verdict: {}",
        if pass {
            "sufficient conditions hold"
        } else {
            "sufficient conditions fail"
        }
    )?;
    Ok(if pass { 0 } else { 1 })
}

fn certificate_options(args: &CertificateArgs, m: &PomdpModel<f64>) -> Result<CertificateOptions<f64>, CliError> {
    let mode = match args.mode {
        ModeArg::Nominal => CertificateMode::Global(BoundMode::Nominal),
        ModeArg::Conservative => CertificateMode::Global(BoundMode::Conservative),
        ModeArg::AtBelief => {
            let text = args
                .at
                .as_deref()
                .ok_or_else(|| CliError::Input("--mode at-belief needs --at".into()))?;
            CertificateMode::AtBelief(parse_belief(text, m.num_states())?)
        }
    };
    Ok(CertificateOptions {
        mode,
        epsilon: args.epsilon,
        g_max: args.g_max,
        objective: args.objective.into(),
        ..CertificateOptions::new(BoundMode::Nominal)
    })
}

fn mode_name(mode: &CertificateMode<f64>) -> &'static str {
    match mode {
        CertificateMode::Global(BoundMode::Nominal) => "nominal",
        CertificateMode::Global(BoundMode::Conservative) => "conservative",
        CertificateMode::AtBelief(_) => "at_belief",
    }
}

fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> CliResult {
    let m = load(&args.model)?;
    let opts = certificate_options(&args.cert, &m)?;
    let cert = mlr::compute_certificate_with(&m, &opts)?;
    let status = |v: &Option<Vec<f64>>| if v.is_some() { "feasible" } else { "infeasible" };
    let mut notes = vec![
        "constraints bound phi(i+1) - phi(i) from below for g and from above for h, \
         so a state-increasing linear reward needs no transform"
            .to_string(),
    ];
    if m.reward().uncertainty == UncertaintyKind::RenyiQuadratic
        && opts.mode == CertificateMode::Global(BoundMode::Nominal)
    {
        notes.push(
            "nominal Renyi allowance 2*w_a is not a supremum over the simplex; \
             use --mode conservative for the provable 2*w_a*S"
                .to_string(),
        );
    }
    if args.json {
        let value = json!({
            "mode": mode_name(&cert.mode),
            "epsilon": cert.epsilon,
            "lower": {"status": status(&cert.g), "min_slack": cert.min_slack_g, "g": cert.g},
            "upper": {"status": status(&cert.h), "min_slack": cert.min_slack_h, "h": cert.h},
            "notes": notes,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("report serializes"))?;
    } else {
        writeln!(out, "mode: {}", mode_name(&cert.mode))?;
        writeln!(out, "epsilon: {}", fmt_real(cert.epsilon))?;
        writeln!(
            out,
            "lower (g): {} best min slack {}",
            status(&cert.g),
            fmt_real(cert.min_slack_g)
        )?;
        writeln!(
            out,
            "upper (h): {} best min slack {}",
            status(&cert.h),
            fmt_real(cert.min_slack_h)
        )?;
        for n in &notes {
            writeln!(out, "note: {n}")?;
        }
    }
    match &args.out {
        Some(path) => {
            mlr::save_certificate(&cert, path)?;
            if !args.json {
                writeln!(out, "certificate: {}", path.display())?;
            }
        }
        None if !args.json => writeln!(out, "{}", mlr::certificate_to_json(&cert))?,
        None => {}
    }
    Ok(0)
}

fn load_cert(path: &Path, m: &PomdpModel<f64>) -> Result<BoundCertificate<f64>, CliError> {
    mlr::load_certificate(path, m.num_states()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn trivial_cert() -> BoundCertificate<f64> {
    BoundCertificate::trivial(CertificateMode::Global(BoundMode::Nominal))
}

fn cmd_plan(args: &PlanArgs, out: &mut dyn Write) -> CliResult {
    let m = load(&args.model)?;
    let b = match &args.belief {
        Some(text) => parse_belief(text, m.num_states())?,
        None => Belief::uniform(m.num_states()),
    };
    let cert = match &args.cert {
        Some(path) => load_cert(path, &m)?,
        None => trivial_cert(),
    };
    let depth = args.depth as usize;
    let start = Instant::now();
    let res = planner::branch_and_bound(&m, &cert, &b, depth);
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let iv = mlr::action_interval(&m, &cert, &b);
    if args.json {
        let value = json!({
            "best_action": res.best_action + 1,
            "value": res.value,
            "interval": [iv.lower + 1, iv.upper + 1],
            "root_values": res.root_values.iter().map(|(a, q)| json!([a + 1, q])).collect::<Vec<_>>(),
            "expanded": res.expanded,
            "pruned": res.pruned,
            "pruned_fraction": res.pruned_fraction(),
            "depth": depth,
            "wall_ms": ms,
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("report serializes"))?;
        return Ok(0);
    }
    writeln!(out, "best action: {}", res.best_action + 1)?;
    writeln!(out, "value: {}", fmt_real(res.value))?;
    writeln!(
        out,
        "interval: [{}, {}]{}",
        iv.lower + 1,
        iv.upper + 1,
        if iv.widened { " (widened: bounds crossed)" } else { "" }
    )?;
    for (a, q) in &res.root_values {
        writeln!(out, "  Q(action {}) = {}", a + 1, fmt_real(*q))?;
    }
    writeln!(out, "expanded: {}", res.expanded)?;
    writeln!(out, "pruned: {}", res.pruned)?;
    writeln!(out, "pruned fraction: {}", fmt_real(res.pruned_fraction()))?;
    writeln!(out, "wall time: {ms:.3} ms")?;
    Ok(0)
}

/// Points `k / n` of the simplex for two or three states.
fn simplex_grid(num_states: usize, n: usize) -> Vec<Vec<f64>> {
    let nf = n as f64;
    match num_states {
        2 => (0..=n).map(|i| vec![i as f64 / nf, (n - i) as f64 / nf]).collect(),
        _ => {
            let mut pts = Vec::new();
            for i in 0..=n {
                for j in 0..=n - i {
                    pts.push(vec![i as f64 / nf, j as f64 / nf, (n - i - j) as f64 / nf]);
                }
            }
            pts
        }
    }
}

/// Interval over a simplex grid (or sampled beliefs) as CSV rows.
pub fn policy_map(
    model: &PomdpModel<f64>,
    cert: &BoundCertificate<f64>,
    resolution: usize,
    samples: Option<(usize, u64)>,
) -> Result<(Vec<PolicyMapRow>, usize), String> {
    let s = model.num_states();
    let points: Vec<Vec<f64>> = match samples {
        Some((n, seed)) => planner::sample_seeds(seed, n)
            .into_iter()
            .map(|k| filter::sample_belief::<f64>(s, k).into_vec())
            .collect(),
        None if (2..=3).contains(&s) => simplex_grid(s, resolution),
        None => return Err(format!("a grid needs 2 or 3 states, model has {s}; use --samples")),
    };
    let bounds = PolicyBounds::new(model, cert);
    let mut widened = 0;
    let rows = points
        .into_iter()
        .map(|belief| {
            let iv = bounds.interval(&belief);
            widened += usize::from(iv.widened);
            PolicyMapRow {
                belief,
                lower: iv.lower + 1,
                upper: iv.upper + 1,
                agree: iv.lower == iv.upper,
            }
        })
        .collect();
    Ok((rows, widened))
}

fn csv_sink(path: &Option<PathBuf>, out: &mut dyn Write, write: impl FnOnce(&mut dyn Write) -> csv::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?);
            write(&mut f)?;
            f.flush()?;
        }
        None => write(out)?,
    }
    Ok(())
}

fn cmd_policy_map(args: &PolicyMapArgs, out: &mut dyn Write) -> CliResult {
    let m = load(&args.model)?;
    let cert = load_cert(&args.cert, &m)?;
    let (rows, widened) = policy_map(&m, &cert, args.resolution as usize, args.samples.map(|n| (n, args.seed)))
        .map_err(CliError::Input)?;
    csv_sink(&args.out, out, |w| tables::write_policy_map(w, m.num_states(), &rows))?;
    if let Some(p) = &args.out {
        let agree = rows.iter().filter(|r| r.agree).count();
        writeln!(out, "wrote {} rows to {} ({agree} agree, {widened} widened)", rows.len(), p.display())?;
    }
    Ok(0)
}

fn cmd_gen_domain(args: &GenDomainArgs, out: &mut dyn Write) -> CliResult {
    let Family::Tracking = args.family;
    let m = match args.variant {
        Variant::Small => {
            if args.states.is_some_and(|s| s != 3) || args.actions.is_some_and(|a| a != 3) {
                return Err(CliError::Domain("the small variant has exactly 3 states and 3 actions".into()));
            }
            if args.discount.is_some() {
                return Err(CliError::Domain("the small variant has a fixed discount".into()));
            }
            domains::tracking_model_small_with_q(args.q.unwrap_or(0.7))?
        }
        Variant::Costed => {
            let (s, a) = (args.states.unwrap_or(8), args.actions.unwrap_or(3));
            let overrides = CostedOverrides {
                params: None,
                discount: args.discount,
            };
            domains::tracking_model_costed(s, a, args.q.unwrap_or(0.8), overrides)?
        }
    };
    let report = m.validate();
    if !report.passed {
        return Err(CliError::Domain(report.to_string()));
    }
    model::save_model(&m, &args.out)?;
    writeln!(
        out,
        "wrote {} (S = {}, A = {}, Z = {})",
        args.out.display(),
        m.num_states(),
        m.num_actions(),
        m.num_observations()
    )?;
    Ok(0)
}

fn experiment_cert(args: &ExperimentArgs, m: &PomdpModel<f64>) -> Result<BoundCertificate<f64>, CliError> {
    if args.trivial_cert {
        return Ok(trivial_cert());
    }
    match &args.cert {
        Some(path) => load_cert(path, m),
        None => Ok(mlr::compute_certificate_with(m, &certificate_options(&args.bounds, m)?)?),
    }
}

fn parse_size(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("size `{text}` is not of the form SxA"));
    let (s, a) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((s.trim().parse().map_err(|_| bad())?, a.trim().parse().map_err(|_| bad())?))
}

fn cmd_experiment(args: &ExperimentArgs, out: &mut dyn Write) -> CliResult {
    let default_model = |s, a| -> Result<PomdpModel<f64>, CliError> {
        Ok(domains::tracking_model_costed(s, a, args.q, CostedOverrides::default())?)
    };
    match args.kind {
        ExperimentKind::Pruning => {
            let m = match &args.model {
                Some(p) => load(p)?,
                None => default_model(8, 3)?,
            };
            if args.depths.contains(&0) {
                return Err(CliError::Input("depths must be at least 1".into()));
            }
            let cert = experiment_cert(args, &m)?;
            let stats = planner::pruning_experiment(&m, &cert, &args.depths, args.samples.unwrap_or(100), args.seed);
            let rows: Vec<PruningCsvRow> = stats
                .rows
                .iter()
                .map(|r| PruningCsvRow {
                    depth: r.depth,
                    n_samples: r.n_samples,
                    mean_pruned_frac: r.mean_pruned_frac,
                    min: r.min_pruned_frac,
                    max: r.max_pruned_frac,
                    mean_ms: if args.no_timing { 0.0 } else { r.mean_ms },
                })
                .collect();
            csv_sink(&args.out, out, |w| tables::write_pruning(w, &rows))?;
        }
        ExperimentKind::Gap => {
            let m = match &args.model {
                Some(p) => load(p)?,
                None => default_model(16, 8)?,
            };
            if args.reference_depth == 0 {
                return Err(CliError::Input("--reference-depth must be at least 1".into()));
            }
            let cert = experiment_cert(args, &m)?;
            let g = planner::bound_gap_experiment(
                &m,
                &cert,
                args.samples.unwrap_or(100),
                args.seed,
                Some(args.reference_depth),
            );
            let rows = [GapCsvRow {
                n_samples: g.n_samples,
                mean_width: g.mean_width,
                reference_depth: g.reference_depth,
                mean_upper_distance: g.mean_upper_distance,
                mean_lower_distance: g.mean_lower_distance,
                contained_fraction: g.contained_fraction,
            }];
            csv_sink(&args.out, out, |w| tables::write_gap(w, &rows))?;
        }
        ExperimentKind::Sweep => {
            if args.model.is_some() || args.cert.is_some() {
                return Err(CliError::Input("sweep generates its own models; use --sizes".into()));
            }
            let sizes = args.sizes.iter().map(|s| parse_size(s)).collect::<Result<Vec<_>, _>>()?;
            let mut rows = Vec::with_capacity(sizes.len());
            for (s, a) in sizes {
                let m = default_model(s, a)?;
                let cert = experiment_cert(args, &m)?;
                let st = planner::action_pruning_experiment(&m, &cert, args.samples.unwrap_or(500), args.steps, args.seed);
                rows.push(SweepCsvRow {
                    states: s,
                    actions: a,
                    min_pct: 100.0 * st.min_frac,
                    mean_pct: 100.0 * st.mean_frac,
                    max_pct: 100.0 * st.max_frac,
                    feasible: cert.g.is_some() && cert.h.is_some(),
                });
            }
            csv_sink(&args.out, out, |w| tables::write_sweep(w, &rows))?;
        }
    }
    if let Some(p) = &args.out {
        writeln!(out, "wrote {}", p.display())?;
    }
    Ok(0)
}
