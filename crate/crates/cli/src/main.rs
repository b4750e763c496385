//! chanrev: reversibility diagnostics for quantum channels.
//!
//! Every subcommand reads a "chanrev/1" problem file (states, channel,
//! options), runs one analysis, and emits JSON to stdout or `--out`.
//! Exit codes: 64 usage, 65 bad data, 70 numerical failure; `diagnose`
//! additionally maps its verdict to 0 (holds), 2 (fails), 3 (inconclusive).

mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use chanrev::channels::{Channel, DensityOperator};
use chanrev::counterexamples::{bures_instance, fdiv_instance, Counterexample};
use chanrev::divergences::{f_divergence, ExtReal, OperatorConvexFunction};
use chanrev::fisher::{chi2_divergence, fisher_metric, MonotoneFunction};
use chanrev::reversibility::{check_conditions, matrix_entries, CheckOptions, Verdict};
use chanrev::testing::{chernoff, hoeffding, np_test};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "chanrev",
    version,
    about = "Reversibility diagnostics for quantum channels",
    after_help = "Set CHANREV_THREADS to run the diagnose battery on several threads; \
                  every condition result is identical either way (the report echoes \
                  the thread count it ran with)."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the full condition battery and report a verdict.
    Diagnose(DiagnoseArgs),
    /// Build the recovery channel for the reference state and apply it to
    /// every state's image.
    Recover(ProblemArgs),
    /// Compare an f-divergence across the channel, state by state.
    Divergence(DivergenceArgs),
    /// Compare Chernoff exponents across the channel, state by state.
    Chernoff(ProblemArgs),
    /// Compare Hoeffding exponents across the channel at a rate.
    Hoeffding(HoeffdingArgs),
    /// Compare a monotone metric and its chi^2 divergence across the channel.
    Fisher(FisherArgs),
    /// Optimal test of each state against t times the reference, both sides.
    NpTest(NpTestArgs),
    /// Emit a built-in matched-but-irreversible instance as a problem file.
    Counterexample(CounterexampleArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file, JSON, version "chanrev/1".
    file: PathBuf,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    base: ProblemArgs,
    #[command(flatten)]
    tuning: TuningFlags,
}

/// Overrides applied on top of the problem file's options; defaults live in
/// the library and are echoed back in the report.
#[derive(Args)]
struct TuningFlags {
    /// Residuals at or below this count as holding.
    #[arg(long)]
    hold_tol: Option<f64>,
    /// Residuals at or above this count as failing.
    #[arg(long)]
    fail_tol: Option<f64>,
    /// Comma-separated cocycle times, each used at +t and -t.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    /// Comma-separated power-trace exponents in (0, 1).
    #[arg(long, value_delimiter = ',')]
    s_powers: Option<Vec<f64>>,
    /// Comma-separated Hoeffding rates.
    #[arg(long, value_delimiter = ',')]
    r_grid: Option<Vec<f64>>,
    /// Comma-separated modular rotation parameters.
    #[arg(long, value_delimiter = ',')]
    modular_grid: Option<Vec<f64>>,
    /// Largest tensor power for the n-copy trace norm equality.
    #[arg(long)]
    n_copy_cap: Option<usize>,
    /// Hard cap on tensor product dimension.
    #[arg(long)]
    tensor_size_cap: Option<usize>,
    /// Seed for the sampled positivity profile.
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count for the positivity profile.
    #[arg(long)]
    samples: Option<usize>,
    /// Refuse singular reference states instead of compressing onto supports.
    #[arg(long)]
    strict_support: bool,
    /// Override the Hoeffding rate cap.
    #[arg(long)]
    s0: Option<f64>,
    /// Worker threads for the condition battery.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DivergenceArgs {
    #[command(flatten)]
    base: ProblemArgs,
    /// xlogx | inv_one_plus | one_minus_power:S with S in (0, 1)
    #[arg(long)]
    f: String,
}

#[derive(Args)]
struct HoeffdingArgs {
    #[command(flatten)]
    base: ProblemArgs,
    /// Rate, at least 0.
    #[arg(long, default_value_t = 0.0)]
    r: f64,
}

#[derive(Args)]
struct FisherArgs {
    #[command(flatten)]
    base: ProblemArgs,
    /// bures | kubo_mori | rld | rich
    #[arg(long)]
    f: String,
}

#[derive(Args)]
struct NpTestArgs {
    #[command(flatten)]
    base: ProblemArgs,
    /// Threshold weight on the reference state, at least 0.
    #[arg(long)]
    t: f64,
}

#[derive(Args)]
struct CounterexampleArgs {
    /// fdiv | bures
    name: String,
    /// Write the problem file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(m: impl Into<String>) -> Self {
        Failure {
            code: 64,
            message: m.into(),
        }
    }
    fn data(m: impl Into<String>) -> Self {
        Failure {
            code: 65,
            message: m.into(),
        }
    }
    fn numeric(m: impl Into<String>) -> Self {
        Failure {
            code: 70,
            message: m.into(),
        }
    }
}

impl From<chanrev::Error> for Failure {
    fn from(e: chanrev::Error) -> Self {
        Failure::numeric(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(64)
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("chanrev: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.cmd {
        Cmd::Diagnose(a) => cmd_diagnose(a),
        Cmd::Recover(a) => cmd_recover(a),
        Cmd::Divergence(a) => cmd_divergence(a),
        Cmd::Chernoff(a) => cmd_chernoff(a),
        Cmd::Hoeffding(a) => cmd_hoeffding(a),
        Cmd::Fisher(a) => cmd_fisher(a),
        Cmd::NpTest(a) => cmd_np_test(a),
        Cmd::Counterexample(a) => cmd_counterexample(a),
    }
}

fn load(path: &PathBuf) -> Result<(problem::ProblemFile, problem::LoadedProblem), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let pf: problem::ProblemFile = serde_json::from_str(&text)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    let lp = pf.build().map_err(Failure::data)?;
    Ok((pf, lp))
}

fn nonempty_family(lp: &problem::LoadedProblem) -> Result<(), Failure> {
    if lp.family.is_empty() {
        return Err(Failure::data(format!(
            "states: only {:?} present, add at least one family member",
            problem::REFERENCE_STATE
        )));
    }
    Ok(())
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Failure::numeric(format!("serialization: {e}")))?;
    text.push('\n');
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::numeric(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var("CHANREV_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("CHANREV_THREADS={v:?} is not an integer")))?;
            if n == 0 {
                return Err(Failure::usage("CHANREV_THREADS must be at least 1"));
            }
            Ok(Some(n))
        }
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Failure::usage(format!("CHANREV_THREADS: {e}"))),
    }
}

impl TuningFlags {
    fn apply(&self, base: &mut CheckOptions) {
        macro_rules! put {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { base.$field = v.clone(); })*
            };
        }
        put!(
            hold_tol, fail_tol, t_grid, s_powers, r_grid, modular_grid, n_copy_cap,
            tensor_size_cap, seed, samples, threads
        );
        if self.strict_support {
            base.strict_support = true;
        }
        if self.s0.is_some() {
            base.s0 = self.s0;
        }
    }
}

fn cmd_diagnose(a: DiagnoseArgs) -> Result<ExitCode, Failure> {
    let (_, mut lp) = load(&a.base.file)?;
    nonempty_family(&lp)?;
    a.tuning.apply(&mut lp.options);
    if let Some(n) = threads_from_env()? {
        lp.options.threads = n;
    }
    let family: Vec<DensityOperator> = lp.family.iter().map(|(_, s)| s.clone()).collect();
    let report = check_conditions(&lp.channel, &family, &lp.rho, &lp.options)?;
    emit(&report, &a.base.out)?;
    Ok(match report.verdict {
        Verdict::Holds => ExitCode::SUCCESS,
        Verdict::Fails => ExitCode::from(2),
        Verdict::Inconclusive => ExitCode::from(3),
    })
}

#[derive(Serialize)]
struct RecoveredRow {
    state: String,
    /// Frobenius distance between the recovered state and the original.
    residual: f64,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct RecoverOutput {
    reference: &'static str,
    /// True when singular supports forced the construction through a
    /// compressed problem before extension back to the ambient spaces.
    compressed: bool,
    in_dim: usize,
    out_dim: usize,
    trace_preserving_residual: f64,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
    super_matrix: Vec<Vec<[f64; 2]>>,
    recovered: Vec<RecoveredRow>,
}

fn build_recovery(
    t: &Channel,
    rho: &DensityOperator,
    strict: bool,
) -> chanrev::Result<(Channel, bool)> {
    let t_rho = t.apply_to_state(rho)?;
    if rho.is_invertible() && t_rho.is_invertible() {
        return Ok((t.petz_recovery(rho)?, false));
    }
    if strict {
        return Err(chanrev::Error::SupportViolation(
            "reference state or its image is singular and strict support handling is on".into(),
        ));
    }
    let comp = t.restrict_to_support(rho)?;
    let rec = comp.channel.petz_recovery(&comp.rho)?;
    Ok((comp.extend_recovery(&rec, rho)?, true))
}

fn cmd_recover(a: ProblemArgs) -> Result<ExitCode, Failure> {
    let (_, lp) = load(&a.file)?;
    let (rec, compressed) = build_recovery(&lp.channel, &lp.rho, lp.options.strict_support)?;
    let kraus = rec
        .kraus_decomposition()?
        .iter()
        .map(|k| matrix_entries(k))
        .collect();

    let mut rows = Vec::with_capacity(lp.family.len() + 1);
    let reference = (problem::REFERENCE_STATE.to_string(), lp.rho.clone());
    for (name, state) in std::iter::once(&reference).chain(lp.family.iter()) {
        let image = lp.channel.apply_to_state(state)?;
        let back = rec.apply(image.matrix()).hermitize();
        rows.push(RecoveredRow {
            state: name.clone(),
            residual: (&back - state.matrix()).frobenius_norm(),
            matrix: matrix_entries(&back),
        });
    }

    emit(
        &RecoverOutput {
            reference: problem::REFERENCE_STATE,
            compressed,
            in_dim: rec.in_dim(),
            out_dim: rec.out_dim(),
            trace_preserving_residual: rec.tp_residual(),
            kraus,
            super_matrix: matrix_entries(rec.super_matrix()),
            recovered: rows,
        },
        &a.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

fn parse_convex(tag: &str) -> Result<OperatorConvexFunction, Failure> {
    match tag {
        "xlogx" => Ok(OperatorConvexFunction::xlogx()),
        "inv_one_plus" => Ok(OperatorConvexFunction::inv_one_plus()),
        _ => {
            if let Some(s) = tag.strip_prefix("one_minus_power:") {
                let s: f64 = s
                    .parse()
                    .map_err(|_| Failure::usage(format!("--f {tag}: bad exponent")))?;
                return OperatorConvexFunction::one_minus_power(s)
                    .map_err(|e| Failure::usage(format!("--f {tag}: {e}")));
            }
            Err(Failure::usage(format!(
                "--f {tag}: expected xlogx, inv_one_plus, or one_minus_power:S"
            )))
        }
    }
}

#[derive(Serialize)]
struct GapRow<T: Serialize> {
    state: String,
    input: T,
    output: T,
    /// input minus output; nonnegative whenever the quantity is monotone
    /// and the value pair is finite.
    gap: ExtReal,
}

fn ext_gap(input: &ExtReal, output: &ExtReal) -> ExtReal {
    match (input.value(), output.value()) {
        (Some(a), Some(b)) => ExtReal::Finite(a - b),
        (None, None) => ExtReal::Finite(0.0),
        _ => ExtReal::PlusInfinity,
    }
}

#[derive(Serialize)]
struct DivergenceOutput {
    f: String,
    reference: &'static str,
    rows: Vec<GapRow<f64>>,
}

fn cmd_divergence(a: DivergenceArgs) -> Result<ExitCode, Failure> {
    let f = parse_convex(&a.f)?;
    let (_, lp) = load(&a.base.file)?;
    nonempty_family(&lp)?;
    let t_rho = lp.channel.apply_to_state(&lp.rho)?;
    let mut rows = Vec::with_capacity(lp.family.len());
    for (name, sigma) in &lp.family {
        let t_sigma = lp.channel.apply_to_state(sigma)?;
        let input = f_divergence(&f, sigma, &lp.rho)?;
        let output = f_divergence(&f, &t_sigma, &t_rho)?;
        rows.push(GapRow {
            state: name.clone(),
            input,
            output,
            gap: ExtReal::Finite(input - output),
        });
    }
    emit(
        &DivergenceOutput {
            f: f.name(),
            reference: problem::REFERENCE_STATE,
            rows,
        },
        &a.base.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct ChernoffSide {
    exponent: ExtReal,
    minimizer: f64,
    min_value: f64,
}

#[derive(Serialize)]
struct ChernoffRow {
    state: String,
    input: ChernoffSide,
    output: ChernoffSide,
    gap: ExtReal,
}

#[derive(Serialize)]
struct ChernoffOutput {
    reference: &'static str,
    rows: Vec<ChernoffRow>,
}

fn cmd_chernoff(a: ProblemArgs) -> Result<ExitCode, Failure> {
    let (_, lp) = load(&a.file)?;
    nonempty_family(&lp)?;
    let t_rho = lp.channel.apply_to_state(&lp.rho)?;
    let mut rows = Vec::with_capacity(lp.family.len());
    for (name, sigma) in &lp.family {
        let t_sigma = lp.channel.apply_to_state(sigma)?;
        let cin = chernoff(sigma, &lp.rho)?;
        let cout = chernoff(&t_sigma, &t_rho)?;
        rows.push(ChernoffRow {
            state: name.clone(),
            gap: ext_gap(&cin.exponent, &cout.exponent),
            input: ChernoffSide {
                exponent: cin.exponent,
                minimizer: cin.minimizer,
                min_value: cin.min_value,
            },
            output: ChernoffSide {
                exponent: cout.exponent,
                minimizer: cout.minimizer,
                min_value: cout.min_value,
            },
        });
    }
    emit(
        &ChernoffOutput {
            reference: problem::REFERENCE_STATE,
            rows,
        },
        &a.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct HoeffdingOutput {
    rate: f64,
    rows: Vec<GapRow<ExtReal>>,
}

fn cmd_hoeffding(a: HoeffdingArgs) -> Result<ExitCode, Failure> {
    if !(a.r >= 0.0) {
        return Err(Failure::usage(format!("--r {}: rate must be at least 0", a.r)));
    }
    let (_, lp) = load(&a.base.file)?;
    nonempty_family(&lp)?;
    let t_rho = lp.channel.apply_to_state(&lp.rho)?;
    let mut rows = Vec::with_capacity(lp.family.len());
    for (name, sigma) in &lp.family {
        let t_sigma = lp.channel.apply_to_state(sigma)?;
        let input = hoeffding(sigma, &lp.rho, a.r)?;
        let output = hoeffding(&t_sigma, &t_rho, a.r)?;
        rows.push(GapRow {
            state: name.clone(),
            gap: ext_gap(&input, &output),
            input,
            output,
        });
    }
    emit(&HoeffdingOutput { rate: a.r, rows }, &a.base.out)?;
    Ok(ExitCode::SUCCESS)
}

fn parse_monotone(tag: &str, t: &Channel) -> Result<MonotoneFunction, Failure> {
    match tag {
        "bures" => Ok(MonotoneFunction::bures()),
        "kubo_mori" => Ok(MonotoneFunction::kubo_mori()),
        "rld" => Ok(MonotoneFunction::rld()),
        "rich" => Ok(MonotoneFunction::rich(t.in_dim(), t.out_dim())),
        _ => Err(Failure::usage(format!(
            "--f {tag}: expected bures, kubo_mori, rld, or rich"
        ))),
    }
}

#[derive(Serialize)]
struct FisherRow {
    state: String,
    /// Metric along the direction from the reference to the state.
    metric_input: f64,
    metric_output: f64,
    metric_gap: f64,
    chi2_input: f64,
    chi2_output: f64,
    chi2_gap: f64,
}

#[derive(Serialize)]
struct FisherOutput {
    f: &'static str,
    reference: &'static str,
    rows: Vec<FisherRow>,
}

fn cmd_fisher(a: FisherArgs) -> Result<ExitCode, Failure> {
    let (_, lp) = load(&a.base.file)?;
    nonempty_family(&lp)?;
    let f = parse_monotone(&a.f, &lp.channel)?;
    let t_rho = lp.channel.apply_to_state(&lp.rho)?;
    let mut rows = Vec::with_capacity(lp.family.len());
    for (name, sigma) in &lp.family {
        let t_sigma = lp.channel.apply_to_state(sigma)?;
        let x = sigma.matrix() - lp.rho.matrix();
        let tx = lp.channel.apply(&x);
        let metric_input = fisher_metric(&lp.rho, &x, &x, &f)?;
        let metric_output = fisher_metric(&t_rho, &tx, &tx, &f)?;
        let chi2_input = chi2_divergence(sigma, &lp.rho, &f)?;
        let chi2_output = chi2_divergence(&t_sigma, &t_rho, &f)?;
        rows.push(FisherRow {
            state: name.clone(),
            metric_input,
            metric_output,
            metric_gap: metric_input - metric_output,
            chi2_input,
            chi2_output,
            chi2_gap: chi2_input - chi2_output,
        });
    }
    emit(
        &FisherOutput {
            f: f.name(),
            reference: problem::REFERENCE_STATE,
            rows,
        },
        &a.base.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct NpSide {
    positive_part_trace: f64,
    l1_norm: f64,
    positive_rank: usize,
    zero_rank: usize,
    positive_projection: Vec<Vec<[f64; 2]>>,
    zero_projection: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct NpRow {
    state: String,
    input: NpSide,
    output: NpSide,
}

#[derive(Serialize)]
struct NpOutput {
    t: f64,
    reference: &'static str,
    rows: Vec<NpRow>,
}

fn np_side(sigma: &DensityOperator, rho: &DensityOperator, t: f64) -> chanrev::Result<NpSide> {
    let r = np_test(sigma, rho, t)?;
    Ok(NpSide {
        positive_part_trace: r.positive_part_trace,
        l1_norm: r.l1_norm,
        positive_rank: r.positive_rank,
        zero_rank: r.zero_rank,
        positive_projection: matrix_entries(&r.positive_projection),
        zero_projection: matrix_entries(&r.zero_projection),
    })
}

fn cmd_np_test(a: NpTestArgs) -> Result<ExitCode, Failure> {
    if !(a.t >= 0.0) {
        return Err(Failure::usage(format!(
            "--t {}: threshold must be at least 0",
            a.t
        )));
    }
    let (_, lp) = load(&a.base.file)?;
    nonempty_family(&lp)?;
    let t_rho = lp.channel.apply_to_state(&lp.rho)?;
    let mut rows = Vec::with_capacity(lp.family.len());
    for (name, sigma) in &lp.family {
        let t_sigma = lp.channel.apply_to_state(sigma)?;
        rows.push(NpRow {
            state: name.clone(),
            input: np_side(sigma, &lp.rho, a.t)?,
            output: np_side(&t_sigma, &t_rho, a.t)?,
        });
    }
    emit(
        &NpOutput {
            t: a.t,
            reference: problem::REFERENCE_STATE,
            rows,
        },
        &a.base.out,
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Diagnostics {
    name: &'static str,
    statement: String,
    matched_name: &'static str,
    matched_input: f64,
    matched_output: f64,
    matched_gap: f64,
    separating_name: &'static str,
    separating_input: f64,
    separating_output: f64,
    separating_gap: f64,
    recovery_residual: f64,
    support_atoms: usize,
    required_atoms: usize,
    /// [sigma, witness] for the divergence instance, [sigma, rho] for the
    /// metric one; nonvanishing is what keeps the instance noncommutative.
    commutator_norm: f64,
    witness: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize)]
struct CounterexampleOutput {
    #[serde(flatten)]
    problem: problem::ProblemFile,
    diagnostics: Diagnostics,
}

fn cmd_counterexample(a: CounterexampleArgs) -> Result<ExitCode, Failure> {
    let cx: Counterexample = match a.name.as_str() {
        "fdiv" => fdiv_instance()?,
        "bures" => bures_instance()?,
        _ => {
            return Err(Failure::usage(format!(
                "{}: expected fdiv or bures",
                a.name
            )))
        }
    };
    let commutator_norm = match cx.name {
        "fdiv" => cx.sigma.matrix().commutator(&cx.witness).frobenius_norm(),
        _ => cx.sigma.matrix().commutator(cx.rho.matrix()).frobenius_norm(),
    };

    let mut states = std::collections::BTreeMap::new();
    states.insert(
        problem::REFERENCE_STATE.to_string(),
        problem::record_from_matrix(cx.rho.matrix()),
    );
    states.insert(
        "sigma".to_string(),
        problem::record_from_matrix(cx.sigma.matrix()),
    );
    let out = CounterexampleOutput {
        problem: problem::ProblemFile {
            version: problem::VERSION.to_string(),
            states,
            channel: problem::record_from_channel(&cx.channel),
            options: problem::OptionPatch::default(),
        },
        diagnostics: Diagnostics {
            name: cx.name,
            statement: cx.statement.clone(),
            matched_name: cx.matched_name,
            matched_input: cx.matched_in,
            matched_output: cx.matched_out,
            matched_gap: cx.matched_gap,
            separating_name: cx.separating_name,
            separating_input: cx.separating_in,
            separating_output: cx.separating_out,
            separating_gap: cx.separating_gap,
            recovery_residual: cx.recovery_residual,
            support_atoms: cx.support_atoms,
            required_atoms: cx.required_atoms,
            commutator_norm,
            witness: matrix_entries(&cx.witness),
        },
    };
    emit(&out, &a.out)?;
    Ok(ExitCode::SUCCESS)
}
