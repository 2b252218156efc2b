//! Command-line surface. `run` maps argv to an exit code: 0 ok, 1 a verify
//! verdict failed, 2 usage, 3 numeric failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::bound::{BoundContext, CenterMode};
use crate::characteristics::Characteristics;
use crate::conditions::{check_condition, CheckParams, ConditionId, ConditionReport};
use crate::density::{density_values, InversionSettings};
use crate::error::{LevyError, Result};
use crate::harness::{
    comparability_report, example_grid, monte_carlo_crosscheck, standard_times, verify_equivalence_chain,
    verify_example, verify_lemma_suite, BoundId, ComparabilityReport, ExampleName, JointVerdict, XGrid,
};
use crate::model::{builtin, LevyModel};
use crate::roots::{decade_grid, lin_space};
use crate::sampler::{empirical_density, sample_increments, HistogramGrid, SamplerSettings, SmallJumpMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "levyhk", version, about = "Heat kernel estimates for Lévy processes")]
struct Cli {
    /// Worker threads; falls back to LEVYHK_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// h, K, Ψ* at radii, or a CSV table over a log grid.
    Characteristics(CharArgs),
    /// Check structural conditions.
    Check(CheckArgs),
    /// ρ_t on a grid of offsets from the center.
    Bound(BoundArgs),
    /// Transition density by Fourier inversion.
    Density(DensityArgs),
    /// Monte Carlo histogram of X_t.
    Sample(SampleArgs),
    /// Run a certification experiment.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize)]
struct ModelArgs {
    /// Model JSON file or builtin name (cauchy, stable-1.5, truncated-1-1, ...).
    #[arg(long)]
    model: String,
    /// Dimension of a builtin model.
    #[arg(long, default_value_t = 1)]
    dim: usize,
}

#[derive(Args, Debug, Serialize, Clone, Copy)]
struct TolArgs {
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-13)]
    tail_eps: f64,
    #[arg(long, default_value_t = 200_000)]
    panel_budget: usize,
}

impl TolArgs {
    fn settings(&self) -> Result<InversionSettings> {
        let s = InversionSettings {
            tail_epsilon: self.tail_eps,
            panel_budget: self.panel_budget,
            rel_tol: self.rel_tol,
            ..InversionSettings::default()
        };
        s.validate()?;
        Ok(s)
    }
}

#[derive(Args, Debug, Serialize)]
struct CharArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Radii to print; comma separated.
    #[arg(long, value_delimiter = ',')]
    r: Vec<f64>,
    /// Log grid lo:hi:per_decade for a CSV table.
    #[arg(long)]
    grid: Option<String>,
    /// Dump the internal radial tables.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Conditions to check; all when omitted.
    #[arg(long, value_delimiter = ',')]
    condition: Vec<String>,
    /// Radius window lo:hi.
    #[arg(long)]
    window: Option<String>,
    /// Times for time-indexed conditions; comma separated.
    #[arg(long, value_delimiter = ',')]
    times: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BoundArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Offsets lo:hi:n along each axis.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[arg(long, default_value = "h-inverse")]
    center_mode: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct DensityArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    /// Points lo:hi:n along each axis.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    #[command(flatten)]
    tol: TolArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    t: f64,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Jump cutoff ε.
    #[arg(long, default_value_t = 0.01)]
    eps: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    bins: usize,
    #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
    lo: f64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    hi: f64,
    /// gaussian-substitute or drop-with-compensation.
    #[arg(long, default_value = "gaussian-substitute")]
    small_jumps: String,
    #[arg(long, default_value_t = 1e9)]
    jump_budget: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    /// example1, example2, chain, lemmas or two-sided.
    #[arg(long)]
    experiment: String,
    /// Required for chain, lemmas and two-sided.
    #[arg(long)]
    model: Option<String>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Output directory for report.json and ratios.csv.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Time grid lo:hi:per_decade.
    #[arg(long)]
    times: Option<String>,
    /// x radii per decade.
    #[arg(long, default_value_t = 8)]
    per_decade: usize,
    /// Horizon T of the chain; inf allowed.
    #[arg(long, default_value_t = f64::INFINITY)]
    horizon: f64,
    #[arg(long, default_value = "rho")]
    bound: String,
    #[arg(long, default_value = "h-inverse")]
    center_mode: String,
    /// Monte Carlo re-check of this many report points (0 skips).
    #[arg(long, default_value_t = 0)]
    crosscheck: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    tol: TolArgs,
}

enum Failure {
    Usage(String),
    Numeric(LevyError),
}

impl From<LevyError> for Failure {
    fn from(e: LevyError) -> Self {
        match e {
            LevyError::Parse(_) | LevyError::Io(_) | LevyError::InvalidParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other),
        }
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parse argv (program name first) and dispatch.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli
        .threads
        .or_else(|| std::env::var("LEVYHK_THREADS").ok().and_then(|v| v.parse().ok()));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric failure: {e}");
            EXIT_NUMERIC
        }
    }
}

fn dispatch(cmd: Command) -> Outcome {
    match cmd {
        Command::Characteristics(a) => characteristics(a),
        Command::Check(a) => check(a),
        Command::Bound(a) => bound(a),
        Command::Density(a) => density(a),
        Command::Sample(a) => sample(a),
        Command::Verify(a) => verify(a),
    }
}

/// A JSON file, or a builtin name resolved in `dim` dimensions.
pub fn load_model(spec: &str, dim: usize) -> Result<LevyModel> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = fs::read_to_string(path)?;
        return LevyModel::from_json(&text);
    }
    if dim == 0 {
        return Err(LevyError::Parse("dimension must be positive".into()));
    }
    let mut all = builtin::all(dim);
    all.push(builtin::one_sided(1.0, dim));
    if dim == 1 {
        all.push(crate::harness::example_model(ExampleName::Example1));
        all.push(crate::harness::example_model(ExampleName::Example2));
    }
    let wanted = spec.trim_end_matches(&format!("{dim}d")).trim_end_matches('-');
    all.into_iter()
        .find(|m| m.name() == wanted)
        .ok_or_else(|| LevyError::Parse(format!("'{spec}' is neither a file nor a builtin model")))
}

fn model_of(a: &ModelArgs) -> std::result::Result<LevyModel, Failure> {
    load_model(&a.model, a.dim).map_err(|e| match e {
        LevyError::Parse(_) | LevyError::Io(_) => Failure::Usage(e.to_string()),
        // a malformed model is a usage error too
        other => Failure::Usage(other.to_string()),
    })
}

/// "lo:hi:n" → (lo, hi, n).
fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || LevyError::Parse(format!("expected lo:hi:n, got '{s}'"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || n == 0 || (n > 1 && hi <= lo) {
        return Err(bad());
    }
    Ok((lo, hi, n))
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || LevyError::Parse(format!("expected lo:hi, got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo) {
        return Err(bad());
    }
    Ok((lo, hi))
}

/// Tensor grid of `lo:hi:n` along every axis.
fn tensor_grid(spec: &str, dim: usize) -> Result<Vec<Vec<f64>>> {
    let (lo, hi, n) = parse_range(spec)?;
    let axis = if n == 1 { vec![lo] } else { lin_space(lo, hi, n) };
    let total = n.pow(dim as u32);
    Ok((0..total)
        .map(|mut idx| {
            let mut x = vec![0.0; dim];
            for xk in x.iter_mut() {
                *xk = axis[idx % n];
                idx /= n;
            }
            x
        })
        .collect())
}

fn model_config(m: &LevyModel) -> serde_json::Value {
    match m.to_spec() {
        Some(spec) => serde_json::to_value(spec).unwrap_or(serde_json::Value::Null),
        None => json!({ "name": m.name() }),
    }
}

fn header(command: &str, args: &impl Serialize, model: Option<&LevyModel>) -> String {
    let cfg = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "args": args,
        "model": model.map(model_config),
    });
    format!("levyhk {command}\nconfig: {cfg}")
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn emit(out: &Option<PathBuf>, body: &str) -> std::result::Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(body.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))
        }
    }
}

fn comment(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}

fn characteristics(a: CharArgs) -> Outcome {
    let m = model_of(&a.model)?;
    let ch = Characteristics::new(m.clone());
    let mut body = String::new();
    if a.table {
        let mut buf = Vec::new();
        ch.write_table_csv(&mut buf, &header("characteristics", &a, Some(&m)))?;
        body = String::from_utf8(buf).map_err(|e| Failure::Usage(e.to_string()))?;
    } else if let Some(g) = &a.grid {
        let (lo, hi, per) = parse_range(g)?;
        if !(lo > 0.0) {
            return Err(Failure::Usage("characteristics grid needs lo > 0".into()));
        }
        body.push_str(&comment(&header("characteristics", &a, Some(&m))));
        body.push_str("r,h,K,h0,K0,psi_star\n");
        for r in decade_grid(lo, hi, per) {
            body.push_str(&format!(
                "{},{},{},{},{},{}\n",
                num(r),
                num(ch.h(r)?),
                num(ch.k(r)?),
                num(ch.h0(r)?),
                num(ch.k0(r)?),
                num(ch.psi_star(r)?)
            ));
        }
    } else {
        if a.r.is_empty() {
            return Err(Failure::Usage("give --r, --grid or --table".into()));
        }
        for &r in &a.r {
            body.push_str(&format!(
                "r={r:?} h={:?} K={:?} psi_star={:?}\n",
                ch.h(r)?,
                ch.k(r)?,
                ch.psi_star(r)?
            ));
        }
    }
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}

fn check(a: CheckArgs) -> Outcome {
    let m = model_of(&a.model)?;
    let ch = Characteristics::new(m.clone());
    let ids: Vec<ConditionId> = if a.condition.is_empty() {
        ConditionId::ALL.to_vec()
    } else {
        a.condition.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    let mut params = CheckParams::default();
    if let Some(w) = &a.window {
        params.window = Some(parse_window(w)?);
    }
    if !a.times.is_empty() {
        params.times = Some(a.times.clone());
    }
    let mut reports: Vec<ConditionReport> = Vec::new();
    let mut text = String::new();
    for id in ids {
        match check_condition(&ch, id, &params) {
            Ok(r) => {
                text.push_str(&r.summary());
                text.push('\n');
                reports.push(r);
            }
            Err(e) => text.push_str(&format!("{id} error ({e})\n")),
        }
    }
    match &a.out {
        Some(p) => {
            let doc = json!({ "config": header("check", &a, Some(&m)), "reports": reports });
            let body = serde_json::to_string_pretty(&doc).map_err(LevyError::from)?;
            emit(&Some(p.clone()), &body)?;
            print!("{text}");
        }
        None => print!("{text}"),
    }
    Ok(EXIT_OK)
}

fn bound(a: BoundArgs) -> Outcome {
    let m = model_of(&a.model)?;
    let ch = Characteristics::new(m.clone());
    let mode: CenterMode = a.center_mode.parse()?;
    let ctx = BoundContext::new(&ch, a.t, mode)?;
    let pts = tensor_grid(&a.grid, ch.dim())?;
    let center = ctx.drift_center()?;
    let mut body = comment(&header("bound", &a, Some(&m)));
    body.push_str(&format!(
        "# center: [{}]\n",
        center.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
    ));
    let cols: Vec<String> = (0..ch.dim()).map(|k| format!("x{k}")).collect();
    body.push_str(&format!("{},rho\n", cols.join(",")));
    for x in &pts {
        let coords: Vec<String> = x.iter().map(|v| num(*v)).collect();
        body.push_str(&format!("{},{}\n", coords.join(","), num(ctx.rho(x)?)));
    }
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}

fn density(a: DensityArgs) -> Outcome {
    let m = model_of(&a.model)?;
    let ch = Characteristics::new(m.clone());
    let settings = a.tol.settings()?;
    let pts = tensor_grid(&a.grid, ch.dim())?;
    let values = density_values(&ch, a.t, &pts, &[], &settings)?;
    let mut body = comment(&header("density", &a, Some(&m)));
    let cols: Vec<String> = (0..ch.dim()).map(|k| format!("x{k}")).collect();
    body.push_str(&format!("{},density,error\n", cols.join(",")));
    for (x, v) in pts.iter().zip(&values) {
        let coords: Vec<String> = x.iter().map(|v| num(*v)).collect();
        body.push_str(&format!("{},{},{}\n", coords.join(","), num(v.value), num(v.error)));
    }
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}

fn small_jump_mode(s: &str) -> Result<SmallJumpMode> {
    s.parse()
}

fn sample(a: SampleArgs) -> Outcome {
    let m = model_of(&a.model)?;
    let settings = SamplerSettings {
        jump_cutoff: a.eps,
        small_jump_mode: small_jump_mode(&a.small_jumps)?,
        n_samples: a.n,
        seed: a.seed,
        histogram_bins: a.bins,
        jump_budget: a.jump_budget,
    };
    settings.validate()?;
    if !(a.hi > a.lo) {
        return Err(Failure::Usage("--hi must exceed --lo".into()));
    }
    let samples = sample_increments(&m, a.t, &settings)?;
    let grid = HistogramGrid::cube(a.lo, a.hi, a.bins, m.dim());
    let emp = empirical_density(&samples, &grid)?;
    let mut body = comment(&header("sample", &a, Some(&m)));
    let cols: Vec<String> = (0..m.dim()).map(|k| format!("bin_center{k}")).collect();
    let cols = if m.dim() == 1 { "bin_center".to_string() } else { cols.join(",") };
    body.push_str(&format!("{cols},mass,stderr\n"));
    for i in 0..grid.n_bins() {
        let c: Vec<String> = grid.center(i).iter().map(|v| num(*v)).collect();
        body.push_str(&format!("{},{},{}\n", c.join(","), num(emp.bin_mass[i]), num(emp.standard_error[i])));
    }
    emit(&a.out, &body)?;
    Ok(EXIT_OK)
}

fn ratios_csv(report: &ComparabilityReport, head: &str) -> String {
    let d = report.points.first().map(|p| p.x.len()).unwrap_or(1);
    let mut body = comment(head);
    let cols: Vec<String> = (0..d).map(|k| format!("x{k}")).collect();
    body.push_str(&format!("t,{},density,error,bound,ratio\n", cols.join(",")));
    for p in &report.points {
        let coords: Vec<String> = p.x.iter().map(|v| num(*v)).collect();
        body.push_str(&format!(
            "{},{},{},{},{},{}\n",
            num(p.t),
            coords.join(","),
            num(p.density),
            num(p.density_error),
            num(p.bound),
            num(p.ratio)
        ));
    }
    body
}

fn write_outputs(dir: &Path, report: &serde_json::Value, ratios: &str) -> std::result::Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    let body = serde_json::to_string_pretty(report).map_err(LevyError::from)?;
    emit(&Some(dir.join("report.json")), &(body + "\n"))?;
    emit(&Some(dir.join("ratios.csv")), ratios)
}

fn time_grid(spec: &Option<String>) -> Result<Vec<f64>> {
    match spec {
        None => Ok(standard_times()),
        Some(s) => {
            let (lo, hi, per) = parse_range(s)?;
            if !(lo > 0.0) {
                return Err(LevyError::Parse("time grid needs lo > 0".into()));
            }
            Ok(if hi > lo { decade_grid(lo, hi, per) } else { vec![lo] })
        }
    }
}

fn verify(a: VerifyArgs) -> Outcome {
    let settings = a.tol.settings()?;
    let need_model = || -> std::result::Result<LevyModel, Failure> {
        let spec = a
            .model
            .as_ref()
            .ok_or_else(|| Failure::Usage(format!("--model is required for {}", a.experiment)))?;
        load_model(spec, a.dim).map_err(|e| Failure::Usage(e.to_string()))
    };
    match a.experiment.as_str() {
        "example1" | "example2" => {
            let name: ExampleName = a.experiment.parse()?;
            let times = match (&a.times, name) {
                (None, ExampleName::Example2) => vec![0.1, 0.5],
                _ => time_grid(&a.times)?,
            };
            let report = verify_example(name, &times, &example_grid(name, a.per_decade), &settings)?;
            let model = crate::harness::example_model(name);
            finish_comparability(&a, &model, report, &settings)
        }
        "two-sided" => {
            let model = need_model()?;
            let ch = Characteristics::new(model.clone());
            let bound: BoundId = a.bound.parse()?;
            let mode: CenterMode = a.center_mode.parse()?;
            let times = time_grid(&a.times)?;
            let report = comparability_report(&ch, &times, &XGrid::standard(ch.dim()), bound, mode, &settings)?;
            finish_comparability(&a, &model, report, &settings)
        }
        "chain" => {
            let model = need_model()?;
            let ch = Characteristics::new(model.clone());
            let report = verify_equivalence_chain(&ch, a.horizon, &settings)?;
            let mut csv = comment(&header("verify", &a, Some(&model)));
            csv.push_str("item,verdict,witness,worst_point\n");
            for i in &report.items {
                let w: Vec<String> = i.worst_point.iter().map(|v| num(*v)).collect();
                csv.push_str(&format!("{},{},{},{}\n", i.label, i.verdict, num(i.witness), w.join(";")));
            }
            let doc = json!({ "config": header("verify", &a, Some(&model)), "report": report });
            write_outputs(&a.out, &doc, &csv)?;
            println!("chain {:?}", report.joint);
            for i in &report.items {
                println!("  {} {} witness={:.6e}", i.label, i.verdict, i.witness);
            }
            Ok(if report.joint == JointVerdict::AllHold { EXIT_OK } else { EXIT_VERDICT })
        }
        "lemmas" => {
            let model = need_model()?;
            let ch = Characteristics::new(model.clone());
            let report = verify_lemma_suite(&ch, &settings);
            let mut csv = comment(&header("verify", &a, Some(&model)));
            csv.push_str("check,status,quantity,value\n");
            for c in &report.checks {
                for (k, v) in &c.measured {
                    csv.push_str(&format!("{},{:?},{k},{}\n", c.name, c.status, num(*v)));
                }
            }
            let doc = json!({ "config": header("verify", &a, Some(&model)), "report": report });
            write_outputs(&a.out, &doc, &csv)?;
            for c in &report.checks {
                println!("{} {:?} {}", c.name, c.status, c.note);
            }
            Ok(if report.passed { EXIT_OK } else { EXIT_VERDICT })
        }
        other => Err(Failure::Usage(format!(
            "unknown experiment '{other}'; expected example1, example2, chain, lemmas or two-sided"
        ))),
    }
}

fn finish_comparability(
    a: &VerifyArgs,
    model: &LevyModel,
    report: ComparabilityReport,
    settings: &InversionSettings,
) -> Outcome {
    let head = header("verify", a, Some(model));
    let cross = if a.crosscheck > 0 {
        let ch = Characteristics::new(model.clone());
        let sampler = SamplerSettings {
            seed: a.seed,
            ..SamplerSettings::default()
        };
        Some(monte_carlo_crosscheck(&ch, &report, a.crosscheck, &sampler, settings)?)
    } else {
        None
    };
    let doc = json!({ "config": head, "report": report, "crosscheck": cross });
    write_outputs(&a.out, &doc, &ratios_csv(&report, &head))?;
    println!("{}", report.verdict_text);
    println!("c0 = {:.6e}", report.c0());
    let cross_ok = cross.as_ref().is_none_or(|c| c.passed);
    Ok(if report.verdict == crate::conditions::Verdict::Holds && cross_ok { EXIT_OK } else { EXIT_VERDICT })
}
