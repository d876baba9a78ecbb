//! Argument parsing and command dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dmsc_analytics::io::{write_haplotype_csv, write_samples_csv};
use dmsc_bfv::{keygen_seeded, HeContext, HeParams};
use dmsc_market::Registry;

use crate::config::{RunConfig, Settings};
use crate::error::{CliError, Result, EXIT_OK};
use crate::gen::{gen_haplotypes, gen_lr_samples};
use crate::inspect::{named_circuit, parse_circuit_file};
use crate::report::render;
use crate::run::{check_plans, execute, plans, results_csv, RunOutcome};

#[derive(Debug, Parser)]
#[command(name = "dmsc", version, about = "Privacy-preserving analytics for data markets")]
pub struct Cli {
    /// Seed for data generation, keys and protocol randomness.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Repetitions per measurement; timings are averaged.
    #[arg(long, global = true)]
    pub repeat: Option<usize>,
    /// Check every result against the plaintext oracle (default).
    #[arg(long, global = true, overrides_with = "no_verify")]
    pub verify: bool,
    #[arg(long = "no-verify", global = true, overrides_with = "verify")]
    pub no_verify: bool,
    /// inproc or tcp.
    #[arg(long, global = true)]
    pub transport: Option<String>,
    /// key=value file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a protocol end to end and report timings, gate counts and bytes.
    Run(RunArgs),
    /// Write synthetic CSV fixtures.
    GenData(GenArgs),
    /// Generate and write BFV keys.
    Keygen(KeygenArgs),
    /// Gate statistics and predicted garbled size of a circuit.
    Inspect(InspectArgs),
    /// Sweeps over the standard configurations.
    Bench(BenchArgs),
}

#[derive(Debug, Args, Default, Clone)]
pub struct RunArgs {
    /// ld or lr.
    #[arg(long)]
    pub workload: Option<String>,
    /// gc or he.
    #[arg(long)]
    pub backend: Option<String>,
    /// Number of LD tests.
    #[arg(long = "M")]
    pub m: Option<usize>,
    /// Bound on each pooled LD population.
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long)]
    pub makers: Option<usize>,
    /// Sigmoid lookup index bits.
    #[arg(long)]
    pub range_bits: Option<u32>,
    /// Sigmoid table covers [-w, w).
    #[arg(long)]
    pub half_width: Option<f64>,
    /// LR rows to score.
    #[arg(long)]
    pub rows: Option<usize>,
    /// LR rows per session.
    #[arg(long)]
    pub chunk: Option<usize>,
    /// Also run the LD tests packed into slots and compare.
    #[arg(long)]
    pub batch: bool,
    /// Haplotype or sample CSV.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// LR model file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// BFV ring dimension.
    #[arg(long)]
    pub he_n: Option<usize>,
    /// Chi-square threshold as num/den.
    #[arg(long)]
    pub threshold: Option<String>,
    /// Transcript file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-item results CSV.
    #[arg(long)]
    pub results: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DataKind {
    Haplotypes,
    LrSamples,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: DataKind,
    /// Rows to generate (default 10 haplotype rows, 569 samples).
    #[arg(long)]
    pub rows: Option<usize>,
    /// Disequilibrium coefficient; 0 gives exact equilibrium.
    #[arg(long = "D", default_value_t = 0.0, allow_hyphen_values = true)]
    pub d: f64,
    /// Upper bound on each population.
    #[arg(long = "N", default_value_t = 200)]
    pub n: u64,
    #[arg(long, default_value_t = 0.5)]
    pub p_a: f64,
    #[arg(long, default_value_t = 0.5)]
    pub p_b: f64,
    #[arg(long, default_value_t = 30)]
    pub dims: usize,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, default_value_t = 8192)]
    pub he_n: usize,
    /// Plain modulus override.
    #[arg(long)]
    pub plain_modulus: Option<u64>,
    /// Directory for secret.key, public.key and relin.key.
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Circuit text file.
    pub file: Option<PathBuf>,
    /// Named circuit such as adder:8, xor:8, ld:10, lr:12.
    #[arg(long)]
    pub builder: Option<String>,
    /// Also write the circuit text here.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchSuite {
    /// LD test on garbled circuits, M = 10 and 100.
    LdGc,
    /// LD test on BFV, batched against scalar.
    LdHe,
    /// LR inference across sigmoid lookup sizes.
    LrGc,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Suites to run (all when absent).
    #[arg(long, value_enum)]
    pub suite: Vec<BenchSuite>,
    /// LR rows per configuration.
    #[arg(long)]
    pub rows: Option<usize>,
    /// LD tests for the BFV suite.
    #[arg(long = "M")]
    pub m: Option<usize>,
}

fn overlay_globals(cli: &Cli) -> Result<Settings> {
    let mut s = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    if let Some(v) = cli.seed {
        s.set("seed", v);
    }
    if let Some(v) = cli.repeat {
        s.set("repeat", v);
    }
    if cli.verify {
        s.set("verify", true);
    }
    if cli.no_verify {
        s.set("verify", false);
    }
    if let Some(v) = &cli.transport {
        s.set("transport", v);
    }
    Ok(s)
}

fn overlay_run(s: &mut Settings, a: &RunArgs) {
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            s.set(k, v);
        }
    };
    let p = |v: &Option<PathBuf>| v.as_ref().map(|p| p.display().to_string());
    put("workload", a.workload.clone());
    put("backend", a.backend.clone());
    put("M", a.m.map(|v| v.to_string()));
    put("N", a.n.map(|v| v.to_string()));
    put("makers", a.makers.map(|v| v.to_string()));
    put("range_bits", a.range_bits.map(|v| v.to_string()));
    put("half_width", a.half_width.map(|v| v.to_string()));
    put("rows", a.rows.map(|v| v.to_string()));
    put("chunk", a.chunk.map(|v| v.to_string()));
    put("batch", a.batch.then(|| "true".to_string()));
    put("data", p(&a.data));
    put("model", p(&a.model));
    put("he_n", a.he_n.map(|v| v.to_string()));
    put("threshold", a.threshold.clone());
    put("out", p(&a.out));
    put("results", p(&a.results));
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Validates, runs and reports one configuration.
pub fn run_config(cfg: &RunConfig, title: &str, out: &mut dyn Write) -> Result<RunOutcome> {
    let registry = Registry::with_backends();
    let plans = plans(cfg)?;
    check_plans(&registry, cfg, &plans)?;
    let outcome = execute(&registry, cfg, &plans)?;
    out.write_all(render(title, &outcome.rows, &outcome.notes).as_bytes())?;
    if let Some(p) = &cfg.out {
        write_file(p, outcome.transcripts.as_bytes())?;
    }
    if let Some(p) = &cfg.results {
        write_file(p, results_csv(cfg, &outcome).as_bytes())?;
    }
    Ok(outcome)
}

fn fail_on_mismatch(mismatches: &[String], err: &mut dyn Write) -> Result<()> {
    if mismatches.is_empty() {
        return Ok(());
    }
    for m in mismatches {
        writeln!(err, "mismatch: {m}")?;
    }
    Err(CliError::Verify(format!("{} result(s) differ from the plaintext oracle", mismatches.len())))
}

fn cmd_run(settings: Settings, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_settings(&settings)?;
    let title = format!("run {} on {}", cfg.workload.name(), cfg.backend);
    let outcome = run_config(&cfg, &title, out)?;
    fail_on_mismatch(&outcome.mismatches, err)
}

fn cmd_gen(settings: &Settings, a: &GenArgs, out: &mut dyn Write) -> Result<()> {
    let seed: u64 = settings.get("seed").map_or(Ok(0), |v| {
        v.parse().map_err(|_| CliError::Config(format!("`seed`: `{v}` is not an integer")))
    })?;
    let mut buf = Vec::new();
    match a.kind {
        DataKind::Haplotypes => {
            let rows = gen_haplotypes(seed, a.rows.unwrap_or(10), a.n, a.d, a.p_a, a.p_b)?;
            write_haplotype_csv(&mut buf, &rows).map_err(|e| CliError::Io(e.to_string()))?;
        }
        DataKind::LrSamples => {
            let samples = gen_lr_samples(seed, a.rows.unwrap_or(569), a.dims)?;
            write_samples_csv(&mut buf, &samples).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    match &a.out {
        Some(p) => write_file(p, &buf),
        None => Ok(out.write_all(&buf)?),
    }
}

fn cmd_keygen(settings: &Settings, a: &KeygenArgs, out: &mut dyn Write) -> Result<()> {
    let seed: u64 = settings.get("seed").map_or(Ok(0), |v| {
        v.parse().map_err(|_| CliError::Config(format!("`seed`: `{v}` is not an integer")))
    })?;
    let mut params = HeParams::preset(a.he_n).map_err(|e| CliError::Config(format!("`he-n`: {e}")))?;
    if let Some(t) = a.plain_modulus {
        params = params
            .with_plain_modulus(t)
            .map_err(|e| CliError::Config(format!("`plain-modulus`: {e}")))?;
    }
    let ctx = HeContext::new(params).map_err(CliError::config)?;
    let (sk, pk, rk) = keygen_seeded(&ctx, seed);
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Io(format!("{}: {e}", a.out_dir.display())))?;
    let files = [
        ("secret.key", ctx.secret_key_to_bytes(&sk)),
        ("public.key", ctx.public_key_to_bytes(&pk)),
        ("relin.key", ctx.relin_key_to_bytes(&rk)),
    ];
    for (name, bytes) in &files {
        write_file(&a.out_dir.join(name), bytes)?;
        writeln!(out, "record file={name} bytes={} param_id={:#018x}", bytes.len(), ctx.param_id())?;
    }
    Ok(())
}

fn cmd_inspect(a: &InspectArgs, out: &mut dyn Write) -> Result<()> {
    let (name, c) = match (&a.file, &a.builder) {
        (Some(p), None) => (p.display().to_string(), parse_circuit_file(p)?),
        (None, Some(b)) => (b.clone(), named_circuit(b)?),
        _ => return Err(CliError::Config("give exactly one of a circuit file or --builder".into())),
    };
    if let Some(p) = &a.write {
        write_file(p, dmsc_core::format::to_text(&c).as_bytes())?;
    }
    out.write_all(crate::inspect::render(&name, &c).as_bytes())?;
    Ok(())
}

fn cmd_bench(settings: Settings, a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let suites = if a.suite.is_empty() {
        vec![BenchSuite::LdGc, BenchSuite::LdHe, BenchSuite::LrGc]
    } else {
        a.suite.clone()
    };
    let mut mismatches = Vec::new();
    let mut go = |title: String, pairs: &[(&str, String)], out: &mut dyn Write| -> Result<()> {
        let mut s = settings.clone();
        for (k, v) in pairs {
            s.set(k, v);
        }
        let cfg = RunConfig::from_settings(&s)?;
        mismatches.extend(run_config(&cfg, &title, out)?.mismatches);
        Ok(())
    };
    for suite in suites {
        match suite {
            BenchSuite::LdGc => {
                for m in [10, 100] {
                    let pairs = [("workload", "ld".into()), ("backend", "gc".into()), ("M", m.to_string())];
                    go(format!("LD test on garbled circuits, M={m}"), &pairs, out)?;
                }
            }
            BenchSuite::LdHe => {
                let m = a.m.unwrap_or(10);
                let pairs = [
                    ("workload", "ld".into()),
                    ("backend", "he".into()),
                    ("M", m.to_string()),
                    ("batch", "true".into()),
                ];
                go(format!("LD test on BFV, M={m}, batched and scalar"), &pairs, out)?;
            }
            BenchSuite::LrGc => {
                for r in [10, 11, 12] {
                    let mut pairs = vec![("workload", "lr".into()), ("backend", "gc".into()), ("range_bits", r.to_string())];
                    if let Some(rows) = a.rows {
                        pairs.push(("rows", rows.to_string()));
                    }
                    go(format!("LR inference on garbled circuits, range_bits={r}"), &pairs, out)?;
                }
            }
        }
    }
    fail_on_mismatch(&mismatches, err)
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut settings = overlay_globals(&cli)?;
    match &cli.command {
        Command::Run(a) => {
            overlay_run(&mut settings, a);
            cmd_run(settings, out, err)
        }
        Command::GenData(a) => cmd_gen(&settings, a, out),
        Command::Keygen(a) => cmd_keygen(&settings, a, out),
        Command::Inspect(a) => cmd_inspect(a, out),
        Command::Bench(a) => cmd_bench(settings, a, out, err),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
