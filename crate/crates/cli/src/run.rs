//! `run`: execute a protocol end to end, repeat, average and verify.

use std::fmt::Write as _;
use std::sync::Arc;

use dmsc_analytics::io::{bundled_model, bundled_samples, parse_model, read_haplotype_csv, read_samples_csv};
use dmsc_analytics::synth::{random_counts, split_among_makers};
use dmsc_analytics::{quantize_features, HaplotypeCounts, SigmoidTable};
use dmsc_market::{
    BuyerResult, Computation, LdComputation, LrComputation, MakerInput, Registry, SessionConfig, SessionReport,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::config::{RunConfig, Workload};
use crate::error::{CliError, Result};
use crate::report::{sha256_hex, ReportRow, Timings};

/// One protocol session's public parameters and private inputs.
#[derive(Debug, Clone)]
pub struct Job {
    pub computation: Arc<dyn Computation>,
    pub inputs: Vec<MakerInput>,
}

/// A group of jobs reported as one row.
#[derive(Debug, Clone)]
pub struct Plan {
    pub label: String,
    pub params: Vec<(String, String)>,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutcome {
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
    /// Human-readable mismatch details; non-empty means verification failed.
    pub mismatches: Vec<String>,
    /// Results of the first repetition of every plan, in plan order.
    pub results: Vec<Vec<BuyerResult>>,
    pub transcripts: String,
}

fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pooled LD instances from `--data` or the seeded generator.
pub fn ld_instances(cfg: &RunConfig, rng: &mut ChaCha20Rng) -> Result<Vec<HaplotypeCounts>> {
    let mut inst = match &cfg.data {
        Some(path) => {
            let all = read_haplotype_csv(&read_file(path)?[..]).map_err(CliError::config)?;
            let m = cfg.m.unwrap_or(all.len());
            if m > all.len() {
                return Err(CliError::Config(format!("`M` = {m} exceeds the {} rows in {}", all.len(), path.display())));
            }
            all.into_iter().take(m).collect::<Vec<_>>()
        }
        None => (0..cfg.m.unwrap_or(10)).map(|_| random_counts(rng, cfg.n)).collect(),
    };
    if inst.is_empty() {
        return Err(CliError::Config("`M`: no LD instances".into()));
    }
    if let Some((i, c)) = inst.iter().enumerate().find(|(_, c)| c.total() > cfg.n) {
        return Err(CliError::Config(format!("`N`: instance {i} has population {} above the bound {}", c.total(), cfg.n)));
    }
    inst.shrink_to_fit();
    Ok(inst)
}

fn ld_job(counts: &[HaplotypeCounts], cfg: &RunConfig, rng: &mut ChaCha20Rng, batched: bool) -> Result<Job> {
    let mut c = LdComputation::new(counts.len(), cfg.makers, cfg.n).map_err(CliError::config)?;
    c.threshold = cfg.threshold;
    c.batched = batched;
    let inputs = split_among_makers(rng, counts, cfg.makers)
        .into_iter()
        .map(MakerInput::Haplotypes)
        .collect();
    Ok(Job {
        computation: Arc::new(c),
        inputs,
    })
}

/// Near-equal split of `rows` over at most `makers` makers.
pub fn rows_split(rows: usize, makers: usize) -> Vec<usize> {
    let k = makers.min(rows).max(1);
    (0..k).map(|j| rows / k + usize::from(j < rows % k)).collect()
}

fn lr_jobs(cfg: &RunConfig) -> Result<(Vec<Job>, usize, u32)> {
    let model = match &cfg.model {
        Some(p) => {
            let text = String::from_utf8(read_file(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse_model(&text).map_err(CliError::config)?
        }
        None => bundled_model(),
    };
    let samples = match &cfg.data {
        Some(p) => read_samples_csv(&read_file(p)?[..]).map_err(CliError::config)?,
        None => bundled_samples(),
    };
    if samples.dims() != model.dims() {
        return Err(CliError::Config(format!(
            "model has {} weights but the data has {} feature columns",
            model.dims(),
            samples.dims()
        )));
    }
    let n = cfg.rows.unwrap_or(samples.len()).min(samples.len());
    if n == 0 {
        return Err(CliError::Config("`rows`: the data has no rows".into()));
    }
    let table = SigmoidTable::symmetric(model.spec, cfg.range_bits, cfg.half_width).map_err(CliError::config)?;
    let quantized: Vec<Vec<i64>> = samples.features[..n].iter().map(|x| quantize_features(model.spec, x)).collect();
    let mut jobs = Vec::new();
    for chunk in quantized.chunks(cfg.chunk) {
        let split = rows_split(chunk.len(), cfg.makers);
        let mut inputs = Vec::with_capacity(split.len());
        let mut at = 0;
        for &r in &split {
            inputs.push(MakerInput::Features(chunk[at..at + r].to_vec()));
            at += r;
        }
        let c = LrComputation::new(model.clone(), table.clone(), split).map_err(CliError::config)?;
        jobs.push(Job {
            computation: Arc::new(c),
            inputs,
        });
    }
    Ok((jobs, n, model.spec.frac_bits()))
}

/// Builds the plans for `cfg` without running anything.
pub fn plans(cfg: &RunConfig) -> Result<Vec<Plan>> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    match cfg.workload {
        Workload::Ld => {
            let inst = ld_instances(cfg, &mut rng)?;
            let params = vec![
                ("workload".to_string(), "ld".to_string()),
                ("M".into(), inst.len().to_string()),
                ("N".into(), cfg.n.to_string()),
                ("makers".into(), cfg.makers.to_string()),
            ];
            let scalar = |rng: &mut ChaCha20Rng| -> Result<Vec<Job>> {
                inst.iter().map(|c| ld_job(std::slice::from_ref(c), cfg, rng, false)).collect()
            };
            let mut out = Vec::new();
            if cfg.backend == "he" {
                if cfg.batch {
                    out.push(Plan {
                        label: "he-batched".into(),
                        params: params.clone(),
                        jobs: vec![ld_job(&inst, cfg, &mut rng, true)?],
                    });
                }
                out.push(Plan {
                    label: if cfg.batch { "he-scalar".into() } else { "he".into() },
                    params,
                    jobs: scalar(&mut rng)?,
                });
            } else {
                out.push(Plan {
                    label: cfg.backend.clone(),
                    params,
                    jobs: vec![ld_job(&inst, cfg, &mut rng, false)?],
                });
            }
            Ok(out)
        }
        Workload::Lr => {
            let (jobs, n, frac) = lr_jobs(cfg)?;
            Ok(vec![Plan {
                label: cfg.backend.clone(),
                params: vec![
                    ("workload".into(), "lr".into()),
                    ("rows".into(), n.to_string()),
                    ("range_bits".into(), cfg.range_bits.to_string()),
                    ("makers".into(), cfg.makers.min(n).to_string()),
                    ("chunk".into(), cfg.chunk.to_string()),
                    ("frac_bits".into(), frac.to_string()),
                ],
                jobs,
            }])
        }
    }
}

fn session_config(cfg: &RunConfig) -> SessionConfig {
    SessionConfig {
        session: 1,
        seed: cfg.seed,
        buyers: 1,
        transport: cfg.transport,
        he_params: cfg.he_params.clone(),
    }
}

/// Rejects every plan the backend cannot run, before any session starts.
pub fn check_plans(registry: &Registry, cfg: &RunConfig, plans: &[Plan]) -> Result<()> {
    let backend = registry.backend(&cfg.backend).map_err(CliError::config)?;
    let scfg = session_config(cfg);
    for p in plans {
        for job in &p.jobs {
            backend.check(job.computation.as_ref(), &scfg).map_err(CliError::config)?;
            job.computation.check_inputs(&job.inputs).map_err(CliError::config)?;
        }
    }
    Ok(())
}

/// Items of every result, flattened, so the digest ignores session splits.
fn result_items(results: &[BuyerResult]) -> Vec<String> {
    results
        .iter()
        .flat_map(|r| match r {
            BuyerResult::LdDecisions(v) => v.iter().map(|&b| u8::from(b).to_string()).collect::<Vec<_>>(),
            BuyerResult::LrProbabilities(v) => v.iter().map(u64::to_string).collect(),
        })
        .collect()
}

fn timings_of(r: &SessionReport) -> Timings {
    Timings {
        garble: r.timing("garble"),
        evaluate: r.timing("evaluate"),
        encrypt: r.timing("encrypt"),
        decrypt: r.timing("decrypt"),
        wall: r.wall,
    }
}

fn compare(label: &str, job: usize, got: &BuyerResult, want: &BuyerResult, out: &mut Vec<String>) {
    let pairs: Vec<(String, String)> = match (got, want) {
        (BuyerResult::LdDecisions(g), BuyerResult::LdDecisions(w)) if g.len() == w.len() => {
            g.iter().zip(w).map(|(a, b)| (a.to_string(), b.to_string())).collect()
        }
        (BuyerResult::LrProbabilities(g), BuyerResult::LrProbabilities(w)) if g.len() == w.len() => {
            g.iter().zip(w).map(|(a, b)| (a.to_string(), b.to_string())).collect()
        }
        _ => {
            out.push(format!("{label} session {job}: result shape {got:?} differs from oracle {want:?}"));
            return;
        }
    };
    for (i, (g, w)) in pairs.iter().enumerate() {
        if g != w {
            out.push(format!("{label} session {job} item {i}: got {g}, oracle {w}"));
        }
    }
}

/// Runs every plan `cfg.repeat` times. Results must agree across
/// repetitions and, when verifying, with the plaintext oracle.
pub fn execute(registry: &Registry, cfg: &RunConfig, plans: &[Plan]) -> Result<RunOutcome> {
    let backend = registry.backend(&cfg.backend).map_err(CliError::config)?;
    let mut outcome = RunOutcome::default();
    let mut session_id = 0u64;
    for plan in plans {
        let mut row = ReportRow {
            label: plan.label.clone(),
            params: plan.params.clone(),
            sessions: plan.jobs.len(),
            ..Default::default()
        };
        if cfg.backend == "gc" {
            let mut gates = 0;
            let mut non_xor = 0;
            for job in &plan.jobs {
                let s = job.computation.circuit().map_err(CliError::config)?.gate_stats();
                gates += s.total;
                non_xor += s.non_xor;
            }
            row.gates = Some(gates);
            row.non_xor = Some(non_xor);
        }
        let mut first: Vec<BuyerResult> = Vec::new();
        let mut total = Timings::default();
        for rep in 0..cfg.repeat {
            for (j, job) in plan.jobs.iter().enumerate() {
                session_id += 1;
                let mut scfg = session_config(cfg);
                scfg.session = session_id;
                let report = backend
                    .run(job.computation.clone(), job.inputs.clone(), &scfg)
                    .map_err(CliError::runtime)?;
                total.add(&timings_of(&report));
                let result = report.result().clone();
                if rep == 0 {
                    row.comm_bytes += report.transcript.total_bytes();
                    if cfg.out.is_some() {
                        outcome.transcripts.push_str(&report.transcript.to_lines());
                    }
                    if cfg.verify {
                        let want = job.computation.oracle(&job.inputs).map_err(CliError::runtime)?;
                        compare(&plan.label, j, &result, &want, &mut outcome.mismatches);
                    }
                    first.push(result);
                } else if first[j] != result {
                    outcome
                        .mismatches
                        .push(format!("{} session {j}: repetition {rep} disagrees with repetition 0", plan.label));
                }
            }
        }
        row.timings = total.scaled(cfg.repeat as u32);
        row.items = first.iter().map(BuyerResult::len).sum();
        row.results_sha256 = sha256_hex(result_items(&first).join(",").as_bytes());
        row.verified = cfg.verify.then_some(outcome.mismatches.is_empty());
        outcome.rows.push(row);
        outcome.results.push(first);
    }
    if cfg.batch && outcome.results.len() == 2 {
        batch_notes(&mut outcome);
    }
    Ok(outcome)
}

fn flatten(results: &[BuyerResult]) -> Vec<bool> {
    results
        .iter()
        .flat_map(|r| match r {
            BuyerResult::LdDecisions(v) => v.clone(),
            BuyerResult::LrProbabilities(_) => Vec::new(),
        })
        .collect()
}

fn batch_notes(outcome: &mut RunOutcome) {
    let batched = flatten(&outcome.results[0]);
    let scalar = flatten(&outcome.results[1]);
    let same = batched == scalar;
    if !same {
        outcome
            .mismatches
            .push(format!("batched decisions {batched:?} differ from scalar decisions {scalar:?}"));
    }
    let per = |r: &ReportRow| r.per_item_ms();
    let (b, s) = (per(&outcome.rows[0]), per(&outcome.rows[1]));
    outcome.notes.push(format!("batched and scalar decisions identical: {same}"));
    outcome.notes.push(format!(
        "amortized per-test ms: batched {b:.3}, scalar {s:.3}, ratio {:.2}x (nondeterministic)",
        s / b.max(f64::MIN_POSITIVE)
    ));
}

/// `instance,decision` or `row,prob_raw,prob` lines.
pub fn results_csv(cfg: &RunConfig, outcome: &RunOutcome) -> String {
    let mut s = String::new();
    let frac = match cfg.workload {
        Workload::Lr => plans_frac_bits(outcome),
        Workload::Ld => 0,
    };
    for (p, results) in outcome.results.iter().enumerate() {
        let label = &outcome.rows[p].label;
        let mut i = 0usize;
        match cfg.workload {
            Workload::Ld => s.push_str("label,instance,decision\n"),
            Workload::Lr => s.push_str("label,row,prob_raw,prob\n"),
        }
        for r in results {
            match r {
                BuyerResult::LdDecisions(v) => {
                    for &d in v {
                        writeln!(s, "{label},{i},{}", u8::from(d)).unwrap();
                        i += 1;
                    }
                }
                BuyerResult::LrProbabilities(v) => {
                    for &raw in v {
                        writeln!(s, "{label},{i},{raw},{}", raw as f64 / (1u64 << frac) as f64).unwrap();
                        i += 1;
                    }
                }
            }
        }
    }
    s
}

fn plans_frac_bits(outcome: &RunOutcome) -> u32 {
    outcome
        .rows
        .first()
        .and_then(|r| r.params.iter().find(|(k, _)| k == "frac_bits"))
        .and_then(|(_, v)| v.parse().ok())
        .unwrap_or(8)
}
