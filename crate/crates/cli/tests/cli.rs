use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use dmsc_analytics::io::{read_haplotype_csv, read_samples_csv};
use dmsc_analytics::HaplotypeCounts;
use dmsc_bfv::{HeContext, HeParams};
use dmsc_cli::run::{execute, Job, Plan};
use dmsc_cli::{main_with, RunConfig, Settings, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY};
use dmsc_core::Circuit;
use dmsc_garble::HEADER_LEN;
use dmsc_market::{BuyerResult, Computation, HeProgram, LdComputation, MakerInput, Registry};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = main_with(std::iter::once("dmsc").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dmsc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    let pat = format!(" {key}=");
    let line = text.lines().find(|l| l.starts_with("record") && l.contains(&pat)).expect("record line");
    let rest = &line[line.find(&pat).unwrap() + pat.len()..];
    rest.split_whitespace().next().unwrap()
}

fn records(text: &str) -> Vec<&str> {
    text.lines().filter(|l| l.starts_with("record")).collect()
}

#[test]
fn inspect_adder_has_seven_and_gates() {
    let (code, out, _) = run(&["inspect", "--builder", "adder:8"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "non_xor"), "7");
    assert_eq!(field(&out, "predicted_garbled_bytes"), (HEADER_LEN + 7 * 32).to_string());
}

#[test]
fn inspect_xor_only_circuit_is_header_only() {
    let (code, out, _) = run(&["inspect", "--builder", "xor:16"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "non_xor"), "0");
    assert_eq!(field(&out, "predicted_garbled_bytes"), HEADER_LEN.to_string());
}

#[test]
fn inspect_file_matches_builder() {
    let path = tmp("ld10.circ");
    let (code, built, _) = run(&["inspect", "--builder", "ld:10", "--write", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    let (code, parsed, _) = run(&["inspect", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    for key in ["gates", "non_xor", "input_bits", "output_bits", "predicted_garbled_bytes"] {
        assert_eq!(field(&built, key), field(&parsed, key), "{key}");
    }
    assert_eq!(field(&parsed, "non_xor"), "44080");
}

#[test]
fn inspect_reports_parse_line() {
    let path = tmp("broken.circ");
    std::fs::write(&path, "2 5\n1 a:2\n0 -\n1 o:1\n1 4\n\n2 1 0 1 2 XOR\n2 1 2 9 4 NAND\n").unwrap();
    let (code, _, err) = run(&["inspect", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn gen_haplotypes_equilibrium_is_exact() {
    let (code, out, _) = run(&["gen-data", "--kind", "haplotypes", "--D", "0", "--rows", "200", "--N", "1600", "--p-a", "0.3", "--p-b", "0.7"]);
    assert_eq!(code, EXIT_OK);
    let rows = read_haplotype_csv(out.as_bytes()).unwrap();
    assert_eq!(rows.len(), 200);
    for c in rows {
        assert!(c.total() <= 1600);
        assert_eq!(c.total() * c.n_AB, c.N_A() * c.N_B(), "{c:?}");
    }
}

#[test]
fn gen_haplotypes_strong_ld_is_detected() {
    let (_, out, _) = run(&["gen-data", "--kind", "haplotypes", "--D", "0.2", "--rows", "20", "--N", "1000"]);
    let rows = read_haplotype_csv(out.as_bytes()).unwrap();
    let t = dmsc_analytics::LdThreshold::default();
    assert!(rows.iter().all(|c| dmsc_analytics::ld_decide_plain(c, t).unwrap().decision));
}

#[test]
fn gen_lr_samples_shape_and_determinism() {
    let a = tmp("s1.csv");
    let b = tmp("s2.csv");
    for p in [&a, &b] {
        let (code, _, _) = run(&["--seed", "9", "gen-data", "--kind", "lr-samples", "--rows", "569", "--dims", "30", "--out", p.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let s = read_samples_csv(&x[..]).unwrap();
    assert_eq!((s.len(), s.dims()), (569, 30));
    let (_, other, _) = run(&["--seed", "10", "gen-data", "--kind", "lr-samples", "--rows", "5"]);
    assert_ne!(&x[..other.len().min(x.len())], other.as_bytes());
}

#[test]
fn gen_rejects_bad_frequency() {
    let (code, _, err) = run(&["gen-data", "--kind", "haplotypes", "--p-a", "1.5"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("p-a"));
}

#[test]
fn run_ld_gc_reports_and_verifies() {
    let (code, out, err) = run(&["--repeat", "2", "run", "--workload", "ld", "--backend", "gc", "--M", "10"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(field(&out, "gates"), "127690");
    assert_eq!(field(&out, "non_xor"), "44080");
    assert_eq!(field(&out, "verified"), "pass");
    assert!(out.contains("garbling ms") && out.contains("comm bytes"));
    assert!(out.lines().any(|l| l.starts_with("timing") && l.contains("nondeterministic=true")));
}

#[test]
fn records_are_reproducible_under_a_seed() {
    let args = ["--seed", "5", "--repeat", "1", "run", "--M", "4", "--makers", "2"];
    let (_, a, _) = run(&args);
    let (_, b, _) = run(&args);
    assert_eq!(records(&a), records(&b));
    let (_, c, _) = run(&["--seed", "6", "--repeat", "1", "run", "--M", "4", "--makers", "2"]);
    assert_ne!(field(&a, "results_sha256"), field(&c, "results_sha256"));
}

#[test]
fn tcp_and_inproc_reports_agree() {
    let base = ["--seed", "2", "--repeat", "1", "run", "--M", "3", "--makers", "2"];
    let (c1, a, _) = run(&base);
    let mut tcp = base.to_vec();
    tcp.extend(["--transport", "tcp"]);
    let (c2, b, err) = run(&tcp);
    assert_eq!((c1, c2), (EXIT_OK, EXIT_OK), "{err}");
    assert_eq!(records(&a), records(&b));
}

#[test]
fn run_lr_gc_matches_oracle_and_writes_results() {
    let results = tmp("lr.csv");
    let transcript = tmp("lr.transcript");
    let (code, out, err) = run(&[
        "--repeat", "1", "run", "--workload", "lr", "--backend", "gc", "--rows", "12", "--chunk", "5", "--makers", "2",
        "--range-bits", "10", "--results", results.to_str().unwrap(), "--out", transcript.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(field(&out, "verified"), "pass");
    assert_eq!(field(&out, "sessions"), "3");
    assert_eq!(field(&out, "items"), "12");
    let csv = std::fs::read_to_string(&results).unwrap();
    assert_eq!(csv.lines().count(), 13);
    let t = std::fs::read_to_string(&transcript).unwrap();
    assert!(t.contains("GarbledCircuitMsg"));
}

#[test]
fn he_batch_matches_scalar() {
    let (code, out, err) = run(&["--repeat", "1", "run", "--backend", "he", "--M", "2", "--batch"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("batched and scalar decisions identical: true"));
    let rec = records(&out);
    assert_eq!(rec.len(), 2);
    let sha = |l: &str| l.split_whitespace().find(|w| w.starts_with("results_sha256=")).unwrap().to_string();
    assert_eq!(sha(rec[0]), sha(rec[1]));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let cfg = tmp("run.cfg");
    std::fs::write(&cfg, "# ld run\nworkload = ld\nbackend = gc\nM = 3\nrepeat = 1\nseed = 4\n").unwrap();
    let (code, out, _) = run(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "M"), "3");
    let (_, out, _) = run(&["--config", cfg.to_str().unwrap(), "run", "--M", "2"]);
    assert_eq!(field(&out, "M"), "2");
    let (_, out, _) = run(&["--config", cfg.to_str().unwrap(), "--no-verify", "run"]);
    assert_eq!(field(&out, "verified"), "skipped");
}

#[test]
fn configuration_rejections_name_the_constraint() {
    let cases: &[(&[&str], &str)] = &[
        (&["run", "--workload", "lr", "--backend", "he"], "cannot run"),
        (&["run", "--backend", "he", "--he-n", "4096", "--M", "1"], "plan"),
        (&["run", "--backend", "gc", "--batch"], "batch"),
        (&["run", "--backend", "mpc"], "unknown backend"),
        (&["run", "--M", "0"], "`M`"),
        (&["run", "--N", "1"], "`N`"),
        (&["run", "--threshold", "3/0"], "threshold"),
        (&["run", "--transport", "udp"], "transport"),
        (&["run", "--he-n", "1000"], "he_n"),
        (&["run", "--workload", "lr", "--range-bits", "20"], "range_bits"),
        (&["--repeat", "0", "run"], "repeat"),
        (&["run", "--wat"], "unexpected argument"),
    ];
    for (args, needle) in cases {
        let (code, _, err) = run(args);
        assert_eq!(code, EXIT_CONFIG, "{args:?}: {err}");
        assert!(err.contains(needle), "{args:?}: {err}");
    }
}

#[test]
fn config_file_rejects_unknown_key() {
    let cfg = tmp("bad.cfg");
    std::fs::write(&cfg, "M = 3\ncolour = blue\n").unwrap();
    let (code, _, err) = run(&["--config", cfg.to_str().unwrap(), "run"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("line 2") && err.contains("colour"), "{err}");
}

#[test]
fn missing_files_are_io_failures() {
    let (code, _, _) = run(&["run", "--data", "/nonexistent/counts.csv"]);
    assert_eq!(code, EXIT_IO);
    let (code, _, _) = run(&["--config", "/nonexistent/run.cfg", "run"]);
    assert_eq!(code, EXIT_IO);
    let (code, _, _) = run(&["inspect", "/nonexistent/c.txt"]);
    assert_eq!(code, EXIT_IO);
}

#[test]
fn population_above_bound_is_rejected() {
    let data = tmp("big.csv");
    std::fs::write(&data, "n_AB,n_Ab,n_aB,n_ab\n100,100,100,100\n").unwrap();
    let (code, _, err) = run(&["run", "--data", data.to_str().unwrap(), "--N", "200"]);
    assert_eq!(code, EXIT_CONFIG);
    assert!(err.contains("`N`"), "{err}");
    let (code, out, _) = run(&["--repeat", "1", "run", "--data", data.to_str().unwrap(), "--N", "400"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&out, "M"), "1");
}

#[test]
fn keygen_is_deterministic() {
    let a = tmp("keys-a");
    let b = tmp("keys-b");
    for d in [&a, &b] {
        let (code, out, _) = run(&["--seed", "3", "keygen", "--he-n", "4096", "--out-dir", d.to_str().unwrap()]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(records(&out).len(), 3);
    }
    for f in ["secret.key", "public.key", "relin.key"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let ctx = HeContext::new(HeParams::n4096()).unwrap();
    ctx.public_key_from_bytes(&std::fs::read(a.join("public.key")).unwrap()).unwrap();
}

/// Delegates to an LD computation but reports the wrong oracle answer.
#[derive(Debug)]
struct LyingOracle(LdComputation);

impl Computation for LyingOracle {
    fn id(&self) -> &str {
        self.0.id()
    }
    fn makers(&self) -> usize {
        self.0.makers()
    }
    fn check_inputs(&self, inputs: &[MakerInput]) -> dmsc_market::Result<()> {
        self.0.check_inputs(inputs)
    }
    fn oracle(&self, inputs: &[MakerInput]) -> dmsc_market::Result<BuyerResult> {
        match self.0.oracle(inputs)? {
            BuyerResult::LdDecisions(v) => Ok(BuyerResult::LdDecisions(v.into_iter().map(|b| !b).collect())),
            other => Ok(other),
        }
    }
    fn circuit(&self) -> dmsc_market::Result<Circuit> {
        self.0.circuit()
    }
    fn maker_bits(&self, maker: usize, input: &MakerInput) -> dmsc_market::Result<Vec<bool>> {
        self.0.maker_bits(maker, input)
    }
    fn decode_output(&self, bits: &[bool]) -> dmsc_market::Result<BuyerResult> {
        self.0.decode_output(bits)
    }
    fn he_program(&self, base: &HeContext) -> dmsc_market::Result<Box<dyn HeProgram>> {
        self.0.he_program(base)
    }
}

#[test]
fn oracle_mismatch_is_a_verification_failure() {
    let mut s = Settings::default();
    s.set("repeat", 1);
    let cfg = RunConfig::from_settings(&s).unwrap();
    let counts = vec![HaplotypeCounts::new(30, 20, 20, 30), HaplotypeCounts::new(25, 25, 25, 25)];
    let plan = Plan {
        label: "gc".into(),
        params: vec![],
        jobs: vec![Job {
            computation: Arc::new(LyingOracle(LdComputation::new(2, 1, 200).unwrap())),
            inputs: vec![MakerInput::Haplotypes(counts)],
        }],
    };
    let outcome = execute(&Registry::with_backends(), &cfg, std::slice::from_ref(&plan)).unwrap();
    assert_eq!(outcome.mismatches.len(), 2);
    assert_eq!(outcome.rows[0].verified, Some(false));
    assert_eq!(dmsc_cli::CliError::Verify(String::new()).exit_code(), EXIT_VERIFY);

    let mut s = Settings::default();
    s.set("repeat", 1);
    s.set("verify", false);
    let quiet = RunConfig::from_settings(&s).unwrap();
    let outcome = execute(&Registry::with_backends(), &quiet, &[plan]).unwrap();
    assert!(outcome.mismatches.is_empty());
    assert_eq!(outcome.rows[0].verified, None);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_dmsc");
    let ok = Command::new(bin).args(["inspect", "--builder", "adder:8"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("non_xor=7"));
    let cfg = Command::new(bin).args(["run", "--workload", "lr", "--backend", "he"]).output().unwrap();
    assert_eq!(cfg.status.code(), Some(EXIT_CONFIG));
    let io = Command::new(bin).args(["run", "--data", "/nonexistent.csv"]).output().unwrap();
    assert_eq!(io.status.code(), Some(EXIT_IO));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
    for cmd in ["run", "gen-data", "keygen", "inspect", "bench"] {
        assert!(String::from_utf8_lossy(&help.stdout).contains(cmd), "{cmd}");
    }
}
