//! Reports as a human table plus line-delimited `key=value` records.
//!
//! `record` lines are reproducible under a fixed seed. Timings go on
//! separate `timing` lines tagged `nondeterministic=true`.

use std::fmt::Write as _;
use std::time::Duration;

use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub garble: Duration,
    pub evaluate: Duration,
    pub encrypt: Duration,
    pub decrypt: Duration,
    pub wall: Duration,
}

impl Timings {
    pub fn add(&mut self, o: &Timings) {
        self.garble += o.garble;
        self.evaluate += o.evaluate;
        self.encrypt += o.encrypt;
        self.decrypt += o.decrypt;
        self.wall += o.wall;
    }

    pub fn scaled(&self, div: u32) -> Timings {
        let d = div.max(1);
        Timings {
            garble: self.garble / d,
            evaluate: self.evaluate / d,
            encrypt: self.encrypt / d,
            decrypt: self.decrypt / d,
            wall: self.wall / d,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReportRow {
    pub label: String,
    /// Deterministic parameters, in display order.
    pub params: Vec<(String, String)>,
    pub sessions: usize,
    pub gates: Option<usize>,
    pub non_xor: Option<usize>,
    /// Bytes on the wire for one repetition.
    pub comm_bytes: usize,
    /// Number of result items (LD decisions or LR probabilities).
    pub items: usize,
    pub results_sha256: String,
    pub verified: Option<bool>,
    /// Mean over repetitions.
    pub timings: Timings,
}

impl ReportRow {
    pub fn per_item_ms(&self) -> f64 {
        ms(self.timings.wall) / self.items.max(1) as f64
    }

    pub fn record_line(&self) -> String {
        let mut s = format!("record label={}", self.label);
        for (k, v) in &self.params {
            write!(s, " {k}={v}").unwrap();
        }
        write!(s, " sessions={}", self.sessions).unwrap();
        write!(s, " gates={} non_xor={}", opt(self.gates), opt(self.non_xor)).unwrap();
        write!(s, " comm_bytes={} items={} results_sha256={}", self.comm_bytes, self.items, self.results_sha256).unwrap();
        let v = self.verified.map_or("skipped", |b| if b { "pass" } else { "fail" });
        write!(s, " verified={v}").unwrap();
        s
    }

    pub fn timing_line(&self) -> String {
        let t = &self.timings;
        format!(
            "timing label={} nondeterministic=true garble_ms={:.3} eval_ms={:.3} encrypt_ms={:.3} decrypt_ms={:.3} wall_ms={:.3} per_item_ms={:.4}",
            self.label,
            ms(t.garble),
            ms(t.evaluate),
            ms(t.encrypt),
            ms(t.decrypt),
            ms(t.wall),
            self.per_item_ms()
        )
    }
}

pub fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn opt(v: Option<usize>) -> String {
    v.map_or_else(|| "-".into(), |v| v.to_string())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Table followed by the machine records.
pub fn render(title: &str, rows: &[ReportRow], notes: &[String]) -> String {
    let mut s = format!("== {title} ==\n");
    let header = [
        "label", "garbling ms", "evaluation ms", "encrypt ms", "decrypt ms", "wall ms", "gates", "non-XOR", "comm bytes",
    ];
    let cells: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            let t = &r.timings;
            [
                r.label.clone(),
                format!("{:.2}", ms(t.garble)),
                format!("{:.2}", ms(t.evaluate)),
                format!("{:.2}", ms(t.encrypt)),
                format!("{:.2}", ms(t.decrypt)),
                format!("{:.2}", ms(t.wall)),
                opt(r.gates),
                opt(r.non_xor),
                r.comm_bytes.to_string(),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|i| cells.iter().map(|c| c[i].len()).chain([header[i].len()]).max().unwrap())
        .collect();
    let line = |s: &mut String, vals: Vec<&str>| {
        let parts: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:>w$}")).collect();
        writeln!(s, "{}", parts.join("  ")).unwrap();
    };
    line(&mut s, header.to_vec());
    for c in &cells {
        line(&mut s, c.iter().map(String::as_str).collect());
    }
    s.push_str("(times are means over repetitions and are hardware dependent)\n");
    for n in notes {
        writeln!(s, "note: {n}").unwrap();
    }
    for r in rows {
        writeln!(s, "{}", r.record_line()).unwrap();
        writeln!(s, "{}", r.timing_line()).unwrap();
    }
    s
}
