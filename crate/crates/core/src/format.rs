//! Bristol-Fashion-style text serialization.
//!
//! ```text
//! <n_gates> <n_wires>
//! <n_input_groups> <name>:<width> ...
//! <n_constants> <bit string, or - when empty>
//! <n_output_groups> <name>:<width> ...
//! <n_outputs> <wire ids...>
//!
//! 2 1 <a> <b> <out> XOR|AND
//! 1 1 <a> <out> INV
//! ```
//!
//! Input groups are laid out contiguously from wire 0 in declaration order,
//! output groups contiguously over the output wire list.

use std::fmt::Write as _;

use crate::circuit::{Circuit, Gate, GateKind, Group, WireId};
use crate::error::{CircuitError, Result};

pub fn to_text(c: &Circuit) -> String {
    let mut s = String::with_capacity(c.gates().len() * 16 + 256);
    writeln!(s, "{} {}", c.gates().len(), c.n_wires()).unwrap();
    write_groups(&mut s, c.input_groups());
    if c.constants().is_empty() {
        writeln!(s, "0 -").unwrap();
    } else {
        let bits: String = c.constants().iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(s, "{} {}", c.constants().len(), bits).unwrap();
    }
    write_groups(&mut s, c.output_groups());
    write!(s, "{}", c.outputs().len()).unwrap();
    for w in c.outputs() {
        write!(s, " {w}").unwrap();
    }
    s.push_str("\n\n");
    for g in c.gates() {
        match g.kind {
            GateKind::Inv => writeln!(s, "1 1 {} {} INV", g.a, g.out).unwrap(),
            k => writeln!(s, "2 1 {} {} {} {}", g.a, g.b, g.out, k.name()).unwrap(),
        }
    }
    s
}

fn write_groups(s: &mut String, groups: &[Group]) {
    write!(s, "{}", groups.len()).unwrap();
    for g in groups {
        write!(s, " {}:{}", g.name, g.len).unwrap();
    }
    s.push('\n');
}

fn perr(line: usize, message: impl Into<String>) -> CircuitError {
    CircuitError::Parse {
        line,
        message: message.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| perr(line, format!("bad {what} `{tok}`")))
}

fn parse_groups(text: &str, line: usize) -> Result<Vec<Group>> {
    let mut toks = text.split_whitespace();
    let n: usize = num(toks.next(), line, "group count")?;
    let mut start = 0;
    let mut groups = Vec::with_capacity(n);
    for _ in 0..n {
        let tok = toks.next().ok_or_else(|| perr(line, "missing group"))?;
        let (name, len) = tok
            .rsplit_once(':')
            .ok_or_else(|| perr(line, format!("group `{tok}` is not name:width")))?;
        let len: usize = num(Some(len), line, "group width")?;
        groups.push(Group {
            name: name.to_string(),
            start,
            len,
        });
        start += len;
    }
    if toks.next().is_some() {
        return Err(perr(line, "trailing tokens after groups"));
    }
    Ok(groups)
}

pub fn from_text(text: &str) -> Result<Circuit> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    fn next_line<'a>(
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
        what: &str,
    ) -> Result<(usize, &'a str)> {
        lines
            .find(|(_, l)| !l.is_empty())
            .ok_or_else(|| perr(0, format!("unexpected end of input, expected {what}")))
    }
    let mut next = |what: &str| next_line(&mut lines, what);

    let (ln, header) = next("header")?;
    let mut t = header.split_whitespace();
    let n_gates: usize = num(t.next(), ln, "gate count")?;
    let n_wires: usize = num(t.next(), ln, "wire count")?;

    let (ln, l) = next("input groups")?;
    let input_groups = parse_groups(l, ln)?;
    let n_inputs: usize = input_groups.iter().map(|g| g.len).sum();

    let (ln, l) = next("constants")?;
    let mut t = l.split_whitespace();
    let n_const: usize = num(t.next(), ln, "constant count")?;
    let bits = t.next().ok_or_else(|| perr(ln, "missing constant bits"))?;
    let constants: Vec<bool> = if n_const == 0 {
        Vec::new()
    } else {
        bits.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(perr(ln, format!("bad constant bit `{c}`"))),
            })
            .collect::<Result<_>>()?
    };
    if constants.len() != n_const {
        return Err(perr(ln, "constant count does not match bit string"));
    }

    let (ln, l) = next("output groups")?;
    let output_groups = parse_groups(l, ln)?;

    let (ln, l) = next("output wires")?;
    let mut t = l.split_whitespace();
    let n_out: usize = num(t.next(), ln, "output count")?;
    let outputs: Vec<WireId> = (0..n_out)
        .map(|_| num(t.next(), ln, "output wire"))
        .collect::<Result<_>>()?;

    let mut gates = Vec::with_capacity(n_gates);
    for _ in 0..n_gates {
        let (ln, l) = next("gate")?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let gate = match toks.as_slice() {
            ["2", "1", a, b, o, kind] => {
                let kind = match *kind {
                    "XOR" => GateKind::Xor,
                    "AND" => GateKind::And,
                    other => return Err(perr(ln, format!("unknown 2-input gate `{other}`"))),
                };
                Gate {
                    kind,
                    a: num(Some(a), ln, "wire")?,
                    b: num(Some(b), ln, "wire")?,
                    out: num(Some(o), ln, "wire")?,
                }
            }
            ["1", "1", a, o, "INV"] => Gate::inv(num(Some(a), ln, "wire")?, num(Some(o), ln, "wire")?),
            _ => return Err(perr(ln, format!("malformed gate line `{l}`"))),
        };
        gates.push(gate);
    }
    drop(next);
    if let Some((ln, _)) = lines.find(|(_, l)| !l.is_empty()) {
        return Err(perr(ln, "trailing content after gates"));
    }

    let c = Circuit::from_parts(n_inputs, constants, input_groups, output_groups, gates, outputs)?;
    if c.n_wires() != n_wires {
        return Err(perr(1, format!("header declares {n_wires} wires, found {}", c.n_wires())));
    }
    Ok(c)
}
