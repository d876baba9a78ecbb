//! `inspect`: gate statistics and predicted garbled size of a circuit.

use dmsc_analytics::io::bundled_model;
use dmsc_analytics::{build_ld_circuit_multi, build_lr_circuit, LdThreshold, SigmoidTable};
use dmsc_core::format::from_text;
use dmsc_core::{build_adder, build_greater_than, build_multiplier, Circuit, CircuitBuilder};
use dmsc_garble::{HEADER_LEN, ROW_BYTES};

use crate::error::{CliError, Result};

/// Named circuits: `adder:W`, `multiplier:W`, `gt:W`, `xor:W`,
/// `ld:M[:N[:MAKERS]]` and `lr:RANGE_BITS`.
pub fn named_circuit(spec: &str) -> Result<Circuit> {
    let mut parts = spec.split(':');
    let name = parts.next().unwrap_or_default();
    let args: Vec<u64> = parts
        .map(|p| p.parse().map_err(|_| CliError::Config(format!("builder `{spec}`: `{p}` is not a number"))))
        .collect::<Result<_>>()?;
    let arg = |i: usize, default: Option<u64>| {
        args.get(i)
            .copied()
            .or(default)
            .ok_or_else(|| CliError::Config(format!("builder `{spec}`: missing argument {}", i + 1)))
    };
    let c = match name {
        "adder" => build_adder(arg(0, None)? as usize),
        "multiplier" => build_multiplier(arg(0, None)? as usize),
        "gt" => build_greater_than(arg(0, None)? as usize),
        "xor" => Ok(xor_circuit(arg(0, None)? as usize)),
        "ld" => {
            let n = arg(1, Some(200))?;
            let count_bits = (u64::BITS - n.leading_zeros()) as usize;
            return build_ld_circuit_multi(count_bits, arg(0, None)? as usize, arg(2, Some(1))? as usize, LdThreshold::default())
                .map_err(CliError::config);
        }
        "lr" => {
            let model = bundled_model();
            let table = SigmoidTable::symmetric(model.spec, arg(0, None)? as u32, 8.0).map_err(CliError::config)?;
            return build_lr_circuit(&model, &table).map_err(CliError::config);
        }
        _ => return Err(CliError::Config(format!("unknown builder `{name}`"))),
    };
    c.map_err(CliError::config)
}

/// Bitwise XOR of two `width`-bit inputs. Contains no AND gates.
pub fn xor_circuit(width: usize) -> Circuit {
    let mut b = CircuitBuilder::new();
    let x = b.input("a", width);
    let y = b.input("b", width);
    let z = b.xor_word(&x, &y);
    b.output("xor", &z);
    b.finish()
}

pub fn parse_circuit_file(path: &std::path::Path) -> Result<Circuit> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    from_text(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitReport {
    pub gates: usize,
    pub non_xor: usize,
    pub xor: usize,
    pub inv: usize,
    pub input_bits: usize,
    pub constant_bits: usize,
    pub output_bits: usize,
    pub predicted_garbled_bytes: usize,
}

pub fn inspect(c: &Circuit) -> CircuitReport {
    let s = c.gate_stats();
    CircuitReport {
        gates: s.total,
        non_xor: s.non_xor,
        xor: s.xor,
        inv: s.inv,
        input_bits: c.n_inputs(),
        constant_bits: c.n_constants(),
        output_bits: c.outputs().len(),
        predicted_garbled_bytes: HEADER_LEN + ROW_BYTES * c.and_count(),
    }
}

pub fn render(name: &str, c: &Circuit) -> String {
    let r = inspect(c);
    let groups = |gs: &[dmsc_core::Group]| gs.iter().map(|g| format!("{}:{}", g.name, g.len)).collect::<Vec<_>>().join(",");
    format!(
        "circuit {name}\n  gates {}  non-XOR {}  XOR {}  INV {}\n  inputs {} bits [{}]  constants {}  outputs {} bits [{}]\n  predicted garbled size {} bytes ({} header + {} x non-XOR)\n\
         record circuit={name} gates={} non_xor={} xor={} inv={} input_bits={} constant_bits={} output_bits={} predicted_garbled_bytes={}\n",
        r.gates,
        r.non_xor,
        r.xor,
        r.inv,
        r.input_bits,
        groups(c.input_groups()),
        r.constant_bits,
        r.output_bits,
        groups(c.output_groups()),
        r.predicted_garbled_bytes,
        HEADER_LEN,
        ROW_BYTES,
        r.gates,
        r.non_xor,
        r.xor,
        r.inv,
        r.input_bits,
        r.constant_bits,
        r.output_bits,
        r.predicted_garbled_bytes,
    )
}
