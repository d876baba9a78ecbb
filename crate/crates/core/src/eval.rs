use crate::circuit::{Circuit, GateKind};
use crate::error::{CircuitError, Result};

/// Evaluates `circuit` in the clear. `inputs` covers the party input wires
/// only; constant wires take their built-in values.
pub fn eval_plain(circuit: &Circuit, inputs: &[bool]) -> Result<Vec<bool>> {
    if inputs.len() != circuit.n_inputs() {
        return Err(CircuitError::InputLength {
            expected: circuit.n_inputs(),
            got: inputs.len(),
        });
    }
    let mut wires = Vec::with_capacity(circuit.n_wires());
    wires.extend_from_slice(inputs);
    wires.extend_from_slice(circuit.constants());
    for g in circuit.gates() {
        let a = wires[g.a as usize];
        let v = match g.kind {
            GateKind::Xor => a ^ wires[g.b as usize],
            GateKind::And => a & wires[g.b as usize],
            GateKind::Inv => !a,
        };
        wires.push(v);
    }
    Ok(circuit.outputs().iter().map(|&w| wires[w as usize]).collect())
}

/// Bit-sliced evaluation of up to 64 input vectors at once: bit `k` of
/// `inputs[i]` is input wire `i` of instance `k`.
pub fn eval_plain_sliced(circuit: &Circuit, inputs: &[u64]) -> Result<Vec<u64>> {
    if inputs.len() != circuit.n_inputs() {
        return Err(CircuitError::InputLength {
            expected: circuit.n_inputs(),
            got: inputs.len(),
        });
    }
    let mut wires = Vec::with_capacity(circuit.n_wires());
    wires.extend_from_slice(inputs);
    wires.extend(circuit.constants().iter().map(|&c| if c { u64::MAX } else { 0 }));
    for g in circuit.gates() {
        let a = wires[g.a as usize];
        let v = match g.kind {
            GateKind::Xor => a ^ wires[g.b as usize],
            GateKind::And => a & wires[g.b as usize],
            GateKind::Inv => !a,
        };
        wires.push(v);
    }
    Ok(circuit.outputs().iter().map(|&w| wires[w as usize]).collect())
}
