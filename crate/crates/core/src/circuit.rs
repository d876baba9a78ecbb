//! Boolean circuit intermediate representation.
//!
//! Wire layout is fixed: party input wires occupy `0..n_inputs`, constant
//! wires follow at `n_inputs..n_inputs + constants.len()`, and every gate
//! output comes after that in gate order. A gate's output id is always
//! strictly greater than its input ids.

use crate::error::{CircuitError, Result};

pub type WireId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Xor,
    And,
    Inv,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Xor => "XOR",
            GateKind::And => "AND",
            GateKind::Inv => "INV",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Inv => 1,
            _ => 2,
        }
    }
}

/// A single gate. For `Inv`, `b` equals `a` and is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub a: WireId,
    pub b: WireId,
    pub out: WireId,
}

impl Gate {
    pub fn xor(a: WireId, b: WireId, out: WireId) -> Self {
        Gate { kind: GateKind::Xor, a, b, out }
    }

    pub fn and(a: WireId, b: WireId, out: WireId) -> Self {
        Gate { kind: GateKind::And, a, b, out }
    }

    pub fn inv(a: WireId, out: WireId) -> Self {
        Gate { kind: GateKind::Inv, a, b: a, out }
    }
}

/// A named, contiguous range of bits. For input groups the range is over
/// input wire ids; for output groups it is over positions in `outputs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Group {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Group {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Circuit {
    pub(crate) n_inputs: usize,
    pub(crate) constants: Vec<bool>,
    pub(crate) input_groups: Vec<Group>,
    pub(crate) output_groups: Vec<Group>,
    pub(crate) gates: Vec<Gate>,
    pub(crate) outputs: Vec<WireId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateStats {
    pub total: usize,
    pub non_xor: usize,
    pub xor: usize,
    pub inv: usize,
}

impl Circuit {
    /// Assembles a circuit from raw parts and validates it.
    pub fn from_parts(
        n_inputs: usize,
        constants: Vec<bool>,
        input_groups: Vec<Group>,
        output_groups: Vec<Group>,
        gates: Vec<Gate>,
        outputs: Vec<WireId>,
    ) -> Result<Self> {
        let c = Circuit {
            n_inputs,
            constants,
            input_groups,
            output_groups,
            gates,
            outputs,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn constants(&self) -> &[bool] {
        &self.constants
    }

    pub fn n_constants(&self) -> usize {
        self.constants.len()
    }

    /// First wire id produced by a gate.
    pub fn first_gate_wire(&self) -> usize {
        self.n_inputs + self.constants.len()
    }

    pub fn n_wires(&self) -> usize {
        self.first_gate_wire() + self.gates.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn input_groups(&self) -> &[Group] {
        &self.input_groups
    }

    pub fn output_groups(&self) -> &[Group] {
        &self.output_groups
    }

    pub fn input_group(&self, name: &str) -> Result<&Group> {
        self.input_groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| CircuitError::UnknownGroup(name.to_string()))
    }

    pub fn output_group(&self, name: &str) -> Result<&Group> {
        self.output_groups
            .iter()
            .find(|g| g.name == name)
            .ok_or_else(|| CircuitError::UnknownGroup(name.to_string()))
    }

    pub fn and_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::And).count()
    }

    /// Gate totals. INV is garbled for free, so `non_xor` counts AND only.
    pub fn gate_stats(&self) -> GateStats {
        let mut s = GateStats {
            total: self.gates.len(),
            ..Default::default()
        };
        for g in &self.gates {
            match g.kind {
                GateKind::And => s.non_xor += 1,
                GateKind::Xor => s.xor += 1,
                GateKind::Inv => s.inv += 1,
            }
        }
        s
    }

    /// Checks wire numbering, arity and topological order.
    pub fn validate(&self) -> Result<()> {
        let first = self.first_gate_wire();
        for (i, g) in self.gates.iter().enumerate() {
            let expected_out = first + i;
            if g.out as usize != expected_out {
                return Err(CircuitError::MalformedGate {
                    index: i,
                    reason: format!("output id {} but expected {}", g.out, expected_out),
                });
            }
            if g.kind == GateKind::Inv && g.a != g.b {
                return Err(CircuitError::MalformedGate {
                    index: i,
                    reason: "INV gate with two distinct inputs".into(),
                });
            }
            if g.a >= g.out || g.b >= g.out {
                return Err(CircuitError::NotTopological {
                    index: i,
                    output: g.out,
                    inputs: [g.a, g.b],
                });
            }
        }
        let n_wires = self.n_wires();
        if let Some(&w) = self.outputs.iter().find(|&&w| w as usize >= n_wires) {
            return Err(CircuitError::UnknownOutput(w));
        }
        for g in &self.input_groups {
            if g.start + g.len > self.n_inputs {
                return Err(CircuitError::MalformedGate {
                    index: 0,
                    reason: format!("input group `{}` exceeds input wires", g.name),
                });
            }
        }
        for g in &self.output_groups {
            if g.start + g.len > self.outputs.len() {
                return Err(CircuitError::MalformedGate {
                    index: 0,
                    reason: format!("output group `{}` exceeds output wires", g.name),
                });
            }
        }
        Ok(())
    }
}
