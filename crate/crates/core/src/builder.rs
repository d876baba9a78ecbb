//! Incremental circuit construction.
//!
//! Builders work on [`Bit`] handles and little-endian words (`Vec<Bit>`,
//! least-significant bit first). Inputs and constants may be declared in
//! any order; [`CircuitBuilder::finish`] renumbers wires so that inputs come
//! first, constants second, and gate outputs last.

use crate::circuit::{Circuit, Gate, GateKind, Group, WireId};
use crate::error::{CircuitError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bit(u32);

#[derive(Debug, Clone, Copy)]
enum Node {
    Input(u32),
    Const(u32),
    Gate(GateKind, Bit, Bit),
}

#[derive(Debug, Default)]
pub struct CircuitBuilder {
    nodes: Vec<Node>,
    n_inputs: u32,
    constants: Vec<bool>,
    input_groups: Vec<Group>,
    output_groups: Vec<Group>,
    outputs: Vec<Bit>,
    zero: Option<Bit>,
    one: Option<Bit>,
}

pub type Word = Vec<Bit>;

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, node: Node) -> Bit {
        let id = Bit(self.nodes.len() as u32);
        self.nodes.push(node);
        id
    }

    /// Declares `width` party input bits under `name`.
    pub fn input(&mut self, name: &str, width: usize) -> Word {
        self.input_groups.push(Group {
            name: name.to_string(),
            start: self.n_inputs as usize,
            len: width,
        });
        (0..width)
            .map(|_| {
                let idx = self.n_inputs;
                self.n_inputs += 1;
                self.push(Node::Input(idx))
            })
            .collect()
    }

    /// A fresh constant wire. Constants are never folded away: their labels
    /// are produced by the garbler like any other wire.
    pub fn constant(&mut self, value: bool) -> Bit {
        let idx = self.constants.len() as u32;
        self.constants.push(value);
        self.push(Node::Const(idx))
    }

    pub fn constant_word(&mut self, value: u128, width: usize) -> Word {
        (0..width)
            .map(|i| self.constant(i < 128 && (value >> i) & 1 == 1))
            .collect()
    }

    pub fn zero(&mut self) -> Bit {
        match self.zero {
            Some(b) => b,
            None => {
                let b = self.constant(false);
                self.zero = Some(b);
                b
            }
        }
    }

    pub fn one(&mut self) -> Bit {
        match self.one {
            Some(b) => b,
            None => {
                let b = self.constant(true);
                self.one = Some(b);
                b
            }
        }
    }

    pub fn xor(&mut self, a: Bit, b: Bit) -> Bit {
        self.push(Node::Gate(GateKind::Xor, a, b))
    }

    pub fn and(&mut self, a: Bit, b: Bit) -> Bit {
        self.push(Node::Gate(GateKind::And, a, b))
    }

    pub fn not(&mut self, a: Bit) -> Bit {
        self.push(Node::Gate(GateKind::Inv, a, a))
    }

    pub fn or(&mut self, a: Bit, b: Bit) -> Bit {
        let x = self.xor(a, b);
        let y = self.and(a, b);
        self.xor(x, y)
    }

    /// `if sel { if1 } else { if0 }`, one AND.
    pub fn mux(&mut self, sel: Bit, if0: Bit, if1: Bit) -> Bit {
        let d = self.xor(if0, if1);
        let m = self.and(sel, d);
        self.xor(if0, m)
    }

    pub fn mux_word(&mut self, sel: Bit, if0: &[Bit], if1: &[Bit]) -> Word {
        assert_eq!(if0.len(), if1.len());
        if0.iter()
            .zip(if1)
            .map(|(&a, &b)| self.mux(sel, a, b))
            .collect()
    }

    pub fn xor_word(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        assert_eq!(a.len(), b.len());
        a.iter().zip(b).map(|(&x, &y)| self.xor(x, y)).collect()
    }

    pub fn not_word(&mut self, a: &[Bit]) -> Word {
        a.iter().map(|&x| self.not(x)).collect()
    }

    /// Ripple-carry addition with an optional carry-in. `b` may be shorter
    /// than `a`; missing high bits of `b` are treated as zero without
    /// allocating constant wires. Returns `a.len()` bits, plus the carry-out
    /// when `carry_out` is set. One AND per stage that produces a carry.
    pub fn add_general(&mut self, a: &[Bit], b: &[Bit], cin: Option<Bit>, carry_out: bool) -> Word {
        assert!(b.len() <= a.len(), "second operand wider than first");
        let n = a.len();
        let mut carry = cin;
        let mut out = Vec::with_capacity(n + carry_out as usize);
        for i in 0..n {
            let need_carry = carry_out || i + 1 < n;
            match (b.get(i).copied(), carry) {
                (Some(bi), Some(c)) => {
                    let ac = self.xor(a[i], c);
                    let bc = self.xor(bi, c);
                    let s = self.xor(ac, bi);
                    out.push(s);
                    carry = need_carry.then(|| {
                        let t = self.and(ac, bc);
                        self.xor(t, c)
                    });
                }
                (Some(bi), None) => {
                    out.push(self.xor(a[i], bi));
                    carry = need_carry.then(|| self.and(a[i], bi));
                }
                (None, Some(c)) => {
                    out.push(self.xor(a[i], c));
                    carry = need_carry.then(|| self.and(a[i], c));
                }
                (None, None) => out.push(a[i]),
            }
        }
        if carry_out {
            let c = match carry {
                Some(c) => c,
                None => self.zero(),
            };
            out.push(c);
        }
        out
    }

    /// Two's-complement wraparound addition of equal-width words.
    pub fn add(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        assert_eq!(a.len(), b.len());
        self.add_general(a, b, None, false)
    }

    /// Unsigned addition that keeps the carry: result is one bit wider than
    /// the wider operand.
    pub fn add_extend(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        if a.len() >= b.len() {
            self.add_general(a, b, None, true)
        } else {
            self.add_general(b, a, None, true)
        }
    }

    /// Two's-complement wraparound subtraction `a - b` of equal widths.
    pub fn sub(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        assert_eq!(a.len(), b.len());
        let nb = self.not_word(b);
        let one = self.one();
        self.add_general(a, &nb, Some(one), false)
    }

    /// `x + c` for a single bit `c`, wraparound.
    pub fn increment_by(&mut self, x: &[Bit], c: Bit) -> Word {
        self.add_general(x, &[], Some(c), false)
    }

    /// Negates `x` (two's complement) when `sign` is set.
    pub fn cond_negate(&mut self, x: &[Bit], sign: Bit) -> Word {
        let flipped: Word = x.iter().map(|&b| self.xor(b, sign)).collect();
        self.increment_by(&flipped, sign)
    }

    /// Full-width unsigned schoolbook product, `a.len() + b.len()` bits.
    pub fn mul(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        assert!(!a.is_empty() && !b.is_empty());
        let la = a.len();
        let mut acc: Word = a.iter().map(|&x| self.and(x, b[0])).collect();
        for (j, &bj) in b.iter().enumerate().skip(1) {
            let pp: Word = a.iter().map(|&x| self.and(x, bj)).collect();
            let hi = acc.split_off(j);
            let sum = self.add_general(&pp, &hi, None, true);
            acc.extend(sum);
        }
        let target = la + b.len();
        while acc.len() < target {
            let z = self.zero();
            acc.push(z);
        }
        acc
    }

    /// Full-width two's-complement product, `a.len() + b.len()` bits.
    /// Computes the unsigned product of the bit patterns and subtracts the
    /// sign corrections from its high part.
    pub fn mul_signed(&mut self, a: &[Bit], b: &[Bit]) -> Word {
        let (n, m) = (a.len(), b.len());
        let mut p = self.mul(a, b);
        let sa = a[n - 1];
        let sb = b[m - 1];
        let corr_a: Word = b.iter().map(|&x| self.and(x, sa)).collect();
        let hi = self.sub(&p[n..], &corr_a);
        p.truncate(n);
        p.extend(hi);
        let corr_b: Word = a.iter().map(|&x| self.and(x, sb)).collect();
        let hi = self.sub(&p[m..], &corr_b);
        p.truncate(m);
        p.extend(hi);
        p
    }

    /// Low `width` bits of `a * b`; partial products above `width` are
    /// never built. Used for two's-complement products of sign-extended
    /// operands.
    pub fn mul_wrap(&mut self, a: &[Bit], b: &[Bit], width: usize) -> Word {
        assert!(a.len() >= width && b.len() >= width);
        let mut acc: Word = a[..width].iter().map(|&x| self.and(x, b[0])).collect();
        for j in 1..width {
            let pp: Word = a[..width - j].iter().map(|&x| self.and(x, b[j])).collect();
            let hi = acc.split_off(j);
            let sum = self.add_general(&hi, &pp, None, false);
            acc.extend(sum);
        }
        acc
    }

    /// Unsigned `a > b`; equal widths. One AND per bit.
    pub fn gt(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        assert_eq!(a.len(), b.len());
        // Carry-out of a + !b is set exactly when a > b.
        let mut carry: Option<Bit> = None;
        for (&ai, &bi) in a.iter().zip(b) {
            let nb = self.not(bi);
            carry = Some(match carry {
                None => self.and(ai, nb),
                Some(c) => {
                    let ac = self.xor(ai, c);
                    let bc = self.xor(nb, c);
                    let t = self.and(ac, bc);
                    self.xor(t, c)
                }
            });
        }
        carry.unwrap_or_else(|| self.zero())
    }

    /// Signed `a > b` for equal-width two's-complement words.
    pub fn gt_signed(&mut self, a: &[Bit], b: &[Bit]) -> Bit {
        let n = a.len();
        // Flipping the sign bits maps signed order onto unsigned order.
        let mut a2 = a.to_vec();
        let mut b2 = b.to_vec();
        a2[n - 1] = self.not(a[n - 1]);
        b2[n - 1] = self.not(b[n - 1]);
        self.gt(&a2, &b2)
    }

    /// Multiplexer tree over `words`, indexed little-endian by `index`.
    pub fn select(&mut self, index: &[Bit], words: &[Word]) -> Word {
        assert_eq!(words.len(), 1usize << index.len());
        let mut level: Vec<Word> = words.to_vec();
        for &s in index {
            level = level
                .chunks(2)
                .map(|pair| self.mux_word(s, &pair[0], &pair[1]))
                .collect();
        }
        level.pop().expect("non-empty table")
    }

    pub fn output(&mut self, name: &str, bits: &[Bit]) {
        self.output_groups.push(Group {
            name: name.to_string(),
            start: self.outputs.len(),
            len: bits.len(),
        });
        self.outputs.extend_from_slice(bits);
    }

    pub fn and_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Gate(GateKind::And, _, _)))
            .count()
    }

    /// Renumbers wires and produces a validated circuit.
    pub fn finish(self) -> Circuit {
        let n_inputs = self.n_inputs as usize;
        let first_gate = n_inputs + self.constants.len();
        let mut map: Vec<WireId> = Vec::with_capacity(self.nodes.len());
        let mut gates = Vec::new();
        for node in &self.nodes {
            let id = match *node {
                Node::Input(i) => i,
                Node::Const(i) => (n_inputs as u32) + i,
                Node::Gate(kind, a, b) => {
                    let out = (first_gate + gates.len()) as WireId;
                    gates.push(Gate {
                        kind,
                        a: map[a.0 as usize],
                        b: map[b.0 as usize],
                        out,
                    });
                    out
                }
            };
            map.push(id);
        }
        let outputs = self.outputs.iter().map(|b| map[b.0 as usize]).collect();
        let circuit = Circuit {
            n_inputs,
            constants: self.constants,
            input_groups: self.input_groups,
            output_groups: self.output_groups,
            gates,
            outputs,
        };
        debug_assert!(circuit.validate().is_ok());
        circuit
    }
}

pub fn zero_extend(b: &mut CircuitBuilder, x: &[Bit], width: usize) -> Word {
    let mut out = x.to_vec();
    while out.len() < width {
        out.push(b.zero());
    }
    out
}

pub fn sign_extend(x: &[Bit], width: usize) -> Word {
    let mut out = x.to_vec();
    let msb = *x.last().expect("non-empty word");
    out.resize(width.max(x.len()), msb);
    out
}

/// Left shift by rewiring; low bits filled with the shared zero constant.
pub fn shl(b: &mut CircuitBuilder, x: &[Bit], by: usize) -> Word {
    let z = b.zero();
    std::iter::repeat(z).take(by).chain(x.iter().copied()).collect()
}

pub(crate) fn check_width(width: usize, min: usize, max: usize) -> Result<()> {
    if width < min || width > max {
        Err(CircuitError::WidthOutOfRange { width, min, max })
    } else {
        Ok(())
    }
}
