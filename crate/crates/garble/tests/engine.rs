use std::collections::HashSet;

use dmsc_core::bits::{from_bits, pack_words};
use dmsc_core::{
    build_adder, build_greater_than, build_lookup, build_multiplier, eval_plain, Circuit,
    CircuitBuilder,
};
use dmsc_garble::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Garbles with random labels, evaluates on `bits`, decodes.
fn round_trip(c: &Circuit, bits: &[bool], seed: u64) -> Vec<bool> {
    let mut r = rng(seed);
    let delta = GlobalDelta::random(&mut r);
    let g = garble(c, delta, &mut RandomLabels(r)).unwrap();
    let mut active = encode_inputs(&g.input_zero_labels, delta, bits).unwrap();
    active.extend_from_slice(&g.constant_labels);
    let out = evaluate(&g.garbled, c, &active).unwrap();
    decode(&g.decoding, &out).unwrap()
}

fn random_circuit(r: &mut ChaCha20Rng) -> Circuit {
    let mut b = CircuitBuilder::new();
    let n_in = r.gen_range(1..24);
    let mut pool = b.input("x", n_in);
    if r.gen_bool(0.5) {
        pool.push(b.constant(r.gen()));
    }
    for _ in 0..r.gen_range(1..200) {
        let x = pool[r.gen_range(0..pool.len())];
        let y = pool[r.gen_range(0..pool.len())];
        let w = match r.gen_range(0..3) {
            0 => b.xor(x, y),
            1 => b.and(x, y),
            _ => b.not(x),
        };
        pool.push(w);
    }
    let outs: Vec<_> = (0..r.gen_range(1..16)).map(|_| pool[r.gen_range(0..pool.len())]).collect();
    b.output("y", &outs);
    b.finish()
}

#[test]
fn delta_has_point_bit_and_is_deterministic() {
    let mut r = rng(1);
    let mut seen = HashSet::new();
    for _ in 0..1000 {
        let seed: [u8; 16] = r.gen();
        let d = derive_delta(seed);
        assert!(d.label().point());
        assert_eq!(d, derive_delta(seed));
        seen.insert(d.to_bytes());
    }
    assert_eq!(seen.len(), 1000);
}

#[test]
fn prf_labels_are_deterministic_and_distinct() {
    let key = PrfKey::new([7; 16]);
    assert_eq!(derive_input_label(&key, 0), derive_input_label(&key, 0));
    let labels: HashSet<_> = (0..1000u128).map(|i| derive_input_label(&key, i)).collect();
    assert_eq!(labels.len(), 1000);

    let delta = derive_delta([3; 16]);
    let m = maker_wire_message(2, 17);
    assert_eq!(
        maker_active_label(&key, delta, m, true),
        derive_input_label(&key, m) ^ delta
    );
    assert_eq!(maker_active_label(&key, delta, m, false), derive_input_label(&key, m));
    assert_ne!(maker_wire_message(1, 0), maker_wire_message(0, 1));
}

#[test]
fn xor_only_circuit_has_no_rows() {
    let mut b = CircuitBuilder::new();
    let x = b.input("x", 8);
    let y = b.input("y", 8);
    let z = b.xor_word(&x, &y);
    let z = b.not_word(&z);
    b.output("z", &z);
    let c = b.finish();
    let mut r = rng(2);
    let g = garble(&c, GlobalDelta::random(&mut r), &mut RandomLabels(r)).unwrap();
    assert!(g.garbled.rows.is_empty());
    assert_eq!(g.garbled.to_bytes().len(), HEADER_LEN);
}

#[test]
fn single_and_truth_table() {
    let mut b = CircuitBuilder::new();
    let x = b.input("x", 1);
    let y = b.input("y", 1);
    let z = b.and(x[0], y[0]);
    b.output("z", &[z]);
    let c = b.finish();
    let mut r = rng(3);
    let delta = GlobalDelta::random(&mut r);
    let g = garble(&c, delta, &mut RandomLabels(r)).unwrap();
    assert_eq!(g.garbled.rows.len(), 1);
    let mut got = Vec::new();
    for (a, bb) in [(false, false), (false, true), (true, false), (true, true)] {
        let active = encode_inputs(&g.input_zero_labels, delta, &[a, bb]).unwrap();
        let out = evaluate(&g.garbled, &c, &active).unwrap();
        got.push(decode(&g.decoding, &out).unwrap()[0]);
    }
    assert_eq!(got, vec![false, false, false, true]);
}

#[test]
fn garbled_adder_adds() {
    let c = build_adder(8).unwrap();
    let out = round_trip(&c, &pack_words(&[1, 1], 8), 4);
    assert_eq!(from_bits(&out), 2);
}

#[test]
fn label_algebra_and_decoding_of_zero_labels() {
    // Identity circuit: outputs are the input wires themselves.
    let mut b = CircuitBuilder::new();
    let x = b.input("x", 16);
    b.output("x", &x);
    let c = b.finish();
    let mut r = rng(5);
    let delta = GlobalDelta::random(&mut r);
    let g = garble(&c, delta, &mut RandomLabels(r)).unwrap();
    let zeros = g.input_zero_labels.clone();
    assert_eq!(decode(&g.decoding, &zeros).unwrap(), vec![false; 16]);
    let ones: Vec<_> = zeros.iter().map(|&l| l ^ delta).collect();
    assert_eq!(decode(&g.decoding, &ones).unwrap(), vec![true; 16]);
    for (z, o) in zeros.iter().zip(&ones) {
        assert_eq!(*z ^ *o, delta.label());
        assert_ne!(z.point(), o.point());
    }
}

#[test]
fn random_circuits_match_plain_evaluation() {
    let mut r = rng(6);
    for case in 0..100 {
        let c = random_circuit(&mut r);
        for _ in 0..10 {
            let bits: Vec<bool> = (0..c.n_inputs()).map(|_| r.gen()).collect();
            let expect = eval_plain(&c, &bits).unwrap();
            assert_eq!(round_trip(&c, &bits, r.gen()), expect, "case {case}");
        }
    }
}

#[test]
fn serialized_size_is_header_plus_rows_on_corpus() {
    let table: Vec<u128> = (0..256).collect();
    let corpus = [
        build_adder(32).unwrap(),
        build_multiplier(16).unwrap(),
        build_greater_than(128).unwrap(),
        build_lookup(&table, 8, 9).unwrap(),
    ];
    for c in &corpus {
        let mut r = rng(7);
        let g = garble(c, GlobalDelta::random(&mut r), &mut RandomLabels(r)).unwrap();
        let bytes = g.garbled.to_bytes();
        assert_eq!(bytes.len(), HEADER_LEN + 32 * c.gate_stats().non_xor);
        assert_eq!(GarbledCircuit::from_bytes(&bytes).unwrap(), g.garbled);
    }
}

#[test]
fn garbling_is_reproducible_under_fixed_seed() {
    let c = build_multiplier(8).unwrap();
    let make = || {
        let mut r = rng(8);
        let d = GlobalDelta::random(&mut r);
        garble(&c, d, &mut RandomLabels(r)).unwrap()
    };
    let (a, b) = (make(), make());
    assert_eq!(a.garbled.to_bytes(), b.garbled.to_bytes());
    assert_eq!(a.decoding.to_bytes(), b.decoding.to_bytes());
}

#[test]
fn prf_label_source_matches_maker_derivation() {
    let c = build_adder(8).unwrap();
    let key = PrfKey::new([9; 16]);
    let delta = derive_delta([10; 16]);
    let messages: Vec<u128> = (0..16).map(|i| maker_wire_message((i / 8) as u32, (i % 8) as u64)).collect();
    let g = garble(&c, delta, &mut PrfLabels { key: &key, messages: &messages, rng: rng(11) }).unwrap();
    // Makers compute their own active labels without contacting the garbler.
    let bits = pack_words(&[100, 27], 8);
    let mut active: Vec<_> = messages
        .iter()
        .zip(&bits)
        .map(|(&m, &b)| maker_active_label(&key, delta, m, b))
        .collect();
    active.extend_from_slice(&g.constant_labels);
    let out = evaluate(&g.garbled, &c, &active).unwrap();
    assert_eq!(from_bits(&decode(&g.decoding, &out).unwrap()), 127);
}

#[test]
fn evaluation_rejects_mismatched_inputs() {
    let c = build_adder(8).unwrap();
    let other = build_adder(9).unwrap();
    let mut r = rng(12);
    let delta = GlobalDelta::random(&mut r);
    let g = garble(&c, delta, &mut RandomLabels(r)).unwrap();
    let mut active = encode_inputs(&g.input_zero_labels, delta, &[false; 16]).unwrap();
    active.extend_from_slice(&g.constant_labels);
    assert!(matches!(
        evaluate(&g.garbled, &c, &active[1..]),
        Err(GarbleError::LabelCount { .. })
    ));
    let mut active9 = vec![WireLabel::ZERO; 18];
    active9.extend(std::iter::repeat(WireLabel::ZERO).take(other.n_constants()));
    assert!(matches!(
        evaluate(&g.garbled, &other, &active9),
        Err(GarbleError::HashMismatch)
    ));
    assert!(decode(&g.decoding, &[WireLabel::ZERO]).is_err());
    assert!(GarbledCircuit::from_bytes(&g.garbled.to_bytes()[..50]).is_err());
}

#[test]
fn decoding_info_round_trip() {
    let info = DecodingInfo { masks: vec![true, false, true, true, false, false, false, true, true] };
    assert_eq!(DecodingInfo::from_bytes(&info.to_bytes()).unwrap(), info);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]
    #[test]
    fn garbled_multiplier_matches_plain(a in any::<u8>(), b in any::<u8>(), seed in any::<u64>()) {
        let c = build_multiplier(8).unwrap();
        let bits = pack_words(&[a as u128, b as u128], 8);
        prop_assert_eq!(from_bits(&round_trip(&c, &bits, seed)), a as u128 * b as u128);
    }
}
