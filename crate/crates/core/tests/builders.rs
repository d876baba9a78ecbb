use dmsc_core::bits::{from_bits, pack_words, to_bits};
use dmsc_core::format::{from_text, to_text};
use dmsc_core::{
    build_adder, build_greater_than, build_lookup, build_multiplier, eval_plain, eval_plain_sliced,
    CircuitBuilder, CircuitError,
};
use proptest::prelude::*;

fn run2(c: &dmsc_core::Circuit, a: u128, b: u128, w: usize) -> u128 {
    let out = eval_plain(c, &pack_words(&[a, b], w)).unwrap();
    from_bits(&out)
}

#[test]
fn adder_small_examples() {
    let c = build_adder(8).unwrap();
    assert_eq!(run2(&c, 1, 1, 8), 2);
    assert_eq!(run2(&c, 255, 1, 8), 0);
    assert_eq!(c.gate_stats().non_xor, 7);
}

#[test]
fn multiplier_small_examples() {
    let c = build_multiplier(8).unwrap();
    assert_eq!(run2(&c, 3, 5, 8), 15);
    assert_eq!(run2(&c, 0, 200, 8), 0);
    assert_eq!(run2(&c, 255, 255, 8), 65025);
}

#[test]
fn comparator_small_examples() {
    let c = build_greater_than(8).unwrap();
    assert_eq!(run2(&c, 5, 3, 8), 1);
    assert_eq!(run2(&c, 7, 7, 8), 0);
    assert_eq!(run2(&c, 3, 5, 8), 0);
}

#[test]
fn width_limits() {
    assert!(matches!(build_adder(0), Err(CircuitError::WidthOutOfRange { .. })));
    assert!(build_adder(65).is_err());
    assert!(build_multiplier(33).is_err());
    assert!(build_greater_than(129).is_err());
    assert!(build_greater_than(128).is_ok());
}

#[test]
fn lookup_direct_indexing() {
    let c = build_lookup(&[7, 0, 3, 9], 2, 4).unwrap();
    let out = eval_plain(&c, &to_bits(2, 2)).unwrap();
    assert_eq!(from_bits(&out), 3);
}

#[test]
fn lookup_rejects_bad_tables() {
    assert!(matches!(
        build_lookup(&[1, 2, 3], 2, 4),
        Err(CircuitError::TableLength { .. })
    ));
    assert!(matches!(
        build_lookup(&[1, 2, 3, 16], 2, 4),
        Err(CircuitError::ValueOverflow { index: 3, .. })
    ));
}

#[test]
fn lookup_exhaustive_up_to_twelve_bits() {
    for index_bits in [1usize, 5, 10, 12] {
        let n = 1usize << index_bits;
        let table: Vec<u128> = (0..n as u128).map(|i| (i * 2654435761) % 65536).collect();
        let c = build_lookup(&table, index_bits, 16).unwrap();
        // 64 indices per sliced evaluation.
        for chunk in (0..n).collect::<Vec<_>>().chunks(64) {
            let mut inputs = vec![0u64; index_bits];
            for (lane, &idx) in chunk.iter().enumerate() {
                for (bit, word) in inputs.iter_mut().enumerate() {
                    *word |= (((idx >> bit) & 1) as u64) << lane;
                }
            }
            let out = eval_plain_sliced(&c, &inputs).unwrap();
            for (lane, &idx) in chunk.iter().enumerate() {
                let v: u128 = out
                    .iter()
                    .enumerate()
                    .map(|(bit, w)| (((w >> lane) & 1) as u128) << bit)
                    .sum();
                assert_eq!(v, table[idx], "index {idx}");
            }
        }
    }
}

#[test]
fn lookup_cost_doubles_per_index_bit() {
    let mut prev = None;
    for index_bits in 10..=12 {
        let table = vec![0u128; 1 << index_bits];
        let c = build_lookup(&table, index_bits, 16).unwrap();
        let non_xor = c.gate_stats().non_xor;
        assert_eq!(non_xor, ((1 << index_bits) - 1) * 16);
        if let Some(p) = prev {
            let ratio = non_xor as f64 / p as f64;
            assert!((1.9..2.1).contains(&ratio), "ratio {ratio}");
        }
        prev = Some(non_xor);
    }
}

#[test]
fn xor_only_circuit_is_self_inverse_and_free() {
    let mut b = CircuitBuilder::new();
    let x = b.input("x", 8);
    let y = b.input("y", 8);
    let z = b.xor_word(&x, &y);
    b.output("z", &z);
    let c = b.finish();
    assert_eq!(c.gate_stats().non_xor, 0);
    for v in 0..=255u128 {
        assert_eq!(run2(&c, v, v, 8), 0);
    }
}

#[test]
fn eval_rejects_wrong_input_length() {
    let c = build_adder(4).unwrap();
    assert!(matches!(
        eval_plain(&c, &[true; 7]),
        Err(CircuitError::InputLength { expected: 8, got: 7 })
    ));
}

#[test]
fn builders_are_deterministic() {
    for (a, b) in [
        (build_adder(16), build_adder(16)),
        (build_multiplier(12), build_multiplier(12)),
        (build_greater_than(64), build_greater_than(64)),
    ] {
        assert_eq!(to_text(&a.unwrap()), to_text(&b.unwrap()));
    }
}

#[test]
fn text_format_round_trip_and_diagnostics() {
    let c = build_lookup(&[7, 0, 3, 9], 2, 4).unwrap();
    let text = to_text(&c);
    let back = from_text(&text).unwrap();
    assert_eq!(back, c);

    let broken = text.replacen("AND", "NAND", 1);
    match from_text(&broken) {
        Err(CircuitError::Parse { line, message }) => {
            assert!(line > 5, "line {line}");
            assert!(message.contains("NAND"), "{message}");
        }
        other => panic!("expected parse error, got {other:?}"),
    }
}

#[test]
fn text_format_rejects_non_topological_gate() {
    let text = "1 3\n1 a:2\n0 -\n1 o:1\n1 2\n\n2 1 0 2 2 AND\n";
    assert!(matches!(from_text(text), Err(CircuitError::NotTopological { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn adder16_matches_native(a in any::<u16>(), b in any::<u16>()) {
        let c = build_adder(16).unwrap();
        prop_assert_eq!(run2(&c, a as u128, b as u128, 16), a.wrapping_add(b) as u128);
    }

    #[test]
    fn multiplier16_matches_native(a in any::<u16>(), b in any::<u16>()) {
        let c = build_multiplier(16).unwrap();
        prop_assert_eq!(run2(&c, a as u128, b as u128, 16), (a as u32 * b as u32) as u128);
    }

    #[test]
    fn comparator64_matches_native(a in any::<u64>(), b in any::<u64>()) {
        let c = build_greater_than(64).unwrap();
        prop_assert_eq!(run2(&c, a as u128, b as u128, 64), (a > b) as u128);
    }

    #[test]
    fn signed_ops_match_native(a in any::<i16>(), b in any::<i16>()) {
        use dmsc_core::bits::{from_bits_signed, to_bits_signed};
        use dmsc_core::builder::sign_extend;
        let mut bld = CircuitBuilder::new();
        let x = bld.input("a", 16);
        let y = bld.input("b", 16);
        let d = bld.sub(&x, &y);
        let gt = bld.gt_signed(&x, &y);
        let neg = bld.cond_negate(&x, y[15]);
        let xs = sign_extend(&x, 32);
        let ys = sign_extend(&y, 32);
        let p = bld.mul_wrap(&xs, &ys, 32);
        bld.output("d", &d);
        bld.output("gt", &[gt]);
        bld.output("neg", &neg);
        bld.output("p", &p);
        let c = bld.finish();
        let mut input = to_bits_signed(a as i128, 16);
        input.extend(to_bits_signed(b as i128, 16));
        let out = eval_plain(&c, &input).unwrap();
        prop_assert_eq!(from_bits_signed(&out[0..16]) as i16, a.wrapping_sub(b));
        prop_assert_eq!(out[16], a > b);
        let expect_neg = if b < 0 { a.wrapping_neg() } else { a };
        prop_assert_eq!(from_bits_signed(&out[17..33]) as i16, expect_neg);
        prop_assert_eq!(from_bits_signed(&out[33..65]) as i32, a as i32 * b as i32);
    }

    #[test]
    fn signed_product_matches_native(a in any::<i16>(), b in any::<i8>()) {
        use dmsc_core::bits::{from_bits_signed, to_bits_signed};
        let mut bld = CircuitBuilder::new();
        let x = bld.input("a", 16);
        let y = bld.input("b", 8);
        let p = bld.mul_signed(&x, &y);
        let q = bld.mul_signed(&y, &x);
        bld.output("p", &p);
        bld.output("q", &q);
        let c = bld.finish();
        let mut input = to_bits_signed(a as i128, 16);
        input.extend(to_bits_signed(b as i128, 8));
        let out = eval_plain(&c, &input).unwrap();
        prop_assert_eq!(from_bits_signed(&out[0..24]), a as i128 * b as i128);
        prop_assert_eq!(from_bits_signed(&out[24..48]), a as i128 * b as i128);
    }
}
