use dmsc_analytics::io::bundled_model;
use dmsc_analytics::*;

fn main() {
    let th = LdThreshold::default();
    for (bits, label) in [(8, "N<=200"), (11, "N<=1600")] {
        for m in [1, 10, 100] {
            let c = build_ld_circuit(bits, m, th).unwrap();
            let s = c.gate_stats();
            println!("LD {label} M={m}: total={} non_xor={} xor={} inv={}", s.total, s.non_xor, s.xor, s.inv);
        }
    }
    let model = bundled_model();
    let mut prev = 0;
    for r in [10, 11, 12] {
        let t = SigmoidTable::symmetric(model.spec, r, 8.0).unwrap();
        let c = build_lr_circuit(&model, &t).unwrap();
        let s = c.gate_stats();
        println!("LR r={r}: total={} non_xor={} ratio={:.3}", s.total, s.non_xor, s.non_xor as f64 / prev.max(1) as f64);
        prev = s.non_xor;
    }
}
