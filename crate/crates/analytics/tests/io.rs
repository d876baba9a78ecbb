use dmsc_analytics::io::*;
use dmsc_analytics::synth::{random_counts, synth_lr_model, synth_lr_samples};
use dmsc_analytics::{AnalyticsError, HaplotypeCounts};
use dmsc_core::FixedPointSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[test]
fn haplotype_csv_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let counts: Vec<HaplotypeCounts> = (0..50).map(|_| random_counts(&mut rng, 1600)).collect();
    let mut buf = Vec::new();
    write_haplotype_csv(&mut buf, &counts).unwrap();
    assert!(String::from_utf8_lossy(&buf).starts_with("n_AB,n_Ab,n_aB,n_ab\n"));
    assert_eq!(read_haplotype_csv(buf.as_slice()).unwrap(), counts);
}

#[test]
fn haplotype_csv_errors_carry_line_numbers() {
    let bad = "n_AB,n_Ab,n_aB,n_ab\n1,2,3,4\n1,x,3,4\n";
    assert!(matches!(read_haplotype_csv(bad.as_bytes()), Err(AnalyticsError::Parse { line: 3, .. })));
    let header = "a,b,c,d\n1,2,3,4\n";
    assert!(matches!(read_haplotype_csv(header.as_bytes()), Err(AnalyticsError::Parse { line: 1, .. })));
    let neg = "n_AB,n_Ab,n_aB,n_ab\n1,-2,3,4\n";
    assert!(read_haplotype_csv(neg.as_bytes()).is_err());
}

#[test]
fn samples_round_trip_with_and_without_labels() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let labelled = synth_lr_samples(&mut rng, 20, 5);
    assert_eq!(labelled.dims(), 5);
    for s in [labelled.clone(), Samples { labels: None, ..labelled }] {
        let mut buf = Vec::new();
        write_samples_csv(&mut buf, &s).unwrap();
        let back = read_samples_csv(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}

#[test]
fn bundled_dataset_shape() {
    let s = bundled_samples();
    assert_eq!(s.len(), 569);
    assert_eq!(s.dims(), 30);
    let labels = s.labels.as_ref().unwrap();
    assert_eq!(labels.iter().filter(|&&y| y == 1).count(), 357);
    let m = bundled_model();
    assert_eq!(m.dims(), 30);
    assert_eq!(m.spec, FixedPointSpec::new(16, 8).unwrap());
}

#[test]
fn model_text_round_trip() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let m = synth_lr_model(&mut rng, FixedPointSpec::default(), 12).unwrap();
    assert_eq!(parse_model(&model_to_text(&m)).unwrap(), m);
    let text = "# comment\n\n16 8\n0.5\n1.25\n-0.75\n";
    let m = parse_model(text).unwrap();
    assert_eq!(m.weights, vec![320, -192]);
    assert_eq!(m.bias, 128);
}

#[test]
fn malformed_models_are_rejected() {
    assert!(parse_model("").is_err());
    assert!(parse_model("16 8\n").is_err());
    assert!(parse_model("16 8\n0.5\n").is_err());
    assert!(matches!(parse_model("16 8\n0.5\nabc\n"), Err(AnalyticsError::Parse { line: 3, .. })));
    assert!(parse_model("8 8\n0\n1\n").is_err());
}
