use std::sync::Arc;

use dmsc_analytics::io::{bundled_model, bundled_samples};
use dmsc_analytics::synth::{random_counts, split_among_makers};
use dmsc_analytics::{quantize_features, HaplotypeCounts, SigmoidTable};
use dmsc_market::hygiene::{audit_datatrust, foreign_types};
use dmsc_market::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use MessageType::*;

fn ld(instances: usize, makers: usize, max_total: u64) -> Arc<dyn Computation> {
    Arc::new(LdComputation::new(instances, makers, max_total).unwrap())
}

fn haps(per_maker: Vec<Vec<HaplotypeCounts>>) -> Vec<MakerInput> {
    per_maker.into_iter().map(MakerInput::Haplotypes).collect()
}

fn assert_clean(report: &SessionReport) {
    assert!(audit_datatrust(&report.transcript, &report.audit_secrets()).is_empty());
    assert_eq!(foreign_types(&report.transcript), 0);
}

fn four_way_split() -> Vec<Vec<HaplotypeCounts>> {
    vec![
        vec![HaplotypeCounts::new(10, 5, 5, 10)],
        vec![HaplotypeCounts::new(10, 5, 5, 5)],
        vec![HaplotypeCounts::new(5, 5, 5, 5)],
        vec![HaplotypeCounts::new(5, 5, 5, 10)],
    ]
}

#[test]
fn protocol1_four_makers() {
    let c = ld(1, 4, 200);
    let inputs = haps(four_way_split());
    assert_eq!(c.oracle(&inputs).unwrap(), BuyerResult::LdDecisions(vec![true]));
    let r = run_protocol1(c, inputs, &SessionConfig::default()).unwrap();
    assert_eq!(r.result(), &BuyerResult::LdDecisions(vec![true]));
    assert_eq!(
        r.transcript.type_sequence(),
        vec![PublicKeyDist, EncryptedListing, EncryptedListing, EncryptedListing, EncryptedListing, Query, ListingBundle, DecryptRequest, Result]
    );
    assert_clean(&r);
}

#[test]
fn protocol1_equilibrium_single_maker() {
    let c = ld(1, 1, 200);
    let r = run_protocol1(c, haps(vec![vec![HaplotypeCounts::new(25, 25, 25, 25)]]), &SessionConfig::default()).unwrap();
    assert_eq!(r.result(), &BuyerResult::LdDecisions(vec![false]));
    assert_clean(&r);
}

#[test]
fn protocol2_four_makers() {
    let c = ld(1, 4, 200);
    let r = run_protocol2(c, haps(four_way_split()), &SessionConfig::default()).unwrap();
    assert_eq!(r.result(), &BuyerResult::LdDecisions(vec![true]));
    assert_eq!(
        r.transcript.type_sequence(),
        vec![
            DeltaKeyDist, DeltaKeyDist, DeltaKeyDist, DeltaKeyDist, InputLabels, InputLabels, InputLabels, InputLabels,
            Query, ListingBundle, Query, GarbledCircuit, OutputLabels, OutputDecoding
        ]
    );
    assert_clean(&r);
}

#[test]
fn protocol2_random_multi_instance_matches_oracle() {
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let counts: Vec<HaplotypeCounts> = (0..25).map(|_| random_counts(&mut rng, 1600)).collect();
    let inputs = haps(split_among_makers(&mut rng, &counts, 3));
    let c = ld(25, 3, 1600);
    let want = c.oracle(&inputs).unwrap();
    let r = run_protocol2(c, inputs, &SessionConfig::default()).unwrap();
    assert_eq!(r.result(), &want);
    assert_clean(&r);
}

#[test]
fn protocol2_lr_rows_match_oracle() {
    let model = bundled_model();
    let table = SigmoidTable::symmetric(model.spec, 10, 8.0).unwrap();
    let samples = bundled_samples();
    let rows: Vec<Vec<i64>> = samples.features[..6].iter().map(|x| quantize_features(model.spec, x)).collect();
    let c: Arc<dyn Computation> = Arc::new(LrComputation::new(model, table, vec![1, 5]).unwrap());
    let inputs = vec![MakerInput::Features(rows[..1].to_vec()), MakerInput::Features(rows[1..].to_vec())];
    let want = c.oracle(&inputs).unwrap();
    let r = run_protocol2(c, inputs, &SessionConfig::default()).unwrap();
    assert_eq!(r.result(), &want);
    assert_clean(&r);
}

#[test]
fn several_buyers_get_fresh_garblings() {
    let c = ld(1, 2, 200);
    let inputs = haps(vec![vec![HaplotypeCounts::new(15, 10, 10, 15)]; 2]);
    let cfg = SessionConfig {
        buyers: 3,
        ..SessionConfig::default()
    };
    let r = run_protocol2(c, inputs, &cfg).unwrap();
    assert_eq!(r.results.len(), 3);
    assert!(r.results.iter().all(|x| x == &BuyerResult::LdDecisions(vec![true])));
    let digests: Vec<_> = r.transcript.entries.iter().filter(|e| e.ty == GarbledCircuit).map(|e| e.digest).collect();
    assert_eq!(digests.len(), 3);
    assert!(digests[0] != digests[1] && digests[1] != digests[2]);
}

#[test]
fn lr_is_not_offered_on_he() {
    let model = bundled_model();
    let table = SigmoidTable::symmetric(model.spec, 8, 8.0).unwrap();
    let c: Arc<dyn Computation> = Arc::new(LrComputation::new(model, table, vec![1]).unwrap());
    let mut reg = Registry::with_backends();
    reg.register_computation(c);
    assert!(matches!(
        reg.check("he", LR_PREDICT, &SessionConfig::default()),
        Err(MarketError::Unsupported { .. })
    ));
    assert!(matches!(reg.check("ot", LR_PREDICT, &SessionConfig::default()), Err(MarketError::UnknownBackend(_))));
    assert!(matches!(reg.check("gc", "sum", &SessionConfig::default()), Err(MarketError::UnknownComputation(_))));
}

#[test]
fn mismatched_inputs_are_rejected_before_running() {
    let c = ld(2, 2, 200);
    let bad = haps(vec![vec![HaplotypeCounts::new(1, 1, 1, 1)]; 2]);
    assert!(run_protocol2(c.clone(), bad, &SessionConfig::default()).is_err());
    let too_big = haps(vec![vec![HaplotypeCounts::new(100, 100, 100, 100); 2]; 2]);
    assert!(matches!(
        run_protocol2(c, too_big, &SessionConfig::default()),
        Err(MarketError::InvalidSession(_))
    ));
}

#[test]
fn he_plan_rejection_surfaces() {
    let c = ld(1, 1, 1600);
    let cfg = SessionConfig {
        he_params: dmsc_bfv::HeParams::n4096(),
        ..SessionConfig::default()
    };
    assert!(matches!(
        run_protocol1(c, haps(vec![vec![HaplotypeCounts::new(5, 5, 5, 5)]]), &cfg),
        Err(MarketError::Analytics(_))
    ));
}
