use std::io::Write;
use std::sync::Arc;

use dmsc_analytics::io::{bundled_model, bundled_samples};
use dmsc_analytics::{quantize_features, HaplotypeCounts, SigmoidTable};
use dmsc_market::actor::DataTrust;
use dmsc_market::frame::{read_frame_bytes, HEADER_LEN};
use dmsc_market::hygiene::datatrust_schema_violations;
use dmsc_market::session::relay;
use dmsc_market::*;
use proptest::prelude::*;

fn ld_case() -> (Arc<dyn Computation>, Vec<MakerInput>) {
    let c: Arc<dyn Computation> = Arc::new(LdComputation::new(2, 2, 200).unwrap());
    let inputs = vec![
        MakerInput::Haplotypes(vec![HaplotypeCounts::new(20, 5, 5, 20), HaplotypeCounts::new(10, 10, 10, 10)]),
        MakerInput::Haplotypes(vec![HaplotypeCounts::new(10, 10, 5, 20), HaplotypeCounts::new(10, 10, 10, 10)]),
    ];
    (c, inputs)
}

fn lr_case() -> (Arc<dyn Computation>, Vec<MakerInput>) {
    let model = bundled_model();
    let table = SigmoidTable::symmetric(model.spec, 8, 8.0).unwrap();
    let rows: Vec<Vec<i64>> = bundled_samples().features[..2].iter().map(|x| quantize_features(model.spec, x)).collect();
    let c: Arc<dyn Computation> = Arc::new(LrComputation::new(model, table, vec![2]).unwrap());
    (c, vec![MakerInput::Features(rows)])
}

fn both(transport: TransportKind) -> SessionConfig {
    SessionConfig {
        transport,
        seed: 77,
        ..SessionConfig::default()
    }
}

#[test]
fn tcp_matches_inproc_for_both_protocols_and_workloads() {
    let cases = [("p1-ld", ld_case(), true), ("p2-ld", ld_case(), false), ("p2-lr", lr_case(), false)];
    for (name, (c, inputs), he) in cases {
        let run = |t| {
            if he {
                run_protocol1(c.clone(), inputs.clone(), &both(t)).unwrap()
            } else {
                run_protocol2(c.clone(), inputs.clone(), &both(t)).unwrap()
            }
        };
        let a = run(TransportKind::InProc);
        let b = run(TransportKind::Tcp);
        assert_eq!(a.results, b.results, "{name}");
        assert_eq!(a.transcript.type_sequence(), b.transcript.type_sequence(), "{name}");
        assert!(a.transcript.same_traffic(&b.transcript), "{name}: payload bytes differ");
    }
}

#[test]
fn same_seed_same_bytes_different_seed_different_bytes() {
    let (c, inputs) = ld_case();
    let a = run_protocol2(c.clone(), inputs.clone(), &both(TransportKind::InProc)).unwrap();
    let b = run_protocol2(c.clone(), inputs.clone(), &both(TransportKind::InProc)).unwrap();
    assert!(a.transcript.same_traffic(&b.transcript));
    let cfg = SessionConfig {
        seed: 78,
        ..both(TransportKind::InProc)
    };
    let d = run_protocol2(c, inputs, &cfg).unwrap();
    assert!(!a.transcript.same_traffic(&d.transcript));
    assert_eq!(a.results, d.results);
}

#[test]
fn transcript_lines_replay_communication_totals() {
    let (c, inputs) = ld_case();
    let r = run_protocol2(c, inputs, &SessionConfig::default()).unwrap();
    let back = Transcript::from_lines(&r.transcript.to_lines()).unwrap();
    assert_eq!(back.total_bytes(), r.transcript.total_bytes());
    assert!(back.same_traffic(&r.transcript));
    let gc = r.transcript.bytes_of(&[MessageType::GarbledCircuit, MessageType::InputLabels]);
    assert_eq!(back.bytes_of(&[MessageType::GarbledCircuit, MessageType::InputLabels]), gc);
}

fn query(session: u64) -> (Endpoint, Endpoint) {
    (Endpoint::new(Role::Buyer(0), session), Endpoint::new(Role::DataTrust, session))
}

fn q() -> ProtocolMessage {
    ProtocolMessage::Query {
        buyer: 0,
        computation: "ld-test".into(),
    }
}

#[test]
fn thousand_messages_keep_strictly_increasing_sequence() {
    let (mut tx, mut rx) = query(5);
    let mut last = None;
    for _ in 0..1000 {
        let f = tx.seal(Role::DataTrust, &q()).unwrap();
        if let Some(l) = last {
            assert!(f.seq > l);
        }
        last = Some(f.seq);
        rx.open(&f.encode()).unwrap();
    }
    assert_eq!(last, Some(999));
}

#[test]
fn wrong_session_and_reordering_are_rejected() {
    let (mut tx, mut rx) = query(5);
    let mut other = Endpoint::new(Role::Buyer(0), 6);
    let foreign = other.seal(Role::DataTrust, &q()).unwrap().encode();
    assert!(matches!(rx.open(&foreign), Err(MarketError::WrongSession { expected: 5, got: 6 })));
    let f0 = tx.seal(Role::DataTrust, &q()).unwrap().encode();
    let f1 = tx.seal(Role::DataTrust, &q()).unwrap().encode();
    assert!(matches!(rx.open(&f1), Err(MarketError::OutOfOrder { expected: 0, got: 1, .. })));
    rx.open(&f0).unwrap();
    rx.open(&f1).unwrap();
    assert!(matches!(rx.open(&f1), Err(MarketError::OutOfOrder { expected: 2, got: 1, .. })));
}

#[test]
fn forbidden_routes_are_refused_on_both_ends() {
    let mut csp = Endpoint::new(Role::Csp, 1);
    let secret = ProtocolMessage::DeltaKeyDist {
        delta: [1; 16],
        key: [2; 16],
    };
    assert!(matches!(csp.seal(Role::DataTrust, &secret), Err(MarketError::ForbiddenRoute { .. })));
    let plaintext = ProtocolMessage::Result { values: vec![vec![1]] };
    assert!(csp.seal(Role::DataTrust, &plaintext).is_err());
    // A hand-built frame that bypasses the sender check is refused too.
    let f = Frame {
        ty: MessageType::DeltaKeyDist,
        session: 1,
        seq: 0,
        from: Role::Csp,
        to: Role::DataTrust,
        payload: secret.encode_payload(),
    };
    let mut dt = Endpoint::new(Role::DataTrust, 1);
    assert!(matches!(dt.open(&f.encode()), Err(MarketError::ForbiddenRoute { .. })));
    assert!(datatrust_schema_violations().is_empty());
}

#[test]
fn truncated_frames_are_rejected() {
    let (mut tx, mut rx) = query(3);
    let full = tx.seal(Role::DataTrust, &q()).unwrap().encode();
    for cut in [0, 3, 4, 4 + HEADER_LEN - 1, full.len() - 1] {
        assert!(rx.open(&full[..cut]).is_err(), "cut at {cut}");
        let mut r = &full[..cut];
        assert!(cut == 0 && read_frame_bytes(&mut r).unwrap().is_none() || read_frame_bytes(&mut r).is_err());
    }
    rx.open(&full).unwrap();
}

#[test]
fn truncated_frame_over_tcp_aborts_the_session() {
    let (c, _) = ld_case();
    let params = SessionParams {
        session: 9,
        seed: 0,
        buyers: 1,
        computation: c,
        he_params: dmsc_bfv::HeParams::n4096(),
    };
    let node = Node::new(9, Box::new(DataTrust::new(&params)));
    let mut net = TcpNetwork::spawn(vec![node]).unwrap();
    let mut buyer = Endpoint::new(Role::Buyer(0), 9);
    let frame = buyer.seal(Role::DataTrust, &q()).unwrap().encode();
    let w = net.raw_stream(Role::DataTrust).unwrap();
    w.write_all(&[2]).unwrap();
    w.write_all(&frame[..frame.len() / 2]).unwrap();
    w.flush().unwrap();
    w.get_ref().shutdown(std::net::Shutdown::Write).unwrap();
    let err = Box::new(net).finish().unwrap_err();
    assert!(matches!(err, MarketError::ConnectionLost(_)), "{err}");
}

#[test]
fn remote_failure_aborts_without_result() {
    // A maker whose input does not match the public layout fails inside its
    // own thread; the session reports the abort and yields no result.
    let (c, _) = ld_case();
    let params = SessionParams {
        session: 4,
        seed: 0,
        buyers: 1,
        computation: c,
        he_params: dmsc_bfv::HeParams::n4096(),
    };
    let bad = MakerInput::Haplotypes(vec![HaplotypeCounts::new(1, 1, 1, 1)]);
    let nodes = vec![
        Node::new(4, Box::new(dmsc_market::actor::GcCsp::new(params.clone()))),
        Node::new(4, Box::new(DataTrust::new(&params))),
        Node::new(4, Box::new(dmsc_market::actor::GcMaker::new(params.clone(), 0, bad.clone()))),
        Node::new(4, Box::new(dmsc_market::actor::GcMaker::new(params.clone(), 1, bad))),
        Node::new(4, Box::new(dmsc_market::actor::GcBuyer::new(params.clone(), 0))),
    ];
    let roles: Vec<Role> = nodes.iter().map(Node::role).collect();
    let mut net = TcpNetwork::spawn(nodes).unwrap();
    let err = relay(&mut net, 4, &roles, 1).unwrap_err();
    assert!(matches!(err, MarketError::RemoteAbort { role: Role::Maker(0), .. }), "{err}");
}

fn arb_role() -> impl Strategy<Value = Role> {
    prop_oneof![
        Just(Role::Csp),
        Just(Role::DataTrust),
        any::<u32>().prop_map(Role::Maker),
        any::<u32>().prop_map(Role::Buyer),
        Just(Role::Broadcast),
    ]
}

proptest! {
    #[test]
    fn frames_round_trip(ty in 1u8..=11, session: u64, seq: u64, from in arb_role(), to in arb_role(),
                         payload in proptest::collection::vec(any::<u8>(), 0..200)) {
        let f = Frame { ty: MessageType::from_code(ty).unwrap(), session, seq, from, to, payload };
        let bytes = f.encode();
        prop_assert_eq!(u32::from_be_bytes(bytes[..4].try_into().unwrap()) as usize, bytes.len() - 4);
        prop_assert_eq!(Frame::decode(&bytes).unwrap(), f);
    }

    #[test]
    fn messages_round_trip(labels in proptest::collection::vec(any::<[u8; 16]>(), 0..20),
                           bits in proptest::collection::vec(any::<bool>(), 0..70),
                           values in proptest::collection::vec(proptest::collection::vec(any::<u64>(), 0..5), 0..4),
                           blobs in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..40), 0..4),
                           maker: u32) {
        let msgs = vec![
            ProtocolMessage::PublicKeyDist { public_key: blobs.concat(), relin_key: vec![1, 2] },
            ProtocolMessage::EncryptedListing { maker, ciphertexts: blobs.clone() },
            ProtocolMessage::Query { buyer: maker, computation: "lr-predict".into() },
            ProtocolMessage::ListingBundle { listings: vec![Listing { maker, items: blobs.clone() }, Listing { maker: 0, items: vec![] }] },
            ProtocolMessage::DecryptRequest { slots: maker, ciphertexts: blobs.clone() },
            ProtocolMessage::Result { values: values.clone() },
            ProtocolMessage::DeltaKeyDist { delta: [3; 16], key: [4; 16] },
            ProtocolMessage::InputLabels { maker, labels: labels.clone() },
            ProtocolMessage::GarbledCircuit { circuit: blobs.concat(), constant_labels: labels.clone() },
            ProtocolMessage::OutputLabels { labels: labels.clone() },
            ProtocolMessage::OutputDecoding { bits: bits.clone() },
        ];
        for m in msgs {
            let p = m.encode_payload();
            prop_assert_eq!(&ProtocolMessage::decode_payload(m.message_type(), &p).unwrap(), &m);
            if !p.is_empty() {
                prop_assert!(ProtocolMessage::decode_payload(m.message_type(), &p[..p.len() - 1]).is_err());
            }
        }
    }
}

#[test]
fn unknown_type_codes_are_rejected() {
    for c in [0u8, 12, 200, 255] {
        assert!(MessageType::from_code(c).is_err());
    }
}
