//! Role state machines. Each consumes messages in arrival order and
//! answers with messages to send; none touches another's state.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use dmsc_bfv::{keygen, Encoding, HeContext, HeParams, PublicKey, RelinKey, SecretKey};
use dmsc_core::Circuit;
use dmsc_garble::{
    decode, evaluate, garble, maker_active_label, maker_wire_message, DecodingInfo, GarbledCircuit, GlobalDelta,
    PrfKey, PrfLabels, WireLabel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::computation::{BuyerResult, Computation, HeProgram, MakerInput};
use crate::error::{MarketError, Result};
use crate::message::{Listing, MessageType, ProtocolMessage};
use crate::role::Role;

pub type Outbox = Vec<(Role, ProtocolMessage)>;

/// What a role reports once the session is over.
#[derive(Debug, Clone, Default)]
pub struct ActorOutcome {
    pub result: Option<BuyerResult>,
    pub timings: Vec<(&'static str, Duration)>,
    /// Secret material this role generated, for transcript audits.
    pub audit_secrets: Vec<Vec<u8>>,
}

pub trait Actor: Send {
    fn role(&self) -> Role;

    /// Messages sent on the role's own initiative.
    fn start(&mut self) -> Result<Outbox> {
        Ok(Vec::new())
    }

    fn handle(&mut self, from: Role, msg: ProtocolMessage) -> Result<Outbox>;

    fn outcome(&mut self) -> ActorOutcome;
}

/// Public session parameters every role knows.
#[derive(Debug, Clone)]
pub struct SessionParams {
    pub session: u64,
    pub seed: u64,
    pub buyers: u32,
    pub computation: Arc<dyn Computation>,
    pub he_params: HeParams,
}

impl SessionParams {
    pub fn makers(&self) -> usize {
        self.computation.makers()
    }

    /// Deterministic per-role randomness.
    pub fn rng_for(&self, role: Role) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed ^ self.session.rotate_left(17));
        let e = role.encode();
        rng.set_stream(u64::from_be_bytes([0, 0, 0, e[0], e[1], e[2], e[3], e[4]]));
        rng
    }
}

fn unexpected(role: Role, msg: &ProtocolMessage) -> MarketError {
    MarketError::UnexpectedMessage {
        role,
        ty: msg.message_type(),
    }
}

fn timed<T>(timings: &mut Vec<(&'static str, Duration)>, name: &'static str, f: impl FnOnce() -> T) -> T {
    let t = Instant::now();
    let out = f();
    timings.push((name, t.elapsed()));
    out
}

fn labels_to_bytes(labels: &[WireLabel]) -> Vec<[u8; 16]> {
    labels.iter().map(|l| l.to_bytes()).collect()
}

fn labels_from_bytes(bytes: &[[u8; 16]]) -> Vec<WireLabel> {
    bytes.iter().map(|&b| WireLabel::from_bytes(b)).collect()
}

/// Stores listings and hands them to buyers. It never interprets them:
/// ciphertexts and active labels pass through as opaque bytes.
pub struct DataTrust {
    makers: usize,
    computation: String,
    kind: Option<MessageType>,
    listings: BTreeMap<u32, Vec<Vec<u8>>>,
    pending: Vec<u32>,
}

impl DataTrust {
    pub fn new(params: &SessionParams) -> Self {
        Self {
            makers: params.makers(),
            computation: params.computation.id().to_string(),
            kind: None,
            listings: BTreeMap::new(),
            pending: Vec::new(),
        }
    }

    fn store(&mut self, ty: MessageType, from: Role, maker: u32, items: Vec<Vec<u8>>) -> Result<()> {
        if from != Role::Maker(maker) || maker as usize >= self.makers {
            return Err(MarketError::InvalidSession(format!("{from} submitted a listing for maker {maker}")));
        }
        if *self.kind.get_or_insert(ty) != ty {
            return Err(MarketError::UnexpectedMessage {
                role: Role::DataTrust,
                ty,
            });
        }
        if self.listings.insert(maker, items).is_some() {
            return Err(MarketError::InvalidSession(format!("maker {maker} listed twice")));
        }
        Ok(())
    }

    fn answer(&mut self) -> Outbox {
        if self.listings.len() < self.makers {
            return Vec::new();
        }
        let bundle = ProtocolMessage::ListingBundle {
            listings: self
                .listings
                .iter()
                .map(|(&maker, items)| Listing {
                    maker,
                    items: items.clone(),
                })
                .collect(),
        };
        self.pending.drain(..).map(|b| (Role::Buyer(b), bundle.clone())).collect()
    }
}

impl Actor for DataTrust {
    fn role(&self) -> Role {
        Role::DataTrust
    }

    fn handle(&mut self, from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        let ty = msg.message_type();
        match msg {
            // Public material is broadcast to everyone; nothing to keep.
            ProtocolMessage::PublicKeyDist { .. } => {}
            ProtocolMessage::EncryptedListing { maker, ciphertexts } => self.store(ty, from, maker, ciphertexts)?,
            ProtocolMessage::InputLabels { maker, labels } => {
                self.store(ty, from, maker, vec![labels.concat()])?;
            }
            ProtocolMessage::Query { buyer, computation } => {
                if from != Role::Buyer(buyer) || computation != self.computation {
                    return Err(MarketError::InvalidSession(format!("bad query from {from} for `{computation}`")));
                }
                self.pending.push(buyer);
            }
            other => return Err(unexpected(Role::DataTrust, &other)),
        }
        Ok(self.answer())
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome::default()
    }
}

// ---------------------------------------------------------------------
// Homomorphic path

pub struct HeCsp {
    params: SessionParams,
    rng: ChaCha20Rng,
    program: Option<Box<dyn HeProgram>>,
    sk: Option<SecretKey>,
    timings: Vec<(&'static str, Duration)>,
    secrets: Vec<Vec<u8>>,
}

impl HeCsp {
    pub fn new(params: SessionParams) -> Self {
        let rng = params.rng_for(Role::Csp);
        Self {
            params,
            rng,
            program: None,
            sk: None,
            timings: Vec::new(),
            secrets: Vec::new(),
        }
    }
}

impl Actor for HeCsp {
    fn role(&self) -> Role {
        Role::Csp
    }

    fn start(&mut self) -> Result<Outbox> {
        let base = HeContext::new(self.params.he_params.clone())?;
        let program = self.params.computation.he_program(&base)?;
        let rng = &mut self.rng;
        let (sk, pk, rk) = timed(&mut self.timings, "keygen", || keygen(&base, rng));
        let sk_bytes = base.secret_key_to_bytes(&sk);
        self.secrets.push(sk_bytes[14..sk_bytes.len().min(46)].to_vec());
        let msg = ProtocolMessage::PublicKeyDist {
            public_key: base.public_key_to_bytes(&pk),
            relin_key: base.relin_key_to_bytes(&rk),
        };
        self.sk = Some(sk);
        self.program = Some(program);
        Ok(vec![(Role::Broadcast, msg)])
    }

    fn handle(&mut self, from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        let ProtocolMessage::DecryptRequest { slots, ciphertexts } = msg else {
            return Err(unexpected(Role::Csp, &msg));
        };
        let (Some(program), Some(sk)) = (&self.program, &self.sk) else {
            return Err(MarketError::InvalidSession("decrypt request before key generation".into()));
        };
        let t = Instant::now();
        let mut values = Vec::with_capacity(ciphertexts.len());
        for bytes in &ciphertexts {
            let ct = program.ciphertext_from_bytes(bytes)?;
            let ctx = program.context_for(ct.param_id())?;
            let pt = ctx.decrypt(sk, &ct)?;
            values.push(match ct.encoding() {
                Encoding::Scalar => vec![pt.constant()],
                Encoding::Batched => {
                    let mut v = ctx.batch_decode(&pt)?;
                    v.truncate(slots as usize);
                    v
                }
            });
        }
        self.timings.push(("decrypt", t.elapsed()));
        Ok(vec![(from, ProtocolMessage::Result { values })])
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            result: None,
            timings: std::mem::take(&mut self.timings),
            audit_secrets: std::mem::take(&mut self.secrets),
        }
    }
}

pub struct HeMaker {
    index: u32,
    params: SessionParams,
    input: MakerInput,
    rng: ChaCha20Rng,
    timings: Vec<(&'static str, Duration)>,
}

impl HeMaker {
    pub fn new(params: SessionParams, index: u32, input: MakerInput) -> Self {
        let rng = params.rng_for(Role::Maker(index));
        Self {
            index,
            params,
            input,
            rng,
            timings: Vec::new(),
        }
    }
}

impl Actor for HeMaker {
    fn role(&self) -> Role {
        Role::Maker(self.index)
    }

    fn handle(&mut self, _from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        let ProtocolMessage::PublicKeyDist { public_key, .. } = msg else {
            return Err(unexpected(self.role(), &msg));
        };
        let base = HeContext::new(self.params.he_params.clone())?;
        let program = self.params.computation.he_program(&base)?;
        let pk: PublicKey = base.public_key_from_bytes(&public_key)?;
        let t = Instant::now();
        let cts = program.encrypt(&pk, &self.input, &mut self.rng)?;
        let ciphertexts = cts
            .iter()
            .map(|c| Ok(program.context_for(c.param_id())?.ciphertext_to_bytes(c)))
            .collect::<Result<_>>()?;
        self.timings.push(("encrypt", t.elapsed()));
        Ok(vec![(
            Role::DataTrust,
            ProtocolMessage::EncryptedListing {
                maker: self.index,
                ciphertexts,
            },
        )])
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            timings: std::mem::take(&mut self.timings),
            ..ActorOutcome::default()
        }
    }
}

pub struct HeBuyer {
    index: u32,
    params: SessionParams,
    program: Option<Box<dyn HeProgram>>,
    rk: Option<RelinKey>,
    result: Option<BuyerResult>,
    timings: Vec<(&'static str, Duration)>,
}

impl HeBuyer {
    pub fn new(params: SessionParams, index: u32) -> Self {
        Self {
            index,
            params,
            program: None,
            rk: None,
            result: None,
            timings: Vec::new(),
        }
    }
}

impl Actor for HeBuyer {
    fn role(&self) -> Role {
        Role::Buyer(self.index)
    }

    fn start(&mut self) -> Result<Outbox> {
        Ok(vec![(
            Role::DataTrust,
            ProtocolMessage::Query {
                buyer: self.index,
                computation: self.params.computation.id().to_string(),
            },
        )])
    }

    fn handle(&mut self, _from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        match msg {
            ProtocolMessage::PublicKeyDist { relin_key, .. } => {
                let base = HeContext::new(self.params.he_params.clone())?;
                self.rk = Some(base.relin_key_from_bytes(&relin_key)?);
                self.program = Some(self.params.computation.he_program(&base)?);
                Ok(Vec::new())
            }
            ProtocolMessage::ListingBundle { listings } => {
                let (Some(program), Some(rk)) = (&self.program, &self.rk) else {
                    return Err(MarketError::InvalidSession("listings arrived before the public key".into()));
                };
                if listings.len() != self.params.makers() {
                    return Err(MarketError::InvalidSession(format!(
                        "bundle holds {} listings for {} makers",
                        listings.len(),
                        self.params.makers()
                    )));
                }
                let cts = listings
                    .iter()
                    .map(|l| l.items.iter().map(|b| program.ciphertext_from_bytes(b)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                let t = Instant::now();
                let out = program.evaluate(rk, cts)?;
                self.timings.push(("evaluate", t.elapsed()));
                let ciphertexts = out
                    .iter()
                    .map(|c| Ok(program.context_for(c.param_id())?.ciphertext_to_bytes(c)))
                    .collect::<Result<_>>()?;
                Ok(vec![(
                    Role::Csp,
                    ProtocolMessage::DecryptRequest {
                        slots: program.slots() as u32,
                        ciphertexts,
                    },
                )])
            }
            ProtocolMessage::Result { values } => {
                let program = self
                    .program
                    .as_ref()
                    .ok_or_else(|| MarketError::InvalidSession("result before the public key".into()))?;
                self.result = Some(program.finish(&values)?);
                Ok(Vec::new())
            }
            other => Err(unexpected(self.role(), &other)),
        }
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            result: self.result.take(),
            timings: std::mem::take(&mut self.timings),
            audit_secrets: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------
// Garbled-circuit path

/// PRF message of every party input wire, in wire order.
fn input_messages(circuit: &Circuit, makers: usize) -> Result<Vec<u128>> {
    let mut messages = vec![0u128; circuit.n_inputs()];
    let mut covered = 0;
    for j in 0..makers {
        let g = circuit.input_group(&format!("maker{j}"))?;
        for (k, w) in g.range().enumerate() {
            messages[w] = maker_wire_message(j as u32, k as u64);
        }
        covered += g.range().len();
    }
    if covered != circuit.n_inputs() {
        return Err(MarketError::InvalidSession("circuit has inputs no maker owns".into()));
    }
    Ok(messages)
}

pub struct GcCsp {
    params: SessionParams,
    rng: ChaCha20Rng,
    delta: GlobalDelta,
    key: PrfKey,
    circuit: Option<Circuit>,
    decoding: BTreeMap<u32, DecodingInfo>,
    timings: Vec<(&'static str, Duration)>,
}

impl GcCsp {
    pub fn new(params: SessionParams) -> Self {
        let mut rng = params.rng_for(Role::Csp);
        let delta = GlobalDelta::random(&mut rng);
        let key = PrfKey::random(&mut rng);
        Self {
            params,
            rng,
            delta,
            key,
            circuit: None,
            decoding: BTreeMap::new(),
            timings: Vec::new(),
        }
    }
}

impl Actor for GcCsp {
    fn role(&self) -> Role {
        Role::Csp
    }

    fn start(&mut self) -> Result<Outbox> {
        let msg = ProtocolMessage::DeltaKeyDist {
            delta: self.delta.to_bytes(),
            key: self.key.to_bytes(),
        };
        Ok((0..self.params.makers() as u32).map(|i| (Role::Maker(i), msg.clone())).collect())
    }

    fn handle(&mut self, from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        let Role::Buyer(b) = from else {
            return Err(unexpected(Role::Csp, &msg));
        };
        match msg {
            ProtocolMessage::Query { computation, .. } => {
                if computation != self.params.computation.id() {
                    return Err(MarketError::UnknownComputation(computation));
                }
                if self.circuit.is_none() {
                    self.circuit = Some(self.params.computation.circuit()?);
                }
                let circuit = self.circuit.as_ref().unwrap();
                let messages = input_messages(circuit, self.params.makers())?;
                let t = Instant::now();
                // A fresh garbling per buyer; input labels stay PRF-bound.
                let mut source = PrfLabels {
                    key: &self.key,
                    messages: &messages,
                    rng: &mut self.rng,
                };
                let g = garble(circuit, self.delta, &mut source)?;
                self.timings.push(("garble", t.elapsed()));
                self.decoding.insert(b, g.decoding);
                Ok(vec![(
                    from,
                    ProtocolMessage::GarbledCircuit {
                        circuit: g.garbled.to_bytes(),
                        constant_labels: labels_to_bytes(&g.constant_labels),
                    },
                )])
            }
            ProtocolMessage::OutputLabels { labels } => {
                let info = self
                    .decoding
                    .remove(&b)
                    .ok_or_else(|| MarketError::InvalidSession(format!("no garbling issued to {from}")))?;
                let bits = decode(&info, &labels_from_bytes(&labels))?;
                Ok(vec![(from, ProtocolMessage::OutputDecoding { bits })])
            }
            other => Err(unexpected(Role::Csp, &other)),
        }
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            result: None,
            timings: std::mem::take(&mut self.timings),
            audit_secrets: vec![self.delta.to_bytes().to_vec(), self.key.to_bytes().to_vec()],
        }
    }
}

pub struct GcMaker {
    index: u32,
    params: SessionParams,
    input: MakerInput,
    timings: Vec<(&'static str, Duration)>,
}

impl GcMaker {
    pub fn new(params: SessionParams, index: u32, input: MakerInput) -> Self {
        Self {
            index,
            params,
            input,
            timings: Vec::new(),
        }
    }
}

impl Actor for GcMaker {
    fn role(&self) -> Role {
        Role::Maker(self.index)
    }

    fn handle(&mut self, _from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        let ProtocolMessage::DeltaKeyDist { delta, key } = msg else {
            return Err(unexpected(self.role(), &msg));
        };
        if delta[0] & 1 != 1 {
            return Err(MarketError::InvalidSession("delta must have its low bit set".into()));
        }
        let delta = GlobalDelta::from_bytes(delta);
        let key = PrfKey::new(key);
        let t = Instant::now();
        let bits = self.params.computation.maker_bits(self.index as usize, &self.input)?;
        let labels: Vec<WireLabel> = bits
            .iter()
            .enumerate()
            .map(|(k, &b)| maker_active_label(&key, delta, maker_wire_message(self.index, k as u64), b))
            .collect();
        self.timings.push(("labels", t.elapsed()));
        Ok(vec![(
            Role::DataTrust,
            ProtocolMessage::InputLabels {
                maker: self.index,
                labels: labels_to_bytes(&labels),
            },
        )])
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            timings: std::mem::take(&mut self.timings),
            ..ActorOutcome::default()
        }
    }
}

pub struct GcBuyer {
    index: u32,
    params: SessionParams,
    circuit: Option<Circuit>,
    inputs: Option<Vec<WireLabel>>,
    result: Option<BuyerResult>,
    timings: Vec<(&'static str, Duration)>,
}

impl GcBuyer {
    pub fn new(params: SessionParams, index: u32) -> Self {
        Self {
            index,
            params,
            circuit: None,
            inputs: None,
            result: None,
            timings: Vec::new(),
        }
    }

    fn query(&self) -> ProtocolMessage {
        ProtocolMessage::Query {
            buyer: self.index,
            computation: self.params.computation.id().to_string(),
        }
    }
}

impl Actor for GcBuyer {
    fn role(&self) -> Role {
        Role::Buyer(self.index)
    }

    fn start(&mut self) -> Result<Outbox> {
        Ok(vec![(Role::DataTrust, self.query())])
    }

    fn handle(&mut self, _from: Role, msg: ProtocolMessage) -> Result<Outbox> {
        match msg {
            ProtocolMessage::ListingBundle { listings } => {
                let circuit = self.params.computation.circuit()?;
                let mut labels = Vec::with_capacity(circuit.n_inputs());
                for (j, l) in listings.iter().enumerate() {
                    let want = circuit.input_group(&format!("maker{j}"))?.range().len();
                    let blob: &[u8] = match l.items.as_slice() {
                        [b] if l.maker as usize == j => b,
                        _ => return Err(MarketError::InvalidSession(format!("bad listing for maker {j}"))),
                    };
                    if blob.len() != 16 * want {
                        return Err(MarketError::InvalidSession(format!(
                            "maker {j} supplied {} label bytes, circuit needs {}",
                            blob.len(),
                            16 * want
                        )));
                    }
                    labels.extend(blob.chunks_exact(16).map(|c| WireLabel::from_bytes(c.try_into().unwrap())));
                }
                if labels.len() != circuit.n_inputs() {
                    return Err(MarketError::InvalidSession("bundle does not cover every input wire".into()));
                }
                self.circuit = Some(circuit);
                self.inputs = Some(labels);
                Ok(vec![(Role::Csp, self.query())])
            }
            ProtocolMessage::GarbledCircuit { circuit, constant_labels } => {
                let (Some(c), Some(inputs)) = (&self.circuit, self.inputs.take()) else {
                    return Err(unexpected(self.role(), &ProtocolMessage::GarbledCircuit { circuit, constant_labels }));
                };
                let garbled = GarbledCircuit::from_bytes(&circuit)?;
                let mut active = inputs;
                active.extend(labels_from_bytes(&constant_labels));
                let t = Instant::now();
                let out = evaluate(&garbled, c, &active)?;
                self.timings.push(("evaluate", t.elapsed()));
                Ok(vec![(
                    Role::Csp,
                    ProtocolMessage::OutputLabels {
                        labels: labels_to_bytes(&out),
                    },
                )])
            }
            ProtocolMessage::OutputDecoding { bits } => {
                self.result = Some(self.params.computation.decode_output(&bits)?);
                Ok(Vec::new())
            }
            other => Err(unexpected(self.role(), &other)),
        }
    }

    fn outcome(&mut self) -> ActorOutcome {
        ActorOutcome {
            result: self.result.take(),
            timings: std::mem::take(&mut self.timings),
            audit_secrets: Vec::new(),
        }
    }
}
