//! Session driver. Frames are relayed in FIFO order, so the choreography
//! and transcript are the same on every transport.
//!
//! A session runs in two phases: the CSP starts the listing phase, then
//! each buyer in turn starts its query phase once the network is quiet.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;
use std::time::{Duration, Instant};

use dmsc_bfv::HeParams;

use crate::actor::{
    Actor, ActorOutcome, DataTrust, GcBuyer, GcCsp, GcMaker, HeBuyer, HeCsp, HeMaker, SessionParams,
};
use crate::computation::{BuyerResult, Computation, MakerInput};
use crate::error::{MarketError, Result};
use crate::frame::Frame;
use crate::role::Role;
use crate::transcript::Transcript;
use crate::transport::{InProcNetwork, Network, Node, TcpNetwork};

/// Upper bound on relayed frames per session.
pub const MAX_FRAMES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransportKind {
    #[default]
    InProc,
    Tcp,
}

impl std::str::FromStr for TransportKind {
    type Err = MarketError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inproc" => Ok(TransportKind::InProc),
            "tcp" => Ok(TransportKind::Tcp),
            _ => Err(MarketError::InvalidSession(format!("unknown transport `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub session: u64,
    pub seed: u64,
    pub buyers: u32,
    pub transport: TransportKind,
    pub he_params: HeParams,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            session: 1,
            seed: 0,
            buyers: 1,
            transport: TransportKind::InProc,
            he_params: HeParams::n8192(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SessionReport {
    /// One result per buyer, in buyer order.
    pub results: Vec<BuyerResult>,
    pub transcript: Transcript,
    pub outcomes: BTreeMap<Role, ActorOutcome>,
    pub wall: Duration,
}

impl SessionReport {
    pub fn result(&self) -> &BuyerResult {
        &self.results[0]
    }

    /// Sum of one timing label over all roles.
    pub fn timing(&self, name: &str) -> Duration {
        self.outcomes
            .values()
            .flat_map(|o| &o.timings)
            .filter(|(n, _)| *n == name)
            .map(|(_, d)| *d)
            .sum()
    }

    /// Secrets the roles reported for auditing.
    pub fn audit_secrets(&self) -> Vec<Vec<u8>> {
        self.outcomes.values().flat_map(|o| o.audit_secrets.clone()).collect()
    }
}

fn roles(makers: usize, buyers: u32) -> Vec<Role> {
    let mut r = vec![Role::Csp, Role::DataTrust];
    r.extend((0..makers as u32).map(Role::Maker));
    r.extend((0..buyers).map(Role::Buyer));
    r
}

/// Runs both phases over `net`, recording every frame.
pub fn relay(net: &mut dyn Network, session: u64, roles: &[Role], buyers: u32) -> Result<Transcript> {
    let t0 = Instant::now();
    let mut transcript = Transcript::new(session);
    let mut sent = 0usize;
    let initiators = std::iter::once(Role::Csp).chain((0..buyers).map(Role::Buyer));
    for initiator in initiators {
        let mut queue: VecDeque<Vec<u8>> = net.start(initiator)?.into();
        while let Some(frame) = queue.pop_front() {
            sent += 1;
            if sent > MAX_FRAMES {
                return Err(MarketError::InvalidSession("frame limit exceeded".into()));
            }
            let (ty, from, to) = Frame::peek_route(&frame)?;
            transcript.record(&frame, ty, from, to, t0.elapsed());
            let targets: Vec<Role> = if to == Role::Broadcast {
                roles.iter().copied().filter(|&r| r != from).collect()
            } else {
                vec![to]
            };
            for r in targets {
                queue.extend(net.deliver(r, &frame)?);
            }
        }
    }
    Ok(transcript)
}

fn run_nodes(cfg: &SessionConfig, computation: &dyn Computation, nodes: Vec<Node>) -> Result<SessionReport> {
    let all = roles(computation.makers(), cfg.buyers);
    let start = Instant::now();
    let mut net: Box<dyn Network> = match cfg.transport {
        TransportKind::InProc => Box::new(InProcNetwork::new(nodes)),
        TransportKind::Tcp => Box::new(TcpNetwork::spawn(nodes)?),
    };
    let transcript = relay(net.as_mut(), cfg.session, &all, cfg.buyers)?;
    let mut outcomes = net.finish()?;
    let wall = start.elapsed();
    let results = (0..cfg.buyers)
        .map(|b| {
            outcomes
                .get_mut(&Role::Buyer(b))
                .and_then(|o| o.result.clone())
                .ok_or(MarketError::NoResult(Role::Buyer(b)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SessionReport {
        results,
        transcript,
        outcomes,
        wall,
    })
}

fn prepare(
    computation: &Arc<dyn Computation>,
    inputs: &[MakerInput],
    cfg: &SessionConfig,
) -> Result<SessionParams> {
    if inputs.is_empty() {
        return Err(MarketError::InvalidSession("at least one maker is required".into()));
    }
    if cfg.buyers == 0 {
        return Err(MarketError::InvalidSession("at least one buyer is required".into()));
    }
    computation.check_inputs(inputs)?;
    Ok(SessionParams {
        session: cfg.session,
        seed: cfg.seed,
        buyers: cfg.buyers,
        computation: computation.clone(),
        he_params: cfg.he_params.clone(),
    })
}

fn node(params: &SessionParams, actor: impl Actor + 'static) -> Node {
    Node::new(params.session, Box::new(actor))
}

/// Homomorphic protocol: the CSP publishes keys, makers submit encrypted
/// listings to the data trust, each buyer fetches them, evaluates `f'`
/// and has the CSP decrypt the result.
pub fn run_protocol1(
    computation: Arc<dyn Computation>,
    inputs: Vec<MakerInput>,
    cfg: &SessionConfig,
) -> Result<SessionReport> {
    let params = prepare(&computation, &inputs, cfg)?;
    // Reject an unworkable plan before any role starts.
    let base = dmsc_bfv::HeContext::new(cfg.he_params.clone())?;
    computation.he_program(&base)?;
    let mut nodes = vec![node(&params, HeCsp::new(params.clone())), node(&params, DataTrust::new(&params))];
    for (i, input) in inputs.into_iter().enumerate() {
        nodes.push(node(&params, HeMaker::new(params.clone(), i as u32, input)));
    }
    for b in 0..cfg.buyers {
        nodes.push(node(&params, HeBuyer::new(params.clone(), b)));
    }
    run_nodes(cfg, computation.as_ref(), nodes)
}

/// Garbled-circuit protocol without oblivious transfer: makers derive
/// their own active labels from the CSP's PRF key and delta.
pub fn run_protocol2(
    computation: Arc<dyn Computation>,
    inputs: Vec<MakerInput>,
    cfg: &SessionConfig,
) -> Result<SessionReport> {
    let params = prepare(&computation, &inputs, cfg)?;
    computation.circuit()?;
    let mut nodes = vec![node(&params, GcCsp::new(params.clone())), node(&params, DataTrust::new(&params))];
    for (i, input) in inputs.into_iter().enumerate() {
        nodes.push(node(&params, GcMaker::new(params.clone(), i as u32, input)));
    }
    for b in 0..cfg.buyers {
        nodes.push(node(&params, GcBuyer::new(params.clone(), b)));
    }
    run_nodes(cfg, computation.as_ref(), nodes)
}
