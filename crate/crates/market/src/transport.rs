//! Nodes and networks. A node is one role's endpoint plus its state
//! machine; a network moves encoded frames to nodes, either in memory or
//! over TCP.

use std::collections::BTreeMap;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread::JoinHandle;

use crate::actor::{Actor, ActorOutcome};
use crate::error::{MarketError, Result};
use crate::frame::{io_err, read_frame_bytes, write_frame_bytes, Endpoint};
use crate::role::Role;

pub struct Node {
    endpoint: Endpoint,
    actor: Box<dyn Actor>,
}

impl Node {
    pub fn new(session: u64, actor: Box<dyn Actor>) -> Self {
        Self {
            endpoint: Endpoint::new(actor.role(), session),
            actor,
        }
    }

    pub fn role(&self) -> Role {
        self.actor.role()
    }

    fn seal_all(&mut self, out: Vec<(Role, crate::message::ProtocolMessage)>) -> Result<Vec<Vec<u8>>> {
        out.into_iter()
            .map(|(to, m)| Ok(self.endpoint.seal(to, &m)?.encode()))
            .collect()
    }

    pub fn start(&mut self) -> Result<Vec<Vec<u8>>> {
        let out = self.actor.start()?;
        self.seal_all(out)
    }

    pub fn on_frame(&mut self, bytes: &[u8]) -> Result<Vec<Vec<u8>>> {
        let (from, msg) = self.endpoint.open(bytes)?;
        let out = self.actor.handle(from, msg)?;
        self.seal_all(out)
    }

    pub fn finish(mut self) -> ActorOutcome {
        self.actor.outcome()
    }
}

pub trait Network {
    /// Lets `role` act on its own initiative.
    fn start(&mut self, role: Role) -> Result<Vec<Vec<u8>>>;

    /// Hands one encoded frame to `role`; returns the frames it sends.
    fn deliver(&mut self, role: Role, frame: &[u8]) -> Result<Vec<Vec<u8>>>;

    /// Ends the session and collects every role's outcome.
    fn finish(self: Box<Self>) -> Result<BTreeMap<Role, ActorOutcome>>;
}

/// All nodes in this process.
pub struct InProcNetwork {
    nodes: BTreeMap<Role, Node>,
}

impl InProcNetwork {
    pub fn new(nodes: Vec<Node>) -> Self {
        Self {
            nodes: nodes.into_iter().map(|n| (n.role(), n)).collect(),
        }
    }

    fn node(&mut self, role: Role) -> Result<&mut Node> {
        self.nodes
            .get_mut(&role)
            .ok_or_else(|| MarketError::InvalidSession(format!("no node for {role}")))
    }
}

impl Network for InProcNetwork {
    fn start(&mut self, role: Role) -> Result<Vec<Vec<u8>>> {
        self.node(role)?.start()
    }

    fn deliver(&mut self, role: Role, frame: &[u8]) -> Result<Vec<Vec<u8>>> {
        self.node(role)?.on_frame(frame)
    }

    fn finish(self: Box<Self>) -> Result<BTreeMap<Role, ActorOutcome>> {
        Ok(self.nodes.into_iter().map(|(r, n)| (r, n.finish())).collect())
    }
}

const OP_START: u8 = 1;
const OP_DELIVER: u8 = 2;
const REPLY_OK: u8 = 0;
const REPLY_ERR: u8 = 1;

/// Serves `node` on a loopback port. The peer sends requests (start, or
/// deliver followed by one frame) and gets back the frames the node emits.
/// The thread ends when the peer closes the connection between requests;
/// a connection lost mid-request aborts the node with an error.
pub fn transport_serve(node: Node, addr: &str) -> Result<(SocketAddr, JoinHandle<Result<ActorOutcome>>)> {
    let listener = TcpListener::bind(addr)?;
    let local = listener.local_addr()?;
    let handle = std::thread::Builder::new()
        .name(format!("dmsc-{}", node.role()))
        .spawn(move || serve(node, listener))?;
    Ok((local, handle))
}

fn serve(mut node: Node, listener: TcpListener) -> Result<ActorOutcome> {
    let (stream, _) = listener.accept()?;
    stream.set_nodelay(true)?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut writer = BufWriter::new(stream);
    loop {
        let mut op = [0u8; 1];
        match reader.read(&mut op) {
            Ok(0) => return Ok(node.finish()),
            Ok(_) => {}
            Err(e) => return Err(io_err(e)),
        }
        let out = match op[0] {
            OP_START => node.start(),
            OP_DELIVER => match read_frame_bytes(&mut reader)? {
                Some(f) => node.on_frame(&f),
                None => Err(MarketError::ConnectionLost("stream ended before the frame".into())),
            },
            other => Err(MarketError::Malformed(format!("unknown request {other}"))),
        };
        match out {
            Ok(frames) => {
                writer.write_all(&[REPLY_OK]).map_err(io_err)?;
                writer.write_all(&(frames.len() as u32).to_be_bytes()).map_err(io_err)?;
                for f in &frames {
                    write_frame_bytes(&mut writer, f)?;
                }
                writer.flush().map_err(io_err)?;
            }
            Err(e) => {
                let msg = e.to_string();
                let _ = writer.write_all(&[REPLY_ERR]);
                let _ = writer.write_all(&(msg.len() as u32).to_be_bytes());
                let _ = writer.write_all(msg.as_bytes());
                let _ = writer.flush();
                return Err(e);
            }
        }
    }
}

pub fn transport_connect(addr: SocketAddr) -> Result<TcpStream> {
    let s = TcpStream::connect(addr)?;
    s.set_nodelay(true)?;
    Ok(s)
}

struct Peer {
    reader: BufReader<TcpStream>,
    writer: BufWriter<TcpStream>,
    handle: JoinHandle<Result<ActorOutcome>>,
}

/// Every node behind its own loopback socket and thread.
pub struct TcpNetwork {
    peers: BTreeMap<Role, Peer>,
}

impl TcpNetwork {
    pub fn spawn(nodes: Vec<Node>) -> Result<Self> {
        let mut peers = BTreeMap::new();
        for node in nodes {
            let role = node.role();
            let (addr, handle) = transport_serve(node, "127.0.0.1:0")?;
            let stream = transport_connect(addr)?;
            peers.insert(
                role,
                Peer {
                    reader: BufReader::new(stream.try_clone()?),
                    writer: BufWriter::new(stream),
                    handle,
                },
            );
        }
        Ok(Self { peers })
    }

    /// Raw access to a role's connection, for fault injection.
    pub fn raw_stream(&mut self, role: Role) -> Option<&mut BufWriter<TcpStream>> {
        self.peers.get_mut(&role).map(|p| &mut p.writer)
    }

    fn request(&mut self, role: Role, op: u8, frame: Option<&[u8]>) -> Result<Vec<Vec<u8>>> {
        let peer = self
            .peers
            .get_mut(&role)
            .ok_or_else(|| MarketError::InvalidSession(format!("no node for {role}")))?;
        peer.writer.write_all(&[op]).map_err(io_err)?;
        if let Some(f) = frame {
            write_frame_bytes(&mut peer.writer, f)?;
        }
        peer.writer.flush().map_err(io_err)?;
        read_reply(&mut peer.reader, role)
    }
}

fn read_reply<R: Read>(r: &mut R, role: Role) -> Result<Vec<Vec<u8>>> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head).map_err(io_err)?;
    let n = u32::from_be_bytes(head[1..].try_into().unwrap()) as usize;
    match head[0] {
        REPLY_OK => (0..n)
            .map(|_| read_frame_bytes(r)?.ok_or_else(|| MarketError::ConnectionLost(format!("{role} closed mid-reply"))))
            .collect(),
        REPLY_ERR => {
            let mut msg = vec![0u8; n.min(1 << 16)];
            r.read_exact(&mut msg).map_err(io_err)?;
            Err(MarketError::RemoteAbort {
                role,
                message: String::from_utf8_lossy(&msg).into_owned(),
            })
        }
        b => Err(MarketError::Malformed(format!("bad reply tag {b} from {role}"))),
    }
}

impl Network for TcpNetwork {
    fn start(&mut self, role: Role) -> Result<Vec<Vec<u8>>> {
        self.request(role, OP_START, None)
    }

    fn deliver(&mut self, role: Role, frame: &[u8]) -> Result<Vec<Vec<u8>>> {
        self.request(role, OP_DELIVER, Some(frame))
    }

    fn finish(self: Box<Self>) -> Result<BTreeMap<Role, ActorOutcome>> {
        let mut out = BTreeMap::new();
        let mut first_err = None;
        for (role, peer) in self.peers {
            let Peer { reader, writer, handle } = peer;
            drop(reader);
            if let Ok(s) = writer.into_inner() {
                let _ = s.shutdown(std::net::Shutdown::Both);
            }
            match handle.join() {
                Ok(Ok(o)) => {
                    out.insert(role, o);
                }
                Ok(Err(e)) => {
                    first_err.get_or_insert(e);
                }
                Err(_) => {
                    first_err.get_or_insert(MarketError::ConnectionLost(format!("{role} thread panicked")));
                }
            }
        }
        match first_err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}
