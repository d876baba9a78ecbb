//! Data-market roles (CSP, data trust, makers, buyers), the homomorphic
//! and garbled-circuit protocols, framing and transports.

pub mod actor;
pub mod computation;
pub mod error;
pub mod frame;
pub mod hygiene;
pub mod message;
pub mod registry;
pub mod role;
pub mod session;
pub mod transcript;
pub mod transport;

pub use actor::{Actor, ActorOutcome, SessionParams};
pub use computation::{BuyerResult, Computation, HeProgram, LdComputation, LrComputation, MakerInput, LD_TEST, LR_PREDICT};
pub use error::{MarketError, Result};
pub use frame::{Endpoint, Frame};
pub use message::{Listing, MessageType, ProtocolMessage};
pub use registry::{Backend, GcBackend, HeBackend, Registry};
pub use role::Role;
pub use session::{run_protocol1, run_protocol2, SessionConfig, SessionReport, TransportKind};
pub use transcript::{Transcript, TranscriptEntry};
pub use transport::{transport_connect, transport_serve, InProcNetwork, Network, Node, TcpNetwork};
