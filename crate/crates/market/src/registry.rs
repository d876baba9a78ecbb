//! Name-keyed strategy registry: backends (`gc`, `he`) and computations
//! (`ld-test`, `lr-predict`) are looked up at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use dmsc_bfv::HeContext;

use crate::computation::{Computation, MakerInput};
use crate::error::{MarketError, Result};
use crate::session::{run_protocol1, run_protocol2, SessionConfig, SessionReport};

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;

    /// Configuration check that runs before any role starts.
    fn check(&self, computation: &dyn Computation, cfg: &SessionConfig) -> Result<()>;

    fn run(&self, computation: Arc<dyn Computation>, inputs: Vec<MakerInput>, cfg: &SessionConfig) -> Result<SessionReport>;
}

/// Garbled circuits with PRF-derived input labels.
#[derive(Debug, Default)]
pub struct GcBackend;

impl Backend for GcBackend {
    fn name(&self) -> &str {
        "gc"
    }

    fn check(&self, computation: &dyn Computation, _cfg: &SessionConfig) -> Result<()> {
        computation.circuit().map(drop)
    }

    fn run(&self, computation: Arc<dyn Computation>, inputs: Vec<MakerInput>, cfg: &SessionConfig) -> Result<SessionReport> {
        run_protocol2(computation, inputs, cfg)
    }
}

/// BFV homomorphic encryption.
#[derive(Debug, Default)]
pub struct HeBackend;

impl Backend for HeBackend {
    fn name(&self) -> &str {
        "he"
    }

    fn check(&self, computation: &dyn Computation, cfg: &SessionConfig) -> Result<()> {
        let base = HeContext::new(cfg.he_params.clone())?;
        computation.he_program(&base).map(drop)
    }

    fn run(&self, computation: Arc<dyn Computation>, inputs: Vec<MakerInput>, cfg: &SessionConfig) -> Result<SessionReport> {
        run_protocol1(computation, inputs, cfg)
    }
}

#[derive(Default)]
pub struct Registry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
    computations: BTreeMap<String, Arc<dyn Computation>>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry with the `gc` and `he` backends.
    pub fn with_backends() -> Self {
        let mut r = Self::new();
        r.register_backend(Arc::new(GcBackend));
        r.register_backend(Arc::new(HeBackend));
        r
    }

    pub fn register_backend(&mut self, b: Arc<dyn Backend>) {
        self.backends.insert(b.name().to_string(), b);
    }

    pub fn register_computation(&mut self, c: Arc<dyn Computation>) {
        self.computations.insert(c.id().to_string(), c);
    }

    pub fn backend_names(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }

    pub fn computation_ids(&self) -> Vec<&str> {
        self.computations.keys().map(String::as_str).collect()
    }

    pub fn backend(&self, name: &str) -> Result<Arc<dyn Backend>> {
        self.backends
            .get(name)
            .cloned()
            .ok_or_else(|| MarketError::UnknownBackend(name.to_string()))
    }

    pub fn computation(&self, id: &str) -> Result<Arc<dyn Computation>> {
        self.computations
            .get(id)
            .cloned()
            .ok_or_else(|| MarketError::UnknownComputation(id.to_string()))
    }

    pub fn check(&self, backend: &str, computation: &str, cfg: &SessionConfig) -> Result<()> {
        self.backend(backend)?.check(self.computation(computation)?.as_ref(), cfg)
    }

    pub fn run(&self, backend: &str, computation: &str, inputs: Vec<MakerInput>, cfg: &SessionConfig) -> Result<SessionReport> {
        let b = self.backend(backend)?;
        let c = self.computation(computation)?;
        b.check(c.as_ref(), cfg)?;
        b.run(c, inputs, cfg)
    }
}
