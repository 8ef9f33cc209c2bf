use serde::{Deserialize, Serialize};

use super::party::{Party, PartyId};
use crate::blockenc::BlockEncoding;
use crate::error::{Error, Result};
use crate::numkit::RngStream;
use crate::parallel::Execution;
use crate::polyapprox::BoundedPolynomial;
use crate::svt::apply_poly_sv;

/// Inputs of one protocol run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub d: usize,
    pub n_iterations: usize,
    pub m: usize,
    pub seed: u64,
    pub poly_f: BoundedPolynomial,
    pub poly_g: BoundedPolynomial,
    pub be_a: BlockEncoding,
    pub be_b: BlockEncoding,
}

impl ProtocolConfig {
    pub fn new(
        n_iterations: usize,
        m: usize,
        seed: u64,
        poly_f: BoundedPolynomial,
        poly_g: BoundedPolynomial,
        be_a: BlockEncoding,
        be_b: BlockEncoding,
    ) -> Result<Self> {
        let cfg = Self { d: be_a.system_dim(), n_iterations, m, seed, poly_f, poly_g, be_a, be_b };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_iterations == 0 || self.m == 0 {
            return Err(Error::InvalidParameter(format!(
                "N = {} and m = {} must be positive",
                self.n_iterations, self.m
            )));
        }
        if self.be_a.system_dim() != self.d || self.be_b.system_dim() != self.d {
            return Err(Error::InvalidDimension(format!(
                "encodings act on dimensions {} and {}, config says {}",
                self.be_a.system_dim(),
                self.be_b.system_dim(),
                self.d
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n_iterations: usize, m: usize) -> Self {
        self.n_iterations = n_iterations;
        self.m = m;
        self
    }

    /// Transforms both effective blocks and hands each to its party.
    pub fn prepare(&self) -> Result<PreparedProtocol> {
        self.validate()?;
        let alice = Party::new(PartyId::Alice, apply_poly_sv(&self.be_a.block(), &self.poly_f)?);
        let bob = Party::new(PartyId::Bob, apply_poly_sv(&self.be_b.block(), &self.poly_g)?);
        Ok(PreparedProtocol {
            d: self.d,
            n_iterations: self.n_iterations,
            m: self.m,
            stream: RngStream::new(self.seed),
            alice,
            bob,
            execution: Execution::default(),
        })
    }
}

/// A configuration with the parties' blocks already transformed.
#[derive(Debug, Clone)]
pub struct PreparedProtocol {
    pub d: usize,
    pub n_iterations: usize,
    pub m: usize,
    pub stream: RngStream,
    pub alice: Party,
    pub bob: Party,
    pub execution: Execution,
}

impl PreparedProtocol {
    /// Builds directly from two parties.
    pub fn from_parties(alice: Party, bob: Party, n_iterations: usize, m: usize, seed: u64) -> Result<Self> {
        if alice.dim() != bob.dim() {
            return Err(Error::InvalidDimension(format!(
                "party blocks have dimensions {} and {}",
                alice.dim(),
                bob.dim()
            )));
        }
        if n_iterations == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("N = {n_iterations} and m = {m} must be positive")));
        }
        Ok(Self {
            d: alice.dim(),
            n_iterations,
            m,
            stream: RngStream::new(seed),
            alice,
            bob,
            execution: Execution::default(),
        })
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn with_stream(mut self, stream: RngStream) -> Self {
        self.stream = stream;
        self
    }

    pub fn with_samples(mut self, n_iterations: usize, m: usize) -> Self {
        self.n_iterations = n_iterations;
        self.m = m;
        self
    }

    /// Simulated oracle queries: each shot applies the transformed block once.
    pub fn queries(&self) -> u64 {
        let shots = 4 * self.m as u64 * self.n_iterations as u64;
        shots * (self.alice.degree().max(1) + self.bob.degree().max(1)) as u64
    }
}
