use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::svt::{p0_from_bias, Part, TransformedBlock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
}

/// Which Haar unitary prepared the probe state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Shared `U_i`.
    U,
    /// Alice-local `V_i`.
    V,
    /// Bob-local `W_i`.
    W,
}

impl PartyId {
    /// The private role of this party.
    pub fn local_role(self) -> Role {
        match self {
            PartyId::Alice => Role::V,
            PartyId::Bob => Role::W,
        }
    }
}

/// One party's private quantum resource: its transformed block.
///
/// Nothing in this type ever leaves the party; only sign sums and bits do.
#[derive(Debug, Clone)]
pub struct Party {
    pub id: PartyId,
    block: TransformedBlock,
    herm: Vec<Complex64>,
    anti: Vec<Complex64>,
}

fn hermitian_form(m: &[Complex64], v: &[Complex64]) -> f64 {
    let d = v.len();
    let mut acc = 0.0;
    for i in 0..d {
        let row = &m[i * d..(i + 1) * d];
        let mut s = Complex64::new(0.0, 0.0);
        for (mij, vj) in row.iter().zip(v) {
            s += mij * vj;
        }
        acc += (v[i].conj() * s).re;
    }
    acc
}

impl Party {
    pub fn new(id: PartyId, block: TransformedBlock) -> Self {
        let herm = block.hermitian_part.to_row_major();
        let anti = block.antihermitian_part.to_row_major();
        Self { id, block, herm, anti }
    }

    pub fn dim(&self) -> usize {
        self.block.dim()
    }

    pub fn degree(&self) -> usize {
        self.block.source_poly_degree
    }

    pub fn block(&self) -> &TransformedBlock {
        &self.block
    }

    /// Outcome-0 probabilities `[Re, Im]` for the probe state `v`.
    pub fn outcome_p0(&self, v: &[Complex64]) -> Result<[f64; 2]> {
        Ok([
            p0_from_bias(hermitian_form(&self.herm, v), Part::Re)?,
            p0_from_bias(hermitian_form(&self.anti, v), Part::Im)?,
        ])
    }

    /// `⟨v|P|v⟩` reconstructed from the two parts.
    pub fn expectation(&self, v: &[Complex64]) -> Complex64 {
        Complex64::new(hermitian_form(&self.herm, v), hermitian_form(&self.anti, v))
    }

    /// `m` Bernoulli shots; `true` is outcome 1.
    pub fn sample_bits<R: Rng + ?Sized>(p0: f64, m: usize, rng: &mut R) -> Vec<bool> {
        (0..m).map(|_| rng.random::<f64>() >= p0).collect()
    }

    /// Sign sum `Σ_j (−1)^{bit_j}` of `m` shots, drawn as a binomial count.
    pub fn sample_sign_sum<R: Rng + ?Sized>(p0: f64, m: usize, rng: &mut R) -> i64 {
        let zeros = match Binomial::new(m as u64, p0) {
            Ok(b) => b.sample(rng) as i64,
            Err(_) => {
                if p0 >= 1.0 {
                    m as i64
                } else {
                    0
                }
            }
        };
        2 * zeros - m as i64
    }
}
