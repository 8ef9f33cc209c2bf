use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{PreparedProtocol, ProtocolConfig};
use super::labels;
use super::oracle::IterationStates;
use super::party::{Party, PartyId, Role};
use crate::error::{Error, Result};
use crate::numkit::{haar_state, RngStream};
use crate::svt::Part;

/// Classical content of a message. There is deliberately no variant able to
/// carry amplitudes or matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Payload {
    Bits(Vec<bool>),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Bits(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One broadcast: a party's measurement record for one round.
///
/// Layout of the bits: shared-Re, shared-Im, local-Re, local-Im, `m` each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub party: PartyId,
    pub round: usize,
    pub payload: Payload,
}

impl Message {
    pub fn size(&self) -> usize {
        self.payload.len()
    }
}

/// Measurement bits of a protocol run, stored as the transcript of classical
/// messages in round order (Alice then Bob).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotTable {
    pub d: usize,
    pub n_iterations: usize,
    pub m: usize,
    pub transcript: Vec<Message>,
}

impl ShotTable {
    /// Builds from raw per-round records; `bits[i][party]` uses the message layout.
    pub fn from_bits(d: usize, m: usize, rounds: Vec<[Vec<bool>; 2]>) -> Result<Self> {
        let n = rounds.len();
        let mut transcript = Vec::with_capacity(2 * n);
        for (round, [a, b]) in rounds.into_iter().enumerate() {
            for (party, bits) in [(PartyId::Alice, a), (PartyId::Bob, b)] {
                if bits.len() != 4 * m {
                    return Err(Error::InvalidInput(format!(
                        "round {round}: {party:?} sent {} bits, expected {}",
                        bits.len(),
                        4 * m
                    )));
                }
                transcript.push(Message { party, round, payload: Payload::Bits(bits) });
            }
        }
        Ok(Self { d, n_iterations: n, m, transcript })
    }

    fn message(&self, round: usize, party: PartyId) -> Option<&Message> {
        let idx = 2 * round + usize::from(party == PartyId::Bob);
        self.transcript.get(idx).filter(|msg| msg.round == round && msg.party == party)
    }

    /// Bit `(i, j, operator, role, part)`; `None` for pairs the protocol
    /// never measures (Alice on `W`, Bob on `V`) or out-of-range indices.
    pub fn bit(&self, i: usize, j: usize, party: PartyId, role: Role, part: Part) -> Option<bool> {
        if j >= self.m {
            return None;
        }
        let block = match (party, role) {
            (_, Role::U) => 0,
            (PartyId::Alice, Role::V) | (PartyId::Bob, Role::W) => 2,
            _ => return None,
        } + usize::from(part == Part::Im);
        let Payload::Bits(bits) = &self.message(i, party)?.payload;
        bits.get(block * self.m + j).copied()
    }

    /// Number of outcome-0 shots for `(i, party, role, part)`.
    pub fn zeros(&self, i: usize, party: PartyId, role: Role, part: Part) -> Result<usize> {
        (0..self.m)
            .map(|j| {
                self.bit(i, j, party, role, part).ok_or_else(|| {
                    Error::InvalidInput(format!("missing entry (i={i}, j={j}, {party:?}, {role:?}, {part:?})"))
                })
            })
            .try_fold(0usize, |acc, b| b.map(|bit| acc + usize::from(!bit)))
    }

    /// Total classical bits exchanged.
    pub fn communicated_bits(&self) -> usize {
        self.transcript.iter().map(Message::size).sum()
    }
}

/// One party's measurement of a round: shared then local, Re then Im.
fn measure<R: Rng + ?Sized>(
    party: &Party,
    shared: &[Complex64],
    local: &[Complex64],
    m: usize,
    rng: &mut R,
) -> Result<Vec<bool>> {
    let ps = party.outcome_p0(shared)?;
    let pl = party.outcome_p0(local)?;
    let mut bits = Vec::with_capacity(4 * m);
    for p0 in [ps[0], ps[1], pl[0], pl[1]] {
        bits.extend(Party::sample_bits(p0, m, rng));
    }
    Ok(bits)
}

pub(crate) fn party_stream(stream: &RngStream, party: PartyId, i: usize) -> RngStream {
    let label = match party {
        PartyId::Alice => labels::ALICE,
        PartyId::Bob => labels::BOB,
    };
    stream.descend(&[label, i as u64])
}

pub(crate) fn shared_stream(stream: &RngStream, i: usize) -> RngStream {
    stream.descend(&[labels::SHARED, i as u64])
}

fn table_round(p: &PreparedProtocol, i: usize) -> Result<[Vec<bool>; 2]> {
    let d = p.d;
    let mut u = Vec::with_capacity(d);
    haar_state(d, &mut shared_stream(&p.stream, i).rng(), &mut u);
    let mut ra = party_stream(&p.stream, PartyId::Alice, i).rng();
    let mut v = Vec::with_capacity(d);
    haar_state(d, &mut ra, &mut v);
    let a = measure(&p.alice, &u, &v, p.m, &mut ra)?;
    let mut rb = party_stream(&p.stream, PartyId::Bob, i).rng();
    let mut w = Vec::with_capacity(d);
    haar_state(d, &mut rb, &mut w);
    let b = measure(&p.bob, &u, &w, p.m, &mut rb)?;
    Ok([a, b])
}

/// Runs the sampling stage and records every bit.
pub fn run_shots(cfg: &ProtocolConfig) -> Result<ShotTable> {
    cfg.prepare()?.run_shots()
}

/// Sampling with the probe states held fixed; shot randomness comes from
/// `stream`.
pub fn run_shots_frozen(p: &PreparedProtocol, states: &[IterationStates], stream: &RngStream) -> Result<ShotTable> {
    let rounds = p.execution.map_collect(states.len(), |i| -> Result<[Vec<bool>; 2]> {
        let st = &states[i];
        let s = stream.child(labels::FROZEN);
        let a = measure(&p.alice, &st.u, &st.v, p.m, &mut party_stream(&s, PartyId::Alice, i).rng())?;
        let b = measure(&p.bob, &st.u, &st.w, p.m, &mut party_stream(&s, PartyId::Bob, i).rng())?;
        Ok([a, b])
    });
    ShotTable::from_bits(p.d, p.m, rounds.into_iter().collect::<Result<_>>()?)
}

impl PreparedProtocol {
    /// Runs the sampling stage and records every bit.
    pub fn run_shots(&self) -> Result<ShotTable> {
        let rounds = self.execution.map_collect(self.n_iterations, |i| table_round(self, i));
        ShotTable::from_bits(self.d, self.m, rounds.into_iter().collect::<Result<_>>()?)
    }
}
