use num_complex::Complex64;

use super::config::{PreparedProtocol, ProtocolConfig};
use super::party::Party;
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

/// Probe states `U_i|0⟩`, `V_i|0⟩`, `W_i|0⟩` of one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStates {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub w: Vec<Complex64>,
}

impl IterationStates {
    pub fn from_unitaries(u: &ComplexMatrix, v: &ComplexMatrix, w: &ComplexMatrix) -> Self {
        Self { u: u.col_vec(0), v: v.col_vec(0), w: w.col_vec(0) }
    }
}

/// `E[S^Re − i S^Im]/m = (2p0^Re − 1) − i(2p0^Im − 1) = ⟨v|P|v⟩`.
fn mean_sign(party: &Party, v: &[Complex64]) -> Result<Complex64> {
    let [re, im] = party.outcome_p0(v)?;
    Ok(Complex64::new(2.0 * re - 1.0, -(2.0 * im - 1.0)))
}

/// `E[T | probe states]`, with all shot randomness integrated out.
pub fn conditional_mean_states(p: &PreparedProtocol, states: &[IterationStates]) -> Result<Complex64> {
    if states.is_empty() {
        return Err(Error::InvalidInput("no iterations supplied".into()));
    }
    let d = p.d as f64;
    let n = states.len() as f64;
    let (mut z, mut x, mut y) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for st in states {
        // Alice's and Bob's shots are independent given the states, so each
        // pair (j, j') contributes the product of the marginal biases.
        z += d * (d + 1.0) * mean_sign(&p.alice, &st.u)? * mean_sign(&p.bob, &st.u)?;
        x += d * mean_sign(&p.alice, &st.v)?;
        y += d * mean_sign(&p.bob, &st.w)?;
    }
    Ok(z / n - x * y / (n * n))
}

/// `E[T | U_i, V_i, W_i]` for explicit unitaries.
pub fn conditional_mean(
    unitaries: &[(ComplexMatrix, ComplexMatrix, ComplexMatrix)],
    cfg: &ProtocolConfig,
) -> Result<Complex64> {
    if unitaries.len() != cfg.n_iterations {
        return Err(Error::InvalidInput(format!("{} unitary triples for N = {}", unitaries.len(), cfg.n_iterations)));
    }
    let states: Vec<_> = unitaries.iter().map(|(u, v, w)| IterationStates::from_unitaries(u, v, w)).collect();
    conditional_mean_states(&cfg.prepare()?, &states)
}

/// Fully averaged `E[T]` from the Haar moment identities
/// `E⟨ψ|M|ψ⟩ = Tr M/d` and `E⟨ψ|M|ψ⟩⟨ψ|N|ψ⟩ = (Tr M Tr N + Tr MN)/(d(d+1))`.
pub fn haar_mean(p_block: &ComplexMatrix, q_block: &ComplexMatrix, d: usize) -> Result<Complex64> {
    if !p_block.is_square() || p_block.rows() != d || q_block.rows() != d || !q_block.is_square() {
        return Err(Error::InvalidDimension("haar_mean needs two d x d blocks".into()));
    }
    let df = d as f64;
    let (tp, tq) = (p_block.trace(), q_block.trace());
    let second = (tp * tq + p_block.trace_product(q_block)) / (df * (df + 1.0));
    let first_p = tp / df;
    let first_q = tq / df;
    Ok(df * (df + 1.0) * second - df * df * first_p * first_q)
}
