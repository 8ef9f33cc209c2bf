//! Two-party sampling and the classical trace estimator.
//!
//! Alice holds `P = P_f(Ã)`, Bob holds `Q = Q_g(B̃)`. In iteration `i` both
//! run Hadamard tests on a shared Haar state `U_i|0⟩`, Alice additionally on a
//! private `V_i|0⟩` and Bob on a private `W_i|0⟩`. Each party publishes only
//! its measurement bits; the combiner forms
//!
//! ```text
//! T = mean_i Z_i − mean_k X_k · mean_l Y_l
//! ```
//!
//! whose expectation is `Tr(PQ)`.

mod config;
mod estimator;
mod oracle;
mod party;
mod planning;
mod shots;

pub use config::{PreparedProtocol, ProtocolConfig};
pub use estimator::{combine_components, estimate_trace, IterationComponents, Moments, TraceEstimate};
pub use oracle::{conditional_mean, conditional_mean_states, haar_mean, IterationStates};
pub use party::{Party, PartyId, Role};
pub use planning::{empirical_variance, median_of_means, plan_samples, plan_samples_with, replicate, SamplePlan};
pub use shots::{run_shots, run_shots_frozen, Message, Payload, ShotTable};

/// Substream labels.
pub(crate) mod labels {
    pub const SHARED: u64 = 0x5348_4152;
    pub const ALICE: u64 = 0x414c_4943;
    pub const BOB: u64 = 0x424f_4221;
    pub const REPLAY: u64 = 0x5245_504c;
    pub const FROZEN: u64 = 0x4652_5a4e;
}
