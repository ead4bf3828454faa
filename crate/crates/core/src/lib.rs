//! Causal classification of two-mode Gaussian quadrature correlations.
//!
//! Given a space-time covariance matrix `{V_A, V_B, C}` collected from two
//! parties, this crate decides whether the correlations can come from a
//! forward channel (A → B), a reverse channel (B → A) or a shared bipartite
//! state, and quantifies Gaussian atemporality with a closed-form robustness
//! that is cross-checked by numerical oracles.
//!
//! Units follow `ħ = 2`, so the vacuum covariance matrix is the identity.

pub mod atemporality;
pub mod channels;
pub mod entanglement;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod numeric;
pub mod states;

pub use atemporality::{classify, AtemporalityReport, Classification, Direction};
pub use channels::{temporal_mechanism, GaussianChannel};
pub use error::{Error, Result};
pub use states::{SpaceTimeCM, StateDescriptor};
