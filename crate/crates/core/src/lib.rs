//! Contextual-bandit experimentation library built around the
//! Explore-Twice-then-Commit (E2TC) algorithm for bandits with pre-trained
//! representation networks.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`linalg`]: small dense symmetric/PSD routines (solves, eigendecomposition,
//!   inverse square roots, weighted norms) used everywhere else.
//! - [`net`]: the representation network, its Jacobian-transpose products,
//!   the optional decoder, initialization and norm-ball projection.
//! - [`env`]: synthetic realizable environments, classification block
//!   embeddings, CSV regression datasets, and exact oracle quantities on
//!   finite support.
//! - [`ridge`]: stage-1 estimation (empirical covariance, ridge fit) and
//!   the closed-form excess-risk bound calculators.
//! - [`sgd`]: stage-2 projected SGD with optional preconditioning on the
//!   last layer, plus martingale bound evaluators.
//! - [`algo`]: the E2TC episode driver, weak-training mode, and greedy
//!   baselines.
//! - [`pretrain`]: the regularized pre-training loss (MSE + cosine
//!   orthogonality + autoencoder + weight decay) and spectrum analysis.
//! - [`tuning`]: power-curve fitting, exploration-split selection, theory
//!   hyperparameter formulas, and deterministic grid sweeps.
//! - [`report`]: regret accounting, multi-seed aggregation, CSV and SVG
//!   emission.

pub mod algo;
pub mod env;
pub mod error;
pub mod linalg;
pub mod net;
pub mod pretrain;
pub mod report;
pub mod ridge;
pub mod sgd;
pub mod tuning;

pub use error::{Error, Result};

/// Deterministic RNG used throughout the crate. Every sampling operation
/// takes an explicit handle so concurrent episodes each own their stream.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Build the crate RNG from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
