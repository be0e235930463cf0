//! Simulation and analysis toolkit for sparse strategic network-formation
//! models.
//!
//! The crate simulates network panels in which links form when a latent
//! pairwise index — distance, attributes, a bounded strategic statistic of
//! the ambient network, and an idiosyncratic shock — is positive, with a
//! pairwise-stable initial condition solved by decentralized best response.
//! On top of the simulator it provides:
//!
//! * node statistics (subnetwork counts, conditional-logit scores, ASF
//!   bound components) and their estimators ([`moments`]);
//! * the stabilization machinery: counterfactual regrowth on recursively
//!   built node sets J_i, radii, and exponential-tail diagnostics
//!   ([`stabilization`]);
//! * dominating multi-type branching processes and the subcriticality norm
//!   ([`branching`]);
//! * Monte Carlo CLT verification, Poissonization variance decomposition,
//!   and randomization/t-test inference ([`inference`]).
//!
//! Everything is deterministic given a master seed: randomness is
//! counter-based and keyed per node id and per unordered pair, so restricting
//! a draw to a node subset reproduces the exact same primitives — the
//! property that makes counterfactual subnetworks well defined.

pub mod branching;
pub mod error;
pub mod formation;
pub mod inference;
pub mod model;
pub mod moments;
pub mod net;
pub mod numeric;
pub mod rng;
pub mod scenarios;
pub mod stabilization;

pub use error::{CoreError, Result};
pub use model::{
    eval_latent, eval_latent_extremes, eval_s, probit, sample_primitives, AttributeLaw, LatentParams,
    ModelSpec, PositionLaw, Primitives, SKind, ShockLaw, SparsityScale, Which,
};
pub use net::{Net, NetSeries};
