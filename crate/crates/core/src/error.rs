//! Error taxonomy shared across the toolkit.

use thiserror::Error;

/// Errors surfaced by model construction, solvers, and diagnostics.
#[derive(Debug, Error)]
pub enum CoreError {
    /// A model specification failed validation (bad dimensions, bounds, ...).
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    /// A caller violated an operation's documented preconditions.
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// Best-response iteration exceeded its sweep cap; the configuration is
    /// likely non-monotone and should use enumeration instead.
    #[error("best-response iteration did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },

    /// Fallback enumeration over a strategic neighborhood would exceed the
    /// candidate cap (2^20 subnetworks).
    #[error("strategic neighborhood with {pairs} free pairs exceeds the enumeration cap")]
    NeighborhoodTooLarge { pairs: usize },

    /// Exhaustive equilibrium enumeration requested above the node cap.
    #[error("enumeration supports at most {cap} nodes, got {n}")]
    TooLarge { n: usize, cap: usize },

    /// Conditional likelihood is unbounded (perfect separation).
    #[error("perfect separation: conditional log-likelihood is unbounded")]
    Separation,

    /// No informative dyads: the conditional likelihood carries no signal.
    #[error("degenerate fit: no informative dyads")]
    Degenerate,

    /// An estimator denominator is exactly zero.
    #[error("zero denominator: {0}")]
    ZeroDenominator(String),

    /// Too few samples for the requested diagnostic.
    #[error("insufficient data: need at least {need} samples, got {got}")]
    InsufficientData { need: usize, got: usize },

    /// Too few per-network means for a group-based test.
    #[error("too few networks: need at least {need}, got {got}")]
    TooFewNetworks { need: usize, got: usize },

    /// A radial integral failed to converge.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// Branching replications hit the population cap too often.
    #[error("supercritical suspected: population cap hit in {frac:.1}% of replications")]
    SupercriticalSuspected { frac: f64 },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, CoreError>;
