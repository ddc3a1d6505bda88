//! Numerical laboratory for generalized concentratable entanglement (GCE).
//!
//! The crate computes the GCE of pure qubit states three independent ways and
//! cross-checks them against each other:
//!
//! - an exact oracle from the statevector (partial traces plus eigenvalue
//!   powers), see [`gce`],
//! - exact outcome distributions of the cyclic-permutation test over K state
//!   copies, reduced to trace powers, see [`permtest`],
//! - a compiled qubit circuit (Fourier ancillas plus controlled cyclic
//!   shifts) simulated gate by gate, see [`circuit`].
//!
//! On top of those sit the K = 3 W-state concentration protocol
//! ([`concentration`]), noise-robustness experiments against an analytic
//! error bound ([`robustness`]), and randomized sweeps hunting for
//! counterexamples to monotonicity and subadditivity conjectures
//! ([`conjectures`]).
//!
//! Every capability has a runnable demo under `examples/`; a thin binary
//! exposes the same operations as subcommands (see [`cli`]).

pub mod circuit;
pub mod cli;
pub mod concentration;
pub mod conjectures;
pub mod gce;
pub mod permtest;
pub mod rng;
pub mod robustness;
pub mod state;

pub use crate::gce::{gce, GceParams};
pub use crate::state::{DensityMatrix, PureState, SingleQubitUnitary, SubsetLabel};

use thiserror::Error;

/// Crate-wide error type; variants map onto process exit codes in the CLI.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad input such as an out-of-range index, a non-normalized state, or
    /// an invalid parameter combination.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The requested copy count K admits no sound estimator: powers of the
    /// cyclic shift are single K-cycles only when K is prime, and without
    /// that the outcome distribution no longer determines Tr(rho^K).
    #[error("unsupported copy count K={0}: outcome probabilities of the permutation test determine Tr(rho^K) only for prime K")]
    UnsupportedOrder(u32),

    /// A computation was refused because it would exceed the built-in size
    /// guards (callers can opt into larger runs explicitly).
    #[error("resource guard: {0}")]
    ResourceLimit(String),

    /// A protocol step has no defined result, e.g. solving concentration
    /// unitaries for an outcome of (numerically) zero probability.
    #[error("degenerate outcome: {0}")]
    DegenerateOutcome(String),

    /// Malformed serialized data (circuit files, tables, statevector JSON).
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnsupportedOrder(_) => 2,
            Error::ResourceLimit(_) => 3,
            _ => 1,
        }
    }
}
