//! Exact and asymptotic finite-blocklength source-coding limits with a
//! q-deformed information calculus.
//!
//! The crate models a memoryless finite-alphabet source and answers one
//! question several ways: how many nats does it take to represent a block of
//! n symbols with error probability at most ε?
//!
//! * exact answers by enumerating the block self-information spectrum,
//! * asymptotic answers (Shannon, normal approximation, third-order
//!   refinement, deformed-entropy bound) from the moment ladder of the
//!   single-symbol self-information,
//! * Monte Carlo estimates of the fluctuation statistics for cross-checking
//!   both.
//!
//! The `parallel` feature (on by default) runs spectrum enumeration and
//! Monte Carlo batches on a rayon pool; the sequential fallbacks compute
//! bitwise-identical results.

pub mod bounds;
pub mod error;
pub mod montecarlo;
pub mod numerics;
pub mod qalgebra;
pub mod report;
pub mod source;
pub mod spectrum;

pub use bounds::{bound_sweep, bound_sweep_seq, BoundInputs, BoundRow};
pub use error::{Error, Result};
pub use montecarlo::{McConfig, SlopeEstimate};
pub use qalgebra::{QParam, ScalingLaw};
pub use source::{BlockMoments, InfoMoments, SourcePmf};
pub use spectrum::{Spectrum, SpectrumAtom};
