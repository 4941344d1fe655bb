//! Optimal continuity and semicontinuity bounds for Shannon and von Neumann
//! entropies under an energy (moment) constraint.
//!
//! Given a discrete, non-decreasing constraint spectrum `h_0 = 0 <= h_1 <= ...`
//! whose partition function is finite at every positive inverse temperature,
//! the crate evaluates
//!
//! * the Gibbs state at a mean energy and its entropy `F(E)` ([`gibbs`]),
//! * the piecewise bound `kappa_E(eps)` with its threshold `a(E)` ([`bounds`]),
//! * explicit distributions that attain the bound ([`extremal`]),
//! * independent numerical checks: a brute-force constrained maximizer,
//!   randomized no-violation sampling for classical and quantum states and a
//!   dense Hermitian eigensolver ([`verify`]).
//!
//! ```
//! use entropy_bounds::{bounds::kappa, Spectrum};
//!
//! let oscillator = Spectrum::oscillator();
//! let b = kappa(&oscillator, 1.0, 0.25, 1e-12)?;
//! assert!((b.value - 1.1246702892).abs() < 1e-9);
//! # Ok::<(), entropy_bounds::Error>(())
//! ```
//!
//! Entropies are in nats throughout; [`LogBase`] converts on output.

pub mod bounds;
pub mod error;
pub mod extremal;
pub mod gibbs;
pub mod spectrum;
pub mod units;
pub mod verify;

pub use bounds::{Bound, BoundResult, Branch};
pub use error::{Error, Result};
pub use extremal::{Distribution, JointDistribution};
pub use gibbs::GibbsSolution;
pub use spectrum::{Generator, Spectrum, TruncationPlan};
pub use units::LogBase;

/// The guide's chapters, compiled as doctests so their snippets stay in sync.
#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    pub mod spectra {}
    #[doc = include_str!("../../../book/src/gibbs.md")]
    pub mod gibbs {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub mod bounds {}
    #[doc = include_str!("../../../book/src/witnesses.md")]
    pub mod witnesses {}
    #[doc = include_str!("../../../book/src/verification.md")]
    pub mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
