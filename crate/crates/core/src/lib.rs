//! Random-order greedy allocation for combinatorial auctions whose bidders
//! have vertex cover valuations.
//!
//! Items arrive in a uniformly random order and each goes to the bidder with
//! the largest marginal value for it. This crate runs that loop, computes its
//! expected welfare exactly or by Monte Carlo, finds optimal allocations by
//! exhaustive search, and measures the per-step quantities used to bound the
//! algorithm's approximation ratio.
//!
//! ```
//! use rog_core::expectation::{exact_expectation, ExpectationOptions};
//! use rog_core::greedy::TieRule;
//! use rog_core::instances::paper_lower_bound_instance;
//! use rog_core::rational::Rational;
//!
//! let instance = paper_lower_bound_instance(5)?;
//! let report = exact_expectation(&instance, TieRule::LowestIndex, &ExpectationOptions::default())?;
//! assert_eq!(report.total.exact(), Some(Rational::new(337, 60)?));
//! # Ok::<(), rog_core::Error>(())
//! ```

pub mod enumerate;
mod error;
pub mod expectation;
pub mod greedy;
pub mod instances;
pub mod instrumentation;
pub mod optimal;
pub mod rational;
pub mod valuations;

pub use error::{Error, Required, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/valuations.md")]
    mod valuations {}
    #[doc = include_str!("../../../book/src/greedy.md")]
    mod greedy {}
    #[doc = include_str!("../../../book/src/optimal.md")]
    mod optimal {}
    #[doc = include_str!("../../../book/src/expectation.md")]
    mod expectation {}
    #[doc = include_str!("../../../book/src/lower-bound.md")]
    mod lower_bound {}
    #[doc = include_str!("../../../book/src/instrumentation.md")]
    mod instrumentation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
