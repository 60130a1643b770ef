//! Finite context-content systems of discrete random variables, exact
//! probabilistic couplings, and contextuality verdicts.
//!
//! A [`System`](system::System) names a set of *contents* (what is measured),
//! a set of *contexts* (the mutually exclusive conditions under which
//! measurements are recorded), and one jointly distributed *bunch* of
//! measurements per context. Measurements of the same content in different
//! contexts have no joint distribution; a [`Coupling`](coupling::Coupling)
//! imposes one, reproducing every bunch as a marginal.
//!
//! All probability mass is exact ([`Rational`]); every verdict — coupling
//! feasibility, inequality satisfaction, contextuality — is decided with zero
//! tolerance. Coupling existence questions reduce to rational linear
//! feasibility ([`lp`]), and for 2×2 binary systems the closed-form criteria
//! in [`analysis`] cross-validate the solver route.
//!
//! ```
//! use couplecheck_core::scenarios::{self, ScenarioId};
//! use couplecheck_core::analysis::{CyclicFourSystem, analyze};
//!
//! let system = scenarios::build(ScenarioId::PrBox, &[]).unwrap();
//! let cyclic = CyclicFourSystem::from_system(&system).unwrap();
//! let report = analyze(&cyclic);
//! assert!(!report.noncontextual_closed_form);
//! assert!(!report.noncontextual_lp);
//! assert!(report.oracle_agreement);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod coupling;
pub mod dist;
pub mod lp;
pub mod rational;
pub mod scenarios;
pub mod system;

mod tuples;

pub use rational::Rational;
