//! Single-neutron spin–path entanglement and the CHSH test built on it.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. It provides:
//!
//! - [`quantum`]: exact algebra of the 2 ⊗ 2 spin–path space, projectors,
//!   joint probabilities, and correlations of pure and dephased states;
//! - [`apparatus`]: the phenomenological instrument (contrast per spin
//!   rotation, beam phase offset, mean rate) mapping settings to count rates;
//! - [`montecarlo`]: seeded, order-independent Poisson scan generation;
//! - [`analysis`]: sinusoid fitting, four-count correlation estimates, error
//!   propagation, weighted averaging and S′;
//! - [`lhv`]: the noncontextual deterministic-strategy oracle for `|S| ≤ 2`.
//!
//! ```
//! use spinpath::analysis::max_violation_settings;
//! use spinpath::quantum::{bell_state, expectation};
//!
//! let psi = bell_state();
//! let (s, _) = max_violation_settings().evaluate(|st| expectation(&psi, st).unwrap());
//! assert!((s - 2.0 * core::f64::consts::SQRT_2).abs() < 1e-12);
//! ```

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;

pub mod analysis;
pub mod apparatus;
pub mod lhv;
pub mod montecarlo;
pub mod poisson;
pub mod quantum;
pub mod setting;

pub use error::{Error, Result};
pub use setting::Setting;
