//! Steady states of driven, dissipative Duffing-type oscillators.
//!
//! Two routes are provided: closed-form moments, photon statistics and
//! Q-functions from the exact Fokker-Planck solutions, and a brute-force
//! truncated-Fock Lindblad solver used to check them.

pub mod error;
pub mod kernel;
pub mod oracle;
pub mod paramp;
pub mod qgrid;
pub mod transmon;
pub mod specfn;

pub use error::{Error, Result};
