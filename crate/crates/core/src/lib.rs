//! Legendre pair search by modular compression and fixed-marginal binary
//! matrix enumeration.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bmfm;
pub mod compress;
pub mod cyclic;
mod error;
pub mod modular;
pub mod oracle;
pub mod pairgen;
pub mod search;
pub mod spectral;

pub use error::{Error, Result};
