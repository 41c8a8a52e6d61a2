//! Secret-key-rate bounds for two-way deterministic QKD (secure dense coding,
//! LM05, two-way BB84) under qubit noise, with noise-adaptive encodings.

pub mod channels;
pub mod densecoding;
pub mod encoding;
pub mod error;
pub mod experiments;
pub mod numkernel;
pub mod optimize;
pub mod oracle;
pub mod protocols;
pub mod qstates;

pub use error::{Error, Result};
