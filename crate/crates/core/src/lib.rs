//! Probabilistic amplitude shaping for ASK/QAM over the AWGN channel.

pub mod ccdm;
pub mod config;
pub mod constellation;
pub mod error;
pub mod infotheory;
pub mod ldpc;
pub mod numeric;
pub mod pipeline;
pub mod shaping;
pub mod sim;
pub mod tables;

pub use error::{Error, Result};
