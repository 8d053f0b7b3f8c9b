//! Secure sum rates of asymmetric compute-and-forward over the Gaussian
//! wiretap multiple-access channel, with a desk-scale lattice encoder and
//! quantizer-entropy experiments.

pub mod cfrac;
pub mod channel;
pub mod codec;
pub mod error;
pub mod experiment;
pub mod lattice;
pub mod lemma1;
pub mod matrix;
pub mod plot;
pub mod rates;
pub mod stats;

pub use error::{Error, Result};
