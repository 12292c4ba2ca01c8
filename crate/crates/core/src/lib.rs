//! Soft-output MIMO detection with adaptive LLR clipping.
//!
//! The crate bundles everything needed to run link-level experiments on a
//! coded MIMO system whose soft-output sphere decoder has its LLR clipping
//! level adjusted online to meet a target error rate:
//!
//! - [`linalg`]: complex matrices and a thin QR with a positive real diagonal
//! - [`modem`]: Gray-mapped square QAM
//! - [`fec`]: the (5/7) recursive systematic code, interleaver and log-MAP BCJR
//! - [`channel`]: Rayleigh flat fading, AWGN and SNR calibration
//! - [`sphere`]: single-tree-search soft-output sphere decoder with clipping
//! - [`adapt`]: block BER estimation and the clipping-level controller
//! - [`oracles`]: brute-force references for the detector and the decoder
//! - [`harness`]: block pipeline and Monte Carlo experiment driver
//! - [`cli`]: configuration parsing, CSV output and the verification report

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adapt;
pub mod channel;
pub mod cli;
pub mod error;
pub mod fec;
pub mod harness;
pub mod linalg;
pub mod modem;
pub mod oracles;
pub mod rng;
pub mod sphere;

pub use error::{Error, Result};
pub use num_complex::Complex64;
