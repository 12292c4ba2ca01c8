//! Channel coding: the rate-1/2 (5/7) recursive systematic convolutional code,
//! a seeded random interleaver over the coded bits, and a log-MAP BCJR decoder.
//!
//! LLRs throughout are `ln P(bit = 1) / P(bit = 0)`, so a positive value is a
//! hard decision for logical 1.

mod bcjr;
mod interleaver;
mod rsc;

pub use bcjr::{bcjr_decode, BcjrOutput, LLR_SATURATION};
pub use interleaver::Interleaver;
pub use rsc::{encode, CodeBlock, Trellis, TRELLIS};

/// Hard decision for a single LLR; ties go to logical 0.
#[inline]
pub fn hard_decision(llr: f64) -> u8 {
    u8::from(llr > 0.0)
}
