//! Block BER estimation from decoder LLRs and the adaptive clipping controller.
//!
//! The hard decision of a bit with a-posteriori LLR `L` is wrong with
//! probability `1 / (1 + e^|L|)`. Summing that over the `n` least reliable
//! information bits of a block and dividing by the block length gives a cheap
//! BER estimate. The controller moves the clipping level in the log domain:
//!
//! ```text
//! candidate = l_cl - mu * (ln TER - ln P_hat)
//! l_cl'     = max(min(l_ter, candidate), l_min)
//! ```
//!
//! starting from `l_ter = ln(1/TER - 1)`, the LLR magnitude whose error
//! probability equals the target.

use crate::{Error, Result};

/// Default floor of the clipping level.
pub const DEFAULT_L_MIN: f64 = 0.05;

/// Error probability of a hard decision with LLR magnitude `llr_magnitude`.
pub fn bit_error_prob(llr_magnitude: f64) -> Result<f64> {
    if !(llr_magnitude >= 0.0) || !llr_magnitude.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "LLR magnitude must be finite and non-negative, got {llr_magnitude}"
        )));
    }
    Ok(error_prob_unchecked(llr_magnitude))
}

#[inline]
fn error_prob_unchecked(magnitude: f64) -> f64 {
    // e^-|L| / (1 + e^-|L|) avoids overflow for large magnitudes
    let e = (-magnitude).exp();
    e / (1.0 + e)
}

/// LLR magnitude whose hard-decision error probability equals `ter`.
pub fn ter_llr(ter: f64) -> f64 {
    (1.0 / ter - 1.0).ln()
}

/// Block BER estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerEstimate {
    pub p_hat: f64,
    pub n_used: usize,
    pub n_total: usize,
}

/// Estimates the BER of a block from its `n` least reliable information bits.
///
/// Ties in magnitude are broken by ascending bit index. The result is floored
/// at the smallest positive normal `f64` so it stays usable in the log domain.
pub fn estimate_block_ber(info_llrs: &[f64], n: usize) -> Result<BerEstimate> {
    let total = info_llrs.len();
    if n == 0 || n > total {
        return Err(Error::InvalidArgument(format!(
            "n must lie in 1..={total}, got {n}"
        )));
    }
    if let Some(pos) = info_llrs.iter().position(|l| l.is_nan()) {
        return Err(Error::NonFiniteLlr(pos));
    }
    let mut order: Vec<(f64, usize)> = info_llrs
        .iter()
        .enumerate()
        .map(|(i, l)| (l.abs(), i))
        .collect();
    let by_reliability =
        |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if n < total {
        order.select_nth_unstable_by(n - 1, by_reliability);
    }
    let mut smallest = order[..n].to_vec();
    smallest.sort_unstable_by(by_reliability);
    let sum: f64 = smallest.iter().map(|&(m, _)| error_prob_unchecked(m)).sum();
    Ok(BerEstimate {
        p_hat: (sum / total as f64).max(f64::MIN_POSITIVE),
        n_used: n,
        n_total: total,
    })
}

/// Which bound of the controller, if any, limited the last update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clamp {
    None,
    /// Candidate exceeded `l_ter`.
    Upper,
    /// Candidate fell below `l_min`.
    Lower,
}

/// State of one clipping-level tracking chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClippingState {
    pub l_cl: f64,
    pub l_ter: f64,
    pub ter: f64,
    pub mu: f64,
    pub l_min: f64,
    pub last_estimate: Option<f64>,
}

/// Starts a chain at `l_cl = l_ter`.
pub fn init_clipping(ter: f64, mu: f64, l_min: f64) -> Result<ClippingState> {
    if !(ter > 0.0 && ter < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "target error rate must lie in (0, 0.5), got {ter}"
        )));
    }
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "step size must be finite and non-negative, got {mu}"
        )));
    }
    let l_ter = ter_llr(ter);
    if !(l_min > 0.0) || l_min > l_ter {
        return Err(Error::InvalidArgument(format!(
            "l_min must lie in (0, {l_ter}], got {l_min}"
        )));
    }
    Ok(ClippingState {
        l_cl: l_ter,
        l_ter,
        ter,
        mu,
        l_min,
        last_estimate: None,
    })
}

impl ClippingState {
    /// Applies one controller step with the previous block's estimate and
    /// reports which clamp, if any, was active.
    pub fn update(&self, p_hat_prev: f64) -> Result<(ClippingState, Clamp)> {
        if !(p_hat_prev > 0.0) || p_hat_prev > 0.5 {
            return Err(Error::InvalidArgument(format!(
                "BER estimate must lie in (0, 0.5], got {p_hat_prev}"
            )));
        }
        let candidate = self.l_cl - self.mu * (self.ter.ln() - p_hat_prev.ln());
        let (l_cl, clamp) = if candidate > self.l_ter {
            (self.l_ter, Clamp::Upper)
        } else if candidate < self.l_min {
            (self.l_min, Clamp::Lower)
        } else {
            (candidate, Clamp::None)
        };
        Ok((
            ClippingState {
                l_cl,
                last_estimate: Some(p_hat_prev),
                ..*self
            },
            clamp,
        ))
    }
}

pub fn update_clipping(state: &ClippingState, p_hat_prev: f64) -> Result<ClippingState> {
    state.update(p_hat_prev).map(|(s, _)| s)
}
