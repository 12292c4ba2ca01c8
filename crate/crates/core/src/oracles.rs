//! Brute-force references for the detector and the channel decoder.
//!
//! Both oracles enumerate every candidate and share no arithmetic with the
//! code they check: the detector oracle multiplies `r s` out in full, and the
//! decoder oracle re-derives the code from its generator polynomials.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::{draw_channel, sigma2_for_snr, transmit};
use crate::linalg::{rotate_received, ComplexMatrix};
use crate::modem::Constellation;
use crate::sphere::DetectionProblem;
use crate::{Error, Result};

/// Largest `|S|^M_T` accepted by [`exhaustive_maxlog_llrs`].
pub const MAX_DETECTION_CANDIDATES: usize = 1 << 16;

/// Largest information length accepted by [`exhaustive_map_decode`].
pub const MAX_MAP_INFO_BITS: usize = 12;

/// Exact max-log LLRs by evaluating `||y - r s||^2` for every symbol vector.
/// The clip level of the problem is ignored.
pub fn exhaustive_maxlog_llrs(p: &DetectionProblem<'_>) -> Result<Vec<f64>> {
    let n = p.r.cols();
    let points = p.constellation.points();
    let q = points.len();
    let bps = p.constellation.bits_per_symbol();
    let total = (q as u128).pow(n as u32);
    if total > MAX_DETECTION_CANDIDATES as u128 {
        return Err(Error::TooLarge(format!("{total} symbol vectors")));
    }
    if p.y_rot.len() != p.r.rows() {
        return Err(Error::DimensionMismatch("rotated vector length".into()));
    }

    // best[bit][value]
    let mut best = vec![[f64::INFINITY; 2]; n * bps];
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        let s: Vec<Complex64> = digits.iter().map(|&d| points[d]).collect();
        let mut metric = 0.0;
        for row in 0..p.r.rows() {
            let mut acc = p.y_rot[row];
            for (col, x) in s.iter().enumerate() {
                acc -= p.r[(row, col)] * x;
            }
            metric += acc.re * acc.re + acc.im * acc.im;
        }
        for (t, &d) in digits.iter().enumerate() {
            for b in 0..bps {
                let value = (d >> (bps - 1 - b)) & 1;
                let slot = &mut best[t * bps + b][value];
                if metric < *slot {
                    *slot = metric;
                }
            }
        }
        // odometer increment
        for d in digits.iter_mut() {
            *d += 1;
            if *d < q {
                break;
            }
            *d = 0;
        }
    }
    let scale = 2.0 * p.sigma2;
    Ok(best.iter().map(|m| (m[0] - m[1]) / scale).collect())
}

/// A detection problem with owned data, drawn from the channel model.
#[derive(Debug, Clone)]
pub struct DetectionInstance {
    pub r: ComplexMatrix,
    pub y_rot: Vec<Complex64>,
    pub constellation: Constellation,
    pub sigma2: f64,
    /// Transmitted symbol indices.
    pub symbols: Vec<usize>,
}

impl DetectionInstance {
    pub fn problem(&self, clip: f64) -> DetectionProblem<'_> {
        DetectionProblem {
            r: &self.r,
            y_rot: &self.y_rot,
            constellation: &self.constellation,
            sigma2: self.sigma2,
            clip,
        }
    }
}

/// Square `m_t x m_t` Rayleigh instance with uniformly random symbols.
pub fn random_detection_instance<R: Rng + ?Sized>(
    rng: &mut R,
    m_t: usize,
    order: usize,
    snr_db: f64,
) -> Result<DetectionInstance> {
    let constellation = Constellation::from_order(order)?;
    let noise = sigma2_for_snr(snr_db, m_t);
    let ch = draw_channel(m_t, m_t, 0, rng)?;
    let symbols: Vec<usize> = (0..m_t).map(|_| rng.random_range(0..order)).collect();
    let s: Vec<Complex64> = symbols.iter().map(|&i| constellation.point(i)).collect();
    let y = transmit(&s, &ch, &noise, rng)?;
    let y_rot = rotate_received(&ch.qr.q, &y)?.into_vec();
    Ok(DetectionInstance {
        r: ch.qr.r,
        y_rot,
        constellation,
        sigma2: noise.sigma2,
        symbols,
    })
}

/// Codeword of the (5/7) RSC code written out from its polynomials.
fn rsc_codeword(info: &[u8]) -> Vec<u8> {
    let mut a = vec![0u8; info.len()];
    let mut out = Vec::with_capacity(2 * info.len());
    for k in 0..info.len() {
        let a1 = if k >= 1 { a[k - 1] } else { 0 };
        let a2 = if k >= 2 { a[k - 2] } else { 0 };
        a[k] = (info[k] + a1 + a2) % 2;
        out.push(info[k]);
        out.push((a[k] + a2) % 2);
    }
    out
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    top + values.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
}

/// Log-probability weights of every codeword and the codewords themselves.
fn enumerate_codewords(a_priori: &[f64], k: usize) -> Result<(Vec<Vec<u8>>, Vec<f64>)> {
    if k == 0 || k > MAX_MAP_INFO_BITS {
        return Err(Error::TooLarge(format!(
            "{k} information bits (allowed 1..={MAX_MAP_INFO_BITS})"
        )));
    }
    if a_priori.len() != 2 * k {
        return Err(Error::LengthMismatch {
            got: a_priori.len(),
            expected: 2 * k,
        });
    }
    let mut words = Vec::with_capacity(1 << k);
    let mut weights = Vec::with_capacity(1 << k);
    for word in 0..(1usize << k) {
        let info: Vec<u8> = (0..k).map(|i| ((word >> i) & 1) as u8).collect();
        let cw = rsc_codeword(&info);
        let w: f64 = cw
            .iter()
            .zip(a_priori)
            .map(|(&c, &l)| if c == 1 { l / 2.0 } else { -l / 2.0 })
            .sum();
        words.push(cw);
        weights.push(w);
    }
    Ok((words, weights))
}

fn posterior(words: &[Vec<u8>], weights: &[f64], position: usize) -> f64 {
    let (mut ones, mut zeros) = (Vec::new(), Vec::new());
    for (cw, &w) in words.iter().zip(weights) {
        if cw[position] == 1 {
            ones.push(w);
        } else {
            zeros.push(w);
        }
    }
    log_sum_exp(&ones) - log_sum_exp(&zeros)
}

/// Exact information-bit posteriors by summing over all `2^k` codewords.
pub fn exhaustive_map_decode(a_priori: &[f64], k: usize) -> Result<Vec<f64>> {
    let (words, weights) = enumerate_codewords(a_priori, k)?;
    Ok((0..k).map(|i| posterior(&words, &weights, 2 * i)).collect())
}

/// Exact coded-bit posteriors by summing over all `2^k` codewords.
pub fn exhaustive_map_decode_coded(a_priori: &[f64], k: usize) -> Result<Vec<f64>> {
    let (words, weights) = enumerate_codewords(a_priori, k)?;
    Ok((0..2 * k).map(|i| posterior(&words, &weights, i)).collect())
}
