//! Rayleigh flat-fading MIMO channel with additive white Gaussian noise.
//!
//! SNR is the average received signal power per receive antenna over the
//! complex noise power: `snr = m_t * Es / (2 sigma^2)` with `Es = 1`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{qr_decompose, ComplexMatrix, QrFactors};
use crate::{Error, Result};

/// Redraws attempted before a degenerate channel is reported.
pub const MAX_REDRAWS: usize = 16;

/// One channel matrix with its QR factors.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub qr: QrFactors,
    pub use_index: usize,
}

impl ChannelRealization {
    /// Wraps a given matrix, factorizing it.
    pub fn from_matrix(h: ComplexMatrix, use_index: usize) -> Result<Self> {
        let qr = qr_decompose(&h)?;
        Ok(Self { h, qr, use_index })
    }
}

/// Per-dimension noise variance `sigma^2`; the complex noise variance is twice that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma2: f64,
    pub snr_db: f64,
}

impl NoiseModel {
    /// Noise model from an explicit per-dimension variance.
    pub fn from_sigma2(sigma2: f64, m_t: usize) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be positive and finite, got {sigma2}"
            )));
        }
        let snr_db = 10.0 * (m_t as f64 / (2.0 * sigma2)).log10();
        Ok(Self { sigma2, snr_db })
    }

    /// Complex noise variance `2 sigma^2`.
    #[inline]
    pub fn complex_variance(&self) -> f64 {
        2.0 * self.sigma2
    }
}

/// Calibrates the noise for a given SNR and transmit antenna count.
pub fn sigma2_for_snr(snr_db: f64, m_t: usize) -> NoiseModel {
    assert!(m_t >= 1, "need at least one transmit antenna");
    let snr_lin = 10f64.powf(snr_db / 10.0);
    NoiseModel {
        sigma2: m_t as f64 / snr_lin / 2.0,
        snr_db,
    }
}

/// Circularly symmetric complex Gaussian sample with the given total variance.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * scale, im * scale)
}

/// Draws an i.i.d. unit-variance Rayleigh channel and factorizes it.
pub fn draw_channel<R: Rng + ?Sized>(
    m_r: usize,
    m_t: usize,
    use_index: usize,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if m_t == 0 || m_r < m_t {
        return Err(Error::DimensionMismatch(format!(
            "need m_r >= m_t >= 1, got m_r = {m_r}, m_t = {m_t}"
        )));
    }
    for _ in 0..MAX_REDRAWS {
        let data = (0..m_r * m_t).map(|_| complex_gaussian(rng, 1.0)).collect();
        let h = ComplexMatrix::new(m_r, m_t, data)?;
        match qr_decompose(&h) {
            Ok(qr) => return Ok(ChannelRealization { h, qr, use_index }),
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::DegenerateChannel(MAX_REDRAWS))
}

/// `y = h s + n`.
pub fn transmit<R: Rng + ?Sized>(
    s: &[Complex64],
    ch: &ChannelRealization,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let h = &ch.h;
    if s.len() != h.cols() {
        return Err(Error::DimensionMismatch(format!(
            "symbol vector has {} entries, channel has {} inputs",
            s.len(),
            h.cols()
        )));
    }
    let variance = noise.complex_variance();
    let y: Vec<Complex64> = (0..h.rows())
        .map(|r| {
            let signal: Complex64 = s.iter().enumerate().map(|(c, x)| h[(r, c)] * x).sum();
            signal + complex_gaussian(rng, variance)
        })
        .collect();
    ComplexMatrix::column(&y)
}
