//! Gray-mapped square QAM and bit-block to symbol-vector assembly.
//!
//! Symbol index `i` of a constellation is the bit pattern of that point read
//! as an unsigned integer, first bit most significant. The first half of the
//! pattern selects the in-phase level and the second half the quadrature
//! level, each through a reflected Gray code (`00 -> -3, 01 -> -1, 11 -> +1,
//! 10 -> +3` for two bits per axis). Logical 0 is bipolar -1 and logical 1 is
//! bipolar +1.

use num_complex::Complex64;

use crate::{Error, Result};

/// Unit-energy Gray-labelled constellation.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    energy_norm: f64,
}

impl Constellation {
    /// Square QAM of order 4, 16 or 64.
    pub fn qam(order: usize) -> Result<Self> {
        let bits_per_symbol = match order {
            4 => 2,
            16 => 4,
            64 => 6,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let axis_bits = bits_per_symbol / 2;
        let levels = 1usize << axis_bits;
        // average energy of the unnormalized square grid: 2 (M - 1) / 3
        let energy_norm = 1.0 / (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
        let mask = levels - 1;
        let points = (0..order)
            .map(|pattern| {
                let i_gray = pattern >> axis_bits;
                let q_gray = pattern & mask;
                let re = axis_amplitude(gray_to_binary(i_gray), levels);
                let im = axis_amplitude(gray_to_binary(q_gray), levels);
                Complex64::new(re, im) * energy_norm
            })
            .collect();
        Ok(Self {
            order,
            bits_per_symbol,
            points,
            energy_norm,
        })
    }

    /// Real antipodal constellation {-1, +1}.
    pub fn bpsk() -> Self {
        Self {
            order: 2,
            bits_per_symbol: 1,
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            energy_norm: 1.0,
        }
    }

    /// Looks up a constellation by order; 2 selects BPSK.
    pub fn from_order(order: usize) -> Result<Self> {
        if order == 2 {
            Ok(Self::bpsk())
        } else {
            Self::qam(order)
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Points indexed by bit pattern.
    #[inline]
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    #[inline]
    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    pub fn energy_norm(&self) -> f64 {
        self.energy_norm
    }

    /// Logical value (0 or 1) of bit `bit` of symbol `index`.
    #[inline]
    pub fn label_bit(&self, index: usize, bit: usize) -> u8 {
        ((index >> (self.bits_per_symbol - 1 - bit)) & 1) as u8
    }
}

fn gray_to_binary(mut g: usize) -> usize {
    let mut b = g;
    while g > 0 {
        g >>= 1;
        b ^= g;
    }
    b
}

fn axis_amplitude(level: usize, levels: usize) -> f64 {
    2.0 * level as f64 - (levels as f64 - 1.0)
}

/// Bipolar bits feeding one symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock(Vec<i8>);

impl BitBlock {
    pub fn new(bits: Vec<i8>) -> Result<Self> {
        if let Some(&b) = bits.iter().find(|&&b| b != -1 && b != 1) {
            return Err(Error::NotBipolar(b));
        }
        Ok(Self(bits))
    }

    /// From logical bits: 0 maps to -1 and anything else to +1.
    pub fn from_logical(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| if b == 0 { -1 } else { 1 }).collect())
    }

    pub fn bits(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn pattern(&self) -> usize {
        self.0
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b > 0))
    }
}

/// Maps one bit block to its constellation point.
pub fn map_bits(block: &BitBlock, c: &Constellation) -> Result<Complex64> {
    Ok(c.point(symbol_index(block, c)?))
}

/// Bit pattern of a block as a symbol index.
pub fn symbol_index(block: &BitBlock, c: &Constellation) -> Result<usize> {
    if block.len() != c.bits_per_symbol() {
        return Err(Error::BlockLength {
            got: block.len(),
            expected: c.bits_per_symbol(),
        });
    }
    Ok(block.pattern())
}

/// Inverse of [`map_bits`] on symbol indices.
pub fn demap_index(symbol_index: usize, c: &Constellation) -> Result<BitBlock> {
    if symbol_index >= c.order() {
        return Err(Error::IndexOutOfRange {
            index: symbol_index,
            order: c.order(),
        });
    }
    let bits = (0..c.bits_per_symbol())
        .map(|b| {
            if c.label_bit(symbol_index, b) == 1 {
                1
            } else {
                -1
            }
        })
        .collect();
    Ok(BitBlock(bits))
}

/// Builds the transmit vector, one block per transmit antenna.
pub fn assemble_vector(
    blocks: &[BitBlock],
    c: &Constellation,
    m_t: usize,
) -> Result<Vec<Complex64>> {
    if blocks.len() != m_t {
        return Err(Error::DimensionMismatch(format!(
            "expected {m_t} bit blocks, got {}",
            blocks.len()
        )));
    }
    blocks.iter().map(|b| map_bits(b, c)).collect()
}
