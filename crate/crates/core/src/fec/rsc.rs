use crate::{Error, Result};

/// Number of encoder states of the memory-2 code.
pub const NUM_STATES: usize = 4;

/// State transition table of the (5/7) RSC encoder.
///
/// The state holds the last two feedback-register values `(a[k-1], a[k-2])`
/// packed as `a[k-1] << 1 | a[k-2]`. Feedback is `1 + D + D^2` (octal 7) and
/// the parity output is `1 + D^2` (octal 5).
#[derive(Debug, Clone, Copy)]
pub struct Trellis {
    /// `next[state][input]`
    pub next: [[u8; 2]; NUM_STATES],
    /// `parity[state][input]`
    pub parity: [[u8; 2]; NUM_STATES],
}

const fn build_trellis() -> Trellis {
    let mut next = [[0u8; 2]; NUM_STATES];
    let mut parity = [[0u8; 2]; NUM_STATES];
    let mut s = 0;
    while s < NUM_STATES {
        let d1 = ((s >> 1) & 1) as u8;
        let d2 = (s & 1) as u8;
        let mut u = 0;
        while u < 2 {
            let a = (u as u8) ^ d1 ^ d2;
            next[s][u] = (a << 1) | d1;
            parity[s][u] = a ^ d2;
            u += 1;
        }
        s += 1;
    }
    Trellis { next, parity }
}

pub const TRELLIS: Trellis = build_trellis();

/// Information bits with their codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    pub info_bits: Vec<u8>,
    /// Systematic and parity bits interlaced: `[u0, p0, u1, p1, ...]`.
    pub coded_bits: Vec<u8>,
}

impl CodeBlock {
    pub fn info_len(&self) -> usize {
        self.info_bits.len()
    }
}

/// Encodes logical bits from the zero state without termination.
pub fn encode(info: &[u8]) -> Result<CodeBlock> {
    if info.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot encode an empty block".into(),
        ));
    }
    let mut state = 0usize;
    let mut coded = Vec::with_capacity(2 * info.len());
    for &bit in info {
        let u = usize::from(bit != 0);
        coded.push(u as u8);
        coded.push(TRELLIS.parity[state][u]);
        state = TRELLIS.next[state][u] as usize;
    }
    Ok(CodeBlock {
        info_bits: info.iter().map(|&b| u8::from(b != 0)).collect(),
        coded_bits: coded,
    })
}
