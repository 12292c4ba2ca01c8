//! Deterministic random substreams.
//!
//! Every random draw in an experiment comes from a ChaCha8 generator keyed by
//! the run seed and a stream id derived from the draw's coordinates, so the
//! result of a simulation does not depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Upper bounds of the coordinate fields packed into a stream id.
pub const MAX_POINTS: usize = 1 << 12;
pub const MAX_CHAINS: usize = 1 << 16;
pub const MAX_BLOCKS: usize = 1 << 20;
pub const MAX_USES: usize = (1 << 16) - 2;

/// Coordinates of one code block inside an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BlockCoord {
    pub point: usize,
    pub chain: usize,
    pub block: usize,
}

impl BlockCoord {
    pub fn new(point: usize, chain: usize, block: usize) -> Result<Self> {
        if point >= MAX_POINTS || chain >= MAX_CHAINS || block >= MAX_BLOCKS {
            return Err(Error::InvalidArgument(format!(
                "block coordinate ({point}, {chain}, {block}) exceeds the substream layout"
            )));
        }
        Ok(Self {
            point,
            chain,
            block,
        })
    }

    fn base(&self) -> u64 {
        ((self.point as u64) << 52) | ((self.chain as u64) << 36) | ((self.block as u64) << 16)
    }

    /// Stream for the information bits of the block.
    pub fn bits_rng(&self, seed: u64) -> ChaCha8Rng {
        stream(seed, self.base())
    }

    /// Stream for channel and noise of channel use `use_index`.
    pub fn use_rng(&self, seed: u64, use_index: usize) -> ChaCha8Rng {
        assert!(use_index < MAX_USES, "channel use index out of range");
        stream(seed, self.base() | (use_index as u64 + 1))
    }
}

/// Seed for the run-wide interleaver, kept apart from every block stream.
pub fn interleaver_seed(seed: u64) -> u64 {
    seed ^ 0x6a09_e667_f3bc_c909
}

pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}
