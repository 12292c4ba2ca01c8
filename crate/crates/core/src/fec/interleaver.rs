use rand::{seq::SliceRandom, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Bit permutation applied between the encoder and the mapper.
///
/// `interleave` produces `out[i] = x[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    permutation: Vec<usize>,
    seed: Option<u64>,
}

impl Interleaver {
    /// Uniformly random permutation drawn from a seeded ChaCha8 stream.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut permutation: Vec<usize> = (0..len).collect();
        permutation.shuffle(&mut rng);
        Self {
            permutation,
            seed: Some(seed),
        }
    }

    pub fn identity(len: usize) -> Self {
        Self {
            permutation: (0..len).collect(),
            seed: None,
        }
    }

    pub fn from_permutation(permutation: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; permutation.len()];
        for &p in &permutation {
            if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(
                    "interleaver permutation is not a bijection".into(),
                ));
            }
        }
        Ok(Self {
            permutation,
            seed: None,
        })
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        Ok(self.permutation.iter().map(|&p| x[p]).collect())
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_len(x.len())?;
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.permutation.iter().enumerate() {
            out[p] = x[i];
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.permutation.len() {
            return Err(Error::LengthMismatch {
                got: len,
                expected: self.permutation.len(),
            });
        }
        Ok(())
    }
}
