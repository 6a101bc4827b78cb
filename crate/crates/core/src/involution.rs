//! Self-inverse position permutations over bit strings.

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A permutation `σ` of `{1..size}` with `σ∘σ = id`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Involution {
    /// `mapping[i - 1] = σ(i)`
    mapping: Vec<u32>,
}

impl Involution {
    pub fn identity(size: u32) -> Involution {
        Involution { mapping: (1..=size).collect() }
    }

    /// Validates that `mapping` (1-based images) is a self-inverse permutation.
    pub fn from_mapping(mapping: Vec<u32>) -> Result<Involution> {
        let n = mapping.len() as u32;
        if n == 0 {
            return Err(Error::Arg("involution over an empty position set".into()));
        }
        for (i, &m) in mapping.iter().enumerate() {
            if m == 0 || m > n {
                return Err(Error::Arg(format!("position {m} out of 1..={n}")));
            }
            if mapping[(m - 1) as usize] != i as u32 + 1 {
                return Err(Error::Arg(format!("mapping is not self-inverse at {}", i + 1)));
            }
        }
        Ok(Involution { mapping })
    }

    /// Deterministic involution derived from `draw`: shuffle the positions,
    /// then pair consecutive shuffled positions into transpositions. With an
    /// odd size the last shuffled position stays fixed.
    pub fn from_seed(draw: u64, size: u32) -> Involution {
        let mut hasher = Sha256::new();
        hasher.update(b"involution");
        hasher.update(draw.to_be_bytes());
        hasher.update(size.to_be_bytes());
        let seed: [u8; 32] = hasher.finalize().into();
        let mut rng = ChaCha8Rng::from_seed(seed);

        let mut order: Vec<u32> = (1..=size).collect();
        order.shuffle(&mut rng);
        let mut mapping: Vec<u32> = (1..=size).collect();
        for pair in order.chunks_exact(2) {
            mapping[(pair[0] - 1) as usize] = pair[1];
            mapping[(pair[1] - 1) as usize] = pair[0];
        }
        Involution { mapping }
    }

    pub fn size(&self) -> u32 {
        self.mapping.len() as u32
    }

    pub fn mapping(&self) -> &[u32] {
        &self.mapping
    }

    /// `σ(i)` for a 1-based position.
    pub fn image(&self, i: u32) -> u32 {
        self.mapping[(i - 1) as usize]
    }

    pub fn is_involution(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| {
            m >= 1 && (m as usize) <= self.mapping.len() && self.mapping[(m - 1) as usize] == i as u32 + 1
        })
    }

    /// Permutes a bit string of `size` bits: output bit `i` is input bit `σ(i)`,
    /// with bit 1 the most significant.
    pub fn apply(&self, bits: &BigUint) -> BigUint {
        let n = self.size() as u64;
        let mut out = BigUint::default();
        for (i, &src) in self.mapping.iter().enumerate() {
            if bits.bit(n - u64::from(src)) {
                out.set_bit(n - 1 - i as u64, true);
            }
        }
        out
    }
}
