use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream keyed by `(seed, domain, a, b)`; independent of call order.
pub(crate) fn keyed_rng(seed: u64, domain: u64, a: u64, b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (chunk, word) in key.chunks_exact_mut(8).zip([seed, domain, a, b]) {
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

pub(crate) const DOMAIN_FINGER: u64 = 1;
pub(crate) const DOMAIN_IMPRESSION: u64 = 2;
pub(crate) const DOMAIN_IMPOSTOR: u64 = 3;
pub(crate) const DOMAIN_PERTURB: u64 = 4;
