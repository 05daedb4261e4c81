//! Deterministic derivation of independent RNG streams from one master seed.
//!
//! Every stochastic routine in the crate identifies its stream by a list of
//! tags, e.g. `(master_seed, "pcurve", bias_index, domain_index)`. The tags
//! are folded through splitmix64 into a 64-bit seed for a ChaCha8 generator.
//! Identical tags always yield the identical stream, and streams with
//! different tags are statistically independent, which is what makes
//! per-bias parallel extraction reproducible.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; full-period bijection on u64.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// FNV-1a over a label, for mixing experiment names into a stream id.
#[inline]
pub fn hash_label(label: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Folds `(master, tags...)` into one stream seed.
pub fn stream_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = mix64(master ^ 0x5851f42d4c957f2d);
    for t in tags {
        s = mix64(s ^ mix64(*t));
    }
    s
}

/// ChaCha8 stream for `(master, tags...)`.
pub fn derive_stream(master: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, tags))
}

/// Stream addressed by an experiment label plus indices.
pub fn labeled_stream(master: u64, label: &str, tags: &[u64]) -> ChaCha8Rng {
    let mut all = Vec::with_capacity(tags.len() + 1);
    all.push(hash_label(label));
    all.extend_from_slice(tags);
    derive_stream(master, &all)
}
