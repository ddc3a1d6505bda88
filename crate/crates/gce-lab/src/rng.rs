//! Seed plumbing: one master seed per run, deterministic sub-streams per task.
//!
//! Sweeps fan out over grid cells and samples, possibly in parallel. Each
//! unit of work derives its own seed from the master seed and a tag path
//! (cell index, sample index, purpose), so results are independent of
//! thread count and iteration order.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derives a child seed from `master` and a tag path.
///
/// Distinct tag paths give statistically independent streams; the same path
/// always gives the same seed. Folding is order-sensitive, so
/// `[a, b]` and `[b, a]` differ.
pub fn stream_seed(master: u64, tags: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for &t in tags {
        s = splitmix64(s ^ t.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    }
    s
}

/// Deterministic generator for a derived seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
