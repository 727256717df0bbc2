//! Counter-based uniform random number generation.
//!
//! Every variate is a pure function of `(seed, stream, index)`. There is no
//! generator state to advance, so the draw for run `t`, position `d` is the
//! same no matter how runs are sharded across threads, and different
//! strategies evaluated on the same seed share one universe of draws.

/// SplitMix64 finalizer (Steele, Lea & Flood 2014). Bijective on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 2^64 / golden ratio; the SplitMix64 stream increment.
const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Raw 64-bit output for position `index` of stream `stream` under `seed`.
///
/// Each stream is a SplitMix64 sequence whose seed is itself a SplitMix64
/// hash of `(seed, stream)`, which keeps related stream ids decorrelated.
#[inline]
pub fn bits(seed: u64, stream: u64, index: u64) -> u64 {
    let key = mix64(seed ^ mix64(stream.wrapping_add(GOLDEN)));
    mix64(key.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform draw in the open interval (0, 1) for `(seed, stream, index)`.
#[inline]
pub fn uniform01(seed: u64, stream: u64, index: u64) -> f64 {
    // 53 high bits, offset by half an ulp so 0.0 and 1.0 are excluded.
    ((bits(seed, stream, index) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Fills `out` with the first `out.len()` draws of stream `stream`.
#[inline]
pub fn fill_uniform01(seed: u64, stream: u64, out: &mut [f64]) {
    for (d, slot) in out.iter_mut().enumerate() {
        *slot = uniform01(seed, stream, d as u64);
    }
}
