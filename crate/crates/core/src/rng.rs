//! Seed-keyed random substreams.
//!
//! Every replicate (or tournament simulation) gets its own ChaCha8 stream,
//! selected by `(seed, index)`, so results depend only on the seed and never
//! on which worker ran which replicate. [`KeyedStream`] additionally gives
//! random access into a stream by a stable key; that is what common random
//! numbers are built on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream `index` of the ChaCha8 generator seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer over `seed` and `salt`. Used to derive child seeds.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a sequence of string parts, with a separator between parts.
/// Stable across platforms and releases, unlike `DefaultHasher`.
pub fn stable_key(parts: &[&str]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    }
    h
}

/// Random access into one substream: `uniform(key)` always returns the same
/// value for the same `(seed, index, key)`, regardless of call order.
#[derive(Clone, Debug)]
pub struct KeyedStream {
    rng: ChaCha8Rng,
}

impl KeyedStream {
    pub fn new(seed: u64, index: u64) -> Self {
        Self { rng: substream(seed, index) }
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self, key: u64) -> f64 {
        use rand::Rng;
        // four 32-bit words reserved per key; the stream holds 2^68 words
        self.rng.set_word_pos(u128::from(key) << 2);
        self.rng.random::<f64>()
    }
}
