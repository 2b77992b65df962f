//! Seeded random streams.
//!
//! Every consumer of randomness gets its own xoshiro256++ stream. A stream is
//! derived from a `(seed, stream id)` pair: the generator is seeded from the
//! seed via SplitMix64 (`seed_from_u64`) and then advanced by `stream id`
//! calls to `jump()`, each of which skips 2^128 outputs. Streams with the same
//! seed and different ids therefore never overlap in practice, and the whole
//! construction is integer arithmetic only, so it reproduces bit-for-bit on
//! every platform.

use rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type StreamRng = Xoshiro256PlusPlus;

/// Well-known stream ids. Keep these stable: changing one changes every
/// seeded result downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Stream {
    DgpNoise = 0,
    DgpJump = 1,
    Init = 2,
    Shuffle = 3,
    Dropout = 4,
    Bootstrap = 5,
}

pub fn stream(seed: u64, id: Stream) -> StreamRng {
    stream_n(seed, id as u32)
}

pub fn stream_n(seed: u64, id: u32) -> StreamRng {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    for _ in 0..id {
        rng.jump();
    }
    rng
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64<R: rand_core::RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform index in `0..n` (Lemire's multiply-shift with rejection).
pub fn index<R: rand_core::RngCore>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let n = n as u64;
    let zone = u64::MAX - (u64::MAX - n + 1) % n;
    loop {
        let v = rng.next_u64();
        let m = (v as u128) * (n as u128);
        if (m as u64) <= zone {
            return (m >> 64) as usize;
        }
    }
}

/// Fisher-Yates shuffle driven by [`index`].
pub fn shuffle<T, R: rand_core::RngCore>(rng: &mut R, items: &mut [T]) {
    for k in (1..items.len()).rev() {
        let j = index(rng, k + 1);
        items.swap(k, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::RngCore;

    #[test]
    fn streams_differ_and_repeat() {
        let mut s0 = stream(7, Stream::DgpNoise);
        let mut s1 = stream(7, Stream::DgpJump);
        let mut s0b = stream(7, Stream::DgpNoise);
        let x0 = s0.next_u64();
        assert_eq!(x0, s0b.next_u64());
        assert_ne!(x0, s1.next_u64());
    }

    #[test]
    fn index_stays_in_range() {
        let mut r = stream(1, Stream::Shuffle);
        for n in 1..50 {
            for _ in 0..20 {
                assert!(index(&mut r, n) < n);
            }
        }
    }

    #[test]
    fn unit_interval() {
        let mut r = stream(3, Stream::Init);
        for _ in 0..1000 {
            let u = unit_f64(&mut r);
            assert!((0.0..1.0).contains(&u));
        }
    }
}
