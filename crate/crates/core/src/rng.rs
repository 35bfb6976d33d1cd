//! Deterministic random streams.
//!
//! Every stochastic operation takes a `(seed, stream)` pair. The pair selects a
//! ChaCha8 key (from the seed) and a ChaCha stream id, so substreams are
//! independent of one another and of the order in which they are consumed.
//! Monte-Carlo trials use the trial index as the stream id.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the generator for substream `stream` of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer, used to derive child seeds from `(seed, index)`.
pub fn mix_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform deviate on the open interval (0, 1).
pub(crate) fn open01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    // 53 random mantissa bits, offset by half an ulp so 0 and 1 are unreachable.
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Standard complex Gaussian deviate (unit total power) by Box-Muller.
pub(crate) fn complex_gaussian<R: rand::Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let r = (-open01(rng).ln()).sqrt();
    let theta = std::f64::consts::TAU * open01(rng);
    num_complex::Complex64::from_polar(r, theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn same_seed_and_stream_repeat() {
        let (mut ra, mut rb) = (stream_rng(7, 3), stream_rng(7, 3));
        let a: Vec<u64> = (0..8).map(|_| ra.gen()).collect();
        let b: Vec<u64> = (0..8).map(|_| rb.gen()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn streams_differ() {
        let x: u64 = stream_rng(7, 0).gen();
        let y: u64 = stream_rng(7, 1).gen();
        let z: u64 = stream_rng(8, 0).gen();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }

    #[test]
    fn open01_stays_inside() {
        let mut rng = stream_rng(1, 1);
        for _ in 0..100_000 {
            let u = open01(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn complex_gaussian_has_unit_power() {
        let mut rng = stream_rng(4, 0);
        let n = 200_000;
        let p: f64 = (0..n).map(|_| complex_gaussian(&mut rng).norm_sqr()).sum::<f64>() / n as f64;
        assert!((p - 1.0).abs() < 0.01);
    }

    #[test]
    fn mix_seed_spreads_indices() {
        assert_ne!(mix_seed(0, 0), mix_seed(0, 1));
        assert_eq!(mix_seed(42, 9), mix_seed(42, 9));
    }
}
