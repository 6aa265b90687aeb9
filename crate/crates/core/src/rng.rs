//! Deterministic random streams.
//!
//! Every sketch instance owns a ChaCha8 stream keyed by `(seed, instance)`:
//! the seed selects the key and the instance id selects the ChaCha stream
//! number, so trials split from one base seed never overlap.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name and version of the generator, reported alongside simulation output.
pub const GENERATOR: &str = "chacha8/rand_chacha-0.9/v1";

pub type SketchRng = ChaCha8Rng;

/// The random stream for instance `instance` under `seed`.
pub fn stream_rng(seed: u64, instance: u64) -> SketchRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(instance);
    rng
}

/// A uniform draw from `{0, 2^-53, ..., 1 - 2^-53}`, consuming one word.
pub fn unit_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (rng.next_u64() >> 11) as f64 * SCALE
}

/// `k / 2^bits` with `k` uniform in `0..2^bits`, consuming one word.
/// `bits` must be at most 53 so the result is exact.
pub fn dyadic_uniform<R: RngCore + ?Sized>(rng: &mut R, bits: u32) -> f64 {
    debug_assert!(bits <= 53);
    let word = rng.next_u64();
    if bits == 0 {
        return 0.0;
    }
    let k = word >> (64 - bits);
    k as f64 / (1u64 << bits) as f64
}

/// Bernoulli(p) from one uniform draw. Exact for dyadic `p >= 2^-53`.
pub fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    unit_uniform(rng) < p
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_and_instance_repeat() {
        let a: Vec<u64> = (0..8)
            .map({
                let mut r = stream_rng(7, 3);
                move |_| r.next_u64()
            })
            .collect();
        let b: Vec<u64> = (0..8)
            .map({
                let mut r = stream_rng(7, 3);
                move |_| r.next_u64()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn instances_are_independent_streams() {
        let mut a = stream_rng(7, 0);
        let mut b = stream_rng(7, 1);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn bernoulli_edges() {
        let mut r = stream_rng(1, 0);
        assert!((0..1000).all(|_| bernoulli(&mut r, 1.0)));
        assert!((0..1000).all(|_| !bernoulli(&mut r, 0.0)));
    }

    #[test]
    fn dyadic_uniform_stays_on_grid() {
        let mut r = stream_rng(2, 0);
        for _ in 0..1000 {
            let x = dyadic_uniform(&mut r, 3);
            assert!((0.0..1.0).contains(&x));
            assert_eq!((x * 8.0).fract(), 0.0);
        }
        assert_eq!(dyadic_uniform(&mut r, 0), 0.0);
    }
}
