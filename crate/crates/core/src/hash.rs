//! Platform-stable 64-bit mixing and the counter-based random stream built on it.
//!
//! Everything random in the toolkit (green-list shuffles, sampling, renaming,
//! bootstrap resampling) is driven by [`mix64`] so that a run is reproducible
//! from its seeds alone, on any platform.

use crate::vocab::TokenId;

/// SplitMix64 finalizer.
#[inline]
pub const fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the green/red partition used at a step whose predecessor is `prev_token`.
#[inline]
pub const fn seed_for(key: u64, prev_token: TokenId) -> u64 {
    mix64(key ^ (prev_token as u64 + 1))
}

/// Counter-based generator: the i-th draw is `mix64(seed + i)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    counter: u64,
}

impl CounterRng {
    pub const fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    /// Number of raw draws consumed so far.
    pub const fn position(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix64(self.seed.wrapping_add(self.counter));
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform integer in `[0, n)` by rejection; never modulo-biased.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "empty range");
        // 2^64 mod n: draws under this value would over-represent small residues.
        let reject_under = n.wrapping_neg() % n;
        loop {
            let x = self.next_u64();
            if x >= reject_under {
                return x % n;
            }
        }
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box-Muller, one value per two uniforms).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_golden_values() {
        // Frozen from an independent big-integer evaluation of the finalizer.
        assert_eq!(mix64(1), 0x910A_2DEC_8902_5CC1);
        assert_eq!(seed_for(0, 0), mix64(1));
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn seed_for_is_deterministic_and_collision_free_on_sample() {
        let mut seen = std::collections::HashSet::new();
        for key in [0u64, 7, 0xDEAD_BEEF] {
            for t in 0..3_400u32 {
                assert_eq!(seed_for(key, t), seed_for(key, t));
                assert!(seen.insert((key, seed_for(key, t))));
            }
        }
        let per_key: std::collections::HashSet<u64> = (0..10_000u32).map(|t| seed_for(42, t)).collect();
        assert_eq!(per_key.len(), 10_000);
    }

    #[test]
    fn below_stays_in_range_and_is_roughly_uniform() {
        let mut rng = CounterRng::new(9);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[rng.below(7) as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 500.0, "{counts:?}");
        }
    }

    #[test]
    fn unit_floats_in_range() {
        let mut rng = CounterRng::new(1);
        for _ in 0..10_000 {
            let u = rng.next_f64();
            assert!((0.0..1.0).contains(&u));
        }
        assert_eq!(rng.position(), 10_000);
    }
}
