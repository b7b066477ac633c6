use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, platform-independent generator. `fork` derives independent
/// child streams so adding draws in one place does not shift another.
#[derive(Debug, Clone)]
pub struct ScenarioRng {
    seed: u64,
    inner: ChaCha8Rng,
}

// splitmix64 finalizer, used to derive child seeds
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl ScenarioRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn fork(&self, label: u64) -> Self {
        Self::new(mix(self.seed ^ mix(label)))
    }

    /// Uniform in `[lo, hi)`; returns `lo` for an empty range.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            lo
        } else {
            self.inner.gen_range(lo..hi)
        }
    }

    /// Uniform integer in `[lo, hi]`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        if hi <= lo {
            lo
        } else {
            self.inner.gen_range(lo..=hi)
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.gen_bool(p.clamp(0.0, 1.0))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.gen()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = ScenarioRng::new(7);
        let mut b = ScenarioRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn forks_are_independent_of_parent_draws() {
        let a = ScenarioRng::new(7);
        let mut b = ScenarioRng::new(7);
        b.next_u64();
        assert_eq!(a.fork(3).next_u64(), b.fork(3).next_u64());
        assert_ne!(a.fork(3).next_u64(), a.fork(4).next_u64());
    }

    #[test]
    fn known_first_draw_is_stable() {
        // pinned so a dependency bump that changes the stream is noticed
        assert_eq!(ScenarioRng::new(0).next_u64(), 13_080_132_717_333_068_652);
    }
}
