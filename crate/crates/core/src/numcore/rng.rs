//! Seeded pseudo-random numbers.
//!
//! xoshiro256++ with SplitMix64 seed expansion. Both generators are tiny,
//! well studied, and give the same stream on every platform, which is all
//! we need: weight init, shuffles, and sampling must be reproducible from
//! a single `u64` seed.

/// Deterministic random number generator.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    /// Builds a generator from a seed. Equal seeds give equal streams.
    pub fn new(seed: u64) -> Self {
        // SplitMix64 expands the seed into the 256-bit state. The expansion
        // cannot produce the all-zero state xoshiro must avoid.
        let mut x = seed;
        let mut s = [0u64; 4];
        for slot in s.iter_mut() {
            x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = x;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            *slot = z ^ (z >> 31);
        }
        Rng { s }
    }

    /// Next raw 64-bit output (xoshiro256++).
    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform f64 in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0f64 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `[0, n)`, unbiased via rejection.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    /// Standard normal sample. Consumes exactly two raw draws.
    ///
    /// Box-Muller, keeping only the cosine branch so that the consumption
    /// per call is fixed at two `next_u64` outputs. Fixed consumption keeps
    /// downstream sampling aligned regardless of the values drawn.
    pub fn gaussian(&mut self) -> f64 {
        // Shift into (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0f64 / (1u64 << 53) as f64);
        let u2 = (self.next_u64() >> 11) as f64 * (1.0f64 / (1u64 << 53) as f64);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fills `out` with standard normal samples, two raw draws per sample.
    pub fn fill_gaussian(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.gaussian();
        }
    }

    /// `n` standard normal samples as a fresh vector.
    pub fn gaussian_vec(&mut self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        self.fill_gaussian(&mut out);
        out
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(43);
        let first: Vec<u64> = (0..8).map(|_| Rng::new(42).next_u64()).collect();
        assert!(first.iter().any(|&v| v != c.next_u64()));
    }

    #[test]
    fn uniform_in_range_and_spread() {
        let mut rng = Rng::new(7);
        let mut lo = 0usize;
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
            if u < 0.5 {
                lo += 1;
            }
        }
        // 10k draws, p = 1/2: five sigma is ~250.
        assert!((4750..=5250).contains(&lo), "lo half count {lo}");
    }

    #[test]
    fn below_is_unbiased_enough() {
        let mut rng = Rng::new(11);
        let mut counts = [0usize; 7];
        for _ in 0..70_000 {
            counts[rng.below(7)] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            assert!((9500..=10500).contains(&c), "bucket {k} count {c}");
        }
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(3);
        let n = 200_000usize;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..n {
            let g = rng.gaussian();
            sum += g;
            sumsq += g * g;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        // Standard error of the mean is ~0.0022; of the variance ~0.0032.
        assert!(mean.abs() < 0.012, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn gaussian_consumption_is_fixed() {
        let mut a = Rng::new(5);
        let mut b = Rng::new(5);
        let _ = a.gaussian();
        b.next_u64();
        b.next_u64();
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::new(9);
        let mut xs: Vec<usize> = (0..100).collect();
        rng.shuffle(&mut xs);
        let mut sorted = xs.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..100).collect::<Vec<_>>());
        assert_ne!(xs, (0..100).collect::<Vec<_>>());
    }
}
