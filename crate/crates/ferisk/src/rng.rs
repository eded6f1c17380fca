//! Deterministic random number generation.
//!
//! Everything stochastic in this crate (synthetic panels, bootstrap
//! resampling, train/test splits, forest subsampling, network init) draws from
//! [`Rng`], a SplitMix64 generator with Box-Muller normals. Both algorithms
//! are fixed here rather than taken from an external crate so that a seed
//! written into a report reproduces the exact same bytes on any platform and
//! any future toolchain.

/// SplitMix64 output scrambler (Steele, Lea & Flood 2014).
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Seeded SplitMix64 stream with cached Box-Muller normals.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
    spare_normal: Option<f64>,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            state: seed,
            spare_normal: None,
        }
    }

    /// Deterministic sub-stream `stream` of a master seed.
    ///
    /// Used to give each ticker, tree or bootstrap replicate its own
    /// independent stream, so that parallel work consumes no shared generator
    /// and results do not depend on scheduling.
    pub fn derive(seed: u64, stream: u64) -> Self {
        Rng::new(
            mix(seed.wrapping_add(GOLDEN_GAMMA))
                ^ mix(stream.wrapping_mul(GOLDEN_GAMMA) ^ 0x5851_F42D_4C95_7F2D),
        )
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`; safe as a logarithm argument.
    fn next_f64_open_zero(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Unbiased uniform index in `[0, n)` via 128-bit multiply-shift.
    pub fn next_index(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_index needs a non-empty range");
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// Standard normal draw via the Box-Muller transform.
    ///
    /// Each pair of uniforms `(u1, u2)` yields `sqrt(-2 ln u1) * cos(2 pi u2)`
    /// and the matching sine; the second value is cached for the next call.
    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.next_f64_open_zero();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_index(i + 1);
            items.swap(i, j);
        }
    }
}
