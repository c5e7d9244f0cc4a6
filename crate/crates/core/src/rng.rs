//! Fully specified pseudo-random streams, so splits and fixtures can be
//! reproduced bit for bit in any language.
//!
//! * Seeding: `state = splitmix64(seed)`; a zero state is replaced by `GOLDEN`.
//! * `splitmix64(x)`: `z = x + 0x9E3779B97F4A7C15`;
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`;
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`; return `z ^ (z >> 31)`
//!   (all arithmetic wrapping mod 2^64).
//! * Step (xorshift64*): `x ^= x >> 12; x ^= x << 25; x ^= x >> 27`;
//!   output `x * 0x2545F4914F6CDD1D`.
//! * Bounded integer in `[0, n)`: high 64 bits of the 128-bit product `next() * n`.
//! * Uniform in `[0, 1)`: `(next() >> 11) * 2^-53`.
//! * Standard normal: Box–Muller, cosine branch only. Draw `u1`, `u2`;
//!   return `sqrt(-2 ln(1 - u1)) * cos(2π u2)`.
//! * Shuffle: Fisher–Yates from the back, `for i in (1..n).rev() { swap(i, bounded(i + 1)) }`.
//! * Derived seeds: `derive_seed(seed, tag) = splitmix64(seed + tag * 0x9E3779B97F4A7C15)`.

pub const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const XORSHIFT_MULTIPLIER: u64 = 0x2545_F491_4F6C_DD1D;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent seed for sub-stream `tag` of `seed`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed.wrapping_add(tag.wrapping_mul(GOLDEN)))
}

#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        let state = match splitmix64(seed) {
            0 => GOLDEN,
            s => s,
        };
        XorShift64Star { state }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(XORSHIFT_MULTIPLIER)
    }

    /// Integer in `[0, n)`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
