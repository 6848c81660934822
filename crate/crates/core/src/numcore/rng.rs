//! Seeded SplitMix64 streams.
//!
//! Stream derivation is fully documented so that reruns match bit-exactly:
//! `split_stream(seed, label)` sets the state to
//! `splitmix64_mix(seed XOR fnv1a64(label))`, after which every draw is one
//! published SplitMix64 step. Distinct labels give independent-behaving
//! streams; callers must not share one `Rng` between concurrent tasks.

use super::Real;
use crate::{Error, Result};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// One SplitMix64 output step applied to `x`: add the golden-ratio
/// increment, then the two multiply-xorshift mixing rounds.
pub fn splitmix64_mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes; used only to fold labels into seeds.
pub fn fnv1a64(label: &str) -> u64 {
    let mut h = FNV_OFFSET;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derives the stream for `label` from a master seed.
pub fn split_stream(master_seed: u64, label: &str) -> Rng {
    Rng::from_state(splitmix64_mix(master_seed ^ fnv1a64(label)))
}

/// Deterministic SplitMix64 generator. Identical state implies an
/// identical output sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn from_state(state: u64) -> Self {
        Rng { state }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Next raw 64-bit output (one SplitMix64 step).
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Unbiased integer in `[0, n)` via Lemire's multiply-shift with
    /// rejection: draw `x`, form the 128-bit product `x*n`, and reject
    /// while the low word falls below `2^64 mod n`.
    pub fn uniform_int(&mut self, n: u64) -> Result<u64> {
        if n == 0 {
            return Err(Error::Config("uniform_int requires n >= 1".into()));
        }
        let mut x = self.next_u64();
        let mut m = u128::from(x) * u128::from(n);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = u128::from(x) * u128::from(n);
                low = m as u64;
            }
        }
        Ok((m >> 64) as u64)
    }

    /// Uniform in `[0, 1)` using the top 53 bits.
    pub fn unit<R: Real>(&mut self) -> R {
        let u = (self.next_u64() >> 11) as f64 * 2f64.powi(-53);
        R::from_f64_lossy(u)
    }

    /// Uniform strictly inside `(0, 1)`; the half-step offset keeps both
    /// endpoints unreachable.
    pub fn open_unit<R: Real>(&mut self) -> R {
        let u = ((self.next_u64() >> 11) as f64 + 0.5) * 2f64.powi(-53);
        R::from_f64_lossy(u)
    }

    /// Standard normal via Box-Muller on two fresh uniforms.
    pub fn gaussian<R: Real>(&mut self) -> R {
        let u1 = ((self.next_u64() >> 11) as f64 + 1.0) * 2f64.powi(-53); // (0, 1]
        let u2 = (self.next_u64() >> 11) as f64 * 2f64.powi(-53); // [0, 1)
        let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        R::from_f64_lossy(z)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self
                .uniform_int(i as u64 + 1)
                .expect("nonzero bound") as usize;
            items.swap(i, j);
        }
    }
}
