//! Counter-based random streams.
//!
//! Every draw is a pure function of `(master_seed, realization, substream,
//! draw index)`: the stream key is derived by hashing the first three, and
//! the n-th output is the SplitMix64 finalizer applied to `key + n * GAMMA`.
//! Streams never share state, so extra draws on one substream cannot perturb
//! another, and worker scheduling in a parallel ensemble cannot perturb any
//! realization.

use rand_core::{impls, RngCore};

use super::EngineError;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Named substreams of a realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Substream {
    Demographics,
    Transmission,
    Vaccination,
    Fertility,
    Compliance,
    Initialization,
    NaturalHistory,
    Reporting,
    Survey,
}

impl Substream {
    pub const ALL: [Substream; 9] = [
        Substream::Demographics,
        Substream::Transmission,
        Substream::Vaccination,
        Substream::Fertility,
        Substream::Compliance,
        Substream::Initialization,
        Substream::NaturalHistory,
        Substream::Reporting,
        Substream::Survey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Substream::Demographics => "demographics",
            Substream::Transmission => "transmission",
            Substream::Vaccination => "vaccination",
            Substream::Fertility => "fertility",
            Substream::Compliance => "compliance",
            Substream::Initialization => "initialization",
            Substream::NaturalHistory => "natural_history",
            Substream::Reporting => "reporting",
            Substream::Survey => "survey",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One keyed stream. Cloning a stream clones its position.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(master_seed: u64, realization: u64, name: &str) -> Self {
        let mut key = mix64(master_seed ^ 0x5151_5151_0000_0001);
        key = mix64(key ^ realization.wrapping_mul(GAMMA));
        key = mix64(key ^ fnv1a(name.as_bytes()));
        RngStream { key, counter: 0 }
    }

    /// Output at an arbitrary index without advancing the stream.
    pub fn peek(&self, index: u64) -> u64 {
        mix64(
            self.key
                .wrapping_add(index.wrapping_add(1).wrapping_mul(GAMMA)),
        )
    }

    /// Number of 64-bit draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.counter
    }

    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        let v = self.peek(self.counter);
        self.counter += 1;
        v
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_raw() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1].
    #[inline]
    pub fn uniform_pos(&mut self) -> f64 {
        ((self.next_raw() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform index in `0..n`; `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // Lemire's multiply-shift; bias is below 2^-32 for the sizes used here.
        ((u128::from(self.next_raw()) * n as u128) >> 64) as usize
    }

    /// Waiting time of a Poisson process with the given rate (per year).
    pub fn exponential(&mut self, rate: f64) -> Result<f64, EngineError> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(EngineError::InvalidRate(rate));
        }
        Ok(-self.uniform_pos().ln() / rate)
    }

    /// Index `i` with probability `weights[i] / sum(weights)`.
    pub fn categorical(&mut self, weights: &[f64]) -> Result<usize, EngineError> {
        let total = validate_weights(weights)?;
        let target = self.uniform() * total;
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w > 0.0 {
                last_positive = i;
                acc += w;
                if target < acc {
                    return Ok(i);
                }
            }
        }
        Ok(last_positive)
    }
}

pub(crate) fn validate_weights(weights: &[f64]) -> Result<f64, EngineError> {
    if weights.is_empty() || weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(EngineError::InvalidWeights);
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(EngineError::InvalidWeights);
    }
    Ok(total)
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        (self.next_raw() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.next_raw()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        impls::fill_bytes_via_next(self, dst)
    }
}

/// All substreams of one realization.
#[derive(Debug, Clone)]
pub struct RngRegistry {
    master_seed: u64,
    realization: u64,
    streams: Vec<RngStream>,
}

impl RngRegistry {
    pub fn new(master_seed: u64, realization: u64) -> Self {
        let streams = Substream::ALL
            .iter()
            .map(|s| RngStream::new(master_seed, realization, s.name()))
            .collect();
        RngRegistry {
            master_seed,
            realization,
            streams,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn realization(&self) -> u64 {
        self.realization
    }

    pub fn stream(&mut self, which: Substream) -> &mut RngStream {
        &mut self.streams[which.index()]
    }
}
