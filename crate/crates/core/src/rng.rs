//! Seed derivation and the simulation RNG.
//!
//! Every random stream in the crate is derived from a master seed through a
//! SplitMix64-style counter hash, so replica `i` sees the same numbers no
//! matter how replicas are scheduled across threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::Exp1;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SimRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream tags used when splitting a replica seed.
pub mod stream {
    pub const ENVIRONMENT: u64 = 0x0065_6e76;
    pub const DYNAMICS: u64 = 0x0064_796e;
    pub const WALKER: u64 = 0x77_6c6b;
    pub const AUX: u64 = 0x617578;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Seed(pub u64);

impl Seed {
    /// Child seed for `tag`. Distinct tags give statistically independent streams.
    #[inline]
    pub fn derive(self, tag: u64) -> Seed {
        Seed(mix64(
            self.0 ^ mix64(tag.wrapping_mul(GOLDEN).wrapping_add(GOLDEN)),
        ))
    }

    pub fn replica(self, index: u64) -> Seed {
        self.derive(index).derive(0x7265_706c)
    }

    pub fn rng(self) -> SimRng {
        SimRng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// Uniform draw on the open interval (0, 1).
#[inline]
pub fn open01<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw on [0, 1).
#[inline]
pub fn unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Exponential waiting time with the given rate (ziggurat sampler).
#[inline]
pub fn exp_gap<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

#[inline]
pub fn index<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    rng.random_range(0..n)
}
