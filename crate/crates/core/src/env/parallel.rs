//! Discrete-time exclusion with parallel updating: alternating sweeps over
//! the even and the odd edges of an even torus, each edge exchanging its
//! endpoints with probability 1/2.
//!
//! Randomness is consumed one `u64` per block of 64 cells; the edge starting
//! at cell `i` swaps iff bit `i % 64` of block `i / 64` is set. The byte-per-cell
//! and the bit-packed implementations share this layout and stay identical.

use rand::RngCore;

use super::occupancy::{Boundary, Occupancy, Window};
use crate::error::{invalid, Result};
use crate::rng::{Seed, SimRng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn other(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    #[inline]
    fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    #[inline]
    fn start_mask(self) -> u64 {
        match self {
            Parity::Even => 0x5555_5555_5555_5555,
            Parity::Odd => 0xAAAA_AAAA_AAAA_AAAA,
        }
    }
}

fn check_even_torus(window: &Window) -> Result<()> {
    if window.boundary != Boundary::Torus {
        return Err(invalid("parallel updating needs a torus"));
    }
    if !window.len.is_multiple_of(2) || window.len < 2 {
        return Err(invalid(format!(
            "parallel updating needs an even torus length, got {}",
            window.len
        )));
    }
    Ok(())
}

pub(crate) fn sweep_cells<R: RngCore + ?Sized>(cells: &mut [u8], parity: Parity, rng: &mut R) {
    let n = cells.len();
    for block in 0..n.div_ceil(64) {
        let r = rng.next_u64();
        let lo = block * 64;
        let hi = (lo + 64).min(n);
        let mut i = lo + parity.bit();
        while i < hi {
            if (r >> (i - lo)) & 1 == 1 {
                let j = if i + 1 == n { 0 } else { i + 1 };
                cells.swap(i, j);
            }
            i += 2;
        }
    }
}

/// One sweep of the given parity, driven by `seed`.
pub fn parallel_exclusion_step(env: &Occupancy, parity: Parity, seed: Seed) -> Result<Occupancy> {
    check_even_torus(&env.window())?;
    let mut out = env.clone();
    sweep_cells(out.cells_mut(), parity, &mut seed.rng());
    out.set_time(env.time() + 1.0);
    Ok(out)
}

/// Bit-packed ring of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PackedRing {
    words: Vec<u64>,
    len: usize,
}

impl PackedRing {
    pub fn from_cells(cells: &[u8]) -> Self {
        let mut words = vec![0u64; cells.len().div_ceil(64)];
        for (i, &c) in cells.iter().enumerate() {
            words[i / 64] |= (c as u64 & 1) << (i % 64);
        }
        PackedRing {
            words,
            len: cells.len(),
        }
    }

    pub fn to_cells(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Same transition and random-number consumption as [`sweep_cells`].
    pub fn sweep<R: RngCore + ?Sized>(&mut self, parity: Parity, rng: &mut R) {
        let nw = self.words.len();
        let mask = parity.start_mask();
        for k in 0..nw {
            let r = rng.next_u64();
            let used = (self.len - 64 * k).min(64);
            // in-word edges start at bits 0..used-2
            let valid = if used == 64 {
                !(1u64 << 63)
            } else {
                (1u64 << (used - 1)) - 1
            };
            let w = self.words[k];
            let d = (w ^ (w >> 1)) & mask & valid & r;
            self.words[k] = w ^ d ^ (d << 1);
            let last = used - 1;
            if last % 2 == parity.bit() && (r >> last) & 1 == 1 {
                let nk = if k + 1 == nw { 0 } else { k + 1 };
                let a = (self.words[k] >> last) & 1;
                let b = self.words[nk] & 1;
                if a != b {
                    self.words[k] ^= 1 << last;
                    self.words[nk] ^= 1;
                }
            }
        }
    }
}

/// Parallel-update exclusion on an even torus. One unit of time is a full
/// update: a sweep over the edges whose left end is an even site, then a sweep
/// over the rest. Advancing a single parity per step would lock the sweep
/// parity to the parity of a walker's position.
#[derive(Clone, Debug)]
pub struct DiscreteExclusion {
    ring: PackedRing,
    window: Window,
    first: Parity,
    steps: u64,
    rng: SimRng,
}

impl DiscreteExclusion {
    pub fn new(occ: &Occupancy, seed: Seed) -> Result<Self> {
        check_even_torus(&occ.window())?;
        Ok(DiscreteExclusion {
            ring: PackedRing::from_cells(occ.cells()),
            window: occ.window(),
            first: if occ.offset().rem_euclid(2) == 0 {
                Parity::Even
            } else {
                Parity::Odd
            },
            steps: 0,
            rng: seed.rng(),
        })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn step(&mut self) {
        self.ring.sweep(self.first, &mut self.rng);
        self.ring.sweep(self.first.other(), &mut self.rng);
        self.steps += 1;
    }

    /// State of `site`; leaving the window is an error, never a wrap.
    #[inline]
    pub fn occupied(&self, site: i64) -> Result<bool> {
        Ok(self.ring.get(self.window.index(site)?))
    }

    pub fn to_occupancy(&self) -> Occupancy {
        let mut occ =
            Occupancy::from_cells(self.window.offset, Boundary::Torus, self.ring.to_cells())
                .expect("ring cells are binary");
        occ.set_time(self.steps as f64);
        occ
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::occupancy::bernoulli_init;

    #[test]
    fn rejects_odd_or_frozen_windows() {
        let odd = Occupancy::filled(Window::torus(7).unwrap(), false);
        assert!(parallel_exclusion_step(&odd, Parity::Even, Seed(1)).is_err());
        let frozen = Occupancy::filled(Window::new(0, 8, Boundary::Frozen).unwrap(), false);
        assert!(parallel_exclusion_step(&frozen, Parity::Even, Seed(1)).is_err());
    }

    #[test]
    fn all_ones_fixed_and_alternating_conserves() {
        let ones = Occupancy::filled(Window::torus(10).unwrap(), true);
        assert_eq!(
            parallel_exclusion_step(&ones, Parity::Odd, Seed(3))
                .unwrap()
                .cells(),
            ones.cells()
        );
        let alt = Occupancy::from_cells(
            0,
            Boundary::Torus,
            (0..12).map(|i| (i % 2 == 0) as u8).collect(),
        )
        .unwrap();
        let mut cur = alt.clone();
        let mut parity = Parity::Even;
        for s in 0..50 {
            cur = parallel_exclusion_step(&cur, parity, Seed(s)).unwrap();
            parity = parity.other();
            assert_eq!(cur.particle_count(), 6);
        }
    }

    #[test]
    fn packed_matches_plain() {
        for &len in &[2usize, 4, 62, 64, 66, 128, 130, 200] {
            let w = Window::torus(len).unwrap();
            let occ = bernoulli_init(0.5, w, Seed(len as u64)).unwrap();
            let mut cells = occ.cells().to_vec();
            let mut ring = PackedRing::from_cells(&cells);
            let (mut r1, mut r2) = (Seed(11).rng(), Seed(11).rng());
            let mut parity = Parity::Even;
            for _ in 0..40 {
                sweep_cells(&mut cells, parity, &mut r1);
                ring.sweep(parity, &mut r2);
                assert_eq!(ring.to_cells(), cells, "len {len}");
                parity = parity.other();
            }
        }
    }

    #[test]
    fn discrete_exclusion_window_errors() {
        let occ = Occupancy::filled(Window::new(-3, 8, Boundary::Torus).unwrap(), true);
        let dx = DiscreteExclusion::new(&occ, Seed(1)).unwrap();
        assert!(dx.occupied(-3).unwrap());
        assert!(dx.occupied(100).is_err());
    }
}
