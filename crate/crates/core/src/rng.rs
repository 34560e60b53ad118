//! Seeded pseudorandom stream shared by every stochastic routine.
//!
//! The generator is PCG-XSL-RR 128/64 in its multiplicative form
//! (`pcg64_fast`, [`rand_pcg::Pcg64Mcg`]). A 64-bit seed is expanded into the
//! 128-bit state with `rand_core`'s `seed_from_u64`. The whole generator state
//! is one odd `u128`, which is what checkpoints persist.
//!
//! Two derived draws are defined on top of the raw `u64` stream, each
//! consuming whole `u64` outputs:
//!
//! * [`RngState::uniform`] takes the top 53 bits of one output, giving a real
//!   in `[0, 1)` on the `2^-53` grid.
//! * [`RngState::below`] maps one output into `[0, n)` by widening
//!   multiplication (Lemire). Outputs landing in the biased low zone are
//!   rejected and redrawn, which happens with probability below `n / 2^64`.

use rand_core::{Rng, SeedableRng};
use rand_pcg::Pcg64Mcg;

const UNIT: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngState {
    inner: Pcg64Mcg,
    index_draws: u64,
    real_draws: u64,
}

impl RngState {
    pub fn seed_from_u64(seed: u64) -> Self {
        Self::with_generator(Pcg64Mcg::seed_from_u64(seed))
    }

    /// Rebuilds a generator from a value previously returned by [`Self::state`].
    pub fn from_state(state: u128) -> Self {
        Self::with_generator(Pcg64Mcg::new(state))
    }

    fn with_generator(inner: Pcg64Mcg) -> Self {
        Self {
            inner,
            index_draws: 0,
            real_draws: 0,
        }
    }

    pub fn state(&self) -> u128 {
        self.inner.state()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform real in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.real_draws += 1;
        (self.inner.next_u64() >> 11) as f64 * UNIT
    }

    /// Uniform integer in `[0, n)`. `n` must be nonzero.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.index_draws += 1;
        let mut wide = u128::from(self.inner.next_u64()) * u128::from(n);
        let mut low = wide as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                wide = u128::from(self.inner.next_u64()) * u128::from(n);
                low = wide as u64;
            }
        }
        (wide >> 64) as u64
    }

    /// Number of [`Self::below`] calls made since construction.
    pub fn index_draws(&self) -> u64 {
        self.index_draws
    }

    /// Number of [`Self::uniform`] calls made since construction.
    pub fn real_draws(&self) -> u64 {
        self.real_draws
    }

    /// Restores draw counters alongside a state from [`Self::from_state`].
    pub fn set_draw_counts(&mut self, index_draws: u64, real_draws: u64) {
        self.index_draws = index_draws;
        self.real_draws = real_draws;
    }
}
