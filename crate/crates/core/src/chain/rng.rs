use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in output metadata. Bump on any change to the draw layout.
pub const RNG_ALGORITHM: &str = "chacha8-v1";

/// Counter-based random source for one trajectory.
///
/// Trajectory `j` of seed `s` reads ChaCha8 stream `j` of the key derived
/// from `s` by `ChaCha8Rng::seed_from_u64`. The draw for player `i` on the
/// transition out of step `t` (first profile is step 0) is the 64-bit word
/// pair starting at word position `2 * (n * t + i)`. Every player consumes
/// its draw whether or not it moves, so any (trajectory, step, player) draw
/// can be located without replaying earlier steps.
#[derive(Debug, Clone)]
pub struct TrajectoryRng {
    inner: ChaCha8Rng,
    num_players: u128,
}

impl TrajectoryRng {
    pub fn new(seed: u64, stream: u64, num_players: usize) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        TrajectoryRng {
            inner,
            num_players: num_players as u128,
        }
    }

    /// Positions the generator at the first draw of step `step`.
    pub fn seek(&mut self, step: u64) {
        self.inner.set_word_pos(2 * self.num_players * step as u128);
    }

    /// Index in `0..len` from one 64-bit draw (multiply-shift; bias below `len / 2^64`).
    pub fn draw(&mut self, len: usize) -> usize {
        debug_assert!(len > 0);
        ((self.inner.next_u64() as u128 * len as u128) >> 64) as usize
    }
}
