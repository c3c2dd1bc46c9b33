//! Counter-based random streams.
//!
//! Every random draw of the simulator is addressed by the triple
//! `(seed, trajectory index, event index)`. The ChaCha8 block function is a
//! keyed counter-mode generator: the key is derived from `seed`, the 64-bit
//! stream selector is the trajectory index, and the word position is
//! `event_index · 2^32`. A trajectory's `m`-th event therefore always sees
//! the same numbers, no matter which thread simulates it or in which order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kinematics::UnitVector;

/// Words reserved per event (2^32 32-bit words).
const EVENT_STRIDE_SHIFT: u32 = 32;

/// Reserved event index for initial conditions; trajectories never reach it.
pub const INITIAL_EVENT: u64 = 1 << 35;

/// Random stream for event `event` of trajectory `trajectory` under `seed`.
pub fn event_stream(seed: u64, trajectory: u64, event: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory);
    rng.set_word_pos((event as u128) << EVENT_STRIDE_SHIFT);
    rng
}

/// Stream used to draw a trajectory's initial condition (reserved event index).
pub fn initial_stream(seed: u64, trajectory: u64) -> ChaCha8Rng {
    event_stream(seed, trajectory, INITIAL_EVENT)
}

/// Uniform draw on `(0, 1]`.
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Standard exponential draw.
pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

/// Uniform point on S² (Archimedes: the height is uniform on [-1, 1]).
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R) -> UnitVector {
    let z = 2.0 * rng.gen::<f64>() - 1.0;
    let phi = std::f64::consts::TAU * rng.gen::<f64>();
    let r = ((1.0 - z) * (1.0 + z)).max(0.0).sqrt();
    let (s, c) = phi.sin_cos();
    // Renormalise to absorb rounding in r.
    let (x, y) = (r * c, r * s);
    let n = x.hypot(y).hypot(z);
    UnitVector {
        o1: x / n,
        o2: y / n,
        o3: z / n,
    }
}
