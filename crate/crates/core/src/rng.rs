//! Counter-based random streams.
//!
//! Every random quantity is drawn from a ChaCha stream addressed by
//! `(master seed, scope path, tag, stream id)`. Streams never depend on
//! scheduling order, so parallel replications reproduce bit-identically.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Distinct tags give independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Tag {
    FieldCount = 1,
    FieldPosition = 2,
    Uniform = 3,
    Pinned = 4,
    Reference = 5,
    Pairs = 6,
    Auxiliary = 7,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    scope: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey { seed, scope: 0 }
    }

    /// Derive a sub-key, e.g. per experiment, per T, per replication.
    pub fn child(self, label: u64) -> Self {
        StreamKey {
            seed: self.seed,
            scope: splitmix(self.scope ^ splitmix(label.wrapping_add(0x5151))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn rng(&self, tag: Tag, stream: u64) -> ChaCha8Rng {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.scope.to_le_bytes());
        bytes[16..24].copy_from_slice(&(tag as u64).to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(bytes);
        rng.set_stream(stream);
        rng
    }

    /// Stream attached to cell `(i, j)` of a grid.
    pub fn cell_rng(&self, tag: Tag, i: usize, j: usize) -> ChaCha8Rng {
        self.rng(tag, ((i as u64) << 32) | j as u64)
    }
}

/// Uniform on the open interval (0, 1).
pub fn open01<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}
