//! Named random sub-streams derived from one master seed.
//!
//! Every consumer of randomness (initializations, tie-breaking, label
//! sampling) draws from its own ChaCha stream so that adding draws in one
//! place never shifts the numbers seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Init,
    TieBreak,
    LabelSampling,
    KMeans,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Init => 1,
            Stream::TieBreak => 2,
            Stream::LabelSampling => 3,
            Stream::KMeans => 4,
        }
    }
}

/// Generator for `stream`, further split by `index` (e.g. the initialization number).
pub fn rng(master: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream((stream.id() << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}
