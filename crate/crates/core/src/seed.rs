use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Child seed for stream `stream` of `master`. Distinct streams of the same
/// master give independent ChaCha sequences.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}
