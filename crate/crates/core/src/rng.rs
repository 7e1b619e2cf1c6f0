//! Per-trial random streams.
//!
//! A trial's generator depends only on `(master_seed, domain, trial)`, so
//! trials can be evaluated in any order or on any thread and still produce
//! identical data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type TrialRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Combines a master seed with a domain tag (experiment, sweep point, ...).
pub fn derive_seed(master_seed: u64, domain: u64) -> u64 {
    splitmix64(master_seed ^ splitmix64(domain))
}

/// Generator for trial `trial` of stream `domain`; the trial index selects
/// one of ChaCha's 2^64 independent streams.
pub fn trial_rng(master_seed: u64, domain: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, domain));
    rng.set_stream(trial);
    rng
}

/// Stable domain tag for a labelled sweep point.
pub fn domain_tag(label: &str, index: u64) -> u64 {
    // FNV-1a over the label, then mixed with the point index
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    splitmix64(h ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}
