//! Stable seed derivation.
//!
//! Every random stream in a sweep is keyed by a 64-bit seed derived from the
//! master seed and the integer coordinates of the work unit. The mixing
//! function is SplitMix64's finalizer, so derived seeds are identical on every
//! platform and independent of scheduling.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of words into a seed. Order matters.
pub fn stable_hash(master: u64, parts: &[u64]) -> u64 {
    let mut h = mix64(master.wrapping_add(GOLDEN_GAMMA));
    for (i, &p) in parts.iter().enumerate() {
        let step = GOLDEN_GAMMA.wrapping_mul(i as u64 + 2);
        h = mix64(h ^ mix64(p.wrapping_add(step)));
    }
    h
}

/// Seed of one Monte Carlo run inside a sweep.
pub fn run_seed(master: u64, policy_index: usize, fraction_index: usize, run_index: usize) -> u64 {
    stable_hash(
        master,
        &[policy_index as u64, fraction_index as u64, run_index as u64],
    )
}

/// Independent sub-stream of a run seed (e.g. point process vs. firewall choice).
pub fn substream(seed: u64, stream: u64) -> u64 {
    stable_hash(seed, &[stream])
}
