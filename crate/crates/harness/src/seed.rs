//! Per-run seeds that depend only on the run's coordinates.

use lowmem_core::ProtocolId;

/// One step of the SplitMix64 generator, used as a 64-bit mixer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repetition `rep` of the cell `(protocol, n, p)`.
pub fn run_seed(seed_base: u64, protocol: ProtocolId, n: u64, p: f64, rep: u32) -> u64 {
    let tag = protocol
        .as_str()
        .bytes()
        .fold(0u64, |h, b| splitmix64(h ^ b as u64));
    [tag, n, p.to_bits(), rep as u64]
        .into_iter()
        .fold(splitmix64(seed_base), |h, x| splitmix64(h ^ x))
}
