/// SplitMix64 finalizer; a bijection on u64.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for run `run` of condition `condition` under `master`.
///
/// For fixed `(master, condition)` the map from `run` is a bijection, so runs
/// of one condition never share a seed.
pub fn derive_seed(master: u64, condition: u64, run: u64) -> u64 {
    let base = mix(mix(master).wrapping_add(condition.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
    mix(base ^ run.wrapping_mul(0xd6e8_feb8_6659_fd93))
}
