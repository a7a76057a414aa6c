//! Counter-based hashing used for every random draw in the crate.
//!
//! A draw is a pure function of its key, so the order in which draws are
//! requested (or the thread that requests them) never changes the result.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes a seed together with an arbitrary list of counters.
pub fn hash_key(seed: u64, counters: &[u64]) -> u64 {
    counters
        .iter()
        .fold(mix64(seed), |acc, &c| mix64(acc ^ mix64(c.wrapping_add(GOLDEN))))
}

/// Uniform draw in `[0, 1)` with 53 bits of resolution.
pub fn unit_f64(seed: u64, counters: &[u64]) -> f64 {
    (hash_key(seed, counters) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_are_in_unit_interval_and_key_sensitive() {
        let a = unit_f64(1, &[2, 3]);
        let b = unit_f64(1, &[3, 2]);
        let c = unit_f64(2, &[2, 3]);
        assert!((0.0..1.0).contains(&a));
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, unit_f64(1, &[2, 3]));
    }

    #[test]
    fn mean_is_close_to_one_half() {
        let n = 100_000u64;
        let mean: f64 = (0..n).map(|i| unit_f64(99, &[i])).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }
}
