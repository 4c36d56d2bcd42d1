//! Small text and hashing helpers used across modules.
//!
//! Everything here is deterministic across platforms and releases; seeds,
//! checksums, and scorer/embedder behavior all route through these functions.

/// Lowercased alphanumeric runs: `"has_brother?"` becomes `["has", "brother"]`.
///
/// This is the tokenizer used by the lexical scorer and the hashed embedder,
/// where splitting on underscores and punctuation inside labels matters.
pub fn alnum_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            for lc in ch.to_lowercase() {
                cur.push(lc);
            }
        } else if !cur.is_empty() {
            out.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

/// FNV-1a 64-bit hash. Stable across platforms, unlike `DefaultHasher`.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// SplitMix64 finalizer; used to mix seeds with id hashes.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-question seed: a pure function of the master seed and the question id,
/// so scheduling order cannot influence any question's random choices.
pub fn question_seed(master_seed: u64, question_id: &str) -> u64 {
    mix64(master_seed ^ fnv1a64(question_id.as_bytes()))
}

/// Round to two decimals, half away from zero. All reported percentages use this.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
