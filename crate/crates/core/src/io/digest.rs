//! Content digest for reproducibility tagging of result files.

/// 64-bit FNV-1a hash, hex-encoded. Used to tie every result file to the
/// exact configuration bytes that produced it; not a cryptographic hash.
pub fn fnv1a64_hex(bytes: &[u8]) -> String {
    const OFFSET: u64 = 0xcbf29ce484222325;
    const PRIME: u64 = 0x100000001b3;
    let mut hash = OFFSET;
    for b in bytes {
        hash ^= *b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    format!("{hash:016x}")
}
