"""Seeded 64-bit mixing hash used for bucket indexes and fingerprints.

The construction is a splitmix64-style finalizer applied per 8-byte
little-endian word, with the byte length folded in at the end.  It is
pure integer arithmetic so the exact same function can be evaluated
inside the jitted benchmark kernels (see bench.py), and results are
identical on every platform and process.
"""

MASK64 = (1 << 64) - 1

GOLDEN = 0x9E3779B97F4A7C15
MIX_P2 = 0xBF58476D1CE4E5B9
MIX_P3 = 0x94D049BB133111EB

# domain tags separating fingerprint and alternate-index derivation
FP_TAG = 0xA5A5A5A5A5A5A5A5
ALT_TAG = 0xC3C3C3C3C3C3C3C3


def mix64(x: int) -> int:
    """splitmix64 finalizer; full avalanche over 64 bits."""
    x &= MASK64
    x ^= x >> 30
    x = (x * MIX_P2) & MASK64
    x ^= x >> 27
    x = (x * MIX_P3) & MASK64
    x ^= x >> 31
    return x


def hash_bytes(data: bytes, seed: int) -> int:
    """Seeded 64-bit hash of a byte string.

    The input is consumed as little-endian 8-byte words (the final word
    zero-padded); the byte length is folded into the finalizer so that
    trailing zero bytes change the result.
    """
    # mix64 inlined: this sits on the insert/lookup hot path
    h = (seed + GOLDEN) & MASK64
    n = len(data)
    # one big little-endian integer, split into 64-bit words by shifting
    acc = int.from_bytes(data, "little")
    for _ in range((n + 7) // 8):
        x = h ^ (acc & MASK64)
        acc >>= 64
        x ^= x >> 30
        x = (x * MIX_P2) & MASK64
        x ^= x >> 27
        x = (x * MIX_P3) & MASK64
        h = x ^ (x >> 31)
    x = h ^ n
    x ^= x >> 30
    x = (x * MIX_P2) & MASK64
    x ^= x >> 27
    x = (x * MIX_P3) & MASK64
    return x ^ (x >> 31)
