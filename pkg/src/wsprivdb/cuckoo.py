"""Two-choice fingerprint filter with insert/lookup and a keyed (MAC) variant.

Items are stored as short fingerprints in a bucket table; membership tests
may return false positives at a configurable target rate but never false
negatives.  The keyed variant stores the HMAC of each item instead of the
item itself, so a party holding only the MAC output can run a standard
lookup without learning the plaintext.
"""

from __future__ import annotations

import hmac
import math
import random
from array import array
from dataclasses import dataclass

from .hashing import ALT_TAG, FP_TAG, MASK64, hash_bytes, mix64

DEFAULT_MAX_KICKS = 500

MAGIC = b"CKF1"
WIRE_VERSION = 1
HEADER_LEN = 32


class FilterFormatError(ValueError):
    """Raised for malformed or truncated serialized filters."""


@dataclass(frozen=True)
class FilterParams:
    """Sizing parameters of a filter.

    fingerprint_bits and bucket_count are derived via derive_params();
    construct through that function rather than directly.
    """

    epsilon: float
    beta: int
    alpha: float
    capacity_items: int
    max_kicks: int
    fingerprint_bits: int
    bucket_count: int

    @property
    def slot_count(self) -> int:
        return self.bucket_count * self.beta

    def bits_per_item(self) -> float:
        """Nominal storage cost per item in bits (post-ceiling)."""
        return self.fingerprint_bits / self.alpha


def derive_params(
    epsilon: float,
    beta: int,
    alpha: float,
    capacity_items: int,
    max_kicks: int = DEFAULT_MAX_KICKS,
) -> FilterParams:
    """Size a filter for a target false-positive rate and capacity.

    fingerprint_bits = ceil(log2(1/epsilon) + log2(2*beta)); the bucket
    count is the smallest one whose usable capacity (bucket_count * beta
    * alpha) covers capacity_items.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    if beta < 1:
        raise ValueError(f"beta must be >= 1, got {beta}")
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    if capacity_items < 1:
        raise ValueError(f"capacity_items must be >= 1, got {capacity_items}")
    if max_kicks < 0:
        raise ValueError(f"max_kicks must be >= 0, got {max_kicks}")

    bits = math.ceil(math.log2(1.0 / epsilon) + math.log2(2.0 * beta))
    bits = max(bits, 1)
    if bits > 64:
        raise ValueError(f"fingerprint of {bits} bits exceeds the 64-bit slot width")
    bucket_count = math.ceil(capacity_items / (beta * alpha))
    return FilterParams(
        epsilon=epsilon,
        beta=beta,
        alpha=alpha,
        capacity_items=capacity_items,
        max_kicks=max_kicks,
        fingerprint_bits=bits,
        bucket_count=bucket_count,
    )


def fingerprint_of(item_bytes: bytes, params: FilterParams, seed: int) -> int:
    """Fingerprint of an item: never zero (zero marks an empty slot)."""
    if not item_bytes:
        raise ValueError("item must be non-empty")
    h = hash_bytes(item_bytes, seed)
    return _fingerprint_from_hash(h, params.fingerprint_bits)


def _fingerprint_from_hash(h: int, fingerprint_bits: int) -> int:
    fp = mix64(h ^ FP_TAG) & ((1 << fingerprint_bits) - 1)
    return fp if fp != 0 else 1


def alt_index(index: int, fp: int, bucket_count: int) -> int:
    """The other candidate bucket for a fingerprint.

    Involutive for any bucket_count: alt_index(alt_index(i)) == i, so
    relocation needs only the stored fingerprint and current bucket.
    """
    return (mix64(fp ^ ALT_TAG) % bucket_count - index) % bucket_count


def bucket_indexes(
    item_bytes: bytes, fp: int, params: FilterParams, seed: int
) -> tuple[int, int]:
    """Both candidate buckets for an item with fingerprint fp."""
    i1 = hash_bytes(item_bytes, seed) % params.bucket_count
    return i1, alt_index(i1, fp, params.bucket_count)


class CuckooFilter:
    """Fixed-size filter; reports a full table instead of resizing.

    Construction is single-writer.  Once built the filter is immutable in
    practice (no deletion) and safe for concurrent lookups.
    """

    def __init__(self, params: FilterParams, seed: int):
        self.params = params
        self.seed = seed & MASK64
        self.item_count = 0
        self._table = array("Q", bytes(8 * params.slot_count))
        # eviction victims are drawn from a per-filter stream so runs replay
        self._evict_rng = random.Random(mix64(self.seed ^ 0x5EED))

    # -- internal helpers -------------------------------------------------

    def _derive(self, item_bytes: bytes) -> tuple[int, int]:
        if not item_bytes:
            raise ValueError("item must be non-empty")
        h = hash_bytes(item_bytes, self.seed)
        fp = _fingerprint_from_hash(h, self.params.fingerprint_bits)
        return h % self.params.bucket_count, fp

    def _place(self, bucket: int, fp: int) -> bool:
        base = bucket * self.params.beta
        try:
            idx = self._table.index(0, base, base + self.params.beta)
        except ValueError:
            return False
        self._table[idx] = fp
        return True

    # -- public API --------------------------------------------------------

    def insert(self, item_bytes: bytes) -> bool:
        """Insert an item; False means the table is effectively full.

        On False the table is left exactly as it was, so membership of
        previously inserted items is unaffected.
        """
        i1, fp = self._derive(item_bytes)
        bc = self.params.bucket_count
        i2 = alt_index(i1, fp, bc)
        if self._place(i1, fp) or self._place(i2, fp):
            self.item_count += 1
            return True

        beta = self.params.beta
        t = self._table
        cur_bucket = self._evict_rng.choice((i1, i2))
        cur = fp
        undo: list[tuple[int, int]] = []
        for _ in range(self.params.max_kicks):
            idx = cur_bucket * beta + self._evict_rng.randrange(beta)
            undo.append((idx, t[idx]))
            cur, t[idx] = t[idx], cur
            cur_bucket = alt_index(cur_bucket, cur, bc)
            if self._place(cur_bucket, cur):
                self.item_count += 1
                return True
        for idx, old in reversed(undo):
            t[idx] = old
        return False

    def lookup(self, item_bytes: bytes) -> bool:
        """Membership test; reads exactly two buckets, never a false negative."""
        i1, fp = self._derive(item_bytes)
        beta = self.params.beta
        b1 = i1 * beta
        t = self._table
        if fp in t[b1 : b1 + beta]:
            return True
        b2 = alt_index(i1, fp, self.params.bucket_count) * beta
        return fp in t[b2 : b2 + beta]

    def load_factor(self) -> float:
        return self.item_count / self.params.slot_count

    # -- wire format ---------------------------------------------------------
    #
    # little-endian header, 32 bytes fixed:
    #   magic "CKF1" | u16 version=1 | u8 fingerprint_bits | u8 beta
    #   | u64 bucket_count | u64 seed | 8 zero bytes padding
    # then all slots bit-packed LSB-first, bucket 0 slot 0 first, no
    # per-slot padding: slot k occupies payload bits [k*f, (k+1)*f).

    def serialized_len(self) -> int:
        p = self.params
        return HEADER_LEN + (p.slot_count * p.fingerprint_bits + 7) // 8

    def serialize(self) -> bytes:
        p = self.params
        header = (
            MAGIC
            + WIRE_VERSION.to_bytes(2, "little")
            + p.fingerprint_bits.to_bytes(1, "little")
            + p.beta.to_bytes(1, "little")
            + p.bucket_count.to_bytes(8, "little")
            + self.seed.to_bytes(8, "little")
        )
        header = header.ljust(HEADER_LEN, b"\x00")
        return header + _pack_slots(self._table, p.fingerprint_bits)

    @classmethod
    def _from_table(cls, params: FilterParams, seed: int, table: array) -> "CuckooFilter":
        f = cls.__new__(cls)
        f.params = params
        f.seed = seed
        f.item_count = sum(1 for v in table if v)
        f._table = table
        f._evict_rng = random.Random(mix64(seed ^ 0x5EED))
        return f


def deserialize(data: bytes) -> CuckooFilter:
    """Rebuild a filter from its wire form; lookups behave identically."""
    if len(data) < HEADER_LEN:
        raise FilterFormatError("malformed header: too short")
    if data[:4] != MAGIC:
        raise FilterFormatError("malformed header: bad magic")
    version = int.from_bytes(data[4:6], "little")
    if version != WIRE_VERSION:
        raise FilterFormatError(f"malformed header: unsupported version {version}")
    bits = data[6]
    beta = data[7]
    bucket_count = int.from_bytes(data[8:16], "little")
    seed = int.from_bytes(data[16:24], "little")
    if bits < 1 or bits > 64 or beta < 1 or bucket_count < 1:
        raise FilterFormatError("malformed header: bad geometry")
    slot_count = bucket_count * beta
    payload_len = (slot_count * bits + 7) // 8
    if len(data) != HEADER_LEN + payload_len:
        raise FilterFormatError(
            f"truncated payload: expected {HEADER_LEN + payload_len} bytes, got {len(data)}"
        )
    table = _unpack_slots(data[HEADER_LEN:], bits, slot_count)
    # epsilon implied by the stored fingerprint width; alpha/, capacity are
    # not on the wire and are irrelevant to lookups
    params = FilterParams(
        epsilon=(2.0 * beta) / float(1 << bits),
        beta=beta,
        alpha=1.0,
        capacity_items=slot_count,
        max_kicks=DEFAULT_MAX_KICKS,
        fingerprint_bits=bits,
        bucket_count=bucket_count,
    )
    return CuckooFilter._from_table(params, seed, table)


def _pack_slots(table: array, bits: int) -> bytes:
    # slots grouped so each group is byte-aligned: g*bits is a multiple of 8
    g = math.lcm(bits, 8) // bits
    group_bytes = g * bits // 8
    out = bytearray()
    n = len(table)
    for base in range(0, n - n % g, g):
        val = 0
        shift = 0
        for k in range(g):
            val |= table[base + k] << shift
            shift += bits
        out += val.to_bytes(group_bytes, "little")
    tail = n % g
    if tail:
        val = 0
        shift = 0
        for k in range(n - tail, n):
            val |= table[k] << shift
            shift += bits
        out += val.to_bytes(group_bytes, "little")
    return bytes(out[: (n * bits + 7) // 8])


def _unpack_slots(payload: bytes, bits: int, slot_count: int) -> array:
    g = math.lcm(bits, 8) // bits
    group_bytes = g * bits // 8
    mask = (1 << bits) - 1
    table = array("Q", bytes(8 * slot_count))
    padded = payload.ljust(((slot_count + g - 1) // g) * group_bytes, b"\x00")
    pos = 0
    for base in range(0, slot_count, g):
        val = int.from_bytes(padded[pos : pos + group_bytes], "little")
        pos += group_bytes
        for k in range(base, min(base + g, slot_count)):
            table[k] = val & mask
            val >>= bits
    return table


# -- keyed variant -----------------------------------------------------------

DEFAULT_KAPPA = 256
MAC_LEN = 32  # bytes, HMAC-SHA256


@dataclass(frozen=True)
class SecretKey:
    """Uniformly random MAC key of kappa bits (kappa/8 bytes)."""

    key_bytes: bytes

    def __post_init__(self):
        if len(self.key_bytes) < 1:
            raise ValueError("empty key")

    @property
    def kappa(self) -> int:
        return 8 * len(self.key_bytes)

    @classmethod
    def generate(cls, rng: random.Random, kappa: int = DEFAULT_KAPPA) -> "SecretKey":
        if kappa % 8 != 0 or kappa < 8:
            raise ValueError(f"kappa must be a positive multiple of 8, got {kappa}")
        return cls(rng.randbytes(kappa // 8))


def hmac_probe(key: SecretKey, item_bytes: bytes) -> bytes:
    """MAC of an item; the value stored/queried by the keyed filter path."""
    return hmac.digest(key.key_bytes, item_bytes, "sha256")


def keyed_insert(filt: CuckooFilter, key: SecretKey, item_bytes: bytes) -> bool:
    """Insert the MAC of an item: identical to insert(hmac_probe(key, item))."""
    return filt.insert(hmac_probe(key, item_bytes))
