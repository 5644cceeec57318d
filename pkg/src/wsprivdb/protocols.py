"""Location-private spectrum-query protocols over simulated message channels.

Three runs are offered:

* run_lpdb: the querying device reveals only device characteristics; the
  database answers with a serialized filter of every available entry and
  the device probes it locally.
* run_lpdb_leakage: same, but one grid coordinate is revealed so the
  database only inserts the matching column/row of cells (smaller filter,
  weaker privacy).
* run_lpdbqs: the filter holds MACs under a key shared by device and
  database, travels to a separate query server, and the device probes that
  server with fixed-length MAC strings.

Every message is framed (1-byte kind tag + u32 length + body) and appended
to per-party observation ledgers; privacy assertions are schema checks
over what each party received.  A run is deterministic given its seeds.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from random import Random

from .cuckoo import (
    MAC_LEN,
    CuckooFilter,
    SecretKey,
    derive_params,
    deserialize,
    hmac_probe,
)
from .hashing import hash_bytes, mix64
from .spectrum import (
    DeviceCharacteristics,
    SpectrumDb,
    available_entries,
    encode_query,
    enumerate_param_combinations,
)

LINK_SU_DB = "su_db"
LINK_DB_SU = "db_su"
LINK_DB_QP = "db_qp"
LINK_SU_QP = "su_qp"
LINK_QP_SU = "qp_su"


class PartyId(Enum):
    SU = "su"
    DB = "db"
    QP = "qp"


class CapacityError(RuntimeError):
    """The database's available rows exceed what the sized filter can hold."""


class ProtocolOrderError(RuntimeError):
    """A message arrived before its protocol prerequisite (e.g., probe before filter)."""


# ---------------------------------------------------------------- ledgers


@dataclass(frozen=True)
class LedgerEntry:
    link: str | None  # None marks out-of-band exchange (pre-established key)
    direction: str  # "sent" | "recv"
    kind: str
    payload: bytes

    @property
    def byte_len(self) -> int:
        return len(self.payload)


class ObservationLedger:
    """Append-only record of everything a party sent and received."""

    def __init__(self):
        self._entries: list[LedgerEntry] = []

    def append(self, entry: LedgerEntry) -> None:
        self._entries.append(entry)

    @property
    def entries(self) -> tuple[LedgerEntry, ...]:
        return tuple(self._entries)

    def received(self) -> tuple[LedgerEntry, ...]:
        return tuple(e for e in self._entries if e.direction == "recv")

    def bytes_on_link(self, link: str, direction: str = "recv") -> int:
        return sum(
            e.byte_len for e in self._entries if e.link == link and e.direction == direction
        )


@dataclass
class Party:
    id: PartyId
    ledger: ObservationLedger = field(default_factory=ObservationLedger)


# ---------------------------------------------------------------- wire format

KIND_KEY_EXCHANGE = "key_exchange"
KIND_CHARACTERISTICS = "characteristics_query"
KIND_KEYED_CHARACTERISTICS = "keyed_characteristics_query"
KIND_FILTER_TRANSFER = "filter_transfer"
KIND_HMAC_PROBE = "hmac_probe"
KIND_PROBE_ANSWER = "probe_answer"
KIND_LEAKY_CHARACTERISTICS = "leaky_characteristics_query"

_KIND_TAGS = {
    KIND_CHARACTERISTICS: 1,
    KIND_KEYED_CHARACTERISTICS: 2,
    KIND_FILTER_TRANSFER: 3,
    KIND_HMAC_PROBE: 4,
    KIND_PROBE_ANSWER: 5,
    KIND_LEAKY_CHARACTERISTICS: 6,
}

_CHR = struct.Struct("<BHHHQ")  # device_type, antenna_height, lo, hi, ts
_LEAK = struct.Struct("<BHHHQBI")  # ... + axis, coordinate
_KEYED = struct.Struct("<QBHHHQ")  # key id + characteristics fields


def encode_characteristics(device: DeviceCharacteristics, ts: int) -> bytes:
    lo, hi = device.freq_range
    return _CHR.pack(device.device_type, device.antenna_height_m, lo, hi, ts)


def decode_characteristics(payload: bytes) -> tuple[DeviceCharacteristics, int]:
    if len(payload) != _CHR.size:
        raise ValueError(f"characteristics payload must be {_CHR.size} bytes")
    device_type, height, lo, hi, ts = _CHR.unpack(payload)
    return DeviceCharacteristics(device_type, height, (lo, hi)), ts


def encode_leaky_characteristics(
    device: DeviceCharacteristics, ts: int, axis: str, coord: int
) -> bytes:
    lo, hi = device.freq_range
    return _LEAK.pack(
        device.device_type, device.antenna_height_m, lo, hi, ts,
        {"x": 0, "y": 1}[axis], coord,
    )


def decode_leaky_characteristics(payload: bytes):
    if len(payload) != _LEAK.size:
        raise ValueError(f"leaky characteristics payload must be {_LEAK.size} bytes")
    device_type, height, lo, hi, ts, axis, coord = _LEAK.unpack(payload)
    if axis not in (0, 1):
        raise ValueError(f"bad axis tag {axis}")
    return DeviceCharacteristics(device_type, height, (lo, hi)), ts, "xy"[axis], coord


def key_id_of(key: SecretKey) -> int:
    """Public identifier referencing a pre-established key (not the key)."""
    return hash_bytes(key.key_bytes, 0)


def encode_keyed_characteristics(key_id: int, device: DeviceCharacteristics, ts: int) -> bytes:
    lo, hi = device.freq_range
    return _KEYED.pack(key_id, device.device_type, device.antenna_height_m, lo, hi, ts)


def decode_keyed_characteristics(payload: bytes):
    if len(payload) != _KEYED.size:
        raise ValueError(f"keyed characteristics payload must be {_KEYED.size} bytes")
    key_id, device_type, height, lo, hi, ts = _KEYED.unpack(payload)
    return key_id, DeviceCharacteristics(device_type, height, (lo, hi)), ts


def frame(kind: str, body: bytes) -> bytes:
    return bytes([_KIND_TAGS[kind]]) + len(body).to_bytes(4, "little") + body


def unframe(data: bytes) -> tuple[str, bytes]:
    if len(data) < 5:
        raise ValueError("frame too short")
    tags = {v: k for k, v in _KIND_TAGS.items()}
    if data[0] not in tags:
        raise ValueError(f"unknown kind tag {data[0]}")
    length = int.from_bytes(data[1:5], "little")
    body = data[5:]
    if length != len(body):
        raise ValueError(f"frame length field {length} != body length {len(body)}")
    return tags[data[0]], body


def sigma_qr_bytes(protocol: str = "lpdb") -> int:
    """Measured on-the-wire size of the characteristics query."""
    device = DeviceCharacteristics()
    if protocol == "lpdb":
        return len(frame(KIND_CHARACTERISTICS, encode_characteristics(device, 0)))
    if protocol == "lpdb-leak":
        return len(frame(KIND_LEAKY_CHARACTERISTICS,
                         encode_leaky_characteristics(device, 0, "x", 0)))
    if protocol == "lpdbqs":
        return len(frame(KIND_KEYED_CHARACTERISTICS,
                         encode_keyed_characteristics(0, device, 0)))
    raise ValueError(f"unknown protocol {protocol!r}")


# ---------------------------------------------------------------- sensing


@dataclass
class SensingOracle:
    """Channel sensing against ground truth with configurable accuracy."""

    db: SpectrumDb
    accuracy: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must be in [0, 1], got {self.accuracy}")
        self._rng = Random(self.rng_seed)
        self.calls = 0

    def sense(self, cell: tuple[int, int], chn: int) -> bool:
        self.calls += 1
        truth = bool(self.db.avl[self.db.grid.cell_index(*cell), chn])
        if self._rng.random() < self.accuracy:
            return truth
        return not truth


def sense(oracle: SensingOracle, cell: tuple[int, int], chn: int) -> bool:
    return oracle.sense(cell, chn)


# ---------------------------------------------------------------- run results


@dataclass(frozen=True)
class Decision:
    """Outcome of one query round: a confirmed channel or busy."""

    chn: int | None
    params: tuple[int, ...] | None
    probes_used: int
    sensing_calls: int

    @property
    def available(self) -> bool:
        return self.chn is not None

    @property
    def outcome(self) -> tuple:
        if self.chn is None:
            return ("busy",)
        return ("available", self.chn, self.params)

    def label(self) -> str:
        if self.chn is None:
            return "busy"
        return f"chn={self.chn};params=" + "-".join(str(v) for v in self.params)


RUN_CSV_COLUMNS = (
    "protocol", "m", "n_ch", "rho", "epsilon", "beta", "alpha",
    "bytes_su_db", "bytes_db_su", "bytes_db_qp", "bytes_su_qp",
    "inserts", "lookups", "hmacs", "sensing_calls", "probes", "decision",
)


@dataclass
class RunStats:
    protocol: str
    m: int
    n_ch: int
    rho: float
    epsilon: float
    beta: int
    alpha: float
    bytes_su_db: int = 0
    bytes_db_su: int = 0
    bytes_db_qp: int = 0
    bytes_su_qp: int = 0
    bytes_qp_su: int = 0  # answers; tracked but not a CSV column
    inserts: int = 0
    lookups: int = 0
    hmacs: int = 0
    sensing_calls: int = 0
    probes: int = 0
    decision: str = ""

    def csv_row(self) -> list:
        return [getattr(self, c) for c in RUN_CSV_COLUMNS]


@dataclass
class ProtocolRun:
    decision: Decision
    stats: RunStats
    ledgers: dict[PartyId, ObservationLedger]


@dataclass(frozen=True)
class FilterConfig:
    """Filter shape used by the database; capacity comes from the retrieval."""

    epsilon: float = 1e-8
    beta: int = 4
    alpha: float = 0.95
    max_kicks: int = 500


# ---------------------------------------------------------------- database side


_BUILD_ATTEMPTS = 8


def build_filter(
    entries: list[bytes], config: FilterConfig, seed: int, key: SecretKey | None = None
) -> tuple[CuckooFilter, int]:
    """Insert every encoded entry into a freshly sized filter.

    With a key, entries are stored as their MACs.  A fill near the design
    load can stall on small tables; the build then restarts with a rotated
    hash seed (size and wire format unchanged).  CapacityError means no
    attempt could hold the rows: the filter shape is mis-sized.
    """
    params = derive_params(
        config.epsilon, config.beta, config.alpha, max(1, len(entries)), config.max_kicks
    )
    macs = [hmac_probe(key, x) for x in entries] if key is not None else entries
    last = 0
    for attempt in range(_BUILD_ATTEMPTS):
        filt = CuckooFilter(params, seed=seed if attempt == 0 else mix64(seed + attempt))
        for i, x in enumerate(macs):
            if not filt.insert(x):
                last = i
                break
        else:
            return filt, len(entries)
    raise CapacityError(
        f"filter full after {last} of {len(entries)} entries "
        f"({_BUILD_ATTEMPTS} seeds tried)"
    )


class DbServer:
    """Database-side state: ground truth plus built-filter caches.

    Filters depend only on (characteristics, ts[, axis/coord][, key]), so
    they are built once and reused across queries; construction is offline
    work from the querier's point of view.  Cached serialized blobs keep
    reported build stats identical for every query they serve.
    """

    def __init__(self, db: SpectrumDb, config: FilterConfig, seed: int = 0):
        self.db = db
        self.config = config
        self.seed = seed
        self._entry_cache: dict = {}
        self._filter_cache: dict = {}

    def _entries(self, device: DeviceCharacteristics, ts: int,
                 axis: str | None = None, coord: int | None = None) -> list[bytes]:
        ck = (device, ts, axis, coord)
        if ck not in self._entry_cache:
            self._entry_cache[ck] = available_entries(
                self.db, device, ts, fixed_axis=axis, fixed_coord=coord
            )
        return self._entry_cache[ck]

    def _filter_seed(self, *context) -> int:
        return hash_bytes(repr(context).encode(), self.seed)

    def lpdb_filter(self, device: DeviceCharacteristics, ts: int,
                    axis: str | None = None, coord: int | None = None):
        ck = (device, ts, axis, coord)
        if ck not in self._filter_cache:
            entries = self._entries(device, ts, axis, coord)
            filt, n = build_filter(entries, self.config, self._filter_seed(ck))
            self._filter_cache[ck] = (filt.serialize(), n)
        return self._filter_cache[ck]

    def lpdbqs_filter(self, device: DeviceCharacteristics, ts: int, key: SecretKey):
        ck = (device, ts, key.key_bytes)
        if ck not in self._filter_cache:
            entries = self._entries(device, ts)
            filt, n = build_filter(entries, self.config, self._filter_seed(device, ts),
                                   key=key)
            self._filter_cache[ck] = (filt.serialize(), n)
        return self._filter_cache[ck]

    def precompute_lpdbqs(self, device: DeviceCharacteristics, ts: int,
                          keys: list[SecretKey]) -> None:
        """Offline multi-key variant: one keyed filter per pooled key."""
        for key in keys:
            self.lpdbqs_filter(device, ts, key)


class QueryServer:
    """Third party holding the keyed filter and answering MAC probes."""

    def __init__(self):
        self._filter: CuckooFilter | None = None

    def receive_filter(self, blob: bytes) -> None:
        self._filter = deserialize(blob)

    def answer(self, probe: bytes) -> bool:
        if self._filter is None:
            raise ProtocolOrderError("probe arrived before any filter transfer")
        return self._filter.lookup(probe)


# ---------------------------------------------------------------- key exchange


def key_exchange(su: Party, db: Party, rng: Random, kappa: int = 256) -> SecretKey:
    """Pre-established shared key; lands only in the SU and DB ledgers."""
    key = SecretKey.generate(rng, kappa)
    for party in (su, db):
        party.ledger.append(LedgerEntry(None, "recv", KIND_KEY_EXCHANGE, key.key_bytes))
    return key


# ---------------------------------------------------------------- protocol runs


def _send(sender: Party, receiver: Party, link: str, kind: str, body: bytes,
          stats: RunStats) -> None:
    framed = frame(kind, body)
    sender.ledger.append(LedgerEntry(link, "sent", kind, framed))
    receiver.ledger.append(LedgerEntry(link, "recv", kind, framed))
    setattr(stats, f"bytes_{link}", getattr(stats, f"bytes_{link}") + len(framed))


def _probe_loop(filt_lookup, su_cell, device, ts, grid, sensing, stats, on_probe=None):
    """Ascending channels, then parameter combinations; first confirmed hit wins."""
    lx, ly = su_cell
    combos = enumerate_param_combinations(grid)
    probes = 0
    sensing_before = sensing.calls
    for chn in device.channels(grid):
        for combo in combos:
            y = encode_query(lx, ly, chn, ts, combo)
            probes += 1
            stats.probes += 1
            if on_probe is not None:
                y = on_probe(y)
            stats.lookups += 1
            if filt_lookup(y):
                stats.sensing_calls += 1
                if sensing.sense(su_cell, chn):
                    return Decision(chn, combo, probes, sensing.calls - sensing_before)
    return Decision(None, None, probes, sensing.calls - sensing_before)


def _new_stats(protocol: str, db: SpectrumDb, config: FilterConfig) -> RunStats:
    return RunStats(
        protocol=protocol,
        m=db.grid.m,
        n_ch=db.grid.n_ch,
        rho=db.rho_target,
        epsilon=config.epsilon,
        beta=config.beta,
        alpha=config.alpha,
    )


def run_lpdb(
    db: SpectrumDb,
    su_cell: tuple[int, int],
    device: DeviceCharacteristics,
    ts: int,
    config: FilterConfig,
    sensing: SensingOracle,
    server: DbServer | None = None,
) -> ProtocolRun:
    """Two-party protocol: characteristics out, whole-area filter back."""
    db.grid.cell_index(*su_cell)  # position must lie inside the grid
    su, dbp = Party(PartyId.SU), Party(PartyId.DB)
    stats = _new_stats("lpdb", db, config)
    if server is None:
        server = DbServer(db, config)

    _send(su, dbp, LINK_SU_DB, KIND_CHARACTERISTICS,
          encode_characteristics(device, ts), stats)
    blob, n_inserts = server.lpdb_filter(device, ts)
    stats.inserts += n_inserts
    _send(dbp, su, LINK_DB_SU, KIND_FILTER_TRANSFER, blob, stats)

    filt = deserialize(blob)  # SU-side view of the transferred filter
    decision = _probe_loop(filt.lookup, su_cell, device, ts, db.grid, sensing, stats)
    stats.decision = decision.label()
    return ProtocolRun(decision, stats, {PartyId.SU: su.ledger, PartyId.DB: dbp.ledger})


def run_lpdb_leakage(
    db: SpectrumDb,
    su_cell: tuple[int, int],
    device: DeviceCharacteristics,
    ts: int,
    revealed_axis: str,
    config: FilterConfig,
    sensing: SensingOracle,
    server: DbServer | None = None,
) -> ProtocolRun:
    """LPDB variant revealing one grid coordinate to shrink the filter."""
    if revealed_axis not in ("x", "y"):
        raise ValueError(f"revealed_axis must be 'x' or 'y', got {revealed_axis!r}")
    db.grid.cell_index(*su_cell)
    su, dbp = Party(PartyId.SU), Party(PartyId.DB)
    stats = _new_stats("lpdb-leak", db, config)
    if server is None:
        server = DbServer(db, config)

    coord = su_cell[0] if revealed_axis == "x" else su_cell[1]
    _send(su, dbp, LINK_SU_DB, KIND_LEAKY_CHARACTERISTICS,
          encode_leaky_characteristics(device, ts, revealed_axis, coord), stats)
    blob, n_inserts = server.lpdb_filter(device, ts, axis=revealed_axis, coord=coord)
    stats.inserts += n_inserts
    _send(dbp, su, LINK_DB_SU, KIND_FILTER_TRANSFER, blob, stats)

    filt = deserialize(blob)
    decision = _probe_loop(filt.lookup, su_cell, device, ts, db.grid, sensing, stats)
    stats.decision = decision.label()
    return ProtocolRun(decision, stats, {PartyId.SU: su.ledger, PartyId.DB: dbp.ledger})


def run_lpdbqs(
    db: SpectrumDb,
    su_cell: tuple[int, int],
    device: DeviceCharacteristics,
    ts: int,
    key_rng: Random,
    config: FilterConfig,
    sensing: SensingOracle,
    server: DbServer | None = None,
    key: SecretKey | None = None,
) -> ProtocolRun:
    """Three-party protocol: keyed filter to the query server, MAC probes.

    A fresh key is exchanged per run unless one is supplied (the
    precomputed-pool variant).
    """
    db.grid.cell_index(*su_cell)
    su, dbp, qp = Party(PartyId.SU), Party(PartyId.DB), Party(PartyId.QP)
    stats = _new_stats("lpdbqs", db, config)
    if server is None:
        server = DbServer(db, config)

    if key is None:
        key = key_exchange(su, dbp, key_rng)
    else:
        for party in (su, dbp):
            party.ledger.append(LedgerEntry(None, "recv", KIND_KEY_EXCHANGE, key.key_bytes))

    _send(su, dbp, LINK_SU_DB, KIND_KEYED_CHARACTERISTICS,
          encode_keyed_characteristics(key_id_of(key), device, ts), stats)
    blob, n_inserts = server.lpdbqs_filter(device, ts, key)
    stats.inserts += n_inserts
    stats.hmacs += n_inserts  # one MAC per stored entry on the database side
    _send(dbp, qp, LINK_DB_QP, KIND_FILTER_TRANSFER, blob, stats)

    qp_server = QueryServer()
    qp_server.receive_filter(blob)

    def probe(y: bytes) -> bytes:
        y_k = hmac_probe(key, y)
        stats.hmacs += 1
        _send(su, qp, LINK_SU_QP, KIND_HMAC_PROBE, y_k, stats)
        return y_k

    def qp_lookup(y_k: bytes) -> bool:
        hit = qp_server.answer(y_k)
        _send(qp, su, LINK_QP_SU, KIND_PROBE_ANSWER, b"\x01" if hit else b"\x00", stats)
        return hit

    decision = _probe_loop(qp_lookup, su_cell, device, ts, db.grid, sensing, stats,
                           on_probe=probe)
    stats.decision = decision.label()
    return ProtocolRun(
        decision, stats,
        {PartyId.SU: su.ledger, PartyId.DB: dbp.ledger, PartyId.QP: qp.ledger},
    )


# ---------------------------------------------------------------- privacy checks


@dataclass
class PrivacyReport:
    protocol: str
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


_ALLOWED_RECV = {
    "lpdb": {
        PartyId.DB: {KIND_CHARACTERISTICS},
        PartyId.SU: {KIND_FILTER_TRANSFER},
        PartyId.QP: set(),
    },
    "lpdb-leak": {
        PartyId.DB: {KIND_LEAKY_CHARACTERISTICS},
        PartyId.SU: {KIND_FILTER_TRANSFER},
        PartyId.QP: set(),
    },
    "lpdbqs": {
        PartyId.DB: {KIND_KEY_EXCHANGE, KIND_KEYED_CHARACTERISTICS},
        PartyId.SU: {KIND_KEY_EXCHANGE, KIND_PROBE_ANSWER},
        PartyId.QP: {KIND_FILTER_TRANSFER, KIND_HMAC_PROBE},
    },
}


def assert_privacy(ledgers: dict[PartyId, ObservationLedger], protocol: str) -> PrivacyReport:
    """Schema-level audit of what each party observed during a run.

    Every received message must be of an allowed kind for the party, parse
    exactly (no spare bytes where location data could hide), and re-encode
    to the identical byte string.  MAC probes must be fixed length.
    """
    if protocol not in _ALLOWED_RECV:
        raise ValueError(f"unknown protocol {protocol!r}")
    violations: list[str] = []
    allowed = _ALLOWED_RECV[protocol]

    for party_id, ledger in ledgers.items():
        for entry in ledger.received():
            if entry.kind not in allowed.get(party_id, set()):
                violations.append(
                    f"{party_id.value}: unexpected {entry.kind!r} in ledger"
                )
                continue
            if entry.kind == KIND_KEY_EXCHANGE:
                continue  # out-of-band, SU/DB only by the whitelist above
            try:
                kind, body = unframe(entry.payload)
            except ValueError as e:
                violations.append(f"{party_id.value}: bad frame for {entry.kind}: {e}")
                continue
            if kind != entry.kind:
                violations.append(
                    f"{party_id.value}: frame tag {kind!r} disagrees with {entry.kind!r}"
                )
                continue
            violations.extend(
                f"{party_id.value}: {v}" for v in _audit_body(entry.kind, body)
            )
    return PrivacyReport(protocol, violations)


def _audit_body(kind: str, body: bytes) -> list[str]:
    if kind == KIND_CHARACTERISTICS:
        try:
            device, ts = decode_characteristics(body)
        except ValueError as e:
            return [f"characteristics query does not decompose into chr+ts: {e}"]
        if encode_characteristics(device, ts) != body:
            return ["characteristics query carries bytes beyond chr+ts"]
    elif kind == KIND_LEAKY_CHARACTERISTICS:
        try:
            device, ts, axis, coord = decode_leaky_characteristics(body)
        except ValueError as e:
            return [f"leaky query does not decompose into chr+ts+one coordinate: {e}"]
        if encode_leaky_characteristics(device, ts, axis, coord) != body:
            return ["leaky query carries bytes beyond chr+ts+one coordinate"]
    elif kind == KIND_KEYED_CHARACTERISTICS:
        try:
            key_id, device, ts = decode_keyed_characteristics(body)
        except ValueError as e:
            return [f"keyed query does not decompose into key id+chr+ts: {e}"]
        if encode_keyed_characteristics(key_id, device, ts) != body:
            return ["keyed query carries bytes beyond key id+chr+ts"]
    elif kind == KIND_HMAC_PROBE:
        if len(body) != MAC_LEN:
            return [f"MAC probe length {len(body)} != {MAC_LEN}"]
    elif kind == KIND_PROBE_ANSWER:
        if body not in (b"\x00", b"\x01"):
            return ["probe answer must be a single boolean byte"]
    elif kind == KIND_FILTER_TRANSFER:
        try:
            deserialize(body)
        except ValueError as e:
            return [f"filter transfer does not parse: {e}"]
    return []
