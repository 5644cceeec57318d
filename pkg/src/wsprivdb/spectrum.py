"""Grid-modeled geo-location spectrum database and canonical byte encodings.

The coverage area is a side x side grid of cells; every (cell, channel)
pair has an availability bit and transmission parameters.  Ground truth is
synthesized at a target availability fraction.  Entries and queries share
one fixed-width encoding so that a query string equals a database entry's
string exactly when the guessed tuple matches a row; that byte equality is
what lets a filter lookup emulate the database response.
"""

from __future__ import annotations

import csv
import itertools
import struct
from dataclasses import dataclass

import numpy as np

DEFAULT_N_CHANNELS = 31

# default single transmission parameter: max EIRP, encoded as enum 0..2
EIRP_MILLIWATTS = (40, 100, 4000)
DEFAULT_PARAM_DOMAINS = ((0, 1, 2),)

_ENTRY_HEAD = struct.Struct("<IIHQB")  # lx, ly, chn, ts, param_count
_ENTRY_PARAM = struct.Struct("<BI")  # param_id, value


@dataclass(frozen=True)
class GridSpec:
    """Coverage grid: side x side cells, n_ch channels per cell."""

    side: int
    n_ch: int = DEFAULT_N_CHANNELS
    ts_granularity: str = "epoch-day"
    param_domains: tuple[tuple[int, ...], ...] = DEFAULT_PARAM_DOMAINS

    def __post_init__(self):
        if self.side < 1:
            raise ValueError(f"side must be >= 1, got {self.side}")
        if self.n_ch < 1:
            raise ValueError(f"n_ch must be >= 1, got {self.n_ch}")
        if not self.param_domains or any(len(d) < 1 for d in self.param_domains):
            raise ValueError("every parameter domain must be non-empty")

    @property
    def m(self) -> int:
        return self.side * self.side

    def cell_index(self, lx: int, ly: int) -> int:
        if not (0 <= lx < self.side and 0 <= ly < self.side):
            raise ValueError(f"cell ({lx},{ly}) outside {self.side}x{self.side} grid")
        return lx * self.side + ly


@dataclass(frozen=True)
class DbRow:
    lx: int
    ly: int
    ts: int
    chn: int
    avl: int
    params: tuple[int, ...]


@dataclass(frozen=True)
class DeviceCharacteristics:
    """Device-specific query fields; deliberately contains no location."""

    device_type: int = 0
    antenna_height_m: int = 10
    freq_range: tuple[int, int] = (0, DEFAULT_N_CHANNELS - 1)

    def __post_init__(self):
        lo, hi = self.freq_range
        if lo > hi:
            raise ValueError(f"freq_range low {lo} > high {hi}")
        if lo < 0:
            raise ValueError("freq_range channels must be >= 0")

    def channels(self, grid: GridSpec) -> range:
        lo, hi = self.freq_range
        if hi >= grid.n_ch:
            raise ValueError(f"freq_range high {hi} outside 0..{grid.n_ch - 1}")
        return range(lo, hi + 1)


@dataclass
class SpectrumDb:
    """Dense ground truth: avl[cell, chn] and params[cell, chn, param_id]."""

    grid: GridSpec
    avl: np.ndarray
    params: np.ndarray
    rho_target: float

    def availability_fraction(self) -> float:
        return float(self.avl.mean())

    def row(self, lx: int, ly: int, chn: int, ts: int = 0) -> DbRow:
        cell = self.grid.cell_index(lx, ly)
        return DbRow(
            lx=lx,
            ly=ly,
            ts=ts,
            chn=chn,
            avl=int(self.avl[cell, chn]),
            params=tuple(int(v) for v in self.params[cell, chn]),
        )


def generate_ground_truth(grid: GridSpec, rho: float, rng_seed: int) -> SpectrumDb:
    """Synthesize availability: each (cell, channel) independently available
    with probability rho; parameters drawn uniformly from their domains."""
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must be in [0, 1], got {rho}")
    rng = np.random.default_rng(rng_seed)
    avl = (rng.random((grid.m, grid.n_ch)) < rho).astype(np.uint8)
    params = np.empty((grid.m, grid.n_ch, len(grid.param_domains)), dtype=np.uint32)
    for i, domain in enumerate(grid.param_domains):
        choices = np.asarray(domain, dtype=np.uint32)
        params[:, :, i] = choices[rng.integers(0, len(domain), size=(grid.m, grid.n_ch))]
    return SpectrumDb(grid=grid, avl=avl, params=params, rho_target=rho)


def retrieve(db: SpectrumDb, device: DeviceCharacteristics, ts: int = 0) -> list[DbRow]:
    """All rows whose channel is inside the device's frequency range."""
    side = db.grid.side
    out = []
    for chn in device.channels(db.grid):
        for cell in range(db.grid.m):
            out.append(
                DbRow(
                    lx=cell // side,
                    ly=cell % side,
                    ts=ts,
                    chn=chn,
                    avl=int(db.avl[cell, chn]),
                    params=tuple(int(v) for v in db.params[cell, chn]),
                )
            )
    return out


def available_entries(
    db: SpectrumDb,
    device: DeviceCharacteristics,
    ts: int = 0,
    fixed_axis: str | None = None,
    fixed_coord: int | None = None,
) -> list[bytes]:
    """Encoded x_j strings of every available row matching the device range.

    fixed_axis/"x"|"y" with fixed_coord restricts rows to one revealed grid
    coordinate (the reduced retrieval of the leakage variant).
    """
    side = db.grid.side
    lo, hi = device.freq_range
    device.channels(db.grid)  # range validation
    sub = db.avl[:, lo : hi + 1]
    cells, offs = np.nonzero(sub)
    if fixed_axis is not None:
        if fixed_coord is None:
            raise ValueError("fixed_coord required with fixed_axis")
        axis_vals = cells // side if fixed_axis == "x" else cells % side
        keep = axis_vals == fixed_coord
        cells, offs = cells[keep], offs[keep]
    out = []
    for cell, off in zip(cells.tolist(), offs.tolist()):
        chn = lo + off
        out.append(
            encode_query(
                cell // side,
                cell % side,
                chn,
                ts,
                tuple(int(v) for v in db.params[cell, chn]),
            )
        )
    return out


def encode_entry(row: DbRow, grid: GridSpec) -> bytes:
    """Canonical bytes of an available row; refuses unavailable rows."""
    if row.avl != 1:
        raise ValueError("only available rows (avl=1) are encoded")
    grid.cell_index(row.lx, row.ly)
    if not 0 <= row.chn < grid.n_ch:
        raise ValueError(f"channel {row.chn} outside 0..{grid.n_ch - 1}")
    return encode_query(row.lx, row.ly, row.chn, row.ts, row.params)


def encode_query(lx: int, ly: int, chn: int, ts: int, params: tuple[int, ...]) -> bytes:
    """Fixed-width little-endian layout shared by entries and queries:

    u32 lx | u32 ly | u16 chn | u64 ts | u8 param_count | (u8 id, u32 value)*
    """
    head = _ENTRY_HEAD.pack(lx, ly, chn, ts, len(params))
    if len(params) == 1:  # hot path in the probe loop
        return head + _ENTRY_PARAM.pack(0, params[0])
    return head + b"".join(
        _ENTRY_PARAM.pack(i, v) for i, v in enumerate(params)
    )


def decode_entry(data: bytes) -> DbRow:
    """Inverse of encode_entry; the encoding is injective over its domain."""
    if len(data) < _ENTRY_HEAD.size:
        raise ValueError("entry too short")
    lx, ly, chn, ts, count = _ENTRY_HEAD.unpack_from(data, 0)
    expected = _ENTRY_HEAD.size + count * _ENTRY_PARAM.size
    if len(data) != expected:
        raise ValueError(f"entry length {len(data)} != expected {expected}")
    params = []
    for i in range(count):
        pid, value = _ENTRY_PARAM.unpack_from(data, _ENTRY_HEAD.size + i * _ENTRY_PARAM.size)
        if pid != i:
            raise ValueError(f"param ids must be 0..{count - 1} in order")
        params.append(value)
    return DbRow(lx=lx, ly=ly, ts=ts, chn=chn, avl=1, params=tuple(params))


def enumerate_param_combinations(grid: GridSpec) -> list[tuple[int, ...]]:
    """Every parameter tuple in deterministic (lexicographic) order."""
    return list(itertools.product(*grid.param_domains))


# ---------------------------------------------------------------- CSV dump/load


def dump_csv(db: SpectrumDb, fileobj, ts: int = 0) -> None:
    """One row per (cell, channel): lx,ly,ts,chn,avl,param0[,param1...]."""
    n_params = db.params.shape[2]
    writer = csv.writer(fileobj, lineterminator="\n")
    writer.writerow(["lx", "ly", "ts", "chn", "avl"] + [f"param{i}" for i in range(n_params)])
    side = db.grid.side
    for cell in range(db.grid.m):
        lx, ly = cell // side, cell % side
        for chn in range(db.grid.n_ch):
            writer.writerow(
                [lx, ly, ts, chn, int(db.avl[cell, chn])]
                + [int(v) for v in db.params[cell, chn]]
            )


def load_csv(fileobj, param_domains=DEFAULT_PARAM_DOMAINS) -> tuple[SpectrumDb, int]:
    """Rebuild a SpectrumDb from dump_csv output; returns (db, ts)."""
    reader = csv.reader(fileobj)
    header = next(reader, None)
    if not header or header[:5] != ["lx", "ly", "ts", "chn", "avl"]:
        raise ValueError("bad ground-truth CSV header")
    n_params = len(header) - 5
    rows = [[int(v) for v in r] for r in reader if r]
    if not rows:
        raise ValueError("empty ground-truth CSV")
    side = max(r[0] for r in rows) + 1
    n_ch = max(r[3] for r in rows) + 1
    ts_values = {r[2] for r in rows}
    if len(ts_values) != 1:
        raise ValueError("ground-truth CSV must hold a single timestamp")
    grid = GridSpec(side=side, n_ch=n_ch, param_domains=param_domains)
    if len(rows) != grid.m * n_ch:
        raise ValueError(f"expected {grid.m * n_ch} rows, got {len(rows)}")
    avl = np.zeros((grid.m, n_ch), dtype=np.uint8)
    params = np.zeros((grid.m, n_ch, n_params), dtype=np.uint32)
    for r in rows:
        cell = grid.cell_index(r[0], r[1])
        avl[cell, r[3]] = r[4]
        params[cell, r[3]] = r[5 : 5 + n_params]
    db = SpectrumDb(grid=grid, avl=avl, params=params, rho_target=float(avl.mean()))
    return db, ts_values.pop()
