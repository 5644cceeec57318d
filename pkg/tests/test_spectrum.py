import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wsprivdb.spectrum import (
    DbRow,
    DeviceCharacteristics,
    GridSpec,
    available_entries,
    decode_entry,
    dump_csv,
    encode_entry,
    encode_query,
    enumerate_param_combinations,
    generate_ground_truth,
    load_csv,
    retrieve,
)


def full_range_device(grid: GridSpec) -> DeviceCharacteristics:
    return DeviceCharacteristics(freq_range=(0, grid.n_ch - 1))


# ---------------------------------------------------------------- generation


def test_rho_zero_and_one():
    grid = GridSpec(side=8, n_ch=5)
    assert generate_ground_truth(grid, 0.0, 1).avl.sum() == 0
    assert generate_ground_truth(grid, 1.0, 1).avl.sum() == grid.m * grid.n_ch


def test_rho_realized_fraction():
    # 0.068 on a 64x64 grid with 31 channels, binomial 6-sigma band
    grid = GridSpec(side=64, n_ch=31)
    db = generate_ground_truth(grid, 0.068, 7)
    assert 0.058 <= db.availability_fraction() <= 0.078


def test_generation_deterministic_per_seed():
    grid = GridSpec(side=10, n_ch=4)
    a = generate_ground_truth(grid, 0.3, 5)
    b = generate_ground_truth(grid, 0.3, 5)
    c = generate_ground_truth(grid, 0.3, 6)
    assert np.array_equal(a.avl, b.avl) and np.array_equal(a.params, b.params)
    assert not np.array_equal(a.avl, c.avl)


def test_rho_out_of_range():
    with pytest.raises(ValueError):
        generate_ground_truth(GridSpec(side=2), -0.1, 0)
    with pytest.raises(ValueError):
        generate_ground_truth(GridSpec(side=2), 1.1, 0)


def test_params_drawn_from_domain():
    grid = GridSpec(side=16, n_ch=8)
    db = generate_ground_truth(grid, 0.5, 9)
    assert set(np.unique(db.params)) <= {0, 1, 2}


# ---------------------------------------------------------------- retrieval


def test_retrieve_full_range():
    grid = GridSpec(side=6, n_ch=7)
    db = generate_ground_truth(grid, 0.2, 11)
    rows = retrieve(db, full_range_device(grid))
    assert len(rows) == grid.m * grid.n_ch


def test_retrieve_partial_range():
    grid = GridSpec(side=6, n_ch=31)
    db = generate_ground_truth(grid, 0.2, 12)
    rows = retrieve(db, DeviceCharacteristics(freq_range=(4, 13)))
    assert len(rows) == grid.m * 10
    assert all(4 <= r.chn <= 13 for r in rows)


def test_retrieve_minimum_one_channel():
    grid = GridSpec(side=4, n_ch=5)
    db = generate_ground_truth(grid, 0.2, 13)
    rows = retrieve(db, DeviceCharacteristics(freq_range=(2, 2)))
    assert len(rows) == grid.m


def test_freq_range_validation():
    with pytest.raises(ValueError):
        DeviceCharacteristics(freq_range=(5, 3))
    grid = GridSpec(side=2, n_ch=4)
    with pytest.raises(ValueError):
        DeviceCharacteristics(freq_range=(0, 9)).channels(grid)


def test_available_entries_match_bruteforce():
    grid = GridSpec(side=5, n_ch=6)
    db = generate_ground_truth(grid, 0.4, 14)
    device = DeviceCharacteristics(freq_range=(1, 4))
    got = set(available_entries(db, device, ts=3))
    want = {
        encode_entry(r, grid)
        for r in retrieve(db, device, ts=3)
        if r.avl == 1
    }
    assert got == want


def test_available_entries_fixed_axis():
    grid = GridSpec(side=5, n_ch=6)
    db = generate_ground_truth(grid, 0.4, 15)
    device = full_range_device(grid)
    per_column = available_entries(db, device, fixed_axis="x", fixed_coord=2)
    assert all(decode_entry(e).lx == 2 for e in per_column)
    full = available_entries(db, device)
    assert set(per_column) == {e for e in full if decode_entry(e).lx == 2}


# ---------------------------------------------------------------- encodings


def test_encode_length_single_param():
    row = DbRow(lx=1, ly=2, ts=3, chn=4, avl=1, params=(0,))
    assert len(encode_entry(row, GridSpec(side=4, n_ch=8))) == 24


def test_encode_rejects_unavailable():
    row = DbRow(lx=1, ly=2, ts=3, chn=4, avl=0, params=(0,))
    with pytest.raises(ValueError, match="avl"):
        encode_entry(row, GridSpec(side=4, n_ch=8))


def test_entry_query_byte_equality():
    grid = GridSpec(side=4, n_ch=8)
    row = DbRow(lx=3, ly=0, ts=77, chn=5, avl=1, params=(2,))
    assert encode_entry(row, grid) == encode_query(3, 0, 5, 77, (2,))


def test_encodings_differ_by_field():
    base = encode_query(1, 2, 3, 4, (0,))
    assert encode_query(1, 2, 4, 4, (0,)) != base  # chn
    assert encode_query(1, 2, 3, 5, (0,)) != base  # ts
    assert encode_query(2, 1, 3, 4, (0,)) != base  # swapped coords
    assert encode_query(1, 2, 3, 4, (1,)) != base  # params


def test_encoding_injective_exhaustive():
    # 4x4 grid, 2 channels, 1 ts, 3 param values: all tuples distinct
    seen = {}
    for lx, ly, chn, p in itertools.product(range(4), range(4), range(2), range(3)):
        blob = encode_query(lx, ly, chn, 1, (p,))
        assert blob not in seen, f"collision {seen.get(blob)} vs {(lx, ly, chn, p)}"
        seen[blob] = (lx, ly, chn, p)
    assert len(seen) == 4 * 4 * 2 * 3


@settings(max_examples=200, deadline=None)
@given(
    st.integers(0, 2**32 - 1),
    st.integers(0, 2**32 - 1),
    st.integers(0, 2**16 - 1),
    st.integers(0, 2**64 - 1),
    st.lists(st.integers(0, 2**32 - 1), min_size=1, max_size=4),
)
def test_entry_roundtrip(lx, ly, chn, ts, params):
    row = DbRow(lx=lx, ly=ly, ts=ts, chn=chn, avl=1, params=tuple(params))
    assert decode_entry(encode_query(lx, ly, chn, ts, tuple(params))) == row


def test_decode_rejects_trailing_bytes():
    blob = encode_query(1, 2, 3, 4, (0,))
    with pytest.raises(ValueError):
        decode_entry(blob + b"\x00")


# ---------------------------------------------------------------- param combos


def test_default_param_combinations():
    combos = enumerate_param_combinations(GridSpec(side=2))
    assert combos == [(0,), (1,), (2,)]


def test_singleton_domain():
    grid = GridSpec(side=2, param_domains=((7,),))
    assert enumerate_param_combinations(grid) == [(7,)]


def test_two_domains_lexicographic():
    grid = GridSpec(side=2, param_domains=((0, 1, 2), (0, 1, 2)))
    combos = enumerate_param_combinations(grid)
    assert len(combos) == 9
    assert combos == sorted(combos)
    assert combos[0] == (0, 0) and combos[-1] == (2, 2)


def test_query_enumeration_size_per_cell():
    grid = GridSpec(side=2, n_ch=31)
    assert grid.n_ch * len(enumerate_param_combinations(grid)) == 93


# ---------------------------------------------------------------- CSV


def test_csv_roundtrip():
    grid = GridSpec(side=5, n_ch=4)
    db = generate_ground_truth(grid, 0.25, 21)
    buf = io.StringIO()
    dump_csv(db, buf, ts=9)
    buf.seek(0)
    loaded, ts = load_csv(buf)
    assert ts == 9
    assert loaded.grid.side == 5 and loaded.grid.n_ch == 4
    assert np.array_equal(loaded.avl, db.avl)
    assert np.array_equal(loaded.params, db.params)


def test_csv_header_shape():
    grid = GridSpec(side=2, n_ch=2)
    db = generate_ground_truth(grid, 0.5, 22)
    buf = io.StringIO()
    dump_csv(db, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "lx,ly,ts,chn,avl,param0"
    assert len(lines) == 1 + grid.m * grid.n_ch


def test_csv_rejects_bad_header():
    with pytest.raises(ValueError, match="header"):
        load_csv(io.StringIO("a,b,c\n1,2,3\n"))
