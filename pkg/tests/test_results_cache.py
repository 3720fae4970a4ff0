import numpy as np
import pytest

from conftest import random_state
from phasedistill.cache import StateCache, decode_state, encode_state
from phasedistill.results import ResultTable, format_value, read_csv

KEY = "ab" * 32


def test_format_value():
    assert format_value(0.1) == "0.1"
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(float("nan")) == "nan"
    assert format_value((0.0, 1.5)) == "0.0;1.5"
    assert format_value("randomized") == "randomized"


def test_csv_round_trip(tmp_path):
    t = ResultTable([("sigma", "rad"), ("V", "1")], [(0.1, 0.25), (0.2, 1 / 3)], ["made here"])
    path = t.write(tmp_path / "sub" / "t.csv")
    text = path.read_text()
    assert text.startswith("# made here\nsigma:rad,V:1\n")
    back = read_csv(path)
    assert back.columns == t.columns and back.provenance == t.provenance
    assert [tuple(float(x) for x in r) for r in back.rows] == t.rows
    assert t.column("V") == [0.25, 1 / 3]
    with pytest.raises(KeyError):
        t.column("W")


def test_blob_round_trip():
    rho = random_state(6, 1)
    got, deficit = decode_state(KEY, encode_state(KEY, rho, 1e-9))
    assert np.array_equal(got.elements, rho.elements) and deficit == 1e-9


def test_damaged_blobs_are_rejected():
    blob = encode_state(KEY, random_state(4, 2), 0.0)
    assert decode_state("cd" * 32, blob) is None
    assert decode_state(KEY, blob[:-1]) is None
    assert decode_state(KEY, b"") is None
    flipped = bytearray(blob)
    flipped[60] ^= 1
    assert decode_state(KEY, bytes(flipped)) is None


def test_cache_counts_and_corruption(tmp_path):
    cache = StateCache(tmp_path)
    rho = random_state(5, 3)
    assert cache.get(KEY) is None and cache.misses == 1
    cache.put(KEY, rho, 0.0)
    assert np.array_equal(cache.get(KEY)[0].elements, rho.elements) and cache.hits == 1
    cache.path(KEY).write_bytes(b"garbage")
    assert cache.get(KEY) is None and cache.misses == 2
    assert not list(tmp_path.glob("*.tmp"))
