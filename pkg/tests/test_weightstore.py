"""Container serialization: exact layout, strict parsing, lossless values."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ilwp.errors import FormatError
from ilwp.weightstore import (WeightStore, load_weight_store,
                              save_weight_store)


def store_of(counts, seed=0):
    rng = np.random.default_rng(seed)
    layers = [
        rng.normal(0.0, 0.5, size=(c, 9)).astype(np.float32).astype(np.float64)
        for c in counts
    ]
    return WeightStore(tuple(layers))


def test_serialized_length_matches_field_sum():
    # Independent oracle: 4 magic + 2 version + 2 reserved + 4 layer count,
    # then one u32 per layer, then 9 float32 per kernel.
    for counts in [(1,), (3, 1, 7), (2, 4, 4), (64, 64)]:
        blob = save_weight_store(store_of(counts))
        assert len(blob) == 12 + 4 * len(counts) + 36 * sum(counts)


def test_header_fields():
    blob = save_weight_store(store_of((2, 5)))
    assert blob[:4] == b"ILWP"
    version, reserved, n = struct.unpack_from("<HHI", blob, 4)
    assert (version, reserved, n) == (1, 0, 2)
    assert struct.unpack_from("<2I", blob, 12) == (2, 5)


def test_roundtrip_is_exact():
    store = store_of((4, 1, 9), seed=3)
    back = load_weight_store(save_weight_store(store))
    assert back.num_layers == 3
    for a, b in zip(store.layers, back.layers):
        assert a.dtype == np.float64 and b.dtype == np.float64
        assert np.array_equal(a, b)


def test_model_name_is_not_serialized():
    a = save_weight_store(store_of((2, 2)))
    named = WeightStore(store_of((2, 2)).layers, model_name="probe")
    assert save_weight_store(named) == a
    assert load_weight_store(a, model_name="probe").model_name == "probe"


def test_layers_are_immutable():
    store = store_of((2, 2))
    with pytest.raises(ValueError):
        store.layers[0][0, 0] = 1.0


def test_accessors():
    store = store_of((3, 5))
    assert store.layer_counts == (3, 5)
    assert store.total_kernels == 8
    assert np.array_equal(store.kernel(1, 4), store.layers[1][4])


def test_layer_shape_is_validated():
    with pytest.raises(FormatError):
        WeightStore((np.zeros((2, 8)),))
    with pytest.raises(FormatError):
        WeightStore((np.zeros((0, 9)),))
    with pytest.raises(FormatError):
        WeightStore((np.zeros(9),))


def test_non_finite_weights_rejected():
    bad = np.zeros((1, 9))
    bad[0, 3] = np.nan
    with pytest.raises(ValueError):
        WeightStore((bad,))
    blob = bytearray(save_weight_store(store_of((1,))))
    blob[16 : 20] = struct.pack("<f", np.inf)
    with pytest.raises(ValueError):
        load_weight_store(bytes(blob))


def test_float32_overflow_rejected_on_save():
    big = np.full((1, 9), 1e39)
    with pytest.raises(ValueError):
        save_weight_store(WeightStore((big,)))


def test_empty_store_cannot_be_saved():
    with pytest.raises(FormatError):
        save_weight_store(WeightStore(()))


@pytest.mark.parametrize(
    "mangle, what",
    [
        (lambda b: b[:3], "missing header"),
        (lambda b: b"ILWQ" + b[4:], "bad magic"),
        (lambda b: b[:4] + struct.pack("<HHI", 2, 0, 1) + b[12:], "version"),
        (lambda b: b[:4] + struct.pack("<HHI", 1, 7, 1) + b[12:], "reserved"),
        (lambda b: b[:4] + struct.pack("<HHI", 1, 0, 0) + b[12:], "zero layers"),
        (lambda b: b[:4] + struct.pack("<HHI", 1, 0, 9) + b[12:], "layer table"),
        (lambda b: b[:12] + struct.pack("<I", 0) + b[16:], "zero kernels"),
        (lambda b: b[:-1], "truncated payload"),
        (lambda b: b + b"\x00", "trailing bytes"),
    ],
)
def test_malformed_containers_rejected(mangle, what):
    blob = save_weight_store(store_of((1,)))
    with pytest.raises(FormatError):
        load_weight_store(mangle(blob))


@settings(max_examples=40, deadline=None)
@given(
    counts=st.lists(st.integers(min_value=1, max_value=12), min_size=1, max_size=5),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_roundtrip_property(counts, seed):
    store = store_of(tuple(counts), seed=seed)
    blob = save_weight_store(store)
    assert len(blob) == 12 + 4 * len(counts) + 36 * sum(counts)
    back = load_weight_store(blob)
    assert back.layer_counts == tuple(counts)
    for a, b in zip(store.layers, back.layers):
        assert np.array_equal(a, b)
    # A second save of the loaded store is byte-identical.
    assert save_weight_store(back) == blob
