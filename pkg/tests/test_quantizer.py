"""Quantizer: scale derivation, rounding rule, error bound, strict inputs."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from ilwp.errors import ConfigError, FormatError
from ilwp.quantizer import (QuantizedPlane, check_bits, dequantize, quantize,
                            symbol_limit)


def test_symbol_limit_table():
    # 2^(n-1) - 1 for every supported width.
    assert [symbol_limit(n) for n in range(2, 9)] == [1, 3, 7, 15, 31, 63, 127]


def test_check_bits_bounds():
    assert check_bits(2) == 2 and check_bits(8) == 8
    for bad in (1, 9, 0, -3):
        with pytest.raises(ConfigError):
            check_bits(bad)
    with pytest.raises(ConfigError):
        check_bits(2.5)
    with pytest.raises(ConfigError):
        check_bits(True)


def test_three_level_plane_uses_full_range():
    plane = quantize([-0.3, 0.0, 0.3], bits=3)
    # peak 0.3 over limit 3 -> scale 0.1 (as a float32)
    assert plane.scale == float(np.float32(0.1))
    assert plane.symbols.tolist() == [-3, 0, 3]
    recon = dequantize(plane)
    assert np.all(np.abs(np.array([-0.3, 0.0, 0.3]) - recon) <= plane.scale / 2)


def test_peak_element_always_hits_the_limit():
    rng = np.random.default_rng(11)
    for bits in range(2, 9):
        values = rng.normal(0.0, 1.0, size=64)
        plane = quantize(values, bits)
        assert int(np.max(np.abs(plane.symbols))) == symbol_limit(bits)


def test_ties_round_away_from_zero():
    # 0.5 and -0.5 sit exactly between symbols 0 and +/-1 at scale 1.
    plane = quantize([1.0, 0.5, -0.5, 0.25], bits=2)
    assert plane.scale == 1.0
    assert plane.symbols.tolist() == [1, 1, -1, 0]


def test_zero_plane_gets_unit_scale():
    plane = quantize(np.zeros(9), bits=5)
    assert plane.scale == 1.0
    assert not plane.symbols.any()
    assert np.array_equal(dequantize(plane), np.zeros(9))


def test_subnormal_peak_falls_back_to_unit_scale():
    tiny = np.full(4, 1e-320)
    plane = quantize(tiny, bits=8)
    assert plane.scale == 1.0
    assert not plane.symbols.any()


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        quantize([0.0, np.nan], bits=4)
    with pytest.raises(ValueError):
        quantize([np.inf], bits=4)


def test_plane_validation():
    with pytest.raises(FormatError):
        QuantizedPlane(np.zeros(3, dtype=np.int16), 1.0, 4, 4)
    with pytest.raises(FormatError):
        QuantizedPlane(np.zeros(3, dtype=np.int16), 0.0, 4, 3)
    with pytest.raises(FormatError):
        QuantizedPlane(np.zeros(3, dtype=np.int16), np.inf, 4, 3)
    with pytest.raises(ConfigError):
        QuantizedPlane(np.zeros(3, dtype=np.int16), 1.0, 9, 3)
    plane = QuantizedPlane(np.array([9], dtype=np.int16), 1.0, 3, 1)
    with pytest.raises(FormatError):
        dequantize(plane)  # |9| > 3-bit limit


def test_symbols_are_immutable():
    plane = quantize([0.5, -0.25], bits=4)
    with pytest.raises(ValueError):
        plane.symbols[0] = 0


@settings(max_examples=200, deadline=None)
@given(
    values=hnp.arrays(
        np.float64,
        st.integers(min_value=1, max_value=64),
        elements=st.floats(min_value=-1e6, max_value=1e6, allow_nan=False,
                           width=32),
    ),
    bits=st.integers(min_value=2, max_value=8),
)
def test_error_bound_property(values, bits):
    plane = quantize(values, bits)
    err = np.abs(values - dequantize(plane))
    assert np.all(err <= plane.scale / 2)
    assert int(np.max(np.abs(plane.symbols), initial=0)) <= symbol_limit(bits)


@settings(max_examples=100, deadline=None)
@given(
    values=hnp.arrays(
        np.float64,
        st.integers(min_value=1, max_value=32),
        elements=st.floats(min_value=-100, max_value=100, allow_nan=False,
                           width=32),
    ),
    bits=st.integers(min_value=2, max_value=8),
)
def test_requantizing_a_reconstruction_is_stable(values, bits):
    # Quantizing a dequantized plane reproduces the same symbols and scale:
    # the peak element sits exactly at limit * scale, so the derived scale
    # is unchanged and every value is already on the symbol lattice.
    first = quantize(values, bits)
    again = quantize(dequantize(first), bits)
    assert again.scale == first.scale
    assert np.array_equal(again.symbols, first.symbols)
