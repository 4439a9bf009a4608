from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from behavkernel import (
    Complexity,
    DomainError,
    IrregularSignal,
    MissingPattern,
    ParseError,
    apply_pattern,
    parse_csv,
    simulate,
    write_csv,
)
from behavkernel.experiments import blood_volume_model, bolus_input


def test_complexity_bounds():
    assert Complexity(1, 1, 2, 2).q == 2
    with pytest.raises(DomainError):
        Complexity(0, 1, 3, 2)  # n > p * ell
    with pytest.raises(DomainError):
        Complexity(0, 1, 1, 2)  # n < ell
    with pytest.raises(DomainError):
        Complexity(0, 0, 0, 0)


def test_parse_ramp_prefix():
    s = parse_csv("1\n2\nNaN\n4")
    assert s.T == 4 and s.q == 1
    assert s.given[:, 0].tolist() == [True, True, False, True]
    assert s.values[[0, 1, 3], 0].tolist() == [1, 2, 4]


def test_parse_empty():
    with pytest.raises(ParseError, match="empty"):
        parse_csv("")


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_csv("1,2\n3")
    with pytest.raises(ParseError):
        parse_csv("1\nabc")
    with pytest.raises(ParseError):
        parse_csv("1\nnan")  # the literal is case-sensitive
    with pytest.raises(ParseError):
        parse_csv("1\ninf")


def test_parse_header_sets_partition():
    s = parse_csv("u1,y1,y2\n1,2,3\n4,NaN,6")
    assert (s.m, s.p) == (1, 2)
    assert not s.given[1, 1]


def test_write_ramp():
    s = IrregularSignal.from_array([1, 2, np.nan, 4])
    assert write_csv(s) == "1\n2\nNaN\n4"


def test_write_zeros():
    s = IrregularSignal.from_array(np.zeros((3, 2)), m=1)
    assert write_csv(s) == "0,0\n0,0\n0,0"


def test_round_trip_case_study_signal():
    w = simulate(blood_volume_model(), [0, 0], bolus_input(150))
    back = parse_csv(write_csv(w, header=True))
    assert back.T == 150 and back.q == 2 and back.m == 1
    assert back == w


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(
    hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=8), elements=finite),
    st.data(),
)
def test_round_trip_property(vals, data):
    mask = data.draw(hnp.arrays(bool, vals.shape))
    m = data.draw(st.integers(0, vals.shape[1] - 1))
    s = IrregularSignal(vals, mask, m)
    back = parse_csv(write_csv(s, header=True))
    assert back == s


def test_explicit_pattern_ramp():
    w = IrregularSignal.from_array(np.arange(1.0, 9.0))
    out = apply_pattern(w, MissingPattern.explicit([2, 5]))
    assert write_csv(out) == "1\n2\nNaN\n4\n5\nNaN\n7\n8"


def test_none_pattern_identity():
    w = IrregularSignal.from_array(np.random.default_rng(0).standard_normal((10, 2)), m=1)
    assert apply_pattern(w, MissingPattern.none()) == w


def test_random_pattern_count():
    w = simulate(blood_volume_model(), [0, 0], bolus_input(150))
    out = apply_pattern(w, MissingPattern.random(0.4, seed=3, columns=[1]))
    assert (~out.given[:, 1]).sum() == math.floor(0.4 * 150)
    assert out.given[:, 0].all()


def test_random_fraction_domain():
    with pytest.raises(DomainError):
        MissingPattern.random(1.2)
    with pytest.raises(DomainError):
        MissingPattern.random(0.0)


def test_apply_pattern_needs_complete_signal():
    with pytest.raises(DomainError):
        apply_pattern(IrregularSignal.from_array([1, np.nan]), MissingPattern.none())


@given(st.integers(1, 40), st.integers(1, 3), st.integers(1, 2), st.integers(2, 6))
def test_periodic_output_indices(T, m, p, ell):
    rng = np.random.default_rng(T)
    w = IrregularSignal.from_array(rng.standard_normal((T, m + p)), m=m)
    out = apply_pattern(w, MissingPattern.periodic_output(ell + 1))
    expected = [ell + k * (ell + 1) for k in range(T) if ell + k * (ell + 1) < T]
    missing_rows = np.flatnonzero(~out.given.all(axis=1)).tolist()
    assert missing_rows == expected
    assert out.given[:, :m].all()
    assert (~out.given[expected, m:]).all()
    assert np.array_equal(out.values[out.given], w.values[out.given])


@given(st.data())
def test_pattern_keeps_unselected_entries(data):
    T = data.draw(st.integers(2, 30))
    q = data.draw(st.integers(1, 3))
    w = IrregularSignal.from_array(np.arange(T * q, dtype=float).reshape(T, q))
    frac = data.draw(st.floats(0.05, 0.95))
    out = apply_pattern(w, MissingPattern.random(frac, seed=data.draw(st.integers(0, 99))))
    assert out.n_missing == math.floor(frac * T * q)
    assert np.array_equal(out.values[out.given], w.values[out.given])
