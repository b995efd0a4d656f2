import json

import pytest
from hypothesis import given, strategies as st

from rendezkit.errors import ArgumentError, DataValidationError
from rendezkit.extcore import (
    EXT_INF,
    EXT_ZERO,
    FULL_INTERVAL,
    ExtendedValue,
    ext,
    ext_weighted_sum,
    intersect_intervals,
    make_interval,
)

finite_vals = st.floats(min_value=0.0, max_value=1e9, allow_nan=False)
ext_vals = st.one_of(finite_vals.map(ExtendedValue), st.just(EXT_INF))


class TestExtendedValue:
    def test_rejects_negative(self):
        with pytest.raises(DataValidationError):
            ExtendedValue(-0.5)

    def test_rejects_nan(self):
        with pytest.raises(DataValidationError):
            ExtendedValue(float("nan"))

    def test_float_inf_normalizes_to_tag(self):
        assert ExtendedValue(float("inf")).is_infinite

    def test_total_order(self):
        assert ExtendedValue(3.0) < EXT_INF
        assert not (EXT_INF < EXT_INF)
        assert ExtendedValue(1.0) < ExtendedValue(2.0)
        assert EXT_INF == EXT_INF

    def test_negative_zero_collapses(self):
        v = ExtendedValue(-0.0)
        assert v == EXT_ZERO
        assert json.dumps(v.to_jsonable()) == "0.0"

    def test_json_round_trip(self):
        for v in (ExtendedValue(2.5), EXT_INF, EXT_ZERO):
            assert ExtendedValue.from_jsonable(v.to_jsonable()) == v

    def test_json_rejects_garbage(self):
        with pytest.raises(DataValidationError):
            ExtendedValue.from_jsonable("huge")


class TestWeightedSum:
    def test_arithmetic_mean(self):
        assert ext_weighted_sum([0.5, 0.5], [ext(2), ext(4)]) == ext(3)

    def test_zero_times_infinity_is_zero(self):
        assert ext_weighted_sum([0, 1], [EXT_INF, ext(7)]) == ext(7)

    def test_positive_weight_on_infinity(self):
        assert ext_weighted_sum([0.3, 0.7], [EXT_INF, ext(1)]).is_infinite

    def test_length_mismatch(self):
        with pytest.raises(ArgumentError):
            ext_weighted_sum([1.0], [ext(1), ext(2)])

    def test_negative_weight(self):
        with pytest.raises(ArgumentError):
            ext_weighted_sum([-0.1, 1.1], [ext(1), ext(2)])

    @given(
        st.lists(st.floats(min_value=0, max_value=10), min_size=1, max_size=6),
        st.data(),
    )
    def test_monotone_in_each_value(self, weights, data):
        values = data.draw(st.lists(ext_vals, min_size=len(weights), max_size=len(weights)))
        base = ext_weighted_sum(weights, values)
        i = data.draw(st.integers(min_value=0, max_value=len(weights) - 1))
        bumped = list(values)
        if bumped[i].is_infinite:
            return
        bumped[i] = ExtendedValue(bumped[i].finite_value + 1.0)
        assert base <= ext_weighted_sum(weights, bumped)


class TestIntervals:
    def test_singleton(self):
        iv = make_interval(0.5, 0.5)
        assert not iv.empty
        assert iv.is_singleton()

    def test_reversed_is_empty(self):
        assert make_interval(2, 1).empty

    def test_upper_infinite(self):
        iv = make_interval(0.5, EXT_INF)
        assert not iv.empty
        assert iv.contains_value(1e12)

    def test_intersection_basic(self):
        out = intersect_intervals([make_interval(0, 2), make_interval(1, 3)])
        assert (out.lo, out.hi) == (ext(1), ext(2))

    def test_intersection_disjoint(self):
        assert intersect_intervals([make_interval(0, 1), make_interval(2, 3)]).empty

    def test_intersection_pins_unit_interval_point(self):
        # endpoint data from the unit-interval games: [1/2, inf] meets [0, 1/2]
        out = intersect_intervals([make_interval(0.5, EXT_INF), make_interval(0, 0.5)])
        assert not out.empty
        assert out.is_singleton()
        assert out.lo == ext(0.5)

    def test_empty_input_gives_full_ray(self):
        assert intersect_intervals([]) == FULL_INTERVAL

    @given(st.lists(st.tuples(ext_vals, ext_vals), max_size=5))
    def test_intersection_contained_in_every_input(self, pairs):
        ivs = [make_interval(lo, hi) for lo, hi in pairs]
        out = intersect_intervals(ivs)
        for iv in ivs:
            assert iv.contains_interval(out)

    @given(st.lists(st.tuples(ext_vals, ext_vals), min_size=1, max_size=4))
    def test_intersection_idempotent_and_commutative(self, pairs):
        ivs = [make_interval(lo, hi) for lo, hi in pairs]
        once = intersect_intervals(ivs)
        assert intersect_intervals([once, once]) == once
        assert intersect_intervals(list(reversed(ivs))) == once

    @given(st.tuples(ext_vals, ext_vals))
    def test_nonempty_iff_ordered(self, pair):
        lo, hi = pair
        assert make_interval(lo, hi).empty == (hi < lo)
