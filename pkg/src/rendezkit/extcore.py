"""Exact arithmetic on the nonnegative extended reals [0, +infinity].

Values carry an explicit finite/infinite tag instead of a sentinel float:
sentinel arithmetic silently corrupts the convention 0 * inf = 0 that every
weighted sum in this package relies on.  Finite parts are ordinary floats;
comparisons against the infinite tag are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Sequence, Union

from .errors import ArgumentError, DataValidationError

__all__ = [
    "ExtendedValue",
    "ExtInterval",
    "EXT_INF",
    "EXT_ZERO",
    "ext",
    "ext_weighted_sum",
    "make_interval",
    "intersect_intervals",
    "FULL_INTERVAL",
]


@total_ordering
@dataclass(frozen=True, slots=True)
class ExtendedValue:
    """A number in [0, +infinity].  ``finite_value is None`` encodes +infinity."""

    finite_value: Union[float, None]

    def __post_init__(self) -> None:
        v = self.finite_value
        if v is None:
            return
        v = float(v)
        if math.isnan(v):
            raise DataValidationError("extended value cannot be NaN")
        if math.isinf(v):
            # normalize float('inf') inputs onto the tag
            object.__setattr__(self, "finite_value", None)
            return
        if v < 0.0:
            raise DataValidationError(f"extended value must be >= 0, got {v}")
        # collapse -0.0 so serialized output is stable
        object.__setattr__(self, "finite_value", v + 0.0)

    @property
    def is_finite(self) -> bool:
        return self.finite_value is not None

    @property
    def is_infinite(self) -> bool:
        return self.finite_value is None

    def as_float(self) -> float:
        """The value as a float, with math.inf standing in for the tag."""
        return math.inf if self.finite_value is None else self.finite_value

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = ExtendedValue(float(other))
        if not isinstance(other, ExtendedValue):
            return NotImplemented
        return self.finite_value == other.finite_value or (
            self.finite_value is None and other.finite_value is None
        )

    def __lt__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = ExtendedValue(float(other))
        if not isinstance(other, ExtendedValue):
            return NotImplemented
        if self.finite_value is None:
            return False
        if other.finite_value is None:
            return True
        return self.finite_value < other.finite_value

    def __hash__(self) -> int:
        return hash(self.finite_value)

    def __repr__(self) -> str:
        return "ExtendedValue(inf)" if self.is_infinite else f"ExtendedValue({self.finite_value!r})"

    def close_to(self, other: "ExtendedValue | float", tol: float = 1e-9) -> bool:
        """Equality with absolute tolerance on the finite part; exact on tags."""
        other = ext(other)
        if self.is_infinite or other.is_infinite:
            return self.is_infinite and other.is_infinite
        return abs(self.finite_value - other.finite_value) <= tol

    def to_jsonable(self) -> Union[float, str]:
        """JSON encoding: a number when finite, the string "inf" otherwise."""
        return "inf" if self.finite_value is None else self.finite_value

    @classmethod
    def from_jsonable(cls, obj: object) -> "ExtendedValue":
        if isinstance(obj, str):
            if obj.strip().lower() in ("inf", "+inf", "infinity"):
                return EXT_INF
            raise DataValidationError(f"unrecognized extended-value token {obj!r}")
        if isinstance(obj, (int, float)):
            return cls(float(obj))
        raise DataValidationError(f"cannot decode extended value from {type(obj).__name__}")


EXT_INF = ExtendedValue(None)
EXT_ZERO = ExtendedValue(0.0)


def ext(value: Union[ExtendedValue, float, int]) -> ExtendedValue:
    """Coerce a float (math.inf allowed) or ExtendedValue into an ExtendedValue."""
    if isinstance(value, ExtendedValue):
        return value
    return ExtendedValue(float(value))


def ext_weighted_sum(
    weights: Sequence[float], values: Sequence[Union[ExtendedValue, float]]
) -> ExtendedValue:
    """Sum of w_i * v_i with the conventions 0*inf = 0 and w*inf = inf for w > 0.

    Finite contributions are accumulated with math.fsum, so the finite part is
    correctly rounded regardless of ordering.
    """
    if len(weights) != len(values):
        raise ArgumentError(
            f"weights and values differ in length ({len(weights)} vs {len(values)})"
        )
    finite_terms: list[float] = []
    for w, v in zip(weights, values):
        w = float(w)
        if math.isnan(w) or w < 0.0:
            raise ArgumentError(f"weights must be nonnegative, got {w}")
        ev = ext(v)
        if w == 0.0:
            continue
        if ev.is_infinite:
            return EXT_INF
        finite_terms.append(w * ev.finite_value)
    return ExtendedValue(math.fsum(finite_terms))


@dataclass(frozen=True, slots=True)
class ExtInterval:
    """Closed interval {t : lo <= t <= hi} inside [0, +infinity].

    ``empty`` is True exactly when hi < lo; endpoints are kept unchanged in
    that case so callers can still inspect what produced the empty set.
    """

    lo: ExtendedValue
    hi: ExtendedValue
    empty: bool

    def is_singleton(self, tol: float = 0.0) -> bool:
        if self.empty:
            return False
        if self.lo.is_infinite and self.hi.is_infinite:
            return True
        if self.lo.is_infinite or self.hi.is_infinite:
            return False
        return abs(self.hi.finite_value - self.lo.finite_value) <= tol

    def contains_value(self, v: Union[ExtendedValue, float], tol: float = 0.0) -> bool:
        if self.empty:
            return False
        v = ext(v)
        lo_ok = self.lo <= v or (
            self.lo.is_finite and v.is_finite and v.finite_value >= self.lo.finite_value - tol
        )
        hi_ok = v <= self.hi or (
            self.hi.is_finite and v.is_finite and v.finite_value <= self.hi.finite_value + tol
        )
        return lo_ok and hi_ok

    def contains_interval(self, other: "ExtInterval", tol: float = 0.0) -> bool:
        """True when ``other`` is a subset of this interval (empty sets always are)."""
        if other.empty:
            return True
        if self.empty:
            return False
        return self.contains_value(other.lo, tol) and self.contains_value(other.hi, tol)

    def to_jsonable(self) -> dict:
        return {
            "lo": self.lo.to_jsonable(),
            "hi": self.hi.to_jsonable(),
            "empty": self.empty,
        }

    @classmethod
    def from_jsonable(cls, obj: dict) -> "ExtInterval":
        return make_interval(
            ExtendedValue.from_jsonable(obj["lo"]),
            ExtendedValue.from_jsonable(obj["hi"]),
        )


def make_interval(
    lo: Union[ExtendedValue, float], hi: Union[ExtendedValue, float]
) -> ExtInterval:
    """Interval [lo, hi], empty by convention whenever hi < lo."""
    lo = ext(lo)
    hi = ext(hi)
    return ExtInterval(lo=lo, hi=hi, empty=hi < lo)


FULL_INTERVAL = make_interval(EXT_ZERO, EXT_INF)


def intersect_intervals(intervals: Iterable[ExtInterval]) -> ExtInterval:
    """Intersection of closed intervals; the empty collection gives [0, inf].

    Taking max of lower and min of upper endpoints is correct even when an
    input is empty: its stored endpoints already satisfy hi < lo, which forces
    the result empty.
    """
    lo = EXT_ZERO
    hi = EXT_INF
    for iv in intervals:
        if iv.lo > lo:
            lo = iv.lo
        if iv.hi < hi:
            hi = iv.hi
    return make_interval(lo, hi)
