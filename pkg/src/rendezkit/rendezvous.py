"""Rendezvous and average intervals assembled from game and tuple endpoints.

The limit interval is always reported from the exact game identities, never
from a truncated intersection of n-point intervals; the n-point intervals are
exposed separately so convergence can be displayed without being mistaken
for the limit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .confopt import cheb_n, dual_cheb_n
from .extcore import ExtendedValue, ExtInterval, make_interval
from .game import q_lower, q_value
from .space import DiscreteSpace, SubsetRef

__all__ = [
    "RendezvousReport",
    "CompareReport",
    "rendezvous_interval_n",
    "rendezvous_interval",
    "average_interval",
    "compare_R_A",
    "build_report",
    "SINGLETON_REL_TOL",
]

SINGLETON_REL_TOL = 1e-6  # two game solves feed each interval, so allow their tolerances


def _singleton_value(interval: ExtInterval) -> Optional[ExtendedValue]:
    if interval.empty:
        return None
    if interval.lo.is_infinite and interval.hi.is_infinite:
        return interval.hi
    if interval.lo.is_infinite or interval.hi.is_infinite:
        return None
    hi = interval.hi.finite_value
    if abs(hi - interval.lo.finite_value) <= SINGLETON_REL_TOL * max(1.0, hi):
        return ExtendedValue((interval.lo.finite_value + hi) / 2.0)
    return None


def rendezvous_interval_n(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n: int,
    method: str = "auto",
    seed: int = 0,
) -> ExtInterval:
    """Interval of achievable n-point average values: [cheb_n, dual_cheb_n].

    May come out empty; the emptiness convention (upper endpoint below the
    lower one) is preserved rather than clipped.
    """
    lo = cheb_n(space, H, L, n, method=method, seed=seed).value
    hi = dual_cheb_n(space, H, L, n, method=method, seed=seed).value
    return make_interval(lo, hi)


def rendezvous_interval(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> ExtInterval:
    """Limit rendezvous interval from the exact game endpoints.

    On a finite space the two Chebyshev limits equal the max-min and min-max
    game values, so no n -> infinity truncation is involved.
    """
    return make_interval(q_lower(space, H, L).value, q_value(space, H, L).value)


def average_interval(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> ExtInterval:
    """Interval of potential levels no measure on H can avoid over L."""
    return make_interval(q_lower(space, H, L).value, q_value(space, H, L).value)


@dataclass(frozen=True)
class CompareReport:
    rendezvous: ExtInterval
    average: ExtInterval
    equal_within_tol: bool
    average_strictly_smaller: bool

    def to_jsonable(self) -> dict:
        return {
            "rendezvous": self.rendezvous.to_jsonable(),
            "average": self.average.to_jsonable(),
            "equal_within_tol": self.equal_within_tol,
            "average_strictly_smaller": self.average_strictly_smaller,
        }


def _endpoints_close(a: ExtendedValue, b: ExtendedValue, tol: float) -> bool:
    if a.is_infinite or b.is_infinite:
        return a.is_infinite and b.is_infinite
    return abs(a.finite_value - b.finite_value) <= tol


def compare_R_A(
    space: DiscreteSpace, H: SubsetRef, L: SubsetRef, tol: float = 1e-6
) -> CompareReport:
    """Compare the rendezvous and average intervals endpoint by endpoint.

    On finite spaces with finite kernels the two must agree; with infinite
    entries a strict gap is documented when it occurs instead of asserted
    away.
    """
    r = rendezvous_interval(space, H, L)
    a = average_interval(space, H, L)
    equal = (
        r.empty == a.empty
        and _endpoints_close(r.lo, a.lo, tol)
        and _endpoints_close(r.hi, a.hi, tol)
    )
    strictly_smaller = (not equal) and r.contains_interval(a, tol)
    return CompareReport(
        rendezvous=r,
        average=a,
        equal_within_tol=equal,
        average_strictly_smaller=strictly_smaller,
    )


@dataclass(frozen=True)
class RendezvousReport:
    """n-indexed intervals plus the exact limit intervals for one (H, L) pair."""

    R_n: tuple[tuple[int, ExtInterval], ...]
    R: ExtInterval
    A: ExtInterval
    unique_number: Optional[ExtendedValue]
    H_label: str
    L_label: str

    def to_jsonable(self) -> dict:
        return {
            "R_n": [{"n": n, "interval": iv.to_jsonable()} for n, iv in self.R_n],
            "R": self.R.to_jsonable(),
            "A": self.A.to_jsonable(),
            "unique_number": None
            if self.unique_number is None
            else self.unique_number.to_jsonable(),
            "H_label": self.H_label,
            "L_label": self.L_label,
        }


def report_endpoints_csv(report: RendezvousReport) -> str:
    """CSV of the recorded n-indexed endpoints, ready for plotting."""
    lines = ["n,lower,upper"]
    for n, iv in report.R_n:
        lines.append(f"{n},{iv.lo.to_jsonable()},{iv.hi.to_jsonable()}")
    return "\n".join(lines) + "\n"


def build_report(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n_values: Sequence[int] = (1, 2, 3),
    method: str = "auto",
    seed: int = 0,
) -> RendezvousReport:
    r_n = tuple(
        (n, rendezvous_interval_n(space, H, L, n, method=method, seed=seed))
        for n in n_values
    )
    r = rendezvous_interval(space, H, L)
    a = average_interval(space, H, L)
    return RendezvousReport(
        R_n=r_n,
        R=r,
        A=a,
        unique_number=_singleton_value(r),
        H_label=f"{space.label}[{len(H)} pts]",
        L_label=f"{space.label}[{len(L)} pts]",
    )
