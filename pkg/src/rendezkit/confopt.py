"""Optimization over n-point configurations (repetitions allowed).

Three families of objectives over multisets w_1..w_n drawn from a subset:

* ``nth_diameter``     minimize the average pairwise kernel value
* ``cheb_n``           maximize the worst adversary's average to the tuple
* ``dual_cheb_n``      minimize the best adversary's average to the tuple

Enumeration is over multisets rather than ordered tuples since every
objective is symmetric; that cuts the search space by n!.  The local-search
fallback is single-point exchange descent with first improvement and seeded
random restarts, merged with lexicographic tie-breaking so results are
reproducible.  Infinite objective values are ordered as +inf and are never
averaged away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ArgumentError, BudgetExceededError, DataValidationError
from .extcore import EXT_INF, ExtendedValue, ExtInterval, ext, make_interval
from .game import q_lower, q_value
from .space import DiscreteSpace, SubsetRef

__all__ = [
    "TupleWitness",
    "SequenceEstimate",
    "EXACT_MULTISET_BUDGET",
    "exact_budget",
    "nth_diameter",
    "cheb_n",
    "dual_cheb_n",
    "modified_cheb_n",
    "fekete_limit",
    "cheb_limits_via_games",
]

EXACT_MULTISET_BUDGET = 2_000_000
_IMPROVE_TOL = 1e-12
_MAX_DESCENT_PASSES = 500


@dataclass(frozen=True)
class TupleWitness:
    """An n-point multiset with its objective value, as space-level indices."""

    points: tuple[int, ...]
    value: ExtendedValue
    method: str  # exact | local-search
    n: int

    def to_jsonable(self) -> dict:
        return {
            "n": self.n,
            "value": self.value.to_jsonable(),
            "points": list(self.points),
            "method": self.method,
        }


@dataclass(frozen=True)
class SequenceEstimate:
    """Recorded terms of an n-indexed sequence with a declared trend.

    ``limit_bracket`` may hold the interval produced by ``fekete_limit``
    (attach with ``dataclasses.replace``); it is not computed on construction.
    """

    terms: tuple[tuple[int, ExtendedValue], ...]
    direction: str  # increasing | decreasing
    exact_terms_upto: int
    limit_bracket: Optional[ExtInterval] = None

    def __post_init__(self) -> None:
        if self.direction not in ("increasing", "decreasing"):
            raise ArgumentError(f"direction must be increasing or decreasing, got {self.direction!r}")
        object.__setattr__(
            self,
            "terms",
            tuple(sorted(((int(n), ext(v)) for n, v in self.terms))),
        )


def exact_budget(subset_size: int, n: int) -> int:
    return math.comb(subset_size + n - 1, n)


def _check_budget(subset_size: int, n: int) -> int:
    count = exact_budget(subset_size, n)
    if count > EXACT_MULTISET_BUDGET:
        raise BudgetExceededError(
            f"exact enumeration needs C({subset_size}+{n}-1, {n}) = {count} multisets, "
            f"over the budget of {EXACT_MULTISET_BUDGET}"
        )
    return count


def _resolve_method(method: str, subset_size: int, n: int) -> str:
    if method == "auto":
        return "exact" if exact_budget(subset_size, n) <= EXACT_MULTISET_BUDGET else "local-search"
    if method not in ("exact", "local-search"):
        raise ArgumentError(f"method must be exact, local-search or auto, got {method!r}")
    return method


def _multisets(size: int, n: int) -> np.ndarray:
    return np.fromiter(
        (i for combo in combinations_with_replacement(range(size), n) for i in combo),
        dtype=np.int64,
    ).reshape(-1, n)


def _pair_positions(n: int) -> list[tuple[int, int]]:
    return [(j, l) for j in range(n) for l in range(j + 1, n)]


def _diameter_values(KHH: np.ndarray, combos: np.ndarray, n: int) -> np.ndarray:
    total = np.zeros(combos.shape[0])
    for j, l in _pair_positions(n):
        total += KHH[combos[:, j], combos[:, l]]
    return total * (2.0 / ((n - 1) * n))


def _tuple_column_sums(KHL: np.ndarray, combo: Sequence[int]) -> np.ndarray:
    out = np.zeros(KHL.shape[1])
    for k in combo:
        out += KHL[k]
    return out


def _lex_better(candidate: tuple, incumbent: Optional[tuple]) -> bool:
    return incumbent is None or candidate < incumbent


class _ExchangeSearch:
    """First-improvement single-point exchange over a candidate subset."""

    def __init__(self, n: int, size: int, minimize: bool):
        self.n = n
        self.size = size
        self.sign = 1.0 if minimize else -1.0

    def objective(self, w: np.ndarray) -> float:
        raise NotImplementedError

    def candidate_objectives(self, w: np.ndarray, position: int) -> np.ndarray:
        raise NotImplementedError

    def descend(self, start: np.ndarray) -> tuple[tuple, float]:
        w = np.array(sorted(start), dtype=np.int64)
        current = self.objective(w)
        for _ in range(_MAX_DESCENT_PASSES):
            improved = False
            for i in range(self.n):
                values = self.candidate_objectives(w, i)
                signed = self.sign * values
                threshold = self.sign * current - _IMPROVE_TOL
                better = np.where(signed < threshold)[0]
                if better.size:
                    w[i] = better[0]  # first improvement in index order
                    w.sort()
                    current = self.objective(w)
                    improved = True
            if not improved:
                return tuple(int(v) for v in w), current
        return tuple(int(v) for v in w), current


class _DiameterSearch(_ExchangeSearch):
    def __init__(self, KHH: np.ndarray, n: int):
        super().__init__(n=n, size=KHH.shape[0], minimize=True)
        self.K = KHH

    def objective(self, w: np.ndarray) -> float:
        total = 0.0
        for j, l in _pair_positions(self.n):
            total += self.K[w[j], w[l]]
        return total * (2.0 / ((self.n - 1) * self.n))

    def candidate_objectives(self, w: np.ndarray, position: int) -> np.ndarray:
        rest = np.delete(w, position)
        base = 0.0
        for j in range(len(rest)):
            for l in range(j + 1, len(rest)):
                base += self.K[rest[j], rest[l]]
        cand = self.K[:, rest].sum(axis=1) if len(rest) else np.zeros(self.size)
        return (base + cand) * (2.0 / ((self.n - 1) * self.n))


class _ChebSearch(_ExchangeSearch):
    def __init__(self, KHL: np.ndarray, n: int, minimize_sup: bool):
        # KHL rows: candidate points, columns: adversary points
        super().__init__(n=n, size=KHL.shape[0], minimize=minimize_sup)
        self.K = KHL
        self.minimize_sup = minimize_sup

    def _reduce(self, sums: np.ndarray, axis=None):
        return sums.max(axis=axis) if self.minimize_sup else sums.min(axis=axis)

    def objective(self, w: np.ndarray) -> float:
        return float(self._reduce(_tuple_column_sums(self.K, w))) / self.n

    def candidate_objectives(self, w: np.ndarray, position: int) -> np.ndarray:
        rest = np.delete(w, position)
        partial = _tuple_column_sums(self.K, rest)
        sums = partial[None, :] + self.K
        return self._reduce(sums, axis=1) / self.n


def _run_search(
    search: _ExchangeSearch,
    restarts: int,
    seed: int,
    warm_starts: Iterable[Sequence[int]] = (),
) -> tuple[tuple, float]:
    rng = np.random.default_rng(seed)
    best_val = math.inf * search.sign
    best_w: Optional[tuple] = None
    starts = [np.asarray(sorted(s), dtype=np.int64) for s in warm_starts]
    starts += [
        np.sort(rng.integers(0, search.size, size=search.n)) for _ in range(restarts)
    ]
    for start in starts:
        w, val = search.descend(start)
        if best_w is None:
            best_val, best_w = val, w
            continue
        signed, best_signed = search.sign * val, search.sign * best_val
        same = (signed == best_signed) or abs(signed - best_signed) <= _IMPROVE_TOL
        if (not same and signed < best_signed) or (same and _lex_better(w, best_w)):
            best_val, best_w = val, w
    assert best_w is not None
    return best_w, best_val


def _to_space_witness(
    subset: SubsetRef, local: tuple, value: float, method: str, n: int
) -> TupleWitness:
    idx = subset.as_array()
    points = tuple(sorted(int(idx[i]) for i in local))
    return TupleWitness(points=points, value=ExtendedValue(float(value)), method=method, n=n)


def nth_diameter(
    space: DiscreteSpace,
    H: SubsetRef,
    n: int,
    method: str = "auto",
    seed: int = 0,
    restarts: int = 32,
    warm_starts: Iterable[Sequence[int]] = (),
) -> TupleWitness:
    """Minimum average pairwise kernel value over n-point multisets in H."""
    if n < 2:
        raise ArgumentError(f"diameter needs n >= 2, got {n}")
    H.validate_for(space)
    h = len(H)
    method = _resolve_method(method, h, n)
    KHH = space.kernel[np.ix_(H.as_array(), H.as_array())]
    if method == "exact":
        _check_budget(h, n)
        combos = _multisets(h, n)
        values = _diameter_values(KHH, combos, n)
        k = int(np.argmin(values))  # first minimizer = lexicographically smallest combo
        return _to_space_witness(H, tuple(combos[k]), values[k], "exact", n)
    search = _DiameterSearch(KHH, n)
    w, val = _run_search(search, restarts, seed, warm_starts)
    return _to_space_witness(H, w, val, "local-search", n)


def cheb_n(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n: int,
    method: str = "auto",
    seed: int = 0,
    restarts: int = 32,
    warm_starts: Iterable[Sequence[int]] = (),
) -> TupleWitness:
    """Largest achievable value of: the smallest average kernel distance from
    any point of L to an n-point multiset in H.  Local search returns a valid
    lower bound with its witness."""
    if n < 1:
        raise ArgumentError(f"cheb_n needs n >= 1, got {n}")
    H.validate_for(space)
    L.validate_for(space)
    h = len(H)
    method = _resolve_method(method, h, n)
    KHL = space.kernel[np.ix_(H.as_array(), L.as_array())]
    if method == "exact":
        _check_budget(h, n)
        best_val = -math.inf
        best_w: Optional[tuple] = None
        chunk = max(1, 4_000_000 // max(1, KHL.shape[1]))
        combos = _multisets(h, n)
        for lo in range(0, combos.shape[0], chunk):
            part = combos[lo : lo + chunk]
            sums = np.zeros((part.shape[0], KHL.shape[1]))
            for k in range(n):
                sums += KHL[part[:, k]]
            vals = sums.min(axis=1) / n
            k = int(np.argmax(vals))
            if best_w is None or vals[k] > best_val:
                best_val = float(vals[k])
                best_w = tuple(part[k])
        return _to_space_witness(H, best_w, best_val, "exact", n)
    search = _ChebSearch(KHL, n, minimize_sup=False)
    w, val = _run_search(search, restarts, seed, warm_starts)
    return _to_space_witness(H, w, val, "local-search", n)


def dual_cheb_n(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n: int,
    method: str = "auto",
    seed: int = 0,
    restarts: int = 32,
    warm_starts: Iterable[Sequence[int]] = (),
) -> TupleWitness:
    """Smallest achievable value of: the largest average kernel distance from
    any point of L to an n-point multiset in H.  Local search returns a valid
    upper bound with its witness."""
    if n < 1:
        raise ArgumentError(f"dual_cheb_n needs n >= 1, got {n}")
    H.validate_for(space)
    L.validate_for(space)
    h = len(H)
    method = _resolve_method(method, h, n)
    KHL = space.kernel[np.ix_(H.as_array(), L.as_array())]
    if method == "exact":
        _check_budget(h, n)
        best_val = math.inf
        best_w: Optional[tuple] = None
        chunk = max(1, 4_000_000 // max(1, KHL.shape[1]))
        combos = _multisets(h, n)
        for lo in range(0, combos.shape[0], chunk):
            part = combos[lo : lo + chunk]
            sums = np.zeros((part.shape[0], KHL.shape[1]))
            for k in range(n):
                sums += KHL[part[:, k]]
            vals = sums.max(axis=1) / n
            k = int(np.argmin(vals))
            if best_w is None or vals[k] < best_val:
                best_val = float(vals[k])
                best_w = tuple(part[k])
        return _to_space_witness(H, best_w, best_val, "exact", n)
    search = _ChebSearch(KHL, n, minimize_sup=True)
    w, val = _run_search(search, restarts, seed, warm_starts)
    return _to_space_witness(H, w, val, "local-search", n)


def modified_cheb_n(
    space: DiscreteSpace,
    H: SubsetRef,
    n: int,
    method: str = "auto",
    seed: int = 0,
    restarts: int = 32,
) -> TupleWitness:
    """cheb_n with the tuple free to roam the whole space, values taken on H."""
    return cheb_n(space, space.all_indices(), H, n, method=method, seed=seed, restarts=restarts)


def fekete_limit(
    seq: SequenceEstimate, external_bound: Optional[ExtendedValue | float] = None
) -> ExtInterval:
    """Bracket for the limit of a quasi-monotone sequence.

    An increasing sequence converges to its supremum, so the limit lies in
    [max recorded term, external bound or +inf]; the decreasing case is dual
    with 0 as the default lower end (all values live in [0, inf]).  No
    extrapolation is performed beyond that.  Recorded exact terms violating
    the quasi-monotonicity residual signal a broken optimization upstream and
    raise a data error.
    """
    if len(seq.terms) < 3:
        raise ArgumentError(f"need at least 3 recorded terms, got {len(seq.terms)}")
    by_n = {n: v for n, v in seq.terms}
    exact = {n: v for n, v in by_n.items() if n <= seq.exact_terms_upto}
    finite = [v.finite_value for v in by_n.values() if v.is_finite]
    tol = 1e-9 * max(1.0, max(finite, default=1.0))
    increasing = seq.direction == "increasing"
    for n in exact:
        for m in exact:
            total = n + m
            if total not in exact:
                continue
            lhs = _scale_ext(total, exact[total])
            rhs_a = _scale_ext(n, exact[n])
            rhs_b = _scale_ext(m, exact[m])
            rhs = _add_ext(rhs_a, rhs_b)
            ok = _ext_ge(lhs, rhs, tol) if increasing else _ext_ge(rhs, lhs, tol)
            if not ok:
                raise DataValidationError(
                    f"quasi-monotonicity violated at (n={n}, m={m}): "
                    f"({total})*s_{total} = {lhs} vs {n}*s_{n} + {m}*s_{m} = {rhs}"
                )
    values = list(by_n.values())
    if increasing:
        lo = max(values)
        hi = EXT_INF if external_bound is None else ext(external_bound)
    else:
        hi = min(values)
        lo = ExtendedValue(0.0) if external_bound is None else ext(external_bound)
    return make_interval(lo, hi)


def _scale_ext(k: int, v: ExtendedValue) -> ExtendedValue:
    return EXT_INF if v.is_infinite else ExtendedValue(k * v.finite_value)


def _add_ext(a: ExtendedValue, b: ExtendedValue) -> ExtendedValue:
    if a.is_infinite or b.is_infinite:
        return EXT_INF
    return ExtendedValue(a.finite_value + b.finite_value)


def _ext_ge(a: ExtendedValue, b: ExtendedValue, tol: float) -> bool:
    if a.is_infinite:
        return True
    if b.is_infinite:
        return False
    return a.finite_value >= b.finite_value - tol


def witnesses_to_csv(witnesses: Sequence[TupleWitness]) -> str:
    """CSV rows (n, value, method) for a sequence of computed witnesses."""
    lines = ["n,value,method"]
    for w in sorted(witnesses, key=lambda t: t.n):
        lines.append(f"{w.n},{w.value.to_jsonable()},{w.method}")
    return "\n".join(lines) + "\n"


def cheb_limits_via_games(
    space: DiscreteSpace, H: SubsetRef, L: SubsetRef
) -> tuple[ExtendedValue, ExtendedValue]:
    """Exact limits of the two Chebyshev sequences, bypassing n -> infinity.

    On a finite space every measure is finitely supported, so the increasing
    sequence converges to the max-min game value and the decreasing one to
    the min-max game value.  Returns (limit of cheb_n, limit of dual_cheb_n).
    """
    lo = q_lower(space, H, L).value
    hi = q_value(space, H, L).value
    return lo, hi
