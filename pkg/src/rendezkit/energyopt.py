"""Minimum-energy mass distributions over the simplex.

``w_energy`` minimizes the quadratic form of the kernel over probability
vectors supported on a subset.  Points with an infinite self-value can never
carry mass (an atom there already has infinite energy) and are excluded up
front.  Remaining infinite off-diagonal entries partition the candidate set:
mass may only pair across finite entries, so the search runs over the maximal
infinity-free point subsets (exactly, for up to 20 candidates).

The continuous solve is conditional-gradient descent with away steps and
exact line search; iterates stay inside the simplex and minimizers come out
sparse.  The quadratic form need not be convex (distance kernels are concave
on the simplex), so a single descent run can park on a stationary point that
is not the minimum; small instances are therefore solved exactly by
enumerating the stationary point of every simplex face, and larger ones run
the descent from several deterministic starts including the low-self-value
vertices.  The first-order certificate (energy minus the smallest potential
over feasible points) is reported with the result; it vanishes at simplex
stationary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import networkx as nx
import numpy as np

from .errors import BudgetExceededError
from .extcore import EXT_INF, ExtendedValue
from .game import q_value, u_value, v_value
from .measure import (
    ProbabilityMeasure,
    mutual_energy_float,
    potential_vector,
)
from .space import DiscreteSpace, SubsetRef

__all__ = [
    "EnergyResult",
    "ChainReport",
    "MaxPrincipleReport",
    "w_energy",
    "energy_chain_check",
    "max_principle_check",
]

FW_RELATIVE_GAP = 1e-8
FW_MAX_ITER = 100_000
SUBSET_SEARCH_CAP = 20
EXACT_FACE_CAP = 12  # enumerate all simplex faces exactly up to this size


@dataclass(frozen=True)
class EnergyResult:
    value: ExtendedValue
    minimizer: Optional[ProbabilityMeasure]
    iterations: int
    certificate_gap: float

    def to_jsonable(self) -> dict:
        return {
            "value": self.value.to_jsonable(),
            "weights": None if self.minimizer is None else list(map(float, self.minimizer.weights)),
            "iterations": self.iterations,
            "gap": self.certificate_gap,
        }


def _frank_wolfe(
    K: np.ndarray, x0: Optional[np.ndarray] = None
) -> tuple[np.ndarray, float, int]:
    """Minimize x^T K x over the simplex; K finite symmetric nonnegative.

    Away-step conditional gradient with exact line search (closed form for a
    quadratic).  Returns (x, objective, iterations).
    """
    m = K.shape[0]
    if m == 1:
        return np.ones(1), float(K[0, 0]), 0
    x = np.full(m, 1.0 / m) if x0 is None else np.asarray(x0, dtype=float).copy()
    Kx = K @ x
    fval = float(x @ Kx)
    iterations = 0
    for iterations in range(1, FW_MAX_ITER + 1):
        grad = 2.0 * Kx
        s = int(np.argmin(grad))
        fw_gap = float(grad @ x - grad[s])
        if fw_gap <= FW_RELATIVE_GAP * max(1.0, abs(fval)):
            break
        support = np.flatnonzero(x > 1e-15)
        a = int(support[np.argmax(grad[support])])
        away_gap = float(grad[a] - grad @ x)
        if fw_gap >= away_gap or x[a] >= 1.0 - 1e-15:
            d = -x.copy()
            d[s] += 1.0
            gamma_max = 1.0
        else:
            d = x.copy()
            d[a] -= 1.0
            gamma_max = x[a] / (1.0 - x[a])
        slope = float(grad @ d)
        curv = float(d @ K @ d)
        if curv > 1e-300:
            gamma = min(gamma_max, max(0.0, -slope / (2.0 * curv)))
        else:
            gamma = gamma_max  # flat or concave along d: run to the boundary
        if gamma <= 0.0:
            break
        x = x + gamma * d
        x = np.maximum(x, 0.0)
        x /= x.sum()
        Kx = K @ x
        fval = float(x @ Kx)
    return x, fval, iterations


def _exact_simplex_quadratic(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Global minimum of x^T K x over the simplex by face enumeration.

    The minimizer lies either at a vertex or in the relative interior of a
    face, where it solves the stationarity system of that face.  Both
    families are finite, so checking them all is exact.  Only for small K.
    """
    import itertools

    m = K.shape[0]
    best_x = np.zeros(m)
    best_x[0] = 1.0
    best_f = float(K[0, 0])
    for i in range(m):
        if K[i, i] < best_f:
            best_f = float(K[i, i])
            best_x = np.zeros(m)
            best_x[i] = 1.0
    for size in range(2, m + 1):
        for face in itertools.combinations(range(m), size):
            idx = np.asarray(face)
            KS = K[np.ix_(idx, idx)]
            system = np.zeros((size + 1, size + 1))
            system[:size, :size] = 2.0 * KS
            system[:size, size] = -1.0
            system[size, :size] = 1.0
            rhs = np.zeros(size + 1)
            rhs[size] = 1.0
            try:
                sol = np.linalg.solve(system, rhs)
            except np.linalg.LinAlgError:
                continue  # flat face: its minima live on sub-faces
            x_face = sol[:size]
            if (x_face < -1e-12).any():
                continue
            x_face = np.maximum(x_face, 0.0)
            x_face /= x_face.sum()
            f = float(x_face @ KS @ x_face)
            if f < best_f - 1e-15:
                best_f = f
                best_x = np.zeros(m)
                best_x[idx] = x_face
    return best_x, best_f


def _fw_multistart(K: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Descent from several deterministic starts; keeps the best end point.

    A symmetric kernel makes the uniform vector a stationary point, so a lone
    uniform start can stall on it; perturbed and vertex starts break that.
    """
    m = K.shape[0]
    starts = [np.full(m, 1.0 / m)]
    ramp = 1.0 + np.linspace(0.0, 0.5, m)
    starts.append(ramp / ramp.sum())
    order = np.argsort(K.diagonal(), kind="stable")
    for i in order[: min(8, m)]:
        e = np.zeros(m)
        e[int(i)] = 1.0
        starts.append(e)
    best = None
    total_iter = 0
    for x0 in starts:
        x, f, it = _frank_wolfe(K, x0)
        total_iter += it
        if best is None or f < best[1]:
            best = (x, f)
    return best[0], best[1], total_iter


def _infinity_free_subsets(K: np.ndarray) -> list[list[int]]:
    """Maximal subsets whose pairwise entries are all finite (diagonal already
    finite by construction).  These are the maximal independent sets of the
    infinite-entry graph."""
    m = K.shape[0]
    g = nx.Graph()
    g.add_nodes_from(range(m))
    inf_i, inf_j = np.where(np.isinf(K))
    g.add_edges_from((int(i), int(j)) for i, j in zip(inf_i, inf_j) if i < j)
    cliques = [sorted(c) for c in nx.find_cliques(nx.complement(g))]
    cliques.sort()
    return cliques


def _solve_block(K: np.ndarray) -> tuple[np.ndarray, float, int]:
    if K.shape[0] <= EXACT_FACE_CAP:
        x, f = _exact_simplex_quadratic(K)
        return x, f, 0
    return _fw_multistart(K)


def w_energy(space: DiscreteSpace, H: SubsetRef) -> EnergyResult:
    """Smallest energy of a unit mass distribution on H, with its minimizer."""
    H.validate_for(space)
    h_idx = H.as_array()
    diag = space.kernel[h_idx, h_idx]
    finite_diag = ~np.isinf(diag)
    if not finite_diag.any():
        return EnergyResult(value=EXT_INF, minimizer=None, iterations=0, certificate_gap=0.0)
    h0_idx = h_idx[finite_diag]
    K0 = space.kernel[np.ix_(h0_idx, h0_idx)]

    if np.isinf(K0).any():
        if len(h0_idx) > SUBSET_SEARCH_CAP:
            raise BudgetExceededError(
                f"kernel has infinite off-diagonal entries and {len(h0_idx)} finite-diagonal "
                f"candidates; exact subset search is capped at {SUBSET_SEARCH_CAP}"
            )
        best = None
        for subset in _infinity_free_subsets(K0):
            sub = np.asarray(subset, dtype=int)
            x, fval, iters = _solve_block(K0[np.ix_(sub, sub)])
            if best is None or fval < best[1]:
                full = np.zeros(len(h0_idx))
                full[sub] = x
                best = (full, fval, iters)
        x0, fval, iterations = best
    else:
        x0, fval, iterations = _solve_block(K0)

    weights = np.zeros(space.n_points)
    weights[h0_idx] = x0
    mu = ProbabilityMeasure(weights=weights, space_label=space.label)
    value = mutual_energy_float(space.kernel, mu.weights, mu.weights)

    # first-order certificate over points whose addition keeps energy finite
    pots = potential_vector(space.kernel[h0_idx], mu.weights)
    feasible = np.isfinite(pots)
    cert = value - float(pots[feasible].min()) if feasible.any() else 0.0
    return EnergyResult(
        value=ExtendedValue(value),
        minimizer=mu,
        iterations=iterations,
        certificate_gap=max(0.0, cert),
    )


@dataclass(frozen=True)
class ChainReport:
    """Values of the four energies on one subset with the guaranteed orderings.

    Only w <= q and q <= u are asserted; the support-restricted energy is
    reported alongside without an asserted position (its place in the chain
    depends on the kernel satisfying a maximum principle).
    """

    w: ExtendedValue
    v: Optional[ExtendedValue]
    q: ExtendedValue
    u: ExtendedValue
    w_le_q: bool
    q_le_u: bool

    @property
    def passed(self) -> bool:
        return self.w_le_q and self.q_le_u

    def to_jsonable(self) -> dict:
        return {
            "w": self.w.to_jsonable(),
            "v": None if self.v is None else self.v.to_jsonable(),
            "q": self.q.to_jsonable(),
            "u": self.u.to_jsonable(),
            "w_le_q": self.w_le_q,
            "q_le_u": self.q_le_u,
        }


def _le_with_tol(a: ExtendedValue, b: ExtendedValue, tol: float) -> bool:
    if a.is_infinite:
        return b.is_infinite
    if b.is_infinite:
        return True
    return a.finite_value <= b.finite_value + tol


def energy_chain_check(
    space: DiscreteSpace, H: SubsetRef, tol: float = 1e-8
) -> ChainReport:
    """Compute w, v (size permitting), q and u on H and check w <= q <= u."""
    w = w_energy(space, H).value
    q = q_value(space, H, H).value
    u = u_value(space, H).value
    v = v_value(space, H).value if len(H) <= 12 else None
    return ChainReport(
        w=w,
        v=v,
        q=q,
        u=u,
        w_le_q=_le_with_tol(w, q, tol),
        q_le_u=_le_with_tol(q, u, tol),
    )


@dataclass(frozen=True)
class MaxPrincipleReport:
    passed: bool
    worst_violation: float  # positive means some potential exceeded its value on the support
    samples: int
    witness: Optional[dict]

    def to_jsonable(self) -> dict:
        return {
            "passed": self.passed,
            "worst_violation": ExtendedValue(max(0.0, self.worst_violation)).to_jsonable()
            if math.isinf(self.worst_violation)
            else self.worst_violation,
            "samples": self.samples,
            "witness": self.witness,
        }


def max_principle_check(
    space: DiscreteSpace, sample_measures: int = 200, seed: int = 0
) -> MaxPrincipleReport:
    """Sampled test of: every potential stays below its peak on the support.

    Every point mass is always checked (the classic counterexample family),
    followed by seeded Dirichlet draws on random supports and on the full
    space.  A pass is evidence at the sampled measures, not a proof.
    """
    rng = np.random.default_rng(seed)
    n = space.n_points
    measures: list[np.ndarray] = [np.eye(n)[i] for i in range(n)]
    for k in range(sample_measures):
        if k % 2 == 0 or n < 3:
            support = np.arange(n)
        else:
            size = int(rng.integers(1, n))
            support = rng.choice(n, size=size, replace=False)
        w = np.zeros(n)
        w[support] = rng.dirichlet(np.ones(len(support)))
        measures.append(w)

    tol = 1e-9 * max(1.0, space.max_finite_entry())
    worst = -math.inf
    witness = None
    for w in measures:
        pots = potential_vector(space.kernel, w)
        support = np.flatnonzero(w > 0.0)
        peak = float(pots[support].max())
        if math.isinf(peak):
            continue  # an infinite peak dominates everything
        slack = float(pots.max() - peak)
        if slack > worst:
            worst = slack
            if slack > tol:
                witness = {
                    "weights": [float(v) for v in w],
                    "point": int(np.argmax(pots)),
                }
    return MaxPrincipleReport(
        passed=worst <= tol,
        worst_violation=worst,
        samples=len(measures),
        witness=witness,
    )
