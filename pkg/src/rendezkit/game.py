"""Exact finite minimax solving on kernel matrices.

Four quantities live here, each "what is the best guaranteed potential"
question for one side of a two-player game on the kernel matrix:

* ``q_value``   smallest worst-case potential over L, mass placed on H
* ``q_lower``   largest best-case potential over L, mass placed on H
* ``u_value``   q_value with the adversary ranging over the whole space
* ``v_value``   q_value restricted to the support of the chosen mass

The linear programs are solved by a self-contained dense two-phase simplex
(Dantzig pivoting, falling back to Bland's rule after a degenerate streak so
cycling is impossible).  Infinite kernel entries never enter a tableau:
``q_value`` excludes rows that any adversary column sends to infinity, and
``q_lower`` erases columns that any mass row can send to infinity (exact for
nonnegative kernels; see its docstring).  A multiplicative-weights solver is
kept alongside as an independent cross-check oracle; it shares no code with
the simplex path.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ArgumentError,
    PropertyViolationError,
    SolverStalledError,
)
from .extcore import EXT_INF, ExtendedValue
from .measure import ProbabilityMeasure, inf_potential, potential_vector, sup_potential
from .space import DiscreteSpace, SubsetRef

__all__ = [
    "GameSolution",
    "q_value",
    "q_lower",
    "q_sharp_value",
    "q_lower_sharp",
    "u_value",
    "v_value",
    "duality_gap",
    "gap_tolerance",
    "mw_game_bounds",
]

_BINDING_TOL = 1e-7
_MASS_TOL = 1e-12


def gap_tolerance(space_or_scale) -> float:
    """Absolute primal-dual gap tolerance: 1e-9 for entries up to 1e6,
    scaled proportionally beyond that."""
    if isinstance(space_or_scale, DiscreteSpace):
        scale = space_or_scale.max_finite_entry()
    else:
        scale = float(space_or_scale)
    return 1e-9 * max(1.0, scale / 1e6)


# ---------------------------------------------------------------------------
# dense two-phase simplex on  min c@x  s.t.  A@x = b, x >= 0
# ---------------------------------------------------------------------------


@dataclass
class _LPResult:
    x: np.ndarray
    objective: float
    duals: np.ndarray  # one multiplier per original row (0 for dropped rows)
    basis: list


class _Tableau:
    def __init__(self, A: np.ndarray, b: np.ndarray, row_ids: np.ndarray):
        self.T = np.hstack([A, b[:, None]])
        self.row_ids = row_ids  # original row index of each tableau row

    @property
    def m(self) -> int:
        return self.T.shape[0]

    @property
    def ncols(self) -> int:
        return self.T.shape[1] - 1

    def pivot(self, r: int, e: int, zrow: np.ndarray) -> None:
        piv = self.T[r, e]
        self.T[r] /= piv
        col = self.T[:, e].copy()
        col[r] = 0.0
        self.T -= np.outer(col, self.T[r])
        self.T[:, e] = 0.0
        self.T[r, e] = 1.0
        zrow -= zrow[e] * self.T[r, :-1]
        zrow[e] = 0.0


def _run_pivots(
    tab: _Tableau,
    zrow: np.ndarray,
    basis: np.ndarray,
    allowed: np.ndarray,
    tol: float = 1e-9,
) -> None:
    """Pivot to optimality.  Dantzig rule normally; permanent Bland mode after
    3*m consecutive degenerate pivots.  Raises on unboundedness or stall."""
    m = tab.m
    bland = False
    degenerate_streak = 0
    max_iter = 2000 + 60 * (m + tab.ncols)
    for _ in range(max_iter):
        cand = np.where(allowed & (zrow < -tol))[0]
        if cand.size == 0:
            return
        if bland:
            e = int(cand[0])
        else:
            e = int(cand[np.argmin(zrow[cand])])
        col = tab.T[:, e]
        rows = np.where(col > tol)[0]
        if rows.size == 0:
            raise SolverStalledError("linear program is unbounded")
        ratios = tab.T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        if bland:
            r = int(ties[np.argmin(basis[ties])])  # Bland: smallest basis index
        else:
            r = int(ties[np.argmax(col[ties])])  # stability: largest pivot element
        if tab.T[r, -1] <= 1e-13:
            degenerate_streak += 1
            if degenerate_streak > 3 * m:
                bland = True
        else:
            degenerate_streak = 0
        tab.pivot(r, e, zrow)
        basis[r] = e
    raise SolverStalledError(f"simplex did not converge within {max_iter} pivots")


def simplex_solve(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> _LPResult:
    """Two-phase simplex for min c@x s.t. A@x = b, x >= 0 (dense, float64)."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).copy()
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    A = A.copy()
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # phase 1: artificial identity basis
    tab = _Tableau(np.hstack([A, np.eye(m)]), b, row_ids=np.arange(m))
    basis = np.arange(n, n + m)
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    zrow = c1 - tab.T[:, :-1].sum(axis=0)
    allowed = np.ones(n + m, dtype=bool)
    _run_pivots(tab, zrow, basis, allowed)
    phase1_obj = float(sum(tab.T[i, -1] for i in range(tab.m) if basis[i] >= n))
    if phase1_obj > 1e-8:
        raise SolverStalledError(f"linear program infeasible (phase-1 level {phase1_obj:g})")

    # drive artificials out of the basis; drop redundant rows
    keep = np.ones(tab.m, dtype=bool)
    for i in range(tab.m):
        if basis[i] < n:
            continue
        row = tab.T[i, :n]
        pivots = np.where(np.abs(row) > 1e-9)[0]
        if pivots.size:
            tab.pivot(i, int(pivots[0]), zrow)
            basis[i] = int(pivots[0])
        else:
            keep[i] = False
    if not keep.all():
        tab.T = tab.T[keep]
        tab.row_ids = tab.row_ids[keep]
        basis = basis[keep]

    # phase 2 on original columns, with refactorization between rounds: the
    # tableau drifts over many degenerate pivots, so after each optimality
    # claim the basis is re-evaluated against the original data and pivoting
    # resumes on a freshly rebuilt tableau if true reduced costs disagree
    tab.T = np.hstack([tab.T[:, :n], tab.T[:, -1:]])
    kept_rows = tab.row_ids
    A_kept = A[kept_rows]
    b_kept = b[kept_rows]
    allowed = np.ones(n, dtype=bool)
    for _refactor_round in range(20):
        zrow = c.copy()
        for i in range(tab.m):
            if c[basis[i]] != 0.0:
                zrow = zrow - c[basis[i]] * tab.T[i, :-1]
        zrow[basis] = 0.0
        _run_pivots(tab, zrow, basis, allowed)

        B = A_kept[:, basis]
        try:
            x_basic = np.linalg.solve(B, b_kept)
            y = np.linalg.solve(B.T, c[basis])
        except np.linalg.LinAlgError:
            x_basic, *_ = np.linalg.lstsq(B, b_kept, rcond=None)
            y, *_ = np.linalg.lstsq(B.T, c[basis], rcond=None)
        reduced = c - A_kept.T @ y
        reduced[basis] = 0.0
        if reduced.min() >= -1e-9 and x_basic.min() >= -1e-7:
            x = np.zeros(n)
            x[basis] = np.maximum(x_basic, 0.0)
            objective = float(c @ x)
            duals = np.zeros(m)
            y_out = y.copy()
            y_out[flip[kept_rows]] *= -1.0
            duals[kept_rows] = y_out
            return _LPResult(x=x, objective=objective, duals=duals, basis=list(basis))
        # rebuild the tableau exactly at the current basis and keep pivoting
        try:
            T_new = np.linalg.solve(B, np.hstack([A_kept, b_kept[:, None]]))
        except np.linalg.LinAlgError:
            T_new, *_ = np.linalg.lstsq(B, np.hstack([A_kept, b_kept[:, None]]), rcond=None)
        tab.T = T_new
    raise SolverStalledError("simplex failed to certify optimality after 20 refactorizations")


# ---------------------------------------------------------------------------
# game solutions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GameSolution:
    """Optimal value with both strategies and a re-evaluated gap certificate.

    ``min_strategy`` guarantees the value from above (its worst case equals
    the value), ``max_strategy`` from below; ``gap`` is the difference of the
    two re-evaluated guarantees on the true kernel, never the raw LP report.
    """

    value: ExtendedValue
    status: str  # optimal | infinite | restricted-support
    gap: float
    min_strategy: Optional[ProbabilityMeasure] = None
    max_strategy: Optional[ProbabilityMeasure] = None
    certificate: dict = field(default_factory=dict)

    def to_jsonable(self) -> dict:
        return {
            "value": self.value.to_jsonable(),
            "status": self.status,
            "gap": self.gap,
            "min_strategy": None
            if self.min_strategy is None
            else self.min_strategy.to_jsonable(),
            "max_strategy": None
            if self.max_strategy is None
            else self.max_strategy.to_jsonable(),
            "certificate": self.certificate,
        }


def _embed(space: DiscreteSpace, subset_idx: np.ndarray, local: np.ndarray) -> ProbabilityMeasure:
    w = np.zeros(space.n_points)
    local = np.maximum(local, 0.0)
    total = local.sum()
    if total <= 0.0:
        raise SolverStalledError("degenerate strategy with zero mass")
    w[subset_idx] = local / total
    return ProbabilityMeasure(weights=w, space_label=space.label)


def q_value(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> GameSolution:
    """Smallest worst-case potential over L achievable by unit mass on H.

    Rows of H that some column of L sends to infinity can never help the
    minimizing side, so they are excluded up front; if nothing remains the
    value is infinite and a per-row witness column is attached.
    """
    H.validate_for(space)
    L.validate_for(space)
    h_idx = H.as_array()
    l_idx = L.as_array()
    block = space.kernel[np.ix_(h_idx, l_idx)]
    inf_mask = np.isinf(block)
    finite_rows = ~inf_mask.any(axis=1)
    if not finite_rows.any():
        witness = {
            int(h_idx[i]): int(l_idx[int(np.argmax(inf_mask[i]))])
            for i in range(len(h_idx))
        }
        return GameSolution(
            value=EXT_INF,
            status="infinite",
            gap=0.0,
            certificate={"infinite_rows": witness},
        )
    h0_idx = h_idx[finite_rows]
    A = block[finite_rows]  # all finite
    h, l = A.shape
    scale = max(1.0, float(A.max()))
    As = A / scale

    # variables [mu (h), t, s (l)]; rows: per-column cap, then total mass
    n_var = h + 1 + l
    A_eq = np.zeros((l + 1, n_var))
    for x in range(l):
        A_eq[x, :h] = As[:, x]
        A_eq[x, h] = -1.0
        A_eq[x, h + 1 + x] = 1.0
    A_eq[l, :h] = 1.0
    b_eq = np.zeros(l + 1)
    b_eq[l] = 1.0
    c = np.zeros(n_var)
    c[h] = 1.0

    res = simplex_solve(c, A_eq, b_eq)
    mu = _embed(space, h0_idx, res.x[:h])

    upper = sup_potential(space, mu, L)
    value = upper.value

    # lower-bound certificates: LP duals, and uniform mass on binding columns
    candidates = []
    nu_local = np.maximum(-res.duals[:l], 0.0)
    if nu_local.sum() > _MASS_TOL:
        candidates.append(nu_local / nu_local.sum())
    col_values = potential_vector(space.kernel[l_idx], mu.weights)
    binding = col_values >= col_values.max() - _BINDING_TOL * max(1.0, scale)
    uniform_binding = binding.astype(float)
    candidates.append(uniform_binding / uniform_binding.sum())

    best_lb = -math.inf
    best_nu = None
    for cand in candidates:
        nu = _embed(space, l_idx, cand)
        row_vals = potential_vector(space.kernel[h0_idx], nu.weights)
        lb = float(row_vals.min())
        if lb > best_lb:
            best_lb = lb
            best_nu = nu
    gap = abs(value.as_float() - best_lb)
    tol = gap_tolerance(scale)
    if not value.is_finite or gap > 1e4 * tol:
        raise SolverStalledError(
            f"minimax solve failed to certify: value {value}, lower bound {best_lb}"
        )
    return GameSolution(
        value=value,
        status="optimal",
        gap=gap,
        min_strategy=mu,
        max_strategy=best_nu,
    )


def _q_lower_lp(A_cap: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """LP for max over row mixtures of the minimum column value."""
    h, l = A_cap.shape
    scale = max(1.0, float(A_cap.max()))
    As = A_cap / scale
    n_var = h + 1 + l  # [nu, t, surplus]
    A_eq = np.zeros((l + 1, n_var))
    for x in range(l):
        A_eq[x, :h] = As[:, x]
        A_eq[x, h] = -1.0
        A_eq[x, h + 1 + x] = -1.0
    A_eq[l, :h] = 1.0
    b_eq = np.zeros(l + 1)
    b_eq[l] = 1.0
    c = np.zeros(n_var)
    c[h] = -1.0  # maximize t
    res = simplex_solve(c, A_eq, b_eq)
    nu = res.x[:h]
    t = float(res.x[h]) * scale
    lam = np.maximum(res.duals[:l], 0.0)
    return nu, t, lam


def q_lower(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> GameSolution:
    """Largest guaranteed minimum potential over L for unit mass on H.

    This is a supremum, and with infinite kernel entries it need not be
    attained: vanishing mass on a row that is infinite against a column
    erases that column from the minimum at asymptotically zero cost (the
    kernel is nonnegative, so the extra mass never hurts elsewhere).  The
    value therefore equals the plain finite game on the columns of L that no
    row of H can erase; if every column is erasable the value is infinite.
    Both directions of that identity hold exactly, so no capping of infinite
    entries is ever needed.  When erasure was used, the certificate lists the
    erased columns and whether the supremum is actually attained.
    """
    H.validate_for(space)
    L.validate_for(space)
    h_idx = H.as_array()
    l_idx = L.as_array()
    block = space.kernel[np.ix_(h_idx, l_idx)]
    inf_mask = np.isinf(block)

    erasable = inf_mask.any(axis=0)
    if erasable.all():
        # spreading mass over one witness row per column makes every
        # potential infinite
        witness = {
            int(l_idx[x]): int(h_idx[int(np.argmax(inf_mask[:, x]))])
            for x in range(len(l_idx))
        }
        rows = sorted(set(witness.values()))
        nu = _embed(space, np.asarray(rows), np.ones(len(rows)))
        return GameSolution(
            value=EXT_INF,
            status="infinite",
            gap=0.0,
            max_strategy=nu,
            certificate={"infinite_columns": witness},
        )

    kept = ~erasable
    lr_idx = l_idx[kept]
    A = block[:, kept]  # entirely finite by construction
    nu_local, t, lam_local = _q_lower_lp(A)
    nu = _embed(space, h_idx, nu_local)
    L_reduced = SubsetRef(tuple(int(i) for i in lr_idx))

    lower = inf_potential(space, nu, L_reduced)
    value = lower.value

    # upper certificates: any column mixture bounds the value from above
    candidates = []
    if lam_local.sum() > _MASS_TOL:
        candidates.append(lam_local / lam_local.sum())
    col_vals_nu = A.T @ nu_local
    binding = col_vals_nu <= col_vals_nu.min() + _BINDING_TOL * max(1.0, float(A.max()))
    candidates.append(binding.astype(float) / binding.sum())

    best_ub = math.inf
    best_lam = None
    for cand in candidates:
        lam = _embed(space, lr_idx, cand)
        col_vals = potential_vector(space.kernel[h_idx], lam.weights)
        ub = float(col_vals.max())
        if ub < best_ub:
            best_ub = ub
            best_lam = lam
    gap = abs(best_ub - value.as_float()) if math.isfinite(best_ub) else math.inf
    tol = gap_tolerance(space)
    if gap > 1e4 * max(tol, 1e-9 * max(1.0, abs(t))):
        raise SolverStalledError(
            f"max-min solve failed to certify: value {value}, upper bound {best_ub}"
        )
    certificate: dict = {}
    if erasable.any():
        certificate["erased_columns"] = [int(i) for i in l_idx[erasable]]
        attained = inf_potential(space, nu, L).value.close_to(value, 1e4 * tol)
        certificate["attained"] = bool(attained)
    return GameSolution(
        value=value,
        status="optimal",
        gap=gap,
        min_strategy=best_lam,
        max_strategy=nu,
        certificate=certificate,
    )


# finitely supported and unrestricted optimization coincide on finite spaces,
# so the restricted variants are exact aliases
q_sharp_value = q_value
q_lower_sharp = q_lower


def u_value(space: DiscreteSpace, H: SubsetRef) -> GameSolution:
    """q_value with the adversary ranging over the whole space."""
    return q_value(space, H, space.all_indices())


def v_value(
    space: DiscreteSpace, H: SubsetRef, max_support: Optional[int] = None
) -> GameSolution:
    """Smallest worst-case potential measured only on the support of the mass.

    Equals the minimum of q_value(S, S) over non-empty supports S inside H.
    Supports are enumerated by (size, lexicographic) order; an explicit
    ``max_support`` truncates the enumeration and is reported in the status.
    """
    H.validate_for(space)
    h = len(H)
    if max_support is None:
        if h > 20:
            raise ArgumentError(
                f"v_value needs max_support for |H| = {h} > 20 (exact enumeration cap)"
            )
        max_support = h
    max_support = min(max_support, h)
    truncated = max_support < h

    diag = space.kernel[H.as_array(), H.as_array()]
    if np.isinf(diag).all():
        return GameSolution(
            value=EXT_INF,
            status="infinite",
            gap=0.0,
            certificate={"reason": "every candidate support carries an infinite diagonal"},
        )

    best: Optional[GameSolution] = None
    best_support: Optional[tuple] = None
    for size in range(1, max_support + 1):
        for support in itertools.combinations(H.indices, size):
            sol = q_value(space, SubsetRef(support), SubsetRef(support))
            if best is None or sol.value < best.value:
                best, best_support = sol, support
        if best is not None and best.value == ExtendedValue(0.0):
            break  # value is nonnegative, nothing can improve on 0
    assert best is not None
    status = "restricted-support" if truncated else best.status
    cert = dict(best.certificate)
    cert["support"] = list(best_support or ())
    return GameSolution(
        value=best.value,
        status=status,
        gap=best.gap,
        min_strategy=best.min_strategy,
        max_strategy=best.max_strategy,
        certificate=cert,
    )


def duality_gap(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> float:
    """|q_value(H, L) - q_lower(L, H)|; the two sides coincide by LP duality.

    An infinite value on exactly one side is a solver defect and raises.
    """
    a = q_value(space, H, L).value
    b = q_lower(space, L, H).value
    if a.is_infinite and b.is_infinite:
        return 0.0
    if a.is_infinite != b.is_infinite:
        raise PropertyViolationError(
            f"minimax duality broken: q = {a} but dual value = {b}"
        )
    return abs(a.finite_value - b.finite_value)


def mw_game_bounds(
    A: np.ndarray, iterations: int = 20000
) -> tuple[float, float]:
    """Independent bounds on min over row mixtures of the max column value.

    Multiplicative-weights play for the minimizing side against exact best
    responses.  Both returned numbers are rigorous at any iteration count:
    the upper bound is certified by an explicit row mixture, the lower bound
    by an explicit column mixture.
    """
    A = np.asarray(A, dtype=float)
    if np.isinf(A).any():
        raise ArgumentError("multiplicative-weights oracle needs a finite matrix")
    m, n = A.shape
    scale = max(1.0, float(np.abs(A).max()))
    As = A / scale
    log_w = np.zeros(m)
    col_counts = np.zeros(n)
    upper = math.inf
    for t in range(1, iterations + 1):
        w = np.exp(log_w - log_w.max())
        mu = w / w.sum()
        col_payoff = mu @ As
        x = int(np.argmax(col_payoff))
        upper = min(upper, float(col_payoff.max()) * scale)
        col_counts[x] += 1.0
        eta = math.sqrt(math.log(max(m, 2)) / t)
        log_w -= eta * As[:, x]
    lam = col_counts / col_counts.sum()
    lower = float((As @ lam).min()) * scale
    return lower, upper
