"""Randomized and exhaustive property suites over generated finite instances.

Every check replays deterministically from an InstanceSpec.  A failure means
a solver defect, never new mathematics: each guaranteed relation is checked
at an explicit tolerance and failures carry the full instance for replay.

For tiny instances an independent brute-force layer cross-computes every
quantity: measures are swept over a dense grid on the simplex (resolution
1/200) and tuples over full enumeration, and the fast paths must land within
the declared bracket of the sweep.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import confopt, energyopt, game, rendezvous
from .errors import ArgumentError
from .extcore import ExtendedValue, ExtInterval
from .space import DiscreteSpace, SubsetRef, build_interval_grid

__all__ = [
    "InstanceSpec",
    "PropertyReport",
    "SuiteConfig",
    "gen_instance",
    "check_chain",
    "check_duality",
    "check_MqL",
    "check_dn_mn",
    "check_monotone",
    "check_uniqueness",
    "check_oracle",
    "run_suite",
    "ORACLE_RESOLUTION",
]

KERNEL_FAMILIES = ("metric-random", "psd-random", "discrete", "grid", "infinite-diagonal")
SUBSET_POLICIES = ("nested", "random", "full")
ORACLE_RESOLUTION = 200
DUALITY_TOL = 1e-8
CHAIN_TOL = 1e-8


@dataclass(frozen=True)
class InstanceSpec:
    seed: int
    size: int
    kernel_family: str
    subset_policy: str = "full"

    def __post_init__(self) -> None:
        if self.kernel_family not in KERNEL_FAMILIES:
            raise ArgumentError(
                f"kernel_family must be one of {KERNEL_FAMILIES}, got {self.kernel_family!r}"
            )
        if self.subset_policy not in SUBSET_POLICIES:
            raise ArgumentError(
                f"subset_policy must be one of {SUBSET_POLICIES}, got {self.subset_policy!r}"
            )
        if not 2 <= self.size <= 64:
            raise ArgumentError(f"instance size must be in [2, 64], got {self.size}")

    def to_jsonable(self) -> dict:
        return {
            "seed": self.seed,
            "size": self.size,
            "kernel_family": self.kernel_family,
            "subset_policy": self.subset_policy,
        }


@dataclass
class PropertyReport:
    property_id: str
    trials: int = 0
    failures: list = field(default_factory=list)
    worst_slack: float = -math.inf

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, spec: Optional[InstanceSpec], slack: float, detail: str, tol: float) -> None:
        """slack > tol means violation; the worst slack is kept either way."""
        self.trials += 1
        if slack > self.worst_slack:
            self.worst_slack = slack
        if slack > tol:
            self.failures.append(
                {
                    "instance": spec.to_jsonable() if spec else None,
                    "detail": detail,
                    "slack": slack,
                }
            )

    def to_jsonable(self) -> dict:
        worst = self.worst_slack
        return {
            "schema": 1,
            "property_id": self.property_id,
            "trials": self.trials,
            "failures": self.failures,
            "worst_slack": "inf" if math.isinf(worst) and worst > 0 else worst,
            "passed": self.passed,
        }


def gen_instance(spec: InstanceSpec) -> tuple[DiscreteSpace, SubsetRef, SubsetRef]:
    """Deterministic (space, H, L) from a spec; same spec, same instance."""
    rng = np.random.default_rng(spec.seed)
    n = spec.size
    label = f"{spec.kernel_family}-s{spec.seed}-n{n}"
    coords = None
    if spec.kernel_family == "metric-random":
        coords = rng.uniform(0.0, 1.0, size=(n, 2))
        diff = coords[:, None, :] - coords[None, :, :]
        kernel = np.sqrt((diff**2).sum(axis=2))
        kernel = (kernel + kernel.T) / 2.0
    elif spec.kernel_family == "psd-random":
        raw = rng.uniform(0.0, 1.0, size=(n, n))
        kernel = (raw + raw.T) / 2.0
    elif spec.kernel_family == "discrete":
        kernel = np.ones((n, n)) - np.eye(n)
    elif spec.kernel_family == "grid":
        sp = build_interval_grid(0.0, 1.0, n, "euclid", label=label)
        kernel, coords = np.asarray(sp.kernel), sp.coords
    else:  # infinite-diagonal
        raw = rng.uniform(0.1, 1.0, size=(n, n))
        kernel = (raw + raw.T) / 2.0
        np.fill_diagonal(kernel, np.inf)
    space = DiscreteSpace(kernel=kernel, label=label, coords=coords)

    if spec.subset_policy == "full":
        H = L = space.all_indices()
    elif spec.subset_policy == "nested":
        h_size = int(rng.integers(1, n + 1))
        l_size = int(rng.integers(h_size, n + 1))
        l_pick = np.sort(rng.choice(n, size=l_size, replace=False))
        h_pick = np.sort(rng.choice(l_pick, size=h_size, replace=False))
        H, L = SubsetRef(tuple(h_pick)), SubsetRef(tuple(l_pick))
    else:
        h_size = int(rng.integers(1, n + 1))
        l_size = int(rng.integers(1, n + 1))
        H = SubsetRef(tuple(np.sort(rng.choice(n, size=h_size, replace=False))))
        L = SubsetRef(tuple(np.sort(rng.choice(n, size=l_size, replace=False))))
    return space, H, L


# ---------------------------------------------------------------------------
# extended-value comparison helpers (slack > 0 means the relation failed)
# ---------------------------------------------------------------------------


def _le_slack(a: ExtendedValue, b: ExtendedValue) -> float:
    """How much a exceeds b; <= 0 when a <= b holds (inf-aware)."""
    if a.is_infinite:
        return 0.0 if b.is_infinite else math.inf
    if b.is_infinite:
        return -math.inf
    return a.finite_value - b.finite_value


def _eq_slack(a: ExtendedValue, b: ExtendedValue) -> float:
    if a.is_infinite or b.is_infinite:
        return 0.0 if a.is_infinite == b.is_infinite else math.inf
    return abs(a.finite_value - b.finite_value)


def _containment_slack(outer: ExtInterval, inner: ExtInterval) -> float:
    """How far inner sticks out of outer; <= 0 when contained."""
    if inner.empty:
        return 0.0
    if outer.empty:
        return math.inf
    lo_slack = _le_slack(outer.lo, inner.lo)  # need outer.lo <= inner.lo
    hi_slack = _le_slack(inner.hi, outer.hi)
    return max(lo_slack, hi_slack)


# ---------------------------------------------------------------------------
# individual checks
# ---------------------------------------------------------------------------


def check_chain(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """Weak duality q_lower(H,L) <= q_value(L,H), and for H inside L also
    q_lower(H,L) <= q_value(H,L)."""
    rep = report or PropertyReport("chain-weak-duality")
    ql = game.q_lower(space, H, L).value
    q_swap = game.q_value(space, L, H).value
    rep.record(spec, _le_slack(ql, q_swap), f"q_lower(H,L)={ql} vs q(L,H)={q_swap}", CHAIN_TOL)
    if H.issubset(L):
        q_same = game.q_value(space, H, L).value
        rep.record(spec, _le_slack(ql, q_same), f"nested: q_lower={ql} vs q={q_same}", CHAIN_TOL)
    return rep


def check_duality(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """Minimax equality |q_value(H,L) - q_lower(L,H)| within 1e-8 (finite kernels)."""
    rep = report or PropertyReport("minimax-duality")
    gap = game.duality_gap(space, H, L)
    rep.record(spec, gap, f"duality gap {gap}", DUALITY_TOL)
    return rep


def check_MqL(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n_max: int = 3,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """Exact small-n tuple values stay below their game limit from below."""
    rep = report or PropertyReport("cheb-below-game-limit")
    limit = game.q_lower(space, H, L).value
    for n in range(1, n_max + 1):
        if confopt.exact_budget(len(H), n) > confopt.EXACT_MULTISET_BUDGET:
            break
        mn = confopt.cheb_n(space, H, L, n, method="exact").value
        rep.record(spec, _le_slack(mn, limit), f"cheb_{n}={mn} vs limit {limit}", CHAIN_TOL)
    return rep


def check_dn_mn(
    space: DiscreteSpace,
    H: SubsetRef,
    n_max: int = 4,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """n-point diameter never exceeds the n-point Chebyshev value (diagonal case)."""
    rep = report or PropertyReport("diameter-below-cheb")
    for n in range(2, n_max + 1):
        if confopt.exact_budget(len(H), n) > confopt.EXACT_MULTISET_BUDGET:
            break
        dn = confopt.nth_diameter(space, H, n, method="exact").value
        mn = confopt.cheb_n(space, H, H, n, method="exact").value
        rep.record(spec, _le_slack(dn, mn), f"D_{n}={dn} vs M_{n}={mn}", CHAIN_TOL)
    return rep


def _nested_chain(space: DiscreteSpace, H: SubsetRef, L: SubsetRef) -> list[SubsetRef]:
    chain = [H]
    if H.issubset(L) and len(L) > len(H):
        chain.append(L)
    full = space.all_indices()
    if len(chain[-1]) < space.n_points:
        chain.append(full)
    return chain


def check_monotone(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n_cheb: int = 2,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """All monotone directions along a nested chain of sets.

    Growing the mass-carrying set can only lower u, v, w, q(., L), the
    diameters and q_lower(L, .) and cheb_n(L, .) (those two vary in their
    second argument), and can only shrink the rendezvous and average
    intervals.  Growing the evaluation set does the opposite.
    """
    rep = report or PropertyReport("set-monotonicity")
    chain = _nested_chain(space, H, L)
    if len(chain) < 2:
        chain = [H, space.all_indices()] if len(H) < space.n_points else [H]
    if len(chain) < 2:
        rep.trials += 1
        return rep
    small_enough_v = all(len(s) <= 10 for s in chain)

    def rec(cond: float, what: str) -> None:
        rep.record(spec, cond, what, CHAIN_TOL)

    for prev, cur in zip(chain, chain[1:]):
        # prev is a subset of cur; fixed evaluation set L
        rec(
            _le_slack(game.u_value(space, cur).value, game.u_value(space, prev).value),
            "u non-increasing in the mass set",
        )
        if small_enough_v:
            rec(
                _le_slack(game.v_value(space, cur).value, game.v_value(space, prev).value),
                "v non-increasing in the mass set",
            )
        rec(
            _le_slack(energyopt.w_energy(space, cur).value, energyopt.w_energy(space, prev).value),
            "w non-increasing in the mass set",
        )
        rec(
            _le_slack(game.q_value(space, cur, L).value, game.q_value(space, prev, L).value),
            "q(., L) non-increasing in the mass set",
        )
        rec(
            _le_slack(game.q_lower(space, L, cur).value, game.q_lower(space, L, prev).value),
            "q_lower(L, .) non-increasing in its evaluation set",
        )
        for n in range(2, n_cheb + 1):
            if confopt.exact_budget(len(cur), n) > confopt.EXACT_MULTISET_BUDGET:
                break
            rec(
                _le_slack(
                    confopt.nth_diameter(space, cur, n, method="exact").value,
                    confopt.nth_diameter(space, prev, n, method="exact").value,
                ),
                f"D_{n} non-increasing in the mass set",
            )
        if confopt.exact_budget(len(L), n_cheb) <= confopt.EXACT_MULTISET_BUDGET:
            rec(
                _le_slack(
                    confopt.cheb_n(space, L, cur, n_cheb, method="exact").value,
                    confopt.cheb_n(space, L, prev, n_cheb, method="exact").value,
                ),
                "cheb_n(L, .) non-increasing in its evaluation set",
            )
        rec(
            _containment_slack(
                rendezvous.rendezvous_interval(space, prev, L),
                rendezvous.rendezvous_interval(space, cur, L),
            ),
            "rendezvous interval shrinking in the mass set",
        )
        rec(
            _containment_slack(
                rendezvous.average_interval(space, prev, L),
                rendezvous.average_interval(space, cur, L),
            ),
            "average interval shrinking in the mass set",
        )
        # same chain reused as a growing evaluation set, fixed mass set H
        rec(
            _le_slack(game.q_value(space, H, prev).value, game.q_value(space, H, cur).value),
            "q(H, .) non-decreasing in the evaluation set",
        )
        rec(
            _le_slack(game.q_lower(space, prev, H).value, game.q_lower(space, cur, H).value),
            "q_lower(., H) non-decreasing in the mass set",
        )
        rec(
            _containment_slack(
                rendezvous.average_interval(space, H, cur),
                rendezvous.average_interval(space, H, prev),
            ),
            "average interval growing in the evaluation set",
        )
    return rep


def check_uniqueness(
    space: DiscreteSpace,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """Full-space average interval is a single point; for finite kernels the
    rendezvous interval is the same point."""
    rep = report or PropertyReport("full-space-singleton")
    full = space.all_indices()
    a = rendezvous.average_interval(space, full, full)
    width = _eq_slack(a.lo, a.hi)
    rep.record(spec, width, f"average interval width {width}", rendezvous.SINGLETON_REL_TOL)
    if np.isfinite(space.kernel).all():
        r = rendezvous.rendezvous_interval(space, full, full)
        rep.record(
            spec,
            max(_eq_slack(r.lo, a.lo), _eq_slack(r.hi, a.hi)),
            "rendezvous interval differs from average interval",
            rendezvous.SINGLETON_REL_TOL,
        )
    return rep


# ---------------------------------------------------------------------------
# brute-force oracle layer
# ---------------------------------------------------------------------------


_GRID_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All weight vectors with denominator ``resolution`` over k points."""
    key = (k, resolution)
    if key in _GRID_CACHE:
        return _GRID_CACHE[key]
    r = resolution
    if k == 1:
        grid = np.ones((1, 1))
    elif k == 2:
        i = np.arange(r + 1)
        grid = np.stack([i, r - i], axis=1) / r
    elif k == 3:
        i, j = np.meshgrid(np.arange(r + 1), np.arange(r + 1), indexing="ij")
        mask = i + j <= r
        grid = np.stack([i[mask], j[mask], r - i[mask] - j[mask]], axis=1) / r
    elif k == 4:
        i, j, l = np.meshgrid(
            np.arange(r + 1), np.arange(r + 1), np.arange(r + 1), indexing="ij"
        )
        mask = i + j + l <= r
        grid = (
            np.stack([i[mask], j[mask], l[mask], r - i[mask] - j[mask] - l[mask]], axis=1)
            / r
        )
    else:
        raise ArgumentError(f"simplex grid oracle supports up to 4 points, got {k}")
    grid.setflags(write=False)
    _GRID_CACHE[key] = grid
    return grid


def _grid_potentials(KHL: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Potential of every grid measure at every column, 0*inf handled."""
    isinf = np.isinf(KHL)
    pots = W @ np.where(isinf, 0.0, KHL)
    for x in range(KHL.shape[1]):
        rows = np.flatnonzero(isinf[:, x])
        if rows.size:
            pots[(W[:, rows] > 0.0).any(axis=1), x] = np.inf
    return pots


def oracle_q(
    space: DiscreteSpace, H: SubsetRef, L: SubsetRef, resolution: int = ORACLE_RESOLUTION
) -> ExtendedValue:
    W = _simplex_grid(len(H), resolution)
    KHL = space.kernel[np.ix_(H.as_array(), L.as_array())]
    return ExtendedValue(float(_grid_potentials(KHL, W).max(axis=1).min()))


def oracle_q_lower(
    space: DiscreteSpace, H: SubsetRef, L: SubsetRef, resolution: int = ORACLE_RESOLUTION
) -> ExtendedValue:
    W = _simplex_grid(len(H), resolution)
    KHL = space.kernel[np.ix_(H.as_array(), L.as_array())]
    return ExtendedValue(float(_grid_potentials(KHL, W).min(axis=1).max()))


def oracle_w(
    space: DiscreteSpace, H: SubsetRef, resolution: int = ORACLE_RESOLUTION
) -> ExtendedValue:
    W = _simplex_grid(len(H), resolution)
    KHH = space.kernel[np.ix_(H.as_array(), H.as_array())]
    isinf = np.isinf(KHH)
    energies = np.einsum("mi,ij,mj->m", W, np.where(isinf, 0.0, KHH), W)
    for i, j in zip(*np.where(isinf)):
        energies[(W[:, i] > 0.0) & (W[:, j] > 0.0)] = np.inf
    return ExtendedValue(float(energies.min()))


def oracle_tuple(
    space: DiscreteSpace, H: SubsetRef, L: SubsetRef, n: int, kind: str
) -> ExtendedValue:
    """Full ordered-tuple enumeration (independent of the multiset fast path)."""
    h_idx = H.as_array()
    l_idx = L.as_array()
    K = space.kernel
    best = None
    for tup in itertools.product(h_idx, repeat=n):
        if kind == "diameter":
            val = (
                2.0
                / ((n - 1) * n)
                * sum(K[tup[j], tup[l]] for j in range(n) for l in range(j + 1, n))
            )
        else:
            sums = np.zeros(len(l_idx))
            for t in tup:
                sums += K[np.asarray(l_idx), t]
            val = float(sums.min() / n) if kind == "cheb" else float(sums.max() / n)
        if best is None:
            best = val
        elif kind in ("diameter", "dual-cheb"):
            best = min(best, val)
        else:
            best = max(best, val)
    return ExtendedValue(best)


def check_oracle(
    space: DiscreteSpace,
    H: SubsetRef,
    L: SubsetRef,
    n_max: int = 3,
    spec: Optional[InstanceSpec] = None,
    report: Optional[PropertyReport] = None,
) -> PropertyReport:
    """Cross-check every quantity against the brute-force layer (|X| <= 4)."""
    if space.n_points > 4:
        raise ArgumentError("the brute-force oracle layer is limited to 4 points")
    rep = report or PropertyReport("oracle-equivalence")
    bracket = (2.0 / ORACLE_RESOLUTION) * max(1.0, space.max_finite_entry())

    pairs = [
        ("q", game.q_value(space, H, L).value, oracle_q(space, H, L)),
        ("q_lower", game.q_lower(space, H, L).value, oracle_q_lower(space, H, L)),
        ("w", energyopt.w_energy(space, H).value, oracle_w(space, H)),
    ]
    for n in range(2, n_max + 1):
        pairs.append(
            (
                f"D_{n}",
                confopt.nth_diameter(space, H, n, method="exact").value,
                oracle_tuple(space, H, L, n, "diameter"),
            )
        )
    for n in range(1, n_max + 1):
        pairs.append(
            (
                f"M_{n}",
                confopt.cheb_n(space, H, L, n, method="exact").value,
                oracle_tuple(space, H, L, n, "cheb"),
            )
        )
        pairs.append(
            (
                f"Mbar_{n}",
                confopt.dual_cheb_n(space, H, L, n, method="exact").value,
                oracle_tuple(space, H, L, n, "dual-cheb"),
            )
        )
    for name, fast, slow in pairs:
        rep.record(spec, _eq_slack(fast, slow), f"{name}: fast {fast} vs oracle {slow}", bracket)
    return rep


# ---------------------------------------------------------------------------
# suite driver
# ---------------------------------------------------------------------------


@dataclass
class SuiteConfig:
    seed: int = 0
    sizes: tuple[int, ...] = (2, 3, 4, 5, 6, 8)
    families: tuple[str, ...] = KERNEL_FAMILIES
    policies: tuple[str, ...] = ("full", "nested", "random")
    trials_per_cell: int = 2
    n_max: int = 3
    oracle: bool = True

    @classmethod
    def from_jsonable(cls, doc: dict) -> "SuiteConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(doc) - known
        if bad:
            raise ArgumentError(f"unknown suite config keys: {sorted(bad)}")
        kwargs = dict(doc)
        for key in ("sizes", "families", "policies"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        cfg = cls(**kwargs)
        for fam in cfg.families:
            if fam not in KERNEL_FAMILIES:
                raise ArgumentError(f"unknown kernel family {fam!r}")
        for pol in cfg.policies:
            if pol not in SUBSET_POLICIES:
                raise ArgumentError(f"unknown subset policy {pol!r}")
        return cfg


def run_suite(config: SuiteConfig) -> tuple[list[PropertyReport], int]:
    """Run every check over a seeded schedule; exit code 0 only on zero failures."""
    reports = {
        pid: PropertyReport(pid)
        for pid in (
            "chain-weak-duality",
            "minimax-duality",
            "cheb-below-game-limit",
            "diameter-below-cheb",
            "set-monotonicity",
            "full-space-singleton",
            "energy-chain",
            "oracle-equivalence",
        )
    }
    counter = 0
    for family in config.families:
        for size in config.sizes:
            for policy in config.policies:
                for trial in range(config.trials_per_cell):
                    spec = InstanceSpec(
                        seed=config.seed * 1_000_003 + counter,
                        size=size,
                        kernel_family=family,
                        subset_policy=policy,
                    )
                    counter += 1
                    space, H, L = gen_instance(spec)
                    finite = bool(np.isfinite(space.kernel).all())

                    check_chain(space, H, L, spec, reports["chain-weak-duality"])
                    if finite:
                        check_duality(space, H, L, spec, reports["minimax-duality"])
                    check_MqL(space, H, L, config.n_max, spec, reports["cheb-below-game-limit"])
                    check_dn_mn(space, H, min(config.n_max + 1, 4), spec, reports["diameter-below-cheb"])
                    if policy == "nested":
                        check_monotone(space, H, L, 2, spec, reports["set-monotonicity"])
                    if policy == "full":
                        check_uniqueness(space, spec, reports["full-space-singleton"])
                    chain = energyopt.energy_chain_check(space, H)
                    reports["energy-chain"].record(
                        spec,
                        0.0 if chain.passed else math.inf,
                        f"w={chain.w} q={chain.q} u={chain.u}",
                        CHAIN_TOL,
                    )
                    if config.oracle and space.n_points <= 4:
                        check_oracle(space, H, L, config.n_max, spec, reports["oracle-equivalence"])
    out = [reports[k] for k in sorted(reports)]
    exit_code = 0 if all(r.passed for r in out) else 1
    return out, exit_code


def reports_to_jsonl(reports: Sequence[PropertyReport]) -> str:
    return "\n".join(json.dumps(r.to_jsonable()) for r in reports)
