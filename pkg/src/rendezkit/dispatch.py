"""Quantity dispatch shared by the command line and the HTTP service.

Maps quantity identifiers onto module operations and normalizes results to
JSON-ready dictionaries.  Identifiers are part of the external interface:

    q qlower u v w Dn Mn Mbarn Cn R Rn A chain duality
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import confopt, energyopt, game, rendezvous
from .errors import ArgumentError, DataValidationError
from .space import (
    DiscreteSpace,
    SubsetRef,
    build_circle_grid,
    build_from_matrix,
    build_interval_grid,
    kernel_from_csv,
    space_from_json,
)

__all__ = [
    "QUANTITIES",
    "BuilderConfig",
    "build_space",
    "load_space_file",
    "parse_kernel_flag",
    "compute_quantity",
    "thread_cap",
]

QUANTITIES = (
    "q",
    "qlower",
    "u",
    "v",
    "w",
    "Dn",
    "Mn",
    "Mbarn",
    "Cn",
    "R",
    "Rn",
    "A",
    "chain",
    "duality",
)

_NEEDS_N = ("Dn", "Mn", "Mbarn", "Cn", "Rn")


def thread_cap() -> int:
    """Worker cap for sweep parallelism, overridable via RENDEZKIT_THREADS."""
    env = os.environ.get("RENDEZKIT_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise ArgumentError(f"RENDEZKIT_THREADS must be an integer, got {env!r}") from exc
        return max(1, cap)
    return min(4, os.cpu_count() or 1)


def parse_kernel_flag(flag: str) -> tuple[str, tuple[float, ...]]:
    """"euclid" -> ("euclid", ()); "riesz:0.5" -> ("riesz", (0.5,))."""
    if ":" in flag:
        name, _, raw = flag.partition(":")
        try:
            return name, (float(raw),)
        except ValueError as exc:
            raise ArgumentError(f"bad kernel parameter in {flag!r}") from exc
    return flag, ()


@dataclass(frozen=True)
class BuilderConfig:
    builder: str  # discrete2 | interval | circle | matrix-file
    kernel: str = "euclid"
    n_points: int = 0
    a: float = 0.0
    b: float = 1.0
    circle_metric: str = "chordal"
    space_file: Optional[str] = None


def load_space_file(path: str) -> DiscreteSpace:
    p = Path(path)
    if not p.exists():
        raise DataValidationError(f"space file not found: {path}")
    text = p.read_text()
    if p.suffix.lower() == ".csv":
        return kernel_from_csv(text, label=p.stem)
    return space_from_json(text)


def build_space(cfg: BuilderConfig) -> DiscreteSpace:
    if cfg.builder == "discrete2":
        return build_from_matrix([[0, 1], [1, 0]], label="discrete2")
    if cfg.builder == "interval":
        name, params = parse_kernel_flag(cfg.kernel)
        if cfg.n_points < 2:
            raise ArgumentError("interval builder needs --N >= 2")
        return build_interval_grid(cfg.a, cfg.b, cfg.n_points, name, params)
    if cfg.builder == "circle":
        if cfg.n_points < 3:
            raise ArgumentError("circle builder needs --N >= 3")
        return build_circle_grid(cfg.n_points, cfg.circle_metric)
    if cfg.builder == "matrix-file":
        if not cfg.space_file:
            raise ArgumentError("matrix-file builder needs --space FILE")
        return load_space_file(cfg.space_file)
    raise ArgumentError(
        f"unknown builder {cfg.builder!r}; choose discrete2, interval, circle or matrix-file"
    )


def compute_quantity(
    space: DiscreteSpace,
    quantity: str,
    H: SubsetRef,
    L: SubsetRef,
    n: Optional[int] = None,
    method: str = "auto",
    seed: int = 0,
    max_support: Optional[int] = None,
    n_list: Sequence[int] = (1, 2, 3),
) -> tuple[dict, str]:
    """Run one quantity; returns (jsonable result, one-line human summary)."""
    if quantity not in QUANTITIES:
        raise ArgumentError(f"unknown quantity {quantity!r}; choose from {QUANTITIES}")
    if quantity in _NEEDS_N and n is None:
        raise ArgumentError(f"quantity {quantity} needs --n")

    if quantity == "q":
        sol = game.q_value(space, H, L)
        return sol.to_jsonable(), f"q = {sol.value.to_jsonable()} ({sol.status}, gap {sol.gap:.2e})"
    if quantity == "qlower":
        sol = game.q_lower(space, H, L)
        return sol.to_jsonable(), f"qlower = {sol.value.to_jsonable()} ({sol.status}, gap {sol.gap:.2e})"
    if quantity == "u":
        sol = game.u_value(space, H)
        return sol.to_jsonable(), f"u = {sol.value.to_jsonable()} ({sol.status})"
    if quantity == "v":
        sol = game.v_value(space, H, max_support)
        return sol.to_jsonable(), f"v = {sol.value.to_jsonable()} ({sol.status})"
    if quantity == "w":
        res = energyopt.w_energy(space, H)
        return (
            res.to_jsonable(),
            f"w = {res.value.to_jsonable()} ({res.iterations} iterations, gap {res.certificate_gap:.2e})",
        )
    if quantity == "Dn":
        wit = confopt.nth_diameter(space, H, n, method=method, seed=seed)
        return wit.to_jsonable(), f"D_{n} = {wit.value.to_jsonable()} ({wit.method})"
    if quantity == "Mn":
        wit = confopt.cheb_n(space, H, L, n, method=method, seed=seed)
        return wit.to_jsonable(), f"M_{n} = {wit.value.to_jsonable()} ({wit.method})"
    if quantity == "Mbarn":
        wit = confopt.dual_cheb_n(space, H, L, n, method=method, seed=seed)
        return wit.to_jsonable(), f"Mbar_{n} = {wit.value.to_jsonable()} ({wit.method})"
    if quantity == "Cn":
        wit = confopt.modified_cheb_n(space, H, n, method=method, seed=seed)
        return wit.to_jsonable(), f"C_{n} = {wit.value.to_jsonable()} ({wit.method})"
    if quantity == "R":
        iv = rendezvous.rendezvous_interval(space, H, L)
        return iv.to_jsonable(), f"R = {_fmt_interval(iv)}"
    if quantity == "Rn":
        iv = rendezvous.rendezvous_interval_n(space, H, L, n, method=method, seed=seed)
        return iv.to_jsonable(), f"R_{n} = {_fmt_interval(iv)}"
    if quantity == "A":
        iv = rendezvous.average_interval(space, H, L)
        return iv.to_jsonable(), f"A = {_fmt_interval(iv)}"
    if quantity == "chain":
        rep = energyopt.energy_chain_check(space, H)
        verdict = "holds" if rep.passed else "VIOLATED"
        return rep.to_jsonable(), f"w <= q <= u {verdict}"
    # duality
    gap = game.duality_gap(space, H, L)
    return {"gap": gap}, f"duality gap = {gap:.3e}"


def _fmt_interval(iv) -> str:
    if iv.empty:
        return "empty"
    lo, hi = iv.lo.to_jsonable(), iv.hi.to_jsonable()
    if not iv.lo.is_infinite and not iv.hi.is_infinite and math.isclose(
        iv.lo.finite_value, iv.hi.finite_value, abs_tol=1e-9
    ):
        return f"{{{lo}}}"
    return f"[{lo}, {hi}]"
