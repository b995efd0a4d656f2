"""Discrete kernel spaces: point sets with a symmetric nonnegative kernel matrix.

A space stores its kernel densely as float64 with ``numpy.inf`` marking the
infinite tag.  Matrix entries never go negative and never hold NaN; every
routine that mixes weights with kernel rows must go through the inf-aware
helpers in :mod:`rendezkit.measure` so that 0 * inf never turns into NaN.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ArgumentError, DataValidationError, KernelDomainError
from .extcore import ExtendedValue

__all__ = [
    "DiscreteSpace",
    "SubsetRef",
    "KERNEL_NAMES",
    "kernel_eval",
    "build_interval_grid",
    "build_circle_grid",
    "build_from_matrix",
    "space_to_json",
    "space_from_json",
    "kernel_from_csv",
]

KERNEL_NAMES = ("euclid", "discrete", "neglog", "riesz")


def _validate_kernel_matrix(kernel: np.ndarray) -> None:
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise DataValidationError(f"kernel must be square, got shape {kernel.shape}")
    if np.isnan(kernel).any():
        raise DataValidationError("kernel contains NaN")
    neg = np.argwhere(kernel < 0.0)
    if neg.size:
        i, j = neg[0]
        raise DataValidationError(
            f"kernel must be nonnegative; entry ({i},{j}) = {kernel[i, j]}"
        )
    asym = np.argwhere(kernel != kernel.T)
    if asym.size:
        i, j = asym[0]
        raise DataValidationError(
            f"kernel must be symmetric; entries ({i},{j}) = {kernel[i, j]} "
            f"and ({j},{i}) = {kernel[j, i]} differ"
        )


@dataclass(frozen=True)
class DiscreteSpace:
    """Finite point set with a symmetric, nonnegative, extended-real kernel."""

    kernel: np.ndarray
    label: str = "space"
    coords: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        kernel = np.asarray(self.kernel, dtype=float)
        kernel = kernel + 0.0  # drop -0.0
        _validate_kernel_matrix(kernel)
        kernel.setflags(write=False)
        object.__setattr__(self, "kernel", kernel)
        if self.coords is not None:
            coords = np.asarray(self.coords, dtype=float)
            if coords.ndim == 1:
                coords = coords[:, None]
            if coords.shape[0] != kernel.shape[0]:
                raise DataValidationError(
                    f"coords rows ({coords.shape[0]}) must match kernel size ({kernel.shape[0]})"
                )
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)

    @property
    def n_points(self) -> int:
        return self.kernel.shape[0]

    def kernel_entry(self, i: int, j: int) -> ExtendedValue:
        return ExtendedValue(float(self.kernel[i, j]))

    def max_finite_entry(self) -> float:
        finite = self.kernel[np.isfinite(self.kernel)]
        return float(finite.max()) if finite.size else 0.0

    def all_indices(self) -> "SubsetRef":
        return SubsetRef(tuple(range(self.n_points)))


@dataclass(frozen=True)
class SubsetRef:
    """Sorted, duplicate-free point indices naming a subset of a space."""

    indices: tuple[int, ...]
    allow_empty: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if any(i < 0 for i in idx):
            raise ArgumentError(f"subset indices must be nonnegative, got {self.indices}")
        if not idx and not self.allow_empty:
            raise ArgumentError("subset must be non-empty")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def validate_for(self, space: DiscreteSpace) -> None:
        if self.indices and self.indices[-1] >= space.n_points:
            raise ArgumentError(
                f"subset index {self.indices[-1]} out of range for "
                f"{space.n_points}-point space {space.label!r}"
            )

    def issubset(self, other: "SubsetRef") -> bool:
        return set(self.indices) <= set(other.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    @classmethod
    def parse(cls, text: str, n_points: int) -> "SubsetRef":
        """Parse "all", comma lists of indices, and inclusive ranges "i..j"."""
        text = text.strip()
        if text.lower() == "all":
            return cls(tuple(range(n_points)))
        out: list[int] = []
        for token in text.split(","):
            token = token.strip()
            if not token:
                continue
            if ".." in token:
                a_s, b_s = token.split("..", 1)
                try:
                    a, b = int(a_s), int(b_s)
                except ValueError as exc:
                    raise ArgumentError(f"bad range token {token!r}") from exc
                if b < a:
                    raise ArgumentError(f"range {token!r} is reversed")
                out.extend(range(a, b + 1))
            else:
                try:
                    out.append(int(token))
                except ValueError as exc:
                    raise ArgumentError(f"bad index token {token!r}") from exc
        ref = cls(tuple(out))
        if ref.indices and ref.indices[-1] >= n_points:
            raise ArgumentError(
                f"subset index {ref.indices[-1]} out of range for {n_points} points"
            )
        return ref


def kernel_eval(
    name: str,
    params: Sequence[float],
    x: Union[float, Sequence[float]],
    y: Union[float, Sequence[float]],
) -> ExtendedValue:
    """Evaluate one of the built-in kernels at a pair of points.

    euclid      |x - y|
    discrete    0 when x = y, 1 otherwise
    neglog      -log|x - y|, +inf on the diagonal; requires |x - y| <= 1
    riesz       |x - y| ** (-s) with s = params[0] > 0, +inf on the diagonal
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if xa.shape != ya.shape:
        raise ArgumentError(f"points have mismatched dimensions {xa.shape} vs {ya.shape}")
    dist = float(np.linalg.norm(xa - ya))
    if name == "euclid":
        return ExtendedValue(dist)
    if name == "discrete":
        return ExtendedValue(0.0 if dist == 0.0 else 1.0)
    if name == "neglog":
        if dist > 1.0:
            raise KernelDomainError(
                f"neglog kernel needs |x-y| <= 1 to stay nonnegative, got {dist}"
            )
        if dist == 0.0:
            return ExtendedValue(None)
        return ExtendedValue(-math.log(dist) + 0.0)
    if name == "riesz":
        if not params:
            raise ArgumentError("riesz kernel needs an exponent parameter s > 0")
        s = float(params[0])
        if s <= 0.0:
            raise ArgumentError(f"riesz exponent must be > 0, got {s}")
        if dist == 0.0:
            return ExtendedValue(None)
        return ExtendedValue(dist ** (-s))
    raise ArgumentError(f"unknown kernel {name!r}; choose from {KERNEL_NAMES}")


def _fill_kernel(coords: np.ndarray, name: str, params: Sequence[float]) -> np.ndarray:
    n = coords.shape[0]
    kernel = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            v = kernel_eval(name, params, coords[i], coords[j]).as_float()
            kernel[i, j] = kernel[j, i] = v
    return kernel


def build_interval_grid(
    a: float,
    b: float,
    n_points: int,
    kernel_name: str,
    params: Sequence[float] = (),
    label: Optional[str] = None,
) -> DiscreteSpace:
    """Equally spaced closed grid on [a, b] with a built-in kernel.

    Endpoints are included; refining with n' = 2n - 1 keeps the coarse grid a
    subset of the fine one, which is what the sweep command relies on.
    """
    if n_points < 2:
        raise ArgumentError(f"interval grid needs at least 2 points, got {n_points}")
    if not b > a:
        raise ArgumentError(f"interval needs a < b, got [{a}, {b}]")
    xs = np.linspace(a, b, n_points)
    kernel = _fill_kernel(xs[:, None], kernel_name, params)
    if label is None:
        label = f"interval[{a:g},{b:g}]-{kernel_name}-N{n_points}"
    return DiscreteSpace(kernel=kernel, label=label, coords=xs[:, None])


def build_circle_grid(
    n_points: int, metric: str = "chordal", label: Optional[str] = None
) -> DiscreteSpace:
    """n equally spaced points on the unit circle.

    chordal:  k = 2 |sin(pi (i-j) / n)|       (straight-line distance)
    geodesic: k = (2 pi / n) min(|i-j|, n-|i-j|)  (arc length)
    """
    if n_points < 3:
        raise ArgumentError(f"circle grid needs at least 3 points, got {n_points}")
    if metric not in ("chordal", "geodesic"):
        raise ArgumentError(f"circle metric must be chordal or geodesic, got {metric!r}")
    angles = 2.0 * np.pi * np.arange(n_points) / n_points
    coords = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    diff = np.abs(np.arange(n_points)[:, None] - np.arange(n_points)[None, :])
    if metric == "chordal":
        kernel = 2.0 * np.abs(np.sin(np.pi * diff / n_points))
    else:
        steps = np.minimum(diff, n_points - diff)
        kernel = (2.0 * np.pi / n_points) * steps
    kernel = (kernel + kernel.T) / 2.0  # kill rounding asymmetry bit-exactly
    if label is None:
        label = f"circle-{metric}-N{n_points}"
    return DiscreteSpace(kernel=kernel, label=label, coords=coords)


def build_from_matrix(
    matrix: Union[np.ndarray, Sequence[Sequence[Union[float, str]]]],
    label: str = "matrix",
    coords: Optional[np.ndarray] = None,
) -> DiscreteSpace:
    """Validated space from an explicit kernel matrix ("inf" tokens allowed)."""
    rows = []
    for row in matrix:
        rows.append([ExtendedValue.from_jsonable(v).as_float() for v in row])
    kernel = np.asarray(rows, dtype=float)
    return DiscreteSpace(kernel=kernel, label=label, coords=coords)


def space_to_json(space: DiscreteSpace) -> str:
    """Serialize; finite entries stay JSON numbers, infinities become "inf"."""
    kernel_rows = [
        [ExtendedValue(float(v)).to_jsonable() for v in row] for row in space.kernel
    ]
    doc: dict = {"schema": 1, "label": space.label, "kernel": kernel_rows}
    if space.coords is not None:
        doc["coords"] = [list(map(float, p)) for p in space.coords]
    return json.dumps(doc)


def space_from_json(text: str) -> DiscreteSpace:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataValidationError(f"space file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "kernel" not in doc:
        raise DataValidationError('space file must be an object with a "kernel" field')
    coords = np.asarray(doc["coords"], dtype=float) if "coords" in doc else None
    return build_from_matrix(doc["kernel"], label=doc.get("label", "space"), coords=coords)


def kernel_from_csv(text: str, label: str = "csv-space") -> DiscreteSpace:
    """Header-free CSV kernel matrix; the token "inf" marks infinite entries."""
    rows: list[list[Union[float, str]]] = []
    for record in csv.reader(io.StringIO(text)):
        if not record or all(not cell.strip() for cell in record):
            continue
        rows.append([cell.strip() for cell in record])
    if not rows:
        raise DataValidationError("CSV kernel file is empty")
    parsed: list[list[Union[float, str]]] = []
    for record in rows:
        out_row: list[Union[float, str]] = []
        for cell in record:
            if cell.lower() in ("inf", "+inf", "infinity"):
                out_row.append("inf")
            else:
                try:
                    out_row.append(float(cell))
                except ValueError as exc:
                    raise DataValidationError(f"bad CSV kernel entry {cell!r}") from exc
        parsed.append(out_row)
    return build_from_matrix(parsed, label=label)
