"""Probability measures on a discrete space, their potentials and energies.

All numeric paths here are infinity-aware: a kernel entry of +inf contributes
nothing under zero weight and dominates under positive weight.  The helpers
``potential_vector`` and ``mutual_energy_float`` are the only places where
weights meet kernel rows, so the 0 * inf convention is enforced centrally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ArgumentError, DataValidationError
from .extcore import ExtendedValue, ExtInterval, make_interval
from .space import DiscreteSpace, SubsetRef

__all__ = [
    "ProbabilityMeasure",
    "PotentialExtremum",
    "potential",
    "potential_vector",
    "sup_potential",
    "inf_potential",
    "mutual_energy",
    "mutual_energy_float",
    "energy",
    "measure_interval",
]

SUM_ACCEPT_TOL = 1e-9  # renormalize inside this band, reject beyond
SUM_INVARIANT_TOL = 1e-12


@dataclass(frozen=True)
class ProbabilityMeasure:
    """Nonnegative weights over the points of a space, summing to one.

    Weight vectors whose sum is off by at most 1e-9 are renormalized (parser
    rounding); anything worse is rejected as a real error.
    """

    weights: np.ndarray
    space_label: str = "space"

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float).copy()
        if w.ndim != 1:
            raise DataValidationError(f"weights must be a vector, got shape {w.shape}")
        if np.isnan(w).any() or np.isinf(w).any():
            raise DataValidationError("weights must be finite")
        if (w < 0.0).any():
            i = int(np.argmin(w))
            raise DataValidationError(f"weights must be nonnegative; weight[{i}] = {w[i]}")
        total = float(w.sum())
        if abs(total - 1.0) > SUM_ACCEPT_TOL:
            raise DataValidationError(
                f"weights sum to {total}, outside the acceptance band |sum-1| <= {SUM_ACCEPT_TOL}"
            )
        if total != 1.0:
            w = w / total
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def n_points(self) -> int:
        return self.weights.shape[0]

    def support(self) -> tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.weights > 0.0))

    @classmethod
    def uniform_on(cls, space: DiscreteSpace, subset: SubsetRef) -> "ProbabilityMeasure":
        subset.validate_for(space)
        w = np.zeros(space.n_points)
        w[subset.as_array()] = 1.0 / len(subset)
        return cls(weights=w, space_label=space.label)

    @classmethod
    def dirac(cls, space: DiscreteSpace, index: int) -> "ProbabilityMeasure":
        if not 0 <= index < space.n_points:
            raise ArgumentError(f"index {index} out of range for {space.n_points} points")
        w = np.zeros(space.n_points)
        w[index] = 1.0
        return cls(weights=w, space_label=space.label)

    @classmethod
    def from_weights(
        cls, space: DiscreteSpace, weights: Sequence[float]
    ) -> "ProbabilityMeasure":
        w = np.asarray(weights, dtype=float)
        if w.shape != (space.n_points,):
            raise DataValidationError(
                f"weights length {w.shape} does not match space size {space.n_points}"
            )
        return cls(weights=w, space_label=space.label)

    def to_jsonable(self) -> dict:
        return {"space_label": self.space_label, "weights": [float(v) for v in self.weights]}

    @classmethod
    def from_jsonable(cls, doc: dict) -> "ProbabilityMeasure":
        return cls(
            weights=np.asarray(doc["weights"], dtype=float),
            space_label=doc.get("space_label", "space"),
        )


def _check_measure(space: DiscreteSpace, mu: ProbabilityMeasure) -> None:
    if mu.n_points != space.n_points:
        raise ArgumentError(
            f"measure over {mu.n_points} points does not fit space of {space.n_points}"
        )
    if mu.space_label != space.label:
        raise ArgumentError(
            f"measure belongs to space {mu.space_label!r}, not {space.label!r}"
        )


def potential_vector(kernel: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """kernel @ weights with 0*inf = 0; returns floats where inf marks the tag."""
    isinf = np.isinf(kernel)
    if not isinf.any():
        return kernel @ weights
    finite_part = np.where(isinf, 0.0, kernel) @ weights
    inf_hit = (isinf & (weights > 0.0)[None, :]).any(axis=1)
    return np.where(inf_hit, np.inf, finite_part)


def potential(space: DiscreteSpace, mu: ProbabilityMeasure, x: int) -> ExtendedValue:
    """Potential of the measure at point x: the kernel row averaged against mu."""
    _check_measure(space, mu)
    if not 0 <= x < space.n_points:
        raise ArgumentError(f"point index {x} out of range for {space.n_points} points")
    row = space.kernel[x]
    isinf = np.isinf(row)
    if (isinf & (mu.weights > 0.0)).any():
        return ExtendedValue(None)
    return ExtendedValue(float(np.where(isinf, 0.0, row) @ mu.weights))


class PotentialExtremum(NamedTuple):
    value: ExtendedValue
    index: int  # attaining point, smallest index on ties


def sup_potential(
    space: DiscreteSpace, mu: ProbabilityMeasure, region: SubsetRef
) -> PotentialExtremum:
    """Largest potential over the region, with the attaining point."""
    _check_measure(space, mu)
    region.validate_for(space)
    idx = region.as_array()
    pots = potential_vector(space.kernel[idx], mu.weights)
    k = int(np.argmax(pots))  # argmax returns the first maximizer
    return PotentialExtremum(ExtendedValue(float(pots[k])), int(idx[k]))


def inf_potential(
    space: DiscreteSpace, mu: ProbabilityMeasure, region: SubsetRef
) -> PotentialExtremum:
    """Smallest potential over the region, with the attaining point."""
    _check_measure(space, mu)
    region.validate_for(space)
    idx = region.as_array()
    pots = potential_vector(space.kernel[idx], mu.weights)
    k = int(np.argmin(pots))
    return PotentialExtremum(ExtendedValue(float(pots[k])), int(idx[k]))


def mutual_energy_float(
    kernel: np.ndarray, w_left: np.ndarray, w_right: np.ndarray
) -> float:
    """w_left^T kernel w_right with the 0*inf convention, as a float (inf allowed)."""
    isinf = np.isinf(kernel)
    if isinf.any():
        hit = isinf & np.outer(w_left > 0.0, w_right > 0.0)
        if hit.any():
            return float("inf")
        kernel = np.where(isinf, 0.0, kernel)
    return float(w_left @ kernel @ w_right)


def mutual_energy(
    space: DiscreteSpace, mu: ProbabilityMeasure, nu: Optional[ProbabilityMeasure] = None
) -> ExtendedValue:
    """Mutual energy of two measures (their own energy when nu is omitted)."""
    _check_measure(space, mu)
    if nu is None:
        nu = mu
    else:
        _check_measure(space, nu)
    return ExtendedValue(mutual_energy_float(space.kernel, nu.weights, mu.weights))


def energy(space: DiscreteSpace, mu: ProbabilityMeasure) -> ExtendedValue:
    return mutual_energy(space, mu)


def measure_interval(
    space: DiscreteSpace, mu: ProbabilityMeasure, region: SubsetRef
) -> ExtInterval:
    """Closed range of the potential over the region; never empty."""
    lo = inf_potential(space, mu, region).value
    hi = sup_potential(space, mu, region).value
    return make_interval(lo, hi)
