"""Pydantic request/response models for the HTTP service.

Extended values travel as JSON numbers when finite and as the string "inf"
when infinite, matching the file formats and CLI output.
"""

from __future__ import annotations

from typing import Literal, Optional, Union

from pydantic import BaseModel, Field, field_validator

ExtValue = Union[float, Literal["inf"]]


class BuilderSpec(BaseModel):
    builder: Literal["discrete2", "interval", "circle"]
    kernel: str = "euclid"
    n_points: int = Field(default=0, alias="N")
    a: float = 0.0
    b: float = 1.0
    circle_metric: Literal["chordal", "geodesic"] = "chordal"

    model_config = {"populate_by_name": True}


class SpaceCreateRequest(BaseModel):
    label: Optional[str] = None
    builder: Optional[BuilderSpec] = None
    kernel_matrix: Optional[list[list[ExtValue]]] = None
    coords: Optional[list[list[float]]] = None

    @field_validator("kernel_matrix")
    @classmethod
    def _square(cls, v):
        if v is not None:
            if any(len(row) != len(v) for row in v):
                raise ValueError("kernel matrix must be square")
        return v


class SpaceInfo(BaseModel):
    label: str
    n_points: int
    has_coords: bool
    max_finite_entry: float
    has_infinite_entries: bool


class ComputeRequest(BaseModel):
    space_label: str
    quantity: str
    H: str = "all"
    L: str = "all"
    n: Optional[int] = None
    method: Literal["auto", "exact", "local-search"] = "auto"
    seed: int = 0
    max_support: Optional[int] = None


class ComputeResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    quantity: str
    space: str
    H: list[int]
    L: list[int]
    seed: int
    result: dict
    summary: str

    model_config = {"populate_by_name": True}


class SweepRequest(BaseModel):
    builder: BuilderSpec
    quantity: str
    n_list: list[int]
    H: str = "all"
    L: str = "all"
    n: Optional[int] = None
    method: Literal["auto", "exact", "local-search"] = "auto"
    seed: int = 0
    limit_bound: Optional[float] = None


class SweepResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    quantity: str
    rows: list[dict]
    trend: str
    bracket: Optional[dict] = None

    model_config = {"populate_by_name": True}


class VerifyRequest(BaseModel):
    seed: int = 0
    sizes: list[int] = [2, 3, 4, 5, 6, 8]
    families: Optional[list[str]] = None
    policies: Optional[list[str]] = None
    trials_per_cell: int = 2
    n_max: int = 3
    oracle: bool = True


class VerifyResponse(BaseModel):
    schema_version: int = Field(default=1, alias="schema")
    reports: list[dict]
    exit_code: int

    model_config = {"populate_by_name": True}


class ErrorBody(BaseModel):
    error: str
    detail: str
