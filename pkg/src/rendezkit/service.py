"""HTTP service wrapping the workbench.

Spaces are built or uploaded once, held in an in-memory registry keyed by
label, and then queried repeatedly; that is the main reason to run the
workbench as a service instead of one-shot CLI calls.  All numeric semantics
are identical to the CLI, which uses the same dispatcher.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from . import __version__
from .dispatch import BuilderConfig, build_space, compute_quantity
from .errors import ArgumentError, BudgetExceededError, RendezkitError
from .schemas import (
    ComputeRequest,
    ComputeResponse,
    SpaceCreateRequest,
    SpaceInfo,
    SweepRequest,
    SweepResponse,
    VerifyRequest,
    VerifyResponse,
)
from .space import DiscreteSpace, SubsetRef, build_from_matrix
from .verify import SuiteConfig, run_suite

import numpy as np


def _space_info(space: DiscreteSpace) -> SpaceInfo:
    return SpaceInfo(
        label=space.label,
        n_points=space.n_points,
        has_coords=space.coords is not None,
        max_finite_entry=space.max_finite_entry(),
        has_infinite_entries=bool(np.isinf(space.kernel).any()),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="rendezkit", version=__version__)
    registry: dict[str, DiscreteSpace] = {}

    @app.exception_handler(RendezkitError)
    async def _domain_error(request, exc: RendezkitError):
        status = 400
        if isinstance(exc, BudgetExceededError):
            status = 422
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "spaces": len(registry)}

    @app.post("/spaces", response_model=SpaceInfo)
    def create_space(req: SpaceCreateRequest) -> SpaceInfo:
        if (req.builder is None) == (req.kernel_matrix is None):
            raise ArgumentError("provide exactly one of builder or kernel_matrix")
        if req.builder is not None:
            cfg = BuilderConfig(
                builder=req.builder.builder,
                kernel=req.builder.kernel,
                n_points=req.builder.n_points,
                a=req.builder.a,
                b=req.builder.b,
                circle_metric=req.builder.circle_metric,
            )
            space = build_space(cfg)
            if req.label:
                space = DiscreteSpace(
                    kernel=np.asarray(space.kernel), label=req.label, coords=space.coords
                )
        else:
            space = build_from_matrix(
                req.kernel_matrix,
                label=req.label or "uploaded",
                coords=None if req.coords is None else np.asarray(req.coords),
            )
        registry[space.label] = space
        return _space_info(space)

    @app.get("/spaces", response_model=list[SpaceInfo])
    def list_spaces() -> list[SpaceInfo]:
        return [_space_info(s) for s in registry.values()]

    @app.get("/spaces/{label}", response_model=SpaceInfo)
    def get_space(label: str) -> SpaceInfo:
        if label not in registry:
            raise HTTPException(status_code=404, detail=f"no space labeled {label!r}")
        return _space_info(registry[label])

    @app.delete("/spaces/{label}")
    def delete_space(label: str) -> dict:
        if label not in registry:
            raise HTTPException(status_code=404, detail=f"no space labeled {label!r}")
        del registry[label]
        return {"deleted": label}

    @app.post("/compute", response_model=ComputeResponse, response_model_by_alias=True)
    def compute(req: ComputeRequest) -> ComputeResponse:
        if req.space_label not in registry:
            raise HTTPException(status_code=404, detail=f"no space labeled {req.space_label!r}")
        space = registry[req.space_label]
        H = SubsetRef.parse(req.H, space.n_points)
        L = SubsetRef.parse(req.L, space.n_points)
        result, summary = compute_quantity(
            space,
            req.quantity,
            H,
            L,
            n=req.n,
            method=req.method,
            seed=req.seed,
            max_support=req.max_support,
        )
        return ComputeResponse(
            quantity=req.quantity,
            space=space.label,
            H=list(H.indices),
            L=list(L.indices),
            seed=req.seed,
            result=result,
            summary=summary,
        )

    @app.post("/sweep", response_model=SweepResponse, response_model_by_alias=True)
    def sweep(req: SweepRequest) -> SweepResponse:
        rows = []
        values = []
        for n_points in req.n_list:
            cfg = BuilderConfig(
                builder=req.builder.builder,
                kernel=req.builder.kernel,
                n_points=n_points,
                a=req.builder.a,
                b=req.builder.b,
                circle_metric=req.builder.circle_metric,
            )
            space = build_space(cfg)
            H = SubsetRef.parse(req.H, space.n_points)
            L = SubsetRef.parse(req.L, space.n_points)
            result, _ = compute_quantity(
                space, req.quantity, H, L, n=req.n, method=req.method, seed=req.seed
            )
            if "lo" in result:
                rows.append({"N": n_points, **{k: result[k] for k in ("lo", "hi", "empty")}})
                values.append(result["lo"])
            else:
                rows.append({"N": n_points, "value": result["value"]})
                values.append(result["value"])
        finite = [v for v in values if isinstance(v, (int, float))]
        if len(finite) >= 2 and all(b >= a - 1e-12 for a, b in zip(finite, finite[1:])):
            trend = "non-decreasing"
        elif len(finite) >= 2 and all(b <= a + 1e-12 for a, b in zip(finite, finite[1:])):
            trend = "non-increasing"
        else:
            trend = "mixed" if len(finite) >= 2 else "flat"
        bracket = None
        if req.limit_bound is not None and rows and "value" in rows[-1]:
            bracket = {"lo": rows[-1]["value"], "hi": req.limit_bound}
        return SweepResponse(quantity=req.quantity, rows=rows, trend=trend, bracket=bracket)

    @app.post("/verify", response_model=VerifyResponse, response_model_by_alias=True)
    def verify(req: VerifyRequest) -> VerifyResponse:
        doc = req.model_dump(exclude_none=True)
        config = SuiteConfig.from_jsonable(doc)
        reports, exit_code = run_suite(config)
        return VerifyResponse(
            reports=[r.to_jsonable() for r in reports], exit_code=exit_code
        )

    return app
