"""Command-line front end.

All machine output (JSON, CSV) goes to stdout or --output; human-readable
summaries go to stderr so results can be piped directly into plots.  Exit
codes: 0 success, 1 property failure, 2 usage, 3 bad data, 4 budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from .dispatch import (
    QUANTITIES,
    BuilderConfig,
    build_space,
    compute_quantity,
    load_space_file,
    thread_cap,
)
from .errors import (
    ArgumentError,
    BudgetExceededError,
    DataValidationError,
    PropertyViolationError,
    RendezkitError,
    SolverStalledError,
    UnresolvedInfinityError,
)
from .extcore import ext
from .space import SubsetRef
from .verify import SuiteConfig, reports_to_jsonl, run_suite

EXIT_OK = 0
EXIT_PROPERTY = 1
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_BUDGET = 4

SCHEMA_VERSION = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; keep the contract explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_space_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", help="space file (.json or .csv kernel matrix)")
    p.add_argument(
        "--builder",
        choices=("discrete2", "interval", "circle", "matrix-file"),
        help="construct the space instead of loading it",
    )
    p.add_argument("--kernel", default="euclid", help="euclid | discrete | neglog | riesz:S")
    p.add_argument("--N", type=int, default=0, help="grid size for interval/circle builders")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--circle-metric", choices=("chordal", "geodesic"), default="chordal")
    p.add_argument("--H", default="all", help='subset: "all", "0,2,5" or "0..9"')
    p.add_argument("--L", default="all")


def _resolve_space(args) -> "DiscreteSpace":
    if args.builder:
        cfg = BuilderConfig(
            builder=args.builder,
            kernel=args.kernel,
            n_points=args.N,
            a=args.a,
            b=args.b,
            circle_metric=args.circle_metric,
            space_file=args.space,
        )
        return build_space(cfg)
    if args.space:
        return load_space_file(args.space)
    raise ArgumentError("either --space FILE or --builder must be given")


def _emit(doc: dict, output: Optional[str]) -> None:
    text = json.dumps(doc, sort_keys=True)
    if output:
        with open(output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _cmd_compute(args) -> int:
    space = _resolve_space(args)
    H = SubsetRef.parse(args.H, space.n_points)
    L = SubsetRef.parse(args.L, space.n_points)
    result, summary = compute_quantity(
        space,
        args.quantity,
        H,
        L,
        n=args.n,
        method=args.method,
        seed=args.seed,
        max_support=args.max_support,
    )
    doc = {
        "schema": SCHEMA_VERSION,
        "command": "compute",
        "quantity": args.quantity,
        "space": space.label,
        "H": list(H.indices),
        "L": list(L.indices),
        "seed": args.seed,
        "result": result,
    }
    _emit(doc, args.output)
    print(f"{space.label}: {summary}", file=sys.stderr)
    if args.quantity == "chain" and not result.get("w_le_q", True):
        return EXIT_PROPERTY
    return EXIT_OK


def _sweep_cell(args, n_points: int) -> tuple[int, dict]:
    cell = argparse.Namespace(**vars(args))
    cell.N = n_points
    space = _resolve_space(cell)
    H = SubsetRef.parse(args.H, space.n_points)
    L = SubsetRef.parse(args.L, space.n_points)
    result, _ = compute_quantity(
        space, args.quantity, H, L, n=args.n, method=args.method, seed=args.seed
    )
    return n_points, result

def _trend(values: Sequence[float]) -> str:
    finite = [v for v in values if v is not None]
    if len(finite) < 2:
        return "flat"
    if all(b >= a - 1e-12 for a, b in zip(finite, finite[1:])):
        return "non-decreasing"
    if all(b <= a + 1e-12 for a, b in zip(finite, finite[1:])):
        return "non-increasing"
    return "mixed"


def _cmd_sweep(args) -> int:
    if not args.N_list:
        raise ArgumentError("sweep needs --N-list, e.g. --N-list 11,21,41")
    try:
        sizes = [int(tok) for tok in args.N_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ArgumentError(f"bad --N-list {args.N_list!r}") from exc
    if args.builder in (None, "matrix-file"):
        raise ArgumentError("sweep needs --builder interval or --builder circle")

    with ThreadPoolExecutor(max_workers=thread_cap()) as pool:
        rows = list(pool.map(lambda N: _sweep_cell(args, N), sizes))
    rows.sort(key=lambda pair: sizes.index(pair[0]))

    is_interval = args.quantity in ("R", "Rn", "A")
    records = []
    for n_points, result in rows:
        if is_interval:
            records.append(
                {"N": n_points, "lo": result["lo"], "hi": result["hi"], "empty": result["empty"]}
            )
        else:
            records.append({"N": n_points, "value": result["value"]})

    scalar_key = "lo" if is_interval else "value"
    numeric = [r[scalar_key] if isinstance(r[scalar_key], (int, float)) else None for r in records]
    trend = _trend(numeric)

    bracket = None
    if args.limit_bound is not None and not is_interval:
        # the sweep index is the grid size, so no sequence lemma applies
        # across rows; the bracket pairs the finest-grid value with the
        # externally supplied bound
        final = ext_from_json(records[-1]["value"])
        bracket = {"lo": final.to_jsonable(), "hi": float(args.limit_bound)}

    if args.format == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "command": "sweep",
            "quantity": args.quantity,
            "rows": records,
            "trend": trend,
        }
        if bracket:
            doc["bracket"] = bracket
        _emit(doc, args.output)
    else:
        buf = io.StringIO()
        fields = list(records[0].keys())
        writer = csv.DictWriter(buf, fieldnames=fields)
        writer.writeheader()
        writer.writerows(records)
        text = buf.getvalue()
        if args.output:
            with open(args.output, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    print(f"sweep {args.quantity} over N={sizes}: trend {trend}", file=sys.stderr)
    if bracket:
        print(
            f"limit bracket: [{bracket['lo']}, {bracket['hi']}]",
            file=sys.stderr,
        )
    return EXIT_OK


def ext_from_json(v):
    return ext(float("inf")) if v == "inf" else ext(float(v))


def _parse_int_list(text: str) -> tuple[int, ...]:
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if ".." in token:
            a, b = token.split("..", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(token))
    if not out:
        raise ArgumentError(f"empty integer list {text!r}")
    return tuple(out)


def _cmd_verify(args) -> int:
    doc = {}
    if args.config:
        try:
            doc = json.loads(open(args.config).read())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataValidationError(f"cannot read suite config: {exc}") from exc
    if args.sizes:
        doc["sizes"] = _parse_int_list(args.sizes)
    if args.families:
        doc["families"] = [f.strip() for f in args.families.split(",") if f.strip()]
    if args.policies:
        doc["policies"] = [p.strip() for p in args.policies.split(",") if p.strip()]
    if args.trials is not None:
        doc["trials_per_cell"] = args.trials
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.n_max is not None:
        doc["n_max"] = args.n_max
    if args.no_oracle:
        doc["oracle"] = False
    config = SuiteConfig.from_jsonable(doc)

    reports, exit_code = run_suite(config)
    text = reports_to_jsonl(reports)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for rep in reports:
        status = "ok" if rep.passed else f"FAIL({len(rep.failures)})"
        print(f"{rep.property_id}: {rep.trials} trials {status}", file=sys.stderr)
    return EXIT_OK if exit_code == 0 else EXIT_PROPERTY


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="rendezkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_compute = sub.add_parser("compute", help="compute one quantity on one space")
    _add_space_flags(p_compute)
    p_compute.add_argument("--quantity", required=True, choices=QUANTITIES)
    p_compute.add_argument("--n", type=int)
    p_compute.add_argument("--method", default="auto", choices=("auto", "exact", "local-search"))
    p_compute.add_argument("--seed", type=int, default=0)
    p_compute.add_argument("--max-support", type=int)
    p_compute.add_argument("--output")
    p_compute.set_defaults(func=_cmd_compute)

    p_sweep = sub.add_parser("sweep", help="one quantity across grid refinements")
    _add_space_flags(p_sweep)
    p_sweep.add_argument("--quantity", required=True, choices=QUANTITIES)
    p_sweep.add_argument("--N-list", dest="N_list", required=True)
    p_sweep.add_argument("--n", type=int)
    p_sweep.add_argument("--method", default="auto", choices=("auto", "exact", "local-search"))
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--limit-bound", type=float, help="external bound for the limit bracket")
    p_sweep.add_argument("--format", default="csv", choices=("csv", "json"))
    p_sweep.add_argument("--output")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the property suite")
    p_verify.add_argument("--config", help="suite config JSON file")
    p_verify.add_argument("--sizes", help='e.g. "2..8" or "2,4,8"')
    p_verify.add_argument("--families", help="comma-separated kernel families")
    p_verify.add_argument("--policies", help="comma-separated subset policies")
    p_verify.add_argument("--trials", type=int)
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--n-max", "--exhaustive-n", dest="n_max", type=int)
    p_verify.add_argument("--no-oracle", action="store_true")
    p_verify.add_argument("--output")
    p_verify.set_defaults(func=_cmd_verify)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ArgumentError as exc:
        print(f"rendezkit: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as exc:
        print(f"rendezkit: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DataValidationError,) as exc:
        print(f"rendezkit: bad data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (PropertyViolationError, UnresolvedInfinityError, SolverStalledError) as exc:
        print(f"rendezkit: solver failure: {exc}", file=sys.stderr)
        return EXIT_PROPERTY
    except RendezkitError as exc:
        print(f"rendezkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
