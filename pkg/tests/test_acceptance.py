"""Acceptance suite: one test per release criterion, each printing a verdict
line with its measured runtime.  Tolerances are pinned here, not configured."""

import json
import math
import time

from rendezkit.confopt import cheb_limits_via_games, cheb_n, nth_diameter
from rendezkit.energyopt import energy_chain_check
from rendezkit.game import duality_gap, q_lower, q_sharp_value, q_value
from rendezkit.rendezvous import average_interval, compare_R_A, rendezvous_interval
from rendezkit.space import SubsetRef, build_circle_grid, build_from_matrix, build_interval_grid
from rendezkit.verify import InstanceSpec, check_monotone, check_oracle, gen_instance

LOG4 = math.log(4.0)


def _verdict(name: str, ok: bool, detail: str, elapsed: float) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail} ({elapsed:.3f}s)")
    assert ok, f"{name}: {detail}"


def _finite_instances(count: int = 200):
    for i in range(count):
        yield InstanceSpec(
            seed=10_000 + i,
            size=2 + i % 7,
            kernel_family=("metric-random", "psd-random")[i % 2],
            subset_policy=("full", "nested", "random")[i % 3],
        )


def _infinite_instances(count: int = 50):
    for i in range(count):
        yield InstanceSpec(
            seed=20_000 + i,
            size=2 + i % 7,
            kernel_family="infinite-diagonal",
            subset_policy=("full", "nested", "random")[i % 3],
        )


def test_criterion_1_two_point_exact():
    two = build_from_matrix([[0, 1], [1, 0]], label="discrete2")
    X = two.all_indices()
    a = SubsetRef((0,))
    q_value(two, X, X)  # warm the solver path before timing
    start = time.perf_counter()
    sol = q_value(two, X, X)
    elapsed = time.perf_counter() - start
    single = q_value(two, a, a)
    ok = (
        sol.value.finite_value == 0.5
        and sol.gap <= 1e-12
        and single.value.finite_value == 0.0
        and elapsed < 1e-3
    )
    _verdict(
        "criterion 1 (two-point values, < 1 ms)",
        ok,
        f"q(X,X)={sol.value.to_jsonable()} gap={sol.gap:.1e} q(a,a)={single.value.to_jsonable()}",
        elapsed,
    )


def test_criterion_2_unit_interval_rendezvous():
    start = time.perf_counter()
    grid = build_interval_grid(0.0, 1.0, 101, "euclid")
    X = grid.all_indices()
    iv = rendezvous_interval(grid, X, X)
    elapsed = time.perf_counter() - start
    lo, hi = iv.lo.finite_value, iv.hi.finite_value
    ok = abs(lo - 0.5) < 0.01 and abs(hi - 0.5) < 0.01 and elapsed < 5.0
    _verdict(
        "criterion 2 (unit interval rendezvous, < 5 s)",
        ok,
        f"R = [{lo:.6f}, {hi:.6f}]",
        elapsed,
    )


def test_criterion_3_circle_average_closed_form():
    start = time.perf_counter()
    worst = 0.0
    final = None
    for n in (8, 16, 32, 64, 128):
        sp = build_circle_grid(n, "chordal")
        X = sp.all_indices()
        iv = average_interval(sp, X, X)
        closed = (2.0 / n) / math.tan(math.pi / (2 * n))
        assert iv.is_singleton(tol=1e-8), f"N={n} interval not a singleton"
        worst = max(
            worst,
            abs(iv.lo.finite_value - closed),
            abs(iv.hi.finite_value - closed),
        )
        final = iv.hi.finite_value
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and abs(final - 4 / math.pi) <= 5e-4 and elapsed < 10.0
    _verdict(
        "criterion 3 (circle closed form, < 10 s)",
        ok,
        f"worst endpoint error {worst:.2e}, |A(128) - 4/pi| = {abs(final - 4/math.pi):.2e}",
        elapsed,
    )


def test_criterion_4_neglog_diameters():
    start = time.perf_counter()
    grid = build_interval_grid(0.0, 1.0, 257, "neglog")
    X = grid.all_indices()
    d2 = nth_diameter(grid, X, 2, method="exact")
    d3 = nth_diameter(grid, X, 3, method="local-search", seed=0)
    values = []
    prev = None
    for n in range(2, 17):
        warm = [] if prev is None else [tuple(prev) + (prev[-1],)]
        wit = nth_diameter(grid, X, n, method="local-search", seed=0, warm_starts=warm)
        values.append(wit.value.finite_value)
        prev = wit.points
    elapsed = time.perf_counter() - start
    monotone = all(b >= a - 1e-12 for a, b in zip(values, values[1:]))
    bounded = max(values) <= LOG4 + 1e-3
    ok = (
        d2.value.finite_value == 0.0
        and abs(d3.value.finite_value - LOG4 / 3) <= 1e-3
        and monotone
        and bounded
        and elapsed < 60.0
    )
    _verdict(
        "criterion 4 (neglog diameters, < 60 s)",
        ok,
        f"D2={d2.value.finite_value} D3={d3.value.finite_value:.6f} "
        f"max D_n={max(values):.4f} monotone={monotone}",
        elapsed,
    )


def test_criterion_5_minimax_duality_batch():
    start = time.perf_counter()
    worst = 0.0
    count = 0
    for spec in _finite_instances(200):
        space, H, L = gen_instance(spec)
        worst = max(worst, duality_gap(space, H, L))
        count += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and count == 200 and elapsed < 30.0
    _verdict(
        "criterion 5 (minimax duality x200, < 30 s)",
        ok,
        f"worst gap {worst:.2e}",
        elapsed,
    )


def test_criterion_6_inequality_lattice():
    start = time.perf_counter()
    violations = []

    def le(a, b, what, spec, tol=1e-8):
        if a.is_infinite and not b.is_infinite:
            violations.append((what, spec))
        elif a.is_finite and b.is_finite and a.finite_value > b.finite_value + tol:
            violations.append((what, spec))

    checked = 0
    for spec in list(_finite_instances(200)) + list(_infinite_instances(50)):
        space, H, L = gen_instance(spec)
        le(q_lower(space, H, L).value, q_value(space, L, H).value, "weak duality", spec)
        if H.issubset(L):
            le(q_lower(space, H, L).value, q_value(space, H, L).value, "nested", spec)
        for n in range(2, 5):
            dn = nth_diameter(space, H, n, method="exact").value
            mn = cheb_n(space, H, H, n, method="exact").value
            le(dn, mn, f"diameter vs cheb n={n}", spec)
        chain = energy_chain_check(space, H)
        if not chain.passed:
            violations.append(("energy chain", spec))
        if spec.subset_policy == "nested":
            rep = check_monotone(space, H, L, 2, spec)
            if not rep.passed:
                violations.append(("monotone", spec))
        checked += 1
    elapsed = time.perf_counter() - start
    ok = not violations and checked == 250
    _verdict(
        "criterion 6 (inequality lattice x250)",
        ok,
        f"{checked} instances, {len(violations)} violations",
        elapsed,
    )


def test_criterion_7_oracle_equivalence():
    start = time.perf_counter()
    failures = []
    count = 0
    for family in ("metric-random", "psd-random", "discrete", "grid", "infinite-diagonal"):
        for size in (2, 3, 4):
            for trial in range(3):
                spec = InstanceSpec(
                    seed=30_000 + 7 * trial,
                    size=size,
                    kernel_family=family,
                    subset_policy=("full", "nested", "random")[trial],
                )
                space, H, L = gen_instance(spec)
                rep = check_oracle(space, H, L, n_max=3, spec=spec)
                if not rep.passed:
                    failures.extend(rep.failures)
                count += 1
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 120.0
    _verdict(
        "criterion 7 (brute-force oracle equivalence, < 120 s)",
        ok,
        f"{count} small instances cross-checked, {len(failures)} mismatches",
        elapsed,
    )


def test_criterion_8_infinity_semantics():
    start = time.perf_counter()
    grid = build_interval_grid(0.0, 1.0, 257, "neglog")
    X = grid.all_indices()
    q_sol = q_value(grid, X, X)
    q_sharp_sol = q_sharp_value(grid, X, X)
    _, mbar = cheb_limits_via_games(grid, X, X)
    m2 = cheb_n(grid, X, X, 2, method="exact").value
    report = compare_R_A(grid, X, X)
    payload = json.dumps(
        {
            "q": q_sol.to_jsonable(),
            "limits": mbar.to_jsonable(),
            "compare": report.to_jsonable(),
        }
    )
    elapsed = time.perf_counter() - start
    ok = (
        q_sol.value.is_infinite
        and q_sharp_sol.value.is_infinite
        and mbar.is_infinite
        and m2.is_finite
        and report.rendezvous.hi.is_infinite
        and report.average.hi.is_infinite
        and '"inf"' in payload
        and "1e+308" not in payload
        and "Infinity" not in payload
    )
    _verdict(
        "criterion 8 (infinity semantics)",
        ok,
        f"q=inf, M_2={m2.to_jsonable():.4f} finite, upper endpoints documented as inf",
        elapsed,
    )
