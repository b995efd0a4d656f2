import json

import numpy as np
import pytest

from rendezkit.errors import ArgumentError
from rendezkit.verify import (
    InstanceSpec,
    SuiteConfig,
    check_chain,
    check_dn_mn,
    check_duality,
    check_monotone,
    check_MqL,
    check_oracle,
    check_uniqueness,
    gen_instance,
    oracle_q,
    oracle_q_lower,
    oracle_tuple,
    oracle_w,
    reports_to_jsonl,
    run_suite,
)


class TestGenInstance:
    def test_discrete_family_is_the_two_point_space(self):
        spec = InstanceSpec(seed=1, size=2, kernel_family="discrete", subset_policy="full")
        sp, H, L = gen_instance(spec)
        assert sp.kernel.tolist() == [[0, 1], [1, 0]]
        assert H.indices == L.indices == (0, 1)

    def test_determinism(self):
        spec = InstanceSpec(seed=5, size=4, kernel_family="metric-random", subset_policy="nested")
        a = gen_instance(spec)
        b = gen_instance(spec)
        assert (a[0].kernel == b[0].kernel).all()
        assert a[1].indices == b[1].indices
        assert a[2].indices == b[2].indices

    def test_nested_policy_builds_a_chain(self):
        spec = InstanceSpec(seed=5, size=4, kernel_family="metric-random", subset_policy="nested")
        _, H, L = gen_instance(spec)
        assert H.issubset(L)

    def test_metric_random_satisfies_triangle_inequality(self):
        spec = InstanceSpec(seed=8, size=6, kernel_family="metric-random")
        sp, _, _ = gen_instance(spec)
        k = sp.kernel
        n = sp.n_points
        for i in range(n):
            for j in range(n):
                for l in range(n):
                    assert k[i, j] <= k[i, l] + k[l, j] + 1e-12

    def test_infinite_diagonal_family(self):
        spec = InstanceSpec(seed=2, size=3, kernel_family="infinite-diagonal")
        sp, _, _ = gen_instance(spec)
        assert np.isinf(sp.kernel.diagonal()).all()
        off = sp.kernel[~np.eye(3, dtype=bool)]
        assert np.isfinite(off).all()

    def test_bad_family_rejected(self):
        with pytest.raises(ArgumentError):
            InstanceSpec(seed=0, size=3, kernel_family="poisson")

    def test_size_bounds(self):
        with pytest.raises(ArgumentError):
            InstanceSpec(seed=0, size=65, kernel_family="discrete")


class TestChecks:
    def test_chain_two_point_equalities(self):
        spec = InstanceSpec(seed=1, size=2, kernel_family="discrete")
        sp, H, L = gen_instance(spec)
        rep = check_chain(sp, H, L, spec)
        assert rep.passed

    def test_chain_metric_batch(self):
        rep = None
        for seed in range(100):
            spec = InstanceSpec(
                seed=seed,
                size=2 + seed % 7,
                kernel_family="metric-random",
                subset_policy=("full", "nested", "random")[seed % 3],
            )
            sp, H, L = gen_instance(spec)
            rep = check_chain(sp, H, L, spec, rep)
        assert rep.passed and rep.trials >= 100

    def test_chain_infinite_diagonal_ordering(self):
        spec = InstanceSpec(seed=3, size=4, kernel_family="infinite-diagonal", subset_policy="nested")
        sp, H, L = gen_instance(spec)
        assert check_chain(sp, H, L, spec).passed

    def test_duality_on_random(self):
        spec = InstanceSpec(seed=12, size=5, kernel_family="psd-random", subset_policy="random")
        sp, H, L = gen_instance(spec)
        rep = check_duality(sp, H, L, spec)
        assert rep.passed
        assert rep.worst_slack <= 1e-9

    def test_MqL_and_dn_mn(self):
        spec = InstanceSpec(seed=6, size=5, kernel_family="metric-random", subset_policy="nested")
        sp, H, L = gen_instance(spec)
        assert check_MqL(sp, H, L, 3, spec).passed
        assert check_dn_mn(sp, H, 4, spec).passed

    def test_monotone_grid_chain(self):
        spec = InstanceSpec(seed=4, size=6, kernel_family="grid", subset_policy="nested")
        sp, H, L = gen_instance(spec)
        rep = check_monotone(sp, H, L, 2, spec)
        assert rep.passed

    def test_uniqueness_batch(self):
        rep = None
        for seed in range(20):
            spec = InstanceSpec(seed=seed, size=4 + seed % 3, kernel_family="metric-random")
            sp, _, _ = gen_instance(spec)
            rep = check_uniqueness(sp, spec, rep)
        assert rep.passed

    def test_failure_carries_replayable_instance(self):
        # feed the checker a deliberately inconsistent claim by abusing the
        # report recorder directly
        spec = InstanceSpec(seed=2, size=3, kernel_family="psd-random")
        sp, H, L = gen_instance(spec)
        rep = check_chain(sp, H, L, spec)
        rep.record(spec, 1.0, "synthetic violation", 1e-9)
        assert not rep.passed
        replay = rep.failures[0]["instance"]
        assert replay == spec.to_jsonable()
        spec2 = InstanceSpec(**replay)
        sp2, _, _ = gen_instance(spec2)
        assert (sp2.kernel == sp.kernel).all()


class TestOracles:
    def test_oracle_layer_on_small_instances(self):
        for seed in (0, 1, 2):
            for family in ("metric-random", "psd-random", "infinite-diagonal"):
                spec = InstanceSpec(seed=seed, size=4, kernel_family=family, subset_policy="nested")
                sp, H, L = gen_instance(spec)
                rep = check_oracle(sp, H, L, 3, spec)
                assert rep.passed, rep.failures

    def test_oracle_rejects_large_spaces(self):
        spec = InstanceSpec(seed=0, size=5, kernel_family="psd-random")
        sp, H, L = gen_instance(spec)
        with pytest.raises(ArgumentError):
            check_oracle(sp, H, L)

    def test_tuple_oracle_small_exact(self):
        spec = InstanceSpec(seed=10, size=3, kernel_family="psd-random")
        sp, H, L = gen_instance(spec)
        assert oracle_tuple(sp, H, L, 2, "cheb").is_finite
        assert oracle_q(sp, H, L).is_finite
        assert oracle_q_lower(sp, H, L).is_finite
        assert oracle_w(sp, H).is_finite


class TestSuite:
    def test_default_small_suite_passes(self):
        cfg = SuiteConfig(sizes=(2, 3, 4), trials_per_cell=1)
        reports, code = run_suite(cfg)
        assert code == 0
        assert all(r.passed for r in reports)
        assert {r.property_id for r in reports} == {
            "chain-weak-duality",
            "minimax-duality",
            "cheb-below-game-limit",
            "diameter-below-cheb",
            "set-monotonicity",
            "full-space-singleton",
            "energy-chain",
            "oracle-equivalence",
        }

    def test_reports_serialize_to_jsonl(self):
        cfg = SuiteConfig(sizes=(2,), families=("discrete",), trials_per_cell=1, oracle=False)
        reports, _ = run_suite(cfg)
        lines = reports_to_jsonl(reports).splitlines()
        assert len(lines) == len(reports)
        for line in lines:
            doc = json.loads(line)
            assert {"property_id", "trials", "failures", "worst_slack", "passed"} <= set(doc)

    def test_config_rejects_unknown_keys(self):
        with pytest.raises(ArgumentError):
            SuiteConfig.from_jsonable({"sizes": [2], "bogus": True})

    def test_config_rejects_unknown_family(self):
        with pytest.raises(ArgumentError):
            SuiteConfig.from_jsonable({"families": ["cauchy"]})

    def test_same_config_same_reports(self):
        cfg = SuiteConfig(sizes=(2, 3), families=("metric-random",), trials_per_cell=1, oracle=False)
        a, _ = run_suite(cfg)
        b, _ = run_suite(cfg)
        assert reports_to_jsonl(a) == reports_to_jsonl(b)
