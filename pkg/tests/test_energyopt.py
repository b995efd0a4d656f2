import math

import numpy as np
import pytest

from rendezkit.energyopt import (
    energy_chain_check,
    max_principle_check,
    w_energy,
)
from rendezkit.errors import BudgetExceededError
from rendezkit.game import q_lower
from rendezkit.measure import ProbabilityMeasure, mutual_energy
from rendezkit.space import SubsetRef, build_from_matrix, build_interval_grid


def grid_min_energy(kernel, resolution=200):
    """Dense simplex-grid search, independent of the descent path."""
    k = np.asarray(kernel)
    n = k.shape[0]
    best = math.inf
    if n == 2:
        for i in range(resolution + 1):
            w = np.array([i, resolution - i]) / resolution
            best = min(best, float(w @ k @ w))
    else:
        for i in range(resolution + 1):
            for j in range(resolution + 1 - i):
                w = np.array([i, j, resolution - i - j]) / resolution
                best = min(best, float(w @ k @ w))
    return best


class TestWEnergy:
    def test_two_point_vertex_minimum(self, two_point):
        # the quadratic 2*mu(a)*mu(b) is concave on the simplex: its minimum
        # sits at a point mass, matching the zero n-point diameters
        res = w_energy(two_point, two_point.all_indices())
        assert res.value.finite_value == 0.0
        assert res.minimizer.support() in ((0,), (1,))
        assert res.certificate_gap == 0.0

    def test_singleton(self, two_point):
        assert w_energy(two_point, SubsetRef((0,))).value.finite_value == 0.0

    def test_neglog_infinite(self, neglog3):
        res = w_energy(neglog3, neglog3.all_indices())
        assert res.value.is_infinite
        assert res.minimizer is None

    def test_matches_grid_oracle_psd(self):
        rng = np.random.default_rng(3)
        raw = rng.uniform(0.2, 1.0, (3, 3))
        k = (raw + raw.T) / 2
        sp = build_from_matrix(k, label="psd3")
        res = w_energy(sp, sp.all_indices())
        oracle = grid_min_energy(k)
        assert res.value.finite_value <= oracle + 1e-12
        assert abs(res.value.finite_value - oracle) <= 2 / 200 * k.max()

    def test_value_is_energy_of_minimizer(self):
        rng = np.random.default_rng(4)
        raw = rng.uniform(0, 1, (6, 6))
        sp = build_from_matrix((raw + raw.T) / 2, label="w6")
        res = w_energy(sp, sp.all_indices())
        recomputed = mutual_energy(sp, res.minimizer).finite_value
        assert res.value.finite_value == pytest.approx(recomputed, abs=1e-12)

    def test_minimizer_beats_random_measures(self):
        rng = np.random.default_rng(5)
        raw = rng.uniform(0, 1, (7, 7))
        sp = build_from_matrix((raw + raw.T) / 2, label="w7")
        H = SubsetRef((0, 2, 3, 5))
        res = w_energy(sp, H)
        for _ in range(50):
            w = np.zeros(7)
            w[H.as_array()] = rng.dirichlet(np.ones(4))
            mu = ProbabilityMeasure(w, sp.label)
            assert res.value.finite_value <= mutual_energy(sp, mu).finite_value + 1e-9

    def test_larger_set_cannot_increase(self):
        rng = np.random.default_rng(6)
        raw = rng.uniform(0, 1, (8, 8))
        sp = build_from_matrix((raw + raw.T) / 2, label="w8")
        small = SubsetRef((1, 4))
        big = SubsetRef((1, 2, 4, 6))
        assert (
            w_energy(sp, big).value.finite_value
            <= w_energy(sp, small).value.finite_value + 1e-10
        )

    def test_infinite_offdiagonal_subset_search(self):
        sp = build_from_matrix(
            [[0.1, "inf", 0.2], ["inf", 0.1, 0.3], [0.2, 0.3, 0.4]], label="splitw"
        )
        res = w_energy(sp, sp.all_indices())
        # mass cannot pair points 0 and 1; best infinity-free subsets are
        # {0, 2} and {1, 2}
        assert res.value.is_finite
        sup = res.minimizer.support()
        assert not ({0, 1} <= set(sup))
        oracle = min(
            grid_min_energy(np.array([[0.1, 0.2], [0.2, 0.4]])),
            grid_min_energy(np.array([[0.1, 0.3], [0.3, 0.4]])),
        )
        assert res.value.finite_value == pytest.approx(oracle, abs=2 / 200)

    def test_infinite_offdiagonal_cap(self):
        n = 25
        k = np.full((n, n), 1.0)
        np.fill_diagonal(k, 0.5)
        k[0, 1] = k[1, 0] = np.inf
        sp = build_from_matrix(k, label="bigsplit")
        with pytest.raises(BudgetExceededError):
            w_energy(sp, sp.all_indices())

    def test_first_order_certificate(self):
        rng = np.random.default_rng(9)
        raw = rng.uniform(0.3, 1.2, (30, 30))
        sp = build_from_matrix((raw + raw.T) / 2, label="fw30")
        res = w_energy(sp, sp.all_indices())
        assert res.certificate_gap >= 0.0
        # a stationary value can never exceed the max-min game level
        bound = q_lower(sp, sp.all_indices(), sp.all_indices()).value.finite_value
        assert res.value.finite_value <= bound + max(1e-6, res.certificate_gap + 1e-9)


class TestEnergyChain:
    def test_two_point_chain(self, two_point):
        rep = energy_chain_check(two_point, two_point.all_indices())
        assert rep.passed
        assert rep.w.finite_value == 0.0
        assert rep.q.finite_value == 0.5
        assert rep.u.finite_value == 0.5
        assert rep.v.finite_value == 0.0

    def test_singleton_chain(self, two_point):
        rep = energy_chain_check(two_point, SubsetRef((0,)))
        assert rep.passed
        assert (rep.w.finite_value, rep.q.finite_value, rep.u.finite_value) == (0.0, 0.0, 1.0)

    def test_random_chain_seed3(self):
        rng = np.random.default_rng(3)
        raw = rng.uniform(0, 1, (6, 6))
        sp = build_from_matrix((raw + raw.T) / 2, label="chain6")
        rep = energy_chain_check(sp, sp.all_indices(), tol=1e-8)
        assert rep.passed

    def test_infinite_diagonal_chain(self):
        k = np.array([[np.inf, 0.5], [0.5, np.inf]])
        sp = build_from_matrix(k, label="infchain")
        rep = energy_chain_check(sp, sp.all_indices())
        assert rep.passed
        assert rep.w.is_infinite and rep.q.is_infinite and rep.u.is_infinite


class TestMaxPrinciple:
    def test_euclid_grid_fails_at_point_mass(self, euclid101):
        # a unit mass at the center has potential 1/2 at the endpoints but
        # only 0 on its own support
        rep = max_principle_check(euclid101, sample_measures=10, seed=0)
        assert not rep.passed
        assert rep.worst_violation >= 0.5

    def test_neglog_grid_passes(self, neglog257):
        rep = max_principle_check(neglog257, sample_measures=200, seed=0)
        assert rep.passed

    def test_riesz_grid_passes(self):
        sp = build_interval_grid(0, 1, 65, "riesz", (0.5,))
        rep = max_principle_check(sp, sample_measures=200, seed=1)
        assert rep.passed

    def test_discrete_two_point_fails_at_point_mass(self, two_point):
        # the potential of a unit mass at a is 1 at b yet 0 on the support,
        # so the discrete metric violates the principle at point masses
        rep = max_principle_check(two_point, sample_measures=50, seed=0)
        assert not rep.passed
        assert rep.worst_violation == pytest.approx(1.0)

    def test_deterministic_given_seed(self, euclid101):
        a = max_principle_check(euclid101, sample_measures=30, seed=7)
        b = max_principle_check(euclid101, sample_measures=30, seed=7)
        assert a.worst_violation == b.worst_violation


def test_discrete_energy_diverges_from_continuum_limit(neglog257):
    # the grid's minimum energy is infinite (every atom has infinite
    # self-energy) even though the n-point diameters stay finite and rise
    # toward the continuum level log 4; the divergence is the expected
    # behavior for atomic measures, not a defect
    from rendezkit.confopt import nth_diameter

    X = neglog257.all_indices()
    assert w_energy(neglog257, X).value.is_infinite
    d8 = nth_diameter(neglog257, X, 8, method="local-search", seed=0).value
    assert d8.is_finite and d8.finite_value < math.log(4)
