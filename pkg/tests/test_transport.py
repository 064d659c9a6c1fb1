from itertools import combinations
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.optimize import linprog

from spherot.core.err import DimensionMismatch, InvalidParameter, NotOnSphere
from spherot.core.sampling import random_measure
from spherot.core.sphere import DiscreteMeasure, antipodal_pair, barycenter, dirac, translate
from spherot.core.transport import (CostKind, CostMatrix, ambient_squared_cost, c_alpha_cost, chord_cost,
                                    custom_cost, geodesic_cost, is_translate, solve_transport, squared_distance,
                                    translation_residual, wasserstein_distance)
from tests.conftest import EAST, NORTH, SOUTH, WEST


def _marginal_constraints(m, n):
    rows = np.zeros((m + n, m * n))
    for i in range(m):
        rows[i, i * n:(i + 1) * n] = 1.0
    for j in range(n):
        rows[m + j, j::n] = 1.0
    return rows


def vertex_enumeration_cost(a, b, costs):
    """Minimum of <C, π> over the vertices of the coupling polytope: every basic solution on m + n − 1 cells."""
    m, n = costs.shape
    constraints = _marginal_constraints(m, n)
    marginals = np.concatenate([a, b])
    best = np.inf
    for cells in combinations(range(m * n), m + n - 1):
        cells = list(cells)
        flows, *_ = np.linalg.lstsq(constraints[:, cells], marginals, rcond=None)
        if np.max(np.abs(constraints[:, cells] @ flows - marginals)) > 1e-12 or np.min(flows) < -1e-12:
            continue
        best = min(best, float(costs.ravel()[cells] @ flows))
    return best


def linprog_cost(a, b, costs):
    m, n = costs.shape
    result = linprog(costs.ravel(), A_eq=_marginal_constraints(m, n), b_eq=np.concatenate([a, b]),
                     bounds=(0, None), method='highs')
    return result.fun


def test_exact_against_vertex_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(100):
        mu = random_measure(rng, int(rng.integers(1, 4)), 2)
        nu = random_measure(rng, int(rng.integers(1, 4)), 2)
        costs = chord_cost(mu, nu, 2)
        plan = solve_transport(mu, nu, costs)

        assert plan.cost == pytest.approx(vertex_enumeration_cost(mu.weights, nu.weights, costs.entries), abs=1e-9)
        assert_allclose(plan.row_marginal, mu.weights, atol=1e-10)
        assert_allclose(plan.col_marginal, nu.weights, atol=1e-10)


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0])
def test_larger_instances_against_linprog(p):
    rng = np.random.default_rng(1)
    for _ in range(10):
        mu = random_measure(rng, 7, 2)
        nu = random_measure(rng, 9, 2)
        costs = chord_cost(mu, nu, p)
        plan = solve_transport(mu, nu, costs)
        assert plan.cost == pytest.approx(linprog_cost(mu.weights, nu.weights, costs.entries), abs=1e-9)
        assert np.all(plan.matrix >= 0)


def test_degenerate_uniform_instances():
    rng = np.random.default_rng(2)
    points = rng.standard_normal((6, 3))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    mu = DiscreteMeasure(points[:3], np.full(3, 1 / 3))
    nu = DiscreteMeasure(points[3:], np.full(3, 1 / 3))
    costs = chord_cost(mu, nu, 2)
    plan = solve_transport(mu, nu, costs)

    assert plan.cost == pytest.approx(vertex_enumeration_cost(mu.weights, nu.weights, costs.entries), abs=1e-9)
    assert len(plan.basis) == mu.size + nu.size - 1


def test_identical_measures_give_diagonal_plan():
    mu = DiscreteMeasure([NORTH, EAST, WEST], [0.2, 0.3, 0.5])
    plan = solve_transport(mu, mu, chord_cost(mu, mu, 2))

    assert plan.cost == pytest.approx(0.0, abs=1e-15)
    assert plan.support() == [(0, 0), (1, 1), (2, 2)]


def test_antipodal_diracs_are_at_diameter():
    assert wasserstein_distance(dirac(NORTH), dirac(SOUTH)) == 2.0
    assert wasserstein_distance(dirac(NORTH), dirac(EAST)) == pytest.approx(np.sqrt(2))


def test_tied_plans_are_flagged():
    mu = antipodal_pair(NORTH)
    nu = antipodal_pair(EAST)
    plan = solve_transport(mu, nu, chord_cost(mu, nu, 2))

    assert plan.cost == pytest.approx(2.0)
    assert not plan.unique_hint


def test_unique_plan_is_flagged():
    mu = DiscreteMeasure([NORTH, EAST], [0.5, 0.5])
    nu = DiscreteMeasure([[0.1, 0.99498743710662], [0.99498743710662, 0.1]], [0.5, 0.5])
    assert solve_transport(mu, nu, chord_cost(mu, nu, 2)).unique_hint


def test_geodesic_cost_dominates_chord(rng):
    mu = random_measure(rng, 4, 2)
    nu = random_measure(rng, 3, 2)
    assert wasserstein_distance(mu, nu, 1, metric='geodesic') >= wasserstein_distance(mu, nu, 1)
    assert geodesic_cost(dirac(NORTH), dirac(SOUTH), 1).entries[0, 0] == pytest.approx(np.pi)


def test_cost_builders():
    mu = DiscreteMeasure([NORTH, EAST], [0.5, 0.5])
    nu = dirac(WEST)

    assert_allclose(ambient_squared_cost(mu, nu).entries, [[2.0], [4.0]])
    assert_allclose(c_alpha_cost(mu, nu, 0.5).entries, [[2 - np.sqrt(2)], [2.0]], atol=1e-15)
    assert custom_cost(mu, nu, lambda x, y: float(x @ y) + 1).kind is CostKind.CUSTOM

    with pytest.raises(InvalidParameter):
        chord_cost(mu, nu, 0.5)
    with pytest.raises(InvalidParameter):
        c_alpha_cost(mu, nu, 1.5)
    with pytest.raises(NotOnSphere):
        c_alpha_cost(translate(mu, [1.0, 0.0]), nu, 0.5)
    with pytest.raises(InvalidParameter):
        CostMatrix(np.array([[-1.0]]), CostKind.CUSTOM)


def test_mismatched_costs():
    mu = DiscreteMeasure([NORTH, EAST], [0.5, 0.5])
    with pytest.raises(DimensionMismatch):
        solve_transport(mu, mu, chord_cost(mu, dirac(NORTH), 2))
    with pytest.raises(DimensionMismatch):
        chord_cost(mu, dirac([0.0, 0.0, 1.0]), 2)


def test_translation_identity(rng):
    for _ in range(50):
        mu = random_measure(rng, int(rng.integers(1, 5)), 2)
        nu = random_measure(rng, int(rng.integers(1, 5)), 2)
        v = rng.standard_normal(3)
        assert abs(translation_residual(mu, nu, v)) <= 1e-8


def test_translation_residual_trivial_case(rng):
    mu = random_measure(rng, 3, 2)
    assert translation_residual(mu, mu, np.zeros(3)) == pytest.approx(0.0, abs=1e-15)


def test_translate_detection(rng):
    mu = random_measure(rng, 3, 2)
    v = rng.standard_normal(3)
    shifted = translate(mu, v)

    assert squared_distance(mu, shifted) == pytest.approx(float(v @ v), abs=1e-8)
    assert np.sqrt(squared_distance(mu, shifted)) == pytest.approx(np.linalg.norm(barycenter(shifted) - barycenter(mu)))
    assert is_translate(mu, shifted)
    assert not is_translate(mu, random_measure(rng, 3, 2))


def test_desk_scale_instance_is_fast():
    rng = np.random.default_rng(3)
    mu = random_measure(rng, 300, 2)
    nu = random_measure(rng, 300, 2)
    costs = chord_cost(mu, nu, 2)

    started = time.perf_counter()
    plan = solve_transport(mu, nu, costs)
    elapsed = time.perf_counter() - started

    assert elapsed < 60.0
    assert plan.cost == pytest.approx(linprog_cost(mu.weights, nu.weights, costs.entries), abs=1e-9)
    assert_allclose(plan.row_marginal, mu.weights, atol=1e-10)
    assert_allclose(plan.col_marginal, nu.weights, atol=1e-10)


@pytest.mark.parametrize('n', [1, 2])
@pytest.mark.parametrize('p', [1.0, 2.0])
def test_metric_axioms(n, p):
    rng = np.random.default_rng(4)
    for _ in range(30):
        mu, nu, rho = (random_measure(rng, int(rng.integers(1, 7)), n) for _ in range(3))
        d_mu_nu = wasserstein_distance(mu, nu, p)

        assert wasserstein_distance(mu, mu, p) <= 1e-10
        assert abs(d_mu_nu - wasserstein_distance(nu, mu, p)) <= 1e-10
        assert wasserstein_distance(mu, rho, p) + wasserstein_distance(rho, nu, p) - d_mu_nu >= -1e-9
