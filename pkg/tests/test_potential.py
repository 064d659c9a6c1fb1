import numpy as np
import pytest
from numpy.testing import assert_allclose

from spherot.core.err import InvalidParameter, NotOnSphere
from spherot.core.potential import (CHORD, HALF_CHORD, PotentialSamples, dirac_distance_quadratic, dispersion,
                                    is_orthogonal, orthogonality_defect, potential, potential_samples)
from spherot.core.sampling import circle_nodes, random_measure, random_sphere_points
from spherot.core.sphere import DiscreteMeasure, antipodal_pair, dirac, translate
from spherot.core.transport import chord_cost, solve_transport
from tests.conftest import EAST, NORTH, WEST


def test_antipodal_pairs_share_the_quadratic_potential():
    vertical = antipodal_pair(NORTH)
    horizontal = antipodal_pair(EAST)
    sites = circle_nodes(360)

    assert_allclose(potential_samples(vertical, sites, 2).values, 2.0, atol=1e-12)
    assert_allclose(potential_samples(horizontal, sites, 2).values, 2.0, atol=1e-12)

    gap = potential_samples(vertical, sites, 1).values - potential_samples(horizontal, sites, 1).values
    assert np.max(np.abs(gap)) > 1e-3
    assert potential(vertical, NORTH, 1) == pytest.approx(1.0)
    assert potential(horizontal, NORTH, 1) == pytest.approx(np.sqrt(2))


def test_antipodal_family_on_the_sphere(rng):
    sites = random_sphere_points(rng, 50, 2)
    first_order = []
    for z in random_sphere_points(rng, 20, 2):
        pair = antipodal_pair(z)
        assert_allclose(potential_samples(pair, sites, 2).values, 2.0, atol=1e-12)

        values = potential_samples(pair, sites, 1).values
        assert np.ptp(values) > 1e-3
        first_order.append(values)

    first_order = np.array(first_order)
    assert np.max(np.abs(first_order - first_order[0])) > 1e-3


@pytest.mark.parametrize('p', [1.0, 1.5, 2.0, 3.0])
def test_potential_matches_transport_against_dirac(rng, p):
    mu = random_measure(rng, 5, 2)
    for x in random_sphere_points(rng, 5, 2):
        target = dirac(x)
        plan = solve_transport(mu, target, chord_cost(mu, target, p))
        assert potential(mu, x, p) == pytest.approx(plan.cost, abs=1e-12)


def test_quadratic_dirac_distance(rng):
    mu = random_measure(rng, 4, 2)
    for x in random_sphere_points(rng, 10, 2):
        assert dirac_distance_quadratic(mu, x) == pytest.approx(potential(mu, x, 2), abs=1e-12)


def test_dispersion():
    assert dispersion(dirac(NORTH)) == pytest.approx(0.0)
    assert dispersion(antipodal_pair(EAST)) == pytest.approx(1.0)
    assert dispersion(DiscreteMeasure([NORTH, EAST], [0.5, 0.5])) == pytest.approx(0.5)


def test_orthogonal_supports_have_zero_defect():
    mu = antipodal_pair(NORTH)
    nu = antipodal_pair(EAST)
    assert orthogonality_defect(mu, nu) == pytest.approx(0.0, abs=1e-12)
    assert is_orthogonal(mu, nu)


def test_tilted_supports_have_positive_defect():
    c, s = np.cos(0.3), np.sin(0.3)
    mu = DiscreteMeasure([[c, s], [-c, -s]], [0.5, 0.5])
    nu = DiscreteMeasure([EAST, WEST], [0.5, 0.5])

    assert orthogonality_defect(mu, nu) == pytest.approx(2 * c, abs=1e-12)
    assert not is_orthogonal(mu, nu)


def test_defect_is_nonnegative(rng):
    for _ in range(30):
        mu = random_measure(rng, int(rng.integers(1, 5)), 2)
        nu = random_measure(rng, int(rng.integers(1, 5)), 2)
        assert orthogonality_defect(mu, nu) >= -1e-12


def test_off_sphere_measures_are_rejected():
    mu = translate(dirac(NORTH), [0.5, 0.0])
    with pytest.raises(NotOnSphere):
        potential(mu, NORTH, 2)
    with pytest.raises(NotOnSphere):
        dispersion(mu)
    with pytest.raises(InvalidParameter):
        potential(dirac(NORTH), NORTH, 0.5)


def test_metric_conversion():
    samples = potential_samples(dirac(NORTH), circle_nodes(8), 3)
    half = samples.to_half_chord()

    assert half.metric == HALF_CHORD
    assert_allclose(half.values, samples.values / 8)
    assert half.to_chord().metric == CHORD
    assert_allclose(half.to_chord().values, samples.values)
    assert samples.to_chord() is samples


def test_samples_validation():
    with pytest.raises(InvalidParameter):
        PotentialSamples(circle_nodes(4), [0.0, 1.0], 2)
    with pytest.raises(InvalidParameter):
        PotentialSamples(circle_nodes(2), [0.0, 5.0], 2)
    with pytest.raises(InvalidParameter):
        PotentialSamples(circle_nodes(2), [0.0, 0.5], 2, metric='geodesic')
    with pytest.raises(InvalidParameter):
        PotentialSamples(np.eye(3), [0.0, 0.5, 1.0], 2).thetas


def test_thetas():
    samples = potential_samples(dirac(NORTH), circle_nodes(4), 2)
    assert_allclose(samples.thetas, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12)
