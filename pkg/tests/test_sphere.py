import numpy as np
import pytest
from numpy.testing import assert_allclose

from spherot.core.err import DegenerateVector, DimensionMismatch, InvalidMeasure, NotTwoPoint
from spherot.core.sampling import icosphere, random_measure, random_sphere_points, sphere_grid
from spherot.core.sphere import (DiscreteMeasure, SpherePoint, admissible_translations, antipodal_pair, barycenter,
                                 canonical_frame_description, centered, dirac, is_supported_on_sphere,
                                 project_to_sphere, push_forward, support_dimension, translate)
from tests.conftest import EAST, NORTH, SOUTH, WEST


@pytest.mark.parametrize('vector, expected', [
    ([0.0, 2.0], [0.0, 1.0]),
    ([3.0, 4.0], [0.6, 0.8]),
])
def test_project_to_sphere(vector, expected):
    assert_allclose(project_to_sphere(vector).coords, expected, atol=1e-15)


def test_project_tiny_vector():
    with pytest.raises(DegenerateVector):
        project_to_sphere([1e-15, 0.0])


def test_sphere_point_norm():
    with pytest.raises(InvalidMeasure):
        SpherePoint([1.0, 1e-3])
    assert SpherePoint.from_angle(np.pi / 2).is_close(NORTH)
    assert (-SpherePoint(NORTH)).is_close(SOUTH)


def test_duplicates_merged_and_zero_weights_dropped():
    mu = DiscreteMeasure([NORTH, NORTH + 1e-14, EAST, WEST], [0.25, 0.25, 0.5, 0.0])

    assert mu.size == 2
    assert mu.mass_at(NORTH) == pytest.approx(0.5)
    assert mu.mass_at(WEST) == 0.0
    assert mu.on_sphere


@pytest.mark.parametrize('points, weights', [
    ([NORTH, EAST], [0.5, 0.6]),
    ([NORTH, EAST], [1.5, -0.5]),
    ([NORTH], [1.0, 0.0]),
    ([[np.nan, 1.0]], [1.0]),
    ([[1.0]], [1.0]),
])
def test_invalid_measures(points, weights):
    with pytest.raises(InvalidMeasure):
        DiscreteMeasure(points, weights)


def test_normalized():
    mu = DiscreteMeasure.normalized([NORTH, EAST], [1, 3])
    assert_allclose(sorted(mu.weights), [0.25, 0.75])


def test_off_sphere_measure():
    mu = DiscreteMeasure([[0.0, 2.0]], [1.0])
    assert not mu.on_sphere
    assert not is_supported_on_sphere(mu)


def test_barycenter_and_translate():
    mu = antipodal_pair(EAST)
    assert_allclose(barycenter(mu), [0.0, 0.0])

    nu = DiscreteMeasure([NORTH, EAST], [0.5, 0.5])
    assert_allclose(barycenter(nu), [0.5, 0.5])
    assert_allclose(barycenter(centered(nu)), [0.0, 0.0], atol=1e-15)
    assert_allclose(barycenter(translate(nu, [1.0, -1.0])), [1.5, -0.5])

    with pytest.raises(DimensionMismatch):
        translate(nu, [1.0, 0.0, 0.0])


def test_push_forward_merges_images():
    mu = DiscreteMeasure([NORTH, SOUTH, EAST], [0.25, 0.25, 0.5])
    folded = push_forward(mu, lambda p: np.abs(p))
    assert folded.size == 2
    assert folded.mass_at(NORTH) == pytest.approx(0.5)


def test_support_dimension():
    assert support_dimension(dirac(NORTH)) == 0
    assert support_dimension(antipodal_pair(NORTH)) == 1
    assert support_dimension(DiscreteMeasure(np.eye(3), np.full(3, 1 / 3))) == 2


def test_admissible_translations_keep_measure_on_sphere(rng):
    for _ in range(20):
        a, b = random_sphere_points(rng, 2, 2)
        mu = DiscreteMeasure([a, b], [0.5, 0.5])
        description = admissible_translations(mu)

        assert description.radius == pytest.approx(np.linalg.norm(description.center), abs=1e-12)
        for v in description.sample(rng, 10):
            assert is_supported_on_sphere(translate(mu, v), tol=1e-9)
            assert description.contains(v)
        assert not description.contains(description.center + 0.1 * description.chord_direction)


def test_translations_outside_the_set_leave_the_sphere(rng):
    for _ in range(10):
        a, b = random_sphere_points(rng, 2, 2)
        mu = DiscreteMeasure([a, b], [0.5, 0.5])
        description = admissible_translations(mu)
        norm = np.linalg.norm(description.sample(rng, 1)[0])

        for direction in random_sphere_points(rng, 50, 2):
            v = norm * direction
            assert not description.contains(v)
            assert not is_supported_on_sphere(translate(mu, v), tol=1e-9)


def test_antipodal_support_has_only_trivial_translation():
    description = admissible_translations(antipodal_pair([0.0, 0.0, 1.0]))
    assert description.is_singleton
    assert description.contains(np.zeros(3))
    assert not description.contains([0.1, 0.0, 0.0])


@pytest.mark.parametrize('n', [1, 2, 3])
def test_canonical_frame_description(n):
    theta = 0.7
    a = np.zeros(n + 1)
    a[0], a[-1] = np.cos(theta), np.sin(theta)
    b = a.copy()
    b[-1] = -b[-1]
    computed = admissible_translations(DiscreteMeasure([a, b], [0.5, 0.5]))
    expected = canonical_frame_description(theta, n)

    assert_allclose(computed.center, expected.center, atol=1e-15)
    assert computed.radius == pytest.approx(expected.radius)


def test_admissible_translations_needs_two_half_atoms():
    with pytest.raises(NotTwoPoint):
        admissible_translations(DiscreteMeasure([NORTH, EAST, WEST], [0.2, 0.4, 0.4]))
    with pytest.raises(NotTwoPoint):
        admissible_translations(DiscreteMeasure([NORTH, EAST], [0.3, 0.7]))


def test_random_measure_in_hemisphere(rng):
    pole = np.array([0.0, 0.0, 1.0])
    mu = random_measure(rng, 5, 2, hemisphere=pole)
    assert mu.on_sphere
    assert np.all(mu.points @ pole > 0)


@pytest.mark.parametrize('subdivisions, count', [(0, 12), (1, 42), (2, 162)])
def test_icosphere_vertex_count(subdivisions, count):
    nodes = icosphere(subdivisions)
    assert nodes.shape == (count, 3)
    assert_allclose(np.linalg.norm(nodes, axis=1), 1.0)


def test_sphere_grid_sizes():
    assert sphere_grid(1).shape == (720, 2)
    assert sphere_grid(2).shape == (2562, 3)
