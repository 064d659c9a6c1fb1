from typing import Optional

import numpy as np

from spherot.core.sphere import DiscreteMeasure, coords_of

PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array([
    [-1, PHI, 0], [1, PHI, 0], [-1, -PHI, 0], [1, -PHI, 0],
    [0, -1, PHI], [0, 1, PHI], [0, -1, -PHI], [0, 1, -PHI],
    [PHI, 0, -1], [PHI, 0, 1], [-PHI, 0, -1], [-PHI, 0, 1],
])

_ICOSAHEDRON_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
], dtype=int)


def random_sphere_points(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Uniform points on S^n as rows of a (count, n+1) array."""
    points = rng.standard_normal((count, n + 1))
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def random_measure(rng: np.random.Generator, atoms: int, n: int, *, hemisphere=None) -> DiscreteMeasure:
    """Random measure on S^n with Dirichlet-like weights.

    :param hemisphere: pole N; atoms are then drawn from the open hemisphere {<x, N> > 0}
    """
    points = random_sphere_points(rng, atoms, n)
    if hemisphere is not None:
        pole = coords_of(hemisphere)
        heights = points @ pole
        points = points - 2 * np.minimum(heights, 0.0)[:, None] * pole
        flat = np.abs(points @ pole) < 1e-3
        points[flat] = (points[flat] + 0.1 * pole) / np.linalg.norm(points[flat] + 0.1 * pole, axis=1, keepdims=True)
    weights = rng.uniform(0.05, 1.0, atoms)
    return DiscreteMeasure.normalized(points, weights)


def circle_nodes(count: int, offset: float = 0.0) -> np.ndarray:
    theta = offset + 2 * np.pi * np.arange(count) / count
    return np.column_stack([np.cos(theta), np.sin(theta)])


def icosphere(subdivisions: int) -> np.ndarray:
    """Quasi-uniform nodes on S²: the icosahedron with every edge bisected `subdivisions` times and
    the midpoints pushed to the sphere. Yields 10·4^k + 2 distinct vertices (2562 for k = 4)."""
    vertices = [v / np.linalg.norm(v) for v in _ICOSAHEDRON_VERTICES]
    faces = [tuple(face) for face in _ICOSAHEDRON_FACES]

    for _ in range(subdivisions):
        midpoints = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in midpoints:
                m = vertices[i] + vertices[j]
                vertices.append(m / np.linalg.norm(m))
                midpoints[key] = len(vertices) - 1
            return midpoints[key]

        refined = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        faces = refined

    return np.array(vertices)


def sphere_grid(n: int, resolution: Optional[int] = None) -> np.ndarray:
    """Candidate grid on S¹ (equispaced) or S² (icosphere)."""
    if n == 1:
        return circle_nodes(resolution or 720)
    if n == 2:
        return icosphere(resolution if resolution is not None else 4)
    raise ValueError(f"No candidate grid for S^{n}")
