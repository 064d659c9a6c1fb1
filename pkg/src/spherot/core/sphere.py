"""
Points of S^n and finitely supported probability measures on R^{n+1}.

Measures live in the ambient space so that translated (off-sphere) measures are first-class values;
the `on_sphere` flag records whether every atom has unit norm.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Iterator, Optional, Tuple

import numpy as np
from scipy.linalg import null_space

from spherot.core.cfg import DEFAULT_TOLERANCES
from spherot.core.err import DegenerateVector, DimensionMismatch, InvalidMeasure, NotTwoPoint

log = logging.getLogger(__name__)

ATOM_TOL = DEFAULT_TOLERANCES.atom
PROJECTION_EPS = DEFAULT_TOLERANCES.projection
NORM_TOL = 1e-12
MASS_TOL = 1e-12


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def coords_of(x) -> np.ndarray:
    """Ambient coordinates of a SpherePoint or of any array-like vector."""
    if isinstance(x, SpherePoint):
        return x.coords
    return np.asarray(x, dtype=float).ravel()


@dataclass(frozen=True, eq=False)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).ravel()
        if coords.size < 2:
            raise InvalidMeasure(f"A point of S^n needs at least 2 coordinates, got {coords.size}")
        norm = np.linalg.norm(coords)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidMeasure(f"Point is not on the unit sphere: norm={norm!r}")
        object.__setattr__(self, 'coords', _frozen(coords))

    @classmethod
    def from_angle(cls, theta: float) -> 'SpherePoint':
        return cls(np.array([np.cos(theta), np.sin(theta)]))

    @property
    def dim(self) -> int:
        return self.coords.size - 1

    def is_close(self, other, tol=ATOM_TOL) -> bool:
        return bool(np.linalg.norm(self.coords - coords_of(other)) <= tol)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)

    def __neg__(self) -> 'SpherePoint':
        return SpherePoint(-self.coords)

    def __repr__(self):
        return f"SpherePoint({np.array2string(self.coords, precision=6)})"


class DiscreteMeasure:
    """Finitely supported probability measure.

    Atoms closer than the merge tolerance are merged by summing their weights, atoms of zero weight are
    dropped. Violated invariants raise :class:`InvalidMeasure`; use :meth:`normalized` to rescale weights.
    """

    __slots__ = ('_points', '_weights', '_on_sphere')

    def __init__(self, points, weights, *, merge_tol: float = ATOM_TOL):
        points = np.array(points, dtype=float)
        if points.ndim == 1:
            points = points[None, :]
        weights = np.array(weights, dtype=float).ravel()

        if points.ndim != 2 or points.shape[0] != weights.size:
            raise InvalidMeasure(f"{weights.size} weights for points of shape {points.shape}")
        if weights.size == 0:
            raise InvalidMeasure("A probability measure needs at least one atom")
        if points.shape[1] < 2:
            raise InvalidMeasure("Ambient dimension must be at least 2 (n >= 1)")
        if not (np.all(np.isfinite(points)) and np.all(np.isfinite(weights))):
            raise InvalidMeasure("Points and weights must be finite")
        if np.any(weights < 0):
            raise InvalidMeasure(f"Negative weight {weights.min()!r}")
        if abs(weights.sum() - 1.0) > MASS_TOL:
            raise InvalidMeasure(f"Weights sum to {weights.sum()!r}, not 1")

        points, weights = _merge_atoms(points, weights, merge_tol)
        self._points = _frozen(points)
        self._weights = _frozen(weights)
        self._on_sphere = bool(np.all(np.abs(np.linalg.norm(points, axis=1) - 1.0) <= NORM_TOL))

    @classmethod
    def normalized(cls, points, weights, **kwargs) -> 'DiscreteMeasure':
        weights = np.array(weights, dtype=float).ravel()
        total = weights.sum()
        if not total > 0:
            raise InvalidMeasure(f"Cannot normalize weights with total {total!r}")
        return cls(points, weights / total, **kwargs)

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def on_sphere(self) -> bool:
        return self._on_sphere

    @property
    def ambient_dim(self) -> int:
        return self._points.shape[1]

    @property
    def dim(self) -> int:
        return self.ambient_dim - 1

    @property
    def size(self) -> int:
        return self._weights.size

    def __len__(self):
        return self.size

    def atoms(self) -> Iterator[Tuple[np.ndarray, float]]:
        return zip(self._points, self._weights)

    def sorted_atoms(self) -> Tuple[np.ndarray, np.ndarray]:
        """Atoms in lexicographic order of their coordinates."""
        order = np.lexsort(self._points.T[::-1])
        return self._points[order], self._weights[order]

    def mass_at(self, x, tol=ATOM_TOL) -> float:
        distances = np.linalg.norm(self._points - coords_of(x), axis=1)
        return float(self._weights[distances <= tol].sum())

    def is_close(self, other: 'DiscreteMeasure', *, point_tol=1e-9, weight_tol=1e-12) -> bool:
        """Atom-by-atom comparison: every atom of one measure matched to an atom of the other."""
        if self.ambient_dim != other.ambient_dim or self.size != other.size:
            return False
        unmatched = list(range(other.size))
        for p, w in self.atoms():
            for k in unmatched:
                if np.linalg.norm(p - other.points[k]) <= point_tol and abs(w - other.weights[k]) <= weight_tol:
                    unmatched.remove(k)
                    break
            else:
                return False
        return True

    def serialize(self):
        return {
            "schema": "wsl-1",
            "dim": self.dim,
            "points": self._points.tolist(),
            "weights": self._weights.tolist(),
        }

    def __repr__(self):
        return f"DiscreteMeasure(size={self.size}, dim={self.dim}, on_sphere={self._on_sphere})"


def _merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float):
    kept_points = []
    kept_weights = []
    for p, w in zip(points, weights):
        if w == 0.0:
            continue
        for k, q in enumerate(kept_points):
            if np.linalg.norm(p - q) <= tol:
                kept_weights[k] += w
                break
        else:
            kept_points.append(p)
            kept_weights.append(w)

    if not kept_points:
        raise InvalidMeasure("Every atom has zero weight")
    return np.array(kept_points), np.array(kept_weights)


def check_same_dim(mu: DiscreteMeasure, nu: DiscreteMeasure):
    if mu.ambient_dim != nu.ambient_dim:
        raise DimensionMismatch(mu.ambient_dim, nu.ambient_dim)


def dirac(x) -> DiscreteMeasure:
    return DiscreteMeasure([coords_of(x)], [1.0])


def antipodal_pair(z) -> DiscreteMeasure:
    """½δ_z + ½δ_{−z}"""
    z = coords_of(z)
    return DiscreteMeasure([z, -z], [0.5, 0.5])


def two_point(a, b, weight: float = 0.5) -> DiscreteMeasure:
    return DiscreteMeasure([coords_of(a), coords_of(b)], [weight, 1.0 - weight])


def project_to_sphere(v, eps: float = PROJECTION_EPS) -> SpherePoint:
    v = coords_of(v)
    norm = np.linalg.norm(v)
    if norm < eps:
        raise DegenerateVector(norm, eps)
    return SpherePoint(v / norm)


def barycenter(mu: DiscreteMeasure) -> np.ndarray:
    return mu.weights @ mu.points


def translate(mu: DiscreteMeasure, v) -> DiscreteMeasure:
    v = coords_of(v)
    if v.size != mu.ambient_dim:
        raise DimensionMismatch(mu.ambient_dim, v.size)
    return DiscreteMeasure(mu.points + v, mu.weights)


def centered(mu: DiscreteMeasure) -> DiscreteMeasure:
    """The translate of `mu` with barycenter at the origin."""
    return translate(mu, -barycenter(mu))


def push_forward(mu: DiscreteMeasure, f: Callable[[np.ndarray], np.ndarray]) -> DiscreteMeasure:
    images = np.array([coords_of(f(p)) for p in mu.points])
    return DiscreteMeasure.normalized(images, mu.weights)


def is_supported_on_sphere(mu: DiscreteMeasure, tol: float = NORM_TOL) -> bool:
    return bool(np.all(np.abs(np.linalg.norm(mu.points, axis=1) - 1.0) <= tol))


def support_dimension(mu: DiscreteMeasure, tol: float = 1e-9) -> int:
    """Affine dimension of the support."""
    if mu.size == 1:
        return 0
    return int(np.linalg.matrix_rank(mu.points[1:] - mu.points[0], tol=tol))


@dataclass(frozen=True, eq=False)
class TranslationSphereDescription:
    """Set of vectors v for which the translate of a two-point measure by v stays on the sphere:
    the sphere of radius ‖s‖ centred at −s inside the hyperplane orthogonal to the support chord,
    s being the midpoint of the support. The singleton {0} when the support is antipodal."""
    center: np.ndarray
    radius: float
    normal_directions: np.ndarray  # orthonormal rows spanning (affspan(supp) − s)^⊥
    chord_direction: np.ndarray

    @property
    def is_singleton(self) -> bool:
        return self.radius <= ATOM_TOL

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = coords_of(v)
        if self.is_singleton:
            return bool(np.linalg.norm(v) <= tol)
        off_plane = abs(float(v @ self.chord_direction))
        off_sphere = abs(np.linalg.norm(v - self.center) - self.radius)
        return bool(off_plane <= tol and off_sphere <= tol)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.is_singleton:
            return np.zeros((count, self.center.size))
        coefficients = rng.standard_normal((count, self.normal_directions.shape[0]))
        directions = coefficients @ self.normal_directions
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
        return self.center + self.radius * directions


def admissible_translations(mu: DiscreteMeasure) -> TranslationSphereDescription:
    if mu.size != 2:
        raise NotTwoPoint(mu.size)
    if not np.allclose(mu.weights, 0.5, rtol=0, atol=MASS_TOL):
        raise NotTwoPoint(mu.size, f"Expected weights 1/2-1/2, got {mu.weights.tolist()}")
    if not mu.on_sphere:
        raise NotTwoPoint(mu.size, "The two atoms must lie on the sphere")

    a, b = mu.points
    midpoint = (a + b) / 2
    chord = (a - b) / np.linalg.norm(a - b)
    radius = float(np.linalg.norm(midpoint))
    if radius <= ATOM_TOL:
        log.debug("[admissible_translations] support=[antipodal] result=[singleton]")
        radius = 0.0
        midpoint = np.zeros_like(midpoint)

    normals = null_space(chord[None, :]).T
    return TranslationSphereDescription(_frozen(-midpoint), radius, _frozen(normals), _frozen(chord))


def canonical_frame_description(theta: float, n: int) -> TranslationSphereDescription:
    """Closed form for supp = {(cosθ, 0, …, 0, ±sinθ)}: centre −(cosθ, 0, …, 0), radius |cosθ|,
    inside the hyperplane of vanishing last coordinate."""
    center = np.zeros(n + 1)
    center[0] = -np.cos(theta)
    chord = np.zeros(n + 1)
    chord[-1] = 1.0
    normals = np.eye(n + 1)[:-1]
    radius = abs(np.cos(theta))
    return TranslationSphereDescription(_frozen(center), float(radius), _frozen(normals), _frozen(chord))


def orthogonal_matrix(rng: np.random.Generator, size: int, *, det: Optional[int] = None) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((size, size)))
    q = q * np.sign(np.diag(r))
    if det is not None and np.sign(np.linalg.det(q)) != det:
        q[:, 0] = -q[:, 0]
    return q
