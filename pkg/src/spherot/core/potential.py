"""
Wasserstein potentials x ↦ d_{W_p}(δ_x, μ)^p and the barycentric identities of the quadratic case.
"""

import logging
from dataclasses import dataclass

import numpy as np

from spherot.core.cfg import DEFAULT_TOLERANCES
from spherot.core.err import InvalidParameter, NotOnSphere
from spherot.core.sphere import DiscreteMeasure, barycenter, check_same_dim, coords_of
from spherot.core.transport import ambient_squared_cost, solve_transport

log = logging.getLogger(__name__)

ORTHOGONALITY_THRESHOLD = DEFAULT_TOLERANCES.orthogonality

CHORD = 'chord'
HALF_CHORD = 'half_chord'


@dataclass(frozen=True, eq=False)
class PotentialSamples:
    """Potential values at sample sites.

    `metric` is `chord` for ‖x − y‖^p or `half_chord` for the circle normalization |½(z − ω)|^p; the two differ
    by the factor 2^p.
    """
    sites: np.ndarray
    values: np.ndarray
    p: float
    metric: str = CHORD
    generated: bool = True

    def __post_init__(self):
        sites = np.array(self.sites, dtype=float)
        values = np.array(self.values, dtype=float).ravel()
        if sites.ndim != 2 or sites.shape[0] != values.size:
            raise InvalidParameter('sites', sites.shape, f"expected one site per value ({values.size})")
        if self.metric not in (CHORD, HALF_CHORD):
            raise InvalidParameter('metric', self.metric, f"expected `{CHORD}` or `{HALF_CHORD}`")
        bound = 2.0 ** self.p if self.metric == CHORD else 1.0
        slack = 1e-9 * bound
        if np.any(values < -slack) or np.any(values > bound + slack):
            raise InvalidParameter('values', f"[{values.min()}, {values.max()}]", f"outside [0, {bound}]")
        sites.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, 'sites', sites)
        object.__setattr__(self, 'values', values)

    @property
    def thetas(self) -> np.ndarray:
        """Angles of S¹ sites in [0, 2π)."""
        if self.sites.shape[1] != 2:
            raise InvalidParameter('sites', self.sites.shape, "angles exist only for sites on S¹")
        return np.mod(np.arctan2(self.sites[:, 1], self.sites[:, 0]), 2 * np.pi)

    def to_chord(self) -> 'PotentialSamples':
        if self.metric == CHORD:
            return self
        return PotentialSamples(self.sites, self.values * 2.0 ** self.p, self.p, CHORD, self.generated)

    def to_half_chord(self) -> 'PotentialSamples':
        if self.metric == HALF_CHORD:
            return self
        return PotentialSamples(self.sites, self.values / 2.0 ** self.p, self.p, HALF_CHORD, self.generated)


def _require_on_sphere(mu: DiscreteMeasure):
    if not mu.on_sphere:
        raise NotOnSphere(f"Potential needs a measure on the sphere ({mu.size} atoms)")


def potential(mu: DiscreteMeasure, x, p: float) -> float:
    """Σ_i w_i ‖x − p_i‖^p, which is d_{W_p}(δ_x, μ)^p (the only coupling with a Dirac is the product)."""
    if not p >= 1:
        raise InvalidParameter('p', p, "must be >= 1")
    _require_on_sphere(mu)
    distances = np.linalg.norm(mu.points - coords_of(x), axis=1)
    return float(mu.weights @ distances ** p)


def potential_samples(mu: DiscreteMeasure, sites, p: float) -> PotentialSamples:
    if not p >= 1:
        raise InvalidParameter('p', p, "must be >= 1")
    _require_on_sphere(mu)
    sites = np.atleast_2d(np.asarray(sites, dtype=float))
    distances = np.linalg.norm(sites[:, None, :] - mu.points[None, :, :], axis=2)
    return PotentialSamples(sites, (distances ** p) @ mu.weights, p)


def dirac_distance_quadratic(mu: DiscreteMeasure, x) -> float:
    """d²_{W2}(μ, δ_x) = 2(1 − <x, m(μ)>)."""
    _require_on_sphere(mu)
    return 2.0 * (1.0 - float(coords_of(x) @ barycenter(mu)))


def dispersion(mu: DiscreteMeasure) -> float:
    """d²_{W2(R^{n+1})}(μ, δ_{m(μ)}) = 1 − ‖m(μ)‖²."""
    _require_on_sphere(mu)
    m = barycenter(mu)
    return 1.0 - float(m @ m)


def orthogonality_defect(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """‖m(μ) − m(ν)‖² + dispersion(μ) + dispersion(ν) − d²_{W2(R^{n+1})}(μ, ν).

    The right-hand sum is the cost of the product coupling of the centred measures, so the defect is
    nonnegative; it vanishes exactly when the supports lie in orthogonal affine subspaces.
    """
    check_same_dim(mu, nu)
    _require_on_sphere(mu)
    _require_on_sphere(nu)
    delta = barycenter(mu) - barycenter(nu)
    squared = solve_transport(mu, nu, ambient_squared_cost(mu, nu)).cost
    defect = float(delta @ delta) + dispersion(mu) + dispersion(nu) - squared
    log.debug(f"[orthogonality_defect] defect=[{defect!r}] squared_distance=[{squared!r}]")
    return defect


def is_orthogonal(mu: DiscreteMeasure, nu: DiscreteMeasure, threshold: float = ORTHOGONALITY_THRESHOLD) -> bool:
    return orthogonality_defect(mu, nu) <= threshold
