"""
Projected displacement interpolation.

p_α(x, y) is the point of the sphere nearest to (1−α)x + αy. Pushing an optimal plan for the cost
c_α(x, y) = 2(1 − ‖(1−α)x + αy‖) forward by p_α minimizes Q_α(ρ) = (1−α)d²(μ, ρ) + αd²(ν, ρ).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from spherot.core.cfg import DEFAULT_TOLERANCES
from spherot.core.err import AntipodalMass, InvalidParameter, NotInUpperHemisphere, NotOnSphere
from spherot.core.sphere import DiscreteMeasure, SpherePoint, coords_of, project_to_sphere
from spherot.core.transport import TransportPlan, c_alpha_cost, solve_transport, squared_distance

log = logging.getLogger(__name__)

ANTIPODAL_TOL = DEFAULT_TOLERANCES.antipodal
PROJECTION_EPS = DEFAULT_TOLERANCES.projection
PREIMAGE_TOL = 1e-9


def _check_alpha(alpha: float, *, open_interval=False):
    inside = 0.0 < alpha < 1.0 if open_interval else 0.0 <= alpha <= 1.0
    if not inside:
        raise InvalidParameter('alpha', alpha, "must be in (0, 1)" if open_interval else "must be in [0, 1]")


def p_alpha(x, y, alpha: float) -> SpherePoint:
    """Normalized (1−α)x + αy; undefined for α = ½ and y = −x."""
    _check_alpha(alpha)
    return project_to_sphere((1 - alpha) * coords_of(x) + alpha * coords_of(y))


def c_alpha(x, y, alpha: float) -> float:
    _check_alpha(alpha)
    return max(2.0 * (1.0 - float(np.linalg.norm((1 - alpha) * coords_of(x) + alpha * coords_of(y)))), 0.0)


def c_alpha_detour(x, z, y, alpha: float) -> float:
    """(1−α)‖x − z‖² + α‖z − y‖²; its minimum over z on the sphere is c_α(x, y), attained at p_α(x, y)."""
    _check_alpha(alpha)
    x, z, y = coords_of(x), coords_of(z), coords_of(y)
    return float((1 - alpha) * np.sum((x - z) ** 2) + alpha * np.sum((z - y) ** 2))


def _degenerate_mass(plan: TransportPlan, alpha: float, antipodal_tol: float = ANTIPODAL_TOL) -> float:
    """Plan mass on pairs where (1−α)x + αy cannot be projected."""
    mass = 0.0
    for i, j, weight in plan.to_rows():
        x, y = plan.source.points[i], plan.target.points[j]
        antipodal = alpha == 0.5 and np.linalg.norm(x + y) <= antipodal_tol
        if antipodal or np.linalg.norm((1 - alpha) * x + alpha * y) < PROJECTION_EPS:
            mass += weight
    return mass


def displacement_projection(plan: TransportPlan, alpha: float) -> DiscreteMeasure:
    """Push-forward of the plan by (x, y) ↦ p_α(x, y)."""
    _check_alpha(alpha)
    if not (plan.source.on_sphere and plan.target.on_sphere):
        raise NotOnSphere("Displacement projection needs a plan between measures on the sphere")
    if alpha == 0.0:
        return plan.source
    if alpha == 1.0:
        return plan.target

    offending = _degenerate_mass(plan, alpha)
    if offending > 0:
        raise AntipodalMass(offending)

    rows = plan.to_rows()
    points = [p_alpha(plan.source.points[i], plan.target.points[j], alpha).coords for i, j, _ in rows]
    return DiscreteMeasure.normalized(points, [weight for _, _, weight in rows])


def q_alpha(mu: DiscreteMeasure, nu: DiscreteMeasure, rho: DiscreteMeasure, alpha: float) -> float:
    """α-weighted mean squared error (1−α)d²(μ, ρ) + αd²(ν, ρ)."""
    _check_alpha(alpha)
    for measure in (mu, nu, rho):
        if not measure.on_sphere:
            raise NotOnSphere(f"Measure with {measure.size} atoms is not supported on the sphere")
    return (1 - alpha) * squared_distance(mu, rho) + alpha * squared_distance(nu, rho)


@dataclass(frozen=True, eq=False)
class InterpolationResult:
    measure: Optional[DiscreteMeasure]
    plan: TransportPlan
    q_value: float
    degenerate: bool = False
    unique_hint: bool = True

    def serialize(self):
        return {
            "schema": "wsl-1",
            "measure": self.measure.serialize() if self.measure is not None else None,
            "q_value": self.q_value,
            "degenerate": self.degenerate,
            "unique_hint": self.unique_hint,
        }


def minimize_q(mu: DiscreteMeasure, nu: DiscreteMeasure, alpha: float, *,
               antipodal_tol: float = ANTIPODAL_TOL, **solver_options) -> InterpolationResult:
    """Minimizer of Q_α: the displacement projection of a c_α-optimal plan.

    When α = ½ and the optimal plan moves mass between antipodes the minimizer is not unique and the result
    is flagged degenerate with no measure. `solver_options` go to :func:`solve_transport`.
    """
    _check_alpha(alpha, open_interval=True)
    plan = solve_transport(mu, nu, c_alpha_cost(mu, nu, alpha), **solver_options)
    offending = _degenerate_mass(plan, alpha, antipodal_tol)
    if offending > 0:
        log.info(f"[interpolation_degenerate] alpha=[{alpha}] antipodal_mass=[{offending!r}]")
        return InterpolationResult(None, plan, plan.cost, True, plan.unique_hint)

    measure = displacement_projection(plan, alpha)
    log.debug(f"[interpolation_solved] alpha=[{alpha}] atoms=[{measure.size}] q_value=[{plan.cost!r}]")
    return InterpolationResult(measure, plan, plan.cost, False, plan.unique_hint)


def invert_half_projection(w, pole) -> SpherePoint:
    """The unique u with p_{1/2}(N, u) = w, namely 2<w, N>w − N, for w in the open hemisphere around N."""
    w, pole = coords_of(w), coords_of(pole)
    height = float(w @ pole)
    if not height > 0:
        raise NotInUpperHemisphere(height)
    u = 2 * height * w - pole
    return SpherePoint(u / np.linalg.norm(u))


def recover_from_half_projection(rho: DiscreteMeasure, pole) -> DiscreteMeasure:
    """Per-atom inverse of p_{1/2}(N, ·) on a measure supported in the open hemisphere around N."""
    points = [invert_half_projection(point, pole).coords for point in rho.points]
    return DiscreteMeasure(points, rho.weights)


def preimages_under_p_alpha(w, pole, alpha: float) -> List[SpherePoint]:
    """All u with p_α(N, u) = w.

    Writing (1−α)N + αu = t·w with t > 0 and ‖u‖ = 1 gives t² − 2(1−α)<w, N>t + (1 − 2α) = 0. For α > ½ the
    roots have opposite signs (one preimage); for α < ½ both are positive when <w, N> > 0 and real (two
    preimages, one when tangent) and none otherwise.
    """
    if not 0.0 < alpha <= 1.0:
        raise InvalidParameter('alpha', alpha, "must be in (0, 1]")
    w, pole = coords_of(w), coords_of(pole)
    c = float(w @ pole)
    half_sum = (1 - alpha) * c
    discriminant = half_sum ** 2 - (1 - 2 * alpha)
    if discriminant < 0:
        if discriminant < -1e-12:
            return []
        discriminant = 0.0
    root = np.sqrt(discriminant)

    preimages = []
    for t in sorted({half_sum + root, half_sum - root}, reverse=True):
        if t <= PROJECTION_EPS:
            continue
        u = (t * w - (1 - alpha) * pole) / alpha
        norm = np.linalg.norm(u)
        if abs(norm - 1.0) > PREIMAGE_TOL:
            continue
        candidate = SpherePoint(u / norm)
        if any(candidate.is_close(other, 1e-12) for other in preimages):
            continue
        if np.linalg.norm(p_alpha(pole, candidate, alpha).coords - w) <= PREIMAGE_TOL:
            preimages.append(candidate)
    return preimages
