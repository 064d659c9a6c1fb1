"""
Executable checks of the quantities an isometry of the quadratic Wasserstein space over the sphere must preserve:
diameter pairs, barycenters, dispersion and orthogonality of supports, admissible translations, bisector masses
and the hemisphere reconstruction. Each battery yields :class:`PropertyReport` values; failures are reported,
never raised.
"""

import asyncio
import logging
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from spherot.common import seeded_rng
from spherot.common.report import PropertyReport
from spherot.core.cfg import DEFAULT_TOLERANCES, Tolerances
from spherot.core.err import SingularKernel
from spherot.core.fourier import (CircleGrid, convolution_matrix, deconvolve_potential, kernel_coefficient_exact,
                                  kernel_coefficient_quadrature, kernel_coefficient_series, potential_by_convolution)
from spherot.core.interpolation import displacement_projection, recover_from_half_projection
from spherot.core.potential import (dirac_distance_quadratic, dispersion, orthogonality_defect, potential)
from spherot.core.sampling import random_measure, random_sphere_points
from spherot.core.sphere import (DiscreteMeasure, admissible_translations, antipodal_pair, barycenter,
                                 canonical_frame_description, coords_of, dirac, orthogonal_matrix, translate,
                                 two_point)
from spherot.core.transport import (c_alpha_cost, is_translate, solve_transport, squared_distance,
                                    translation_residual, wasserstein_distance)

log = logging.getLogger(__name__)

EQUIDISTANCE_TOL = DEFAULT_TOLERANCES.equidistance


@dataclass(frozen=True, eq=False)
class BisectorScan:
    """g(α)² = d²(μ, αδ_x + (1−α)δ_{−x}) as a convex piecewise-linear function of α.

    Sending mass of atom y to x instead of −x changes the cost by ‖y − x‖² − ‖y + x‖² = −4<y, x>, so the optimal
    coupling fills x with the atoms of smallest slope first. Breakpoints are the cumulative weights in that order;
    g² is flat exactly over the mass of atoms equidistant from x and −x.
    """
    breakpoints: np.ndarray
    values: np.ndarray
    flat_lo: float
    flat_hi: float

    def g_squared(self, alpha):
        return np.interp(alpha, self.breakpoints, self.values)

    @property
    def flat_width(self) -> float:
        return self.flat_hi - self.flat_lo


def bisector_scan(mu: DiscreteMeasure, x, tol: float = EQUIDISTANCE_TOL) -> BisectorScan:
    x = coords_of(x)
    to_x = np.sum((mu.points - x) ** 2, axis=1)
    to_antipode = np.sum((mu.points + x) ** 2, axis=1)
    equidistant = np.abs(np.sqrt(to_x) - np.sqrt(to_antipode)) <= tol
    slopes = np.where(equidistant, 0.0, to_x - to_antipode)

    order = np.argsort(slopes, kind='stable')
    weights = mu.weights[order]
    breakpoints = np.concatenate(([0.0], np.cumsum(weights)))
    breakpoints[-1] = 1.0
    values = float(mu.weights @ to_antipode) + np.concatenate(([0.0], np.cumsum(weights * slopes[order])))

    flat_lo = float(mu.weights[(slopes < 0)].sum())
    flat_hi = flat_lo + float(mu.weights[equidistant].sum())
    return BisectorScan(breakpoints, values, flat_lo, min(flat_hi, 1.0))


def bisector_mass(mu: DiscreteMeasure, x, tol: float = EQUIDISTANCE_TOL) -> float:
    """μ-mass of the bisector {y : ‖y − x‖ = ‖y + x‖}, read off as the width of the minimum of α ↦ g(α)."""
    return bisector_scan(mu, x, tol).flat_width


def equidistant_mass(mu: DiscreteMeasure, x, tol: float = EQUIDISTANCE_TOL) -> float:
    """Same mass by direct inspection of the support."""
    x = coords_of(x)
    gap = np.abs(np.linalg.norm(mu.points - x, axis=1) - np.linalg.norm(mu.points + x, axis=1))
    return float(mu.weights[gap <= tol].sum())


def _check(name: str, tolerance: float, inputs: Sequence, run: Callable[[], Tuple[float, str]]) -> PropertyReport:
    try:
        residual, notes = run()
    except Exception as e:
        log.error(f"[property_check_error] property=[{name}]", exc_info=e)
        return PropertyReport.failure(name, inputs, tolerance, e)

    report = PropertyReport.evaluate(name, inputs, residual, tolerance, notes)
    log.info(f"[property_checked] property=[{name}] residual=[{residual:.3e}] passed=[{report.passed}]")
    return report


def _random_size(rng, high=4) -> int:
    return int(rng.integers(1, high + 1))


def verify_translation_identity(trials: int = 50, seed: int = 0, *, n: int = 2) -> PropertyReport:
    """d²((t_v)_#μ, ν) = d²(μ, ν) + <v, v + 2m(μ) − 2m(ν)> on random (μ, ν, v), and the translate test
    answering correctly both for translated copies and for generic pairs."""
    if trials < 1:
        raise ValueError("At least one trial is needed")
    name = 'translation_identity'
    rng = seeded_rng(seed, name)
    cases = []
    for _ in range(trials):
        mu = random_measure(rng, _random_size(rng), n)
        nu = random_measure(rng, _random_size(rng), n)
        cases.append((mu, nu, rng.standard_normal(n + 1)))

    def run():
        residual = 0.0
        misclassified = 0
        for mu, nu, v in cases:
            residual = max(residual, abs(translation_residual(mu, nu, v)))
            shifted = translate(mu, v)
            gap = squared_distance(mu, shifted) - float(np.sum((barycenter(shifted) - barycenter(mu)) ** 2))
            residual = max(residual, abs(gap))
            if not is_translate(mu, shifted):
                misclassified += 1
            if mu.size > 1 and nu.size > 1 and is_translate(mu, nu):
                misclassified += 1
        return residual + misclassified, f"trials={trials} misclassified={misclassified}"

    return _check(name, 1e-8, [seed, trials] + [m for case in cases for m in case], run)


def _diameter_check(rng, n=2) -> PropertyReport:
    net = random_sphere_points(rng, 12, n)
    net = np.concatenate([net, -net])
    generic = [(random_measure(rng, 3, n), random_measure(rng, 3, n)) for _ in range(10)]

    def run():
        residual = 0.0
        for i, x in enumerate(net):
            for y in net[i + 1:]:
                d = wasserstein_distance(dirac(x), dirac(y))
                # d² + ‖x + y‖² = 4: the diameter 2 is reached exactly when y = −x
                residual = max(residual, abs(d ** 2 + np.sum((x + y) ** 2) - 4.0))
        residual = max(residual, abs(wasserstein_distance(dirac([0.0, 1.0]), dirac([1.0, 0.0])) - np.sqrt(2)))
        largest = max(squared_distance(mu, nu) for mu, nu in generic)
        residual = max(residual, max(0.0, largest - 4.0 + 1e-6))
        return residual, f"dirac_net={len(net)} largest_generic_d2={largest:.6f}"

    return _check('s1_diameter_pairs', 1e-10, [net], run)


def _barycenter_check(rng, n=2) -> PropertyReport:
    cases = [(random_measure(rng, _random_size(rng, 5), n), random_sphere_points(rng, 1, n)[0]) for _ in range(100)]

    def run():
        residual = 0.0
        for mu, x in cases:
            closed_form = dirac_distance_quadratic(mu, x)
            residual = max(residual, abs(closed_form - potential(mu, x, 2)))
            residual = max(residual, abs(closed_form - squared_distance(dirac(x), mu)))
        return residual, f"cases={len(cases)}"

    return _check('s2_barycenter_formula', 1e-10, [m for case in cases for m in case], run)


def _orthogonal_pair(rng, n=2) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    frame = orthogonal_matrix(rng, n + 1)
    a, b = rng.uniform(-0.8, 0.8, 2)
    u, v = rng.uniform(0.2, 0.8, 2)
    mu = two_point(a * frame[2] + np.sqrt(1 - a * a) * frame[0], a * frame[2] - np.sqrt(1 - a * a) * frame[0], u)
    nu = two_point(b * frame[2] + np.sqrt(1 - b * b) * frame[1], b * frame[2] - np.sqrt(1 - b * b) * frame[1], v)
    return mu, nu


def _tilted_pair(rng, n=2) -> Tuple[DiscreteMeasure, DiscreteMeasure]:
    frame = orthogonal_matrix(rng, n + 1)
    phi = rng.uniform(0.0, 1.2)
    return antipodal_pair(frame[0]), antipodal_pair(np.cos(phi) * frame[0] + np.sin(phi) * frame[1])


def _dispersion_check(rng, tolerances: Tolerances, n=2) -> PropertyReport:
    measures = [random_measure(rng, _random_size(rng, 5), n) for _ in range(20)]
    orthogonal = [_orthogonal_pair(rng, n) for _ in range(20)]
    tilted = [_tilted_pair(rng, n) for _ in range(20)]

    def run():
        residual = 0.0
        for mu in measures:
            spread = float(mu.weights @ np.sum((mu.points - barycenter(mu)) ** 2, axis=1))
            residual = max(residual, abs(dispersion(mu) - spread))
        for mu, nu in zip(measures, measures[1:]):
            residual = max(residual, -orthogonality_defect(mu, nu))
        for mu, nu in orthogonal:
            residual = max(residual, abs(orthogonality_defect(mu, nu)))
        smallest = min(orthogonality_defect(mu, nu) for mu, nu in tilted)
        residual = max(residual, max(0.0, 1e-3 - smallest))
        return residual, f"smallest_tilted_defect={smallest:.6f}"

    inputs = measures + [m for pair in orthogonal + tilted for m in pair]
    return _check('s3_dispersion_orthogonality', tolerances.orthogonality, inputs, run)


def _translation_sphere_check(rng, n=2) -> PropertyReport:
    pairs = [antipodal_pair(random_sphere_points(rng, 1, n)[0]) for _ in range(3)]
    pairs += [DiscreteMeasure(random_sphere_points(rng, 2, n), [0.5, 0.5]) for _ in range(17)]
    theta = float(rng.uniform(0.1, 1.4))

    def run():
        residual = 0.0
        for mu in pairs:
            description = admissible_translations(mu)
            residual = max(residual, abs(description.radius - np.linalg.norm(description.center)))
            for v in description.sample(rng, 10):
                residual = max(residual, float(np.max(np.abs(np.linalg.norm(mu.points + v, axis=1) - 1.0))))
                residual = max(residual, 0.0 if description.contains(v) else 1.0)
        canonical = DiscreteMeasure([[np.cos(theta), 0.0, np.sin(theta)], [np.cos(theta), 0.0, -np.sin(theta)]],
                                    [0.5, 0.5])
        computed, expected = admissible_translations(canonical), canonical_frame_description(theta, n)
        residual = max(residual, float(np.linalg.norm(computed.center - expected.center)),
                       abs(computed.radius - expected.radius))
        return residual, f"pairs={len(pairs)} theta={theta:.6f}"

    return _check('s4_admissible_translations', 1e-9, pairs, run)


def _bisector_check(rng, tolerances: Tolerances) -> PropertyReport:
    tol = tolerances.equidistance
    cases = []
    for k in range(60):
        n = 1 + k % 3
        x = random_sphere_points(rng, 1, n)[0]
        mu = random_measure(rng, _random_size(rng, 5), n)
        if k % 2 == 0:
            y = random_sphere_points(rng, 1, n)[0]
            y = y - (y @ x) * x
            y /= np.linalg.norm(y)
            mu = DiscreteMeasure.normalized(np.concatenate([mu.points, [y]]), np.concatenate([mu.weights, [0.5]]))
        cases.append((mu, x))

    def run():
        residual = 0.0
        for mu, x in cases:
            residual = max(residual, abs(bisector_mass(mu, x, tol) - equidistant_mass(mu, x, tol)))
        for mu, x in cases[:5]:
            scan = bisector_scan(mu, x, tol)
            for alpha in np.linspace(0.0, 1.0, 21):
                target = DiscreteMeasure([x, -x], [alpha, 1 - alpha])
                residual = max(residual, abs(scan.g_squared(alpha) - squared_distance(mu, target)))
        return residual, f"cases={len(cases)}"

    return _check('s5_bisector_mass', 1e-8, [m for case in cases for m in case], run)


def _hemisphere_check(rng, n=2) -> PropertyReport:
    poles = random_sphere_points(rng, 50, n)
    measures = [random_measure(rng, _random_size(rng, 5), n, hemisphere=pole) for pole in poles]

    def run():
        residual = 0.0
        for pole, mu in zip(poles, measures):
            plan = solve_transport(dirac(pole), mu, c_alpha_cost(dirac(pole), mu, 0.5))
            recovered = recover_from_half_projection(displacement_projection(plan, 0.5), pole)
            for point, weight in mu.atoms():
                distances = np.linalg.norm(recovered.points - point, axis=1)
                k = int(np.argmin(distances))
                residual = max(residual, float(distances[k]), abs(recovered.weights[k] - weight))
        return residual, f"measures={len(measures)}"

    return _check('s6_hemisphere_round_trip', 1e-9, [poles] + measures, run)


def verify_rigidity_battery(seed: int = 0, tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[PropertyReport]:
    """One report per preserved quantity, each drawing from its own (seed, name) generator.

    `tolerances` supplies the orthogonality threshold and the equidistance test of the bisector check.
    """
    return [
        _diameter_check(seeded_rng(seed, 's1_diameter_pairs')),
        _barycenter_check(seeded_rng(seed, 's2_barycenter_formula')),
        _dispersion_check(seeded_rng(seed, 's3_dispersion_orthogonality'), tolerances),
        _translation_sphere_check(seeded_rng(seed, 's4_admissible_translations')),
        _bisector_check(seeded_rng(seed, 's5_bisector_mass'), tolerances),
        _hemisphere_check(seeded_rng(seed, 's6_hemisphere_round_trip')),
    ]


def verify_circle_battery(seed: int = 0, tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[PropertyReport]:
    """Kernel sign pattern, agreement of the three coefficient methods, the p = 2 rank collapse and
    recovery of grid measures from their potentials for p < 2. Deconvolution uses the singular-divisor and
    negative-weight thresholds of `tolerances`."""
    orders = (1.0, 1.25, 1.5, 1.75)
    deconvolution = {'singular_tol': tolerances.singular, 'negative_tol': tolerances.negative_weight}

    def signs():
        violations = 0
        for p in orders:
            violations += kernel_coefficient_series(p, 0) <= 0
            violations += sum(kernel_coefficient_series(p, n) >= 0 for n in range(1, 21))
        return float(violations), f"orders={list(orders)} frequencies=1..20"

    def agreement():
        residual = 0.0
        for p in (1.0, 1.5, 1.9):
            for n in range(21):
                series = kernel_coefficient_series(p, n)
                residual = max(residual, abs(series - kernel_coefficient_quadrature(p, n)),
                               abs(series - kernel_coefficient_exact(p, n)))
        return residual, "methods=series,quadrature,exact"

    def rank_collapse():
        residual = 0.0
        for size in (8, 16, 32):
            singular_values = np.linalg.svd(convolution_matrix(CircleGrid(size), 2.0), compute_uv=False)
            residual = max(residual, float(singular_values[3]))
            try:
                deconvolve_potential(potential_by_convolution(np.full(size, 1.0 / size), 2.0), **deconvolution)
                residual += 1.0
            except SingularKernel as e:
                residual += abs(e.kernel_rank - (size - 3))
        smallest = np.linalg.svd(convolution_matrix(CircleGrid(64), 1.0), compute_uv=False)[-1]
        residual += max(0.0, 1e-6 - smallest)
        return residual, f"min_singular_value_p1={smallest:.3e}"

    rng = seeded_rng(seed, 'circle_deconvolution_round_trip')
    weight_vectors = [rng.dirichlet(np.ones(64)) for _ in range(50)]

    def round_trip():
        residual = 0.0
        for p in (1.0, 1.5):
            for weights in weight_vectors:
                recovered = deconvolve_potential(potential_by_convolution(weights, p), **deconvolution)
                residual = max(residual, float(np.max(np.abs(recovered - weights))))
        return residual, f"grid_n=64 vectors={len(weight_vectors)}"

    return [
        _check('circle_kernel_signs', 0.0, list(orders), signs),
        _check('circle_coefficient_agreement', 1e-8, [1.0, 1.5, 1.9], agreement),
        _check('circle_rank_collapse', 1e-10, [8, 16, 32, 64], rank_collapse),
        _check('circle_deconvolution_round_trip', 1e-6, weight_vectors, round_trip),
    ]


async def _run_batteries(seed: int, trials: int, tolerances: Tolerances) -> List[PropertyReport]:
    batteries = {
        'rigidity': lambda: verify_rigidity_battery(seed, tolerances),
        'translation_identity': lambda: [verify_translation_identity(trials, seed)],
        'circle': lambda: verify_circle_battery(seed, tolerances),
    }
    results = await asyncio.gather(*(asyncio.to_thread(battery) for battery in batteries.values()),
                                   return_exceptions=True)

    reports = []
    for name, result in zip(batteries, results):
        if isinstance(result, Exception):
            log.error(f"[battery_error] battery=[{name}]", exc_info=result)
            reports.append(PropertyReport.failure(name, [seed], 0.0, result))
        else:
            reports.extend(result)
    return sorted(reports, key=lambda report: report.name)


def verify_all(seed: int = 0, trials: int = 50, tolerances: Tolerances = DEFAULT_TOLERANCES) -> List[PropertyReport]:
    """Every battery, run concurrently; reports ordered by name whatever the completion order."""
    log.info(f"[verification_started] seed=[{seed}] trials=[{trials}]")
    reports = asyncio.run(_run_batteries(seed, trials, tolerances))
    failed = [report.name for report in reports if not report.passed]
    log.info(f"[verification_finished] reports=[{len(reports)}] failed=[{','.join(failed)}]")
    return reports
