"""
Fourier analysis on the circle with the distance |½(z − ω)|.

The kernel is f_p(e^{iθ}) = |sin(θ/2)|^p. Its coefficients are available three ways: the binomial series
(summed with Richardson extrapolation of its polynomially decaying tail), trapezoidal quadrature, and the
closed Gamma-function form. On an N-grid the potential of a grid measure is the circular convolution of its
weights with the sampled kernel, so it can be inverted by dividing discrete spectra whenever no divisor
vanishes: always for 1 ≤ p < 2, never for p = 2 where only frequencies 0 and ±1 survive.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from rich.table import Table
from scipy.linalg import circulant
from scipy.special import gamma, rgamma

from spherot.core.cfg import DEFAULT_TOLERANCES
from spherot.core.err import (InvalidParameter, ReconstructionFailure, SingularKernel, TruncationTooSmall,
                              InvalidMeasure)
from spherot.core.potential import HALF_CHORD, PotentialSamples
from spherot.core.sampling import circle_nodes
from spherot.core.sphere import DiscreteMeasure

log = logging.getLogger(__name__)

SINGULAR_TOL = DEFAULT_TOLERANCES.singular
NEGATIVE_WEIGHT_TOL = DEFAULT_TOLERANCES.negative_weight
SERIES_TOL = DEFAULT_TOLERANCES.series

SERIES_START = 400
MAX_TRUNCATION = 2 ** 17
EXTRAPOLATION_LEVELS = 4  # partial sums at K, 2K, 4K, 8K, 16K
QUADRATURE_NODES = 65536
GRID_SITE_TOL = 1e-9

SERIES = 'series'
QUADRATURE = 'quadrature'
EXACT = 'exact'


def _check_order(p):
    if not 1.0 <= p <= 2.0:
        raise InvalidParameter('p', p, "must be in [1, 2]")


@dataclass(frozen=True)
class CircleGrid:
    """N equispaced nodes θ_j = 2πj/N of the circle."""
    size: int

    def __post_init__(self):
        if self.size < 4:
            raise InvalidParameter('grid_n', self.size, "must be >= 4")

    @property
    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.size

    @property
    def points(self) -> np.ndarray:
        return circle_nodes(self.size)

    def kernel(self, p: float) -> np.ndarray:
        """f_p sampled at the nodes, h_j = |sin(πj/N)|^p."""
        return np.abs(np.sin(np.pi * np.arange(self.size) / self.size)) ** p

    def indices_of(self, sites: np.ndarray) -> np.ndarray:
        """Node index of every site; every node must be hit exactly once."""
        sites = np.asarray(sites, dtype=float)
        if sites.ndim != 2 or sites.shape != (self.size, 2):
            raise InvalidParameter('sites', sites.shape, f"expected the {self.size} nodes of the circle grid")
        position = np.arctan2(sites[:, 1], sites[:, 0]) * self.size / (2 * np.pi)
        indices = np.rint(position)
        if np.any(np.abs(position - indices) > GRID_SITE_TOL * self.size):
            raise InvalidParameter('sites', 'off-grid', f"sites are not nodes of the {self.size}-grid")
        indices = np.mod(indices.astype(int), self.size)
        if np.unique(indices).size != self.size:
            raise InvalidParameter('sites', 'incomplete', f"sites do not cover the {self.size}-grid")
        return indices

    def weights_of(self, mu: DiscreteMeasure) -> np.ndarray:
        """Weight vector of a measure supported on the nodes."""
        weights = np.zeros(self.size)
        for point, weight in mu.atoms():
            distances = np.linalg.norm(self.points - point, axis=1)
            j = int(np.argmin(distances))
            if distances[j] > GRID_SITE_TOL:
                raise InvalidMeasure(f"Atom {point.tolist()} is not a node of the {self.size}-grid")
            weights[j] += weight
        return weights

    def measure(self, weights) -> DiscreteMeasure:
        return DiscreteMeasure.normalized(self.points, weights)


def kernel_coefficient_exact(p: float, n: int) -> float:
    """(−1)^n Γ(p+1) / (2^p Γ(1+p/2+n) Γ(1+p/2−n)); reciprocal Gamma vanishes at the poles (p = 2, |n| ≥ 2)."""
    _check_order(p)
    n = abs(int(n))
    q = p / 2
    return float((-1) ** n * gamma(p + 1) / 2 ** p * rgamma(1 + q + n) * rgamma(1 + q - n))


def _series_terms(q: float, n: int, last: int) -> np.ndarray:
    """Terms (−1)^k binom(q, k) 4^{−k} C(2k, k+n) for k = n … last."""
    head = np.prod((np.arange(n) - q) / np.arange(1, n + 1)) * 0.25 ** n
    k = np.arange(n, last, dtype=float)
    ratios = (k - q) / (k + 1) * (2 * k + 1) * (2 * k + 2) / (4 * (k + n + 1) * (k - n + 1))
    return head * np.concatenate(([1.0], np.cumprod(ratios)))


def _richardson(sums: np.ndarray, exponent: float):
    """Eliminates tail terms K^{−e}, K^{−e−1}, … from partial sums at K·2^i; returns (value, error)."""
    table = [np.asarray(sums, dtype=float)]
    for level in range(len(sums) - 1):
        factor = 2.0 ** (exponent + level)
        previous = table[-1]
        table.append((factor * previous[1:] - previous[:-1]) / (factor - 1))
    value = table[-1][0]
    return float(value), float(abs(value - table[-2][-1]))


def kernel_coefficient_series(p: float, n: int, truncation: Optional[int] = None, *,
                              tol: float = SERIES_TOL, adaptive: bool = True) -> float:
    """ĥf_p(n) = Σ_{k≥|n|} binom(p/2, k)(−1)^k 4^{−k} C(2k, k+n).

    The coefficient of z^n in (2 + z + z⁻¹)^k = z^{−k}(1 + z)^{2k} is C(2k, k+n). Terms decay like
    k^{−3/2−p/2}, so the tail beyond K is ~ K^{−1/2−p/2}(a₀ + a₁/K + …) and is removed by extrapolation.

    :param truncation: starting K, defaults to max(400, 64n²)
    :param adaptive: double K until the error estimate is within `tol`; otherwise fail at once
    """
    _check_order(p)
    n = abs(int(n))
    q = p / 2
    truncation = truncation if truncation is not None else max(SERIES_START, 64 * n * n)
    if truncation < n + 10:
        raise InvalidParameter('truncation', truncation, f"must be >= |n| + 10 = {n + 10}")

    while True:
        terms = _series_terms(q, n, truncation << EXTRAPOLATION_LEVELS)
        checkpoints = [(truncation << level) - n for level in range(EXTRAPOLATION_LEVELS + 1)]
        value, error = _richardson(np.cumsum(terms)[checkpoints], q + 0.5)
        if error <= tol:
            log.debug(f"[kernel_series] p=[{p}] n=[{n}] truncation=[{truncation}] error=[{error:.3e}]")
            return value
        if not adaptive or 2 * truncation > MAX_TRUNCATION:
            raise TruncationTooSmall(truncation, error, tol)
        truncation *= 2


def kernel_coefficient_quadrature(p: float, n: int, nodes: int = QUADRATURE_NODES) -> float:
    """Trapezoidal rule for (1/2π)∫ |sin(θ/2)|^p e^{−inθ} dθ."""
    _check_order(p)
    if nodes < 2 * abs(n) + 16:
        raise InvalidParameter('nodes', nodes, f"must be >= 2|n| + 16 = {2 * abs(n) + 16}")
    theta = 2 * np.pi * np.arange(nodes) / nodes
    coefficient = np.mean(np.abs(np.sin(theta / 2)) ** p * np.exp(-1j * n * theta))
    if abs(coefficient.imag) > 1e-10:
        log.warning(f"[kernel_quadrature] p=[{p}] n=[{n}] imaginary_residual=[{coefficient.imag:.3e}]")
    return float(coefficient.real)


_METHODS = {
    SERIES: kernel_coefficient_series,
    QUADRATURE: kernel_coefficient_quadrature,
    EXACT: kernel_coefficient_exact,
}


@dataclass(frozen=True)
class FourierKernel:
    """Coefficient table of f_p for |n| ≤ truncation."""
    p: float
    coefficients: Dict[int, float] = field(repr=False)
    truncation: int
    method: str

    @classmethod
    def build(cls, p: float, truncation: int, method: str = SERIES) -> 'FourierKernel':
        if method not in _METHODS:
            raise InvalidParameter('method', method, f"expected one of {sorted(_METHODS)}")
        if truncation < 0:
            raise InvalidParameter('truncation', truncation, "must be >= 0")
        compute = _METHODS[method]
        coefficients = {}
        for n in range(truncation + 1):
            coefficients[n] = coefficients[-n] = compute(p, n)
        return cls(p, coefficients, truncation, method)

    def __getitem__(self, n: int) -> float:
        return self.coefficients[n]

    def __rich__(self):
        table = Table(title=f"f_{self.p} coefficients ({self.method})")
        table.add_column("n", justify="right")
        table.add_column("coefficient", justify="right")
        for n in range(self.truncation + 1):
            table.add_row(str(n), f"{self.coefficients[n]:.12g}")
        return table


def convolution_matrix(grid: CircleGrid, p: float) -> np.ndarray:
    """Circulant C[j, k] = f_p(θ_j − θ_k)."""
    _check_order(p)
    return circulant(grid.kernel(p))


def grid_kernel_spectrum(grid: CircleGrid, p: float) -> np.ndarray:
    """Eigenvalues of the convolution matrix, i.e. the DFT of the sampled kernel (real, the kernel is even)."""
    _check_order(p)
    return np.fft.fft(grid.kernel(p)).real


def potential_by_convolution(weights, p: float, grid: Optional[CircleGrid] = None) -> PotentialSamples:
    """Half-chord potential Σ_k w_k f_p(θ_j − θ_k) of a grid measure at every node."""
    weights = np.asarray(weights, dtype=float).ravel()
    grid = grid or CircleGrid(weights.size)
    if weights.size != grid.size:
        raise InvalidParameter('weights', weights.size, f"expected {grid.size} grid weights")
    if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights < 0):
        raise InvalidMeasure(f"Grid weights must be a probability vector (sum {weights.sum()!r})")
    spectrum = grid_kernel_spectrum(grid, p)
    values = np.fft.ifft(np.fft.fft(weights) * spectrum).real
    return PotentialSamples(grid.points, np.clip(values, 0.0, None), p, HALF_CHORD)


def deconvolve_potential(samples: PotentialSamples, p: Optional[float] = None, *,
                         singular_tol: float = SINGULAR_TOL,
                         negative_tol: float = NEGATIVE_WEIGHT_TOL) -> np.ndarray:
    """Grid weights whose potential is `samples`, indexed by node.

    :raises SingularKernel: some grid divisor is below `singular_tol` in magnitude (p = 2)
    :raises ReconstructionFailure: recovered weights below −`negative_tol`
    """
    p = samples.p if p is None else p
    if p != samples.p:
        raise InvalidParameter('p', p, f"samples were taken with p={samples.p}")
    _check_order(p)
    grid = CircleGrid(samples.values.size)
    order = grid.indices_of(samples.sites)
    values = np.empty(grid.size)
    values[order] = samples.to_half_chord().values

    spectrum = grid_kernel_spectrum(grid, p)
    singular = np.flatnonzero(np.abs(spectrum) < singular_tol)
    if singular.size:
        log.warning(f"[kernel_singular] p=[{p}] grid_n=[{grid.size}] kernel_rank=[{singular.size}]")
        raise SingularKernel(singular.tolist(), singular.size, grid.size)

    weights = np.fft.ifft(np.fft.fft(values) / spectrum).real
    lowest = float(weights.min())
    if lowest < -negative_tol:
        raise ReconstructionFailure(lowest)
    weights = np.clip(weights, 0.0, None)
    log.debug(f"[potential_deconvolved] p=[{p}] grid_n=[{grid.size}] min_weight=[{lowest!r}]")
    return weights / weights.sum()


def recover_measure(samples: PotentialSamples, p: Optional[float] = None, **tolerances) -> DiscreteMeasure:
    weights = deconvolve_potential(samples, p, **tolerances)
    return CircleGrid(weights.size).measure(weights)


def potential_identifies_measure(p: float, grid_n: int) -> bool:
    """True when no grid divisor vanishes, so grid measures are determined by their potential."""
    spectrum = grid_kernel_spectrum(CircleGrid(grid_n), p)
    return bool(np.all(np.abs(spectrum) >= SINGULAR_TOL))
