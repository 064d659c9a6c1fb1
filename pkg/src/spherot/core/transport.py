"""
Exact finite transportation problem.

The solver is the transportation simplex: a northwest-corner basic solution improved by MODI pivots
(dual potentials u_i + v_j = c_ij on the basis tree). Demands are perturbed lexicographically
(supply_i + ε, last demand + mε) so that every basic flow is lexicographically positive and no pivot is
degenerate; ε is carried symbolically as an integer coefficient next to each flow and dropped at extraction.
Entering cells are priced by Dantzig's rule (most negative reduced cost, smallest index on ties); the perturbation
alone rules out cycling.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from spherot.core.cfg import DEFAULT_TOLERANCES
from spherot.core.err import InvalidParameter, NotOnSphere, SolverStall, DimensionMismatch
from spherot.core.sphere import DiscreteMeasure, barycenter, check_same_dim, translate, coords_of

log = logging.getLogger(__name__)

PIVOT_TOL = DEFAULT_TOLERANCES.pivot
UNIQUENESS_TOL = DEFAULT_TOLERANCES.uniqueness


class CostKind(Enum):
    CHORD_POWER = 'chord-power'
    C_ALPHA = 'c-alpha'
    AMBIENT_SQUARED = 'ambient-euclidean-squared'
    GEODESIC_POWER = 'geodesic-power'
    CUSTOM = 'custom'


@dataclass(frozen=True, eq=False)
class CostMatrix:
    entries: np.ndarray
    kind: CostKind
    parameter: Optional[float] = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise InvalidParameter('entries', entries.shape, "cost matrix must be two-dimensional")
        if not np.all(np.isfinite(entries)) or np.any(entries < 0):
            raise InvalidParameter('entries', self.kind.value, "costs must be finite and nonnegative")
        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.entries.shape


@dataclass(frozen=True, eq=False)
class TransportPlan:
    source: DiscreteMeasure
    target: DiscreteMeasure
    matrix: np.ndarray
    cost_matrix: CostMatrix
    cost: float
    unique_hint: bool = True
    basis: Tuple[Tuple[int, int], ...] = field(default=())
    pivots: int = 0

    @property
    def row_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def col_marginal(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    def support(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(self.matrix > 0)
        return list(zip(rows.tolist(), cols.tolist()))

    def to_rows(self) -> List[Tuple[int, int, float]]:
        """(row, col, mass) for every cell carrying mass, in row-major order."""
        return [(i, j, float(self.matrix[i, j])) for i, j in self.support()]


def _check_exponent(p):
    if not p >= 1:
        raise InvalidParameter('p', p, "must be >= 1")


def _check_alpha(alpha):
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameter('alpha', alpha, "must be in [0, 1]")


def _require_on_sphere(*measures):
    for mu in measures:
        if not mu.on_sphere:
            raise NotOnSphere(f"Measure with {mu.size} atoms is not supported on the sphere")


def chord_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float) -> CostMatrix:
    """‖x − y‖^p; off-sphere (ambient) points are accepted."""
    _check_exponent(p)
    check_same_dim(mu, nu)
    if p == 2:
        entries = cdist(mu.points, nu.points, 'sqeuclidean')
    else:
        entries = cdist(mu.points, nu.points) ** p
    return CostMatrix(entries, CostKind.CHORD_POWER, float(p))


def ambient_squared_cost(mu: DiscreteMeasure, nu: DiscreteMeasure) -> CostMatrix:
    check_same_dim(mu, nu)
    return CostMatrix(cdist(mu.points, nu.points, 'sqeuclidean'), CostKind.AMBIENT_SQUARED)


def c_alpha_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, alpha: float) -> CostMatrix:
    """c_α(x, y) = 2(1 − ‖(1−α)x + αy‖), the least α-weighted squared detour through a point of the sphere."""
    _check_alpha(alpha)
    check_same_dim(mu, nu)
    _require_on_sphere(mu, nu)
    mix = (1 - alpha) * mu.points[:, None, :] + alpha * nu.points[None, :, :]
    entries = 2.0 * (1.0 - np.linalg.norm(mix, axis=2))
    return CostMatrix(np.clip(entries, 0.0, None), CostKind.C_ALPHA, float(alpha))


def geodesic_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float) -> CostMatrix:
    """Angular distance to the power p, computed from the chord as 2·arcsin(‖x − y‖/2)."""
    _check_exponent(p)
    check_same_dim(mu, nu)
    _require_on_sphere(mu, nu)
    angles = 2.0 * np.arcsin(np.clip(cdist(mu.points, nu.points) / 2.0, 0.0, 1.0))
    return CostMatrix(angles ** p, CostKind.GEODESIC_POWER, float(p))


def custom_cost(mu: DiscreteMeasure, nu: DiscreteMeasure, fn: Callable[[np.ndarray, np.ndarray], float]) -> CostMatrix:
    check_same_dim(mu, nu)
    entries = np.array([[fn(x, y) for y in nu.points] for x in mu.points], dtype=float)
    return CostMatrix(entries, CostKind.CUSTOM)


def _lex_less(a: Tuple[float, int], b: Tuple[float, int], tol: float) -> bool:
    if a[0] < b[0] - tol:
        return True
    if a[0] > b[0] + tol:
        return False
    return a[1] < b[1]


class _TransportationSimplex:
    """Per-call solver state. Flows are pairs (value, k) standing for value + k·ε.

    The basis tree is kept as an adjacency list over row nodes 0..m-1 and column nodes m..m+n-1, rooted at row 0.
    After a pivot only the potentials of the subtree cut off by the leaving cell change.
    """

    def __init__(self, supply: np.ndarray, demand: np.ndarray, costs: np.ndarray, pivot_tol: float):
        self.m, self.n = costs.shape
        self.costs = costs
        self.tol = pivot_tol
        self.reduced_tol = pivot_tol * max(1.0, float(np.abs(costs).max(initial=0.0)))
        self.flows: Dict[Tuple[int, int], List] = {}
        self.basic = np.zeros(costs.shape, dtype=bool)
        self.adjacency: List[set] = [set() for _ in range(self.m + self.n)]
        self.pivots = 0
        self._northwest_corner(supply, demand)
        self.u, self.v = self.potentials()

    def _link(self, cell: Tuple[int, int], flow: List):
        i, j = cell
        self.flows[cell] = flow
        self.basic[cell] = True
        self.adjacency[i].add(self.m + j)
        self.adjacency[self.m + j].add(i)

    def _unlink(self, cell: Tuple[int, int]):
        i, j = cell
        del self.flows[cell]
        self.basic[cell] = False
        self.adjacency[i].discard(self.m + j)
        self.adjacency[self.m + j].discard(i)

    def _northwest_corner(self, supply, demand):
        remaining_supply = [[float(s), 1] for s in supply]
        remaining_demand = [[float(d), 0] for d in demand]
        remaining_demand[-1][1] = self.m

        i = j = 0
        while True:
            s, d = remaining_supply[i], remaining_demand[j]
            row_first = _lex_less(tuple(s), tuple(d), self.tol)
            take = list(s) if row_first else list(d)
            self._link((i, j), take)
            s[0] -= take[0]
            s[1] -= take[1]
            d[0] -= take[0]
            d[1] -= take[1]
            if i == self.m - 1 and j == self.n - 1:
                break
            if (row_first and i < self.m - 1) or j == self.n - 1:
                i += 1
            else:
                j += 1

    def potentials(self) -> Tuple[np.ndarray, np.ndarray]:
        u = np.zeros(self.m)
        v = np.zeros(self.n)
        visited = [False] * (self.m + self.n)
        visited[0] = True
        queue = deque([0])
        while queue:
            node = queue.popleft()
            for other in self.adjacency[node]:
                if visited[other]:
                    continue
                visited[other] = True
                if node < self.m:
                    v[other - self.m] = self.costs[node, other - self.m] - u[node]
                else:
                    u[other] = self.costs[other, node - self.m] - v[node - self.m]
                queue.append(other)
        return u, v

    def reduced_costs(self) -> np.ndarray:
        reduced = self.costs - self.u[:, None] - self.v[None, :]
        reduced[self.basic] = 0.0
        return reduced

    def _component(self, start: int) -> List[int]:
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for other in self.adjacency[node]:
                if other not in seen:
                    seen.add(other)
                    queue.append(other)
        return list(seen)

    def _tree_path(self, start, goal) -> List[int]:
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            if node == goal:
                break
            for other in self.adjacency[node]:
                if other not in parent:
                    parent[other] = node
                    queue.append(other)
        path = [goal]
        while path[-1] != start:
            path.append(parent[path[-1]])
        return path[::-1]

    def _cell(self, a, b) -> Tuple[int, int]:
        return (a, b - self.m) if a < self.m else (b, a - self.m)

    def pivot(self, entering: Tuple[int, int], reduced_cost: float):
        i, j = entering
        path = self._tree_path(i, self.m + j)
        cells = [self._cell(a, b) for a, b in zip(path, path[1:])]
        minus = cells[0::2]
        plus = cells[1::2]

        leaving = None
        for cell in sorted(minus, key=lambda c: c[0] * self.n + c[1]):
            if leaving is None or _lex_less(tuple(self.flows[cell]), tuple(self.flows[leaving]), self.tol):
                leaving = cell
        theta = list(self.flows[leaving])

        for cell in plus:
            self.flows[cell][0] += theta[0]
            self.flows[cell][1] += theta[1]
        for cell in minus:
            self.flows[cell][0] -= theta[0]
            self.flows[cell][1] -= theta[1]
        self._unlink(leaving)

        # the side of the cut without the root takes the shift that zeroes the entering reduced cost
        detached = self._component(i)
        if 0 in detached:
            detached, sign = self._component(self.m + j), -1.0
        else:
            sign = 1.0
        nodes = np.array(detached)
        rows = nodes[nodes < self.m]
        cols = nodes[nodes >= self.m] - self.m
        self.u[rows] += sign * reduced_cost
        self.v[cols] -= sign * reduced_cost

        self._link(entering, theta)
        self.pivots += 1

    def solve(self, max_iterations: int) -> np.ndarray:
        """Dantzig pricing (most negative reduced cost, smallest index on ties) until no cell improves."""
        for _ in range(max_iterations):
            reduced = self.reduced_costs()
            flat = int(np.argmin(reduced))
            if reduced.flat[flat] >= -self.reduced_tol:
                # rounding accumulates in the incremental updates; confirm optimality on fresh potentials
                self.u, self.v = self.potentials()
                reduced = self.reduced_costs()
                flat = int(np.argmin(reduced))
                if reduced.flat[flat] >= -self.reduced_tol:
                    return reduced
            self.pivot(divmod(flat, self.n), float(reduced.flat[flat]))

        raise SolverStall(max_iterations)

    def plan_matrix(self) -> np.ndarray:
        # degenerate basic cells are zero up to rounding
        matrix = np.zeros((self.m, self.n))
        for (i, j), (value, _) in self.flows.items():
            if value > self.tol:
                matrix[i, j] = value
        return matrix


def solve_transport(mu: DiscreteMeasure, nu: DiscreteMeasure, costs: CostMatrix, *,
                    pivot_tol: float = PIVOT_TOL, uniqueness_tol: float = UNIQUENESS_TOL,
                    max_iterations: Optional[int] = None) -> TransportPlan:
    """Exact optimal basic solution of min <C, π> over couplings π of `mu` and `nu`."""
    if costs.shape != (mu.size, nu.size):
        raise DimensionMismatch((mu.size, nu.size), costs.shape)

    simplex = _TransportationSimplex(mu.weights, nu.weights, costs.entries, pivot_tol)
    reduced = simplex.solve(max_iterations or 1000 + 50 * mu.size * nu.size)
    matrix = simplex.plan_matrix()

    nonbasic = np.ones(costs.shape, dtype=bool)
    for cell in simplex.flows:
        nonbasic[cell] = False
    unique_hint = not bool(np.any(reduced[nonbasic] <= uniqueness_tol))

    cost = float(np.sum(matrix * costs.entries))
    log.debug(f"[transport_solved] rows=[{mu.size}] cols=[{nu.size}] pivots=[{simplex.pivots}] "
              f"cost=[{cost!r}] unique_hint=[{unique_hint}] cost_kind=[{costs.kind.value}]")
    return TransportPlan(mu, nu, matrix, costs, cost, unique_hint, tuple(sorted(simplex.flows)), simplex.pivots)


def wasserstein_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, p: float = 2, *,
                         metric: str = 'chord') -> float:
    """p-Wasserstein distance for the chord metric, or the angular one with `metric='geodesic'`."""
    if metric == 'chord':
        costs = chord_cost(mu, nu, p)
    elif metric == 'geodesic':
        costs = geodesic_cost(mu, nu, p)
    else:
        raise InvalidParameter('metric', metric, "expected `chord` or `geodesic`")
    plan = solve_transport(mu, nu, costs)
    return max(plan.cost, 0.0) ** (1.0 / p)


def squared_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """d²_{W2} in the ambient space (chord cost, p = 2)."""
    return solve_transport(mu, nu, chord_cost(mu, nu, 2)).cost


def translation_residual(mu: DiscreteMeasure, nu: DiscreteMeasure, v) -> float:
    """d²((t_v)_#μ, ν) − d²(μ, ν) − <v, v + 2m(μ) − 2m(ν)>, zero for every μ, ν, v."""
    v = coords_of(v)
    shift = v @ (v + 2 * barycenter(mu) - 2 * barycenter(nu))
    return squared_distance(translate(mu, v), nu) - squared_distance(mu, nu) - float(shift)


def is_translate(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = 1e-8) -> bool:
    """ν is a translate of μ iff d(μ, ν) = ‖m(ν) − m(μ)‖; compared on squares, d² − ‖Δm‖² being the
    squared distance of the centred measures."""
    gap = squared_distance(mu, nu) - float(np.sum((barycenter(nu) - barycenter(mu)) ** 2))
    return abs(gap) <= tol
