"""
Subcommand execution independent of click: a :class:`CommandConfig` in, exit status and documents out.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from spherot.common import formats
from spherot.common.paths import ConfigFileNotFoundError
from spherot.common.report import PropertyReport
from spherot.core.cfg import DEFAULT_TOLERANCES, Tolerances
from spherot.core.err import DomainError, InvalidConfiguration, InvalidParameter, MissingConfigurationField, \
    SchemaViolation
from spherot.core.fourier import recover_measure
from spherot.core.interpolation import minimize_q
from spherot.core.potential import potential_samples
from spherot.core.rigidity import bisector_mass, verify_all
from spherot.core.sampling import circle_nodes, sphere_grid
from spherot.core.sphere import SpherePoint
from spherot.core.transport import chord_cost, geodesic_cost, is_translate, solve_transport

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_SCHEMA = 2
EXIT_DOMAIN = 3

SUBCOMMANDS = ('distance', 'potential', 'deconvolve', 'interpolate', 'bisector-mass', 'verify')


@dataclass(frozen=True)
class CommandConfig:
    subcommand: str
    p: float = 2.0
    alpha: float = 0.5
    grid_n: int = 64
    tol: float = 1e-8
    seed: int = 0
    inputs: Tuple[str, ...] = ()
    output: Optional[str] = None
    format: str = 'json'
    cost: str = 'chord'
    plan_output: Optional[str] = None
    x: Optional[Tuple[float, ...]] = None
    subdivisions: int = 2
    trials: int = 50
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES)

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise InvalidConfiguration(f"Unknown subcommand `{self.subcommand}`")
        if not self.p >= 1:
            raise InvalidConfiguration(f"p must be >= 1, got {self.p}")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidConfiguration(f"alpha must be in [0, 1], got {self.alpha}")
        if self.grid_n < 4:
            raise InvalidConfiguration(f"grid_n must be >= 4, got {self.grid_n}")
        if self.format not in ('json', 'csv'):
            raise InvalidConfiguration(f"format must be `json` or `csv`, got {self.format}")

    def input(self, index: int) -> str:
        if index >= len(self.inputs):
            raise InvalidConfiguration(f"`{self.subcommand}` needs {index + 1} input file(s)")
        return self.inputs[index]


@dataclass(frozen=True)
class CommandResult:
    exit_code: int
    document: str = ''
    diagnostics: Optional[Dict] = None
    plan: Optional[str] = None
    reports: Tuple[PropertyReport, ...] = ()


def _load(config: CommandConfig, index: int):
    return formats.load_measure(config.input(index), merge_tol=config.tolerances.atom)


def _solver_options(config: CommandConfig) -> Dict:
    return {"pivot_tol": config.tolerances.pivot, "uniqueness_tol": config.tolerances.uniqueness}


def _distance(config: CommandConfig) -> CommandResult:
    mu, nu = _load(config, 0), _load(config, 1)
    costs = geodesic_cost(mu, nu, config.p) if config.cost == 'geodesic' else chord_cost(mu, nu, config.p)
    plan = solve_transport(mu, nu, costs, **_solver_options(config))
    document = {
        "schema": formats.SCHEMA,
        "distance": max(plan.cost, 0.0) ** (1.0 / config.p),
        "p": config.p,
        "cost": config.cost,
        "unique_hint": plan.unique_hint,
    }
    if config.p == 2 and config.cost == 'chord':
        document["translate"] = is_translate(mu, nu, config.tol)
    return CommandResult(EXIT_OK, formats.encode(document) + '\n', plan=formats.plan_to_csv(plan))


def _potential(config: CommandConfig) -> CommandResult:
    mu = _load(config, 0)
    if mu.dim == 1:
        sites = circle_nodes(config.grid_n)
    elif mu.dim == 2:
        sites = sphere_grid(2, config.subdivisions)
    else:
        raise InvalidParameter('dim', mu.dim, "potential grids exist for S¹ and S² only")
    samples = potential_samples(mu, sites, config.p)
    if config.format == 'csv':
        return CommandResult(EXIT_OK, formats.potential_to_csv(samples))
    document = {"schema": formats.SCHEMA, "p": config.p, "metric": samples.metric,
                "sites": samples.sites, "values": samples.values}
    return CommandResult(EXIT_OK, formats.encode(document) + '\n')


def _deconvolve(config: CommandConfig) -> CommandResult:
    samples = formats.load_potential(config.input(0), config.p)
    measure = recover_measure(samples, singular_tol=config.tolerances.singular,
                              negative_tol=config.tolerances.negative_weight)
    return CommandResult(EXIT_OK, formats.encode(formats.measure_document(measure)) + '\n')


def _interpolate(config: CommandConfig) -> CommandResult:
    mu, nu = _load(config, 0), _load(config, 1)
    result = minimize_q(mu, nu, config.alpha, antipodal_tol=config.tolerances.antipodal, **_solver_options(config))
    document = {
        "schema": formats.SCHEMA,
        "alpha": config.alpha,
        "measure": formats.measure_document(result.measure) if result.measure is not None else None,
        "q_value": result.q_value,
        "degenerate": result.degenerate,
        "unique_hint": result.unique_hint,
    }
    return CommandResult(EXIT_OK, formats.encode(document) + '\n', plan=formats.plan_to_csv(result.plan))


def _bisector_mass(config: CommandConfig) -> CommandResult:
    mu = _load(config, 0)
    if config.x is None:
        raise InvalidConfiguration("`bisector-mass` needs the point x")
    x = np.array(config.x, dtype=float)
    if x.size != mu.ambient_dim:
        raise SchemaViolation(f"x has {x.size} coordinates, the measure lives in dimension {mu.ambient_dim}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) <= formats.SPHERE_SNAP_TOL:
        x = x / norm
    mass = bisector_mass(mu, SpherePoint(x), config.tolerances.equidistance)
    return CommandResult(EXIT_OK, formats.encode({"schema": formats.SCHEMA, "mass": mass}) + '\n')


def _verify(config: CommandConfig) -> CommandResult:
    reports = verify_all(config.seed, config.trials, config.tolerances)
    passed = all(report.passed for report in reports)
    return CommandResult(EXIT_OK if passed else EXIT_VERIFICATION_FAILED, formats.reports_to_jsonl(reports),
                         reports=tuple(reports))


_HANDLERS: Dict[str, Callable[[CommandConfig], CommandResult]] = {
    'distance': _distance,
    'potential': _potential,
    'deconvolve': _deconvolve,
    'interpolate': _interpolate,
    'bisector-mass': _bisector_mass,
    'verify': _verify,
}


def run(config: CommandConfig) -> CommandResult:
    """Runs one subcommand; errors become exit statuses with diagnostics, never exceptions."""
    log.debug(f"[command_started] subcommand=[{config.subcommand}] inputs=[{','.join(config.inputs)}]")
    try:
        return _HANDLERS[config.subcommand](config)
    except (SchemaViolation, InvalidConfiguration, MissingConfigurationField, ConfigFileNotFoundError) as e:
        log.debug(f"[command_rejected] subcommand=[{config.subcommand}] error=[{e}]")
        return CommandResult(EXIT_SCHEMA, diagnostics={"error": type(e).__name__, "message": str(e)})
    except DomainError as e:
        log.debug(f"[command_domain_error] subcommand=[{config.subcommand}] error=[{e}]")
        return CommandResult(EXIT_DOMAIN, diagnostics=e.diagnostics())
