import math
from functools import wraps
from typing import Optional

import rich_click as click
from rich.console import Console

from spherot.cli.run import CommandConfig, CommandResult, EXIT_SCHEMA, run
from spherot.common import formats
from spherot.core.cfg import Profile
from spherot.core.err import InvalidConfiguration

HARD_DEFAULTS = {'p': 2.0, 'alpha': 0.5, 'grid_n': 64, 'tol': 1e-8, 'seed': 0}

measure_file = click.Path(exists=True, dir_okay=False)


def command_config(profile: Profile, subcommand: str, **options) -> CommandConfig:
    """Options left unset on the command line fall back to the profile [defaults] table, then to built-ins."""
    for key, fallback in HARD_DEFAULTS.items():
        if options.get(key) is None:
            value = profile.default(key, fallback)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise InvalidConfiguration(f"`profile.defaults.{key}` must be a number, got {value!r}")
            options[key] = type(fallback)(value)
    return CommandConfig(subcommand, tolerances=profile.tolerances, **options)


def emit(result: CommandResult, output: Optional[str] = None, plan_output: Optional[str] = None):
    if result.diagnostics is not None:
        click.echo(formats.encode(result.diagnostics), err=True)
        raise SystemExit(result.exit_code)

    if output:
        with open(output, 'w', encoding='utf-8') as f:
            f.write(result.document)
    else:
        click.echo(result.document, nl=False)

    if plan_output and result.plan is not None:
        with open(plan_output, 'w', encoding='utf-8') as f:
            f.write(result.plan)

    if result.exit_code:
        raise SystemExit(result.exit_code)


def subcommand(func):
    """Passes the loaded profile and turns invalid option combinations into exit status 2."""
    @wraps(func)
    @click.pass_obj
    def wrapper(profile, *args, **kwargs):
        try:
            return func(profile or Profile(), *args, **kwargs)
        except InvalidConfiguration as e:
            Console(stderr=True).print(f"[bold red]Invalid configuration: [/bold red]{e}")
            raise SystemExit(EXIT_SCHEMA)

    return wrapper


output_option = click.option('--output', '-o', type=click.Path(dir_okay=False), default=None,
                             help='Write the document to a file instead of stdout.')
plan_option = click.option('--plan', 'plan_output', type=click.Path(dir_okay=False), default=None,
                           help='Also write the optimal plan as row,col,mass CSV.')
p_option = click.option('--p', 'p', type=click.FloatRange(min=1.0), default=None, help='Order p >= 1 [default: 2].')


@click.command()
@click.argument('mu', type=measure_file)
@click.argument('nu', type=measure_file)
@p_option
@click.option('--cost', type=click.Choice(['chord', 'geodesic']), default='chord', show_default=True,
              help='Ground metric: chord (Euclidean) or geodesic (angle).')
@click.option('--tol', type=click.FloatRange(min=0.0), default=None, help='Translate detection tolerance.')
@output_option
@plan_option
@subcommand
def distance(profile, mu, nu, p, cost, tol, output, plan_output):
    """Exact p-Wasserstein distance between two measures"""
    config = command_config(profile, 'distance', p=p, tol=tol, inputs=(mu, nu), cost=cost, output=output,
                            plan_output=plan_output)
    emit(run(config), output, plan_output)


@click.command()
@click.argument('mu', type=measure_file)
@p_option
@click.option('--grid', 'grid_n', type=click.IntRange(min=4), default=None,
              help='Number of equispaced sites on S¹ [default: 64].')
@click.option('--subdivisions', type=click.IntRange(0, 6), default=2, show_default=True,
              help='Icosphere subdivision level of the S² sites.')
@click.option('--format', 'fmt', type=click.Choice(['csv', 'json']), default='csv', show_default=True)
@output_option
@subcommand
def potential(profile, mu, p, grid_n, subdivisions, fmt, output):
    """Wasserstein potential of a measure sampled on a grid"""
    config = command_config(profile, 'potential', p=p, grid_n=grid_n, inputs=(mu,), subdivisions=subdivisions,
                            format=fmt, output=output)
    emit(run(config), output)


@click.command()
@click.argument('samples', type=measure_file)
@p_option
@output_option
@subcommand
def deconvolve(profile, samples, p, output):
    """Recover a grid measure on S¹ from its potential CSV (theta,value)"""
    config = command_config(profile, 'deconvolve', p=p, inputs=(samples,), output=output)
    emit(run(config), output)


@click.command()
@click.argument('mu', type=measure_file)
@click.argument('nu', type=measure_file)
@click.option('--alpha', type=click.FloatRange(0.0, 1.0), default=None, help='Interpolation time [default: 0.5].')
@output_option
@plan_option
@subcommand
def interpolate(profile, mu, nu, alpha, output, plan_output):
    """Minimizer of the alpha-weighted mean squared error between two measures"""
    config = command_config(profile, 'interpolate', alpha=alpha, inputs=(mu, nu), output=output,
                            plan_output=plan_output)
    emit(run(config), output, plan_output)


def _parse_point(ctx, param, value):
    if value is None:
        return None
    try:
        return tuple(float(c) for c in value.split(','))
    except ValueError:
        raise click.BadParameter(f"expected comma separated coordinates, got `{value}`")


@click.command('bisector-mass')
@click.argument('mu', type=measure_file)
@click.option('--x', 'x', callback=_parse_point, default=None, help='Point of the sphere, e.g. "1,0".')
@click.option('--theta', type=float, default=None, help='Point of S¹ given by its angle in radians.')
@output_option
@subcommand
def bisector_mass(profile, mu, x, theta, output):
    """Mass of the bisector between x and -x"""
    if (x is None) == (theta is None):
        raise click.UsageError("Give exactly one of --x and --theta")
    if theta is not None:
        x = (math.cos(theta), math.sin(theta))
    config = command_config(profile, 'bisector-mass', inputs=(mu,), x=x, output=output)
    emit(run(config), output)
