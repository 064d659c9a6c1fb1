import rich_click as click
from rich.console import Console

from spherot import __version__
from spherot.cli.commands import bisector_mass, deconvolve, distance, interpolate, potential
from spherot.cli.verify import verify
from spherot.common.paths import ConfigFileNotFoundError
from spherot.core import log
from spherot.core.cfg import load_profile
from spherot.core.err import InvalidConfiguration, MissingConfigurationField


@click.group()
@click.version_option(__version__)
@click.option('--log-level', type=click.Choice(log.LEVELS), default='warning', show_default=True,
              help='Console (stderr) log level.')
@click.option('--log-file-level', type=click.Choice(log.LEVELS), default='off', show_default=True,
              help='Log file level; the file lives in the user cache directory.')
@click.option('--config', 'config_file', type=str, default=None,
              help='TOML profile with [tolerance] and [defaults] tables. A bare name is searched in the config path.')
@click.pass_context
def cli(ctx, log_level, log_file_level, config_file):
    """
    Exact optimal transport on spheres: Wasserstein distances, potentials, circle deconvolution,
    projected interpolation and the rigidity verification batteries.
    """
    log.configure(log_level, log_file_level)
    try:
        ctx.obj = load_profile(config_file)
    except (InvalidConfiguration, MissingConfigurationField, ConfigFileNotFoundError) as e:
        Console(stderr=True).print(f"[bold red]Configuration Error: [/bold red]{e}")
        raise SystemExit(2)


cli.add_command(distance)
cli.add_command(potential)
cli.add_command(deconvolve)
cli.add_command(interpolate)
cli.add_command(bisector_mass)
cli.add_command(verify)

if __name__ == "__main__":
    cli()
