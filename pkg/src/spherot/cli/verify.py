import rich_click as click
from rich.console import Console

from spherot.cli.commands import command_config, emit, output_option, subcommand
from spherot.cli.run import run
from spherot.common.report import reports_table


@click.command()
@click.option('--seed', type=int, default=None, help='Seed of every battery [default: 0].')
@click.option('--trials', type=click.IntRange(min=1), default=50, show_default=True,
              help='Random cases of the translation identity.')
@click.option('--summary/--no-summary', default=True, show_default=True,
              help='Print a summary table on stderr.')
@output_option
@subcommand
def verify(profile, seed, trials, summary, output):
    """Run the rigidity batteries and print one JSON report per line"""
    config = command_config(profile, 'verify', seed=seed, trials=trials, output=output)
    result = run(config)
    if summary and result.reports:
        Console(stderr=True).print(reports_table(*result.reports))
    emit(result, output)
