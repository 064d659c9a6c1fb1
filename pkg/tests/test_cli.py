import json

import pytest
from click.testing import CliRunner

from spherot import __version__
from spherot.cli import cli
from spherot.cli import run as run_module
from spherot.cli.run import CommandConfig, run
from spherot.common.report import PropertyReport
from spherot.core.err import InvalidConfiguration


@pytest.fixture
def runner():
    try:
        return CliRunner(mix_stderr=False)
    except TypeError:
        return CliRunner()


@pytest.fixture
def measure(tmp_path):
    def write(name, points, weights, dim=None):
        file = tmp_path / f"{name}.json"
        document = {"schema": "wsl-1", "dim": dim or len(points[0]) - 1, "points": points, "weights": weights}
        file.write_text(json.dumps(document))
        return str(file)

    return write


def invoke(runner, *args):
    return runner.invoke(cli, ['--log-level', 'off', *args])


def test_version(runner):
    result = invoke(runner, '--version')
    assert __version__ in result.output


def test_distance_between_antipodes(runner, measure):
    north = measure('north', [[0, 1]], [1])
    south = measure('south', [[0, -1]], [1])
    result = invoke(runner, 'distance', north, south)

    assert result.exit_code == 0
    assert '"distance": 2.0' in result.stdout
    document = json.loads(result.stdout)
    assert document["schema"] == "wsl-1"
    assert document["unique_hint"] is True


def test_distance_writes_plan(runner, measure, tmp_path):
    mu = measure('mu', [[0, 1], [1, 0]], [0.5, 0.5])
    plan = tmp_path / 'plan.csv'
    result = invoke(runner, 'distance', mu, mu, '--p', '1', '--plan', str(plan))

    assert result.exit_code == 0
    assert json.loads(result.stdout)["distance"] == 0.0
    assert "translate" not in json.loads(result.stdout)
    assert plan.read_text().splitlines()[0] == 'row,col,mass'


def test_distance_is_byte_identical_across_runs(runner, measure):
    mu = measure('mu', [[0.6, 0.8], [1, 0]], [0.3, 0.7])
    nu = measure('nu', [[0, -1], [-0.8, 0.6]], [0.5, 0.5])
    first = invoke(runner, 'distance', mu, nu, '--cost', 'geodesic', '--p', '1.5')
    second = invoke(runner, 'distance', mu, nu, '--cost', 'geodesic', '--p', '1.5')

    assert first.exit_code == 0
    assert first.stdout == second.stdout


def test_bad_schema_exits_with_2(runner, tmp_path, measure):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"schema": "wsl-0", "dim": 1, "points": [[0, 1]], "weights": [1]}')
    result = invoke(runner, 'distance', str(broken), measure('mu', [[0, 1]], [1]))

    assert result.exit_code == 2
    assert json.loads(result.stderr)["error"] == "SchemaViolation"


def test_dimension_mismatch_exits_with_3(runner, measure):
    circle = measure('circle', [[0, 1]], [1])
    sphere = measure('sphere', [[0, 0, 1]], [1])
    result = invoke(runner, 'distance', circle, sphere)

    assert result.exit_code == 3
    assert json.loads(result.stderr)["error"] == "DimensionMismatch"


def test_interpolate(runner, measure):
    north = measure('north', [[0, 1]], [1])
    east = measure('east', [[1, 0]], [1])
    document = json.loads(invoke(runner, 'interpolate', north, east, '--alpha', '0.5').stdout)

    assert document["degenerate"] is False
    assert document["q_value"] == pytest.approx(2 - 2 ** 0.5)
    assert document["measure"]["points"][0] == pytest.approx([2 ** -0.5, 2 ** -0.5])


def test_interpolate_degenerate(runner, measure):
    north = measure('north', [[0, 1]], [1])
    south = measure('south', [[0, -1]], [1])
    result = invoke(runner, 'interpolate', north, south)

    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document["degenerate"] is True
    assert document["measure"] is None


def test_potential_then_deconvolve(runner, measure, tmp_path):
    mu = measure('mu', [[1, 0], [0, 1]], [0.25, 0.75])
    samples = tmp_path / 'potential.csv'
    result = invoke(runner, 'potential', mu, '--p', '1', '--grid', '16', '--output', str(samples))
    assert result.exit_code == 0
    assert samples.read_text().startswith('theta,value\n')

    result = invoke(runner, 'deconvolve', str(samples), '--p', '1')
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    recovered = {tuple(round(c, 9) + 0.0 for c in point): w
                 for point, w in zip(document["points"], document["weights"])}
    assert recovered[(1.0, 0.0)] == pytest.approx(0.25, abs=1e-8)
    assert recovered[(0.0, 1.0)] == pytest.approx(0.75, abs=1e-8)


def test_quadratic_deconvolution_is_singular(runner, measure, tmp_path):
    mu = measure('mu', [[1, 0]], [1])
    samples = tmp_path / 'potential.csv'
    invoke(runner, 'potential', mu, '--grid', '16', '--output', str(samples))
    result = invoke(runner, 'deconvolve', str(samples))

    assert result.exit_code == 3
    diagnostics = json.loads(result.stderr)
    assert diagnostics["error"] == "SingularKernel"
    assert diagnostics["kernel_rank"] == 13


def test_sphere_potential_json(runner, measure):
    mu = measure('mu', [[0, 0, 1]], [1])
    result = invoke(runner, 'potential', mu, '--format', 'json', '--subdivisions', '0')

    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert len(document["values"]) == 12
    assert document["metric"] == "chord"


def test_bisector_mass(runner, measure):
    mu = measure('mu', [[0, 1], [0, -1], [1, 0]], [0.25, 0.25, 0.5])

    by_point = invoke(runner, 'bisector-mass', mu, '--x', '1,0')
    assert by_point.exit_code == 0
    assert json.loads(by_point.stdout)["mass"] == pytest.approx(0.5)

    by_angle = invoke(runner, 'bisector-mass', mu, '--theta', '0')
    assert json.loads(by_angle.stdout)["mass"] == pytest.approx(0.5)

    assert invoke(runner, 'bisector-mass', mu).exit_code == 2
    assert invoke(runner, 'bisector-mass', mu, '--x', '1,0,0').exit_code == 2


def test_profile_defaults(runner, measure, tmp_path):
    profile = tmp_path / 'profile.toml'
    profile.write_text('[defaults]\np = 1.0\n')
    north = measure('north', [[0, 1]], [1])
    east = measure('east', [[1, 0]], [1])
    result = invoke(runner, '--config', str(profile), 'distance', north, east)

    assert json.loads(result.stdout)["p"] == 1.0


def test_broken_profile_exits_with_2(runner, measure, tmp_path):
    profile = tmp_path / 'profile.toml'
    profile.write_text('[tolerance]\nunknown = 1.0\n')
    result = invoke(runner, '--config', str(profile), 'distance', measure('mu', [[0, 1]], [1]),
                    measure('nu', [[0, 1]], [1]))
    assert result.exit_code == 2


def test_verify_exit_codes(runner, monkeypatch):
    passing = [PropertyReport.evaluate('ok', [0], 0.0, 1e-9)]
    monkeypatch.setattr(run_module, 'verify_all', lambda seed, trials, tolerances: passing)
    result = invoke(runner, 'verify', '--no-summary')
    assert result.exit_code == 0
    assert json.loads(result.stdout.splitlines()[0])["name"] == 'ok'

    failing = passing + [PropertyReport.evaluate('broken', [0], 1.0, 1e-9)]
    monkeypatch.setattr(run_module, 'verify_all', lambda seed, trials, tolerances: failing)
    assert invoke(runner, 'verify').exit_code == 1


def test_command_config_validation():
    with pytest.raises(InvalidConfiguration):
        CommandConfig('transport')
    with pytest.raises(InvalidConfiguration):
        CommandConfig('distance', p=0.5)
    with pytest.raises(InvalidConfiguration):
        CommandConfig('potential', grid_n=3)

    result = run(CommandConfig('distance'))
    assert result.exit_code == 2
    assert result.diagnostics["error"] == "InvalidConfiguration"


def test_verify_uses_profile_tolerances(runner, monkeypatch, tmp_path):
    profile = tmp_path / 'profile.toml'
    profile.write_text('[tolerance]\northogonality = 1e-5\n')
    seen = []

    def record(seed, trials, tolerances):
        seen.append(tolerances)
        return [PropertyReport.evaluate('ok', [0], 0.0, 1e-9)]

    monkeypatch.setattr(run_module, 'verify_all', record)
    assert invoke(runner, '--config', str(profile), 'verify', '--no-summary').exit_code == 0
    assert seen[0].orthogonality == 1e-5
