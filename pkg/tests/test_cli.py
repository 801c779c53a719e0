import orjson
import pytest
from click.testing import CliRunner
from conftest import write_spec

from ncsi.__main__ import EXIT_OK, EXIT_SPEC, EXIT_USAGE, cli, main
from ncsi.channels.specfile import save_channel_spec
from ncsi.commands import options
from ncsi.commands.relay import SWEEP_HEADER
from ncsi.config import NCSI_CONFIG_FILE_NAME

XOR_SPEC = """
kind = "single"
state_pmf = [0.5, 0.5]
transition = [[[1, 0], [0, 1]], [[0, 1], [1, 0]]]

[alphabets]
X = 2
S = 2
Y = 2
"""

SMALL = ["--grid-k", "4", "--restarts", "0", "--refine-passes", "0"]


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


@pytest.fixture
def xor_spec(tmp_path) -> str:
    return write_spec(tmp_path / "xor.toml", XOR_SPEC)


def saved(ch, tmp_path, name: str) -> str:
    path = tmp_path / name
    save_channel_spec(ch, path)
    return str(path)


def values(line: str) -> dict[str, str]:
    return dict(part.split("=", 1) for part in line.split() if "=" in part and not part.startswith("["))


def test_info(runner, xor_spec, tmp_path):
    result = runner.invoke(cli, ["info", xor_spec, "--cwd", str(tmp_path)])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "kind=single"
    assert lines[1] == "|X|=2 |S|=2 |Y|=2"
    assert lines[2] == "deterministic=true"


def test_info_bc(runner, erasure_bc, tmp_path):
    spec = saved(erasure_bc, tmp_path, "bc.toml")
    result = runner.invoke(cli, ["info", spec, "--cwd", str(tmp_path), "--grid-k", "4"])
    assert result.exit_code == 0
    assert "degraded=true" in result.output
    assert "deterministic_Y1=true" in result.output
    assert "more_capable=probably_true [grid_k=4" in result.output


def test_capacity_single(runner, xor_spec, tmp_path):
    result = runner.invoke(cli, ["capacity", "single", xor_spec, "--cwd", str(tmp_path)] + SMALL)
    assert result.exit_code == 0
    assert result.output.startswith(
        "gp=1.000000 csirt=1.000000 det=1.000000 [grid_k=4 restarts=0 refine_passes=0 seed=0] mode="
    )


def test_region_mac_csv_reproducible(runner, correlated_xor_mac, tmp_path):
    spec = saved(correlated_xor_mac, tmp_path, "mac.toml")
    outputs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        result = runner.invoke(
            cli,
            ["region", "mac", spec, "--bound", "det-orth", "--out", str(out), "--cwd", str(tmp_path)],
        )
        assert result.exit_code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    assert outputs[0].decode().splitlines()[0] == "R1,R2"
    assert "R1=1.000000 R2=1.000000" in result.output


def test_region_bc_support_samples(runner, erasure_bc, tmp_path):
    spec = saved(erasure_bc, tmp_path, "bc.toml")
    support = tmp_path / "support.csv"
    result = runner.invoke(
        cli,
        ["region", "bc", spec, "--bound", "degraded-det", "--support-out", str(support), "--cwd", str(tmp_path)]
        + ["--grid-k", "2", "--restarts", "2", "--refine-passes", "0"],
    )
    assert result.exit_code == 0
    assert result.output.startswith("bc degraded-det:")
    assert support.read_text().splitlines()[0].startswith("dx,dy,dz")


def test_relay_gaussian(runner, tmp_path):
    sweep = tmp_path / "sweep.csv"
    args = ["relay", "gaussian", "--P", "1", "--Pr", "1", "--Nr", "1", "--Nd", "1"]
    result = runner.invoke(cli, args + ["--alpha-sweep", str(sweep)])
    assert result.exit_code == 0
    first, second = result.output.splitlines()
    assert float(values(first)["capacity"]) == pytest.approx(0.5, abs=1e-6)
    assert first.endswith("[alpha_step=0.0001]")
    assert float(values(second)["dirty_paper_rate"]) == pytest.approx(0.5, abs=1e-6)

    lines = sweep.read_text().splitlines()
    assert lines[0] == ",".join(SWEEP_HEADER)
    assert len(lines) == 22


def test_relay_discrete(runner, clean_relay, tmp_path):
    spec = saved(clean_relay, tmp_path, "relay.toml")
    result = runner.invoke(
        cli,
        ["relay", "discrete", spec, "--mode", "df", "--cwd", str(tmp_path)]
        + ["--grid-k", "4", "--restarts", "2", "--refine-passes", "0"],
    )
    assert result.exit_code == 0
    assert result.output.startswith("df=1.000000 ")
    assert "feasible=true" in result.output


def test_simulate_binning(runner, xor_spec, tmp_path):
    result = runner.invoke(
        cli,
        ["simulate", "binning", "--channel", xor_spec, "--rate", "0.5", "--n", "2000", "--trials", "50"]
        + ["--cwd", str(tmp_path)]
        + SMALL,
    )
    assert result.exit_code == 0
    fields = values(result.output)
    assert float(fields["block_error_rate"]) <= 0.1
    assert fields["gp"] == "1.000000"
    assert fields["codebook"] == "typicality-count"
    assert fields["typicality"] == "tv"


def test_exit_codes(xor_spec, tmp_path, erasure_bc, capsys):
    assert main(["--version"]) == EXIT_OK

    broken = write_spec(tmp_path / "broken.toml", XOR_SPEC.replace("[[0, 1], [1, 0]]]", "[[0, 0.9], [1, 0]]]"))
    assert main(["info", broken, "--cwd", str(tmp_path)]) == EXIT_SPEC
    assert "row 2" in capsys.readouterr().err

    assert main(["info", str(tmp_path / "missing.toml"), "--cwd", str(tmp_path)]) == EXIT_SPEC

    bc_spec = saved(erasure_bc, tmp_path, "bc.toml")
    assert main(["capacity", "single", bc_spec, "--cwd", str(tmp_path)]) == EXIT_SPEC
    assert "expected single" in capsys.readouterr().err

    assert main(["region", "bc", bc_spec, "--bound", "det", "--cwd", str(tmp_path)]) == EXIT_USAGE
    assert "not deterministic" in capsys.readouterr().err

    assert main(["relay", "gaussian", "--P", "-1", "--Pr", "1", "--Nr", "1", "--Nd", "1"]) == EXIT_USAGE
    assert main(["capacity", "single", xor_spec, "--grid-k", "0", "--cwd", str(tmp_path)]) == EXIT_USAGE
    assert main(["capacity", "nope"]) == EXIT_USAGE


def test_config_file_reaches_commands(runner, xor_spec, tmp_path, mocker):
    (tmp_path / NCSI_CONFIG_FILE_NAME).write_bytes(orjson.dumps({"alphabet_cap": 3, "grid_k": 2}))
    spy = mocker.spy(options, "load_channel_spec")
    result = runner.invoke(
        cli, ["capacity", "single", xor_spec, "--cwd", str(tmp_path), "--restarts", "0", "--refine-passes", "0"]
    )
    assert result.exit_code == 0
    spy.assert_called_once_with(xor_spec, 3)
    assert "[grid_k=2 restarts=0 refine_passes=0 seed=0]" in result.output


def test_compare_bc(runner, erasure_bc, tmp_path):
    spec = saved(erasure_bc, tmp_path, "bc.toml")
    result = runner.invoke(
        cli,
        ["compare", "bc", spec, "--cwd", str(tmp_path), "--grid-k", "2", "--restarts", "2", "--refine-passes", "0"],
    )
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert len(lines) == 1
    fields = values(lines[0])
    assert float(fields["ss"]) <= float(fields["ours"]) + 1e-6


def test_region_mac_outer_reports_inclusion(runner, correlated_xor_mac, tmp_path):
    spec = saved(correlated_xor_mac, tmp_path, "mac.toml")
    result = runner.invoke(
        cli,
        ["region", "mac", spec, "--bound", "outer", "--card-v", "2", "--tol", "1e-6", "--cwd", str(tmp_path)]
        + ["--grid-k", "1", "--restarts", "2", "--refine-passes", "0", "--convexify", "on"],
    )
    assert result.exit_code == 0
    assert "includes_inner=true tol=1e-06" in result.output.splitlines()


def test_tol_only_where_used(runner, xor_spec, tmp_path):
    result = runner.invoke(cli, ["info", xor_spec, "--tol", "1e-6", "--cwd", str(tmp_path)])
    assert result.exit_code != 0
    assert "--tol" in result.output
    result = runner.invoke(cli, ["capacity", "single", xor_spec, "--tol", "1e-6", "--cwd", str(tmp_path)] + SMALL)
    assert result.exit_code == 0
