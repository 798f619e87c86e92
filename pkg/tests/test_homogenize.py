"""Tests for the homogenization tool (tools/homogenize.py).

The runs use the homogeneous medium on ten cells, where every command finishes in
well under a second and the matched modes are known in closed form.
"""

from __future__ import annotations

import json
import subprocess
import sys
import tomllib
from pathlib import Path

import pytest

from blochmodes import SolverFailure
from blochmodes.results import read_csv
from tools import homogenize
from tools.homogenize import EXIT_NUMERICAL, EXIT_OK, build_parser, main

pytestmark = pytest.mark.integration

_TINY_TOML = """
[problem]
alpha = 1.0
num_cells = 10
n_phys_elements = 400

[coefficients.a]
kind = "constant"
value = 1.0

[bloch]
n_bloch_elements = 40
num_modes = 4
k_grid = { count = 20 }

[search]
r = 15
p_range = [1, 30]
exclude = []

[band]
num_bands = 3
blocks = true

[physical]
p_range = [1, 5]

[match]
indices = [7, 13]
per_k = true

[model]
k = 0.35
n = 1

[converge]
k = 0.3
l = 0.6
h_list = [3, 9]
elements_per_cell = 40

[output]
profiles = [7]
"""


def _config(tmp_path: Path, text: str = _TINY_TOML) -> Path:
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


def _run(tmp_path: Path, command: str, *extra: str) -> Path:
    out = tmp_path / command
    code = main([command, "--config", str(_config(tmp_path)), "--out", str(out), *extra])
    assert code == EXIT_OK
    return out


def test_parser_requires_a_command() -> None:
    """A subcommand is required."""
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_parser_reads_common_options() -> None:
    """Every subcommand shares --config, --out, --workers and -v."""
    args = build_parser().parse_args(["match", "-c", "run.toml", "-o", "out", "-j", "4", "-vv"])
    assert args.command == "match"
    assert args.config == Path("run.toml")
    assert args.out == Path("out")
    assert args.workers == 4
    assert args.verbose == 2


def test_band_writes_blocks(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Three bands over ten wavenumbers, separated by blank lines."""
    out = _run(tmp_path, "band")
    rows = read_csv(out / "bands.csv")
    assert len(rows) == 30
    assert "\n\n" in (out / "bands.csv").read_text(encoding="utf-8")
    assert json.loads((out / "bands.json").read_text(encoding="utf-8"))["num_bands"] == 3
    assert "30 band rows" in capsys.readouterr().out


def test_physical_writes_eigenvalues_and_profiles(tmp_path: Path) -> None:
    """The physical table has one row per rank; requested profiles are written."""
    out = _run(tmp_path, "physical")
    rows = read_csv(out / "physical.csv")
    assert [int(r["p"]) for r in rows] == [1, 2, 3, 4, 5]
    assert float(rows[0]["lambda"]) == pytest.approx(9.8696, rel=1e-4)
    assert not (out / "mode_7.csv").exists()


def test_match_writes_reports(tmp_path: Path) -> None:
    """Matching writes the summary table, per-k tables, a profile and the config echo."""
    out = _run(tmp_path, "match", "--workers", "2")
    rows = read_csv(out / "match.csv")
    assert [int(r["p"]) for r in rows] == [7, 13]
    assert float(rows[0]["k"]) == pytest.approx(0.35)
    assert rows[0]["ell"] == "5"
    assert float(rows[1]["er_vector"]) < 1e-6
    assert len(read_csv(out / "match_13_per_k.csv")) == 10
    assert len(read_csv(out / "mode_7.csv")) == 801
    summary = json.loads((out / "match.json").read_text(encoding="utf-8"))
    assert summary["command"] == "match"
    assert {"alignment_scalar_re", "alignment_scalar_im"} <= set(summary["reports"][0])
    echo = tomllib.loads((out / "config.toml").read_text(encoding="utf-8"))
    assert echo["match"]["indices"] == [7, 13]


def test_model_identifies_the_sine(tmp_path: Path) -> None:
    """(0.35, 1) models sin(7 pi x)."""
    out = _run(tmp_path, "model")
    row = read_csv(out / "model.csv")[0]
    assert row["p"] == "7"
    assert row["ell"] == "5"
    assert float(row["residual"]) < 1e-6


def test_converge_writes_rates(tmp_path: Path) -> None:
    """Two periods give one rate, on the finer row."""
    out = _run(tmp_path, "converge")
    rows = read_csv(out / "converge.csv")
    assert [r["p"] for r in rows] == ["17", "45"]
    assert rows[0]["q_value"] == ""
    assert float(rows[1]["q_value"]) == pytest.approx(2.0, abs=0.1)


def test_invalid_config_exits_with_usage_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """A configuration error exits with status 2 and names file, line and key."""
    path = _config(tmp_path, "[problem]\nnum_cells = 0\n")
    with pytest.raises(SystemExit) as info:
        main(["band", "--config", str(path), "--out", str(tmp_path / "out")])
    assert info.value.code == 2
    assert f"{path}:2: [problem].num_cells" in capsys.readouterr().err


def test_missing_config_and_bad_workers(tmp_path: Path) -> None:
    """A missing file or a worker count below one is a usage error."""
    with pytest.raises(SystemExit) as info:
        main(["band", "--config", str(tmp_path / "absent.toml")])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["band", "--workers", "0"])
    assert info.value.code == 2


def test_numerical_failure_exit_code(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch, capsys: pytest.CaptureFixture[str]
) -> None:
    """A solver failure is reported on stderr with status 3."""

    def failing_sweep(*args: object, **kwargs: object) -> list:  # noqa: ARG001
        raise SolverFailure("eigensolver did not converge", {"dofs": 80})

    monkeypatch.setattr(homogenize, "band_sweep", failing_sweep)
    code = main(["band", "--config", str(_config(tmp_path)), "--out", str(tmp_path / "out")])
    assert code == EXIT_NUMERICAL
    assert "numerical failure: eigensolver did not converge" in capsys.readouterr().err


def test_runs_as_a_standalone_script() -> None:
    """Running the file directly (script mode) must resolve all of its imports."""
    script = Path(__file__).resolve().parents[1] / "tools" / "homogenize.py"
    result = subprocess.run(  # noqa: S603  # trusted: our own interpreter and script path
        [sys.executable, str(script), "--help"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert result.returncode == 0, result.stderr
    assert "homogenization" in result.stdout.lower()
