"""Tests for the results module."""

from __future__ import annotations

import json
import tomllib
from typing import TYPE_CHECKING

import numpy as np
import pytest

from blochmodes import CoefficientProfile, Mesh1D, interpolate, solve_cell
from blochmodes.pipelines import ConvergenceReport, ConvergenceRow
from blochmodes.results import (
    BAND_COLUMNS,
    CONVERGE_COLUMNS,
    CsvTable,
    band_rows,
    convergence_rows,
    dump_toml,
    profile_rows,
    read_csv,
    split_complex,
    write_bands,
    write_config_echo,
    write_csv,
    write_json,
)

if TYPE_CHECKING:
    from pathlib import Path


def test_dump_toml_reads_back() -> None:
    """Nested tables, arrays of tables and quoted keys survive tomllib."""
    document = {
        "run": {"name": "demo", "workers": 4, "log_every": None},
        "problem": {"alpha": 1.0, "epsilon": 0.02, "bc": "dirichlet"},
        "search": {"k_grid": [0.0, 0.008], "indices": (40, 41), "flag": True},
        "a": {"kind": "piecewise", "pieces": [{"start": 0.0, "value": 1.5}, {"start": 0.5, "value": 3.0}]},
        "odd key": {"x": 1e-300},
    }
    loaded = tomllib.loads(dump_toml(document))
    assert loaded["run"] == {"name": "demo", "workers": 4}
    assert loaded["search"]["indices"] == [40, 41]
    assert loaded["a"]["pieces"][1] == {"start": 0.5, "value": 3.0}
    assert loaded["odd key"]["x"] == 1e-300
    assert loaded["problem"]["epsilon"] == 0.02


def test_dump_toml_rejects_unknown_values() -> None:
    """Values TOML cannot hold raise TypeError."""
    with pytest.raises(TypeError, match="complex"):
        dump_toml({"z": 1j})


def test_split_complex() -> None:
    """Complex entries become _re and _im columns; numpy scalars become builtins."""
    row = split_complex({"s": 1.0 - 2.0j, "p": np.int64(3), "ok": np.bool_(True)})
    assert row == {"s_re": 1.0, "s_im": -2.0, "p": 3, "ok": True}
    assert type(row["p"]) is int


def test_csv_table_flushes_each_row(tmp_path: Path) -> None:
    """Rows are on disk before the table is closed, with floats written in shortest form."""
    path = tmp_path / "out" / "table.csv"
    table = CsvTable(path, ("p", "er_value", "excluded"))
    table.write({"p": 7, "er_value": 0.1, "excluded": False})
    assert path.read_text(encoding="utf-8") == "p,er_value,excluded\n7,0.1,false\n"
    table.write({"p": 8})
    table.close()
    assert read_csv(path)[1] == {"p": "8", "er_value": "", "excluded": ""}
    assert table.rows[1] == {"p": 8, "er_value": None, "excluded": None}


def test_blocks_are_skipped_on_read(tmp_path: Path) -> None:
    """Blank separator lines do not produce rows."""
    unit = CoefficientProfile.constant(1.0)
    bands = [solve_cell(unit, unit, k, 10, 3) for k in (0.1, 0.2)]
    path = tmp_path / "bands.csv"
    rows = write_bands(path, bands, num_bands=2, blocks=True)
    text = path.read_text(encoding="utf-8")
    assert "\n\n" in text
    assert len(rows) == 4
    read = read_csv(path)
    assert [r["n"] for r in read] == ["1", "1", "2", "2"]
    assert tuple(read[0]) == BAND_COLUMNS


def test_band_rows_limit() -> None:
    """The number of blocks is bounded by the shortest spectrum."""
    unit = CoefficientProfile.constant(1.0)
    bands = [solve_cell(unit, unit, 0.1, 10, 3), solve_cell(unit, unit, 0.2, 10, 2)]
    assert len(band_rows(bands)) == 2
    assert len(band_rows(bands, num_bands=1)) == 1
    assert band_rows([]) == []


def test_write_json_summary(tmp_path: Path) -> None:
    """The summary carries command, timestamp, package versions, and the document."""
    summary = write_json(tmp_path / "match.json", "match", {"reports": [{"p": 7, "er_value": float("nan")}]})
    loaded = json.loads((tmp_path / "match.json").read_text(encoding="utf-8"))
    assert loaded["command"] == "match"
    assert set(loaded["provenance"]) == {"blochmodes", "numpy", "scipy"}
    assert loaded["created_at"] == summary["created_at"]
    assert loaded["reports"][0]["p"] == 7


def test_config_echo(tmp_path: Path) -> None:
    """config.toml holds the resolved mapping."""
    path = write_config_echo(tmp_path, {"run": {"workers": 2}})
    assert path.name == "config.toml"
    assert tomllib.loads(path.read_text(encoding="utf-8")) == {"run": {"workers": 2}}


def test_convergence_rows_attach_rates_to_finer_row(tmp_path: Path) -> None:
    """The first row has no rate; later rows carry the rate against their predecessor."""
    report = ConvergenceReport(
        k=0.3,
        l=0.6,
        n=2,
        rows=(
            ConvergenceRow(h=3, epsilon=1 / 12, p=17, ell=5, lambda1=0.0, er_value=1e-3, er_vector=1e-2),
            ConvergenceRow(h=9, epsilon=1 / 32, p=45, ell=17, lambda1=0.0, er_value=4e-4, er_vector=4e-3),
        ),
        q_value=(0.93,),
        q_vector=(0.95,),
        c_value=(0.5,),
        c_vector=(0.07,),
    )
    rows = convergence_rows(report)
    assert rows[0]["q_value"] is None
    assert rows[1]["q_vector"] == 0.95
    written = write_csv(tmp_path / "converge.csv", CONVERGE_COLUMNS, rows)
    assert read_csv(tmp_path / "converge.csv")[0]["q_value"] == ""
    assert written[1]["p"] == 45


def test_profile_rows() -> None:
    """Profiles hold the scaled prediction, the mode, and their pointwise gap."""
    mesh = Mesh1D(0.0, 1.0, 4)
    psi = interpolate(lambda x: np.sin(np.pi * x), mesh)
    w = psi.scaled(2.0j)
    rows = profile_rows(w, psi, 2.0j)
    assert len(rows) == mesh.num_nodes
    assert max(row["gap"] for row in rows) == pytest.approx(0.0, abs=1e-15)
    assert rows[4]["w_im"] == pytest.approx(2.0 * np.sin(np.pi * mesh.nodes[4]))
