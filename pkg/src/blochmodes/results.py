"""Writing results: CSV tables, JSON summaries, and the TOML configuration echo.

CSV files are comma-separated with a header row and ``\\n`` line endings. Floats are
written with ``repr`` (shortest round-trip form), so the JSON summary holds exactly
the same values as the CSV. Complex values are split into ``<name>_re`` and
``<name>_im`` columns. :class:`CsvTable` flushes after every row, so an interrupted
sweep keeps the rows it completed.
"""

from __future__ import annotations

import csv
import importlib.metadata
import json
import logging
import re
from datetime import UTC, datetime
from pathlib import Path
from typing import TYPE_CHECKING, Any, Self

import numpy as np

if TYPE_CHECKING:
    from collections.abc import Iterable, Mapping, Sequence
    from types import TracebackType

    from blochmodes.bloch_cell import CellSpectrum
    from blochmodes.fem1d import FEFunction
    from blochmodes.pipelines import ConvergenceReport, MatchReport, ModelingResult, RefinementRatio

logger = logging.getLogger(__name__)

_BARE_KEY = re.compile(r"^[A-Za-z0-9_-]+$")
_PROVENANCE_PACKAGES = ("blochmodes", "numpy", "scipy")

BAND_COLUMNS = ("k", "n", "lambda")
MATCH_COLUMNS = ("p", "k", "n", "ell", "lambda_nk", "lambda1", "er_value", "er_vector", "excluded")
PER_K_COLUMNS = ("k", "n", "ell", "er_value", "er_vector")
CONVERGE_COLUMNS = ("h", "epsilon", "er_value", "er_vector", "p", "q_value", "q_vector")
MODEL_COLUMNS = ("k", "n", "ell", "lambda_nk", "lambda1", "gamma", "residual", "p", "er_value", "er_vector")
REFINE_COLUMNS = ("p", "e_value", "e_vector")
PHYSICAL_COLUMNS = ("p", "lambda", "eps2_lambda", "gradient_bound")
PROFILE_COLUMNS = ("x", "psi_re", "psi_im", "w_re", "w_im", "gap")
PHYSICAL_PROFILE_COLUMNS = ("x", "w_re", "w_im")


def dump_toml(document: Mapping[str, Any]) -> str:
    """Render a nested mapping as TOML.

    Handles scalars, lists and tuples of scalars, sub-tables and arrays of tables;
    ``None`` values are left out. ``tomllib`` reads the result back unchanged.
    """
    lines: list[str] = []
    _write_table(document, (), lines)
    return "\n".join(lines).lstrip("\n") + "\n"


def _write_table(table: Mapping[str, Any], path: tuple[str, ...], lines: list[str]) -> None:
    nested = []
    for key, value in table.items():
        if value is None:
            continue
        if isinstance(value, dict) or (
            isinstance(value, list | tuple) and value and all(isinstance(item, dict) for item in value)
        ):
            nested.append((key, value))
        else:
            lines.append(f"{_toml_key(key)} = {_toml_value(value)}")
    for key, value in nested:
        header = ".".join(_toml_key(part) for part in (*path, key))
        if isinstance(value, dict):
            lines.extend(("", f"[{header}]"))
            _write_table(value, (*path, key), lines)
            continue
        for item in value:
            lines.extend(("", f"[[{header}]]"))
            _write_table(item, (*path, key), lines)


def _toml_key(key: str) -> str:
    return key if _BARE_KEY.match(key) else _toml_value(key)


def _toml_value(value: Any) -> str:  # noqa: ANN401
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list | tuple | np.ndarray):
        return "[" + ", ".join(_toml_value(item) for item in value) + "]"
    msg = f"cannot write a {type(value).__name__} to TOML"
    raise TypeError(msg)


def provenance() -> dict[str, str]:
    """Installed versions of the packages a result depends on."""
    versions: dict[str, str] = {}
    for package in _PROVENANCE_PACKAGES:
        try:
            versions[package] = importlib.metadata.version(package)
        except importlib.metadata.PackageNotFoundError:  # pragma: no cover - install-dependent
            versions[package] = "unknown"
    return versions


def _cell(value: Any) -> str:  # noqa: ANN401
    if isinstance(value, bool | np.bool_):
        return "true" if value else "false"
    if isinstance(value, int | np.integer):
        return str(int(value))
    if isinstance(value, float | np.floating):
        return repr(float(value))
    return str(value)


def _plain(value: Any) -> Any:  # noqa: ANN401
    """Convert numpy scalars to builtins for JSON."""
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def split_complex(row: Mapping[str, Any]) -> dict[str, Any]:
    """Replace each complex entry ``name`` by ``name_re`` and ``name_im``."""
    flat: dict[str, Any] = {}
    for key, value in row.items():
        if isinstance(value, complex | np.complexfloating):
            flat[f"{key}_re"] = float(value.real)
            flat[f"{key}_im"] = float(value.imag)
        else:
            flat[key] = _plain(value)
    return flat


class CsvTable:
    """A CSV file written one row at a time and flushed after each row.

    Parameters
    ----------
    path : str | Path
        Destination; parent directories are created.
    columns : Sequence[str]
        Header, also the order in which row mappings are written.
    """

    def __init__(self, path: str | Path, columns: Sequence[str]) -> None:
        self.path = Path(path)
        self.columns = tuple(columns)
        self.rows: list[dict[str, Any]] = []
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = self.path.open("w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._file, lineterminator="\n")
        self._writer.writerow(self.columns)
        self._file.flush()

    def write(self, row: Mapping[str, Any]) -> None:
        """Append one row (missing columns are left empty)."""
        self._writer.writerow(["" if row.get(name) is None else _cell(row[name]) for name in self.columns])
        self._file.flush()
        self.rows.append({name: _plain(row.get(name)) for name in self.columns})

    def write_all(self, rows: Iterable[Mapping[str, Any]]) -> None:
        """Append several rows."""
        for row in rows:
            self.write(row)

    def break_block(self) -> None:
        """Write a blank separator line."""
        self._writer.writerow([])
        self._file.flush()

    def close(self) -> None:
        """Close the file."""
        self._file.close()

    def __enter__(self) -> Self:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        traceback: TracebackType | None,
    ) -> None:
        self.close()


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[Mapping[str, Any]]) -> list[dict[str, Any]]:
    """Write a whole table and return the rows as written."""
    with CsvTable(path, columns) as table:
        table.write_all(rows)
    return table.rows


def read_csv(path: str | Path) -> list[dict[str, str]]:
    """Read a table written by :class:`CsvTable`, skipping blank separator lines."""
    with Path(path).open(newline="", encoding="utf-8") as f:
        return [row for row in csv.DictReader(f) if any(row.values())]


def write_json(path: str | Path, command: str, document: Mapping[str, Any]) -> dict[str, Any]:
    """Write a JSON summary with the command name, a timestamp and :func:`provenance`."""
    summary = {
        "command": command,
        "created_at": datetime.now(UTC).isoformat(),
        "provenance": provenance(),
        **document,
    }
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(summary, indent=2, allow_nan=True) + "\n", encoding="utf-8")
    logger.debug("wrote %s", target)
    return summary


def write_config_echo(directory: str | Path, resolved: Mapping[str, Any]) -> Path:
    """Write the resolved configuration as ``config.toml`` in ``directory``."""
    target = Path(directory) / "config.toml"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(dump_toml(resolved), encoding="utf-8")
    return target


def band_rows(bands: Sequence[CellSpectrum], num_bands: int | None = None) -> list[list[dict[str, Any]]]:
    """One block of ``(k, n, lambda)`` rows per band, each block in grid order."""
    count = min(s.num_modes for s in bands) if bands else 0
    if num_bands is not None:
        count = min(count, num_bands)
    return [[{"k": s.k, "n": n, "lambda": s.eigenvalue(n)} for s in bands] for n in range(1, count + 1)]


def write_bands(
    path: str | Path,
    bands: Sequence[CellSpectrum],
    *,
    num_bands: int | None = None,
    blocks: bool = False,
) -> list[dict[str, Any]]:
    """Write the band diagram; ``blocks`` separates the bands by blank lines."""
    with CsvTable(path, BAND_COLUMNS) as table:
        for i, block in enumerate(band_rows(bands, num_bands)):
            if blocks and i:
                table.break_block()
            table.write_all(block)
    return table.rows


def match_row(report: MatchReport) -> dict[str, Any]:
    """The ``match.csv`` row of a report."""
    return {
        "p": report.p,
        "k": report.best_k,
        "n": report.best_n,
        "ell": report.best_ell,
        "lambda_nk": report.lambda_nk,
        "lambda1": report.lambda1,
        "er_value": report.er_value,
        "er_vector": report.er_vector,
        "excluded": report.excluded,
    }


def match_summary(report: MatchReport) -> dict[str, Any]:
    """The JSON entry of a report: the CSV row plus the fields needed to recompute it."""
    return split_complex(
        {
            **match_row(report),
            "macro_ell": report.macro_ell,
            "epsilon": report.epsilon,
            "gamma": report.gamma,
            "eps2_lambda": report.eps2_lambda,
            "alignment_scalar": report.alignment_scalar,
            "reason": report.reason,
        }
    )


def per_k_rows(report: MatchReport) -> list[dict[str, Any]]:
    """Rows of ``match_<p>_per_k.csv``."""
    return [
        {"k": e.k, "n": e.n, "ell": e.ell, "er_value": e.er_value, "er_vector": e.er_vector} for e in report.per_k
    ]


def refine_rows(ratios: Sequence[RefinementRatio]) -> list[dict[str, Any]]:
    """Rows of ``refine.csv``."""
    return [{"p": r.p, "e_value": r.e_value, "e_vector": r.e_vector} for r in ratios]


def model_row(result: ModelingResult) -> dict[str, Any]:
    """The ``model.csv`` row of a modeling result."""
    return {
        "k": result.k,
        "n": result.n,
        "ell": result.best_ell,
        "lambda_nk": result.lambda_nk,
        "lambda1": result.lambda1,
        "gamma": result.gamma,
        "residual": result.residual,
        "p": result.identified.p,
        "er_value": result.identified.er_value,
        "er_vector": result.identified.er_vector,
    }


def convergence_rows(report: ConvergenceReport) -> list[dict[str, Any]]:
    """Rows of ``converge.csv``; rates are attached to the finer row of each pair."""
    rows = []
    for i, row in enumerate(report.rows):
        rows.append(
            {
                "h": row.h,
                "epsilon": row.epsilon,
                "er_value": row.er_value,
                "er_vector": row.er_vector,
                "p": row.p,
                "q_value": report.q_value[i - 1] if i else None,
                "q_vector": report.q_vector[i - 1] if i else None,
            }
        )
    return rows


def profile_rows(w: FEFunction, psi: FEFunction, scale: complex) -> list[dict[str, Any]]:
    """Nodal rows of ``mode_<p>.csv``: ``ψ`` scaled by ``s*``, ``w``, and ``|w - s* ψ|``."""
    x = w.mesh.nodes
    aligned = scale * psi.nodal_values
    wv = w.nodal_values
    gap = np.abs(wv - aligned)
    return [
        {
            "x": x[i],
            "psi_re": aligned[i].real,
            "psi_im": aligned[i].imag,
            "w_re": wv[i].real,
            "w_im": wv[i].imag,
            "gap": gap[i],
        }
        for i in range(len(x))
    ]


def physical_profile_rows(w: FEFunction) -> list[dict[str, Any]]:
    """Nodal rows ``(x, w_re, w_im)`` of a physical eigenvector."""
    values = w.nodal_values
    return [{"x": x, "w_re": v.real, "w_im": v.imag} for x, v in zip(w.mesh.nodes, values, strict=True)]
