"""Run configuration: a TOML file with one table per concern.

.. code-block:: toml

    [problem]
    alpha = 1.0
    num_cells = 50
    n_phys_elements = 2000
    bc = "dirichlet"

    [coefficients.a]
    kind = "sine"
    amplitude = 1.0
    offset = 2.0

    [coefficients.rho]
    kind = "constant"
    value = 1.0

    [bloch]
    n_bloch_elements = 50
    num_modes = 10
    k_grid = { count = 125 }

    [search]
    r = 15
    p_range = [40, 150]
    exclude = [50]

Every table and key is optional; missing ones take the defaults of the homogenized
``a(y) = sin(2 pi y) + 2`` problem above. :meth:`RunConfig.to_dict` gives back the
resolved configuration, which the command-line tool echoes next to its results.
"""

from __future__ import annotations

import logging
import re
import tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Any

from blochmodes.bloch_cell import uniform_k_grid
from blochmodes.coefficients import CoefficientProfile
from blochmodes.errors import ConfigError, InvalidCoefficient
from blochmodes.physical_spectrum import PHYSICAL_BCS, PhysicalProblem
from blochmodes.pipelines import SearchSpace

if TYPE_CHECKING:
    from collections.abc import Mapping

logger = logging.getLogger(__name__)

_KEY_IN_MESSAGE = re.compile(r"\[([A-Za-z_.]+)\]\.([A-Za-z_]+)")
_LINE_IN_MESSAGE = re.compile(r"line (\d+)")


class _Table:
    """Typed access to one config table; every error names ``[table].key``."""

    def __init__(self, data: Mapping[str, Any], name: str, allowed: tuple[str, ...]) -> None:
        raw = data
        for part in name.split("."):
            raw = raw.get(part, {}) if isinstance(raw, dict) else raw
        if not isinstance(raw, dict):
            msg = f"[{name}] must be a table"
            raise ConfigError(msg)
        unknown = sorted(set(raw) - set(allowed))
        if unknown:
            msg = f"[{name}].{unknown[0]} is not a recognized key; expected one of {list(allowed)}"
            raise ConfigError(msg)
        self.raw: dict[str, Any] = raw
        self.name = name

    def fail(self, key: str, expected: str) -> ConfigError:
        return ConfigError(f"[{self.name}].{key} must be {expected}, got {self.raw.get(key)!r}")

    def integer(self, key: str, default: int, *, minimum: int | None = 1) -> int:
        value = self.raw.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int) or (minimum is not None and value < minimum):
            raise self.fail(key, "an integer" + (f" >= {minimum}" if minimum is not None else ""))
        return value

    def number(self, key: str, default: float, *, positive: bool = False) -> float:
        value = self.raw.get(key, default)
        if isinstance(value, bool) or not isinstance(value, int | float) or (positive and not value > 0.0):
            raise self.fail(key, "a positive number" if positive else "a number")
        return float(value)

    def optional_number(self, key: str) -> float | None:
        return self.number(key, 0.0, positive=True) if key in self.raw else None

    def flag(self, key: str, default: bool) -> bool:  # noqa: FBT001
        value = self.raw.get(key, default)
        if not isinstance(value, bool):
            raise self.fail(key, "true or false")
        return value

    def choice(self, key: str, default: str, choices: tuple[str, ...]) -> str:
        value = self.raw.get(key, default)
        if value not in choices:
            raise self.fail(key, f"one of {list(choices)}")
        return str(value)

    def text(self, key: str, default: str) -> str:
        value = self.raw.get(key, default)
        if not isinstance(value, str) or not value:
            raise self.fail(key, "a non-empty string")
        return value

    def integers(self, key: str, default: tuple[int, ...], *, minimum: int = 1) -> tuple[int, ...]:
        value = self.raw.get(key, list(default))
        if not isinstance(value, list | tuple) or any(
            isinstance(v, bool) or not isinstance(v, int) or v < minimum for v in value
        ):
            raise self.fail(key, f"a list of integers >= {minimum}")
        return tuple(value)

    def index_range(self, key: str, default: tuple[int, int]) -> tuple[int, int]:
        value = self.integers(key, default)
        if len(value) != 2 or value[0] > value[1]:  # noqa: PLR2004
            raise self.fail(key, "[first, last] with 1 <= first <= last")
        return value[0], value[1]


@dataclass(frozen=True)
class ProblemConfig:
    """``[problem]``: the physical domain and its discretization."""

    alpha: float = 1.0
    num_cells: int = 50
    n_phys_elements: int = 2000
    bc: str = "dirichlet"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ProblemConfig:
        """Read ``[problem]`` from a parsed config."""
        table = _Table(data, "problem", ("alpha", "num_cells", "n_phys_elements", "bc"))
        config = cls(
            alpha=table.number("alpha", 1.0, positive=True),
            num_cells=table.integer("num_cells", 50),
            n_phys_elements=table.integer("n_phys_elements", 2000),
            bc=table.choice("bc", "dirichlet", PHYSICAL_BCS),
        )
        if config.n_phys_elements % config.num_cells:
            msg = (
                f"[problem].n_phys_elements = {config.n_phys_elements} is not a multiple of "
                f"num_cells = {config.num_cells}; elements must align with the cells"
            )
            raise ConfigError(msg)
        return config

    @property
    def epsilon(self) -> float:
        """The period ``alpha / num_cells``."""
        return self.alpha / self.num_cells


@dataclass(frozen=True)
class KGrid:
    """``[bloch].k_grid``: exactly one of ``step``, ``count`` or explicit ``values``."""

    step: float | None = None
    count: int | None = 125
    values: tuple[float, ...] | None = None

    @classmethod
    def from_value(cls, raw: Any) -> KGrid:  # noqa: ANN401
        """Parse the inline table (or a plain list of wavenumbers)."""
        if isinstance(raw, list | tuple):
            raw = {"values": list(raw)}
        if not isinstance(raw, dict) or len(raw) != 1 or next(iter(raw)) not in ("step", "count", "values"):
            msg = f"[bloch].k_grid must give exactly one of step, count or values, got {raw!r}"
            raise ConfigError(msg)
        table = _Table({"bloch": {"k_grid": raw}}, "bloch.k_grid", ("step", "count", "values"))
        if "step" in raw:
            grid = cls(step=table.number("step", 0.0, positive=True), count=None)
        elif "count" in raw:
            grid = cls(count=table.integer("count", 125))
        else:
            values = raw["values"]
            if not isinstance(values, list | tuple) or any(
                isinstance(v, bool) or not isinstance(v, int | float) for v in values
            ):
                msg = f"[bloch].k_grid values must be a list of numbers, got {values!r}"
                raise ConfigError(msg)
            grid = cls(count=None, values=tuple(float(v) for v in values))
        wavenumbers = grid.wavenumbers()
        if not wavenumbers:
            msg = "[bloch].k_grid is empty"
            raise ConfigError(msg)
        outside = [k for k in wavenumbers if not -0.5 <= k < 0.5]  # noqa: PLR2004
        if outside:
            msg = f"[bloch].k_grid has wavenumbers outside [-1/2, 1/2): {outside}"
            raise ConfigError(msg)
        return grid

    def wavenumbers(self) -> list[float]:
        """The grid points, in order."""
        if self.values is not None:
            return list(self.values)
        if self.step is not None:
            return uniform_k_grid(self.step)
        return uniform_k_grid(count=self.count)

    def to_dict(self) -> dict[str, Any]:
        """The inline-table form."""
        if self.values is not None:
            return {"values": list(self.values)}
        if self.step is not None:
            return {"step": self.step}
        return {"count": self.count}


@dataclass(frozen=True)
class BlochConfig:
    """``[bloch]``: the cell problem."""

    n_bloch_elements: int = 50
    num_modes: int = 10
    k_grid: KGrid = field(default_factory=KGrid)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> BlochConfig:
        """Read ``[bloch]`` from a parsed config."""
        table = _Table(data, "bloch", ("n_bloch_elements", "num_modes", "k_grid"))
        return cls(
            n_bloch_elements=table.integer("n_bloch_elements", 50),
            num_modes=table.integer("num_modes", 10),
            k_grid=KGrid.from_value(table.raw["k_grid"]) if "k_grid" in table.raw else KGrid(),
        )


@dataclass(frozen=True)
class SearchConfig:
    """``[search]``: the matching window and the physical ranks to match."""

    r: int = 15
    p_range: tuple[int, int] = (40, 150)
    exclude: tuple[int, ...] = (50,)
    threshold: float = 0.2

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SearchConfig:
        """Read ``[search]`` from a parsed config."""
        table = _Table(data, "search", ("r", "p_range", "exclude", "threshold"))
        return cls(
            r=table.integer("r", 15, minimum=0),
            p_range=table.index_range("p_range", (40, 150)),
            exclude=table.integers("exclude", (50,)),
            threshold=table.number("threshold", 0.2, positive=True),
        )

    @property
    def indices(self) -> tuple[int, ...]:
        """The ranks in ``p_range`` minus the excluded ones."""
        first, last = self.p_range
        return tuple(p for p in range(first, last + 1) if p not in self.exclude)


@dataclass(frozen=True)
class BandConfig:
    """``[band]``: the band-diagram export."""

    num_bands: int | None = None
    blocks: bool = False

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> BandConfig:
        """Read ``[band]`` from a parsed config."""
        table = _Table(data, "band", ("num_bands", "blocks"))
        return cls(
            num_bands=table.integer("num_bands", 1) if "num_bands" in table.raw else None,
            blocks=table.flag("blocks", default=False),
        )


@dataclass(frozen=True)
class PhysicalConfig:
    """``[physical]``: which physical eigenpairs to export."""

    p_range: tuple[int, int] = (1, 150)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PhysicalConfig:
        """Read ``[physical]`` from a parsed config."""
        table = _Table(data, "physical", ("p_range",))
        return cls(p_range=table.index_range("p_range", (1, 150)))


@dataclass(frozen=True)
class MatchConfig:
    """``[match]``: optional explicit ranks, a finer grid to compare against, per-k export."""

    indices: tuple[int, ...] | None = None
    refine_step: float | None = None
    per_k: bool = False

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MatchConfig:
        """Read ``[match]`` from a parsed config."""
        table = _Table(data, "match", ("indices", "refine_step", "per_k"))
        return cls(
            indices=table.integers("indices", ()) if "indices" in table.raw else None,
            refine_step=table.optional_number("refine_step"),
            per_k=table.flag("per_k", default=False),
        )


@dataclass(frozen=True)
class ModelConfig:
    """``[model]``: the ``(k, n)`` to model and an optional scan over ``n``."""

    k: float = 0.16
    n: int = 2
    scan_modes: int = 0

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ModelConfig:
        """Read ``[model]`` from a parsed config."""
        table = _Table(data, "model", ("k", "n", "scan_modes"))
        config = cls(
            k=table.number("k", 0.16),
            n=table.integer("n", 2),
            scan_modes=table.integer("scan_modes", 0, minimum=0),
        )
        if not 0.0 <= config.k < 0.5:  # noqa: PLR2004
            raise table.fail("k", "in [0, 1/2)")
        return config


@dataclass(frozen=True)
class ConvergeConfig:
    """``[converge]``: the periods ``alpha k / (h + l)`` to follow."""

    k: float = 0.3
    l: float = 0.6  # noqa: E741
    h_list: tuple[int, ...] = (3, 9, 15, 21)
    n: int = 2
    elements_per_cell: int = 40

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ConvergeConfig:
        """Read ``[converge]`` from a parsed config."""
        table = _Table(data, "converge", ("k", "l", "h_list", "n", "elements_per_cell"))
        config = cls(
            k=table.number("k", 0.3, positive=True),
            l=table.number("l", 0.6),
            h_list=table.integers("h_list", (3, 9, 15, 21), minimum=0),
            n=table.integer("n", 2),
            elements_per_cell=table.integer("elements_per_cell", 40),
        )
        if not config.k < 0.5:  # noqa: PLR2004
            raise table.fail("k", "in (0, 1/2)")
        if not 0.0 <= config.l < 1.0:
            raise table.fail("l", "in [0, 1)")
        if len(config.h_list) < 2:  # noqa: PLR2004
            raise table.fail("h_list", "at least two values")
        for h in config.h_list:
            ratio = (h + config.l) / config.k
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):  # noqa: PLR2004
                raise table.fail("h_list", f"values with (h + l) / k a whole cell count; h={h} gives {ratio}")
        return config


@dataclass(frozen=True)
class OutputConfig:
    """``[output]``: which ranks get a ``mode_<p>.csv`` profile."""

    profiles: tuple[int, ...] = ()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> OutputConfig:
        """Read ``[output]`` from a parsed config."""
        table = _Table(data, "output", ("profiles",))
        return cls(profiles=table.integers("profiles", ()))


@dataclass(frozen=True)
class RunSection:
    """``[run]``: worker count and output directory."""

    workers: int = 1
    out: str = "results"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunSection:
        """Read ``[run]`` from a parsed config."""
        table = _Table(data, "run", ("workers", "out"))
        return cls(workers=table.integer("workers", 1), out=table.text("out", "results"))


_SECTIONS = (
    "problem",
    "coefficients",
    "bloch",
    "search",
    "band",
    "physical",
    "match",
    "model",
    "converge",
    "output",
    "run",
)


def _profile(data: Mapping[str, Any], which: str, default: CoefficientProfile) -> CoefficientProfile:
    coefficients = data.get("coefficients", {})
    if not isinstance(coefficients, dict):
        msg = "[coefficients] must be a table"
        raise ConfigError(msg)
    unknown = sorted(set(coefficients) - {"a", "rho"})
    if unknown:
        msg = f"[coefficients].{unknown[0]} is not a recognized key; expected a and rho"
        raise ConfigError(msg)
    if which not in coefficients:
        return default
    try:
        return CoefficientProfile.from_dict(coefficients[which])
    except (InvalidCoefficient, TypeError, ValueError) as exc:
        msg = f"[coefficients.{which}].kind: {exc}"
        raise ConfigError(msg) from exc


@dataclass(frozen=True)
class RunConfig:
    """A complete, validated run configuration."""

    problem: ProblemConfig = field(default_factory=ProblemConfig)
    a: CoefficientProfile = field(default_factory=lambda: CoefficientProfile.sine(1.0, 2.0))
    rho: CoefficientProfile = field(default_factory=lambda: CoefficientProfile.constant(1.0))
    bloch: BlochConfig = field(default_factory=BlochConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    band: BandConfig = field(default_factory=BandConfig)
    physical: PhysicalConfig = field(default_factory=PhysicalConfig)
    match: MatchConfig = field(default_factory=MatchConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    converge: ConvergeConfig = field(default_factory=ConvergeConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    run: RunSection = field(default_factory=RunSection)

    @classmethod
    def default(cls) -> RunConfig:
        """The default configuration."""
        return cls()

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> RunConfig:
        """Validate a parsed TOML document.

        Raises
        ------
        ConfigError
            If a table or key is unknown or a value is invalid; the message names
            ``[table].key``.
        """
        unknown = sorted(set(data) - set(_SECTIONS))
        if unknown:
            msg = f"[{unknown[0]}] is not a recognized table; expected one of {list(_SECTIONS)}"
            raise ConfigError(msg)
        defaults = cls()
        return cls(
            problem=ProblemConfig.from_dict(data),
            a=_profile(data, "a", defaults.a),
            rho=_profile(data, "rho", defaults.rho),
            bloch=BlochConfig.from_dict(data),
            search=SearchConfig.from_dict(data),
            band=BandConfig.from_dict(data),
            physical=PhysicalConfig.from_dict(data),
            match=MatchConfig.from_dict(data),
            model=ModelConfig.from_dict(data),
            converge=ConvergeConfig.from_dict(data),
            output=OutputConfig.from_dict(data),
            run=RunSection.from_dict(data),
        )

    def to_dict(self) -> dict[str, Any]:
        """The resolved configuration, readable back by :meth:`from_dict`."""
        return {
            "problem": {
                "alpha": self.problem.alpha,
                "num_cells": self.problem.num_cells,
                "n_phys_elements": self.problem.n_phys_elements,
                "bc": self.problem.bc,
            },
            "coefficients": {"a": self.a.to_dict(), "rho": self.rho.to_dict()},
            "bloch": {
                "n_bloch_elements": self.bloch.n_bloch_elements,
                "num_modes": self.bloch.num_modes,
                "k_grid": self.bloch.k_grid.to_dict(),
            },
            "search": {
                "r": self.search.r,
                "p_range": list(self.search.p_range),
                "exclude": list(self.search.exclude),
                "threshold": self.search.threshold,
            },
            "band": {"num_bands": self.band.num_bands, "blocks": self.band.blocks},
            "physical": {"p_range": list(self.physical.p_range)},
            "match": {
                "indices": None if self.match.indices is None else list(self.match.indices),
                "refine_step": self.match.refine_step,
                "per_k": self.match.per_k,
            },
            "model": {"k": self.model.k, "n": self.model.n, "scan_modes": self.model.scan_modes},
            "converge": {
                "k": self.converge.k,
                "l": self.converge.l,
                "h_list": list(self.converge.h_list),
                "n": self.converge.n,
                "elements_per_cell": self.converge.elements_per_cell,
            },
            "output": {"profiles": list(self.output.profiles)},
            "run": {"workers": self.run.workers, "out": self.run.out},
        }

    @property
    def epsilon(self) -> float:
        """The period."""
        return self.problem.epsilon

    def physical_problem(self) -> PhysicalProblem:
        """The physical problem of ``[problem]`` and ``[coefficients]``."""
        return PhysicalProblem(
            self.problem.alpha,
            self.problem.epsilon,
            self.a,
            self.rho,
            bc=self.problem.bc,
            n_elements=self.problem.n_phys_elements,
        )

    def search_space(self, k_grid: list[float] | None = None) -> SearchSpace:
        """The matching search space over the non-negative wavenumbers of the grid."""
        grid = self.bloch.k_grid.wavenumbers() if k_grid is None else k_grid
        return SearchSpace(
            k_grid=tuple(k for k in grid if k >= 0.0),
            r=self.search.r,
            num_bloch_modes=self.bloch.num_modes,
            physical_indices=self.match.indices or self.search.indices,
            exclusion_threshold=self.search.threshold,
            n_bloch_elements=self.bloch.n_bloch_elements,
        )


def _line_of(text: str, table: str, key: str) -> int | None:
    """The 1-based line assigning ``key`` inside ``[table]`` (or the table header)."""
    current = ""
    header_line = None
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            current = stripped.strip("[]").strip()
            if current == table:
                header_line = number
            continue
        if current == table and re.match(rf"{re.escape(key)}\s*=", stripped):
            return number
    if header_line is None and "." in table:
        parent, _, child = table.rpartition(".")
        return _line_of(text, parent, child)
    return header_line


def load_config(path: str | Path) -> RunConfig:
    """Read and validate a TOML run configuration.

    Raises
    ------
    ConfigError
        With ``<path>:<line>:`` in front of the message when the line is known.
    OSError
        If the file cannot be read.
    """
    file_path = Path(path)
    text = file_path.read_text(encoding="utf-8")
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        found = _LINE_IN_MESSAGE.search(str(exc))
        location = f"{file_path}:{found.group(1)}" if found else str(file_path)
        msg = f"{location}: invalid TOML: {exc}"
        raise ConfigError(msg) from exc
    try:
        config = RunConfig.from_dict(data)
    except ConfigError as exc:
        found = _KEY_IN_MESSAGE.search(str(exc))
        line = _line_of(text, found.group(1), found.group(2)) if found else None
        location = f"{file_path}:{line}" if line else str(file_path)
        msg = f"{location}: {exc}"
        raise ConfigError(msg) from exc
    logger.debug("loaded configuration from %s", file_path)
    return config
