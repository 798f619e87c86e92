"""
Run the Bloch-wave homogenization experiments from a TOML configuration.

Each subcommand writes CSV tables, a JSON summary and the resolved configuration
(``config.toml``) into the output directory:

``band``
    The band diagram ``k -> λ_n^k`` (``bands.csv``).
``physical``
    Eigenvalues of the ``epsilon``-periodic problem (``physical.csv``).
``match``
    The two-scale mode matching each physical mode (``match.csv``; optionally
    ``match_<p>_per_k.csv`` and ``refine.csv``).
``model``
    The two-scale mode of one ``(k, n)`` and the physical mode it approximates
    (``model.csv``; optionally ``model_scan.csv``).
``converge``
    Errors along a sequence of periods and their decay rates (``converge.csv``).

Usage::

    uv run python tools/homogenize.py band
    uv run python tools/homogenize.py match --config run.toml --out results/match --workers 4 -v
    uv run python tools/homogenize.py converge --config run.toml

Exit codes: 0 on success, 2 for an invalid configuration or unwritable output,
3 for a numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING, Any

from blochmodes import (
    BlochModesError,
    ConfigError,
    RunConfig,
    band_sweep,
    convergence_study,
    gradient_bound_check,
    load_config,
    modeling_band_scan,
    modeling_search,
    refinement_ratios,
    renormalized_eigenvalue,
    solve_physical,
    sweep_match,
    uniform_k_grid,
)
from blochmodes.results import (
    CONVERGE_COLUMNS,
    MATCH_COLUMNS,
    MODEL_COLUMNS,
    PER_K_COLUMNS,
    PHYSICAL_COLUMNS,
    PHYSICAL_PROFILE_COLUMNS,
    PROFILE_COLUMNS,
    REFINE_COLUMNS,
    CsvTable,
    convergence_rows,
    match_row,
    match_summary,
    model_row,
    per_k_rows,
    physical_profile_rows,
    profile_rows,
    refine_rows,
    write_bands,
    write_config_echo,
    write_csv,
    write_json,
)

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from blochmodes import MatchReport, PhysicalSpectrum

logger = logging.getLogger("homogenize")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)


def build_parser() -> argparse.ArgumentParser:
    """Build the command-line argument parser for the tool."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", type=Path, default=None, help="TOML run configuration (default: built-in)")
    common.add_argument("--out", "-o", type=Path, default=None, help="output directory (default: [run].out)")
    common.add_argument("--workers", "-j", type=int, default=None, help="worker threads (default: [run].workers)")
    common.add_argument("--verbose", "-v", action="count", default=0, help="log more (-v info, -vv debug)")

    parser = argparse.ArgumentParser(description="Bloch-wave homogenization of a 1D periodic spectral problem.")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    commands.add_parser("band", parents=[common], help="band diagram of the cell problem")
    commands.add_parser("physical", parents=[common], help="eigenvalues of the periodic medium")
    commands.add_parser("match", parents=[common], help="match physical modes with two-scale modes")
    commands.add_parser("model", parents=[common], help="model one (k, n) and identify its physical mode")
    commands.add_parser("converge", parents=[common], help="errors along a sequence of periods")
    return parser


def _write_profiles(
    out: Path,
    spectrum: PhysicalSpectrum,
    reports: Sequence[MatchReport],
    wanted: Sequence[int],
) -> int:
    """Write ``mode_<p>.csv`` for the requested ranks that have a report."""
    written = 0
    for report in reports:
        if report.p in wanted and report.mode is not None:
            rows = profile_rows(spectrum.mode(report.p), report.mode.samples, report.alignment_scalar)
            write_csv(out / f"mode_{report.p}.csv", PROFILE_COLUMNS, rows)
            written += 1
    return written


def run_band(config: RunConfig, out: Path, workers: int) -> str:
    """Write the band diagram over the configured wavenumber grid."""
    grid = config.bloch.k_grid.wavenumbers()
    num_bands = config.band.num_bands or config.bloch.num_modes
    bands = band_sweep(config.a, config.rho, grid, config.bloch.n_bloch_elements, num_bands, workers=workers)
    rows = write_bands(out / "bands.csv", bands, num_bands=num_bands, blocks=config.band.blocks)
    write_json(out / "bands.json", "band", {"k_grid": grid, "num_bands": num_bands, "rows": rows})
    return f"wrote {len(rows)} band rows ({len(grid)} wavenumbers x {num_bands} bands) to {out / 'bands.csv'}"


def run_physical(config: RunConfig, out: Path, workers: int) -> str:  # noqa: ARG001
    """Write the physical eigenvalues of the configured rank range."""
    problem = config.physical_problem()
    spectrum = solve_physical(problem, config.physical.p_range)
    rows = [
        {
            "p": p,
            "lambda": spectrum.eigenvalue(p),
            "eps2_lambda": renormalized_eigenvalue(spectrum, p),
            "gradient_bound": gradient_bound_check(spectrum, p),
        }
        for p in spectrum.indices
    ]
    written = write_csv(out / "physical.csv", PHYSICAL_COLUMNS, rows)
    for p in config.output.profiles:
        if p in spectrum.indices:
            write_csv(out / f"mode_{p}.csv", PHYSICAL_PROFILE_COLUMNS, physical_profile_rows(spectrum.mode(p)))
    write_json(out / "physical.json", "physical", {"epsilon": problem.epsilon, "rows": written})
    return f"wrote {len(rows)} physical eigenvalues ({problem.num_cells} cells) to {out / 'physical.csv'}"


def run_match(config: RunConfig, out: Path, workers: int) -> str:
    """Match every configured physical mode against the two-scale modes of the grid."""
    space = config.search_space()
    indices = space.physical_indices
    spectrum = solve_physical(config.physical_problem(), (min(indices), max(indices)))
    # one extra Bloch mode so the partner of a k = 0 pair is available
    bands = band_sweep(
        config.a,
        config.rho,
        space.k_grid,
        config.bloch.n_bloch_elements,
        config.bloch.num_modes + 1,
        workers=workers,
    )
    with CsvTable(out / "match.csv", MATCH_COLUMNS) as table:
        reports = sweep_match(
            indices, spectrum, bands, space, workers=workers, on_report=lambda report: table.write(match_row(report))
        )
    if config.match.per_k:
        for report in reports:
            write_csv(out / f"match_{report.p}_per_k.csv", PER_K_COLUMNS, per_k_rows(report))

    document: dict[str, Any] = {"epsilon": spectrum.problem.epsilon, "reports": [match_summary(r) for r in reports]}
    if config.match.refine_step is not None:
        fine_space = config.search_space(uniform_k_grid(config.match.refine_step))
        fine_bands = band_sweep(
            config.a,
            config.rho,
            fine_space.k_grid,
            config.bloch.n_bloch_elements,
            config.bloch.num_modes + 1,
            workers=workers,
        )
        fine = sweep_match(indices, spectrum, fine_bands, fine_space, workers=workers)
        ratios = write_csv(out / "refine.csv", REFINE_COLUMNS, refine_rows(refinement_ratios(reports, fine)))
        document["refine"] = {"step": config.match.refine_step, "ratios": ratios}
    _write_profiles(out, spectrum, reports, config.output.profiles)
    write_json(out / "match.json", "match", document)

    flagged = sum(report.excluded for report in reports)
    worst_value = max(report.er_value for report in reports)
    worst_vector = max(report.er_vector for report in reports)
    return (
        f"matched {len(reports)} modes: max er_value={worst_value:.3g}, "
        f"max er_vector={worst_vector:.3g}, {flagged} flagged; wrote {out / 'match.csv'}"
    )


def run_model(config: RunConfig, out: Path, workers: int) -> str:  # noqa: ARG001
    """Model the configured ``(k, n)`` and identify its physical counterpart."""
    space = config.search_space()
    indices = space.physical_indices
    spectrum = solve_physical(config.physical_problem(), (min(indices), max(indices)))
    result = modeling_search(config.model.k, config.model.n, spectrum, space)
    write_csv(out / "model.csv", MODEL_COLUMNS, [model_row(result)])
    document: dict[str, Any] = {
        **model_row(result),
        "macro_ell": result.macro_ell,
        "residuals": [{"ell": ell, "residual": value} for ell, value in result.residuals],
        "identified": match_summary(result.identified),
    }
    if config.model.scan_modes:
        scan = modeling_band_scan(config.model.k, spectrum, space, num_modes=config.model.scan_modes)
        document["scan"] = write_csv(out / "model_scan.csv", MODEL_COLUMNS, [model_row(r) for r in scan])
    _write_profiles(out, spectrum, [result.identified], config.output.profiles)
    write_json(out / "model.json", "model", document)
    return (
        f"(k={result.k}, n={result.n}): ell={result.best_ell}, F={result.residual:.3g}, "
        f"lambda1={result.lambda1:.4g} -> p={result.identified.p}; wrote {out / 'model.csv'}"
    )


def run_converge(config: RunConfig, out: Path, workers: int) -> str:
    """Follow the configured ``(k, n)`` along ``epsilon_h = alpha k / (h + l)``."""
    settings = config.converge
    report = convergence_study(
        settings.k,
        settings.l,
        settings.h_list,
        config.a,
        config.rho,
        alpha=config.problem.alpha,
        n=settings.n,
        elements_per_cell=settings.elements_per_cell,
        n_bloch_elements=config.bloch.n_bloch_elements,
        r=config.search.r,
        workers=workers,
    )
    rows = write_csv(out / "converge.csv", CONVERGE_COLUMNS, convergence_rows(report))
    write_json(
        out / "converge.json",
        "converge",
        {
            "k": report.k,
            "l": report.l,
            "n": report.n,
            "rows": rows,
            "q_value": list(report.q_value),
            "q_vector": list(report.q_vector),
            "c_value": list(report.c_value),
            "c_vector": list(report.c_vector),
        },
    )
    rates = ", ".join(f"{q:.3f}" for q in report.q_value)
    return f"{len(rows)} periods, q_value = [{rates}]; wrote {out / 'converge.csv'}"


COMMANDS: dict[str, Callable[[RunConfig, Path, int], str]] = {
    "band": run_band,
    "physical": run_physical,
    "match": run_match,
    "model": run_model,
    "converge": run_converge,
}


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, load the configuration, and run one command."""
    parser = build_parser()
    args = parser.parse_args(argv)
    level = _LEVELS[min(args.verbose, len(_LEVELS) - 1)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.workers is not None and args.workers < 1:
        parser.error(f"--workers must be at least 1, got {args.workers}")
    if args.config is not None and not args.config.exists():
        parser.error(f"config file not found: {args.config}")
    try:
        config = load_config(args.config) if args.config is not None else RunConfig.default()
    except (ConfigError, OSError) as exc:
        parser.error(str(exc))
    out = args.out if args.out is not None else Path(config.run.out)
    workers = args.workers if args.workers is not None else config.run.workers
    logger.info("running %s with %d worker(s) into %s", args.command, workers, out)

    try:
        write_config_echo(out, config.to_dict())
        summary = COMMANDS[args.command](config, out, workers)
    except OSError as exc:
        parser.error(f"cannot write results to {out}: {exc}")
    except (BlochModesError, ArithmeticError, RuntimeError) as exc:
        print(f"{args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(summary)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
