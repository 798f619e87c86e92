"""The numerical experiments: matching, modeling, and convergence in ``epsilon``.

Matching (:func:`match_mode`, :func:`sweep_match`)
    For a physical eigenpair ``(λ_p, w_p)`` find the two-scale mode ``(γ, ψ)`` that
    best approximates it, in two stages: for every ``k`` minimize the eigenvalue error
    ``|ε² λ_p - γ| / |ε² λ_p|`` over Bloch modes ``n`` and window labels ``ell``; then
    among those per-``k`` optima keep the one minimizing the vector error
    ``‖w_p - s* ψ‖ / max|w_p|`` (``s*`` the least-squares alignment scalar).

Modeling (:func:`modeling_search`, :func:`modeling_band_scan`)
    For a given ``(k, n)`` pick the window label whose two-scale mode has the smallest
    residual, then identify the physical eigenpair it approximates.

Convergence (:func:`convergence_study`)
    Follow one ``(k, n)`` along the periods ``ε_h = alpha k / (h + l)`` and fit the
    decay rate of the errors.

Window labels ``ell`` run over ``floor(2 k alpha / eps) + {-r, ..., r}`` and map to the
macroscopic index ``2 h - ell`` (see :class:`~blochmodes.macro_solver.EpsilonDecomposition`).
Ties are broken towards the smallest ``n`` and then the smallest ``|λ¹|``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from blochmodes.bloch_cell import CellSpectrum, CouplingCoefficients, coupling, solve_cell
from blochmodes.errors import (
    DegenerateMacroModel,
    DegenerateNormalization,
    EmptySearch,
    InvalidSubsequence,
    NoPhysicalCounterpart,
    PeriodicDegenerateMode,
    UnderdeterminedBoundary,
)
from blochmodes.macro_solver import (
    COUPLING_TOL,
    ORIGIN_TOL,
    EpsilonDecomposition,
    MacroSolution,
    decompose_epsilon,
    degenerate_macro_solution,
    first_order_eigenvalue_0,
    first_order_eigenvalue_k,
    macro_eigenpair_0,
    macro_eigenpair_k,
)
from blochmodes.parallel import ordered_map
from blochmodes.physical_spectrum import (
    PhysicalProblem,
    PhysicalSpectrum,
    renormalized_eigenvalue,
    solve_physical,
)
from blochmodes.two_scale import TwoScaleMode, align, build_two_scale_mode, residual_F

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from numpy.typing import NDArray

    from blochmodes.coefficients import CoefficientProfile

logger = logging.getLogger(__name__)

EXCLUSION_REASON = "boundary-spectrum heuristic"
_CELL_TOL = 1e-9


@dataclass(frozen=True)
class SearchSpace:
    """Where the matching and modeling searches look.

    Parameters
    ----------
    k_grid : tuple[float, ...]
        Wavenumbers in ``[0, 1/2)``.
    r : int
        Half-width of the window of labels ``ell``.
    num_bloch_modes : int
        Bloch modes ``n = 1 .. num_bloch_modes`` considered at each ``k``.
    physical_indices : tuple[int, ...]
        Physical ranks ``p`` to match or to identify against.
    exclusion_threshold : float
        A mode whose vector error exceeds this at every ``k`` is flagged.
    n_bloch_elements : int
        Elements of the cell mesh.
    """

    k_grid: tuple[float, ...] = ()
    r: int = 15
    num_bloch_modes: int = 10
    physical_indices: tuple[int, ...] = ()
    exclusion_threshold: float = 0.2
    n_bloch_elements: int = 50

    def __post_init__(self) -> None:
        """Check the counts."""
        if self.r < 0 or self.num_bloch_modes < 1 or self.n_bloch_elements < 1:
            msg = f"invalid search space: r={self.r}, num_bloch_modes={self.num_bloch_modes}"
            raise ValueError(msg)

    def ell_window(self, decomposition: EpsilonDecomposition) -> NDArray[np.int64]:
        """The ``2 r + 1`` window labels around ``floor(2 k alpha / eps)``."""
        center = decomposition.window_center
        return np.arange(center - self.r, center + self.r + 1)


@dataclass(frozen=True, eq=False)
class BandCandidates:
    """Every ``(n, ell)`` candidate at one wavenumber, ordered for tie-breaking.

    The arrays are parallel; ``partner`` is the second index of a ``k = 0`` pair and
    ``0`` otherwise.
    """

    k: float
    alpha: float
    epsilon: float
    decomposition: EpsilonDecomposition
    cell: CellSpectrum
    couplings: CouplingCoefficients
    n: NDArray[np.int64]
    partner: NDArray[np.int64]
    window_ell: NDArray[np.int64]
    macro_ell: NDArray[np.int64]
    lambda_nk: NDArray[np.float64]
    lambda1: NDArray[np.float64]

    def __len__(self) -> int:
        """Number of candidates."""
        return len(self.n)

    @property
    def gamma(self) -> NDArray[np.float64]:
        """``λ_n^k + ε λ¹`` of every candidate."""
        return self.lambda_nk + self.epsilon * self.lambda1

    def macro_solution(self, index: int) -> MacroSolution:
        """The closed-form macroscopic solution of candidate ``index``."""
        n = int(self.n[index])
        ell = int(self.macro_ell[index])
        if self.k != 0.0:
            return macro_eigenpair_k(
                self.couplings.c_of(n, n),
                self.couplings.b_of(n, n).real,
                self.cell.phi_at_origin(n),
                np.conj(self.cell.phi_at_origin(n)),
                self.alpha,
                self.decomposition.l,
                ell,
                k=self.k,
                n=n,
            )
        m = int(self.partner[index])
        if m == 0:
            return degenerate_macro_solution(0.0, n, self.alpha, self.couplings.c_of(n, n))
        return macro_eigenpair_0(
            self.couplings.c_of(n, m),
            self.cell.phi_at_origin(n).real,
            self.cell.phi_at_origin(m).real,
            self.alpha,
            ell,
            n=n,
            m=m,
        )

    def two_scale_mode(self, index: int, problem: PhysicalProblem) -> TwoScaleMode:
        """Assemble candidate ``index`` on the mesh of ``problem``."""
        return build_two_scale_mode(
            self.cell,
            self.macro_solution(index),
            problem.epsilon,
            problem.mesh,
            ell=int(self.window_ell[index]),
        )


def prepare_candidates(cell: CellSpectrum, problem: PhysicalProblem, space: SearchSpace) -> BandCandidates:
    """List the candidates ``(n, ell)`` of one wavenumber for ``problem``.

    ``k != 0`` modes give one candidate per window label. At ``k = 0`` a double
    eigenvalue ``{n, m}`` gives one family indexed by its lower index ``n``, and a
    simple eigenvalue gives the single periodic candidate ``λ¹ = 0``. Modes with a
    vanishing coupling or vanishing at the origin are skipped with a warning.
    """
    decomposition = decompose_epsilon(problem.alpha, cell.k, problem.epsilon)
    window = space.ell_window(decomposition)
    macro_ells = 2 * decomposition.h - window
    couplings = coupling(cell, problem.a, problem.rho)

    rows: list[tuple[int, int, NDArray[np.int64], NDArray[np.int64], NDArray[np.float64]]] = []
    for n in range(1, min(space.num_bloch_modes, cell.num_modes) + 1):
        if cell.k != 0.0:
            c_nn = couplings.c_of(n, n)
            if abs(c_nn) <= COUPLING_TOL or abs(cell.phi_at_origin(n)) <= ORIGIN_TOL:
                logger.warning("skipping Bloch mode n=%d at k=%g: no macroscopic equation", n, cell.k)
                continue
            b_nn = couplings.b_of(n, n).real
            lambda1 = first_order_eigenvalue_k(c_nn, b_nn, problem.alpha, decomposition.l, macro_ells)
            rows.append((n, 0, window, macro_ells, lambda1.real))
            continue
        group = cell.group_of(n)
        if n != group[0]:
            continue
        if len(group) == 1:
            zero = np.zeros(1, dtype=np.int64)
            rows.append((n, 0, zero, zero, np.zeros(1)))
        elif len(group) == 2:  # noqa: PLR2004
            m = group[1]
            c_nm = couplings.c_of(n, m)
            if abs(c_nm) <= COUPLING_TOL or max(abs(cell.phi_at_origin(n)), abs(cell.phi_at_origin(m))) <= ORIGIN_TOL:
                logger.warning("skipping Bloch pair (%d, %d) at k=0: no macroscopic equation", n, m)
                continue
            lambda1 = first_order_eigenvalue_0(c_nm, problem.alpha, macro_ells)
            rows.append((n, m, window, macro_ells, lambda1.real))
        else:
            logger.warning("skipping Bloch group %s at k=0: multiplicity above two", group)

    if rows:
        n_col = np.concatenate([np.full(len(row[2]), row[0]) for row in rows])
        partner = np.concatenate([np.full(len(row[2]), row[1]) for row in rows])
        window_ell = np.concatenate([row[2] for row in rows])
        macro_ell = np.concatenate([row[3] for row in rows])
        lambda1 = np.concatenate([row[4] for row in rows])
    else:
        n_col = partner = window_ell = macro_ell = np.zeros(0, dtype=np.int64)
        lambda1 = np.zeros(0)
    order = np.lexsort((macro_ell, np.abs(macro_ell - 2.0 * decomposition.l), n_col))
    return BandCandidates(
        k=cell.k,
        alpha=problem.alpha,
        epsilon=problem.epsilon,
        decomposition=decomposition,
        cell=cell,
        couplings=couplings,
        n=n_col[order],
        partner=partner[order],
        window_ell=window_ell[order],
        macro_ell=macro_ell[order],
        lambda_nk=cell.eigenvalues[n_col[order] - 1],
        lambda1=lambda1[order],
    )


@dataclass(frozen=True)
class PerKError:
    """The best stage-1 candidate at one wavenumber and its errors."""

    k: float
    n: int
    ell: int
    er_value: float
    er_vector: float


@dataclass(frozen=True, eq=False)
class MatchReport:
    """The two-scale mode matched to one physical eigenpair.

    ``best_ell`` is the window label and ``macro_ell`` the macroscopic index of the
    match; ``per_k`` lists the stage-1 optimum of every wavenumber.
    """

    p: int
    best_k: float
    best_n: int
    best_ell: int
    macro_ell: int
    lambda_nk: float
    lambda1: float
    epsilon: float
    eps2_lambda: float
    er_value: float
    er_vector: float
    alignment_scalar: complex
    excluded: bool = False
    reason: str = ""
    per_k: tuple[PerKError, ...] = ()
    mode: TwoScaleMode | None = field(default=None, repr=False)

    @property
    def gamma(self) -> float:
        """``λ_n^k + ε λ¹`` of the match."""
        return self.lambda_nk + self.epsilon * self.lambda1

    def recomputed_er_value(self) -> float:
        """``|ε² λ_p - γ| / |ε² λ_p|`` from the stored fields."""
        return abs(self.eps2_lambda - self.gamma) / abs(self.eps2_lambda)


def _relative_errors(target: float, gamma: NDArray[np.float64]) -> NDArray[np.float64]:
    if target == 0.0:
        msg = "the renormalized eigenvalue is zero; relative errors are undefined"
        raise DegenerateNormalization(msg)
    return np.abs(target - gamma) / abs(target)


def match_mode(
    p: int,
    physical: PhysicalSpectrum,
    bands: Sequence[CellSpectrum],
    space: SearchSpace,
    *,
    candidates: Sequence[BandCandidates] | None = None,
) -> MatchReport:
    """Match physical mode ``p`` against the two-scale modes of ``bands``.

    Parameters
    ----------
    p : int
        Physical rank.
    physical : PhysicalSpectrum
        A spectrum containing ``p``.
    bands : Sequence[CellSpectrum]
        Bloch data over the wavenumber grid.
    space : SearchSpace
        The search window.
    candidates : Sequence[BandCandidates] | None, optional
        Precomputed :func:`prepare_candidates` output for ``bands``.

    Returns
    -------
    MatchReport
        The best match, flagged when every vector error exceeds the exclusion threshold.

    Raises
    ------
    EmptySearch
        If there is no candidate at any wavenumber.
    """
    problem = physical.problem
    if candidates is None:
        candidates = [prepare_candidates(cell, problem, space) for cell in bands]
    usable = [band for band in candidates if len(band)]
    if not usable:
        msg = f"no two-scale candidates to match mode {p} against"
        raise EmptySearch(msg)
    target = renormalized_eigenvalue(physical, p)
    w = physical.mode(p)

    per_k: list[PerKError] = []
    picks: list[tuple[int, TwoScaleMode, complex]] = []
    for band in usable:
        errors = _relative_errors(target, band.gamma)
        index = int(np.argmin(errors))
        mode = band.two_scale_mode(index, problem)
        scale, er_vector = align(w, mode.samples)
        n, ell = int(band.n[index]), int(band.window_ell[index])
        per_k.append(PerKError(band.k, n, ell, float(errors[index]), er_vector))
        picks.append((index, mode, scale))

    best = int(np.argmin([entry.er_vector for entry in per_k]))
    index, mode, scale = picks[best]
    band = usable[best]
    excluded = all(entry.er_vector > space.exclusion_threshold for entry in per_k)
    if excluded:
        threshold = space.exclusion_threshold
        logger.warning("mode p=%d: vector error above %g at every k (%s)", p, threshold, EXCLUSION_REASON)
    report = MatchReport(
        p=p,
        best_k=band.k,
        best_n=int(band.n[index]),
        best_ell=int(band.window_ell[index]),
        macro_ell=int(band.macro_ell[index]),
        lambda_nk=float(band.lambda_nk[index]),
        lambda1=float(band.lambda1[index]),
        epsilon=problem.epsilon,
        eps2_lambda=target,
        er_value=per_k[best].er_value,
        er_vector=per_k[best].er_vector,
        alignment_scalar=scale,
        excluded=excluded,
        reason=EXCLUSION_REASON if excluded else "",
        per_k=tuple(per_k),
        mode=mode,
    )
    logger.debug(
        "p=%d -> k=%g n=%d ell=%d er_value=%.3g er_vector=%.3g",
        p,
        report.best_k,
        report.best_n,
        report.best_ell,
        report.er_value,
        report.er_vector,
    )
    return report


def sweep_match(
    index_set: Sequence[int],
    physical: PhysicalSpectrum,
    bands: Sequence[CellSpectrum],
    space: SearchSpace,
    *,
    workers: int = 1,
    on_report: Callable[[MatchReport], None] | None = None,
) -> list[MatchReport]:
    """Run :func:`match_mode` for every index, in order.

    Candidates are prepared once and shared read-only across workers. ``on_report``
    is called with each report in index order as soon as its batch completes, so a
    caller can flush results incrementally.
    """
    indices = list(index_set)
    if not indices:
        return []
    problem = physical.problem
    candidates = ordered_map(lambda cell: prepare_candidates(cell, problem, space), list(bands), workers=workers)

    def task(p: int) -> MatchReport:
        return match_mode(p, physical, bands, space, candidates=candidates)

    reports: list[MatchReport] = []
    batch = max(1, workers)
    for start in range(0, len(indices), batch):
        for report in ordered_map(task, indices[start : start + batch], workers=workers):
            reports.append(report)
            if on_report is not None:
                on_report(report)
    excluded = sum(report.excluded for report in reports)
    logger.info("matched %d physical modes (%d flagged by the %s)", len(reports), excluded, EXCLUSION_REASON)
    return reports


@dataclass(frozen=True)
class RefinementRatio:
    """Error-reduction ratios of one physical mode between two wavenumber grids."""

    p: int
    e_value: float
    e_vector: float


def refinement_ratios(coarse: Sequence[MatchReport], fine: Sequence[MatchReport]) -> list[RefinementRatio]:
    """``fine / coarse`` ratios of both errors for the modes present in both sweeps.

    A ratio below one means the finer grid improved the match; a zero coarse error
    gives an infinite ratio.
    """
    by_p = {report.p: report for report in coarse}
    ratios = []
    for report in fine:
        reference = by_p.get(report.p)
        if reference is None:
            continue
        ratios.append(
            RefinementRatio(
                p=report.p,
                e_value=report.er_value / reference.er_value if reference.er_value else float("inf"),
                e_vector=report.er_vector / reference.er_vector if reference.er_vector else float("inf"),
            )
        )
    return ratios


@dataclass(frozen=True, eq=False)
class ModelingResult:
    """The outcome of :func:`modeling_search` for one ``(k, n)``."""

    k: float
    n: int
    best_ell: int
    macro_ell: int
    lambda_nk: float
    lambda1: float
    gamma: float
    residual: float
    residuals: tuple[tuple[int, float], ...]
    identified: MatchReport


def modeling_search(
    k: float,
    n: int,
    physical: PhysicalSpectrum,
    space: SearchSpace,
    *,
    cell: CellSpectrum | None = None,
) -> ModelingResult:
    """Pick the label minimizing the residual of ``(k, n)`` and identify its physical mode.

    Parameters
    ----------
    k : float
        Wavenumber in ``[0, 1/2)``.
    n : int
        Bloch mode index (at ``k = 0`` the second index of a pair maps to the first).
    physical : PhysicalSpectrum
        Physical eigenpairs; those in ``space.physical_indices`` (all when empty) are
        scanned for the identification.
    space : SearchSpace
        Window half-width and cell resolution.
    cell : CellSpectrum | None, optional
        Precomputed Bloch data at ``k`` with at least ``n + 1`` modes.

    Raises
    ------
    EmptySearch
        If ``(k, n)`` yields no candidate.
    NoPhysicalCounterpart
        If every residual exceeds one.
    """
    problem = physical.problem
    if cell is None:
        cell = solve_cell(problem.a, problem.rho, k, space.n_bloch_elements, n + 1)
    if k == 0.0:
        n = cell.group_of(n)[0]
    band = prepare_candidates(cell, problem, replace(space, num_bloch_modes=n))
    selected = np.flatnonzero(band.n == n)
    if not len(selected):
        msg = f"Bloch mode n={n} at k={k} gives no two-scale candidate"
        raise EmptySearch(msg)

    modes = [band.two_scale_mode(int(index), problem) for index in selected]
    residuals = np.array([residual_F(mode, problem) for mode in modes])
    best = int(np.argmin(residuals))
    if residuals[best] > 1.0:
        msg = f"(k={k}, n={n}): smallest residual {residuals[best]:.3g} exceeds 1; the mode looks spurious"
        raise NoPhysicalCounterpart(msg)
    mode = modes[best]
    index = int(selected[best])

    indices = [p for p in (space.physical_indices or physical.indices) if p in physical.indices]
    targets = np.array([renormalized_eigenvalue(physical, p) for p in indices])
    errors = np.abs(targets - mode.gamma) / np.abs(targets)
    pick = int(np.argmin(errors))
    p = indices[pick]
    scale, er_vector = align(physical.mode(p), mode.samples)
    identified = MatchReport(
        p=p,
        best_k=band.k,
        best_n=n,
        best_ell=mode.ell,
        macro_ell=int(band.macro_ell[index]),
        lambda_nk=mode.lambda_nk,
        lambda1=mode.lambda1,
        epsilon=problem.epsilon,
        eps2_lambda=float(targets[pick]),
        er_value=float(errors[pick]),
        er_vector=er_vector,
        alignment_scalar=scale,
        mode=mode,
    )
    logger.info("modeling (k=%g, n=%d): ell=%d F=%.3g -> p=%d", k, n, mode.ell, residuals[best], p)
    return ModelingResult(
        k=band.k,
        n=n,
        best_ell=mode.ell,
        macro_ell=int(band.macro_ell[index]),
        lambda_nk=mode.lambda_nk,
        lambda1=mode.lambda1,
        gamma=mode.gamma,
        residual=float(residuals[best]),
        residuals=tuple((int(band.window_ell[i]), float(value)) for i, value in zip(selected, residuals, strict=True)),
        identified=identified,
    )


def modeling_band_scan(
    k: float,
    physical: PhysicalSpectrum,
    space: SearchSpace,
    *,
    num_modes: int | None = None,
) -> list[ModelingResult]:
    """Run :func:`modeling_search` for ``n = 1 .. num_modes`` at one wavenumber.

    Modes without a macroscopic equation or without a physical counterpart are
    skipped with a warning.
    """
    count = num_modes or space.num_bloch_modes
    problem = physical.problem
    cell = solve_cell(problem.a, problem.rho, k, space.n_bloch_elements, count + 1)
    results = []
    seen: set[int] = set()
    for n in range(1, count + 1):
        first = cell.group_of(n)[0] if k == 0.0 else n
        if first in seen:
            continue
        seen.add(first)
        try:
            results.append(modeling_search(k, first, physical, space, cell=cell))
        except (
            EmptySearch,
            NoPhysicalCounterpart,
            DegenerateMacroModel,
            PeriodicDegenerateMode,
            UnderdeterminedBoundary,
        ) as exc:
            logger.warning("modeling scan at k=%g skips n=%d: %s", k, n, exc)
    return results


@dataclass(frozen=True)
class ConvergenceRow:
    """One period of a convergence study."""

    h: int
    epsilon: float
    p: int
    ell: int
    lambda1: float
    er_value: float
    er_vector: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Errors along ``ε_h = alpha k / (h + l)`` and their decay rates between consecutive rows.

    ``q_value[i]`` and ``c_value[i]`` relate rows ``i`` and ``i + 1`` through
    ``er_value ≈ c ε^q`` (``c`` taken at the finer row); likewise for the vector errors.
    """

    k: float
    l: float  # noqa: E741
    n: int
    rows: tuple[ConvergenceRow, ...]
    q_value: tuple[float, ...]
    q_vector: tuple[float, ...]
    c_value: tuple[float, ...]
    c_vector: tuple[float, ...]


def decay_rates(errors: Sequence[float], epsilons: Sequence[float]) -> tuple[list[float], list[float]]:
    """Pairwise rates ``q = log(e_i / e_j) / log(ε_i / ε_j)`` and prefactors ``c = e_j / ε_j^q``."""
    rates = []
    prefactors = []
    for (e_i, eps_i), (e_j, eps_j) in zip(
        zip(errors, epsilons, strict=True), zip(errors[1:], epsilons[1:], strict=True), strict=False
    ):
        q = float(np.log(e_i / e_j) / np.log(eps_i / eps_j))
        rates.append(q)
        prefactors.append(float(e_j / eps_j**q))
    return rates, prefactors


def convergence_study(
    k: float,
    l: float,  # noqa: E741
    h_list: Sequence[int],
    a: CoefficientProfile,
    rho: CoefficientProfile,
    *,
    alpha: float = 1.0,
    n: int = 2,
    elements_per_cell: int = 40,
    n_bloch_elements: int = 50,
    r: int = 15,
    workers: int = 1,
) -> ConvergenceReport:
    """Follow the Bloch mode ``(k, n)`` along the periods ``ε_h = alpha k / (h + l)``.

    For each ``h`` the physical problem with ``(h + l) / k`` cells is solved for its
    lowest ``(n + 1)`` modes per cell. Since ``l`` is the same for every period, the label
    is carried along: the candidate of ``(k, n)`` with macroscopic index nearest ``2 l``
    (smallest ``|λ¹|``). The rank ``p`` whose eigenvalue is closest to it is kept, with
    its eigenvalue and vector errors.

    Raises
    ------
    InvalidSubsequence
        If some ``(h + l) / k`` is not an integer or ``l`` is outside ``[0, 1)``.
    """
    if not 0.0 <= l < 1.0 or not 0.0 < k < 0.5:  # noqa: PLR2004
        msg = f"need 0 < k < 1/2 and 0 <= l < 1, got k={k}, l={l}"
        raise InvalidSubsequence(msg)
    cell_counts = []
    for h in h_list:
        ratio = (h + l) / k
        cells = round(ratio)
        if cells < 1 or abs(ratio - cells) > _CELL_TOL * max(1.0, ratio):
            msg = f"(h + l) / k = {ratio} is not an integer for h={h}"
            raise InvalidSubsequence(msg)
        cell_counts.append(int(cells))

    cell = solve_cell(a, rho, k, n_bloch_elements, n + 1)
    space = SearchSpace(k_grid=(k,), r=r, num_bloch_modes=n, n_bloch_elements=n_bloch_elements)

    def run(item: tuple[int, int]) -> ConvergenceRow:
        h, cells = item
        problem = PhysicalProblem.from_cells(alpha, cells, a, rho, elements_per_cell=elements_per_cell)
        band = prepare_candidates(cell, problem, space)
        chosen = np.flatnonzero(band.n == n)
        if not len(chosen):
            msg = f"Bloch mode n={n} at k={k} gives no two-scale candidate"
            raise EmptySearch(msg)
        # candidates are ordered by |macro ell - 2 l| within each n
        index = int(chosen[0])
        gamma = band.gamma[index]
        count = min((n + 1) * cells, problem.boundary.dof_count(problem.mesh))
        spectrum = solve_physical(problem, (1, count))
        targets = problem.epsilon**2 * spectrum.eigenvalues
        errors = np.abs(targets - gamma) / np.abs(targets)
        p_pos = int(np.argmin(errors))
        mode = band.two_scale_mode(index, problem)
        p = spectrum.indices[int(p_pos)]
        _, er_vector = align(spectrum.mode(p), mode.samples)
        er_value = float(errors[p_pos])
        logger.info("convergence h=%d (%d cells): p=%d er_value=%.3g er_vector=%.3g", h, cells, p, er_value, er_vector)
        return ConvergenceRow(
            h=int(h),
            epsilon=problem.epsilon,
            p=p,
            ell=int(band.window_ell[index]),
            lambda1=float(band.lambda1[index]),
            er_value=er_value,
            er_vector=er_vector,
        )

    rows = ordered_map(run, list(zip(h_list, cell_counts, strict=True)), workers=workers)
    epsilons = [row.epsilon for row in rows]
    q_value, c_value = decay_rates([row.er_value for row in rows], epsilons)
    q_vector, c_vector = decay_rates([row.er_vector for row in rows], epsilons)
    return ConvergenceReport(
        k=k,
        l=l,
        n=n,
        rows=tuple(rows),
        q_value=tuple(q_value),
        q_vector=tuple(q_vector),
        c_value=tuple(c_value),
        c_vector=tuple(c_vector),
    )
