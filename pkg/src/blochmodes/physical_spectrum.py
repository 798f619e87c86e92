"""The physical spectral problem in an ``epsilon``-periodic medium.

On ``Omega = (0, alpha)`` made of ``alpha / epsilon`` whole cells,

    -(a(x / eps) w')' = λ rho(x / eps) w,    w(0) = w(alpha) = 0  (or Neumann),

solved with P2 elements aligned on the cell boundaries. Eigenvectors are normalized
to unit ``L^2(Omega)`` norm and rotated so their first interior nodal value is
positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np

from blochmodes.errors import MeshCellMismatch
from blochmodes.fem1d import (
    Boundary,
    FEFunction,
    HermitianPencil,
    Mesh1D,
    assemble,
    fix_phase,
    h1_seminorm,
    normalized,
    solve_pencil,
)

if TYPE_CHECKING:
    from numpy.typing import NDArray

    from blochmodes.coefficients import CoefficientProfile

logger = logging.getLogger(__name__)

PHYSICAL_BCS = ("dirichlet", "neumann")
_CELL_TOL = 1e-9  # relative slack on alpha / epsilon being an integer


def cell_count(alpha: float, epsilon: float) -> int:
    """Return ``alpha / epsilon`` if it is a positive integer (within ``1e-9``).

    Raises
    ------
    MeshCellMismatch
        If the domain is not a whole number of cells.
    """
    if alpha <= 0.0 or epsilon <= 0.0:
        msg = f"alpha and epsilon must be positive, got alpha={alpha}, epsilon={epsilon}"
        raise MeshCellMismatch(msg)
    ratio = alpha / epsilon
    cells = round(ratio)
    if cells < 1 or abs(ratio - cells) > _CELL_TOL * max(1.0, ratio):
        msg = f"alpha / epsilon = {ratio} is not a whole number of cells"
        raise MeshCellMismatch(msg)
    return int(cells)


@dataclass(frozen=True)
class PhysicalProblem:
    """A physical problem: domain, period, coefficients, boundary condition and mesh size.

    Parameters
    ----------
    alpha : float
        Domain length, ``Omega = (0, alpha)``.
    epsilon : float
        Period of the medium; ``alpha / epsilon`` must be an integer.
    a, rho : CoefficientProfile
        Cell coefficients; the medium uses ``a(x / epsilon)`` and ``rho(x / epsilon)``.
    bc : str
        ``"dirichlet"`` or ``"neumann"``.
    n_elements : int
        Number of P2 elements; a multiple of the cell count.
    """

    alpha: float
    epsilon: float
    a: CoefficientProfile
    rho: CoefficientProfile
    bc: str = "dirichlet"
    n_elements: int = 2000

    def __post_init__(self) -> None:
        """Check cell alignment and the boundary condition."""
        if self.bc not in PHYSICAL_BCS:
            msg = f"physical boundary condition must be one of {list(PHYSICAL_BCS)}, got {self.bc!r}"
            raise ValueError(msg)
        cells = cell_count(self.alpha, self.epsilon)
        if self.n_elements < 1 or self.n_elements % cells:
            msg = f"{self.n_elements} elements do not split evenly over {cells} cells"
            raise MeshCellMismatch(msg)

    @classmethod
    def from_cells(
        cls,
        alpha: float,
        num_cells: int,
        a: CoefficientProfile,
        rho: CoefficientProfile,
        *,
        elements_per_cell: int = 40,
        bc: str = "dirichlet",
    ) -> PhysicalProblem:
        """Build a problem from a cell count instead of a period."""
        return cls(alpha, alpha / num_cells, a, rho, bc=bc, n_elements=num_cells * elements_per_cell)

    @property
    def num_cells(self) -> int:
        """Number of cells in the domain."""
        return cell_count(self.alpha, self.epsilon)

    @property
    def elements_per_cell(self) -> int:
        """Number of elements per cell."""
        return self.n_elements // self.num_cells

    @property
    def mesh(self) -> Mesh1D:
        """The physical mesh on ``(0, alpha)``."""
        return Mesh1D(0.0, self.alpha, self.n_elements)

    @property
    def boundary(self) -> Boundary:
        """The boundary treatment of the degrees of freedom."""
        return Boundary(self.bc)

    def with_cells(self, num_cells: int) -> PhysicalProblem:
        """The same medium with ``num_cells`` cells and the same resolution per cell."""
        return replace(self, epsilon=self.alpha / num_cells, n_elements=num_cells * self.elements_per_cell)


@lru_cache(maxsize=8)
def physical_pencil(problem: PhysicalProblem) -> HermitianPencil:
    """The assembled pencil of ``problem`` (cached; problems are immutable)."""
    return assemble(problem.mesh, problem.a, problem.rho, problem.boundary, epsilon=problem.epsilon)


@dataclass(frozen=True, eq=False)
class PhysicalSpectrum:
    """A slice of the physical spectrum.

    Parameters
    ----------
    problem : PhysicalProblem
        The problem that was solved.
    indices : tuple[int, ...]
        The 1-based ranks ``p`` that were computed.
    eigenvalues : NDArray[np.float64]
        ``λ_p^ε`` for each index.
    modes : tuple[FEFunction, ...]
        ``w_p^ε`` for each index, unit ``L^2`` norm.
    """

    problem: PhysicalProblem
    indices: tuple[int, ...]
    eigenvalues: NDArray[np.float64]
    modes: tuple[FEFunction, ...]

    def _position(self, p: int) -> int:
        if p not in self.indices:
            msg = f"mode {p} was not computed (have {self.indices[0]}..{self.indices[-1]})"
            raise IndexError(msg)
        return self.indices.index(p)

    def eigenvalue(self, p: int) -> float:
        """``λ_p^ε``."""
        return float(self.eigenvalues[self._position(p)])

    def mode(self, p: int) -> FEFunction:
        """``w_p^ε``."""
        return self.modes[self._position(p)]


def solve_physical(problem: PhysicalProblem, mode_range: tuple[int, int]) -> PhysicalSpectrum:
    """Solve for the eigenpairs ``p = first .. last`` (1-based, inclusive).

    Parameters
    ----------
    problem : PhysicalProblem
        The problem.
    mode_range : tuple[int, int]
        ``(first, last)`` ranks in ascending eigenvalue order.

    Returns
    -------
    PhysicalSpectrum
        The normalized, phase-fixed eigenpairs.

    Raises
    ------
    ValueError
        If the range is empty or beyond the degree-of-freedom count.
    SolverFailure
        If the eigensolver fails.
    """
    first, last = mode_range
    if first < 1 or last < first:
        msg = f"mode range must satisfy 1 <= first <= last, got {mode_range}"
        raise ValueError(msg)
    pencil = physical_pencil(problem)
    pairs = solve_pencil(pencil, last - first + 1, start=first - 1)
    logger.info(
        "physical problem: %d cells, %d elements, modes %d..%d",
        problem.num_cells,
        problem.n_elements,
        first,
        last,
    )
    return PhysicalSpectrum(
        problem=problem,
        indices=tuple(range(first, last + 1)),
        eigenvalues=np.array([value for value, _ in pairs]),
        modes=tuple(fix_phase(normalized(mode), anchor=1) for _, mode in pairs),
    )


def renormalized_eigenvalue(spectrum: PhysicalSpectrum, p: int) -> float:
    """``ε² λ_p^ε``, whose limit is a Bloch eigenvalue."""
    return spectrum.problem.epsilon**2 * spectrum.eigenvalue(p)


def gradient_bound_check(spectrum: PhysicalSpectrum, p: int) -> float:
    """``‖ε ∂x w_p^ε‖_{L²(Ω)}``, which stays bounded for modes with a two-scale description."""
    return spectrum.problem.epsilon * h1_seminorm(spectrum.mode(p))
