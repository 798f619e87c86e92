"""Two-scale modes, the modulated two-scale transform, and the residual of a mode.

A two-scale mode pairs a Bloch eigenpair ``(λ_n^k, φ_n^k)`` with a macroscopic
solution ``(λ¹, u)``:

    γ = λ_n^k + ε λ¹,    ψ(x) = Σ_σ Σ_m u_m^σ(x) φ_m^σ(x / ε),

where ``φ(x / ε)`` is the quasi-periodic extension of the cell mode. ``ψ`` is sampled
at the nodes of a physical mesh; :func:`residual_F` then measures how far ``(γ, ψ)``
is from an eigenpair of the renormalized physical operator ``ε² P^ε``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from blochmodes.bloch_cell import CellSpectrum, conjugate_spectrum
from blochmodes.errors import DegenerateNormalization, MeshMismatch, ParameterMismatch
from blochmodes.fem1d import (
    Boundary,
    FEFunction,
    Mesh1D,
    assemble,
    evaluate,
    l2_inner,
    l2_norm,
    unit_mass,
)
from blochmodes.physical_spectrum import PhysicalProblem, cell_count

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

    from blochmodes.macro_solver import MacroSolution

logger = logging.getLogger(__name__)

_K_TOL = 1e-12
_DEFAULT_Y_ELEMENTS = 40


@dataclass(frozen=True, eq=False)
class TwoScaleMode:
    """An assembled two-scale approximation ``(γ, ψ)``.

    Parameters
    ----------
    k, n : float, int
        The Bloch wavenumber and mode index.
    ell : int
        The window label of the macroscopic index (see
        :meth:`~blochmodes.macro_solver.EpsilonDecomposition.macro_index`).
    epsilon : float
        The period.
    gamma : float
        ``λ_n^k + ε λ¹``.
    lambda_nk : float
        ``λ_n^k``.
    macro : MacroSolution
        The macroscopic eigenpair.
    cell : CellSpectrum
        The Bloch data used.
    samples : FEFunction
        ``ψ`` at every node of the physical mesh (free boundary treatment).
    """

    k: float
    n: int
    ell: int
    epsilon: float
    gamma: float
    lambda_nk: float
    macro: MacroSolution
    cell: CellSpectrum
    samples: FEFunction

    @property
    def lambda1(self) -> float:
        """``λ¹``."""
        return self.macro.lambda1


def eval_quasiperiodic(phi: FEFunction, k: float, epsilon: float, x: ArrayLike) -> NDArray[np.complex128]:
    """Evaluate the ``k``-quasi-periodic extension of a cell function at ``x / epsilon``.

    With ``t = x / ε``, ``cell = floor(t)`` and ``y = t - cell`` the value is
    ``φ(y) exp(2 i pi k cell)``.

    Raises
    ------
    ParameterMismatch
        If ``phi`` carries a quasi-periodic boundary with a different phase.
    """
    if phi.boundary.kind == "quasi_periodic" and abs(np.exp(2j * np.pi * k) - phi.boundary.phase) > _K_TOL:
        msg = f"function is {phi.boundary.tag}, cannot extend it with k={k}"
        raise ParameterMismatch(msg)
    t = np.asarray(x, dtype=np.float64) / epsilon
    cell = np.floor(t)
    y = np.clip(t - cell, 0.0, 1.0)
    return np.asarray(evaluate(phi, y)) * np.exp(2j * np.pi * k * cell)


def build_two_scale_mode(
    cell: CellSpectrum,
    macro: MacroSolution,
    epsilon: float,
    physical_mesh: Mesh1D,
    *,
    ell: int | None = None,
) -> TwoScaleMode:
    """Sample ``ψ`` at the nodes of ``physical_mesh``.

    For ``k != 0`` the ``-k`` term uses the conjugated Bloch data; for ``k = 0`` the sum
    runs over the pair ``{n, partner}``.

    Parameters
    ----------
    cell : CellSpectrum
        Bloch modes at ``macro.k``.
    macro : MacroSolution
        The macroscopic solution.
    epsilon : float
        The period.
    physical_mesh : Mesh1D
        Mesh whose nodes receive the samples.
    ell : int | None, optional
        Window label to record; defaults to ``macro.ell``.

    Raises
    ------
    ParameterMismatch
        If the wavenumber, mode index or pair do not match ``cell``.
    """
    if abs(macro.k - cell.k) > _K_TOL:
        msg = f"macroscopic solution is for k={macro.k}, Bloch data for k={cell.k}"
        raise ParameterMismatch(msg)
    if not 1 <= macro.n <= cell.num_modes:
        msg = f"mode n={macro.n} outside the {cell.num_modes} computed Bloch modes"
        raise ParameterMismatch(msg)
    x = physical_mesh.nodes
    amplitudes = macro.amplitudes(x)
    first = eval_quasiperiodic(cell.mode(macro.n), cell.k, epsilon, x)
    if macro.branch == "k_nonzero":
        partner = conjugate_spectrum(cell)
        second = eval_quasiperiodic(partner.mode(macro.n), partner.k, epsilon, x)
    elif macro.branch == "degenerate":
        second = np.zeros_like(first)
    else:
        if macro.partner is None or macro.partner not in cell.partners(macro.n):
            msg = f"mode {macro.partner} is not a multiplicity partner of mode {macro.n} at k={cell.k}"
            raise ParameterMismatch(msg)
        second = eval_quasiperiodic(cell.mode(macro.partner), cell.k, epsilon, x)
    psi = amplitudes[0] * first + amplitudes[1] * second

    lambda_nk = cell.eigenvalue(macro.n)
    return TwoScaleMode(
        k=cell.k,
        n=macro.n,
        ell=macro.ell if ell is None else int(ell),
        epsilon=epsilon,
        gamma=lambda_nk + epsilon * macro.lambda1,
        lambda_nk=lambda_nk,
        macro=macro,
        cell=cell,
        samples=FEFunction(physical_mesh, psi, Boundary.free()),
    )


@dataclass(frozen=True, eq=False)
class TwoScaleField:
    """Values of ``S_k^ε u`` on the tensor grid (cell index, ``y`` node).

    ``values[l, j]`` is ``u(x0 + ε (l + y_j)) exp(-2 i pi k l)``; the field is constant
    in ``x`` over each cell.
    """

    values: NDArray[np.complex128]
    k: float
    epsilon: float
    y_mesh: Mesh1D

    @property
    def num_cells(self) -> int:
        """Number of cells."""
        return int(self.values.shape[0])

    def cell_function(self, cell: int) -> FEFunction:
        """The ``y`` profile of one cell as a P2 function on the cell mesh."""
        return FEFunction(self.y_mesh, self.values[cell], Boundary.free())

    def norm_squared(self) -> float:
        """``‖S_k^ε u‖²`` over ``Omega × Y``."""
        mass = unit_mass(self.y_mesh)
        energy = np.einsum("lj,lj->", self.values.conj(), (mass @ self.values.T).T)
        return float(self.epsilon * energy.real)

    def conjugate(self) -> TwoScaleField:
        """The complex-conjugate field (the transform at ``-k`` of a real function)."""
        return TwoScaleField(np.conj(self.values), -self.k, self.epsilon, self.y_mesh)


def two_scale_transform(u: FEFunction, k: float, epsilon: float, y_elements: int | None = None) -> TwoScaleField:
    """The modulated two-scale transform ``S_k^ε u``.

    Parameters
    ----------
    u : FEFunction
        A function on ``Omega``, a whole number of ``epsilon``-cells.
    k : float
        Modulation wavenumber.
    epsilon : float
        The period.
    y_elements : int | None, optional
        Elements of the cell mesh; defaults to the physical elements per cell, which
        makes the discrete transform an exact isometry.

    Raises
    ------
    MeshCellMismatch
        If the domain is not a whole number of cells.
    """
    mesh = u.mesh
    cells = cell_count(mesh.domain_length, epsilon)
    if y_elements is None:
        y_elements = mesh.num_elements // cells if mesh.num_elements % cells == 0 else _DEFAULT_Y_ELEMENTS
    y_mesh = Mesh1D.unit_cell(y_elements)
    index = np.arange(cells)
    points = mesh.domain_start + epsilon * (index[:, None] + y_mesh.nodes[None, :])
    points = np.clip(points, mesh.domain_start, mesh.domain_end)
    values = np.asarray(evaluate(u, points)) * np.exp(-2j * np.pi * k * index)[:, None]
    return TwoScaleField(values=values, k=k, epsilon=epsilon, y_mesh=y_mesh)


@lru_cache(maxsize=8)
def _residual_operators(
    problem: PhysicalProblem,
) -> tuple[scipy.sparse.csr_array, scipy.sparse.csr_array, scipy.sparse.linalg.SuperLU]:
    """Test-function rows of ``K`` and ``M`` over all nodes, and a factorization of the test mass."""
    free = assemble(problem.mesh, problem.a, problem.rho, Boundary.free(), epsilon=problem.epsilon)
    tests = problem.boundary.active_nodes(problem.mesh)
    stiffness_rows = scipy.sparse.csr_array(free.stiffness[tests])
    mass_rows = scipy.sparse.csr_array(free.mass[tests])
    test_mass = scipy.sparse.csc_array(mass_rows[:, tests])
    return stiffness_rows, mass_rows, scipy.sparse.linalg.splu(test_mass)


def residual_F(mode: TwoScaleMode, problem: PhysicalProblem) -> float:  # noqa: N802
    """The relative residual ``‖ε² P^ε ψ - γ ρ^ε ψ‖ / ‖γ ρ^ε ψ‖`` in weak form.

    Both norms are dual norms ``‖·‖_{M^-1}`` over the discrete test functions of
    ``problem``: the numerator of ``ε² K ψ - γ M ψ``, the denominator of ``γ M ψ``.

    Raises
    ------
    MeshMismatch
        If ``mode`` was not sampled on the mesh of ``problem``.
    DegenerateNormalization
        If ``γ = 0`` or ``ψ`` vanishes on the test nodes.
    """
    if mode.samples.mesh != problem.mesh:
        msg = "the two-scale mode was sampled on a different mesh than the problem's"
        raise MeshMismatch(msg)
    if mode.gamma == 0.0:
        msg = "gamma = 0: the relative residual is undefined"
        raise DegenerateNormalization(msg)
    stiffness_rows, mass_rows, factor = _residual_operators(problem)
    psi = mode.samples.nodal_values
    mass_psi = mass_rows @ psi
    residual = problem.epsilon**2 * (stiffness_rows @ psi) - mode.gamma * mass_psi
    reference = abs(mode.gamma) * np.sqrt(max(np.vdot(mass_psi, factor.solve(mass_psi)).real, 0.0))
    if reference == 0.0:
        msg = "the two-scale mode vanishes on the test nodes"
        raise DegenerateNormalization(msg)
    dual = np.sqrt(max(np.vdot(residual, factor.solve(residual)).real, 0.0))
    return float(dual / reference)


def align(w: FEFunction, psi: FEFunction) -> tuple[complex, float]:
    """Least-squares alignment of ``psi`` onto ``w``.

    Returns
    -------
    tuple[complex, float]
        ``s* = <w, ψ> / ‖ψ‖²`` minimizing ``‖w - s ψ‖``, and the relative vector error
        ``‖w - s* ψ‖_{L²} / max|w|`` (maximum over the nodes).

    Raises
    ------
    DegenerateNormalization
        If ``psi`` or ``w`` is zero.
    """
    norm_psi = l2_inner(psi, psi).real
    peak = float(np.max(np.abs(w.nodal_values)))
    if norm_psi == 0.0 or peak == 0.0:
        msg = "cannot align against a zero function"
        raise DegenerateNormalization(msg)
    scale = l2_inner(w, psi) / norm_psi
    difference = FEFunction(w.mesh, w.nodal_values - scale * psi.nodal_values, Boundary.free())
    return complex(scale), l2_norm(difference) / peak
