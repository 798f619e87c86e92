"""The Bloch cell problem: quasi-periodic eigenmodes of the unit cell and their couplings.

For a wavenumber ``k`` in ``[-1/2, 1/2)`` the cell problem is

    -(a φ')' = λ rho φ on Y = (0, 1),    φ(1) = exp(2 i pi k) φ(0)  (and likewise φ'),

whose eigenvalues ``λ_n^k`` (ascending, ``n = 1, 2, ...``) trace the band diagram.
Modes are normalized to unit ``L^2(Y)`` norm and rotated so that ``φ(0) >= 0``. Real
pencils (``k = 0``) are solved in real arithmetic, so their modes, including both
members of a double eigenvalue, come out real.

:func:`coupling` computes the coefficients of the macroscopic equations,

    c(k, n, m) = ∫ a (φ_m' conj(φ_n) - φ_m conj(φ_n')),    b(k, n, m) = ∫ rho φ_m conj(φ_n).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from blochmodes.errors import SolverFailure
from blochmodes.fem1d import (
    Boundary,
    FEFunction,
    Mesh1D,
    assemble,
    fix_phase,
    normalized,
    solve_pencil,
    validate_wavenumber,
    values_at_quadrature,
)
from blochmodes.parallel import ordered_map

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import NDArray

    from blochmodes.coefficients import CoefficientProfile

logger = logging.getLogger(__name__)

GROUP_RTOL = 1e-8
"""Relative eigenvalue gap below which two Bloch eigenvalues are treated as equal."""


@dataclass(frozen=True, eq=False)
class CellSpectrum:
    """The lowest Bloch eigenpairs at one wavenumber.

    Mode indices ``n`` are 1-based throughout.

    Parameters
    ----------
    k : float
        The wavenumber.
    eigenvalues : NDArray[np.float64]
        Ascending ``λ_n^k``.
    modes : tuple[FEFunction, ...]
        The normalized, phase-fixed ``φ_n^k``.
    mesh : Mesh1D
        The cell mesh.
    multiplicity_groups : tuple[tuple[int, ...], ...]
        Indices sharing an eigenvalue, in ascending order.
    """

    k: float
    eigenvalues: NDArray[np.float64]
    modes: tuple[FEFunction, ...]
    mesh: Mesh1D
    multiplicity_groups: tuple[tuple[int, ...], ...]

    @property
    def num_modes(self) -> int:
        """Number of stored modes."""
        return len(self.modes)

    def _check(self, n: int) -> int:
        if not 1 <= n <= self.num_modes:
            msg = f"mode index {n} outside 1..{self.num_modes} at k={self.k}"
            raise IndexError(msg)
        return n - 1

    def eigenvalue(self, n: int) -> float:
        """``λ_n^k``."""
        return float(self.eigenvalues[self._check(n)])

    def mode(self, n: int) -> FEFunction:
        """``φ_n^k``."""
        return self.modes[self._check(n)]

    def phi_at_origin(self, n: int) -> complex:
        """``φ_n^k(0)``."""
        return complex(self.mode(n).nodal_values[0])

    def group_of(self, n: int) -> tuple[int, ...]:
        """The multiplicity group containing ``n``."""
        self._check(n)
        return next(group for group in self.multiplicity_groups if n in group)

    def partners(self, n: int) -> tuple[int, ...]:
        """The other members of ``n``'s multiplicity group."""
        return tuple(m for m in self.group_of(n) if m != n)

    def is_simple(self, n: int) -> bool:
        """Whether ``λ_n^k`` is a simple eigenvalue (among the stored modes)."""
        return len(self.group_of(n)) == 1


@dataclass(frozen=True, eq=False)
class CouplingCoefficients:
    """The matrices ``c(k, n, m)`` and ``b(k, n, m)`` over a set of mode indices.

    ``c[i, j]`` pairs ``n = indices[i]`` with ``m = indices[j]``.
    """

    k: float
    indices: tuple[int, ...]
    c: NDArray[np.complex128]
    b: NDArray[np.complex128]

    def c_of(self, n: int, m: int) -> complex:
        """``c(k, n, m)``."""
        return complex(self.c[self.indices.index(n), self.indices.index(m)])

    def b_of(self, n: int, m: int) -> complex:
        """``b(k, n, m)``."""
        return complex(self.b[self.indices.index(n), self.indices.index(m)])


def multiplicity_groups(eigenvalues: NDArray[np.float64], rtol: float = GROUP_RTOL) -> tuple[tuple[int, ...], ...]:
    """Partition 1-based indices of ascending eigenvalues into clusters of equal values."""
    groups: list[list[int]] = []
    for i, value in enumerate(eigenvalues):
        if groups and abs(value - eigenvalues[i - 1]) <= rtol * max(1.0, abs(eigenvalues[i - 1])):
            groups[-1].append(i + 1)
        else:
            groups.append([i + 1])
    return tuple(tuple(group) for group in groups)


def solve_cell(
    a: CoefficientProfile,
    rho: CoefficientProfile,
    k: float,
    n_elements: int,
    num_modes: int,
) -> CellSpectrum:
    """Solve the cell problem at wavenumber ``k``.

    Parameters
    ----------
    a, rho : CoefficientProfile
        The periodic coefficients.
    k : float
        Wavenumber in ``[-1/2, 1/2)``.
    n_elements : int
        Number of P2 elements on the cell.
    num_modes : int
        Number of lowest eigenpairs to keep.

    Returns
    -------
    CellSpectrum
        The eigenpairs with grouped multiplicities.

    Raises
    ------
    InvalidWavenumber
        If ``k`` is outside ``[-1/2, 1/2)``.
    SolverFailure
        If the eigensolver fails.
    """
    k = validate_wavenumber(k)
    if num_modes < 1:
        msg = f"num_modes must be at least 1, got {num_modes}"
        raise ValueError(msg)
    mesh = Mesh1D.unit_cell(n_elements)
    pencil = assemble(mesh, a, rho, Boundary.quasi_periodic(k))
    pairs = solve_pencil(pencil, num_modes)
    eigenvalues = np.array([value for value, _ in pairs])
    modes = tuple(fix_phase(normalized(mode), anchor=0) for _, mode in pairs)
    groups = multiplicity_groups(eigenvalues)
    logger.debug("cell problem at k=%g: %d modes, %d groups", k, num_modes, len(groups))
    return CellSpectrum(k=k, eigenvalues=eigenvalues, modes=modes, mesh=mesh, multiplicity_groups=groups)


def conjugate_spectrum(s: CellSpectrum) -> CellSpectrum:
    """The spectrum at ``-k`` obtained by conjugating the modes (``φ_n^{-k} = conj(φ_n^k)``).

    No eigensolve is performed; eigenvalues and groups are shared. ``k = -1/2`` maps
    to itself.
    """
    k = -s.k if s.k != -0.5 else -0.5  # noqa: PLR2004
    return CellSpectrum(
        k=k,
        eigenvalues=s.eigenvalues,
        modes=tuple(mode.conjugate() for mode in s.modes),
        mesh=s.mesh,
        multiplicity_groups=s.multiplicity_groups,
    )


def coupling(
    s: CellSpectrum,
    a: CoefficientProfile,
    rho: CoefficientProfile,
    indices: Sequence[int] | None = None,
) -> CouplingCoefficients:
    """Compute ``c(k, n, m)`` and ``b(k, n, m)`` for every pair of ``indices``.

    The integrals use the assembly quadrature and P2 derivatives.

    Parameters
    ----------
    s : CellSpectrum
        The Bloch modes.
    a, rho : CoefficientProfile
        The coefficients the modes were computed with.
    indices : Sequence[int] | None, optional
        1-based mode indices; all modes by default.

    Returns
    -------
    CouplingCoefficients
        Skew-Hermitian ``c`` and Hermitian ``b``.
    """
    chosen = tuple(indices) if indices is not None else tuple(range(1, s.num_modes + 1))
    values = []
    slopes = []
    for n in chosen:
        value, slope = values_at_quadrature(s.mode(n))
        values.append(value.ravel())
        slopes.append(slope.ravel())
    f = np.array(values)
    d = np.array(slopes)
    weights = s.mesh.quadrature_weights.ravel()
    points = s.mesh.quadrature_points.ravel()
    wa = weights * a(points)
    wrho = weights * rho(points)
    c = (f.conj() * wa) @ d.T - (d.conj() * wa) @ f.T
    b = (f.conj() * wrho) @ f.T
    return CouplingCoefficients(k=s.k, indices=chosen, c=c, b=b)


def band_sweep(
    a: CoefficientProfile,
    rho: CoefficientProfile,
    k_grid: Sequence[float],
    n_elements: int,
    num_modes: int,
    *,
    workers: int = 1,
) -> list[CellSpectrum]:
    """Solve the cell problem for every wavenumber of ``k_grid``, in grid order.

    Raises
    ------
    InvalidWavenumber
        If a grid point is outside ``[-1/2, 1/2)`` (checked before any solve).
    SolverFailure
        If any solve fails; the message lists every failing ``k``.
    """
    grid = [validate_wavenumber(k) for k in k_grid]

    def solve(k: float) -> CellSpectrum | SolverFailure:
        try:
            return solve_cell(a, rho, k, n_elements, num_modes)
        except SolverFailure as exc:
            return exc

    results = ordered_map(solve, grid, workers=workers)
    failures = [(k, result) for k, result in zip(grid, results, strict=True) if isinstance(result, SolverFailure)]
    if failures:
        msg = "cell solves failed at " + "; ".join(f"k={k}: {exc}" for k, exc in failures)
        raise SolverFailure(msg, {"failed_k": [k for k, _ in failures]})
    logger.info("band sweep: %d wavenumbers, %d modes each", len(grid), num_modes)
    return [result for result in results if isinstance(result, CellSpectrum)]


def uniform_k_grid(step: float | None = None, *, count: int | None = None) -> list[float]:
    """The grid ``{0, step, 2 step, ...}`` of wavenumbers below ``1/2``.

    Give either ``step`` or ``count`` (the grid ``{j / count}`` for ``j / count < 1/2``;
    ``count = 125`` gives ``{0, 1/125, ..., 62/125}``).
    """
    if (step is None) == (count is None):
        msg = "give exactly one of step or count"
        raise ValueError(msg)
    if count is not None:
        if count < 1:
            msg = f"count must be positive, got {count}"
            raise ValueError(msg)
        return [j / count for j in range((count + 1) // 2)]
    assert step is not None
    if not step > 0.0:
        msg = f"step must be positive, got {step}"
        raise ValueError(msg)
    num = int(np.ceil(0.5 / step - 1e-9))
    return [j * step for j in range(num) if j * step < 0.5]  # noqa: PLR2004
