"""Quadratic (P2) finite elements on a uniform 1-D mesh.

The kernel behind every spectral solve in the package:

- :class:`Mesh1D`: ``num_elements`` equal elements, ``2 * num_elements + 1`` nodes
  (vertices and midpoints, in order).
- :class:`Boundary`: how nodal values map to active degrees of freedom. Dirichlet
  drops both end nodes, ``quasi_periodic(k)`` ties the last node to the first with
  the phase ``exp(2 i pi k)``, Neumann and free keep every node.
- :func:`assemble`: the stiffness ``K_ij = ∫ a φ_j' conj(φ_i')`` and mass
  ``M_ij = ∫ rho φ_j conj(φ_i)`` with 3-point Gauss-Legendre quadrature per element,
  reduced to the active degrees of freedom as ``P^H K P``.
- :func:`solve_pencil`: the lowest eigenpairs of ``K v = lambda M v``.
- :class:`FEFunction` with :func:`evaluate`, :func:`l2_inner` and friends.

Everything is complex, including problems whose matrices happen to be real.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from functools import lru_cache
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from blochmodes.errors import (
    DegenerateNormalization,
    InvalidCoefficient,
    InvalidWavenumber,
    MeshMismatch,
    OutOfDomain,
    SolverFailure,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

logger = logging.getLogger(__name__)

BOUNDARY_KINDS = ("dirichlet", "neumann", "free", "quasi_periodic")
"""The supported boundary treatments."""

DENSE_DOF_LIMIT = 4000
"""Pencils up to this many degrees of freedom are solved with a dense Hermitian solver."""

_DOMAIN_TOL = 1e-12  # relative slack when locating points at the domain ends
_PHASE_TOL = 1e-8  # below this fraction of the largest node, the anchor value is treated as zero
_SHIFT = -1.0  # shift-invert target below the spectrum of every pencil we build

# 3-point Gauss-Legendre rule mapped to the reference element [0, 1]
_GAUSS_POINTS, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(3)
QUAD_POINTS: NDArray[np.float64] = 0.5 * (_GAUSS_POINTS + 1.0)
QUAD_WEIGHTS: NDArray[np.float64] = 0.5 * _GAUSS_WEIGHTS


def shape_values(xi: ArrayLike) -> NDArray[np.float64]:
    """P2 Lagrange shape functions on ``[0, 1]`` (nodes 0, 1/2, 1), shape ``(3, *xi.shape)``."""
    xi = np.asarray(xi, dtype=np.float64)
    return np.stack([(1.0 - xi) * (1.0 - 2.0 * xi), 4.0 * xi * (1.0 - xi), xi * (2.0 * xi - 1.0)])


def shape_derivatives(xi: ArrayLike) -> NDArray[np.float64]:
    """Derivatives of :func:`shape_values` with respect to ``xi``."""
    xi = np.asarray(xi, dtype=np.float64)
    return np.stack([4.0 * xi - 3.0, 4.0 - 8.0 * xi, 4.0 * xi - 1.0])


_N_Q = shape_values(QUAD_POINTS)  # (shape, quad point)
_DN_Q = shape_derivatives(QUAD_POINTS)


@dataclass(frozen=True)
class Mesh1D:
    """A uniform P2 mesh of the interval ``[domain_start, domain_start + domain_length]``.

    Parameters
    ----------
    domain_start : float
        Left end of the interval.
    domain_length : float
        Length of the interval (``alpha`` for the physical domain, ``1`` for the cell).
    num_elements : int
        Number of elements.
    """

    domain_start: float
    domain_length: float
    num_elements: int

    def __post_init__(self) -> None:
        """Validate the mesh parameters."""
        if self.num_elements < 1:
            msg = f"a mesh needs at least one element, got {self.num_elements}"
            raise ValueError(msg)
        if not self.domain_length > 0.0:
            msg = f"domain length must be positive, got {self.domain_length}"
            raise ValueError(msg)

    @classmethod
    def unit_cell(cls, num_elements: int) -> Mesh1D:
        """A mesh of the reference cell ``Y = (0, 1)``."""
        return cls(0.0, 1.0, num_elements)

    @property
    def h(self) -> float:
        """Element length."""
        return self.domain_length / self.num_elements

    @property
    def domain_end(self) -> float:
        """Right end of the interval."""
        return self.domain_start + self.domain_length

    @property
    def num_nodes(self) -> int:
        """Number of nodes (vertices plus midpoints)."""
        return 2 * self.num_elements + 1

    @property
    def nodes(self) -> NDArray[np.float64]:
        """Node coordinates, strictly increasing from ``domain_start`` to ``domain_end``."""
        return np.linspace(self.domain_start, self.domain_end, self.num_nodes)

    @property
    def element_nodes(self) -> NDArray[np.int64]:
        """Global node indices of every element, shape ``(num_elements, 3)``."""
        return 2 * np.arange(self.num_elements)[:, None] + np.arange(3)[None, :]

    @property
    def quadrature_points(self) -> NDArray[np.float64]:
        """Physical quadrature points, shape ``(num_elements, 3)``."""
        left = self.domain_start + self.h * np.arange(self.num_elements)
        return left[:, None] + self.h * QUAD_POINTS[None, :]

    @property
    def quadrature_weights(self) -> NDArray[np.float64]:
        """Physical quadrature weights, shape ``(num_elements, 3)``."""
        return np.broadcast_to(self.h * QUAD_WEIGHTS, (self.num_elements, 3))


@dataclass(frozen=True)
class Boundary:
    """A boundary treatment: which nodes are degrees of freedom and how the others follow.

    Use the factories :meth:`dirichlet`, :meth:`neumann`, :meth:`free` and
    :meth:`quasi_periodic`.
    """

    kind: str
    k: float = 0.0

    def __post_init__(self) -> None:
        """Validate the kind and the wavenumber."""
        if self.kind not in BOUNDARY_KINDS:
            msg = f"unknown boundary kind {self.kind!r}; choose from {list(BOUNDARY_KINDS)}"
            raise ValueError(msg)
        if self.kind == "quasi_periodic":
            validate_wavenumber(self.k)

    @classmethod
    def dirichlet(cls) -> Boundary:
        """Homogeneous Dirichlet conditions at both ends."""
        return cls("dirichlet")

    @classmethod
    def neumann(cls) -> Boundary:
        """Natural (homogeneous Neumann) conditions at both ends."""
        return cls("neumann")

    @classmethod
    def free(cls) -> Boundary:
        """No constraint; used to carry sampled functions."""
        return cls("free")

    @classmethod
    def quasi_periodic(cls, k: float) -> Boundary:
        """``u(end) = exp(2 i pi k) u(start)`` with ``k`` in ``[-1/2, 1/2)``."""
        return cls("quasi_periodic", float(k))

    @property
    def tag(self) -> str:
        """Short human-readable label."""
        return f"quasi_periodic({self.k!r})" if self.kind == "quasi_periodic" else self.kind

    @property
    def phase(self) -> complex:
        """The Bloch phase ``exp(2 i pi k)`` (``1`` for other kinds)."""
        return complex(np.exp(2j * np.pi * self.k)) if self.kind == "quasi_periodic" else 1.0 + 0.0j

    def conjugate(self) -> Boundary:
        """The treatment satisfied by complex conjugates of functions obeying this one."""
        if self.kind != "quasi_periodic":
            return self
        # k = -1/2 is its own conjugate: both phases equal -1
        return Boundary.quasi_periodic(-self.k if self.k != -0.5 else -0.5)  # noqa: PLR2004

    def active_nodes(self, mesh: Mesh1D) -> NDArray[np.int64]:
        """Indices of the nodes that are degrees of freedom."""
        if self.kind == "dirichlet":
            return np.arange(1, mesh.num_nodes - 1)
        if self.kind == "quasi_periodic":
            return np.arange(mesh.num_nodes - 1)
        return np.arange(mesh.num_nodes)

    def dof_count(self, mesh: Mesh1D) -> int:
        """Number of degrees of freedom on ``mesh``."""
        return len(self.active_nodes(mesh))

    def prolongation(self, mesh: Mesh1D) -> scipy.sparse.csr_array:
        """Sparse ``(num_nodes, dof_count)`` map from degrees of freedom to nodal values."""
        active = self.active_nodes(mesh)
        rows = list(active)
        cols = list(range(len(active)))
        data: list[complex] = [1.0 + 0.0j] * len(active)
        if self.kind == "quasi_periodic":
            rows.append(mesh.num_nodes - 1)
            cols.append(0)
            data.append(self.phase)
        return scipy.sparse.csr_array(
            (np.asarray(data, dtype=np.complex128), (np.asarray(rows), np.asarray(cols))),
            shape=(mesh.num_nodes, len(active)),
        )

    def extend(self, mesh: Mesh1D, coefficients: NDArray[np.complex128]) -> NDArray[np.complex128]:
        """Reconstruct all nodal values from the degrees of freedom."""
        nodal = np.zeros(mesh.num_nodes, dtype=np.complex128)
        nodal[self.active_nodes(mesh)] = coefficients
        if self.kind == "quasi_periodic":
            nodal[-1] = self.phase * coefficients[0]
        return nodal

    def restrict(self, mesh: Mesh1D, nodal: ArrayLike) -> NDArray[np.complex128]:
        """Pick the degree-of-freedom values out of a full nodal vector."""
        return np.asarray(nodal, dtype=np.complex128)[self.active_nodes(mesh)]


def validate_wavenumber(k: float) -> float:
    """Return ``k`` if it lies in the reduced zone ``[-1/2, 1/2)``.

    Raises
    ------
    InvalidWavenumber
        If ``k`` is outside ``[-1/2, 1/2)`` or not finite.
    """
    if not np.isfinite(k) or not -0.5 <= k < 0.5:  # noqa: PLR2004
        msg = f"wavenumber must lie in [-1/2, 1/2), got {k}"
        raise InvalidWavenumber(msg)
    return float(k)


@dataclass(frozen=True, eq=False)
class FEFunction:
    """A P2 function given by its degree-of-freedom coefficients.

    Parameters
    ----------
    mesh : Mesh1D
        The mesh the function lives on.
    coefficients : NDArray[np.complex128]
        One value per active degree of freedom of ``(mesh, boundary)``.
    boundary : Boundary
        The boundary treatment, so eliminated nodes can be reconstructed.
    """

    mesh: Mesh1D
    coefficients: NDArray[np.complex128]
    boundary: Boundary = field(default_factory=Boundary.free)

    def __post_init__(self) -> None:
        """Check the coefficient count."""
        expected = self.boundary.dof_count(self.mesh)
        if np.shape(self.coefficients) != (expected,):
            msg = (
                f"{self.boundary.tag} function on {self.mesh.num_elements} elements needs {expected} "
                f"coefficients, got shape {np.shape(self.coefficients)}"
            )
            raise MeshMismatch(msg)

    @property
    def nodal_values(self) -> NDArray[np.complex128]:
        """Values at every mesh node, eliminated ones included."""
        return self.boundary.extend(self.mesh, self.coefficients)

    def scaled(self, factor: complex) -> FEFunction:
        """Return ``factor * self``."""
        return FEFunction(self.mesh, factor * self.coefficients, self.boundary)

    def conjugate(self) -> FEFunction:
        """Return the complex conjugate (with the conjugate boundary treatment)."""
        return FEFunction(self.mesh, np.conj(self.coefficients), self.boundary.conjugate())

    def as_free(self) -> FEFunction:
        """The same function carried on every node (free boundary treatment)."""
        return FEFunction(self.mesh, self.nodal_values, Boundary.free())


@dataclass(frozen=True, eq=False)
class HermitianPencil:
    """The matrices of a generalized Hermitian eigenproblem ``K v = lambda M v``.

    Parameters
    ----------
    stiffness : scipy.sparse.csr_array
        The Hermitian stiffness matrix ``K``.
    mass : scipy.sparse.csr_array
        The Hermitian positive-definite mass matrix ``M``.
    mesh : Mesh1D
        The mesh it was assembled on.
    boundary : Boundary
        The boundary treatment of the degrees of freedom.
    """

    stiffness: scipy.sparse.csr_array
    mass: scipy.sparse.csr_array
    mesh: Mesh1D
    boundary: Boundary

    @property
    def dof_count(self) -> int:
        """Number of degrees of freedom."""
        return int(self.mass.shape[0])

    @property
    def is_real(self) -> bool:
        """Whether both matrices have zero imaginary part."""
        return not (np.any(self.stiffness.data.imag) or np.any(self.mass.data.imag))

    def hermitian_defect(self) -> float:
        """Largest relative deviation ``max|A - A^H| / max|A|`` over ``K`` and ``M``."""
        defects = []
        for matrix in (self.stiffness, self.mass):
            scale = abs(matrix).max() or 1.0
            defects.append(abs(matrix - matrix.conj().T).max() / scale)
        return float(max(defects))

    def diagnostics(self) -> dict[str, Any]:
        """Facts about the pencil worth reporting when a solve fails."""
        return {
            "dof_count": self.dof_count,
            "boundary": self.boundary.tag,
            "num_elements": self.mesh.num_elements,
            "domain_length": self.mesh.domain_length,
        }


Coefficient = Callable[[Any], "NDArray[np.float64]"]


def assemble(
    mesh: Mesh1D,
    a: Coefficient,
    rho: Coefficient,
    bc: Boundary,
    *,
    epsilon: float = 1.0,
) -> HermitianPencil:
    """Assemble the stiffness and mass matrices of ``-(a u')' = lambda rho u``.

    Parameters
    ----------
    mesh : Mesh1D
        The mesh.
    a, rho : Callable
        Coefficient functions of the cell variable (e.g. :class:`CoefficientProfile`);
        they are evaluated at ``x / epsilon``.
    bc : Boundary
        The boundary treatment.
    epsilon : float, optional
        Period of the medium on ``mesh`` (``1`` on the unit cell).

    Returns
    -------
    HermitianPencil
        The reduced pencil ``(P^H K P, P^H M P)``.

    Raises
    ------
    InvalidCoefficient
        If ``a`` or ``rho`` is not positive at some quadrature point.
    """
    points = mesh.quadrature_points / epsilon
    a_q = np.asarray(a(points), dtype=np.float64)
    rho_q = np.asarray(rho(points), dtype=np.float64)
    for name, samples in (("a", a_q), ("rho", rho_q)):
        if not np.all(np.isfinite(samples)) or np.any(samples <= 0.0):
            msg = f"coefficient {name} must be positive at every quadrature point (min {np.min(samples)})"
            raise InvalidCoefficient(msg)

    h = mesh.h
    # element matrices, shape (element, i, j)
    k_elem = np.einsum("eq,q,iq,jq->eij", a_q, QUAD_WEIGHTS, _DN_Q, _DN_Q) / h
    m_elem = np.einsum("eq,q,iq,jq->eij", rho_q, QUAD_WEIGHTS, _N_Q, _N_Q) * h
    stiffness = _scatter(mesh, k_elem)
    mass = _scatter(mesh, m_elem)

    prolong = bc.prolongation(mesh)
    restrict = prolong.conj().T
    pencil = HermitianPencil(
        stiffness=scipy.sparse.csr_array(restrict @ stiffness @ prolong),
        mass=scipy.sparse.csr_array(restrict @ mass @ prolong),
        mesh=mesh,
        boundary=bc,
    )
    logger.debug("assembled %s pencil with %d dofs on %d elements", bc.tag, pencil.dof_count, mesh.num_elements)
    return pencil


def _scatter(mesh: Mesh1D, element_matrices: NDArray[np.float64]) -> scipy.sparse.csr_array:
    """Sum element matrices into a global ``(num_nodes, num_nodes)`` sparse matrix."""
    conn = mesh.element_nodes
    rows = np.repeat(conn, 3, axis=1).ravel()
    cols = np.tile(conn, (1, 3)).ravel()
    global_matrix = scipy.sparse.coo_array(
        (element_matrices.ravel().astype(np.complex128), (rows, cols)),
        shape=(mesh.num_nodes, mesh.num_nodes),
    )
    return scipy.sparse.csr_array(global_matrix)


def solve_pencil(pencil: HermitianPencil, num_modes: int, *, start: int = 0) -> list[tuple[float, FEFunction]]:
    """Compute eigenpairs ``start .. start + num_modes - 1`` (0-based, ascending) of a pencil.

    Pencils up to :data:`DENSE_DOF_LIMIT` degrees of freedom use LAPACK's dense
    generalized Hermitian solver; larger ones use ARPACK in shift-invert mode with a
    fixed starting vector, so repeated calls give identical output.

    Parameters
    ----------
    pencil : HermitianPencil
        The assembled problem.
    num_modes : int
        Number of eigenpairs to return.
    start : int, optional
        Index of the first eigenpair to return.

    Returns
    -------
    list[tuple[float, FEFunction]]
        Real ascending eigenvalues with ``M``-orthonormal eigenvectors.

    Raises
    ------
    ValueError
        If the requested range exceeds the degree-of-freedom count.
    SolverFailure
        If the eigensolver fails.
    """
    last = start + num_modes - 1
    if num_modes < 1 or start < 0 or last >= pencil.dof_count:
        msg = f"cannot compute modes {start}..{last} of a pencil with {pencil.dof_count} dofs"
        raise ValueError(msg)
    try:
        if pencil.dof_count <= DENSE_DOF_LIMIT:
            values, vectors = _solve_dense(pencil, start, last)
        else:
            values, vectors = _solve_sparse(pencil, start, last)
    except (np.linalg.LinAlgError, scipy.sparse.linalg.ArpackError, ValueError) as exc:
        msg = f"eigensolver failed for modes {start}..{last}"
        raise SolverFailure(msg, {**pencil.diagnostics(), "backend": str(exc)}) from exc

    logger.debug(
        "solved %s pencil: %d modes from index %d, lowest %.6g",
        pencil.boundary.tag,
        num_modes,
        start,
        values[0],
    )
    vectors = np.asarray(vectors, dtype=np.complex128)
    return [
        (float(value), FEFunction(pencil.mesh, np.ascontiguousarray(vectors[:, i]), pencil.boundary))
        for i, value in enumerate(values)
    ]


def _solve_dense(pencil: HermitianPencil, start: int, last: int) -> tuple[NDArray[np.float64], NDArray[Any]]:
    """Dense generalized Hermitian solve (real arithmetic when the pencil is real)."""
    stiffness = pencil.stiffness.toarray()
    mass = pencil.mass.toarray()
    if pencil.is_real:
        stiffness, mass = stiffness.real, mass.real
    values, vectors = scipy.linalg.eigh(stiffness, mass, subset_by_index=[start, last])
    return values, vectors


def _solve_sparse(pencil: HermitianPencil, start: int, last: int) -> tuple[NDArray[np.float64], NDArray[Any]]:
    """Shift-invert Lanczos solve, sorted and re-normalized in the mass inner product."""
    rng = np.random.default_rng(0)
    stiffness, mass = pencil.stiffness, pencil.mass
    v0: NDArray[Any] = rng.standard_normal(pencil.dof_count)
    if pencil.is_real:
        stiffness, mass = scipy.sparse.csc_array(stiffness.real), scipy.sparse.csc_array(mass.real)
    else:
        v0 = v0.astype(np.complex128)
    values, vectors = scipy.sparse.linalg.eigsh(stiffness, k=last + 1, M=mass, sigma=_SHIFT, which="LM", v0=v0)
    order = np.argsort(values)[start:]
    values, vectors = values[order], vectors[:, order]
    norms = np.sqrt(np.real(np.einsum("ij,ij->j", vectors.conj(), mass @ vectors)))
    return values, vectors / norms


# --------------------------------------------------------------------------- evaluation


def _locate(mesh: Mesh1D, x: ArrayLike) -> tuple[NDArray[np.int64], NDArray[np.float64]]:
    """Containing element and local coordinate of each point.

    Raises
    ------
    OutOfDomain
        If a point lies outside the (closed) mesh interval.
    """
    x = np.asarray(x, dtype=np.float64)
    slack = _DOMAIN_TOL * max(1.0, abs(mesh.domain_start), abs(mesh.domain_end))
    if np.any(x < mesh.domain_start - slack) or np.any(x > mesh.domain_end + slack) or np.any(np.isnan(x)):
        msg = f"points outside [{mesh.domain_start}, {mesh.domain_end}] (range {np.min(x)}..{np.max(x)})"
        raise OutOfDomain(msg)
    t = np.clip((x - mesh.domain_start) / mesh.h, 0.0, float(mesh.num_elements))
    element = np.minimum(np.floor(t).astype(np.int64), mesh.num_elements - 1)
    return element, t - element


def evaluate(f: FEFunction, x: ArrayLike) -> Any:  # noqa: ANN401
    """Evaluate a P2 function at ``x`` (scalar or array) by quadratic interpolation.

    Raises
    ------
    OutOfDomain
        If a point lies outside the mesh interval.
    """
    element, xi = _locate(f.mesh, x)
    nodal = f.nodal_values[f.mesh.element_nodes[element]]  # (..., 3)
    values = np.sum(nodal * np.moveaxis(shape_values(xi), 0, -1), axis=-1)
    return complex(values) if np.ndim(values) == 0 else values


def evaluate_derivative(f: FEFunction, x: ArrayLike) -> Any:  # noqa: ANN401
    """Evaluate the derivative of a P2 function at ``x``.

    At a shared vertex the derivative of the element to the right is returned
    (the left one at the domain end).

    Raises
    ------
    OutOfDomain
        If a point lies outside the mesh interval.
    """
    element, xi = _locate(f.mesh, x)
    nodal = f.nodal_values[f.mesh.element_nodes[element]]
    values = np.sum(nodal * np.moveaxis(shape_derivatives(xi), 0, -1), axis=-1) / f.mesh.h
    return complex(values) if np.ndim(values) == 0 else values


def values_at_quadrature(f: FEFunction) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Values and derivatives of ``f`` at the quadrature points, each ``(num_elements, 3)``."""
    nodal = f.nodal_values[f.mesh.element_nodes]
    return nodal @ _N_Q, (nodal @ _DN_Q) / f.mesh.h


@lru_cache(maxsize=32)
def unit_mass(mesh: Mesh1D) -> scipy.sparse.csr_array:
    """The mass matrix of ``rho = 1`` over every node of ``mesh``."""
    m_elem = np.broadcast_to(np.einsum("q,iq,jq->ij", QUAD_WEIGHTS, _N_Q, _N_Q) * mesh.h, (mesh.num_elements, 3, 3))
    return _scatter(mesh, np.ascontiguousarray(m_elem))


@lru_cache(maxsize=32)
def unit_stiffness(mesh: Mesh1D) -> scipy.sparse.csr_array:
    """The stiffness matrix of ``a = 1`` over every node of ``mesh``."""
    k_elem = np.broadcast_to(np.einsum("q,iq,jq->ij", QUAD_WEIGHTS, _DN_Q, _DN_Q) / mesh.h, (mesh.num_elements, 3, 3))
    return _scatter(mesh, np.ascontiguousarray(k_elem))


def l2_inner(f: FEFunction, g: FEFunction) -> complex:
    """The Hermitian product ``∫ f conj(g)`` with the assembly quadrature.

    The boundary treatments may differ; the integral uses the reconstructed nodal
    values of both functions.

    Raises
    ------
    MeshMismatch
        If the functions live on different meshes.
    """
    if f.mesh != g.mesh:
        msg = f"cannot pair functions on different meshes ({f.mesh} vs {g.mesh})"
        raise MeshMismatch(msg)
    return complex(np.vdot(g.nodal_values, unit_mass(f.mesh) @ f.nodal_values))


def l2_norm(f: FEFunction) -> float:
    """The ``L^2`` norm of ``f``."""
    return float(np.sqrt(max(l2_inner(f, f).real, 0.0)))


def h1_seminorm(f: FEFunction) -> float:
    """The ``L^2`` norm of the derivative of ``f``."""
    nodal = f.nodal_values
    return float(np.sqrt(max(np.vdot(nodal, unit_stiffness(f.mesh) @ nodal).real, 0.0)))


def interpolate(
    func: Callable[[NDArray[np.float64]], ArrayLike],
    mesh: Mesh1D,
    boundary: Boundary | None = None,
) -> FEFunction:
    """The nodal P2 interpolant of ``func`` (values at eliminated nodes are dropped)."""
    boundary = boundary or Boundary.free()
    nodal = np.broadcast_to(np.asarray(func(mesh.nodes), dtype=np.complex128), (mesh.num_nodes,))
    return FEFunction(mesh, boundary.restrict(mesh, nodal), boundary)


def normalized(f: FEFunction) -> FEFunction:
    """``f`` scaled to unit ``L^2`` norm.

    Raises
    ------
    DegenerateNormalization
        If ``f`` is zero.
    """
    norm = l2_norm(f)
    if norm == 0.0:
        msg = "cannot normalize the zero function"
        raise DegenerateNormalization(msg)
    return f.scaled(1.0 / norm)


def fix_phase(f: FEFunction, anchor: int = 0) -> FEFunction:
    """Rotate ``f`` by a unit scalar so that its value at node ``anchor`` is real and positive.

    If that value is below ``1e-8`` of the largest nodal magnitude, the node of
    largest magnitude is used instead.
    """
    nodal = f.nodal_values
    peak = np.max(np.abs(nodal))
    if peak == 0.0:
        return f
    value = nodal[anchor]
    if abs(value) < _PHASE_TOL * peak:
        value = nodal[int(np.argmax(np.abs(nodal)))]
    return f.scaled(abs(value) / value)
