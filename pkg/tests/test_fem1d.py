"""Tests for the fem1d module."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blochmodes import (
    Boundary,
    CoefficientProfile,
    FEFunction,
    InvalidCoefficient,
    InvalidWavenumber,
    Mesh1D,
    MeshMismatch,
    SolverFailure,
    assemble,
    evaluate,
    evaluate_derivative,
    interpolate,
    l2_inner,
    l2_norm,
    solve_pencil,
)
from blochmodes.fem1d import fix_phase, h1_seminorm

from .conftest import bloch_eigenvalues


def test_mesh_layout() -> None:
    """A P2 mesh has 2N + 1 nodes and elements share their vertices."""
    mesh = Mesh1D(0.0, 2.0, 4)
    assert mesh.h == pytest.approx(0.5)
    assert mesh.num_nodes == 9
    assert mesh.nodes[-1] == pytest.approx(2.0)
    assert mesh.element_nodes[1].tolist() == [2, 3, 4]


def test_mesh_rejects_empty_interval() -> None:
    """Zero elements or a non-positive length are rejected."""
    with pytest.raises(ValueError, match="element"):
        Mesh1D(0.0, 1.0, 0)
    with pytest.raises(ValueError, match="length"):
        Mesh1D(0.0, 0.0, 3)


def test_boundary_dof_counts() -> None:
    """Dirichlet drops both ends, quasi-periodic drops the right end."""
    mesh = Mesh1D.unit_cell(5)
    assert Boundary.free().dof_count(mesh) == 11
    assert Boundary.neumann().dof_count(mesh) == 11
    assert Boundary.dirichlet().dof_count(mesh) == 9
    assert Boundary.quasi_periodic(0.2).dof_count(mesh) == 10


def test_quasi_periodic_extension_carries_phase() -> None:
    """The eliminated right node equals the left node times exp(2 i pi k)."""
    mesh = Mesh1D.unit_cell(3)
    bc = Boundary.quasi_periodic(0.25)
    nodal = bc.extend(mesh, np.arange(1, 7, dtype=np.complex128))
    assert nodal[-1] == pytest.approx(1j)


@pytest.mark.parametrize("k", [0.5, -0.51, 1.0])
def test_quasi_periodic_wavenumber_range(k: float) -> None:
    """Wavenumbers outside [-1/2, 1/2) are rejected."""
    with pytest.raises(InvalidWavenumber):
        Boundary.quasi_periodic(k)


def test_dirichlet_laplacian_eigenvalues(unit: CoefficientProfile) -> None:
    """-u'' = lambda u on (0, 1) with Dirichlet ends has eigenvalues (p pi)^2."""
    pencil = assemble(Mesh1D.unit_cell(200), unit, unit, Boundary.dirichlet())
    values = [value for value, _ in solve_pencil(pencil, 5)]
    assert values == pytest.approx([(p * np.pi) ** 2 for p in range(1, 6)], rel=1e-6)


@pytest.mark.parametrize("k", [0.0, 0.3, -0.2, -0.5])
def test_quasi_periodic_eigenvalues(unit: CoefficientProfile, k: float) -> None:
    """The homogeneous cell has eigenvalues 4 pi^2 (m + k)^2."""
    pencil = assemble(Mesh1D.unit_cell(50), unit, unit, Boundary.quasi_periodic(k))
    values = [value for value, _ in solve_pencil(pencil, 6)]
    expected = bloch_eigenvalues(k, 6)
    assert values == pytest.approx(expected, rel=1e-4, abs=1e-9)


def test_pencil_is_hermitian(sine: CoefficientProfile) -> None:
    """The quasi-periodic pencil of a variable coefficient is Hermitian."""
    pencil = assemble(Mesh1D.unit_cell(20), sine, sine, Boundary.quasi_periodic(0.16))
    assert not pencil.is_real
    assert pencil.hermitian_defect() < 1e-12


def test_mass_matrix_integrates_constants(unit: CoefficientProfile) -> None:
    """Summing the free mass matrix gives the interval length; the stiffness kills constants."""
    pencil = assemble(Mesh1D(0.0, 3.0, 7), unit, unit, Boundary.free())
    ones = np.ones(pencil.dof_count)
    assert np.sum(pencil.mass.toarray()).real == pytest.approx(3.0)
    assert np.max(np.abs(pencil.stiffness @ ones)) < 1e-12


def test_assemble_rejects_non_positive_coefficient(unit: CoefficientProfile) -> None:
    """A coefficient vanishing at a quadrature point is rejected."""
    with pytest.raises(InvalidCoefficient):
        assemble(Mesh1D.unit_cell(4), lambda y: np.sin(2 * np.pi * y), unit, Boundary.free())


def test_eigenvectors_are_mass_orthonormal(sine: CoefficientProfile) -> None:
    """Returned eigenvectors satisfy V^H M V = I."""
    pencil = assemble(Mesh1D.unit_cell(30), sine, sine, Boundary.quasi_periodic(0.3))
    pairs = solve_pencil(pencil, 4)
    vectors = np.column_stack([mode.coefficients for _, mode in pairs])
    gram = vectors.conj().T @ (pencil.mass @ vectors)
    assert np.allclose(gram, np.eye(4), atol=1e-10)


def test_solve_pencil_range_checked(unit: CoefficientProfile) -> None:
    """Asking for more modes than dofs raises ValueError."""
    pencil = assemble(Mesh1D.unit_cell(2), unit, unit, Boundary.dirichlet())
    with pytest.raises(ValueError, match="cannot compute"):
        solve_pencil(pencil, 4)


def test_sparse_path_matches_dense_values(unit: CoefficientProfile) -> None:
    """Pencils above the dense limit go through shift-invert and give the same eigenvalues."""
    pencil = assemble(Mesh1D.unit_cell(2500), unit, unit, Boundary.dirichlet())
    assert pencil.dof_count > 4000
    values = [value for value, _ in solve_pencil(pencil, 3, start=1)]
    assert values == pytest.approx([(p * np.pi) ** 2 for p in (2, 3, 4)], rel=1e-8)


def test_solver_failure_reports_diagnostics() -> None:
    """SolverFailure keeps its diagnostics and prints them."""
    exc = SolverFailure("eigensolver failed", {"dof_count": 3})
    assert exc.diagnostics == {"dof_count": 3}
    assert "dof_count=3" in str(exc)


@settings(deadline=10000)
@given(points=arrays(np.float64, 12, elements=st.floats(min_value=0.0, max_value=2.0)))
def test_quadratics_are_reproduced_exactly(points: np.ndarray) -> None:
    """P2 interpolation reproduces x^2 and its derivative everywhere."""
    f = interpolate(lambda x: x**2, Mesh1D(0.0, 2.0, 5))
    assert np.allclose(evaluate(f, points), points**2, atol=1e-12)
    assert np.allclose(evaluate_derivative(f, points), 2.0 * points, atol=1e-10)


def test_evaluate_scalar_and_outside() -> None:
    """A scalar point gives a complex scalar; points off the mesh raise."""
    f = interpolate(lambda x: 3.0 * x, Mesh1D(0.0, 1.0, 4))
    assert evaluate(f, 0.5) == pytest.approx(1.5)
    with pytest.raises(ValueError, match="outside"):
        evaluate(f, 1.5)


def test_function_length_checked() -> None:
    """Coefficients must match the boundary's dof count."""
    with pytest.raises(MeshMismatch):
        FEFunction(Mesh1D.unit_cell(3), np.zeros(7), Boundary.dirichlet())


def test_norms_of_a_sine() -> None:
    """sin(pi x) on (0, 1) has L2 norm 1/sqrt(2) and derivative norm pi/sqrt(2)."""
    f = interpolate(lambda x: np.sin(np.pi * x), Mesh1D.unit_cell(40), Boundary.dirichlet())
    assert l2_norm(f) == pytest.approx(np.sqrt(0.5), rel=1e-6)
    assert h1_seminorm(f) == pytest.approx(np.pi * np.sqrt(0.5), rel=1e-6)


def test_inner_product_requires_same_mesh() -> None:
    """Functions on different meshes cannot be paired."""
    f = interpolate(np.cos, Mesh1D.unit_cell(3))
    g = interpolate(np.cos, Mesh1D.unit_cell(4))
    with pytest.raises(MeshMismatch):
        l2_inner(f, g)


def test_fix_phase_makes_anchor_positive() -> None:
    """After fix_phase the anchor node is real and positive and the modulus is unchanged."""
    f = interpolate(lambda x: (1.0 + x) * np.exp(2.5j), Mesh1D.unit_cell(4))
    fixed = fix_phase(f)
    assert fixed.nodal_values[0].imag == pytest.approx(0.0, abs=1e-14)
    assert fixed.nodal_values[0].real > 0.0
    assert np.allclose(np.abs(fixed.nodal_values), np.abs(f.nodal_values))
