"""Tests for the two_scale module."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from blochmodes import (
    Boundary,
    CoefficientProfile,
    DegenerateNormalization,
    FEFunction,
    Mesh1D,
    MeshMismatch,
    ParameterMismatch,
    PhysicalProblem,
    align,
    analytic_two_scale_oracle,
    build_two_scale_mode,
    coupling,
    decompose_epsilon,
    eval_quasiperiodic,
    interpolate,
    l2_norm,
    macro_eigenpair_k,
    residual_F,
    solve_cell,
    two_scale_transform,
)
from blochmodes.two_scale import TwoScaleMode


def _plane_wave_mode(unit: CoefficientProfile, problem: PhysicalProblem, k: float, ell: int) -> TwoScaleMode:
    """The two-scale mode of the lowest Bloch band of the homogeneous medium."""
    cell = solve_cell(unit, unit, k, problem.elements_per_cell, 2)
    couplings = coupling(cell, unit, unit)
    split = decompose_epsilon(problem.alpha, k, problem.epsilon)
    phi0 = cell.phi_at_origin(1)
    macro = macro_eigenpair_k(
        couplings.c_of(1, 1), couplings.b_of(1, 1).real, phi0, np.conj(phi0), problem.alpha, split.l, ell, k=k, n=1
    )
    return build_two_scale_mode(cell, macro, problem.epsilon, problem.mesh)


def test_quasiperiodic_extension_phase(unit: CoefficientProfile) -> None:
    """Shifting by whole cells multiplies by exp(2 i pi k cells)."""
    k, epsilon = 0.2, 0.1
    phi = solve_cell(unit, unit, k, 20, 1).mode(1)
    y = np.array([0.1, 0.35, 0.8])
    inside = eval_quasiperiodic(phi, k, epsilon, epsilon * y)
    shifted = eval_quasiperiodic(phi, k, epsilon, epsilon * (3 + y))
    assert np.allclose(shifted, inside * np.exp(2j * np.pi * k * 3), atol=1e-12)


def test_quasiperiodic_extension_checks_wavenumber(unit: CoefficientProfile) -> None:
    """A mode cannot be extended with another wavenumber."""
    phi = solve_cell(unit, unit, 0.2, 10, 1).mode(1)
    with pytest.raises(ParameterMismatch):
        eval_quasiperiodic(phi, 0.3, 0.1, [0.05])


def test_two_scale_mode_matches_closed_form(unit: CoefficientProfile, homogeneous_problem: PhysicalProblem) -> None:
    """The assembled mode of the homogeneous medium is the analytic sine."""
    mode = _plane_wave_mode(unit, homogeneous_problem, 0.25, 3)
    oracle = analytic_two_scale_oracle(1.0, 0.1, 0.25, 0, 3)
    assert np.allclose(mode.samples.nodal_values, oracle.psi(homogeneous_problem.mesh.nodes), atol=1e-4)
    assert mode.lambda1 == pytest.approx(oracle.lambda1, rel=1e-4)
    assert mode.gamma == pytest.approx(oracle.gamma, rel=1e-4)


def test_build_checks_wavenumber(unit: CoefficientProfile, homogeneous_problem: PhysicalProblem) -> None:
    """Bloch data and macroscopic solution must share k."""
    mode = _plane_wave_mode(unit, homogeneous_problem, 0.25, 1)
    other = solve_cell(unit, unit, 0.3, 40, 2)
    with pytest.raises(ParameterMismatch):
        build_two_scale_mode(other, mode.macro, 0.1, homogeneous_problem.mesh)


def test_residual_vanishes_for_exact_modes(unit: CoefficientProfile, homogeneous_problem: PhysicalProblem) -> None:
    """With ell = 2 l the mode is a discrete eigenvector and its residual is negligible."""
    exact = _plane_wave_mode(unit, homogeneous_problem, 0.25, 1)
    off = _plane_wave_mode(unit, homogeneous_problem, 0.25, 3)
    assert exact.lambda1 == pytest.approx(0.0, abs=1e-9)
    assert residual_F(exact, homogeneous_problem) <= 1e-4
    assert residual_F(off, homogeneous_problem) > 100 * residual_F(exact, homogeneous_problem)


def test_residual_requires_problem_mesh(unit: CoefficientProfile, homogeneous_problem: PhysicalProblem) -> None:
    """A mode sampled on another mesh cannot be tested against the problem."""
    mode = _plane_wave_mode(unit, homogeneous_problem, 0.25, 1)
    coarse = PhysicalProblem.from_cells(1.0, 10, unit, unit, elements_per_cell=20)
    with pytest.raises(MeshMismatch):
        residual_F(mode, coarse)


@settings(deadline=10000)
@given(
    values=arrays(np.float64, 161, elements=st.floats(min_value=-10.0, max_value=10.0)),
    k=st.sampled_from([0.0, 0.16, -0.3, 0.45]),
)
def test_transform_is_an_isometry(values: np.ndarray, k: float) -> None:
    """On aligned meshes the transform preserves the L2 norm, and -k gives the conjugate of a real function."""
    u = FEFunction(Mesh1D(0.0, 1.0, 80), values.astype(np.complex128), Boundary.free())
    field = two_scale_transform(u, k, 0.1)
    norm = l2_norm(u) ** 2
    assert abs(field.norm_squared() - norm) <= 1e-9 * norm + 1e-12
    mirror = two_scale_transform(u, -k, 0.1)
    assert np.allclose(mirror.values, field.conjugate().values, atol=1e-12)


def test_transform_cell_profile() -> None:
    """Each cell row holds u on that cell, demodulated by exp(-2 i pi k l)."""
    u = interpolate(lambda x: x, Mesh1D(0.0, 1.0, 40))
    field = two_scale_transform(u, 0.25, 0.25)
    assert field.num_cells == 4
    profile = field.cell_function(2)
    assert profile.nodal_values[0] == pytest.approx(0.5 * np.exp(-1j * np.pi))


def test_align_is_least_squares() -> None:
    """The aligned scalar beats any other scalar and recovers a known multiple."""
    mesh = Mesh1D.unit_cell(20)
    psi = interpolate(lambda x: np.sin(np.pi * x), mesh)
    w = interpolate(lambda x: (2.0 - 1.0j) * np.sin(np.pi * x) + 0.1 * x**2, mesh)
    scale, error = align(w, psi)
    rng = np.random.default_rng(0)
    for trial in scale + rng.normal(size=20) * 0.1 + 1j * rng.normal(size=20) * 0.1:
        gap = FEFunction(mesh, w.nodal_values - trial * psi.nodal_values)
        assert l2_norm(gap) / np.max(np.abs(w.nodal_values)) >= error - 1e-12
    exact_scale, exact_error = align(psi.scaled(3.0j), psi)
    assert exact_scale == pytest.approx(3.0j)
    assert exact_error == pytest.approx(0.0, abs=1e-12)


def test_align_rejects_zero() -> None:
    """Aligning against zero is undefined."""
    mesh = Mesh1D.unit_cell(4)
    zero = FEFunction(mesh, np.zeros(mesh.num_nodes, dtype=np.complex128))
    with pytest.raises(DegenerateNormalization):
        align(interpolate(np.cos, mesh), zero)
