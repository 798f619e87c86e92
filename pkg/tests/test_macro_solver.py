"""Tests for the macro_solver module."""

from __future__ import annotations

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochmodes import (
    DegenerateMacroModel,
    InvalidWavenumber,
    ParameterMismatch,
    PeriodicDegenerateMode,
    UnderdeterminedBoundary,
    analytic_two_scale_oracle,
    decompose_epsilon,
    degenerate_macro_solution,
    first_order_eigenvalue_k,
    macro_eigenpair_0,
    macro_eigenpair_k,
    neumann_boundary_residual,
)


def test_decompose_snaps_to_integers() -> None:
    """alpha k / eps = 8 despite rounding in 0.16 * 50."""
    split = decompose_epsilon(1.0, 0.16, 0.02)
    assert (split.h, split.l) == (8, 0.0)
    assert split.window_center == 16


def test_decompose_fractional_part() -> None:
    """k = 0.3 with twelve cells gives h = 3, l = 0.6."""
    split = decompose_epsilon(1.0, 0.3, 1.0 / 12)
    assert split.h == 3
    assert split.l == pytest.approx(0.6)
    assert split.window_center == 7
    assert split.macro_index(split.window_index(4)) == 4
    assert split.macro_index(5) == 1


def test_decompose_rejects_negative_or_large_k() -> None:
    """Only k in [0, 1/2) is decomposed."""
    with pytest.raises(InvalidWavenumber):
        decompose_epsilon(1.0, 0.5, 0.1)
    with pytest.raises(InvalidWavenumber):
        decompose_epsilon(1.0, -0.1, 0.1)


def test_first_order_eigenvalue_vanishes_at_twice_l() -> None:
    """lambda^1 is zero for ell = 2 l and odd in ell - 2 l."""
    c = -18.75j
    values = first_order_eigenvalue_k(c, 1.0, 1.0, 0.5, [0, 1, 2])
    assert values[1] == pytest.approx(0.0)
    assert values[0] == pytest.approx(-values[2])
    assert values[0].imag == pytest.approx(0.0)


@settings(deadline=10000)
@given(
    slope=st.floats(min_value=0.5, max_value=50.0) | st.floats(min_value=-50.0, max_value=-0.5),
    l_k=st.floats(min_value=0.0, max_value=0.99),
    ell=st.integers(min_value=-20, max_value=20),
    phase=st.floats(min_value=-np.pi, max_value=np.pi),
    alpha=st.floats(min_value=0.5, max_value=3.0),
)
def test_k_nonzero_solution_solves_macro_problem(
    slope: float, l_k: float, ell: int, phase: float, alpha: float
) -> None:
    """The closed form satisfies the coupled ODE and both boundary conditions."""
    phi0 = 0.7 * np.exp(1j * phase)
    macro = macro_eigenpair_k(1j * slope, 1.0, phi0, np.conj(phi0), alpha, l_k, ell, k=0.2, n=1)
    x = np.linspace(0.0, alpha, 17)
    scale = max(1.0, abs(macro.lambda1), abs(slope))
    assert macro.ode_residual(x) <= 1e-9 * scale
    assert macro.boundary_residual() <= 1e-9
    assert macro.branch == "k_nonzero"


@settings(deadline=10000)
@given(
    c_nm=st.floats(min_value=0.5, max_value=40.0),
    phi_n0=st.floats(min_value=-2.0, max_value=2.0),
    phi_m0=st.floats(min_value=0.1, max_value=2.0),
    ell=st.integers(min_value=-15, max_value=15),
)
def test_k_zero_solution_solves_macro_problem(c_nm: float, phi_n0: float, phi_m0: float, ell: int) -> None:
    """The k = 0 rotation solution satisfies the ODE system and the boundary condition."""
    macro = macro_eigenpair_0(c_nm, phi_n0, phi_m0, 1.0, ell, n=2, m=3)
    x = np.linspace(0.0, 1.0, 13)
    assert macro.ode_residual(x) <= 1e-9 * max(1.0, abs(macro.lambda1))
    assert macro.boundary_residual() <= 1e-9
    assert macro.lambda1 == pytest.approx(ell * np.pi * c_nm)


def test_k_zero_branches() -> None:
    """ell = 0 gives the lambda^1 = 0 branch."""
    assert macro_eigenpair_0(4.0, 1.0, 0.5, 1.0, 0).branch == "k_zero_lambda1_zero"
    assert macro_eigenpair_0(4.0, 1.0, 0.5, 1.0, 2).branch == "k_zero_lambda1_nonzero"


def test_k_zero_explicit_amplitude() -> None:
    """An explicit d2 fixes d1 through the boundary condition."""
    macro = macro_eigenpair_0(4.0, 1.0, 0.5, 1.0, 1, d2=2.0)
    assert macro.boundary_residual() <= 1e-12
    with pytest.raises(ParameterMismatch):
        macro_eigenpair_0(4.0, 1.0, 0.0, 1.0, 1, d2=2.0)


def test_k_zero_amplitude_sign() -> None:
    """d1 = +d2 phi_n(0) / phi_m(0); the opposite sign breaks the condition at the origin."""
    macro = macro_eigenpair_0(4.0, 1.0, 0.5, 1.0, 1, d2=2.0)
    assert macro.d_plus == pytest.approx(4.0)
    flipped = dataclasses.replace(macro, d_plus=-macro.d_plus)
    assert flipped.boundary_residual() == pytest.approx(4.0)


def test_macro_error_cases() -> None:
    """Vanishing couplings or boundary data raise the matching errors."""
    with pytest.raises(DegenerateMacroModel):
        macro_eigenpair_k(0j, 1.0, 1.0, 1.0, 1.0, 0.2, 1)
    with pytest.raises(PeriodicDegenerateMode):
        macro_eigenpair_k(2j, 1.0, 0.0, 0.0, 1.0, 0.2, 1)
    with pytest.raises(ParameterMismatch):
        macro_eigenpair_k(1.0 + 0j, 1.0, 1.0, 1.0, 1.0, 0.2, 3)
    with pytest.raises(DegenerateMacroModel):
        macro_eigenpair_0(0.0, 1.0, 1.0, 1.0, 1)
    with pytest.raises(UnderdeterminedBoundary):
        macro_eigenpair_0(4.0, 0.0, 0.0, 1.0, 1)


def test_degenerate_solution_is_constant() -> None:
    """The trivial solution has lambda^1 = 0 and a constant amplitude."""
    macro = degenerate_macro_solution(0.0, 1, 1.0, delta=2.0)
    assert macro.lambda1 == 0.0
    assert np.allclose(macro.amplitudes(np.linspace(0.0, 1.0, 5))[0], 2.0)


def test_neumann_residual_shape() -> None:
    """The Neumann check returns one value per end."""
    macro = macro_eigenpair_k(3j, 1.0, 1.0, 1.0, 1.0, 0.5, 1)
    assert neumann_boundary_residual(macro, (1j, -1j)).shape == (2,)


@pytest.mark.parametrize(("k", "m", "ell"), [(0.25, 0, 1), (0.25, -1, 3), (0.3, 1, -2), (0.1, 0, 0)])
def test_oracle_is_a_dirichlet_sine(k: float, m: int, ell: int) -> None:
    """For a = rho = 1 the two-scale mode is -2 delta sin(P pi x / alpha) with P = ell + 2 h + 2 m N."""
    alpha, cells, delta = 1.0, 10, 1.5
    oracle = analytic_two_scale_oracle(alpha, alpha / cells, k, m, ell, delta)
    big_p = ell + 2 * oracle.decomposition.h + 2 * m * cells
    x = np.linspace(0.0, alpha, 101)
    assert np.allclose(oracle.psi(x), -2.0 * delta * np.sin(big_p * np.pi * x / alpha), atol=1e-9)
    assert oracle.physical_index == abs(big_p)


@pytest.mark.parametrize(("m", "ell"), [(1, 0), (1, 3), (2, -1)])
def test_oracle_at_zero_wavenumber(m: int, ell: int) -> None:
    """At k = 0 the cosine/sine pair rotates into 2 sin(P pi x / alpha)."""
    alpha, cells = 1.0, 8
    oracle = analytic_two_scale_oracle(alpha, alpha / cells, 0.0, m, ell)
    big_p = ell + 2 * m * cells
    x = np.linspace(0.0, alpha, 81)
    assert np.allclose(oracle.psi(x), 2.0 * np.sin(big_p * np.pi * x / alpha), atol=1e-9)


@pytest.mark.parametrize(("k", "m", "ell"), [(0.25, 0, 3), (0.3, -1, 1), (0.0, 1, 2), (0.45, 1, -4)])
def test_oracle_eigenvalue_error_is_second_order(k: float, m: int, ell: int) -> None:
    """eps^2 lambda_P - gamma = pi^2 (ell - 2 l)^2 eps^2 / alpha^2 exactly."""
    alpha, cells = 1.0, 10
    epsilon = alpha / cells
    oracle = analytic_two_scale_oracle(alpha, epsilon, k, m, ell)
    target = epsilon**2 * (oracle.physical_index * np.pi / alpha) ** 2
    gap = np.pi**2 * (ell - 2 * oracle.decomposition.l) ** 2 * epsilon**2 / alpha**2
    assert target - oracle.gamma == pytest.approx(gap, abs=1e-9)
