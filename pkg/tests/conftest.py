"""Shared fixtures: the homogeneous medium, whose spectra are known in closed form, and the sine medium."""

from __future__ import annotations

import numpy as np
import pytest

from blochmodes import CoefficientProfile, PhysicalProblem


def bloch_eigenvalues(k: float, count: int) -> list[float]:
    """The lowest ``count`` cell eigenvalues ``4 pi^2 (m + k)^2`` of ``a = rho = 1``."""
    values = sorted(4.0 * np.pi**2 * (m + k) ** 2 for m in range(-count, count + 1))
    return values[:count]


@pytest.fixture
def unit() -> CoefficientProfile:
    """The constant coefficient 1."""
    return CoefficientProfile.constant(1.0)


@pytest.fixture
def sine() -> CoefficientProfile:
    """``sin(2 pi y) + 2``."""
    return CoefficientProfile.sine(1.0, 2.0)


@pytest.fixture
def homogeneous_problem(unit: CoefficientProfile) -> PhysicalProblem:
    """Ten cells of the homogeneous medium on (0, 1), 40 elements per cell."""
    return PhysicalProblem.from_cells(1.0, 10, unit, unit, elements_per_cell=40)
