"""Tests for the coefficients module."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochmodes import CoefficientProfile, InvalidCoefficient


def test_sine_profile_values() -> None:
    """The sine profile peaks at y = 1/4 and is 1-periodic."""
    a = CoefficientProfile.sine(1.0, 2.0)
    assert a(0.25) == pytest.approx(3.0)
    assert a(0.75) == pytest.approx(1.0)
    assert a(1.25) == pytest.approx(a(0.25))
    assert a(-0.75) == pytest.approx(a(0.25))


def test_sine_harmonic_mean_matches_quadrature() -> None:
    """The closed-form harmonic mean of a sine profile agrees with a numerical average of 1/a."""
    a = CoefficientProfile.sine(1.0, 2.0)
    y = np.arange(200_000) / 200_000
    assert a.harmonic_mean() == pytest.approx(1.0 / np.mean(1.0 / a(y)), rel=1e-9)
    assert a.harmonic_mean() == pytest.approx(np.sqrt(3.0))
    assert a.mean() == pytest.approx(2.0)


def test_piecewise_constant_profile() -> None:
    """A two-piece profile evaluates by piece and has the expected means."""
    a = CoefficientProfile.piecewise_constant([0.0, 0.5], [1.0, 4.0])
    assert a(np.array([0.1, 0.5, 0.9])) == pytest.approx([1.0, 4.0, 4.0])
    assert a.mean() == pytest.approx(2.5)
    assert a.harmonic_mean() == pytest.approx(1.6)


def test_sampled_profile_interpolates_periodically() -> None:
    """Samples are linearly interpolated and wrap around at y = 1."""
    a = CoefficientProfile.sampled([1.0, 3.0])
    assert a(0.25) == pytest.approx(2.0)
    assert a(0.75) == pytest.approx(2.0)
    y = np.arange(400_000) / 400_000
    assert a.harmonic_mean() == pytest.approx(1.0 / np.mean(1.0 / a(y)), rel=1e-6)


@pytest.mark.parametrize(
    "build",
    [
        lambda: CoefficientProfile.constant(0.0),
        lambda: CoefficientProfile.sine(2.0, 1.0),
        lambda: CoefficientProfile.piecewise_constant([0.0, 0.5], [1.0, -1.0]),
        lambda: CoefficientProfile.piecewise_constant([0.1, 0.5], [1.0, 1.0]),
        lambda: CoefficientProfile.piecewise_constant([0.0], [1.0, 2.0]),
        lambda: CoefficientProfile.sampled([]),
        lambda: CoefficientProfile("parabola"),
    ],
)
def test_invalid_profiles_rejected(build) -> None:  # noqa: ANN001
    """Non-positive, malformed or unknown profiles raise InvalidCoefficient."""
    with pytest.raises(InvalidCoefficient):
        build()


def test_from_dict_round_trip() -> None:
    """A profile survives to_dict and from_dict."""
    a = CoefficientProfile.piecewise_constant([0.0, 0.25], [2.0, 5.0])
    assert CoefficientProfile.from_dict(a.to_dict()) == a


def test_from_dict_names_missing_parameter() -> None:
    """A missing parameter is named in the error."""
    with pytest.raises(InvalidCoefficient, match="amplitude"):
        CoefficientProfile.from_dict({"kind": "sine", "offset": 2.0})


def test_scaled_profile_is_epsilon_periodic() -> None:
    """``scaled(eps)`` evaluates the profile at x / eps."""
    a = CoefficientProfile.sine(1.0, 2.0)
    scaled = a.scaled(0.1)
    assert scaled(0.025) == pytest.approx(3.0)
    assert scaled(0.125) == pytest.approx(3.0)
    with pytest.raises(ValueError, match="positive"):
        a.scaled(0.0)


@settings(deadline=10000)
@given(
    amplitude=st.floats(min_value=-5.0, max_value=5.0),
    margin=st.floats(min_value=1e-3, max_value=5.0),
    y=st.floats(min_value=-3.0, max_value=3.0),
)
def test_sine_profile_within_bounds(amplitude: float, margin: float, y: float) -> None:
    """Every value of a valid sine profile lies between its bounds."""
    a = CoefficientProfile.sine(amplitude, abs(amplitude) + margin)
    value = float(a(y))
    assert a.lower_bound - 1e-12 <= value <= a.upper_bound + 1e-12
    assert a.lower_bound > 0.0
