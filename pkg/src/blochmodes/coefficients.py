"""One-periodic coefficient profiles for the stiffness ``a(y)`` and the density ``rho(y)``.

A :class:`CoefficientProfile` is a small immutable description of a positive,
1-periodic function on the unit cell ``Y = (0, 1)``. Four kinds are supported:

- ``constant``: ``value``.
- ``sine``: ``amplitude * sin(2 pi y) + offset`` (the classical test profile).
- ``piecewise_constant``: ``values[i]`` on ``[breakpoints[i], breakpoints[i + 1])``.
- ``sampled``: samples on the uniform grid ``j / M``, linearly interpolated and
  wrapped periodically.

The physical coefficients ``a(x / eps)`` are obtained with :meth:`CoefficientProfile.scaled`.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any

import numpy as np

from blochmodes.errors import InvalidCoefficient

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

PROFILE_KINDS = ("constant", "sine", "piecewise_constant", "sampled")
"""The supported ``kind`` values."""


@dataclass(frozen=True)
class CoefficientProfile:
    """A positive 1-periodic coefficient on the unit cell.

    Build instances with the classmethod factories rather than the constructor; they
    validate the parameters of each kind.

    Parameters
    ----------
    kind : str
        One of :data:`PROFILE_KINDS`.
    value : float
        The constant value (``constant`` only).
    amplitude, offset : float
        ``amplitude * sin(2 pi y) + offset`` (``sine`` only).
    breakpoints : tuple[float, ...]
        Left ends of the pieces, starting at ``0`` (``piecewise_constant`` only).
    values : tuple[float, ...]
        Piece values (``piecewise_constant``) or grid samples (``sampled``).
    """

    kind: str
    value: float = 1.0
    amplitude: float = 0.0
    offset: float = 0.0
    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        """Check the kind and the positivity bound."""
        if self.kind not in PROFILE_KINDS:
            msg = f"unknown coefficient kind {self.kind!r}; choose from {list(PROFILE_KINDS)}"
            raise InvalidCoefficient(msg)
        if self.kind in ("piecewise_constant", "sampled") and not self.values:
            msg = f"a {self.kind} profile needs at least one value"
            raise InvalidCoefficient(msg)
        if not np.isfinite(self.upper_bound) or self.lower_bound <= 0.0:
            bounds = f"[{self.lower_bound}, {self.upper_bound}]"
            msg = f"coefficient must be positive and finite; {self.kind} profile has bounds {bounds}"
            raise InvalidCoefficient(msg)

    # ------------------------------------------------------------------ factories

    @classmethod
    def constant(cls, value: float) -> CoefficientProfile:
        """A constant coefficient."""
        return cls("constant", value=float(value))

    @classmethod
    def sine(cls, amplitude: float, offset: float) -> CoefficientProfile:
        """The profile ``amplitude * sin(2 pi y) + offset``; needs ``offset > |amplitude|``."""
        return cls("sine", amplitude=float(amplitude), offset=float(offset))

    @classmethod
    def piecewise_constant(cls, breakpoints: ArrayLike, values: ArrayLike) -> CoefficientProfile:
        """A piecewise-constant profile.

        Parameters
        ----------
        breakpoints : ArrayLike
            Strictly increasing left ends in ``[0, 1)``; the first must be ``0``.
        values : ArrayLike
            One positive value per piece.

        Raises
        ------
        InvalidCoefficient
            If the breakpoints are not strictly increasing from ``0`` inside ``[0, 1)``
            or the lengths differ.
        """
        starts = tuple(float(b) for b in np.atleast_1d(np.asarray(breakpoints, dtype=np.float64)))
        levels = tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=np.float64)))
        if len(starts) != len(levels):
            msg = (
                "piecewise profile needs one value per breakpoint, "
                f"got {len(starts)} breakpoints and {len(levels)} values"
            )
            raise InvalidCoefficient(msg)
        if not starts or starts[0] != 0.0 or starts[-1] >= 1.0 or np.any(np.diff(starts) <= 0.0):
            msg = f"breakpoints must increase strictly from 0 and stay below 1, got {list(starts)}"
            raise InvalidCoefficient(msg)
        return cls("piecewise_constant", breakpoints=starts, values=levels)

    @classmethod
    def sampled(cls, values: ArrayLike) -> CoefficientProfile:
        """A profile given by samples at ``y_j = j / M`` with periodic linear interpolation."""
        samples = tuple(float(v) for v in np.atleast_1d(np.asarray(values, dtype=np.float64)))
        return cls("sampled", values=samples)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> CoefficientProfile:
        """Build a profile from a ``[coefficients.*]`` config mapping.

        The mapping needs a ``kind`` plus that kind's parameters, e.g.
        ``{"kind": "sine", "amplitude": 1.0, "offset": 2.0}``.

        Raises
        ------
        InvalidCoefficient
            If ``kind`` is missing or unknown or a parameter is missing.
        """
        kind = data.get("kind")
        try:
            if kind == "constant":
                return cls.constant(data.get("value", 1.0))
            if kind == "sine":
                return cls.sine(data["amplitude"], data["offset"])
            if kind == "piecewise_constant":
                return cls.piecewise_constant(data["breakpoints"], data["values"])
            if kind == "sampled":
                return cls.sampled(data["values"])
        except KeyError as exc:
            msg = f"{kind} profile is missing the {exc.args[0]!r} parameter"
            raise InvalidCoefficient(msg) from exc
        msg = f"unknown coefficient kind {kind!r}; choose from {list(PROFILE_KINDS)}"
        raise InvalidCoefficient(msg)

    def to_dict(self) -> dict[str, Any]:
        """Serialize to the mapping accepted by :meth:`from_dict`."""
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        if self.kind == "sine":
            return {"kind": "sine", "amplitude": self.amplitude, "offset": self.offset}
        if self.kind == "piecewise_constant":
            return {"kind": "piecewise_constant", "breakpoints": list(self.breakpoints), "values": list(self.values)}
        return {"kind": "sampled", "values": list(self.values)}

    # ------------------------------------------------------------------ evaluation

    def __call__(self, y: ArrayLike) -> NDArray[np.float64]:
        """Evaluate the profile at ``y`` (any real numbers; wrapped into ``[0, 1)``)."""
        local = np.mod(np.asarray(y, dtype=np.float64), 1.0)
        if self.kind == "constant":
            return np.full_like(local, self.value)
        if self.kind == "sine":
            return self.amplitude * np.sin(2.0 * np.pi * local) + self.offset
        if self.kind == "piecewise_constant":
            piece = np.searchsorted(np.asarray(self.breakpoints), local, side="right") - 1
            return np.asarray(self.values, dtype=np.float64)[piece]
        samples = np.asarray(self.values, dtype=np.float64)
        grid = np.arange(len(samples) + 1) / len(samples)
        return np.interp(local, grid, np.append(samples, samples[0]))

    def scaled(self, epsilon: float) -> Callable[[ArrayLike], NDArray[np.float64]]:
        """Return ``x -> profile(x / epsilon)``, the coefficient of the ``epsilon``-periodic medium."""
        if epsilon <= 0.0:
            msg = f"epsilon must be positive, got {epsilon}"
            raise ValueError(msg)
        return lambda x: self(np.asarray(x, dtype=np.float64) / epsilon)

    @property
    def lower_bound(self) -> float:
        """The infimum over one period."""
        if self.kind == "constant":
            return self.value
        if self.kind == "sine":
            return self.offset - abs(self.amplitude)
        return min(self.values)

    @property
    def upper_bound(self) -> float:
        """The supremum over one period."""
        if self.kind == "constant":
            return self.value
        if self.kind == "sine":
            return self.offset + abs(self.amplitude)
        return max(self.values)

    @property
    def is_constant(self) -> bool:
        """Whether the profile takes a single value."""
        return self.lower_bound == self.upper_bound

    def mean(self) -> float:
        """The arithmetic mean over one period."""
        if self.kind == "constant":
            return self.value
        if self.kind == "sine":
            return self.offset
        if self.kind == "piecewise_constant":
            return float(np.dot(self._piece_lengths(), self.values))
        # the periodic trapezoid rule gives equal weights to the samples
        return float(np.mean(self.values))

    def harmonic_mean(self) -> float:
        """The harmonic mean ``(∫ 1/a)^-1`` over one period.

        This is the classical homogenized coefficient of the low-frequency regime.
        """
        if self.kind == "constant":
            return self.value
        if self.kind == "sine":
            return float(np.sqrt(self.offset**2 - self.amplitude**2))
        if self.kind == "piecewise_constant":
            return float(1.0 / np.sum(self._piece_lengths() / np.asarray(self.values)))
        left = np.asarray(self.values, dtype=np.float64)
        right = np.roll(left, -1)
        width = 1.0 / len(left)
        same = np.isclose(left, right, rtol=1e-14, atol=0.0)
        safe = np.where(same, 1.0, right - left)
        integrals = np.where(same, width / left, width * np.log(right / left) / safe)
        return float(1.0 / np.sum(integrals))

    def _piece_lengths(self) -> NDArray[np.float64]:
        """Lengths of the pieces of a piecewise-constant profile."""
        edges = np.append(np.asarray(self.breakpoints, dtype=np.float64), 1.0)
        return np.diff(edges)
