"""Exceptions raised by blochmodes.

Every failure derives from :class:`BlochModesError` and from the builtin it refines,
so callers may catch either ``ValueError`` / ``RuntimeError`` or the specific class.
Input problems are ``ValueError`` subclasses; numerical breakdowns are
``RuntimeError`` (or ``ArithmeticError``) subclasses.
"""

from __future__ import annotations

from typing import Any


class BlochModesError(Exception):
    """Base class of every error raised by the package."""


# --------------------------------------------------------------------------- input errors


class InvalidCoefficient(BlochModesError, ValueError):  # noqa: N818
    """A coefficient profile is non-positive somewhere or malformed."""


class InvalidWavenumber(BlochModesError, ValueError):  # noqa: N818
    """A wavenumber lies outside the reduced zone ``[-1/2, 1/2)``."""


class OutOfDomain(BlochModesError, ValueError):  # noqa: N818
    """A point lies outside the domain of a finite-element function."""


class MeshMismatch(BlochModesError, ValueError):  # noqa: N818
    """Two finite-element functions live on different meshes or boundary treatments."""


class MeshCellMismatch(BlochModesError, ValueError):  # noqa: N818
    """The domain is not a whole number of cells, or elements do not align with cells."""


class ParameterMismatch(BlochModesError, ValueError):  # noqa: N818
    """Bloch data and a macroscopic solution disagree on ``k``, ``n`` or ``ell``."""


class InvalidSubsequence(BlochModesError, ValueError):  # noqa: N818
    """A convergence-study step does not give an integral number of cells."""


class ConfigError(BlochModesError, ValueError):
    """A run configuration is malformed; the message names the offending key."""


class EmptySearch(BlochModesError, ValueError):  # noqa: N818
    """A matching search space has no candidates."""


# --------------------------------------------------------------------------- numerical errors


class SolverFailure(BlochModesError, RuntimeError):  # noqa: N818
    """The generalized eigensolver did not converge.

    Parameters
    ----------
    message : str
        Human-readable description.
    diagnostics : dict[str, Any], optional
        Pencil facts useful to reproduce the failure (dof count, boundary tag, the
        backend's own message).
    """

    def __init__(self, message: str, diagnostics: dict[str, Any] | None = None) -> None:
        """Store the message and the diagnostics."""
        super().__init__(message)
        self.diagnostics: dict[str, Any] = dict(diagnostics or {})

    def __str__(self) -> str:
        """Render the message followed by the diagnostics, if any."""
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{key}={value}" for key, value in self.diagnostics.items())
        return f"{base} ({details})"


class DegenerateMacroModel(BlochModesError, ArithmeticError):  # noqa: N818
    """The coupling coefficient vanishes, so the macroscopic equation is empty."""


class PeriodicDegenerateMode(BlochModesError, ArithmeticError):  # noqa: N818
    """A Bloch mode vanishes at the origin, so the macroscopic boundary condition is void."""


class UnderdeterminedBoundary(BlochModesError, ArithmeticError):  # noqa: N818
    """Both ``k = 0`` modes vanish at the origin; the macroscopic solution is not unique."""


class DegenerateNormalization(BlochModesError, ArithmeticError):  # noqa: N818
    """A relative error was requested against a zero reference."""


class NoPhysicalCounterpart(BlochModesError, RuntimeError):  # noqa: N818
    """No macroscopic index gives a residual below one; the two-scale mode is spurious."""
