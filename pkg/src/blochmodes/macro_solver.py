"""Closed-form solutions of the macroscopic equations for ``rho = 1``.

For ``k != 0`` and each ``sigma in {k, -k}`` the amplitudes solve

    c(sigma, n) u' + λ¹ b(sigma, n) u = 0 in (0, alpha),

so ``u^sigma(x) = d^sigma exp(-λ¹ b x / c(sigma, n))`` with ``c(-k, n) = conj(c(k, n))``.
The boundary condition at ``x in {0, alpha}``,

    u^k(x) φ^k(0) exp(2 i pi l x / alpha) + u^{-k}(x) φ^{-k}(0) exp(-2 i pi l x / alpha) = 0,

quantizes ``λ¹ = c / (b alpha) (2 i pi l - i pi ell)`` for integer ``ell`` and fixes
``d^k = i δ / φ^k(0)``, ``d^{-k} = -i δ / φ^{-k}(0)``.

For ``k = 0`` with a double eigenvalue ``{n, m}`` and real modes,
``λ¹ = ell pi c(n, m) / alpha`` and with ``θ = ell pi / alpha``

    u_m(x) = d1 cos(θ x) + d2 sin(θ x),    u_n(x) = d1 sin(θ x) - d2 cos(θ x),

where ``d2 = φ_m(0)`` and ``d1 = φ_n(0)`` satisfy ``u_n φ_n(0) + u_m φ_m(0) = 0`` at both
ends. Throughout this module ``ell`` is the macroscopic index in these formulas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from blochmodes.errors import (
    DegenerateMacroModel,
    InvalidWavenumber,
    ParameterMismatch,
    PeriodicDegenerateMode,
    UnderdeterminedBoundary,
)

if TYPE_CHECKING:
    from numpy.typing import ArrayLike, NDArray

BRANCHES = ("k_nonzero", "k_zero_lambda1_zero", "k_zero_lambda1_nonzero", "degenerate")
"""The kinds of :class:`MacroSolution`."""

COUPLING_TOL = 1e-12  # |c| below this means the macroscopic equation is empty
ORIGIN_TOL = 1e-12  # |φ(0)| below this means the mode vanishes at the origin
REALITY_TOL = 1e-9  # relative imaginary part tolerated in λ¹
_SNAP_TOL = 1e-9  # relative distance to an integer below which alpha k / eps is that integer


@dataclass(frozen=True)
class EpsilonDecomposition:
    """``alpha k / epsilon = h + l`` with integer ``h >= 0`` and ``l in [0, 1)``."""

    h: int
    l: float  # noqa: E741
    k: float
    alpha: float
    epsilon: float

    @property
    def window_center(self) -> int:
        """``floor(2 k alpha / epsilon)``, the center of the macroscopic index window."""
        return 2 * self.h + int(np.floor(2.0 * self.l))

    def macro_index(self, window_ell: int) -> int:
        """The macroscopic index ``2 h - window_ell`` of a window label.

        Window labels run over ``floor(2 k alpha / eps) + {-r, ..., r}``; ``λ¹`` vanishes
        at the label ``2 h - 2 l``.
        """
        return 2 * self.h - int(window_ell)

    def window_index(self, macro_ell: int) -> int:
        """Inverse of :meth:`macro_index`."""
        return 2 * self.h - int(macro_ell)


def decompose_epsilon(alpha: float, k: float, epsilon: float) -> EpsilonDecomposition:
    """Split ``alpha k / epsilon`` into its integer part ``h`` and fractional part ``l``.

    A ratio within ``1e-9`` (relative) of an integer is snapped to it, so that e.g.
    ``0.16 * 50`` gives ``(8, 0.0)`` despite rounding.

    Raises
    ------
    InvalidWavenumber
        If ``k`` is outside ``[0, 1/2)``.
    ValueError
        If ``alpha`` or ``epsilon`` is not positive.
    """
    if not 0.0 <= k < 0.5:  # noqa: PLR2004
        msg = f"decomposition needs k in [0, 1/2), got {k}"
        raise InvalidWavenumber(msg)
    if alpha <= 0.0 or epsilon <= 0.0:
        msg = f"alpha and epsilon must be positive, got alpha={alpha}, epsilon={epsilon}"
        raise ValueError(msg)
    ratio = alpha * k / epsilon
    nearest = round(ratio)
    if abs(ratio - nearest) <= _SNAP_TOL * max(1.0, ratio):
        return EpsilonDecomposition(h=int(nearest), l=0.0, k=k, alpha=alpha, epsilon=epsilon)
    h = int(np.floor(ratio))
    return EpsilonDecomposition(h=h, l=ratio - h, k=k, alpha=alpha, epsilon=epsilon)


def first_order_eigenvalue_k(c: complex, b: float, alpha: float, l_k: float, ell: ArrayLike) -> NDArray[np.complex128]:
    """``λ¹ = c / (b alpha) (2 i pi l - i pi ell)`` for each ``ell`` (complex; real when ``c`` is imaginary)."""
    ell = np.asarray(ell, dtype=np.float64)
    return c / (b * alpha) * (2j * np.pi * l_k - 1j * np.pi * ell)


def first_order_eigenvalue_0(c_nm: complex, alpha: float, ell: ArrayLike) -> NDArray[np.complex128]:
    """``λ¹ = ell pi c(n, m) / alpha`` for each ``ell``."""
    return np.asarray(ell, dtype=np.float64) * np.pi * c_nm / alpha + 0j


@dataclass(frozen=True)
class MacroSolution:
    """A closed-form macroscopic eigenpair ``(λ¹, u)``.

    The two amplitude rows are ``(u^k, u^{-k})`` for ``k != 0`` and ``(u_n, u_m)`` for
    ``k = 0``; see :meth:`amplitudes`.

    Parameters
    ----------
    k : float
        Wavenumber.
    n : int
        Bloch mode index.
    ell : int
        Macroscopic index.
    lambda1 : float
        The first-order eigenvalue ``λ¹``.
    branch : str
        One of :data:`BRANCHES`.
    alpha : float
        Domain length.
    l_k : float
        Fractional part ``l`` of ``alpha k / epsilon`` (``0`` for ``k = 0``).
    partner : int | None
        The second index ``m`` of a ``k = 0`` pair.
    c : complex
        ``c(k, n, n)`` for ``k != 0``, ``c(0, n, m)`` for ``k = 0``.
    b : float
        ``b(k, n, n)``.
    d_plus, d_minus : complex
        ``d^k, d^{-k}`` (``k != 0``) or ``d1, d2`` (``k = 0``).
    phi0 : tuple[complex, complex]
        ``(φ_n^k(0), φ_n^{-k}(0))`` or ``(φ_n^0(0), φ_m^0(0))``.
    """

    k: float
    n: int
    ell: int
    lambda1: float
    branch: str
    alpha: float
    l_k: float = 0.0
    partner: int | None = None
    c: complex = 0j
    b: float = 1.0
    d_plus: complex = 0j
    d_minus: complex = 0j
    phi0: tuple[complex, complex] = (0j, 0j)

    @property
    def theta(self) -> float:
        """Angular frequency ``ell pi / alpha`` of the ``k = 0`` amplitudes."""
        return self.ell * np.pi / self.alpha

    def _rates(self) -> tuple[complex, complex]:
        """Exponential rates ``-λ¹ b / c(sigma)`` of the ``k != 0`` amplitudes."""
        return -self.lambda1 * self.b / self.c, -self.lambda1 * self.b / np.conj(self.c)

    def amplitudes(self, x: ArrayLike) -> NDArray[np.complex128]:
        """The two amplitude rows evaluated at ``x``, shape ``(2, *x.shape)``."""
        x = np.asarray(x, dtype=np.float64)
        if self.branch == "k_nonzero":
            rate_plus, rate_minus = self._rates()
            return np.stack([self.d_plus * np.exp(rate_plus * x), self.d_minus * np.exp(rate_minus * x)])
        if self.branch == "degenerate":
            return np.stack([np.full(x.shape, self.d_plus, dtype=np.complex128), np.zeros(x.shape, np.complex128)])
        cos, sin = np.cos(self.theta * x), np.sin(self.theta * x)
        d1, d2 = self.d_plus, self.d_minus
        return np.stack([d1 * sin - d2 * cos, d1 * cos + d2 * sin]).astype(np.complex128)

    def amplitude_derivatives(self, x: ArrayLike) -> NDArray[np.complex128]:
        """Derivatives of :meth:`amplitudes` with respect to ``x``."""
        values = self.amplitudes(x)
        if self.branch == "k_nonzero":
            rate_plus, rate_minus = self._rates()
            return np.stack([rate_plus * values[0], rate_minus * values[1]])
        if self.branch == "degenerate":
            return np.zeros_like(values)
        return np.stack([self.theta * values[1], -self.theta * values[0]])

    def ode_residual(self, x: ArrayLike) -> float:
        """Largest ``|c u' + λ¹ b u|`` over the sample points (both equations)."""
        values = self.amplitudes(x)
        slopes = self.amplitude_derivatives(x)
        if self.branch == "k_nonzero":
            first = self.c * slopes[0] + self.lambda1 * self.b * values[0]
            second = np.conj(self.c) * slopes[1] + self.lambda1 * self.b * values[1]
        elif self.branch == "degenerate":
            first = self.c * slopes[0] + self.lambda1 * self.b * values[0]
            second = np.zeros_like(first)
        else:
            # c(n, m) u_m' + λ¹ u_n = 0 and c(m, n) u_n' + λ¹ u_m = 0 with c(m, n) = -c(n, m)
            first = self.c * slopes[1] + self.lambda1 * values[0]
            second = -self.c * slopes[0] + self.lambda1 * values[1]
        return float(max(np.max(np.abs(first)), np.max(np.abs(second))))

    def boundary_residual(self) -> float:
        """Largest modulus of the macroscopic boundary condition at ``x = 0`` and ``x = alpha``."""
        ends = np.array([0.0, self.alpha])
        values = self.amplitudes(ends)
        if self.branch == "k_nonzero":
            twist = np.exp(2j * np.pi * self.l_k * ends / self.alpha)
            residual = values[0] * self.phi0[0] * twist + values[1] * self.phi0[1] / twist
        elif self.branch == "degenerate":
            return 0.0
        else:
            residual = values[0] * self.phi0[0] + values[1] * self.phi0[1]
        return float(np.max(np.abs(residual)))


def _check_real(lambda1: complex, what: str) -> float:
    if abs(lambda1.imag) > REALITY_TOL * max(1.0, abs(lambda1)):
        msg = f"{what} gives a complex first-order eigenvalue {lambda1}; the Bloch data are inconsistent"
        raise ParameterMismatch(msg)
    return float(lambda1.real)


def macro_eigenpair_k(
    c_nn: complex,
    b_nn: float,
    phi0_k: complex,
    phi0_mk: complex,
    alpha: float,
    l_k: float,
    ell: int,
    delta: float = 1.0,
    *,
    k: float = 0.0,
    n: int = 1,
) -> MacroSolution:
    """The macroscopic eigenpair of a ``k != 0`` Bloch mode.

    Parameters
    ----------
    c_nn : complex
        ``c(k, n, n)`` (purely imaginary).
    b_nn : float
        ``b(k, n, n)`` (``1`` for ``rho = 1``).
    phi0_k, phi0_mk : complex
        ``φ_n^k(0)`` and ``φ_n^{-k}(0) = conj(φ_n^k(0))``.
    alpha : float
        Domain length.
    l_k : float
        Fractional part of ``alpha k / epsilon``.
    ell : int
        Macroscopic index.
    delta : float, optional
        Real amplitude of the solution.
    k : float, optional
        Wavenumber, recorded on the result.
    n : int, optional
        Bloch index, recorded on the result.

    Raises
    ------
    DegenerateMacroModel
        If ``c_nn`` vanishes.
    PeriodicDegenerateMode
        If the mode vanishes at the origin.
    ParameterMismatch
        If the data give a complex ``λ¹``.
    """
    if abs(c_nn) <= COUPLING_TOL:
        msg = f"c(k={k}, n={n}) = {c_nn} vanishes; the macroscopic equation is empty"
        raise DegenerateMacroModel(msg)
    if min(abs(phi0_k), abs(phi0_mk)) <= ORIGIN_TOL:
        msg = f"Bloch mode n={n} at k={k} vanishes at the origin; the boundary condition is void"
        raise PeriodicDegenerateMode(msg)
    lambda1 = _check_real(complex(first_order_eigenvalue_k(c_nn, float(np.real(b_nn)), alpha, l_k, ell)), "c(k, n)")
    return MacroSolution(
        k=k,
        n=n,
        ell=int(ell),
        lambda1=lambda1,
        branch="k_nonzero",
        alpha=alpha,
        l_k=l_k,
        c=complex(c_nn),
        b=float(np.real(b_nn)),
        d_plus=1j * delta / phi0_k,
        d_minus=-1j * delta / phi0_mk,
        phi0=(complex(phi0_k), complex(phi0_mk)),
    )


def macro_eigenpair_0(
    c_nm: complex,
    phi_n0: float,
    phi_m0: float,
    alpha: float,
    ell: int,
    d2: complex | None = None,
    *,
    n: int = 1,
    m: int = 2,
) -> MacroSolution:
    """The macroscopic eigenpair of a double ``k = 0`` Bloch eigenvalue ``{n, m}``.

    With the default ``d2 = φ_m(0)`` the pair ``(d1, d2) = (φ_n(0), φ_m(0))`` satisfies the
    boundary condition in every case, including ``φ_m(0) = 0`` where it reduces to
    ``d2 = 0``. An explicit ``d2`` requires ``φ_m(0) != 0`` and sets ``d1 = d2 φ_n(0) / φ_m(0)``.
    The sign is positive: at ``x = 0`` the condition reads ``-d2 φ_n(0) + d1 φ_m(0) = 0``.

    Raises
    ------
    DegenerateMacroModel
        If ``c(0, n, m)`` vanishes.
    UnderdeterminedBoundary
        If both modes vanish at the origin.
    ParameterMismatch
        If the data give a complex ``λ¹``.
    """
    if abs(c_nm) <= COUPLING_TOL:
        msg = f"c(0, {n}, {m}) = {c_nm} vanishes; the macroscopic equation is empty"
        raise DegenerateMacroModel(msg)
    if abs(phi_n0) <= ORIGIN_TOL and abs(phi_m0) <= ORIGIN_TOL:
        msg = f"modes {n} and {m} both vanish at the origin; the macroscopic solution is not unique"
        raise UnderdeterminedBoundary(msg)
    lambda1 = _check_real(complex(first_order_eigenvalue_0(c_nm, alpha, ell)), "c(0, n, m)")
    if d2 is None:
        d1, d2 = complex(phi_n0), complex(phi_m0)
    elif abs(phi_m0) <= ORIGIN_TOL:
        msg = f"mode {m} vanishes at the origin, so d2 is forced to 0"
        raise ParameterMismatch(msg)
    else:
        d1 = d2 * phi_n0 / phi_m0
    return MacroSolution(
        k=0.0,
        n=n,
        ell=int(ell),
        lambda1=lambda1 if ell else 0.0,
        branch="k_zero_lambda1_nonzero" if ell else "k_zero_lambda1_zero",
        alpha=alpha,
        partner=m,
        c=complex(c_nm),
        d_plus=complex(d1),
        d_minus=complex(d2),
        phi0=(complex(phi_n0), complex(phi_m0)),
    )


def degenerate_macro_solution(k: float, n: int, alpha: float, c_nn: complex = 0j, delta: float = 1.0) -> MacroSolution:
    """The trivial macroscopic solution ``λ¹ = 0``, ``u = δ`` of a mode with no equation.

    Used for simple ``k = 0`` eigenvalues, where ``c(0, n, n) = 0`` and the two-scale
    mode reduces to the periodic Bloch mode itself.
    """
    return MacroSolution(
        k=k,
        n=n,
        ell=0,
        lambda1=0.0,
        branch="degenerate",
        alpha=alpha,
        c=complex(c_nn),
        d_plus=complex(delta),
    )


def neumann_boundary_residual(
    solution: MacroSolution,
    dphi0: tuple[complex, complex],
) -> NDArray[np.complex128]:
    """The Neumann macroscopic boundary condition at ``x = 0`` and ``x = alpha``.

    Same sums as :meth:`MacroSolution.boundary_residual` with the mode derivatives
    ``∂y φ(0)`` in place of ``φ(0)``. The Dirichlet closed forms do not satisfy it in
    general; this returns the two complex values for inspection.

    Parameters
    ----------
    solution : MacroSolution
        A macroscopic solution.
    dphi0 : tuple[complex, complex]
        ``(∂y φ_n^k(0), ∂y φ_n^{-k}(0))`` or ``(∂y φ_n^0(0), ∂y φ_m^0(0))``.
    """
    ends = np.array([0.0, solution.alpha])
    values = solution.amplitudes(ends)
    if solution.branch == "k_nonzero":
        twist = np.exp(2j * np.pi * solution.l_k * ends / solution.alpha)
        return values[0] * dphi0[0] * twist + values[1] * dphi0[1] / twist
    return values[0] * dphi0[0] + values[1] * dphi0[1]


@dataclass(frozen=True)
class AnalyticTwoScaleMode:
    """The exact two-scale mode of the homogeneous medium ``a = rho = 1``.

    For ``k != 0`` the Bloch pair is ``φ^{±k}(y) = exp(±2 i pi (m + k) y)`` with
    ``c = 4 i pi (m + k)``; for ``k = 0`` it is ``(√2 cos(2 pi m y), √2 sin(2 pi m y))``
    with ``c(n, m) = 4 pi m``. In both cases ``ψ`` is, up to a constant, the Dirichlet
    eigenmode ``sin(p pi x / alpha)`` with ``p = |ell + 2 h + 2 m alpha / epsilon|``.
    """

    alpha: float
    epsilon: float
    k: float
    m: int
    ell: int
    decomposition: EpsilonDecomposition
    macro: MacroSolution
    delta: float = 1.0

    @property
    def lambda0(self) -> float:
        """The Bloch eigenvalue ``4 pi² (m + k)²``."""
        return 4.0 * np.pi**2 * (self.m + self.k) ** 2

    @property
    def lambda1(self) -> float:
        """The first-order eigenvalue."""
        return self.macro.lambda1

    @property
    def gamma(self) -> float:
        """``λ⁰ + ε λ¹``."""
        return self.lambda0 + self.epsilon * self.lambda1

    @property
    def physical_index(self) -> int:
        """The Dirichlet index ``p`` with ``ψ ∝ sin(p pi x / alpha)``."""
        cells = round(self.alpha / self.epsilon)
        return abs(self.ell + 2 * self.decomposition.h + 2 * self.m * cells)

    def cell_modes(self, y: ArrayLike) -> NDArray[np.complex128]:
        """The two Bloch modes at ``y`` (rows as in :meth:`MacroSolution.amplitudes`)."""
        y = np.asarray(y, dtype=np.float64)
        if self.k != 0.0:
            phase = 2j * np.pi * (self.m + self.k) * y
            return np.stack([np.exp(phase), np.exp(-phase)])
        return np.sqrt(2.0) * np.stack([np.cos(2 * np.pi * self.m * y), np.sin(2 * np.pi * self.m * y)]) + 0j

    def psi(self, x: ArrayLike) -> NDArray[np.complex128]:
        """``ψ(x) = Σ u(x) φ(x / ε)`` (the quasi-periodic extension is the formula itself)."""
        x = np.asarray(x, dtype=np.float64)
        return np.sum(self.macro.amplitudes(x) * self.cell_modes(x / self.epsilon), axis=0)


def analytic_two_scale_oracle(
    alpha: float,
    epsilon: float,
    k: float,
    m: int,
    ell: int,
    delta: float = 1.0,
) -> AnalyticTwoScaleMode:
    """Closed-form two-scale mode of ``a = rho = 1`` for wavenumber ``k`` and branch ``m``.

    Raises
    ------
    InvalidWavenumber
        If ``k`` is outside ``[0, 1/2)``.
    DegenerateMacroModel
        If ``k = 0`` and ``m = 0`` (the constant mode has no macroscopic equation).
    """
    decomposition = decompose_epsilon(alpha, k, epsilon)
    if k != 0.0:
        c = 4j * np.pi * (m + k)
        macro = macro_eigenpair_k(c, 1.0, 1.0, 1.0, alpha, decomposition.l, ell, delta, k=k, n=m)
    else:
        macro = macro_eigenpair_0(4.0 * np.pi * m, np.sqrt(2.0), 0.0, alpha, ell, n=m, m=m)
    return AnalyticTwoScaleMode(
        alpha=alpha,
        epsilon=epsilon,
        k=k,
        m=m,
        ell=ell,
        decomposition=decomposition,
        macro=macro,
        delta=delta,
    )
