"""Discretized wavefunctions and the position/momentum grid transform.

The commutator convention [x, p] = 2i (vacuum variance 1 in both
quadratures) fixes the transform kernel: the momentum amplitude is

    phi(p) = (4*pi)^(-1/2) * integral psi(x) exp(-i p x / 2) dx,

realized on a uniform N-point grid (N a power of two) by an FFT. The
conjugate grid has spacing dp = 4*pi / (N*dx), so the discrete law is
exactly unitary (Parseval) and a vacuum Gaussian maps to a vacuum Gaussian.

``discretize`` builds grids for the analytic single-mode states, starting
from the default 1024 points on [-16, 16] and doubling span and point count
together until the state's position tails fit and the momentum spacing
resolves the narrowest momentum feature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, GridResolutionError, UnsupportedVariantError
from .stats import GridLaw
from .states import Cat, Coherent, PhenomGaussian, Squeezed, StateModel, pdf_p, pdf_x

__all__ = [
    "GridWavefunction",
    "momentum_law",
    "position_law",
    "audit_uncertainty",
    "discretize",
    "DEFAULT_HALF_SPAN",
    "DEFAULT_POINTS",
]

DEFAULT_HALF_SPAN = 16.0
DEFAULT_POINTS = 1024
_ALIAS_EDGE_FRACTION = 0.05
_ALIAS_MASS_LIMIT = 1e-6


@dataclass(frozen=True)
class GridWavefunction:
    """Complex amplitudes on a uniform x-grid, unit-normalized."""

    x_min: float
    dx: float
    psi: np.ndarray

    def __post_init__(self):
        n = self.psi.size
        if n == 0 or n & (n - 1) != 0:
            raise DegenerateInputError("grid size must be a power of two")
        if self.dx <= 0.0:
            raise DegenerateInputError("dx must be positive")
        norm = float(np.sum(np.abs(self.psi) ** 2) * self.dx)
        if abs(norm - 1.0) > 1e-9:
            raise DegenerateInputError(f"wavefunction norm {norm} departs from 1")

    @property
    def n(self) -> int:
        return self.psi.size

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @staticmethod
    def from_amplitudes(x_min: float, dx: float, amplitudes) -> "GridWavefunction":
        psi = np.asarray(amplitudes, dtype=complex)
        norm = math.sqrt(float(np.sum(np.abs(psi) ** 2) * dx))
        if norm == 0.0:
            raise DegenerateInputError("cannot normalize a zero wavefunction")
        return GridWavefunction(x_min, dx, psi / norm)


def position_law(psi: GridWavefunction) -> GridLaw:
    return GridLaw(psi.x, np.abs(psi.psi) ** 2 * psi.dx)


def momentum_amplitudes(psi: GridWavefunction) -> tuple[np.ndarray, np.ndarray]:
    """(p grid, phi(p)) ordered by increasing p."""
    n = psi.n
    dp = 4.0 * math.pi / (n * psi.dx)
    m = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / n)).astype(float)
    p = m * dp
    spectrum = np.fft.fftshift(np.fft.fft(psi.psi))
    phi = psi.dx / math.sqrt(4.0 * math.pi) * np.exp(-0.5j * p * psi.x_min) * spectrum
    return p, phi


def momentum_law(psi: GridWavefunction, check_alias: bool = True) -> GridLaw:
    """|phi(p)|^2 on the conjugate grid as an exact discrete law.

    Raises GridResolutionError when at least 1e-6 of the momentum mass sits
    in the outermost 5% of the p-grid (aliased content would wrap around).
    """
    p, phi = momentum_amplitudes(psi)
    dp = p[1] - p[0]
    density = np.abs(phi) ** 2
    weights = density * dp
    if check_alias:
        edge = max(int(round(_ALIAS_EDGE_FRACTION * p.size / 2)), 1)
        edge_mass = float(weights[:edge].sum() + weights[-edge:].sum())
        if edge_mass >= _ALIAS_MASS_LIMIT:
            raise GridResolutionError(
                f"momentum mass {edge_mass:.3e} in the outer 5% of the p-grid; "
                "widen or refine the x-grid"
            )
    return GridLaw(p, weights)


def audit_uncertainty(psi: GridWavefunction) -> tuple[float, float, float]:
    """(var_x, var_p, product) of the discretized state."""
    var_x = position_law(psi).moments()[1]
    var_p = momentum_law(psi).moments()[1]
    return var_x, var_p, var_x * var_p


# ---------------------------------------------------------------------------
# Analytic states on the grid
# ---------------------------------------------------------------------------


def _amplitudes_for(state: StateModel, x: np.ndarray) -> np.ndarray:
    if isinstance(state, Coherent):
        return np.exp(-((x - 2.0 * state.alpha) ** 2) / 4.0).astype(complex)
    if isinstance(state, Squeezed):
        sigma = math.exp(2.0 * state.r)
        return np.exp(-(x**2) / (4.0 * sigma)).astype(complex)
    if isinstance(state, Cat):
        a = state.alpha
        # e^{-x^2/4 - a^2} (e^{ax} - i e^{-ax}): with the e^{-ipx/2} transform
        # kernel this relative phase produces the +sin(2 alpha p) fringe
        base = -(x**2) / 4.0 - a * a
        return np.exp(base + a * x) - 1j * np.exp(base - a * x)
    raise UnsupportedVariantError(
        "grid discretization covers the single-mode Coherent, Cat and Squeezed states"
    )


def discretize(
    state: StateModel,
    half_span: float | None = None,
    points: int | None = None,
) -> GridWavefunction:
    """Place a single-mode state on a grid adequate for its tails and fringes."""
    if isinstance(state, PhenomGaussian):
        raise UnsupportedVariantError("phenomenological statistics have no wavefunction")
    if half_span is not None and points is not None:
        dx = 2.0 * half_span / points
        x = -half_span + dx * np.arange(points)
        return GridWavefunction.from_amplitudes(-half_span, dx, _amplitudes_for(state, x))

    mean_x, var_x = pdf_x(state).moments()
    sd_p = math.sqrt(pdf_p(state).moments()[1])
    half = DEFAULT_HALF_SPAN
    n = DEFAULT_POINTS
    for _ in range(8):
        extent_ok = half >= 8.0 * math.sqrt(var_x) + abs(mean_x)
        dp = 4.0 * math.pi / (2.0 * half)
        resolution_ok = dp <= 0.9 * min(sd_p, 1.0)
        if extent_ok and resolution_ok:
            break
        half *= 2.0
        n *= 2
    dx = 2.0 * half / n
    x = -half + dx * np.arange(n)
    return GridWavefunction.from_amplitudes(-half, dx, _amplitudes_for(state, x))
