"""Analytic quantum-state families with exact quadrature laws and samplers.

Variants and their laws (units: vacuum variance 1 in both quadratures):

==================  =======================  =========================
variant             P(x)                     P(p)
==================  =======================  =========================
Coherent(alpha)     Gaussian(2*alpha, 1)     Gaussian(0, 1)
Cat(alpha)          half/half Gaussians      fringe law (CatFringe)
                    at +-2*alpha, var 1
Squeezed(r)         Gaussian(0, e^{2r})      Gaussian(0, e^{-2r})
TwoModeSqueezed(r)  Gaussian(0, cosh 2r)     Gaussian(0, cosh 2r)
PhenomGaussian      Gaussian(0, var_x)       Gaussian(0, var_p)
==================  =======================  =========================

The cat phase convention is the e^{+-i pi/4} superposition, which makes the
fringe term +sin(2*alpha*p) and p the squeezed quadrature. The two-mode
joint momentum law is the bivariate Gaussian with marginals cosh 2r and
covariance -sinh 2r, the unique choice for which the normalized sums obey
var((p^A+p^B)/sqrt(2)) = e^{-2r} and var((x^A+x^B)/sqrt(2)) = e^{+2r}.

All samplers are deterministic functions of (state, n, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, SamplerStallError, UnsupportedVariantError
from .stats import CatFringe, Gaussian, GaussianMixture

__all__ = [
    "Coherent",
    "Cat",
    "Squeezed",
    "TwoModeSqueezed",
    "PhenomGaussian",
    "StateModel",
    "pdf_x",
    "pdf_p",
    "sum_quadrature_laws",
    "density_matrix_element",
    "tmss_inference",
    "sample",
    "state_from_spec",
]


@dataclass(frozen=True)
class Coherent:
    alpha: float


@dataclass(frozen=True)
class Cat:
    alpha: float


@dataclass(frozen=True)
class Squeezed:
    r: float

    def __post_init__(self):
        if self.r < 0.0:
            raise DegenerateInputError("squeezing parameter r must be >= 0")


@dataclass(frozen=True)
class TwoModeSqueezed:
    r: float

    def __post_init__(self):
        if self.r < 0.0:
            raise DegenerateInputError("squeezing parameter r must be >= 0")


@dataclass(frozen=True)
class PhenomGaussian:
    """Phenomenological Gaussian statistics with var_x * var_p >= 1."""

    var_x: float
    var_p: float

    def __post_init__(self):
        if self.var_x <= 0.0 or self.var_p <= 0.0:
            raise DegenerateInputError("variances must be positive")
        if self.var_x * self.var_p < 1.0 - 1e-12:
            raise DegenerateInputError(
                "inadmissible Gaussian model: var_x*var_p < 1 breaks the uncertainty bound"
            )


StateModel = Coherent | Cat | Squeezed | TwoModeSqueezed | PhenomGaussian


def pdf_x(state: StateModel):
    """Exact x-quadrature law of the state."""
    if isinstance(state, Coherent):
        return Gaussian(2.0 * state.alpha, 1.0)
    if isinstance(state, Cat):
        a = 2.0 * state.alpha
        return GaussianMixture((0.5, 0.5), (-a, a), (1.0, 1.0))
    if isinstance(state, Squeezed):
        return Gaussian(0.0, math.exp(2.0 * state.r))
    if isinstance(state, TwoModeSqueezed):
        return Gaussian(0.0, math.cosh(2.0 * state.r))
    if isinstance(state, PhenomGaussian):
        return Gaussian(0.0, state.var_x)
    raise UnsupportedVariantError(f"unknown state {state!r}")


def pdf_p(state: StateModel):
    """Exact p-quadrature law (marginal P^A for the two-mode state)."""
    if isinstance(state, Coherent):
        return Gaussian(0.0, 1.0)
    if isinstance(state, Cat):
        return CatFringe(state.alpha)
    if isinstance(state, Squeezed):
        return Gaussian(0.0, math.exp(-2.0 * state.r))
    if isinstance(state, TwoModeSqueezed):
        return Gaussian(0.0, math.cosh(2.0 * state.r))
    if isinstance(state, PhenomGaussian):
        return Gaussian(0.0, state.var_p)
    raise UnsupportedVariantError(f"unknown state {state!r}")


def sum_quadrature_laws(state: TwoModeSqueezed):
    """Laws of (x^A+x^B)/sqrt(2) and (p^A+p^B)/sqrt(2) for the two-mode state.

    These coincide with the single-mode squeezed laws: Gaussian(0, e^{2r})
    and Gaussian(0, e^{-2r}).
    """
    if not isinstance(state, TwoModeSqueezed):
        raise UnsupportedVariantError("sum quadratures exist only for TwoModeSqueezed")
    return Gaussian(0.0, math.exp(2.0 * state.r)), Gaussian(0.0, math.exp(-2.0 * state.r))


def density_matrix_element(state: StateModel, x: float, x2: float):
    """Position-basis density matrix element <x|rho|x2>.

    Coherent and squeezed variants return the real element; the cat variant
    returns the modulus
    sqrt(cosh 2ax * cosh 2ax2) * exp(-(x^2+x2^2)/4 - 2a^2) / sqrt(2 pi).
    """
    inv_sqrt_2pi = 1.0 / math.sqrt(2.0 * math.pi)
    if isinstance(state, Coherent):
        c = 2.0 * state.alpha
        return inv_sqrt_2pi * math.exp(-((x - c) ** 2 + (x2 - c) ** 2) / 4.0)
    if isinstance(state, Squeezed):
        sigma = math.exp(2.0 * state.r)
        return math.exp(-(x * x + x2 * x2) / (4.0 * sigma)) / math.sqrt(
            2.0 * math.pi * sigma
        )
    if isinstance(state, Cat):
        a = state.alpha
        # log-space to keep cosh from overflowing at large alpha*x
        log_term = 0.5 * (_log_cosh(2.0 * a * x) + _log_cosh(2.0 * a * x2))
        return inv_sqrt_2pi * math.exp(
            -(x * x + x2 * x2) / 4.0 - 2.0 * a * a + log_term
        )
    raise UnsupportedVariantError(
        "density matrix elements are defined for Coherent, Cat and Squeezed"
    )


def _log_cosh(t: float) -> float:
    t = abs(t)
    return t + math.log1p(math.exp(-2.0 * t)) - math.log(2.0)


def tmss_inference(r: float) -> tuple[float, float]:
    """Optimal linear gain and minimized inference variance of the two-mode state.

    For marginals cosh 2r and momentum covariance -sinh 2r the raw-moment
    gain <p^A p^B>/<(p^B)^2> equals -tanh 2r and achieves the minimum
    inference variance 1/cosh 2r, saturating var(x^A) * var_inf = 1.
    """
    if r < 0.0:
        raise DegenerateInputError("r must be >= 0")
    return -math.tanh(2.0 * r), 1.0 / math.cosh(2.0 * r)


# ---------------------------------------------------------------------------
# Seeded Monte Carlo samplers
# ---------------------------------------------------------------------------

_STALL_BUDGET = 10_000  # rejections per accepted draw; unreachable for a valid law


def sample(state: StateModel, quadrature: str, n: int, seed: int):
    """Draw ``n`` i.i.d. samples of the requested quadrature.

    ``quadrature`` is "x", "p" or (TwoModeSqueezed only) "joint-p", which
    returns an (n, 2) array of (p^A, p^B) pairs. Identical seeds reproduce
    bit-identical output.
    """
    if n < 1:
        raise DegenerateInputError("sample count must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))

    if quadrature == "joint-p":
        if not isinstance(state, TwoModeSqueezed):
            raise UnsupportedVariantError("joint-p sampling needs TwoModeSqueezed")
        c = math.cosh(2.0 * state.r)
        s = math.sinh(2.0 * state.r)
        cov = np.array([[c, -s], [-s, c]])
        chol = np.linalg.cholesky(cov)
        z = rng.standard_normal((n, 2))
        return z @ chol.T

    if quadrature == "x":
        law = pdf_x(state)
    elif quadrature == "p":
        law = pdf_p(state)
    else:
        raise DegenerateInputError(f"unknown quadrature {quadrature!r}")

    if isinstance(law, Gaussian):
        return law.mean + math.sqrt(law.var) * rng.standard_normal(n)
    if isinstance(law, GaussianMixture):
        comp = rng.choice(len(law.weights), size=n, p=np.asarray(law.weights))
        means = np.asarray(law.means)[comp]
        sds = np.sqrt(np.asarray(law.variances))[comp]
        return means + sds * rng.standard_normal(n)
    if isinstance(law, CatFringe):
        return _sample_cat_fringe(law.alpha, n, rng)
    raise UnsupportedVariantError(f"no sampler for law {law!r}")


def _sample_cat_fringe(alpha: float, n: int, rng: np.random.Generator):
    # Rejection against envelope 2*N(0,1); acceptance probability is exactly 1/2.
    out = np.empty(n)
    filled = 0
    rejected_streak = 0
    while filled < n:
        m = max(2 * (n - filled), 128)
        z = rng.standard_normal(m)
        u = rng.random(m)
        keep = z[u < 0.5 * (1.0 + np.sin(2.0 * alpha * z))]
        if keep.size == 0:
            rejected_streak += m
            if rejected_streak > _STALL_BUDGET:
                raise SamplerStallError("cat fringe rejection sampler stalled")
            continue
        rejected_streak = 0
        take = min(keep.size, n - filled)
        out[filled : filled + take] = keep[:take]
        filled += take
    return out


def state_from_spec(variant: str, params: dict) -> StateModel:
    """Construct a state from its wire representation (service/CLI surface)."""
    table = {
        "coherent": (Coherent, ("alpha",)),
        "cat": (Cat, ("alpha",)),
        "squeezed": (Squeezed, ("r",)),
        "two-mode-squeezed": (TwoModeSqueezed, ("r",)),
        "phenom-gaussian": (PhenomGaussian, ("var_x", "var_p")),
    }
    key = variant.lower()
    if key not in table:
        raise UnsupportedVariantError(f"unknown state variant {variant!r}")
    cls, names = table[key]
    try:
        args = [float(params[name]) for name in names]
    except KeyError as exc:
        raise DegenerateInputError(f"state {variant!r} needs parameter {exc}") from exc
    return cls(*args)
