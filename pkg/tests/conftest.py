"""Shared fixtures and independent numeric oracles.

The oracles here deliberately avoid the library code paths they check:
region moments come from adaptive quadrature, argmins from golden-section
search, so closed forms are validated against an uninvolved method.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from scopic.stats import JointSamples
from scopic.states import TwoModeSqueezed, sample


def gaussian_pdf(x, mean, var):
    return np.exp(-0.5 * (x - mean) ** 2 / var) / math.sqrt(2.0 * math.pi * var)


def quad_region_moments(pdf, lo, hi, span=60.0):
    """(prob, cond mean, cond var) of an arbitrary density by quadrature."""
    lo_q = lo if math.isfinite(lo) else -span
    hi_q = hi if math.isfinite(hi) else span
    prob = integrate.quad(pdf, lo_q, hi_q, limit=500)[0]
    first = integrate.quad(lambda t: t * pdf(t), lo_q, hi_q, limit=500)[0]
    second = integrate.quad(lambda t: t * t * pdf(t), lo_q, hi_q, limit=500)[0]
    mean = first / prob
    return prob, mean, second / prob - mean * mean


def golden_section_argmin(f, lo, hi, tol=1e-10):
    """Golden-section search followed by one parabolic step.

    For an exactly quadratic objective the parabolic step pins the argmin to
    machine precision, independent of the closed form under test.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    mid = 0.5 * (a + b)
    h = max(0.05, 1e-3 * max(abs(mid), 1.0))
    x0, x1, x2 = mid - h, mid, mid + h
    f0, f1, f2 = f(x0), f(x1), f(x2)
    denom = (f0 - 2.0 * f1 + f2)
    if denom == 0.0:
        return mid
    return x1 - 0.5 * h * (f2 - f0) / denom


def tmss_joint(r: float, n: int, seed: int) -> JointSamples:
    pairs = sample(TwoModeSqueezed(r), "joint-p", n, seed)
    return JointSamples(pairs[:, 0], pairs[:, 1])


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(20250811))
