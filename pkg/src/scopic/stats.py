"""Distribution representations and the variance machinery behind every criterion.

Units convention, fixed repo-wide: quadratures x = a + a†, p = (a - a†)/i,
so the vacuum has unit variance in both and the uncertainty bounds read
var_x * var_p >= 1 and var_x + var_p >= 2.

Five distribution kinds cover everything the criteria consume:

* ``Gaussian(mean, var)``            -- closed-form moments and tail stats.
* ``GaussianMixture(w, means, vars)``-- weighted Gaussian components.
* ``CatFringe(alpha)``               -- the fringe law
  P(p) = exp(-p^2/2) (1 + sin 2*alpha*p) / sqrt(2*pi).
* ``Empirical(samples)``             -- raw measurement records (unbiased
  estimators, ddof=1).
* ``GridLaw(points, weights)``       -- an exact discrete law on a grid
  (population moments), produced by the Fourier oracle.

``bin_stats`` partitions the outcome domain at +-S/2 into regions labeled
-1, 0, +1 and returns the conditional statistics plus the penalty term

    delta = (mu_plus + S/2)^2 + (mu_minus - S/2)^2 + S^2/2 + var_plus + var_minus

used by the binned-domain criteria.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import erfc

from .errors import (
    DegenerateConditionerError,
    DegenerateInputError,
    InsufficientConditioningError,
    InvalidMixtureError,
)

__all__ = [
    "Gaussian",
    "GaussianMixture",
    "CatFringe",
    "Empirical",
    "GridLaw",
    "Distribution",
    "BinnedStats",
    "RegionStats",
    "JointSamples",
    "moments",
    "truncated_gaussian_moments",
    "bin_stats",
    "mixture_variance",
    "linear_inference_variance",
    "optimal_gain",
    "conditional_inference_variance",
    "ConditionalVarianceResult",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _norm_pdf(z: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def _norm_sf(z: float) -> float:
    # Upper tail via erfc: accurate far into the tail, no cancellation.
    return 0.5 * erfc(z / _SQRT2)


def _norm_cdf(z: float) -> float:
    return 0.5 * erfc(-z / _SQRT2)


# ---------------------------------------------------------------------------
# Region statistics shared by every distribution kind
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegionStats:
    """Mass and conditional moments of a law restricted to [lo, hi]."""

    prob: float
    mean: float
    var: float
    defined: bool = True  # False when prob underflowed to zero


def truncated_gaussian_moments(
    mean: float, variance: float, lo: float, hi: float
) -> tuple[float, float, float]:
    """Mass, conditional mean and conditional variance of a Gaussian on [lo, hi].

    Closed forms in the Gaussian error function. ``lo``/``hi`` may be -inf/+inf.
    A region whose mass underflows below 1e-300 is reported as
    (0.0, nan, nan); callers treat it through the empty-bin convention.
    """
    if variance <= 0.0:
        raise DegenerateInputError("truncated_gaussian_moments needs variance > 0")
    if not lo < hi:
        raise DegenerateInputError("truncated_gaussian_moments needs lo < hi")
    sd = math.sqrt(variance)
    a = (lo - mean) / sd if math.isfinite(lo) else -math.inf
    b = (hi - mean) / sd if math.isfinite(hi) else math.inf

    # Z = P(a < z < b), stable in either tail.
    if a == -math.inf and b == math.inf:
        return 1.0, mean, variance
    if a == -math.inf:
        z_mass = _norm_cdf(b)
    elif b == math.inf:
        z_mass = _norm_sf(a)
    elif a > 0:  # both tails positive: difference of survival functions
        z_mass = _norm_sf(a) - _norm_sf(b)
    elif b < 0:
        z_mass = _norm_cdf(b) - _norm_cdf(a)
    else:
        z_mass = _norm_cdf(b) - _norm_cdf(a)

    if z_mass < 1e-300:
        return 0.0, math.nan, math.nan

    pa = _norm_pdf(a) if math.isfinite(a) else 0.0
    pb = _norm_pdf(b) if math.isfinite(b) else 0.0
    ea = a * pa if math.isfinite(a) else 0.0
    eb = b * pb if math.isfinite(b) else 0.0

    m1 = (pa - pb) / z_mass  # conditional mean of the standard variable
    m2 = 1.0 + (ea - eb) / z_mass - m1 * m1
    # Guard against rounding pushing a sliver-region variance below zero.
    m2 = max(m2, 0.0)
    return z_mass, mean + sd * m1, variance * m2


# ---------------------------------------------------------------------------
# Distribution kinds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gaussian:
    mean: float
    var: float

    def __post_init__(self):
        if self.var <= 0.0:
            raise DegenerateInputError("Gaussian variance must be positive")

    def moments(self) -> tuple[float, float]:
        return self.mean, self.var

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * (x - self.mean) ** 2 / self.var) / math.sqrt(
            2.0 * math.pi * self.var
        )

    def region(self, lo: float, hi: float) -> RegionStats:
        prob, cmean, cvar = truncated_gaussian_moments(self.mean, self.var, lo, hi)
        if prob == 0.0:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        return RegionStats(prob, cmean, cvar)


@dataclass(frozen=True)
class GaussianMixture:
    weights: tuple[float, ...]
    means: tuple[float, ...]
    variances: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.means) or len(self.means) != len(self.variances):
            raise InvalidMixtureError("weights/means/variances length mismatch")
        if np.any(w < 0.0) or abs(w.sum() - 1.0) > 1e-12:
            raise InvalidMixtureError("mixture weights must be >= 0 and sum to 1")

    def moments(self) -> tuple[float, float]:
        w = np.asarray(self.weights)
        m = np.asarray(self.means)
        v = np.asarray(self.variances)
        mean = float(np.dot(w, m))
        var = float(np.dot(w, v + m * m) - mean * mean)
        return mean, var

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for w, m, v in zip(self.weights, self.means, self.variances):
            out += w * np.exp(-0.5 * (x - m) ** 2 / v) / math.sqrt(2.0 * math.pi * v)
        return out

    def region(self, lo: float, hi: float) -> RegionStats:
        mass = 0.0
        first = 0.0
        second = 0.0
        for w, m, v in zip(self.weights, self.means, self.variances):
            prob, cmean, cvar = truncated_gaussian_moments(m, v, lo, hi)
            if prob == 0.0:
                continue
            part = w * prob
            mass += part
            first += part * cmean
            second += part * (cvar + cmean * cmean)
        if mass < 1e-300:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        mean = first / mass
        return RegionStats(mass, mean, max(second / mass - mean * mean, 0.0))


@dataclass(frozen=True)
class CatFringe:
    """Momentum law of the superposition (e^{i pi/4}|-a> + e^{-i pi/4}|a>)/sqrt(2).

    P(p) = exp(-p^2/2) (1 + sin 2*alpha*p) / sqrt(2*pi): mean 2a e^{-2a^2},
    raw second moment exactly 1, variance 1 - 4a^2 e^{-4a^2}.
    """

    alpha: float

    def moments(self) -> tuple[float, float]:
        a = self.alpha
        mean = 2.0 * a * math.exp(-2.0 * a * a)
        return mean, 1.0 - mean * mean

    def pdf(self, p):
        p = np.asarray(p, dtype=float)
        return (
            np.exp(-0.5 * p * p)
            * (1.0 + np.sin(2.0 * self.alpha * p))
            * _INV_SQRT_2PI
        )

    def region(self, lo: float, hi: float) -> RegionStats:
        # No closed form needed anywhere hot: adaptive quadrature suffices.
        lo_q = lo if math.isfinite(lo) else -40.0
        hi_q = hi if math.isfinite(hi) else 40.0
        if lo_q >= hi_q:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        prob = integrate.quad(self.pdf, lo_q, hi_q, limit=400)[0]
        if prob < 1e-300:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        first = integrate.quad(lambda t: t * self.pdf(t), lo_q, hi_q, limit=400)[0]
        second = integrate.quad(lambda t: t * t * self.pdf(t), lo_q, hi_q, limit=400)[0]
        mean = first / prob
        return RegionStats(prob, mean, max(second / prob - mean * mean, 0.0))


class Empirical:
    """Raw sample records; unbiased (ddof=1) moment estimators."""

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=float).ravel()
        if arr.size < 2:
            raise DegenerateInputError("empirical distribution needs >= 2 samples")
        if not np.all(np.isfinite(arr)):
            raise DegenerateInputError("empirical samples must be finite")
        self.samples = arr

    def moments(self) -> tuple[float, float]:
        return float(self.samples.mean()), float(self.samples.var(ddof=1))

    def region(self, lo: float, hi: float) -> RegionStats:
        mask = (self.samples >= lo) & (self.samples <= hi)
        n = int(mask.sum())
        if n == 0:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        sub = self.samples[mask]
        var = float(sub.var(ddof=1)) if n >= 2 else 0.0
        return RegionStats(n / self.samples.size, float(sub.mean()), var)


class GridLaw:
    """Exact discrete law on a point grid (population semantics)."""

    def __init__(self, points, weights):
        pts = np.asarray(points, dtype=float).ravel()
        w = np.asarray(weights, dtype=float).ravel()
        if pts.size != w.size or pts.size == 0:
            raise DegenerateInputError("grid law needs matching nonempty arrays")
        if np.any(w < -1e-12):
            raise DegenerateInputError("grid law weights must be nonnegative")
        w = np.clip(w, 0.0, None)
        total = w.sum()
        if total <= 0.0:
            raise DegenerateInputError("grid law has zero total mass")
        self.points = pts
        self.weights = w / total

    def moments(self) -> tuple[float, float]:
        mean = float(np.dot(self.weights, self.points))
        var = float(np.dot(self.weights, self.points**2) - mean * mean)
        return mean, max(var, 0.0)

    def region(self, lo: float, hi: float) -> RegionStats:
        mask = (self.points >= lo) & (self.points <= hi)
        mass = float(self.weights[mask].sum())
        if mass < 1e-300:
            return RegionStats(0.0, math.nan, math.nan, defined=False)
        pts = self.points[mask]
        w = self.weights[mask] / mass
        mean = float(np.dot(w, pts))
        var = max(float(np.dot(w, pts**2) - mean * mean), 0.0)
        return RegionStats(mass, mean, var)


Distribution = Gaussian | GaussianMixture | CatFringe | Empirical | GridLaw


def moments(dist: Distribution) -> tuple[float, float]:
    """(mean, variance) of the law; closed forms where they exist."""
    return dist.moments()


# ---------------------------------------------------------------------------
# Binned-domain statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BinnedStats:
    """Region probabilities and conditional moments for the ternary binning.

    Regions: x <= -S/2 (minus), -S/2 < x < S/2 (zero), x >= S/2 (plus).
    ``var_ave = p_plus*var_plus + p_minus*var_minus``; ``delta`` per the
    module docstring. Empty outer bins use the conservative convention
    mu = +-S/2, var = 0 and are flagged.
    """

    S: float
    p_minus: float
    p_zero: float
    p_plus: float
    mu_plus: float
    mu_minus: float
    var_plus: float
    var_minus: float
    var_ave: float
    delta: float
    empty_plus: bool = False
    empty_minus: bool = False

    def recompute_delta(self) -> float:
        return (
            (self.mu_plus + self.S / 2.0) ** 2
            + (self.mu_minus - self.S / 2.0) ** 2
            + self.S**2 / 2.0
            + self.var_plus
            + self.var_minus
        )


def bin_stats(dist: Distribution, S: float) -> BinnedStats:
    """Ternary-domain summary of ``dist`` at separation ``S > 0``."""
    if not S > 0.0:
        raise DegenerateInputError("bin_stats needs S > 0")
    half = S / 2.0
    minus = dist.region(-math.inf, -half)
    plus = dist.region(half, math.inf)

    empty_plus = not plus.defined
    empty_minus = not minus.defined
    p_plus = plus.prob
    p_minus = minus.prob
    p_zero = max(1.0 - p_plus - p_minus, 0.0)

    # Empty-bin convention: the infimum of the allowed mean range and zero
    # variance, which can only weaken a violation claim.
    mu_plus = half if empty_plus else plus.mean
    var_plus = 0.0 if empty_plus else plus.var
    mu_minus = -half if empty_minus else minus.mean
    var_minus = 0.0 if empty_minus else minus.var

    var_ave = p_plus * var_plus + p_minus * var_minus
    delta = (
        (mu_plus + half) ** 2
        + (mu_minus - half) ** 2
        + S * S / 2.0
        + var_plus
        + var_minus
    )
    return BinnedStats(
        S=S,
        p_minus=p_minus,
        p_zero=p_zero,
        p_plus=p_plus,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        var_plus=var_plus,
        var_minus=var_minus,
        var_ave=var_ave,
        delta=delta,
        empty_plus=empty_plus,
        empty_minus=empty_minus,
    )


def mixture_variance(components) -> float:
    """Variance of a mixture from per-component (weight, mean, variance).

    Returns sum_i w_i v_i + 0.5 * sum_{i != j} w_i w_j (m_i - m_j)^2, the
    exact decomposition into average variance plus mean spread.
    """
    comps = list(components)
    if not comps:
        raise InvalidMixtureError("mixture needs at least one component")
    w = np.asarray([c[0] for c in comps], dtype=float)
    m = np.asarray([c[1] for c in comps], dtype=float)
    v = np.asarray([c[2] for c in comps], dtype=float)
    if np.any(w < 0.0):
        raise InvalidMixtureError("mixture weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-12:
        raise InvalidMixtureError("mixture weights must sum to 1 within 1e-12")
    if np.any(v < 0.0):
        raise InvalidMixtureError("component variances must be nonnegative")
    diff = m[:, None] - m[None, :]
    spread = 0.5 * float(np.einsum("i,j,ij->", w, w, diff * diff))
    return float(np.dot(w, v)) + spread


# ---------------------------------------------------------------------------
# Joint samples and inference variances
# ---------------------------------------------------------------------------


class JointSamples:
    """Paired (pA, pB) records, optionally weighted.

    Weights exist for the concavity oracle, which merges two sample sets at
    arbitrary proportions; plain measurement data leaves them uniform.
    """

    def __init__(self, pa, pb, weights=None):
        pa = np.asarray(pa, dtype=float).ravel()
        pb = np.asarray(pb, dtype=float).ravel()
        if pa.size != pb.size:
            raise DegenerateInputError("pA/pB length mismatch")
        if pa.size < 2:
            raise DegenerateInputError("joint samples need >= 2 pairs")
        if not (np.all(np.isfinite(pa)) and np.all(np.isfinite(pb))):
            raise DegenerateInputError("joint samples must be finite")
        if weights is None:
            w = np.full(pa.size, 1.0 / pa.size)
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.size != pa.size or np.any(w < 0.0) or w.sum() <= 0.0:
                raise DegenerateInputError("invalid joint-sample weights")
            w = w / w.sum()
        self.pa = pa
        self.pb = pb
        self.weights = w

    @property
    def n(self) -> int:
        return self.pa.size

    def merge(self, other: "JointSamples", w_self: float) -> "JointSamples":
        """Weighted union representing the mixture w_self*self + (1-w_self)*other."""
        if not 0.0 <= w_self <= 1.0:
            raise DegenerateInputError("merge weight must lie in [0, 1]")
        if w_self == 0.0:
            return other
        if w_self == 1.0:
            return self
        pa = np.concatenate([self.pa, other.pa])
        pb = np.concatenate([self.pb, other.pb])
        w = np.concatenate([w_self * self.weights, (1.0 - w_self) * other.weights])
        return JointSamples(pa, pb, w)


def _weighted_var(x: np.ndarray, w: np.ndarray) -> float:
    """Unbiased weighted variance (frequency-corrected); ddof=1 for uniform w."""
    total = w.sum()
    mean = float(np.dot(w, x)) / total
    ss = float(np.dot(w, (x - mean) ** 2))
    corr = total - float(np.dot(w, w)) / total
    if corr <= 0.0:
        return 0.0
    return ss / corr


def linear_inference_variance(joint: JointSamples, g: float) -> float:
    """Variance of the linear estimate residual p_tilde = pA - g*pB."""
    resid = joint.pa - g * joint.pb
    return _weighted_var(resid, joint.weights)


def optimal_gain(joint: JointSamples) -> float:
    """Raw-second-moment gain <pA pB>/<pB^2>.

    This is the covariance-ratio minimizer of ``linear_inference_variance``
    whenever pB has zero mean; data with a displaced conditioner should be
    centered first.
    """
    second = float(np.dot(joint.weights, joint.pb**2))
    if second <= 0.0:
        raise DegenerateConditionerError("pB carries no variance")
    return float(np.dot(joint.weights, joint.pa * joint.pb)) / second


@dataclass(frozen=True)
class ConditionalVarianceResult:
    value: float
    coverage: float          # mass retained after dropping starved bins
    bins_used: int
    bin_edges: np.ndarray = field(repr=False, compare=False, default=None)


def conditional_inference_variance(
    joint: JointSamples,
    bin_width: float,
    bin_edges=None,
) -> float:
    """Average conditional variance of pA given pB binned at ``bin_width``.

    Equal-width bins over the observed pB range; bins holding fewer than two
    (positively weighted) points are dropped and the remaining mass is
    renormalized. Returns the scalar; use ``conditional_inference_detail``
    for coverage diagnostics.
    """
    return conditional_inference_detail(joint, bin_width, bin_edges).value


def conditional_inference_detail(
    joint: JointSamples,
    bin_width: float,
    bin_edges=None,
) -> ConditionalVarianceResult:
    if bin_edges is None:
        if not bin_width > 0.0:
            raise DegenerateInputError("bin_width must be positive")
        lo = float(joint.pb.min())
        hi = float(joint.pb.max())
        if hi <= lo:
            raise DegenerateConditionerError("pB carries no spread to bin")
        nbins = max(int(math.ceil((hi - lo) / bin_width)), 1)
        bin_edges = lo + bin_width * np.arange(nbins + 1)
        bin_edges[-1] = max(bin_edges[-1], hi)
    else:
        bin_edges = np.asarray(bin_edges, dtype=float)
        nbins = bin_edges.size - 1

    idx = np.clip(np.searchsorted(bin_edges, joint.pb, side="right") - 1, 0, nbins - 1)
    value = 0.0
    kept_mass = 0.0
    used = 0
    records = joint.pa + 1j * joint.pb  # distinct-record key
    for b in range(nbins):
        mask = idx == b
        w = joint.weights[mask]
        live = np.count_nonzero(w > 0.0)
        if live < 2:
            continue
        # duplicated fractional-weight copies of one record do not make a
        # bin estimable; require two distinct records
        if np.unique(records[mask][w > 0.0]).size < 2:
            continue
        mass = float(w.sum())
        # Population weighting per bin: invariant under splitting a record
        # into fractional-weight copies, so merged duplicates compare exactly.
        x = joint.pa[mask]
        mean = float(np.dot(w, x)) / mass
        var = float(np.dot(w, (x - mean) ** 2)) / mass
        value += mass * var
        kept_mass += mass
        used += 1
    if used == 0:
        raise InsufficientConditioningError("no bin holds two or more points")
    return ConditionalVarianceResult(
        value=value / kept_mass, coverage=kept_mass, bins_used=used, bin_edges=bin_edges
    )
