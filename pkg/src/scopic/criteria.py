"""Certification inequalities and the maximum-certified-size solvers.

Binned-domain criteria (regions split at +-S/2, penalty delta from
``stats.bin_stats``):

* product form:   (var_ave + p0*delta) * var_p     >= 1
* sum form:        var_ave + var_p                 >= 2 - p0*delta

with var_p replaced by the inference variance (theorem 2) or by the
normalized sum-quadrature variance (theorem 3). Violation of any one
certifies a superposition of extent >= S located in the binned regions.

Non-locatable criteria: squeezing alone bounds the extent through
Delta p > 2/S, so an observed standard deviation d certifies S = 2/d
(theorem 4 for a single mode, 5a/5b for inference and sum quadratures).
The coherent-state refinement certifies amplitude separation
s_alpha = sqrt(1/var_p - 1) whenever var_p < 1.

Margins follow the convention margin = bound - lhs, positive exactly when
the criterion fires.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DegenerateInputError
from .stats import BinnedStats, Distribution, Gaussian, bin_stats, moments

__all__ = [
    "CriterionResult",
    "SMaxCurvePoint",
    "theorem1_product",
    "theorem1_sum",
    "theorem2",
    "theorem3",
    "theorem4_smax",
    "theorem5_smax",
    "coherent_superposition_size",
    "smax_binned",
    "scan_impure_gaussian",
    "BINNED_PRODUCT_CRITERIA",
]

BINNED_PRODUCT_CRITERIA = ("theorem1-product", "theorem2", "theorem3-product")


@dataclass(frozen=True)
class CriterionResult:
    """One criterion evaluation.

    ``S`` is the tested separation for binned criteria and the certified
    size for the non-locatable ones; the coherent-superposition criterion
    stores the amplitude separation s_alpha there (x-separation 2*s_alpha).
    ``margin_se``/``claimed`` are populated only for empirical inputs, where
    a violation is claimed only beyond k standard errors.
    """

    criterion: str
    S: float
    lhs: float
    bound: float
    violated: bool
    margin: float
    estimator: str | None = None
    margin_se: float | None = None
    claimed: bool | None = None
    note: str = ""

    def with_significance(self, se: float, k: float) -> "CriterionResult":
        claimed = bool(self.violated and self.margin > k * se)
        return replace(self, margin_se=se, claimed=claimed)


def _product_form(criterion: str, b: BinnedStats, var_p_like: float, estimator=None):
    lhs = (b.var_ave + b.p_zero * b.delta) * var_p_like
    return CriterionResult(
        criterion=criterion,
        S=b.S,
        lhs=lhs,
        bound=1.0,
        violated=lhs < 1.0,
        margin=1.0 - lhs,
        estimator=estimator,
    )


def _sum_form(criterion: str, b: BinnedStats, var_p_like: float):
    lhs = b.var_ave + var_p_like
    bound = 2.0 - b.p_zero * b.delta
    return CriterionResult(
        criterion=criterion,
        S=b.S,
        lhs=lhs,
        bound=bound,
        violated=lhs < bound,
        margin=bound - lhs,
    )


def theorem1_product(b: BinnedStats, var_p: float) -> CriterionResult:
    if not var_p > 0.0:
        raise DegenerateInputError("var_p must be positive")
    return _product_form("theorem1-product", b, var_p)


def theorem1_sum(b: BinnedStats, var_p: float) -> CriterionResult:
    if var_p < 0.0:
        raise DegenerateInputError("var_p must be nonnegative")
    return _sum_form("theorem1-sum", b, var_p)


def theorem2(b: BinnedStats, var_inf_p: float, estimator: str = "linear") -> CriterionResult:
    """Product criterion on x^A with the inference variance of p^A.

    ``estimator`` tags which inference-variance estimate was used
    ("linear" or "conditional"); the two are interchangeable here.
    """
    if not var_inf_p > 0.0:
        raise DegenerateInputError("inference variance must be positive")
    return _product_form("theorem2", b, var_inf_p, estimator=estimator)


def theorem3(b: BinnedStats, var_p_sum: float, form: str = "product") -> CriterionResult:
    """Criteria on the normalized sum quadratures (x^A+x^B)/sqrt(2), (p^A+p^B)/sqrt(2)."""
    if form == "product":
        if not var_p_sum > 0.0:
            raise DegenerateInputError("sum-quadrature variance must be positive")
        return _product_form("theorem3-product", b, var_p_sum)
    if form == "sum":
        if var_p_sum < 0.0:
            raise DegenerateInputError("sum-quadrature variance must be nonnegative")
        return _sum_form("theorem3-sum", b, var_p_sum)
    raise DegenerateInputError(f"unknown theorem-3 form {form!r}")


def _inverse_width(criterion: str, spread: float) -> CriterionResult:
    if spread < 0.0:
        raise DegenerateInputError("standard deviation must be nonnegative")
    if spread == 0.0:
        return CriterionResult(
            criterion=criterion,
            S=math.inf,
            lhs=0.0,
            bound=1.0,
            violated=True,
            margin=1.0,
            note="zero spread: unbounded certificate",
        )
    return CriterionResult(
        criterion=criterion,
        S=2.0 / spread,
        lhs=spread,
        bound=1.0,
        violated=spread < 1.0,
        margin=1.0 - spread,
    )


def theorem4_smax(delta_p: float) -> CriterionResult:
    """Certified size S = 2/Delta p from single-mode squeezing.

    The ``violated`` flag marks Delta p < 1, i.e. a certificate beyond the
    vacuum reference size S = 2.
    """
    return _inverse_width("theorem4", delta_p)


def theorem5_smax(spread: float, which: str = "theorem5a") -> CriterionResult:
    """Same inversion fed by Delta_inf p^A (5a) or Delta((p^A+p^B)/sqrt 2) (5b)."""
    if which not in ("theorem5a", "theorem5b"):
        raise DegenerateInputError(f"unknown theorem-5 tag {which!r}")
    return _inverse_width(which, spread)


def coherent_superposition_size(var_p: float) -> CriterionResult:
    """Largest certified coherent-state separation s_alpha from var_p.

    var_p < 1/(1+s^2) certifies separation s, so the largest certified value
    is s_alpha = sqrt(1/var_p - 1) whenever var_p < 1; var_p >= 1 certifies
    nothing (s_alpha = 0). The x-space separation is S_alpha = 2*s_alpha.
    """
    if not var_p > 0.0:
        raise DegenerateInputError("var_p must be positive")
    if var_p < 1.0:
        s_alpha = math.sqrt(1.0 / var_p - 1.0)
        violated = True
    else:
        s_alpha = 0.0
        violated = False
    return CriterionResult(
        criterion="coherent-superposition",
        S=s_alpha,
        lhs=var_p,
        bound=1.0,
        violated=violated,
        margin=1.0 - var_p,
        note="S holds s_alpha (amplitude units); x separation is 2*s_alpha",
    )


# ---------------------------------------------------------------------------
# Maximum certified size for the binned criteria
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SMaxCurvePoint:
    abscissa: float
    s_max: float


def _binned_evaluator(dist_x: Distribution, var_p_like: float, criterion: str):
    if criterion == "theorem1-product":
        return lambda S: theorem1_product(bin_stats(dist_x, S), var_p_like)
    if criterion == "theorem2":
        return lambda S: theorem2(bin_stats(dist_x, S), var_p_like)
    if criterion == "theorem3-product":
        return lambda S: theorem3(bin_stats(dist_x, S), var_p_like, form="product")
    raise DegenerateInputError(f"smax scan supports {BINNED_PRODUCT_CRITERIA}, got {criterion!r}")


def smax_binned(
    dist_x: Distribution,
    var_p_like: float,
    criterion: str = "theorem1-product",
    s_hi: float | None = None,
    grid_points: int = 256,
    rel_tol: float = 1e-6,
) -> tuple[float, CriterionResult]:
    """Supremum of S for which the product criterion fires, plus the result there.

    Coarse scan over ``grid_points`` values in (0, s_hi] followed by bisection
    of the outermost violated bracket; returns 0 when no grid point violates.
    Monotonicity in S is not assumed: the scan keys off the last violated
    grid point. The default ceiling s_hi = 8*stdev(dist_x) is far beyond any
    possible violation (the middle-bin penalty grows like S^2).
    """
    if not var_p_like > 0.0:
        raise DegenerateInputError("var_p_like must be positive")
    evaluate = _binned_evaluator(dist_x, var_p_like, criterion)
    if s_hi is None:
        s_hi = 8.0 * math.sqrt(moments(dist_x)[1])
    if not s_hi > 0.0:
        raise DegenerateInputError("scan ceiling must be positive")

    grid = [s_hi * k / grid_points for k in range(1, grid_points + 1)]
    flags = [evaluate(S).violated for S in grid]
    if not any(flags):
        return 0.0, evaluate(grid[0])

    last = max(i for i, f in enumerate(flags) if f)
    if last == grid_points - 1:
        res = evaluate(grid[last])
        return grid[last], replace(res, note="violated at scan ceiling; raise s_hi")

    lo, hi = grid[last], grid[last + 1]
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if evaluate(mid).violated:
            lo = mid
        else:
            hi = mid
    return lo, evaluate(lo)


def scan_impure_gaussian(
    products,
    var_p: float = math.exp(-2.0),
    criterion: str = "theorem1-product",
) -> list[SMaxCurvePoint]:
    """s_max curve over uncertainty products u = Delta x * Delta p >= 1.

    Each point fixes var_p (default: the r = 1 squeezed value e^{-2}; the
    criterion is invariant under the joint rescaling x -> l*x, p -> p/l, so
    the curve does not depend on this choice) and sets var_x = u^2 / var_p.
    The curve is monotone nonincreasing and reaches 0 near u ~ 1.66, where
    u^-2 crosses the S -> 0 limit 1 - 2/pi of the binned product.
    """
    points = []
    for u in products:
        if u < 1.0:
            raise DegenerateInputError("uncertainty products must be >= 1")
        var_x = u * u / var_p
        s_max, _ = smax_binned(Gaussian(0.0, var_x), var_p, criterion)
        points.append(SMaxCurvePoint(abscissa=float(u), s_max=s_max))
    return points
