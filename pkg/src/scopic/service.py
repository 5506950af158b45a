"""Request/response models and handlers for analysis, simulation and audits.

The FastAPI app and the CLI are both thin clients of this layer: they build
the same pydantic requests and render the same pydantic responses, so every
number in a report is reproducible by replaying the echoed configuration.

Modes and admissible criteria:

* ``single``               x and p records of one mode
                           (theorem1-product, theorem1-sum, theorem4,
                           coherent-superposition)
* ``bipartite-inference``  x^A records plus (p^A, p^B) pairs
                           (theorem2, theorem5a)
* ``bipartite-sum``        records of (x^A+x^B)/sqrt2 and (p^A+p^B)/sqrt2
                           (theorem3-product, theorem3-sum, theorem5b)

For empirical inputs every margin carries a nonparametric-bootstrap standard
error and a violation is *claimed* only when the margin exceeds
``significance_k`` standard errors.
"""

from __future__ import annotations

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from . import __version__
from .criteria import (
    CriterionResult,
    coherent_superposition_size,
    smax_binned,
    scan_impure_gaussian,
    theorem1_product,
    theorem1_sum,
    theorem2,
    theorem3,
    theorem4_smax,
    theorem5_smax,
)
from .errors import DegenerateInputError, ModeMismatchError
from .gridspace import audit_uncertainty, discretize
from .oracle import (
    appendix_a_decompose,
    appendix_b_audit,
    fuzz_restricted_mixtures,
    random_zeroed_density,
)
from .states import (
    Cat,
    Squeezed,
    TwoModeSqueezed,
    pdf_p,
    pdf_x,
    sample,
    state_from_spec,
    sum_quadrature_laws,
    tmss_inference,
)
from .stats import (
    Empirical,
    JointSamples,
    bin_stats,
    conditional_inference_detail,
    conditional_inference_variance,
    linear_inference_variance,
    optimal_gain,
)

MODE_CRITERIA = {
    "single": ("theorem1-product", "theorem1-sum", "theorem4", "coherent-superposition"),
    "bipartite-inference": ("theorem2", "theorem5a"),
    "bipartite-sum": ("theorem3-product", "theorem3-sum", "theorem5b"),
}
_BINNED = {"theorem1-product", "theorem1-sum", "theorem2", "theorem3-product", "theorem3-sum"}


# ---------------------------------------------------------------------------
# Wire models
# ---------------------------------------------------------------------------


class StateSpec(BaseModel):
    variant: Literal[
        "coherent", "cat", "squeezed", "two-mode-squeezed", "phenom-gaussian"
    ]
    params: dict[str, float] = Field(default_factory=dict)

    def build(self):
        return state_from_spec(self.variant, self.params)


class AnalysisConfig(BaseModel):
    mode: Literal["single", "bipartite-inference", "bipartite-sum"] = "single"
    s_values: list[float] = Field(default_factory=lambda: [round(0.25 * k, 10) for k in range(1, 33)])
    criteria: list[str] = Field(default_factory=lambda: ["theorem1-product", "theorem4"])
    estimator: Literal["conditional", "linear"] = "linear"
    bin_width: float | None = None
    bootstrap_replicas: int = Field(default=200, ge=0)
    significance_k: float = Field(default=3.0, gt=0.0)
    seed: int = 0
    refine_smax: bool = True
    soundness_trials: int = Field(default=0, ge=0)  # attach an oracle summary when > 0

    @field_validator("s_values")
    @classmethod
    def _grid_positive_increasing(cls, v: list[float]) -> list[float]:
        if not v:
            raise ValueError("S grid must be nonempty")
        if any(s <= 0.0 for s in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("S grid must be positive and strictly increasing")
        return v

    @field_validator("criteria")
    @classmethod
    def _criteria_known(cls, v: list[str]) -> list[str]:
        known = set().union(*MODE_CRITERIA.values())
        if not v:
            raise ValueError("select at least one criterion")
        for c in v:
            if c not in known:
                raise ValueError(f"unknown criterion {c!r}")
        return v

    @model_validator(mode="after")
    def _criteria_match_mode(self):
        allowed = set(MODE_CRITERIA[self.mode])
        stray = [c for c in self.criteria if c not in allowed]
        if stray:
            raise ValueError(f"criteria {stray} not defined for mode {self.mode!r}")
        return self


class CriterionRecord(BaseModel):
    criterion: str
    S: float
    lhs: float
    bound: float
    margin: float
    violated: bool
    margin_se: float | None = None
    claimed: bool | None = None
    estimator: str | None = None
    note: str = ""

    @classmethod
    def from_result(cls, r: CriterionResult) -> "CriterionRecord":
        return cls(
            criterion=r.criterion,
            S=float(r.S),
            lhs=float(r.lhs),
            bound=float(r.bound),
            margin=float(r.margin),
            violated=bool(r.violated),
            margin_se=None if r.margin_se is None else float(r.margin_se),
            claimed=r.claimed,
            estimator=r.estimator,
            note=r.note,
        )


class InputSummary(BaseModel):
    n_x: int | None = None
    n_p: int | None = None
    n_pairs: int | None = None
    mean_x: float | None = None
    var_x: float | None = None
    mean_p: float | None = None
    var_p: float | None = None
    var_inf_p: float | None = None
    gain: float | None = None
    conditioning_coverage: float | None = None  # mass kept after bin starvation


class Provenance(BaseModel):
    package: str = "scopic"
    version: str = __version__
    seed: int
    config: AnalysisConfig
    state: StateSpec | None = None
    n: int | None = None


class Report(BaseModel):
    results: list[CriterionRecord]
    s_max: dict[str, float]
    input_summary: InputSummary
    soundness: "VerifyReport | None" = None
    provenance: Provenance


class AnalyzeRequest(BaseModel):
    config: AnalysisConfig = Field(default_factory=AnalysisConfig)
    x: list[float] | None = None
    p: list[float] | None = None
    pairs: list[tuple[float, float]] | None = None


class SimulateRequest(BaseModel):
    state: StateSpec
    n: int = Field(default=100_000, ge=2)
    config: AnalysisConfig = Field(default_factory=AnalysisConfig)


class SmaxRequest(BaseModel):
    state: StateSpec
    criterion: Literal["theorem1-product", "theorem2", "theorem3-product"] = (
        "theorem1-product"
    )
    s_hi: float | None = None


class SmaxResponse(BaseModel):
    criterion: str
    s_max: float
    at_smax: CriterionRecord
    state: StateSpec


class CurveRequest(BaseModel):
    task: Literal["fig8", "fig10", "fig10-inset", "cat-smax"]
    start: float | None = None
    stop: float | None = None
    points: int = Field(default=61, ge=2)


class CurveResponse(BaseModel):
    task: str
    header: list[str]
    rows: list[list[float]]


class VerifyRequest(BaseModel):
    s_caps: list[float] = Field(default_factory=lambda: [1.0, 2.0, 4.0, 8.0])
    trials: int = Field(default=1000, ge=1)
    appendix_a_trials: int = Field(default=100, ge=0)
    appendix_b_trials: int = Field(default=100, ge=0)
    seed: int = 0


class FuzzSummary(BaseModel):
    s_cap: float
    trials: int
    assertions: int
    violations: int
    min_delta_p: float
    delta_p_bound: float
    worst_product_margin: float
    worst_sum_margin: float
    worst_dominance_gap: float
    max_support_variance_ratio: float


class VerifyReport(BaseModel):
    sound: bool
    fuzz: list[FuzzSummary]
    appendix_a: dict[str, float]
    appendix_b: dict[str, float]
    grid_audit: dict[str, float]
    provenance: dict[str, int | str]


Report.model_rebuild()


# ---------------------------------------------------------------------------
# Analysis handler
# ---------------------------------------------------------------------------


def _criterion_closures(config: AnalysisConfig, x, p, pairs):
    """Build per-criterion evaluators over index-resampled data.

    Each closure maps (x_idx, aux_idx) -> list[CriterionResult]; None indices
    mean "use the full sample". This single entry point serves both the
    point estimates and the bootstrap replicas.
    """
    mode = config.mode
    if mode == "single" or mode == "bipartite-sum":
        if x is None or p is None:
            raise ModeMismatchError(f"mode {mode!r} needs x and p sample sets")
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        aux_n = p.size

        def spreads(x_idx, p_idx):
            xs = x if x_idx is None else x[x_idx]
            ps = p if p_idx is None else p[p_idx]
            return xs, float(np.var(ps, ddof=1))

    elif mode == "bipartite-inference":
        if x is None or pairs is None:
            raise ModeMismatchError("bipartite-inference needs x^A and (pA,pB) pairs")
        x = np.asarray(x, dtype=float)
        pa = np.asarray([q[0] for q in pairs], dtype=float)
        pb = np.asarray([q[1] for q in pairs], dtype=float)
        aux_n = pa.size

        def spreads(x_idx, pair_idx):
            xs = x if x_idx is None else x[x_idx]
            a = pa if pair_idx is None else pa[pair_idx]
            b = pb if pair_idx is None else pb[pair_idx]
            joint = JointSamples(a, b)
            if config.estimator == "linear":
                var_inf = linear_inference_variance(joint, optimal_gain(joint))
            else:
                width = config.bin_width
                if width is None:
                    width = float(b.std(ddof=1)) / 4.0
                var_inf = conditional_inference_variance(joint, width)
            return xs, var_inf

    else:  # pragma: no cover - pydantic restricts the literal
        raise ModeMismatchError(f"unknown mode {mode!r}")

    def evaluate(x_idx=None, aux_idx=None) -> list[CriterionResult]:
        xs, spread_sq = spreads(x_idx, aux_idx)
        out: list[CriterionResult] = []
        emp = Empirical(xs)
        binned = [c for c in config.criteria if c in _BINNED]
        if binned:
            for S in config.s_values:
                b = bin_stats(emp, S)
                for c in binned:
                    out.append(_eval_binned(c, b, spread_sq, config.estimator))
        for c in config.criteria:
            if c in _BINNED:
                continue
            out.append(_eval_unbinned(c, spread_sq))
        return out

    return evaluate, x.size, aux_n


def _eval_binned(criterion, b, spread_sq, estimator):
    if criterion == "theorem1-product":
        return theorem1_product(b, spread_sq)
    if criterion == "theorem1-sum":
        return theorem1_sum(b, spread_sq)
    if criterion == "theorem2":
        return theorem2(b, spread_sq, estimator=estimator)
    if criterion == "theorem3-product":
        return theorem3(b, spread_sq, form="product")
    if criterion == "theorem3-sum":
        return theorem3(b, spread_sq, form="sum")
    raise DegenerateInputError(f"unknown binned criterion {criterion!r}")


def _eval_unbinned(criterion, spread_sq):
    if criterion == "theorem4":
        return theorem4_smax(math.sqrt(spread_sq))
    if criterion == "theorem5a":
        return theorem5_smax(math.sqrt(spread_sq), "theorem5a")
    if criterion == "theorem5b":
        return theorem5_smax(math.sqrt(spread_sq), "theorem5b")
    if criterion == "coherent-superposition":
        return coherent_superposition_size(spread_sq)
    raise DegenerateInputError(f"unknown criterion {criterion!r}")


def _empirical_smax(config, results_by_criterion, margin_at):
    """Largest claimed-violated S per criterion, bisection-refined.

    The grid decides with the significance gate (margin > k * bootstrap SE);
    the sub-grid refinement keeps the same gate, interpolating the SE
    between the bracketing grid points. Without bootstrap replicas the gate
    degenerates to the plain point-margin boundary.
    """
    k = config.significance_k
    s_max: dict[str, float] = {}
    for crit, rows in results_by_criterion.items():
        if crit not in _BINNED:
            r = rows[-1]
            fired = r.claimed if r.claimed is not None else r.violated
            s_max[crit] = (float(r.S) if math.isfinite(r.S) else math.inf) if fired else 0.0
            continue
        fired = [r for r in rows if (r.claimed if r.claimed is not None else r.violated)]
        if not fired:
            s_max[crit] = 0.0
            continue
        best = max(r.S for r in fired)
        later = [r for r in rows if r.S > best]
        if later and config.refine_smax:
            upper = min(later, key=lambda r: r.S)
            lower = next(r for r in fired if r.S == best)
            lo, hi = lower.S, upper.S

            def se_at(S: float) -> float:
                if lower.margin_se is None or upper.margin_se is None:
                    return 0.0
                t = (S - lo) / (hi - lo) if hi > lo else 0.0
                return (1.0 - t) * lower.margin_se + t * upper.margin_se

            a, b = lo, hi
            for _ in range(40):
                if b - a <= 1e-6 * b:
                    break
                mid = 0.5 * (a + b)
                if margin_at(crit, mid) > k * se_at(mid):
                    a = mid
                else:
                    b = mid
            best = a
        s_max[crit] = float(best)
    return s_max


def run_analysis(request: AnalyzeRequest) -> Report:
    """Evaluate the configured criteria over the S grid and render a Report."""
    config = request.config
    evaluate, n_x, n_aux = _criterion_closures(config, request.x, request.p, request.pairs)

    point = evaluate()
    # Bootstrap SEs: resample x-records and the p-side records independently.
    if config.bootstrap_replicas > 0:
        seeds = np.random.SeedSequence(config.seed).spawn(config.bootstrap_replicas)
        margins = np.empty((config.bootstrap_replicas, len(point)))
        for rep, child in enumerate(seeds):
            rng = np.random.Generator(np.random.PCG64(child))
            xi = rng.integers(0, n_x, n_x)
            ai = rng.integers(0, n_aux, n_aux)
            margins[rep] = [r.margin for r in evaluate(xi, ai)]
        ses = margins.std(axis=0, ddof=1)
        point = [
            r.with_significance(float(se), config.significance_k)
            for r, se in zip(point, ses)
        ]

    by_criterion: dict[str, list[CriterionResult]] = {}
    for r in point:
        by_criterion.setdefault(r.criterion, []).append(r)

    def margin_at(criterion: str, S: float) -> float:
        single = config.model_copy(update={"s_values": [S], "criteria": [criterion]})
        ev, _, _ = _criterion_closures(single, request.x, request.p, request.pairs)
        return max(r.margin for r in ev() if r.criterion == criterion)

    s_max = _empirical_smax(config, by_criterion, margin_at)

    soundness = None
    if config.soundness_trials > 0:
        soundness = verify(
            VerifyRequest(
                trials=config.soundness_trials,
                appendix_a_trials=config.soundness_trials,
                appendix_b_trials=min(config.soundness_trials, 20),
                seed=config.seed,
            )
        )

    summary = _summarize_inputs(config, request)
    return Report(
        results=[CriterionRecord.from_result(r) for r in point],
        s_max=s_max,
        input_summary=summary,
        soundness=soundness,
        provenance=Provenance(seed=config.seed, config=config),
    )


def _summarize_inputs(config: AnalysisConfig, request: AnalyzeRequest) -> InputSummary:
    out = InputSummary()
    if request.x is not None:
        xs = np.asarray(request.x, dtype=float)
        out.n_x = int(xs.size)
        out.mean_x = float(xs.mean())
        out.var_x = float(xs.var(ddof=1))
    if request.p is not None:
        ps = np.asarray(request.p, dtype=float)
        out.n_p = int(ps.size)
        out.mean_p = float(ps.mean())
        out.var_p = float(ps.var(ddof=1))
    if request.pairs is not None:
        pa = np.asarray([q[0] for q in request.pairs], dtype=float)
        pb = np.asarray([q[1] for q in request.pairs], dtype=float)
        out.n_pairs = int(pa.size)
        joint = JointSamples(pa, pb)
        gain = optimal_gain(joint)
        out.gain = float(gain)
        if config.estimator == "linear":
            out.var_inf_p = float(linear_inference_variance(joint, gain))
        else:
            width = config.bin_width or float(pb.std(ddof=1)) / 4.0
            detail = conditional_inference_detail(joint, width)
            out.var_inf_p = float(detail.value)
            out.conditioning_coverage = float(detail.coverage)
    return out


# ---------------------------------------------------------------------------
# Simulation, smax, curves, verification
# ---------------------------------------------------------------------------


def simulate(request: SimulateRequest) -> Report:
    state = request.state.build()
    config = request.config
    n = request.n
    x_seed, p_seed = (int(s.generate_state(1)[0]) for s in
                      np.random.SeedSequence(config.seed).spawn(2))

    if config.mode == "single":
        x = sample(state, "x", n, x_seed)
        p = sample(state, "p", n, p_seed)
        req = AnalyzeRequest(config=config, x=list(map(float, x)), p=list(map(float, p)))
    elif config.mode == "bipartite-inference":
        if not isinstance(state, TwoModeSqueezed):
            raise ModeMismatchError("bipartite-inference simulation needs two-mode-squeezed")
        x = sample(state, "x", n, x_seed)
        pairs = sample(state, "joint-p", n, p_seed)
        req = AnalyzeRequest(
            config=config,
            x=list(map(float, x)),
            pairs=[(float(a), float(b)) for a, b in pairs],
        )
    else:  # bipartite-sum
        if not isinstance(state, TwoModeSqueezed):
            raise ModeMismatchError("bipartite-sum simulation needs two-mode-squeezed")
        x_law, p_law = sum_quadrature_laws(state)
        rng_x = np.random.Generator(np.random.PCG64(x_seed))
        rng_p = np.random.Generator(np.random.PCG64(p_seed))
        x = x_law.mean + math.sqrt(x_law.var) * rng_x.standard_normal(n)
        p = p_law.mean + math.sqrt(p_law.var) * rng_p.standard_normal(n)
        req = AnalyzeRequest(config=config, x=list(map(float, x)), p=list(map(float, p)))

    report = run_analysis(req)
    report.provenance.state = request.state
    report.provenance.n = n
    return report


def smax_analytic(request: SmaxRequest) -> SmaxResponse:
    state = request.state.build()
    crit = request.criterion
    if crit == "theorem1-product":
        dist_x = pdf_x(state)
        var_like = pdf_p(state).moments()[1]
    elif crit == "theorem2":
        if isinstance(state, TwoModeSqueezed):
            dist_x = pdf_x(state)
            var_like = tmss_inference(state.r)[1]
        else:
            # phenomenological statistics: treat var_p as the inference variance
            dist_x = pdf_x(state)
            var_like = pdf_p(state).moments()[1]
    else:  # theorem3-product
        if not isinstance(state, TwoModeSqueezed):
            raise ModeMismatchError("theorem3 scan needs two-mode-squeezed")
        dist_x, p_law = sum_quadrature_laws(state)
        var_like = p_law.var
    s_max, at = smax_binned(dist_x, var_like, crit, s_hi=request.s_hi)
    return SmaxResponse(
        criterion=crit,
        s_max=float(s_max),
        at_smax=CriterionRecord.from_result(at),
        state=request.state,
    )


def curve(request: CurveRequest) -> CurveResponse:
    task = request.task
    if task == "fig8":
        start = request.start if request.start is not None else 0.05
        stop = request.stop if request.stop is not None else 3.0
        alphas = np.linspace(start, stop, request.points)
        rows = [[float(a), float(pdf_p(Cat(a)).moments()[1])] for a in alphas]
        return CurveResponse(task=task, header=["alpha", "var_p"], rows=rows)

    if task == "cat-smax":
        start = request.start if request.start is not None else 0.05
        stop = request.stop if request.stop is not None else 3.0
        alphas = np.linspace(start, stop, request.points)
        rows = []
        for a in alphas:
            res = theorem4_smax(math.sqrt(pdf_p(Cat(a)).moments()[1]))
            rows.append([float(a), float(res.S)])
        return CurveResponse(task=task, header=["alpha", "s_certified"], rows=rows)

    if task == "fig10":
        start = request.start if request.start is not None else 0.0
        stop = request.stop if request.stop is not None else 3.0
        rs = np.linspace(start, stop, request.points)
        rows = []
        for r in rs:
            st = Squeezed(float(r))
            s_binned, _ = smax_binned(pdf_x(st), pdf_p(st).moments()[1], "theorem1-product")
            s_free = theorem4_smax(math.sqrt(pdf_p(st).moments()[1])).S
            rows.append([float(r), float(s_binned), float(s_free)])
        return CurveResponse(
            task=task, header=["r", "s_max_binned", "s_max_nonlocatable"], rows=rows
        )

    # fig10-inset
    start = request.start if request.start is not None else 1.0
    stop = request.stop if request.stop is not None else 1.7
    products = np.linspace(start, stop, request.points)
    rows = []
    var_p = math.exp(-2.0)
    for pt in scan_impure_gaussian(products, var_p=var_p):
        stdev_x = pt.abscissa / math.sqrt(var_p)
        rows.append([float(pt.abscissa), float(pt.s_max / stdev_x)])
    return CurveResponse(task=task, header=["uncertainty_product", "s_max_over_stdev"], rows=rows)


def verify(request: VerifyRequest) -> VerifyReport:
    root = np.random.SeedSequence(request.seed)
    fuzz_seed, apx_a_seed, apx_b_seed = (int(s.generate_state(1)[0]) for s in root.spawn(3))

    fuzz_rows = []
    sound = True
    for k, s_cap in enumerate(request.s_caps):
        rep = fuzz_restricted_mixtures(s_cap, request.trials, seed=fuzz_seed + k)
        sound = sound and rep.sound
        fuzz_rows.append(
            FuzzSummary(
                s_cap=rep.s_cap,
                trials=rep.trials,
                assertions=rep.assertions,
                violations=len(rep.violations),
                min_delta_p=rep.min_delta_p,
                delta_p_bound=rep.delta_p_bound,
                worst_product_margin=rep.worst_product_margin,
                worst_sum_margin=rep.worst_sum_margin,
                worst_dominance_gap=rep.worst_dominance_gap,
                max_support_variance_ratio=rep.max_support_variance_ratio,
            )
        )

    rng = np.random.Generator(np.random.PCG64(apx_a_seed))
    worst_recon = 0.0
    worst_support = 0.0
    for _ in range(request.appendix_a_trials):
        rho = random_zeroed_density(rng)
        dec = appendix_a_decompose(rho, 0, 1)
        recon = dec.w1 * (dec.rho1.matrix if dec.rho1 else 0.0) + dec.w2 * (
            dec.rho2.matrix if dec.rho2 else 0.0
        )
        worst_recon = max(worst_recon, float(np.abs(recon - rho.matrix).max()))
        if dec.rho1 is not None:
            worst_support = max(worst_support, float(abs(dec.rho1.matrix[1, 1])))
        if dec.rho2 is not None:
            worst_support = max(worst_support, float(abs(dec.rho2.matrix[0, 0])))
    apx_a = {
        "trials": float(request.appendix_a_trials),
        "max_reconstruction_error": worst_recon,
        "max_support_leak": worst_support,
    }
    sound = sound and worst_recon < 1e-8 and worst_support < 1e-10

    rng_b = np.random.Generator(np.random.PCG64(apx_b_seed))
    worst_gap_sigma = math.inf
    failures = 0
    for _ in range(request.appendix_b_trials):
        r1, r2 = 0.3 + 0.7 * rng_b.random(2)
        jl = _tmss_joint(TwoModeSqueezed(float(r1)), 4000, int(rng_b.integers(2**31)))
        jr = _tmss_joint(TwoModeSqueezed(float(r2)), 4000, int(rng_b.integers(2**31)))
        rep = appendix_b_audit(jl, jr, float(rng_b.random()), bootstrap=60,
                               seed=int(rng_b.integers(2**31)))
        if not rep.satisfied:
            failures += 1
        if rep.se > 0:
            worst_gap_sigma = min(worst_gap_sigma, rep.gap / rep.se)
    apx_b = {
        "trials": float(request.appendix_b_trials),
        "failures": float(failures),
        "worst_gap_sigma": worst_gap_sigma if request.appendix_b_trials else 0.0,
    }
    sound = sound and failures == 0

    audit = {}
    worst = 0.0
    for label, st in [("vacuum", Squeezed(0.0)), ("squeezed_r1", Squeezed(1.0)),
                      ("squeezed_r2", Squeezed(2.0))]:
        _, _, product = audit_uncertainty(discretize(st))
        audit[label + "_product"] = float(product)
        worst = max(worst, abs(product - 1.0))
    audit["worst_product_error"] = worst
    sound = sound and worst <= 1e-6

    return VerifyReport(
        sound=sound,
        fuzz=fuzz_rows,
        appendix_a=apx_a,
        appendix_b=apx_b,
        grid_audit=audit,
        provenance={"seed": request.seed, "package": "scopic", "version": __version__},
    )


def _tmss_joint(state: TwoModeSqueezed, n: int, seed: int) -> JointSamples:
    pairs = sample(state, "joint-p", n, seed)
    return JointSamples(pairs[:, 0], pairs[:, 1])
