"""Command-line thin client over the service layer.

Subcommands: analyze, simulate, smax, curve, verify, serve. Global flags
--seed/--out/--config apply to every subcommand. Exit codes by category:

    0  success
    2  usage or configuration error
    3  sample file parse error
    4  degenerate or invalid input data
    5  mode/data mismatch
    6  soundness violation reported by the oracle suites
    1  unexpected failure
"""

from __future__ import annotations

import json
import sys

import click
from pydantic import ValidationError

from . import service
from .errors import (
    DegenerateInputError,
    ModeMismatchError,
    SampleParseError,
    ScopicError,
    SoundnessViolationError,
)
from .io import calibration_scale, ingest_samples, report_json_bytes, write_curve_csv

_EXIT_CODES = (
    (SampleParseError, 3),
    (ModeMismatchError, 5),
    (SoundnessViolationError, 6),
    (DegenerateInputError, 4),
    (ScopicError, 4),
)


def _fail(exc: Exception) -> None:
    if isinstance(exc, ValidationError):
        click.echo(f"error: invalid configuration: {exc}", err=True)
        sys.exit(2)
    for etype, code in _EXIT_CODES:
        if isinstance(exc, etype):
            click.echo(f"error: {exc}", err=True)
            sys.exit(code)
    raise exc


def _emit(ctx: click.Context, payload: dict) -> None:
    data = report_json_bytes(payload)
    out = ctx.obj.get("out")
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        click.echo(data.decode("utf-8"), nl=False)


def _config_from(ctx: click.Context, **overrides) -> service.AnalysisConfig:
    base = dict(ctx.obj.get("config") or {})
    base.setdefault("seed", ctx.obj["seed"])
    base.update({k: v for k, v in overrides.items() if v is not None})
    return service.AnalysisConfig(**base)


def _parse_s_grid(spec: str | None) -> list[float] | None:
    if spec is None:
        return None
    try:
        if ":" in spec:
            start, stop, count = spec.split(":")
            start, stop, count = float(start), float(stop), int(count)
            if count < 1 or start <= 0 or stop <= start:
                raise ValueError
            step = (stop - start) / max(count - 1, 1)
            return [start + step * k for k in range(count)]
        return [float(tok) for tok in spec.split(",") if tok]
    except ValueError:
        raise click.UsageError(f"bad S grid spec {spec!r}; use start:stop:count or v1,v2,...")


def _state_spec(variant, alpha, r, var_x, var_p) -> service.StateSpec:
    params = {}
    if alpha is not None:
        params["alpha"] = alpha
    if r is not None:
        params["r"] = r
    if var_x is not None:
        params["var_x"] = var_x
    if var_p is not None:
        params["var_p"] = var_p
    return service.StateSpec(variant=variant, params=params)


_state_options = [
    click.option("--state", "variant", required=True,
                 type=click.Choice(["coherent", "cat", "squeezed", "two-mode-squeezed",
                                    "phenom-gaussian"])),
    click.option("--alpha", type=float, default=None),
    click.option("--r", type=float, default=None),
    click.option("--var-x", type=float, default=None),
    click.option("--var-p", type=float, default=None),
]


def _with_state_options(fn):
    for opt in reversed(_state_options):
        fn = opt(fn)
    return fn


@click.group()
@click.option("--seed", type=int, default=0, show_default=True, help="Root RNG seed.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the report/curve here instead of stdout.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="JSON file with AnalysisConfig fields.")
@click.pass_context
def main(ctx: click.Context, seed: int, out: str | None, config_path: str | None):
    """Certify generalized S-scopic superpositions from quadrature statistics."""
    ctx.ensure_object(dict)
    ctx.obj["seed"] = seed
    ctx.obj["out"] = out
    if config_path:
        try:
            ctx.obj["config"] = json.loads(open(config_path, "r", encoding="utf-8").read())
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: cannot read config {config_path}: {exc}", err=True)
            sys.exit(2)
    else:
        ctx.obj["config"] = {}


@main.command()
@click.option("--x", "x_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Single-column x (or sum-quadrature x) records.")
@click.option("--p", "p_path", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Single-column p (or sum-quadrature p) records.")
@click.option("--pairs", "pairs_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Two-column (pA, pB) records.")
@click.option("--calibration", "cal_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Vacuum-reference records; rescales inputs to vacuum variance 1.")
@click.option("--mode", type=click.Choice(list(service.MODE_CRITERIA)), default=None)
@click.option("--criteria", default=None, help="Comma-separated criterion ids.")
@click.option("--s-grid", default=None, help="start:stop:count or comma list.")
@click.option("--estimator", type=click.Choice(["linear", "conditional"]), default=None)
@click.option("--bin-width", type=float, default=None)
@click.option("--replicas", type=int, default=None, help="Bootstrap replicas.")
@click.option("--significance-k", type=float, default=None)
@click.option("--soundness-trials", type=int, default=None,
              help="Attach an oracle-suite summary with this many trials.")
@click.pass_context
def analyze(ctx, x_path, p_path, pairs_path, cal_path, mode, criteria, s_grid,
            estimator, bin_width, replicas, significance_k, soundness_trials):
    """Evaluate criteria on recorded quadrature samples."""
    try:
        scale = 1.0
        if cal_path:
            scale = calibration_scale(ingest_samples(cal_path, "single-column"))
        x = p = pairs = None
        if x_path:
            x = [float(v) * scale for v in ingest_samples(x_path, "single-column")]
        if p_path:
            p = [float(v) * scale for v in ingest_samples(p_path, "single-column")]
        if pairs_path:
            pa, pb = ingest_samples(pairs_path, "two-column")
            pairs = [(float(a) * scale, float(b) * scale) for a, b in zip(pa, pb)]
        config = _config_from(
            ctx,
            mode=mode,
            criteria=criteria.split(",") if criteria else None,
            s_values=_parse_s_grid(s_grid),
            estimator=estimator,
            bin_width=bin_width,
            bootstrap_replicas=replicas,
            significance_k=significance_k,
            soundness_trials=soundness_trials,
        )
        report = service.run_analysis(
            service.AnalyzeRequest(config=config, x=x, p=p, pairs=pairs)
        )
        _emit(ctx, report.model_dump())
    except Exception as exc:  # noqa: BLE001 - single funnel to exit codes
        _fail(exc)


@main.command()
@_with_state_options
@click.option("--n", type=int, default=100_000, show_default=True)
@click.option("--mode", type=click.Choice(list(service.MODE_CRITERIA)), default=None)
@click.option("--criteria", default=None)
@click.option("--s-grid", default=None)
@click.option("--estimator", type=click.Choice(["linear", "conditional"]), default=None)
@click.option("--replicas", type=int, default=None)
@click.pass_context
def simulate(ctx, variant, alpha, r, var_x, var_p, n, mode, criteria, s_grid,
             estimator, replicas):
    """Sample an analytic state and analyze the synthetic records."""
    try:
        config = _config_from(
            ctx,
            mode=mode,
            criteria=criteria.split(",") if criteria else None,
            s_values=_parse_s_grid(s_grid),
            estimator=estimator,
            bootstrap_replicas=replicas,
        )
        report = service.simulate(
            service.SimulateRequest(
                state=_state_spec(variant, alpha, r, var_x, var_p), n=n, config=config
            )
        )
        _emit(ctx, report.model_dump())
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@_with_state_options
@click.option("--criterion", type=click.Choice(["theorem1-product", "theorem2",
                                                "theorem3-product"]),
              default="theorem1-product", show_default=True)
@click.option("--s-hi", type=float, default=None, help="Scan ceiling override.")
@click.pass_context
def smax(ctx, variant, alpha, r, var_x, var_p, criterion, s_hi):
    """Maximum certifiable S for an analytic state."""
    try:
        response = service.smax_analytic(
            service.SmaxRequest(
                state=_state_spec(variant, alpha, r, var_x, var_p),
                criterion=criterion,
                s_hi=s_hi,
            )
        )
        _emit(ctx, response.model_dump())
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@click.option("--task", required=True,
              type=click.Choice(["fig8", "fig10", "fig10-inset", "cat-smax"]))
@click.option("--start", type=float, default=None)
@click.option("--stop", type=float, default=None)
@click.option("--points", type=int, default=61, show_default=True)
@click.pass_context
def curve(ctx, task, start, stop, points):
    """Emit a named curve as CSV (stdout or --out)."""
    try:
        response = service.curve(
            service.CurveRequest(task=task, start=start, stop=stop, points=points)
        )
        out = ctx.obj.get("out")
        if out:
            write_curve_csv(out, response.header, response.rows)
        else:
            click.echo(",".join(response.header))
            for row in response.rows:
                click.echo(",".join(repr(float(v)) for v in row))
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--s-caps", default="1,2,4,8", show_default=True)
@click.option("--appendix-a-trials", type=int, default=100, show_default=True)
@click.option("--appendix-b-trials", type=int, default=100, show_default=True)
@click.pass_context
def verify(ctx, trials, s_caps, appendix_a_trials, appendix_b_trials):
    """Run the brute-force soundness oracles and emit their JSON report."""
    try:
        report = service.verify(
            service.VerifyRequest(
                s_caps=[float(t) for t in s_caps.split(",") if t],
                trials=trials,
                appendix_a_trials=appendix_a_trials,
                appendix_b_trials=appendix_b_trials,
                seed=ctx.obj["seed"],
            )
        )
        _emit(ctx, report.model_dump())
        if not report.sound:
            raise SoundnessViolationError("oracle suites reported violations")
    except Exception as exc:  # noqa: BLE001
        _fail(exc)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8710, show_default=True)
def serve(host, port):
    """Serve the HTTP API (uvicorn)."""
    import uvicorn

    uvicorn.run("scopic.api:app", host=host, port=port)


if __name__ == "__main__":
    main()
