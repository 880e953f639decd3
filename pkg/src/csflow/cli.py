"""Command-line interface: ``csflow flow|cs-derivative|warped-verify|verify-all``.

Exit codes: 0 success, 1 verification failure, 2 usage or validation error.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import sys

import click

from . import __version__, berger, ricci_flow, verify, warped
from .berger import BergerParams

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

FLOW_HEADER = ["t", "lambda1", "lambda2", "lambda3", "R11", "R22", "R33", "cs_density", "cs_integral"]
INVARIANT_TOL = 1e-12
EXACT_TOL = 1e-8
PATTERN_TOL = 1e-12

ANCHORS = {
    "flow": {
        "lambda": "Ricci flow d g/dt = -2 Ric reduced to d lambda_i/dt = -lambda_i R_ii",
        "R_ii": "closed-form Ricci components of the Berger metric",
        "cs_density": "transgression form TP_1 in the frozen starting coframe",
        "cs_integral": "TP_1 density times the volume 2 pi^2 l1 l2 l3",
    },
    "cs-derivative": {
        "tp1_dot_coefficient": "three-parameter closed form for d/dt TP_1 at t = 0",
        "pipeline_value": "2 P_1(omega_dot ^ Omega) from the frozen-frame connection derivative",
        "F": "normalized numerator F(alpha, beta)",
        "invariant": "vanishing only on round spheres",
    },
    "warped-verify": {
        "max_r1": "tr(omega_dot) ^ tr(Omega) on the warped product",
        "max_r2": "tr(omega_dot ^ Omega) on the warped product",
        "patterns": "support patterns of Omega and omega_dot in spherical coordinates",
    },
}


# -- parameter parsing ------------------------------------------------------------

def parse_lambda(text) -> BergerParams:
    """Parse "l1,l2,l3", naming the offending component on failure."""
    if isinstance(text, BergerParams):
        return text
    if isinstance(text, (list, tuple)):
        parts = list(text)
    else:
        parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise click.BadParameter(f"expected three comma-separated values, got {text!r}", param_hint="'--lambda'")
    lo, hi = berger.PARAM_RANGE
    values = []
    for i, p in enumerate(parts, start=1):
        try:
            v = float(p)
        except ValueError:
            raise click.BadParameter(f"lambda{i}={p!r} is not a number", param_hint="'--lambda'") from None
        if not (math.isfinite(v) and lo < v < hi):
            raise click.BadParameter(f"lambda{i}={v:g} must lie in ({lo:g}, {hi:g})", param_hint="'--lambda'")
        values.append(v)
    return BergerParams(*values)


def _lambda_callback(ctx, param, value):
    return None if value is None else parse_lambda(value)


def _warp_callback(ctx, param, value):
    try:
        return warped.parse_warp(value)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--warp'") from None


def _tolerance_callback(ctx, param, value):
    out = {}
    for item in value:
        name, sep, tol = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected name=value, got {item!r}", param_hint="'--tolerance'")
        try:
            out[name.strip()] = float(tol)
        except ValueError:
            raise click.BadParameter(f"tolerance for {name!r} is not a number", param_hint="'--tolerance'") from None
        if not out[name.strip()] >= 0:
            raise click.BadParameter(f"tolerance for {name!r} must be non-negative", param_hint="'--tolerance'")
    known = {c.name for c in verify.CHECKS}
    unknown = sorted(set(out) - known)
    if unknown:
        raise click.BadParameter(f"unknown check name(s): {', '.join(unknown)}", param_hint="'--tolerance'")
    return out


_CONFIG_ALIASES = {"lambda": "lam", "format": "fmt"}


def _normalize_config(table: dict) -> dict:
    out = {}
    for key, value in table.items():
        key = key.replace("-", "_")
        if key == "lambda" and isinstance(value, list):
            value = ",".join(str(v) for v in value)
        elif key == "tolerance" and isinstance(value, dict):
            value = [f"{k}={v}" for k, v in value.items()]
        out[_CONFIG_ALIASES.get(key, key)] = value
    return out


def _config_callback(ctx, param, value):
    """Load a TOML file: top-level keys apply to every command, a [command] table to that command."""
    if value is None:
        return None
    try:
        with open(value, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise click.BadParameter(f"cannot read {value}: {exc.strerror}", param_hint="'--config'") from None
    except tomllib.TOMLDecodeError as exc:
        raise click.BadParameter(f"{value}: {exc}", param_hint="'--config'") from None
    allowed = {p.name for p in ctx.command.params}
    defaults = {k: v for k, v in data.items() if not isinstance(v, dict) or k == "tolerance"}
    merged = {k: v for k, v in _normalize_config(defaults).items() if k in allowed}
    section = _normalize_config(data.get(ctx.info_name, {}))
    merged.update(section)
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise click.BadParameter(f"unknown key(s) for {ctx.info_name}: {', '.join(unknown)}", param_hint="'--config'")
    ctx.default_map = {**(ctx.default_map or {}), **merged}
    return value


def common_options(fn):
    opts = [
        click.option("--config", type=click.Path(dir_okay=False), callback=_config_callback, is_eager=True,
                     expose_value=False, help="TOML file with default values for this command."),
        click.option("--output", "-o", type=click.Path(dir_okay=False, writable=True), default=None,
                     help="Write to this file instead of stdout."),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True,
                     help="Seed for random sampling."),
        click.option("--jobs", type=click.IntRange(min=1), default=lambda: os.cpu_count() or 1,
                     help="Worker threads for grid scans (default: available processors)."),
        click.option("--paper-anchors", is_flag=True, help="Print the source formula of each computed quantity to stderr."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


# -- output -----------------------------------------------------------------------

def _emit(text: str, output) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        with open(output, "w", newline="") as fh:
            fh.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _report(command: str, records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return _json({"schema_version": verify.SCHEMA_VERSION, "command": command, "checks": records})
    header = list(records[0]) if records else []
    return _csv(header, [[_cell(r[k]) for k in header] for r in records])


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (list, tuple)):
        return ";".join(str(x) for x in v)
    return v


def _anchors(command: str, enabled: bool) -> None:
    if enabled:
        for name, anchor in ANCHORS[command].items():
            click.echo(f"{name}: {anchor}", err=True)


def _finite(x):
    return x if x is not None and math.isfinite(x) else None


# -- commands -----------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="csflow")
def main():
    """Chern-Simons forms under Ricci flow on Berger spheres and warped products."""


@main.command()
@click.option("--lambda", "lam", default="1,1,1", show_default=True, callback=_lambda_callback,
              help="Starting parameters l1,l2,l3.")
@click.option("--h", "h", type=click.FloatRange(min=0, min_open=True), default=1e-3, show_default=True,
              help="RK4 step size.")
@click.option("--t-end", type=click.FloatRange(min=0, min_open=True), default=0.2, show_default=True,
              help="Final flow time.")
@click.option("--normalized", is_flag=True, help="Volume-normalized flow.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@common_options
def flow(lam, h, t_end, normalized, fmt, output, seed, jobs, paper_anchors):
    """Integrate the Ricci flow and track the Chern-Simons density."""
    _anchors("flow", paper_anchors)
    traj = ricci_flow.integrate(lam, t_end, h, normalized=normalized)
    rows = [[s.t, *s.params, *s.ricci, s.cs_density, s.cs_integral] for s in traj.states]
    if traj.extinct:
        click.echo(f"warning: extinction threshold reached at t={traj.states[-1].t:.6g} "
                   f"before t_end={t_end:g}; trajectory truncated", err=True)
    if fmt == "csv":
        text = _csv(FLOW_HEADER, [[repr(float(x)) for x in row] for row in rows])
    else:
        text = _json({"schema_version": verify.SCHEMA_VERSION, "command": "flow", "normalized": normalized,
                      "h": h, "t_end": t_end, "extinct": traj.extinct,
                      "rows": [dict(zip(FLOW_HEADER, map(float, row))) for row in rows]})
    _emit(text, output)


@main.command("cs-derivative")
@click.option("--lambda", "lam", default="2,1,1", show_default=True, callback=_lambda_callback,
              help="Parameters l1,l2,l3.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@common_options
def cs_derivative(lam, fmt, output, seed, jobs, paper_anchors):
    """Time derivative of the Chern-Simons density at t = 0."""
    _anchors("cs-derivative", paper_anchors)
    coef = berger.tp1_dot_coefficient(lam)
    pipeline = berger.cs_dot_density(lam)
    alpha, beta = berger.normalized_pair(lam)
    record = {
        "lambda": list(lam),
        "tp1_dot_coefficient": float(coef),
        "pipeline_value": float(pipeline),
        "ratio": _finite(float(pipeline / coef)) if coef != 0 else None,
        "alpha": alpha,
        "beta": beta,
        "F": float(berger.big_F(alpha, beta)),
        "invariant": bool(abs(coef) < INVARIANT_TOL),
    }
    _emit(_report("cs-derivative", [record], fmt), output)


@main.command("warped-verify")
@click.option("--n", "n", type=click.IntRange(1, 2), default=1, show_default=True, help="Base sphere dimension.")
@click.option("--warp", default="2+sin", show_default=True, callback=_warp_callback,
              help="Warping function, e.g. 2+sin, 2+0.5cos, 3+cos(2*theta1).")
@click.option("--resolution", type=click.IntRange(min=4), default=16, show_default=True,
              help="Grid points per chart axis.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@common_options
def warped_verify(n, warp, resolution, fmt, output, seed, jobs, paper_anchors):
    """Check that the TP_1 derivative of a warped product is exact at t = 0."""
    try:
        warp.validate(n)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="'--warp'") from None
    _anchors("warped-verify", paper_anchors)
    spec = warped.WarpedSpec.from_warp(n, warp)
    res = warped.grid_scan(spec, resolution, jobs=jobs)
    record = {
        "n": n,
        "warp": str(warp),
        "resolution": resolution,
        "points": res.points,
        "max_r1": res.max_r1,
        "max_r2": res.max_r2,
        "curvature_pattern_violation": res.curvature_pattern,
        "omega_dot_pattern_violation": res.omega_dot_pattern,
        "omega_dot_pattern_violation_unweighted": res.omega_dot_pattern_raw,
        "patterns_ok": bool(res.patterns_ok(PATTERN_TOL)),
        "exact": bool(res.exact(EXACT_TOL)),
    }
    _emit(_report("warped-verify", [record], fmt), output)
    if not (record["exact"] and record["patterns_ok"]):
        sys.exit(1)


@main.command("verify-all")
@click.option("--tolerance", multiple=True, callback=_tolerance_callback, metavar="NAME=VALUE",
              help="Override the tolerance of one check; repeatable.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@common_options
def verify_all(tolerance, fmt, output, seed, jobs, paper_anchors):
    """Run every closed-form versus oracle cross-check."""
    results = verify.run_all(seed=seed, tolerances=tolerance)
    if paper_anchors:
        for r in results:
            click.echo(f"{r.name}: {r.paper_anchor}", err=True)
    records = [{**r.as_dict(), "max_error": _finite(r.max_error)} for r in results]
    if fmt == "json":
        text = _json({"schema_version": verify.SCHEMA_VERSION, "command": "verify-all", "checks": records})
    else:
        text = _csv(["name", "status", "max_error", "tolerance", "paper_anchor"],
                    [[_cell(rec[k]) for k in ("name", "status", "max_error", "tolerance", "paper_anchor")]
                     for rec in records])
    _emit(text, output)
    failed = [r for r in results if not r.passed]
    if failed:
        click.echo(f"{len(failed)} check(s) failed: {', '.join(r.name for r in failed)}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
