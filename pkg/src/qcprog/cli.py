"""Command-line driver.

Exit codes: 0 when the analysis ran (the verdict is in the output), 1 when a
numerical routine failed, 2 on parse or validation errors, 3 when an
enumeration budget or the permutation guard refuses the input.
"""

from __future__ import annotations

import json
import math
import sys
import time
from contextlib import contextmanager
from functools import wraps
from pathlib import Path

import click
import numpy as np

from . import fileformat, models, oracle, reachability, termination
from .config import Tolerances
from .errors import (
    BudgetExceeded,
    DimensionMismatch,
    InvalidState,
    NotHermitian,
    NotPositive,
    ParseError,
    QcprogError,
    TooManyProcesses,
    ValidationError,
)
from .linalg import Subspace, projector_distance, subspace_eq, subspace_leq
from .program import path_str, validate

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2, 3

INPUT_ERRORS = (ParseError, ValidationError, DimensionMismatch, InvalidState, NotHermitian, NotPositive)
REFUSALS = (BudgetExceeded, TooManyProcesses)


class Context:
    def __init__(self, command: str, tol: Tolerances, as_json: bool, timings: bool, cache_dir, max_m):
        self.command = command
        self.tol = tol
        self.as_json = as_json
        self.want_timings = timings
        self.cache_dir = cache_dir
        self.max_m = max_m
        self.timings: dict[str, float] = {}

    @contextmanager
    def timed(self, label: str):
        start = time.perf_counter()
        yield
        self.timings[label] = time.perf_counter() - start


def _parse_tolerances(config, pairs) -> Tolerances:
    try:
        tol = Tolerances.from_file(config) if config else Tolerances()
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise click.BadParameter(str(exc), param_hint="--config") from None
    changes = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", param_hint="--tolerance")
        try:
            changes[key.strip()] = float(value)
        except ValueError:
            raise click.BadParameter(f"{value!r} is not a number", param_hint="--tolerance") from None
    try:
        return tol.replace(**changes)
    except KeyError as exc:
        raise click.BadParameter(str(exc.args[0]), param_hint="--tolerance") from None


def analysis_command(func):
    """Attach the shared flags and map package errors to exit codes."""

    @click.option("--tolerance", "tolerances", multiple=True, metavar="KEY=VALUE", help="Override one tolerance, e.g. zero=1e-10.")
    @click.option("--config", type=click.Path(exists=True, dir_okay=False), help="JSON file of tolerance overrides.")
    @click.option("--json", "as_json", is_flag=True, help="Emit a machine-readable report.")
    @click.option("--timings", is_flag=True, help="Include wall-clock timings in the report.")
    @click.option("--precompute-cache", "cache_dir", type=click.Path(file_okay=False), help="Directory for the stored resolvent.")
    @click.option("--max-m-override", "max_m", type=click.IntRange(min=1), help="Raise the process-count guard for fair termination.")
    @wraps(func)
    def wrapper(tolerances, config, as_json, timings, cache_dir, max_m, **kwargs):
        tol = _parse_tolerances(config, tolerances)
        ctx = Context(func.__name__.replace("_cmd", ""), tol, as_json, timings, cache_dir, max_m)
        try:
            report = func(ctx, **kwargs)
        except INPUT_ERRORS as exc:
            _fail(ctx, exc, EXIT_INPUT)
        except REFUSALS as exc:
            _fail(ctx, exc, EXIT_REFUSED)
        except QcprogError as exc:
            _fail(ctx, exc, EXIT_FAILED)
        _emit(ctx, report)

    return wrapper


def _fail(ctx: Context, exc: Exception, code: int):
    error = {"type": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "location", None):
        error["location"] = exc.location
    if getattr(exc, "failures", None):
        error["failures"] = [_clean(f) for f in exc.failures]
    if ctx.as_json:
        click.echo(_dumps({"command": ctx.command, "error": error}))
    else:
        click.echo(f"error: {error['type']}: {error['message']}", err=True)
        for f in error.get("failures", []):
            click.echo("  " + ", ".join(f"{k}={_fmt(v)}" for k, v in f.items()), err=True)
    sys.exit(code)


# ---------------------------------------------------------------- encoding


def _clean(obj):
    """JSON-ready copy; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    return obj


def _dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False)


def _basis(sub: Subspace) -> list:
    return [[[float(z.real), float(z.imag)] for z in v] for v in sub.vectors]


def _subspace_entry(sub: Subspace, method: str, **extra) -> dict:
    entry = {"method": method, "dimension": sub.dim, "basis": _basis(sub)}
    entry.update(extra)
    return entry


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _fmt_complex(z: complex) -> str:
    re, im = z.real + 0.0, z.imag + 0.0
    return f"{re:.6g}{im:+.6g}j"


def _emit(ctx: Context, report: dict):
    report = {"command": ctx.command, "tolerances": ctx.tol.as_dict(), **report}
    report["timings"] = ctx.timings if ctx.want_timings else None
    if ctx.as_json:
        click.echo(_dumps(report))
        return
    click.echo(f"command: {ctx.command}")
    prog = report.get("program")
    if prog:
        click.echo(f"program: {prog['source']} (d={prog['dimension']}, m={len(prog['processes'])}: {', '.join(prog['processes'])})")
    for name, value in report.get("verdicts", {}).items():
        click.echo(f"{name:<28} {_fmt(value)}")
    for name, value in report.get("residuals", {}).items():
        click.echo(f"{name:<28} {_fmt(value)}")
    for name, entry in report.get("subspaces", {}).items():
        extra = ""
        if entry.get("chain_dims"):
            extra = f", chain dims {tuple(entry['chain_dims'])}"
        click.echo(f"{name} [{entry['method']}]: dimension {entry['dimension']}{extra}")
        for i, v in enumerate(entry["basis"]):
            click.echo(f"  v{i}: " + "  ".join(_fmt_complex(complex(*z)) for z in v))
    if "pieces" in report:
        click.echo(f"pieces ({len(report['pieces'])}): " + " ".join(report["pieces"]))
    if ctx.want_timings:
        for name, value in ctx.timings.items():
            click.echo(f"time {name:<23} {value:.6g} s")


def _load(ctx: Context, path: str) -> fileformat.ProgramFile:
    with ctx.timed("parse"):
        return fileformat.load(path, ctx.tol)


def _program_entry(pf: fileformat.ProgramFile) -> dict:
    p = pf.program
    return {
        "source": pf.source,
        "dimension": p.dim,
        "processes": list(p.names),
        "fingerprint": reachability.program_fingerprint(p),
    }


def _cache(ctx: Context, pf: fileformat.ProgramFile):
    if ctx.cache_dir is None:
        return None
    with ctx.timed("cache"):
        return reachability.ReachCache(pf.program, ctx.cache_dir)


def _verdict_entry(v: termination.TerminationVerdict) -> dict:
    return {
        "terminates": v.terminates,
        "output_bit": v.output_bit,
        "marginal": v.marginal,
        "steps_to_zero": v.steps_to_zero,
        "witness": None if v.witness is None else path_str(v.witness),
    }


def _verdict_residuals(v: termination.TerminationVerdict) -> dict:
    return {"residual_norm": v.residual_norm, "log10_survival": v.log10_survival}


# ---------------------------------------------------------------- commands


@click.group()
def main():
    """Reachability and termination analysis of concurrent quantum programs."""


@main.command("validate")
@click.argument("path")
@analysis_command
def validate_cmd(ctx: Context, path):
    """Parse and validate a program file."""
    pf = _load(ctx, path)
    rep = validate(pf.program, ctx.tol)
    return {
        "program": _program_entry(pf),
        "verdicts": {"valid": rep.ok},
        "residuals": {
            "completeness": rep.completeness_residual,
            **{f"trace_preserving[{n}]": r for n, r in zip(pf.program.names, rep.tp_residuals)},
        },
    }


REACH_METHODS = ("algorithm1", "iterative", "bruteforce")
URR_METHODS = ("algorithm2", "iterative", "bruteforce")


def _agreement(results: dict[str, Subspace], tol: Tolerances) -> tuple[dict, dict]:
    names = list(results)
    verdicts, residuals = {}, {}
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            verdicts[f"agree[{a},{b}]"] = subspace_eq(results[a], results[b], tol)
            residuals[f"distance[{a},{b}]"] = projector_distance(results[a], results[b])
    return verdicts, residuals


@main.command("reach")
@click.argument("path")
@click.option("--method", type=click.Choice(REACH_METHODS + ("all",)), default="algorithm1", show_default=True)
@analysis_command
def reach_cmd(ctx: Context, path, method):
    """Reachable space of the program from its initial state."""
    pf = _load(ctx, path)
    p, rho = pf.program, pf.rho0
    methods = REACH_METHODS if method == "all" else (method,)
    entries, spaces = {}, {}
    for name in methods:
        with ctx.timed(name):
            if name == "algorithm1":
                r = reachability.reach_algorithm1(p, rho, ctx.tol, cache=_cache(ctx, pf))
                entries[name] = _subspace_entry(r.subspace, name)
                spaces[name] = r.subspace
            elif name == "iterative":
                r = reachability.reach_iterative(p, rho, ctx.tol)
                entries[name] = _subspace_entry(r.subspace, name, iterations_used=r.iterations_used, chain_dims=list(r.chain_dims))
                spaces[name] = r.subspace
            else:
                s = oracle.bruteforce_reach(p, rho, tol=ctx.tol)
                entries[name] = _subspace_entry(s, name)
                spaces[name] = s
    verdicts, residuals = _agreement(spaces, ctx.tol)
    return {
        "program": _program_entry(pf),
        "subspaces": {f"reach.{k}" if len(entries) > 1 else "reach": v for k, v in entries.items()},
        "verdicts": verdicts,
        "residuals": residuals,
    }


@main.command("urr")
@click.argument("path")
@click.option("--method", type=click.Choice(URR_METHODS + ("all",)), default="algorithm2", show_default=True)
@analysis_command
def urr_cmd(ctx: Context, path, method):
    """Uniformly repeatedly reachable space."""
    pf = _load(ctx, path)
    p, rho = pf.program, pf.rho0
    methods = URR_METHODS if method == "all" else (method,)
    entries, spaces = {}, {}
    for name in methods:
        with ctx.timed(name):
            if name == "algorithm2":
                r = reachability.urr_algorithm2(p, rho, ctx.tol, cache=_cache(ctx, pf))
                entries[name] = _subspace_entry(r.subspace, name)
                spaces[name] = r.subspace
            elif name == "iterative":
                r = reachability.urr_iterative(p, rho, ctx.tol)
                entries[name] = _subspace_entry(r.subspace, name, iterations_used=r.iterations_used, chain_dims=list(r.chain_dims))
                spaces[name] = r.subspace
            else:
                s = oracle.bruteforce_urr(p, rho, tol=ctx.tol)
                entries[name] = _subspace_entry(s, name)
                spaces[name] = s
    verdicts, residuals = _agreement(spaces, ctx.tol)
    with ctx.timed("reach"):
        reach = reachability.reach_algorithm1(p, rho, ctx.tol, cache=_cache(ctx, pf)).subspace
    first = next(iter(spaces.values()))
    verdicts["contained_in_reach"] = subspace_leq(first, reach, ctx.tol)
    return {
        "program": _program_entry(pf),
        "subspaces": {f"urr.{k}" if len(entries) > 1 else "urr": v for k, v in entries.items()},
        "verdicts": verdicts,
        "residuals": residuals,
    }


@main.command("terminate")
@click.argument("path")
@click.option("--schedule", type=click.Choice(["all", "fair"]), required=True)
@analysis_command
def terminate_cmd(ctx: Context, path, schedule):
    """Decide termination under every schedule or under fair schedules."""
    pf = _load(ctx, path)
    p, rho = pf.program, pf.rho0
    with ctx.timed(schedule):
        if schedule == "all":
            v = termination.terminates_all(p, rho, ctx.tol)
        else:
            v = termination.terminates_fair(p, rho, ctx.tol, max_m=ctx.max_m)
    verdicts = _verdict_entry(v)
    residuals = _verdict_residuals(v)
    if schedule == "fair":
        with ctx.timed("round_robin"):
            pre = termination.fair_prefix_check(p, rho, ctx.tol)
        verdicts["round_robin_within_zero"] = pre.within_zero
        residuals["round_robin_residual"] = pre.residual
    return {"program": _program_entry(pf), "schedule": schedule, "verdicts": verdicts, "residuals": residuals}


ORACLE_CHECKS = ("reach", "urr", "terminate-all", "terminate-fair", "pi")


@main.command("oracle")
@click.argument("subcheck", type=click.Choice(ORACLE_CHECKS))
@click.argument("path")
@click.option("--max-pi-size", type=click.IntRange(min=1), default=oracle.DEFAULT_BUDGET.max_pi_size, show_default=True)
@analysis_command
def oracle_cmd(ctx: Context, subcheck, path, max_pi_size):
    """Brute-force enumeration cross-check of one analysis."""
    pf = _load(ctx, path)
    p, rho = pf.program, pf.rho0
    budget = oracle.EnumerationBudget(max_pi_size=max_pi_size)
    report: dict = {"program": _program_entry(pf), "subcheck": subcheck}
    if subcheck in ("reach", "urr"):
        with ctx.timed("bruteforce"):
            fn = oracle.bruteforce_reach if subcheck == "reach" else oracle.bruteforce_urr
            brute = fn(p, rho, budget, ctx.tol)
        with ctx.timed("analysis"):
            if subcheck == "reach":
                fast = reachability.reach_algorithm1(p, rho, ctx.tol, cache=_cache(ctx, pf)).subspace
                method = "algorithm1"
            else:
                fast = reachability.urr_algorithm2(p, rho, ctx.tol, cache=_cache(ctx, pf)).subspace
                method = "algorithm2"
        report["subspaces"] = {
            f"{subcheck}.bruteforce": _subspace_entry(brute, "bruteforce"),
            f"{subcheck}.{method}": _subspace_entry(fast, method),
        }
        report["verdicts"] = {"agree": subspace_eq(brute, fast, ctx.tol)}
        report["residuals"] = {"distance": projector_distance(brute, fast)}
    elif subcheck in ("terminate-all", "terminate-fair"):
        with ctx.timed("bruteforce"):
            if subcheck == "terminate-all":
                brute = oracle.bruteforce_terminates_all(p, rho, budget, ctx.tol)
            else:
                brute = oracle.bruteforce_terminates_fair(p, rho, budget, ctx.tol)
        with ctx.timed("analysis"):
            if subcheck == "terminate-all":
                v = termination.terminates_all(p, rho, ctx.tol)
            else:
                v = termination.terminates_fair(p, rho, ctx.tol, max_m=ctx.max_m)
        report["verdicts"] = {"oracle_terminates": brute, "analysis_terminates": v.terminates, "agree": brute == v.terminates}
        report["residuals"] = _verdict_residuals(v)
    else:
        with ctx.timed("enumerate"):
            pieces = oracle.enumerate_pi(p.m, p.dim, budget)
        report["pieces"] = [path_str(f) for f in pieces]
        report["verdicts"] = {"size": len(pieces), "expansions_before_dedup": oracle.pi_size_bound(p.m, p.dim)}
    return report


@main.command("example")
@click.argument("name", type=click.Choice(sorted(models.BUILTIN)))
@click.option("-o", "--output", type=click.Path(dir_okay=False, writable=True), help="Write to a file instead of stdout.")
def example_cmd(name, output):
    """Emit a bundled example program file."""
    text = example_text(name)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def example_text(name: str) -> str:
    program, rho0 = models.BUILTIN[name]()
    return fileformat.dumps(program, rho0)


if __name__ == "__main__":
    main()
