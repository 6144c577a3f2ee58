"""Command-line interface: ``pairing-witness <command> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .fock import StateVector, Statistics, as_statistics, enumerate_sector
from .optimize import GRAD_TOL
from .pairing import QSpec
from .separability import BoundKind, as_bound_kind, bound, boson_type2_bound
from .spectral import (
    EIG_TOL,
    Method,
    brute_force_spectrum,
    closed_form_spectrum,
    ladder_spectrum,
    lambda_max,
    modes_for_lambda,
)
from . import verify as verify_mod
from .witness import StateError, evaluate_witness

BOUND_COLUMNS = ["statistics", "kind", "r", "N", "value", "lambda_max", "ratio", "restarts", "converged_fraction"]
SPECTRUM_COLUMNS = ["statistics", "r", "N", "M", "method", "max_eigenvalue", "runtime_ms"]


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# parsing helpers


def parse_range(text: str) -> list[int]:
    """``"4"``, ``"2..6"`` (inclusive) or ``"1,3,5"``."""
    out: list[int] = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return out


def parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coefficient list {text!r}") from None


def read_state(path: str, statistics, M: int, N: int, fmt: str = "auto") -> StateVector:
    """Amplitudes in the canonical basis order of the ``(M, N)`` sector.

    ``csv``: lines ``index,re,im`` (``#`` comments allowed, unlisted indices are 0).
    ``bin``: little-endian float64 pairs ``re, im`` for every basis state.
    """
    sector = enumerate_sector(statistics, M, N)
    p = Path(path)
    if fmt == "auto":
        fmt = "bin" if p.suffix in (".bin", ".dat", ".f64") else "csv"
    if fmt == "bin":
        raw = p.read_bytes()
        if len(raw) != 16 * sector.dim:
            raise ValueError(f"expected {16 * sector.dim} bytes for {sector.dim} amplitudes, got {len(raw)}")
        pairs = np.frombuffer(raw, dtype="<f8").reshape(-1, 2)
        return StateVector(sector, pairs[:, 0] + 1j * pairs[:, 1])
    amps = np.zeros(sector.dim, dtype=complex)
    seen = set()
    for lineno, row in enumerate(csv.reader(io.StringIO(p.read_text())), 1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected index,re,im")
        try:
            idx, re, im = int(row[0]), float(row[1]), float(row[2])
        except ValueError:
            raise ValueError(f"line {lineno}: could not parse {row!r}") from None
        if not 0 <= idx < sector.dim:
            raise ValueError(f"line {lineno}: index {idx} outside 0..{sector.dim - 1}")
        if idx in seen:
            raise ValueError(f"line {lineno}: duplicate index {idx}")
        seen.add(idx)
        amps[idx] = re + 1j * im
    return StateVector(sector, amps)


def write_state_csv(state: StateVector) -> str:
    lines = [f"# statistics={state.statistics.value} M={state.M} N={state.N}"]
    lines += [f"{i},{float(a.real)!r},{float(a.imag)!r}" for i, a in enumerate(state.amplitudes) if a != 0]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# output


def _fmt(x) -> str:
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return repr(round(x, 12) + 0.0)
    return "" if x is None else str(x)


def render(rows: list[dict], columns: list[str], meta: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for key, val in meta.items():
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(args, **extra) -> dict:
    meta = {"version": __version__, "command": args.command, "seed": getattr(args, "seed", None),
            "eig_tol": EIG_TOL, "grad_tol": GRAD_TOL}
    meta.update(extra)
    return meta


# ---------------------------------------------------------------------------
# commands


def _cell_seed(seed: int, r: int, N: int) -> int:
    return int(np.random.SeedSequence([seed, r, N]).generate_state(1)[0])


def _bound_row(job):
    stat, kind, r, N, restarts, seed = job
    kw = {"restarts": restarts, "seed": _cell_seed(seed, r, N)} if kind is BoundKind.TYPE2 else {}
    res = bound(stat, kind, r, N, **kw)
    lam = lambda_max(stat, r, N)
    ratio = lam / res.value if res.value > 0 else (math.inf if lam > 0 else math.nan)
    solver = res.solver or {}
    return {
        "statistics": stat.value, "kind": kind.value, "r": r, "N": N, "value": res.value,
        "lambda_max": lam, "ratio": ratio, "restarts": solver.get("restarts", ""),
        "converged_fraction": solver.get("converged_fraction", ""),
    }


def _run_jobs(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _default_kind(stat: Statistics, kind) -> BoundKind:
    if kind is None:
        return BoundKind.FERMION_SEP if stat is Statistics.FERMION else BoundKind.TYPE1
    kind = as_bound_kind(kind)
    if (stat is Statistics.FERMION) != (kind is BoundKind.FERMION_SEP):
        raise UsageError(f"bound kind {kind.value} does not apply to {stat.value}s")
    return kind


def cmd_bounds(args) -> int:
    stat = as_statistics(args.stat)
    kind = _default_kind(stat, args.kind)
    if kind is not BoundKind.FERMION_SEP and min(args.r) < 2:
        raise UsageError("bosonic bounds need r >= 2")
    jobs = [(stat, kind, r, N, args.restarts, args.seed) for r in args.r for N in args.N]
    rows = _run_jobs(_bound_row, jobs, args.jobs)
    meta = _meta(args, restarts=args.restarts if kind is BoundKind.TYPE2 else 0)
    emit(render(rows, BOUND_COLUMNS, meta, args.format), args.output)
    return 0


def cmd_spectrum(args) -> int:
    stat = as_statistics(args.stat)
    method = Method(args.method)
    rows = []
    for r in args.r:
        for N in args.N:
            M = args.M or max(modes_for_lambda(stat, r, N), N if stat is Statistics.FERMION else 0)
            qs = QSpec(stat, r, args.coefficients or (), M)
            t0 = time.perf_counter()
            if method is Method.BRUTE_FORCE:
                res = brute_force_spectrum(qs, N)
            elif method is Method.LADDER:
                res = ladder_spectrum(qs, N)
            else:
                res = closed_form_spectrum(qs, N)
            ms = (time.perf_counter() - t0) * 1e3
            rows.append({"statistics": stat.value, "r": r, "N": N, "M": M, "method": method.value,
                         "max_eigenvalue": res.max, "runtime_ms": None if args.no_timing else round(ms, 3)})
    emit(render(rows, SPECTRUM_COLUMNS, _meta(args), args.format), args.output)
    return 0


def cmd_type2(args) -> int:
    res = boson_type2_bound(args.r, args.N, restarts=args.restarts, seed=args.seed,
                            validate=args.validate, coefficients=args.coefficients)
    if args.format == "json":
        emit(json.dumps({"meta": _meta(args), "result": res.to_dict()}, indent=2) + "\n", args.output)
        return 0
    lam = res.lambda_max
    row = {"statistics": "boson", "kind": "type2", "r": args.r, "N": args.N, "value": res.value,
           "lambda_max": lam, "ratio": lam / res.value if res.value > 0 else math.nan,
           "restarts": args.restarts, "converged_fraction": res.solver["converged_fraction"]}
    emit(render([row], BOUND_COLUMNS, _meta(args, restarts=args.restarts), "csv"), args.output)
    return 0


def cmd_verify(args) -> int:
    checks = verify_mod.run_verify(args.scope, args.r_max, args.N_max, args.seed)
    failed = [c for c in checks if not c.ok]
    if args.format == "json":
        payload = {"meta": _meta(args), "passed": len(checks) - len(failed), "failed": len(failed),
                   "checks": [c.__dict__ for c in checks]}
        emit(json.dumps(payload, indent=2) + "\n", args.output)
    else:
        lines = [c.line() for c in checks if args.verbose or not c.ok]
        lines.append(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
        emit("\n".join(lines) + "\n", args.output)
    return 1 if failed else 0


def cmd_witness(args) -> int:
    stat = as_statistics(args.stat)
    M = args.M or (2 * args.r if stat is Statistics.FERMION else args.r)
    qs = QSpec(stat, args.r, args.coefficients or (), M)
    kind = _default_kind(stat, args.kind)
    try:
        state = read_state(args.state, stat, M, args.N, args.state_format)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read state: {exc}", file=sys.stderr)
        return 2
    if args.normalize:
        state = state.normalized()
    kw = {"restarts": args.restarts, "seed": args.seed} if kind is BoundKind.TYPE2 else {}
    try:
        report = evaluate_witness(qs, state, kind, **kw)
    except StateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.format == "json":
        emit(json.dumps({"meta": _meta(args), "report": report.to_dict()}, indent=2) + "\n", args.output)
    else:
        d = report.to_dict()
        d.pop("note", None)
        emit(render([d], list(d), _meta(args), "csv"), args.output)
    return 0


def _figure_rows(N_values, r_values, restarts, seed, workers):
    jobs = [(Statistics.BOSON, BoundKind.TYPE2, r, N, restarts, seed) for N in N_values for r in r_values]
    rows = _run_jobs(_bound_row, jobs, workers)
    for row in rows:
        row["type1"] = float(row["N"] ** 2 // 4)
    return rows


def cmd_figure_data(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cols = BOUND_COLUMNS + ["type1"]
    meta = _meta(args, restarts=args.restarts)
    figs = ("1", "2") if args.fig == "all" else (args.fig,)
    cache: dict[tuple[int, int], dict] = {}
    if "1" in figs:
        rows = _figure_rows(args.N, args.r, args.restarts, args.seed, args.jobs)
        cache.update({(row["r"], row["N"]): row for row in rows})
        (outdir / "fig1.csv").write_text(render(rows, cols, {**meta, "figure": 1}, "csv"))
    if "2" in figs:
        todo = [r for r in args.r2 if (r, args.N2) not in cache]
        for row in _figure_rows([args.N2], todo, args.restarts, args.seed, args.jobs):
            cache[(row["r"], row["N"])] = row
        rows = [cache[(r, args.N2)] for r in args.r2]
        (outdir / "fig2.csv").write_text(render(rows, cols, {**meta, "figure": 2}, "csv"))
    return 0


# ---------------------------------------------------------------------------
# argument parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairing-witness", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, fmt="csv"):
        sp.add_argument("--format", choices=["csv", "json"], default=fmt)
        sp.add_argument("--output", "-o", help="write to this file instead of stdout")
        sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("bounds", help="separable bounds over an (r, N) grid")
    sp.add_argument("--stat", choices=["fermion", "boson"], required=True)
    sp.add_argument("--kind", choices=["sep", "fermion_sep", "type1", "type2"])
    sp.add_argument("--r", type=parse_range, required=True)
    sp.add_argument("--N", type=parse_range, required=True)
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--jobs", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("spectrum", help="largest eigenvalue of Q^dagger Q")
    sp.add_argument("--stat", choices=["fermion", "boson"], required=True)
    sp.add_argument("--r", type=parse_range, required=True)
    sp.add_argument("--N", type=parse_range, required=True)
    sp.add_argument("--M", type=int, help="mode count (default: smallest that realizes the maximum)")
    sp.add_argument("--method", choices=[m.value for m in Method], default=Method.BRUTE_FORCE.value)
    sp.add_argument("--coefficients", type=parse_floats)
    sp.add_argument("--no-timing", action="store_true", help="leave runtime_ms empty (byte-stable output)")
    common(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("type2-optimize", help="numerical type-2 bound for one (r, N)")
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--validate", action="store_true", help="re-run in r+2 modes and fail on improvement")
    sp.add_argument("--coefficients", type=parse_floats)
    common(sp, fmt="json")
    sp.set_defaults(func=cmd_type2)

    sp = sub.add_parser("verify", help="closed forms against brute force")
    sp.add_argument("--scope", choices=("all",) + verify_mod.SCOPES, default="all")
    sp.add_argument("--r-max", type=int, default=4)
    sp.add_argument("--N-max", type=int, default=8)
    sp.add_argument("--verbose", "-v", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("witness", help="evaluate W = Lambda - Q^dagger Q on a state file")
    sp.add_argument("--stat", choices=["fermion", "boson"], required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--M", type=int)
    sp.add_argument("--kind", choices=["sep", "fermion_sep", "type1", "type2"])
    sp.add_argument("--state", required=True)
    sp.add_argument("--state-format", choices=["auto", "csv", "bin"], default="auto")
    sp.add_argument("--normalize", action="store_true")
    sp.add_argument("--coefficients", type=parse_floats)
    sp.add_argument("--restarts", type=int, default=64)
    common(sp, fmt="json")
    sp.set_defaults(func=cmd_witness)

    sp = sub.add_parser("figure-data", help="type-2 sweeps: fig1 (vs N) and fig2 (vs r at fixed N)")
    sp.add_argument("--fig", choices=["1", "2", "all"], default="all")
    sp.add_argument("--outdir", default=".")
    sp.add_argument("--N", type=parse_range, default=parse_range("2..10"))
    sp.add_argument("--r", type=parse_range, default=parse_range("2..12"))
    sp.add_argument("--N2", type=int, default=10)
    sp.add_argument("--r2", type=parse_range, default=parse_range("2..12"))
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_figure_data)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 2
    try:
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
