"""Command-line driver: single queries and limit-regime scans."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import ergopt, thermo, zeta
from .exceptions import ZetathermError
from .potentials import LocallyConstantPotential
from .symbolic import ShiftSpec, format_word, parse_word, periodic

COLUMNS = ["regime", "c", "s", "N", "L", "cylinder", "value", "rate", "inf_I",
           "certified", "n_used", "tail_bound", "wall_ms"]
REGIMES = ("fixed-c-s-to-1", "L-schedule", "N-over-c")


class UsageError(ValueError):
    pass


def _num(x) -> str:
    if x is None or x == "":
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x)) if math.isfinite(x) else str(float(x)).lower()


def _short(x: float) -> str:
    return f"{x:.12g}"


def load_potential(path: str, shift_path: str = None) -> LocallyConstantPotential:
    with open(path) as fh:
        data = json.load(fh)
    spec = None
    if shift_path is not None:
        with open(shift_path) as fh:
            spec = ShiftSpec.from_dict(json.load(fh))
    return LocallyConstantPotential.from_dict(data, spec)


def parse_values(text: str) -> list[float]:
    """``a``, ``a|b|c``, ``start:stop:*factor`` or ``start:stop:+step``."""
    text = text.strip()
    if "|" in text:
        return [float(t) for t in text.split("|")]
    if ":" not in text:
        return [float(text)]
    try:
        start, stop, step = text.split(":")
        start, stop = float(start), float(stop)
        op, amount = step[0], float(step[1:])
    except (ValueError, IndexError):
        raise UsageError(f"bad range {text!r}") from None
    if op not in "*+":
        raise UsageError(f"range step must start with * or +: {text!r}")
    if (op == "*" and (amount <= 0 or amount == 1)) or (op == "+" and amount == 0):
        raise UsageError(f"range step does not move: {text!r}")
    out = []
    x = start
    up = stop >= start
    tol = 1e-9 * max(abs(start), abs(stop), 1.0)
    while (x <= stop + tol) if up else (x >= stop - tol):
        out.append(x)
        x = x * amount if op == "*" else x + amount
        if len(out) > 100_000:
            raise UsageError(f"range {text!r} never reaches its stop value")
    return out


def parse_grid(text: str) -> dict[str, list[float]]:
    grid = {}
    for item in text.split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise UsageError(f"grid entries look like key=values, got {item!r}")
        key, value = item.split("=", 1)
        key = key.strip()
        if key not in ("c", "s", "1-s", "L", "N"):
            raise UsageError(f"unknown grid key {key!r}")
        grid[key] = parse_values(value)
    return grid


def grid_points(regime: str, grid: dict) -> list[dict]:
    if "c" not in grid:
        raise UsageError("grid needs c")
    cs = grid["c"]
    if regime == "fixed-c-s-to-1":
        if "s" in grid:
            ss = grid["s"]
        elif "1-s" in grid:
            ss = [1.0 - e for e in grid["1-s"]]
        else:
            raise UsageError("fixed-c-s-to-1 needs s or 1-s in the grid")
        return [{"c": c, "s": s} for c in cs for s in ss]
    if regime == "L-schedule":
        Ls = grid.get("L")
        if Ls is None:
            raise UsageError("L-schedule needs L in the grid")
        return [{"c": c, "s": s, "L": L} for L in Ls for c, s in zeta.l_schedule(L, cs)]
    if regime == "N-over-c":
        if "N" in grid:
            return [{"c": c, "N": int(N)} for c in cs for N in grid["N"]]
        return [{"c": c, "N": N} for c, N in zeta.n_schedule(cs)]
    raise UsageError(f"unknown regime {regime!r}")


def _scan_point(f, point, words, args, inf_I):
    t0 = time.perf_counter()
    c = point["c"]
    rows = []
    if "s" in point:
        res = zeta.zeta_measures(f, zeta.ZetaParams(c, point["s"], args.rel_tol, args.n_cap), words)
        for w, r in zip(words, res):
            rows.append(dict(value=r.value, rate=r.log_value / c, certified=r.certified,
                             n_used=r.n_used, tail_bound=r.tail_bound))
    else:
        fn = zeta.pi_log_measures if args.kind == "pi" else zeta.eta_log_measures
        logs = fn(f, c, point["N"], words)
        for lv in logs:
            rows.append(dict(value=math.exp(lv), rate=lv / c, certified=True,
                             n_used=point["N"], tail_bound=0.0))
    ms = (time.perf_counter() - t0) * 1e3
    out = []
    for w, r in zip(words, rows):
        row = {"regime": args.regime, "c": c, "s": point.get("s"), "N": point.get("N"),
               "L": point.get("L"), "cylinder": format_word(w, f.spec.d),
               "inf_I": inf_I[w], "wall_ms": None if args.no_timing else round(ms, 3)}
        row.update(r)
        out.append(row)
    return out


def _threads() -> int:
    env = os.environ.get("ZETATHERM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"ZETATHERM_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def run_scan(f, args) -> list[dict]:
    points = grid_points(args.regime, parse_grid(args.grid))
    words = [parse_word(w, f.spec.d) for w in args.cylinders.split(",") if w.strip()]
    if not words:
        raise UsageError("no cylinders given")
    b = ergopt.beta(f)
    inf_I = {w: ergopt.inf_I_cylinder(f, w, beta_value=b) for w in words}
    workers = min(_threads(), len(points))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(lambda p: _scan_point(f, p, words, args, inf_I), points))
    else:
        chunks = [_scan_point(f, p, words, args, inf_I) for p in points]
    rows = [row for chunk in chunks for row in chunk]
    rows.sort(key=lambda r: (r["c"], r["cylinder"], r["s"] or 0.0, r["N"] or 0, r["L"] or 0.0))
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        writer.writerow([r["regime"] if k == "regime" else r["cylinder"] if k == "cylinder"
                         else _num(r[k]) for k in COLUMNS])
    return buf.getvalue()


def _cmd_pressure(f, args, out):
    pd = thermo.pressure(f, args.c * args.s)
    print(f"P={_short(pd.log_lambda)} residual={pd.residual:.3e}", file=out)


def _cmd_beta(f, args, out):
    cg = ergopt.critical_graph(f)
    print(f"beta={_short(cg.beta)} h_f={_short(ergopt.h_max(f, cg))}", file=out)
    print(f"critical: {cg.describe()}", file=out)


def _cmd_gibbs(f, args, out):
    w = parse_word(args.cylinder, f.spec.d)
    print(_short(thermo.gibbs_cylinder(f, args.c, w)), file=out)


def _cmd_zeta(f, args, out):
    w = parse_word(args.cylinder, f.spec.d)
    r = zeta.zeta_measure(f, zeta.ZetaParams(args.c, args.s, args.rel_tol, args.n_cap), w)
    print(f"value={_short(r.value)} n_used={r.n_used} tail_bound={r.tail_bound:.3e} "
          f"certified={_num(r.certified)}", file=out)


def _cmd_truncated(f, args, out):
    w = parse_word(args.cylinder, f.spec.d)
    fn = zeta.pi_measure if args.kind == "pi" else zeta.eta_measure
    print(_short(fn(f, args.c, args.N, w)), file=out)


def _cmd_devfun(f, args, out):
    if (args.orbit is None) == (args.cylinder is None):
        raise UsageError("give exactly one of --orbit and --cylinder")
    if args.orbit is not None:
        x = periodic(parse_word(args.orbit, f.spec.d), f.spec)
        print(f"I={_short(ergopt.deviation_I(f, x))}", file=out)
    else:
        w = parse_word(args.cylinder, f.spec.d)
        v = ergopt.inf_I_cylinder(f, w, method=args.method, period_cap=args.cap)
        print(f"inf_I={_short(v)}", file=out)


def _cmd_scan(f, args, out):
    rows = run_scan(f, args)
    text = rows_to_csv(rows)
    if args.out in (None, "-"):
        out.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump([{k: r[k] for k in COLUMNS} for r in rows], fh, indent=1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetatherm",
                                description="Pressure, zeta measures and zero-temperature limits "
                                            "for locally constant potentials.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(name, help):
        q = sub.add_parser(name, help=help)
        q.add_argument("--potential", required=True, help="potential JSON file")
        q.add_argument("--shift", help="shift JSON file (overrides the potential's 'shift' key)")
        return q

    q = common("pressure", "P(c s f) and its eigen-residual")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--s", type=float, default=1.0)
    q.set_defaults(func=_cmd_pressure)

    q = common("beta", "maximal ergodic average, critical graph and h_f")
    q.set_defaults(func=_cmd_beta)

    q = common("gibbs", "equilibrium measure of a cylinder")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--cylinder", required=True)
    q.set_defaults(func=_cmd_gibbs)

    def series_opts(q):
        q.add_argument("--rel-tol", type=float, default=zeta.DEFAULT_REL_TOL)
        q.add_argument("--n-cap", type=int, default=zeta.DEFAULT_N_CAP)

    q = common("zeta", "zeta measure of a cylinder")
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--s", type=float, required=True)
    q.add_argument("--cylinder", required=True)
    series_opts(q)
    q.set_defaults(func=_cmd_zeta)

    q = common("truncated", "pi or eta measure with periods up to N")
    q.add_argument("--kind", choices=("pi", "eta"), required=True)
    q.add_argument("--c", type=float, required=True)
    q.add_argument("--N", type=int, required=True)
    q.add_argument("--cylinder", required=True)
    q.set_defaults(func=_cmd_truncated)

    q = common("devfun", "deviation function of an orbit or its infimum on a cylinder")
    q.add_argument("--orbit")
    q.add_argument("--cylinder")
    q.add_argument("--method", choices=("exact", "brute"), default="exact")
    q.add_argument("--cap", type=int, default=ergopt.BRUTE_PERIOD_CAP)
    q.set_defaults(func=_cmd_devfun)

    q = common("scan", "limit-regime scan written as CSV")
    q.add_argument("--regime", choices=REGIMES, required=True)
    q.add_argument("--grid", required=True,
                   help="e.g. 'L=1,c=25:200:*2', 'c=2,s=0.9|0.99' or 'c=100:400:+100'")
    q.add_argument("--cylinders", required=True, help="comma-separated words")
    q.add_argument("--kind", choices=("pi", "eta"), default="pi", help="measure for N-over-c")
    q.add_argument("--out", help="CSV path (default stdout)")
    q.add_argument("--json", help="also write rows as JSON")
    q.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for reproducible files")
    series_opts(q)
    q.set_defaults(func=_cmd_scan)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        f = load_potential(args.potential, args.shift)
        args.func(f, args, out)
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"zetatherm: error: {exc}", file=sys.stderr)
        return 2
    except (ZetathermError, ArithmeticError) as exc:
        print(f"zetatherm: numeric failure: {exc}", file=sys.stderr)
        return 3
    return 0


run = main

if __name__ == "__main__":
    sys.exit(main())
