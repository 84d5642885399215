"""Command line entry point.

Exit codes: 0 success, 1 bad arguments or configuration, 2 bisection cap
exceeded, 3 file I/O failure. ``PETRAS_SEED`` is accepted but has no
effect, since every code path is deterministic.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .engine import mpa_integrate, petras_integrate
from .errors import IterationCapExceeded, PetrasError
from .flows import FlowConfig, leftward_flow, rightward_flow, solve_c, solve_d
from .geometry import EngineConfig
from .harness import SweepConfig, emit, fit_order, read_csv, sweep
from .integrands import (get_integrand, probe_parabola_bound, probe_wedge_blowup,
                         wedge_lower_bound)

EXIT_OK, EXIT_CONFIG, EXIT_CAP, EXIT_IO = 0, 1, 2, 3


class _ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for the cap
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _integrate(args):
    f = get_integrand(args.fn)
    cfg = EngineConfig(epsilon=args.eps, A=args.A, c=args.c, rule=args.rule)
    run = mpa_integrate if args.mpa else petras_integrate
    q, st, part = run(f, args.a, args.b, cfg)
    if args.dump_partition:
        part.write(args.dump_partition)
    print(f"q: {q!r}")
    for k in ("Z", "N", "n_points", "bisections", "bad_final"):
        print(f"{k}: {getattr(st, k)}")
    print(f"bad_length: {st.bad_length!r}")
    print(f"M: {st.M!r}")
    print(f"wall_ms: {1e3 * st.wall_time:.3f}")


def _sweep(args):
    if args.config:
        cfg = SweepConfig.from_json(args.config)
    else:
        if args.fn is None or args.eps_start is None or args.eps_stop is None:
            raise _ConfigError("sweep needs --config or --fn/--eps-start/--eps-stop")
        cfg = SweepConfig(fn=args.fn, eps_start=args.eps_start, eps_stop=args.eps_stop,
                          eps_count=args.eps_count, mode=args.mode, a=args.a, b=args.b,
                          output=args.out)
    rows = sweep(cfg)
    fit = fit_order(rows, args.model) if len(rows) >= 3 else None
    out = args.out or cfg.output
    if out:
        emit(rows, fit, "csv", out, cfg)
        if args.json:
            emit(rows, fit, "json", args.json, cfg)
        if args.gnuplot:
            emit(rows, fit, "gnuplot", args.gnuplot, cfg, csv_path=out)
    else:
        print("epsilon,Z,N,q,bad_final,wall_ms")
        for r in rows:
            print(f"{r.epsilon!r},{r.Z},{r.N},{r.q!r},{r.bad_final},{r.wall_ms:.3f}")
    if fit is not None:
        print(f"fit {fit.model}: slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
              f"r2={fit.r_squared:.6g}", file=sys.stderr if not out else sys.stdout)


def _flow(args):
    fc = FlowConfig(args.p, args.gamma, args.A)
    if args.dir == "right":
        tr = rightward_flow(fc, args.start, args.stop)
    else:
        tr = leftward_flow(fc, args.start, args.stop)
    if args.trace:
        tr.write_csv(args.trace)
    print(f"steps: {tr.steps}")
    print(f"last: {float(tr.points[-1])!r}")


def _dsolve(args):
    fc = FlowConfig(args.p, args.gamma, args.A)
    g = fc.g_left if args.g == "left" else fc.g_right
    d = solve_d(args.x, g, fc)
    res = abs(max(args.x - g * d, 0.0) ** fc.p - fc.h * d)
    try:
        c = solve_c(args.x, g, fc)
    except PetrasError:
        c = math.nan
    print(f"d: {d!r}")
    print(f"c: {c!r}")
    print(f"residual: {res!r}")


def _probe(args):
    if args.which == "wedge":
        xs = np.logspace(-1, -3, 9)
        vals = probe_wedge_blowup(args.gamma, xs)
        low = wedge_lower_bound(args.gamma, xs)
        print("x,value,lower_bound")
        for x, v, lb in zip(xs, vals, low):
            print(f"{float(x)!r},{float(v)!r},{float(lb)!r}")
    else:
        xs = np.concatenate([-np.logspace(0, -6, 200), np.logspace(-6, 0, 200)])
        print(f"max: {probe_parabola_bound(int(args.p), args.gamma, xs)!r}")


def _fit(args):
    fit = fit_order(read_csv(args.inp), args.model)
    print(json.dumps({"model": fit.model, "slope": fit.slope, "intercept": fit.intercept,
                      "r_squared": None if math.isnan(fit.r_squared) else fit.r_squared,
                      "degenerate": fit.degenerate}))


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="petras", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("integrate", help="integrate one built-in function")
    p.add_argument("--fn", required=True)
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--A", type=float, default=1.25)
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--rule", choices=["gauss", "cc"], default="gauss")
    p.add_argument("--mpa", action="store_true")
    p.add_argument("--dump-partition", dest="dump_partition")
    p.set_defaults(func=_integrate)

    p = sub.add_parser("sweep", help="run a tolerance sweep")
    p.add_argument("--config")
    p.add_argument("--fn")
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--eps-start", dest="eps_start", type=float)
    p.add_argument("--eps-stop", dest="eps_stop", type=float)
    p.add_argument("--eps-count", dest="eps_count", type=int, default=5)
    p.add_argument("--mode", choices=["petras", "mpa", "flow_right", "flow_left"], default="petras")
    p.add_argument("--model", choices=["power", "loglin"], default="power")
    p.add_argument("--out")
    p.add_argument("--json")
    p.add_argument("--gnuplot")
    p.set_defaults(func=_sweep)

    p = sub.add_parser("flow", help="simulate a boundary-touching flow")
    p.add_argument("--dir", choices=["right", "left"], required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--A", type=float, default=1.25)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--trace")
    p.set_defaults(func=_flow)

    p = sub.add_parser("dsolve", help="solve for the step length d(x)")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--A", type=float, default=1.25)
    p.add_argument("--g", choices=["left", "right"], default="left")
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=_dsolve)

    p = sub.add_parser("probe", help="evaluate sin(1/z) along region boundaries")
    p.add_argument("--which", choices=["wedge", "parabola"], required=True)
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--gamma", type=float, required=True)
    p.set_defaults(func=_probe)

    p = sub.add_parser("fit", help="fit the growth order of a sweep CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--model", choices=["power", "loglin"], default="power")
    p.set_defaults(func=_fit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except IterationCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CAP
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (PetrasError, ValueError, KeyError, TypeError, _ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
