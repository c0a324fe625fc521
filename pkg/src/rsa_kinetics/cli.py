"""Command-line entry point.

Exit codes: 0 success, 1 comparison failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import constants, solver
from .compare import compare, default_h, discrete_empty_space
from .errors import ConfigurationError, DomainError, NumericError
from .ldf import Kind
from .presets import PRESETS, resolve
from .sim.montecarlo import DEFAULT_BATCH, DEFAULT_SEED, PROCESSES, SimulationSpec, monte_carlo_all

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(x: float | None) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "NA"
    return f"{x:.17g}"


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# ---------------------------------------------------------------- commands


def cmd_simulate(args) -> int:
    preset = resolve(args.dist)
    if args.L is None:
        raise ConfigurationError("simulate needs --L")
    spec = SimulationSpec(
        args.process, preset.distribution, float(args.L),
        attempt_cap=args.attempt_cap, literal=args.literal,
    )
    est = monte_carlo_all(spec, args.reps, args.seed, args.batch)
    if args.format == "json":
        body = {
            "process": args.process,
            "distribution": preset.distribution.to_json(),
            "L": float(args.L),
            "replicates": args.reps,
            "seed": args.seed,
            "batch_size": args.batch,
            "estimates": [
                {
                    "estimand": e.estimand,
                    "mean": e.mean,
                    "stderr": None if math.isnan(e.stderr) else e.stderr,
                }
                for e in est.values()
            ],
        }
        _emit(_json(body), args.out)
    else:
        buf = io.StringIO()
        buf.write("estimand,mean,stderr,replicates,seed\n")
        for e in est.values():
            buf.write(f"{e.estimand},{_fmt(e.mean)},{_fmt(e.stderr)},{e.replicates},{e.seed}\n")
        _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    preset = resolve(args.dist)
    d = preset.distribution
    L_max = float(args.Lmax if args.Lmax is not None else preset.L_max)
    k = args.k if args.k is not None else preset.k
    h = args.h if args.h is not None else default_h(d, L_max)
    if d.kind is Kind.DISCRETE:
        ls, qs = list(d.lengths), list(d.weights)
        if args.moment == 2:
            g = solver.solve_second_moment(ls, qs, k or 1, L_max, h)
        elif k is not None:
            g = solver.solve_multidisperse_counts(ls, qs, k, L_max, h)
        else:
            g = discrete_empty_space(d, L_max, h)
    else:
        if k is not None or args.moment == 2:
            raise ConfigurationError("--k and --moment 2 need a discrete ldf")
        g = solver.solve_empty_space(d, L_max, h)
    _emit(g.to_json() + "\n" if args.format == "json" else g.to_csv(), args.out)
    return EXIT_OK


def cmd_constants(args) -> int:
    which = args.which
    reports = []
    if which == "renyi":
        reports.append(constants.renyi_constant(args.tol or 1e-10).report("renyi_alpha"))
    elif which == "multi":
        d = resolve(args.preset or args.dist or "example3").distribution
        if d.kind is not Kind.DISCRETE:
            raise ConfigurationError("constants multi needs a discrete ldf")
        ws = constants.build_workspace(d.lengths, d.weights)
        ks = [args.k] if args.k else range(1, d.n_types + 1)
        ests = [constants.multidisperse_alpha(d.lengths, d.weights, k, args.tol or 1e-8, ws) for k in ks]
        for k, e in zip(ks, ests):
            reports.append(e.report(f"alpha_{k}"))
        if not args.k:
            cover = sum(float(l) * e.value for l, e in zip(d.lengths, ests))
            err = sum(float(l) * e.abs_err for l, e in zip(d.lengths, ests))
            reports.append(
                constants.ConstantEstimate(
                    cover, err, "sum_k l_k alpha_k", {"lengths": [float(x) for x in d.lengths]}
                ).report("coverage")
            )
    elif which == "xi":
        if args.beta is None:
            raise ConfigurationError("constants xi needs --beta")
        tol = args.tol or 1e-12
        val = constants.xi_exponent(args.beta, tol)
        reports.append(
            constants.ConstantEstimate(val, tol, "Brent root of the Beta equation", {"beta": args.beta}).report("xi")
        )
        if float(args.beta).is_integer() and args.beta >= 1:
            vi = constants.xi_exponent_integer(int(args.beta), tol)
            reports.append(
                constants.ConstantEstimate(vi, tol, "Brent root of the factorial product", {"beta": args.beta}).report(
                    "xi_integer"
                )
            )
    elif which == "ghost":
        d = resolve(args.preset or args.dist or "example3").distribution
        if d.kind is not Kind.DISCRETE:
            raise ConfigurationError("constants ghost needs a discrete ldf")
        val = constants.ghost_density_limit(d.lengths, d.weights)
        lo, hi = constants.ghost_density_bounds(d.lengths)
        reports.append(
            constants.ConstantEstimate(
                val, 0.0, "closed form", {"lengths": [float(x) for x in d.lengths],
                                          "probs": [float(x) for x in d.weights],
                                          "bounds": [lo, hi]}
            ).report("ghost_density")
        )
    elif which == "alpha-nu":
        d = resolve(args.preset or args.dist or "fig5a").distribution
        L_max = args.Lmax or 2000.0
        est = constants.alpha_nu_estimate(d, L_max, args.h or default_h(d, L_max))
        reports.append(est.report("alpha_nu"))
    body = reports[0] if len(reports) == 1 else reports
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value", "abs_err", "method"])
        for r in reports:
            w.writerow([r["quantity"], _fmt(r["value"]), _fmt(r["abs_err"]), r["method"]])
        _emit(buf.getvalue(), args.out)
    else:
        _emit(_json(body), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    preset = resolve(args.dist)
    L = float(args.L if args.L is not None else preset.L_max)
    rep = compare(
        preset.distribution, L, args.reps, args.seed, args.h, args.process,
        args.tol_scale, preset.name, args.batch,
    )
    if args.format == "json":
        _emit(rep.to_json() + "\n", args.out)
    else:
        _emit(rep.to_csv(), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rsa-kinetics",
        description="Random sequential adsorption: simulation, recurrences, constants.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    presets = ", ".join(sorted(PRESETS))

    def common(sp, fmt_default="csv"):
        sp.add_argument("--out", help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    s = sub.add_parser("simulate", help="Monte Carlo estimates")
    s.add_argument("--dist", required=True, help=f"preset ({presets}) or JSON file")
    s.add_argument("--process", choices=PROCESSES, default="rsa")
    s.add_argument("--L", type=float)
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--batch", type=int, default=DEFAULT_BATCH)
    s.add_argument("--attempt-cap", type=int, default=10_000_000, dest="attempt_cap",
                   help="rejection process: attempts per replicate before giving up")
    s.add_argument("--literal", action="store_true",
                   help="rejection process: draw every attempt on the whole line")
    common(s)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="march a recurrence on a grid")
    s.add_argument("--dist", required=True, help=f"preset ({presets}) or JSON file")
    s.add_argument("--Lmax", type=float)
    s.add_argument("--h", type=float)
    s.add_argument("--k", type=int, help="type index (1-based) for discrete ldfs")
    s.add_argument("--moment", type=int, choices=(1, 2), default=1)
    common(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("constants", help="limiting constants")
    s.add_argument("which", choices=("renyi", "multi", "xi", "ghost", "alpha-nu"))
    s.add_argument("--preset")
    s.add_argument("--dist")
    s.add_argument("--beta", type=float)
    s.add_argument("--k", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--Lmax", type=float)
    s.add_argument("--h", type=float)
    common(s, "json")
    s.set_defaults(func=cmd_constants)

    s = sub.add_parser("compare", help="cross-check the engines")
    s.add_argument("--dist", required=True, help=f"preset ({presets}) or JSON file")
    s.add_argument("--process", choices=("rsa", "ghost"), default="rsa")
    s.add_argument("--L", type=float)
    s.add_argument("--reps", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--batch", type=int, default=DEFAULT_BATCH)
    s.add_argument("--h", type=float)
    s.add_argument("--tol-scale", type=float, default=1.0, dest="tol_scale")
    common(s)
    s.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
