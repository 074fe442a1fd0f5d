"""Command-line interface: ``python -m grothendieck <command> ...``.

Every command writes a JSON report (or CSV rows) carrying the package
version, seed, tolerance and guard settings so that runs can be diffed.

Exit status: 0 success, 1 failed verification, 2 rejected input,
3 guard exceeded, 4 unconverged solve (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .constants import (
    cliqueweb_gap,
    gw_constant_check,
    hypermetric_gap,
    ip_bruteforce,
    kappa_k5_minor_free,
    kappa_ratio,
    maxcut,
    shortest_circuit_ratio,
)
from .cutpoly import (
    DEFAULT_CUT_GUARD,
    LinearInequality,
    constant_cycle_membership,
    cos_param_membership,
    cut_dilation_membership,
    met01_membership,
    met_membership,
)
from .errors import GuardExceeded, InapplicableTheorem, InvalidInput, UndefinedRatio
from .graph import DEFAULT_CYCLE_BUDGET, DEFAULT_MINOR_GUARD, load_graph
from .sdp import solve_elliptope_max
from .verify import SUITES, circuit_weights, verify_suite

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_GUARD, EXIT_UNCONVERGED = 0, 1, 2, 3, 4

# Which flag raises each named guard.
GUARD_FLAGS = {
    "ip_n": "--guard-n",
    "cut_n": "--guard-n",
    "sdp_n": "--guard-n",
    "minor_n": "--guard-n (or --assume-k5-free)",
    "cycle_budget": "--cycle-budget",
}

CSV_SWEEP_COLUMNS = ["q", "r", "ip", "sdp", "dual", "ratio", "bound2", "bound3"]


class ReportedFailure(Exception):
    """Carries a finished report together with a nonzero exit status."""

    def __init__(self, report, status):
        super().__init__(status)
        self.report = report
        self.status = status


# ---------------------------------------------------------------------------
# Input parsing


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from None


def parse_numbers(text):
    """Comma-separated numbers; integers stay integers so that ``ip`` is exact."""
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        try:
            out.append(int(tok))
        except ValueError:
            try:
                out.append(float(tok))
            except ValueError:
                raise InvalidInput(f"not a number: {tok!r}") from None
    return out


def parse_range(text):
    """``"3"``, ``"2,4,6"`` or an inclusive range ``"2-6"``."""
    values = []
    for tok in str(text).split(","):
        lo, sep, hi = tok.strip().partition("-")
        try:
            values.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
        except ValueError:
            raise InvalidInput(f"not an integer range: {text!r}") from None
    return values


def _is_cycle(g):
    return g.m == g.n and all(g.degree(v) == 2 for v in range(1, g.n + 1))


def load_weights(source, g):
    """Return ``(weights, inequality)`` for a ``--weights`` argument.

    ``inequality`` is set only when the source is an inequality JSON file;
    ``g`` may then be ``None`` and the inequality's own graph is used.
    """
    source = source or "minus-ones"
    if source in ("minus-ones", "ones", "circuit"):
        if g is None:
            raise InvalidInput("--graph is required with named weights")
        if source == "circuit":
            if not _is_cycle(g):
                raise InvalidInput("'circuit' weights need a cycle graph")
            return circuit_weights(g.m), None
        sign = -1 if source == "minus-ones" else 1
        return sign * np.ones(g.m, dtype=np.int64), None
    if os.path.exists(source):
        data = _read_json(source)
        if isinstance(data, dict) and "coeffs" in data:
            ineq = LinearInequality.from_dict(data)
            if g is not None and ineq.graph != g:
                raise InvalidInput("inequality graph differs from --graph")
            return ineq.coeffs, ineq
        if isinstance(data, dict):
            data = data.get("weights")
        if not isinstance(data, list):
            raise InvalidInput(f"{source}: expected a list of weights, a {{'weights': [...]}} object or an inequality")
        return np.asarray(data), None
    if g is None:
        raise InvalidInput("--graph is required with explicit weights")
    return np.asarray(parse_numbers(source)), None


def load_instance(args):
    g = None
    if args.graph:
        src = args.graph
        g = load_graph(_read_json(src)) if os.path.exists(src) else load_graph(src)
    w, ineq = load_weights(args.weights, g)
    g = g if g is not None else ineq.graph
    return g, w, ineq


# ---------------------------------------------------------------------------
# Commands


def _guard(args, default):
    return args.guard_n if args.guard_n is not None else default


def cmd_ip(args):
    g, w, _ = load_instance(args)
    res = ip_bruteforce(g, w, max_n=_guard(args, DEFAULT_CUT_GUARD))
    return {"graph": g.to_dict(), "weights": w, "ip": res.value, "shore": sorted(res.shore)}, True


def cmd_sdp(args):
    g, w, _ = load_instance(args)
    res = solve_elliptope_max(g, np.asarray(w, dtype=float), seed=args.seed, tol=args.tol)
    out = {"graph": g.to_dict(), "weights": w, **res.to_dict()}
    return out, res.converged


def cmd_gw(args):
    args.weights = args.weights or "ones"
    g, w, _ = load_instance(args)
    mc = maxcut(g, w, max_n=_guard(args, DEFAULT_CUT_GUARD))
    res = solve_elliptope_max(g, -np.asarray(w, dtype=float), seed=args.seed, tol=args.tol)
    sdp_gw = 0.5 * (float(np.sum(w)) + res.value)
    check = gw_constant_check(g, w, seed=args.seed)
    out = {
        "graph": g.to_dict(),
        "weights": w,
        "maxcut": mc.value,
        "shore": sorted(mc.shore),
        "sdp_gw": sdp_gw,
        "ratio": sdp_gw / mc.value if mc.value > 0 else None,
        "constant_check": check.status,
    }
    return out, res.converged


def cmd_kappa(args):
    g, _, _ = load_instance(args)
    formula = kappa_k5_minor_free(g, assume_k5_free=args.assume_k5_free, max_n=_guard(args, DEFAULT_MINOR_GUARD))
    out = {"graph": g.to_dict(), "kappa": formula.value, "girth": formula.girth, "forest": formula.trivial}
    converged = True
    if not formula.trivial and g.n <= DEFAULT_CUT_GUARD:
        rep = shortest_circuit_ratio(g, seed=args.seed)
        out["circuit_lower_bound"] = rep.ratio
        converged = rep.converged
    return out, converged


def cmd_gap(args):
    g, w, ineq = load_instance(args)
    if ineq is None:
        ipv = ip_bruteforce(g, w, max_n=_guard(args, DEFAULT_CUT_GUARD)).value
        ineq = LinearInequality(g, w, ipv)
    rep = kappa_ratio(g, ineq, seed=args.seed, max_n=_guard(args, DEFAULT_CUT_GUARD), tol=args.tol)
    out = {"graph": g.to_dict(), "weights": ineq.coeffs, "ip": rep.ip_value, "sdp": rep.sdp_value, **rep.to_dict()}
    return out, rep.converged


def _cliqueweb_row(rep, q, r):
    b = rep.bounds
    return {
        "q": q,
        "r": r,
        "ip": rep.ip_value,
        "sdp": rep.sdp_value,
        "dual": rep.dual_bound,
        "ratio": rep.ratio,
        # Ratio bounds of the two regimes, blank where a regime does not apply.
        "bound2": b["ratio_trbound"] if q >= 2 * r + 1 else None,
        "bound3": b["sdp_case_bound"] / b["ip"] if q <= 2 * r else None,
    }


def cmd_cliqueweb(args):
    qs, rs = parse_range(args.q), parse_range(args.r)
    opts = {"mode": args.mode, "seed": args.seed}
    if args.guard_n is not None:
        opts["full_max_n"] = args.guard_n
    if len(qs) == 1 and len(rs) == 1:
        rep = cliqueweb_gap(qs[0], rs[0], **opts)
        out = {"q": qs[0], "r": rs[0], "value": rep.sdp_value, **rep.to_dict()}
        return out, rep.converged
    rows, converged = [], True
    for q in qs:
        for r in rs:
            rep = cliqueweb_gap(q, r, **opts)
            rows.append(_cliqueweb_row(rep, q, r))
            converged = converged and rep.converged
    return {"mode": args.mode, "rows": rows}, converged


def cmd_hypermetric(args):
    if not args.b:
        raise InvalidInput("--b is required")
    rep = hypermetric_gap(parse_numbers(args.b), seed=args.seed, tol=args.tol)
    return {"b": parse_numbers(args.b), **rep.to_dict()}, rep.converged


def cmd_membership(args):
    if not args.x:
        raise InvalidInput("--x is required")
    g, _, _ = load_instance(args)
    x = np.asarray(_read_json(args.x) if os.path.exists(args.x) else parse_numbers(args.x), dtype=float)
    budget = args.cycle_budget
    out = {"graph": g.to_dict(), "test": args.test, "x": x}
    if args.test == "constant":
        if not _is_cycle(g) or x.size != 1:
            raise InvalidInput("the constant test needs a cycle graph and a single value --x")
        out["inside"] = constant_cycle_membership(g.n, float(x[0]))
        return out, True
    if args.test == "dilation":
        if args.k is None:
            raise InvalidInput("--k is required for the dilation test")
        res = cut_dilation_membership(g, x, args.k, tol=args.tol, max_n=_guard(args, DEFAULT_CUT_GUARD))
        out.update(
            status=res.status,
            inside=res.member,
            distance=res.distance,
            distance_lower_bound=res.distance_lower_bound,
            iterations=res.iterations,
        )
        return out, res.status != "inconclusive"
    if args.test != "met":
        test = met01_membership if args.test == "met01" else cos_param_membership
        out["inside"] = test(g, x, tol=args.tol, budget=budget)
        return out, True
    res = met_membership(g, x, tol=args.tol, budget=budget)
    out["inside"] = res.inside
    if res.certificate is not None:
        out["violated"] = res.certificate.to_dict()
        out["violation"] = res.violation
    return out, True


def cmd_verify(args):
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    params = {"seed": args.seed}
    if args.nmax is not None:
        params["nmax"] = args.nmax
    checks = []
    for name in names:
        checks += [dict(c.to_dict(), suite=name) for c in verify_suite(name, **params)]
    failed = [c for c in checks if not c["passed"]]
    out = {"suites": names, "passed": not failed, "checks": checks}
    if failed:
        out["first_failure"] = failed[0]
        raise ReportedFailure(out, EXIT_FAILED)
    return out, True


COMMANDS = {
    "ip": (cmd_ip, "exact +-1 optimum by exhaustive search"),
    "sdp": (cmd_sdp, "elliptope relaxation value with a dual bound"),
    "gw": (cmd_gw, "max-cut value against its semidefinite relaxation"),
    "kappa": (cmd_kappa, "closed-form constant of a K5-minor-free graph"),
    "gap": (cmd_gap, "integrality ratio sdp / ip for given weights or an inequality file"),
    "cliqueweb": (cmd_cliqueweb, "clique-web ratio; ranges in --q/--r give a sweep"),
    "hypermetric": (cmd_hypermetric, "hypermetric ratio for --b"),
    "membership": (cmd_membership, "metric, angle or dilated-cut membership of a point --x"),
    "verify": (cmd_verify, "run a reproduction suite"),
}


# ---------------------------------------------------------------------------
# Output


def _plain(obj):
    """Convert numpy values and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in (obj.tolist() if isinstance(obj, np.ndarray) else obj)]
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def format_report(report, fmt):
    if fmt == "json":
        return json.dumps(_plain(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
    result = report["result"]
    rows = result.get("rows") or result.get("checks") or [{k: v for k, v in result.items() if not isinstance(v, (dict, list, np.ndarray))}]
    rows = _plain(rows)
    cols = CSV_SWEEP_COLUMNS if set(CSV_SWEEP_COLUMNS) <= set(rows[0]) else sorted(rows[0])
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def write_report(report, args):
    text = format_report(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def header(args):
    return {
        "version": __version__,
        "command": args.command,
        "seed": args.seed,
        "tol": args.tol,
        "guards": {
            "guard_n": args.guard_n,
            "cycle_budget": args.cycle_budget,
            "assume_k5_free": args.assume_k5_free,
        },
    }


def build_parser():
    parser = argparse.ArgumentParser(prog="grothendieck", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--graph", help="family string such as Cn:5 or CW:q=3,r=1, or a graph JSON file")
        p.add_argument(
            "--weights",
            help="minus-ones (default), ones, circuit, a comma list, or a JSON file (weights or inequality)",
        )
        p.add_argument("--q", default="2", help="clique size, or a range such as 2-6")
        p.add_argument("--r", default="1", help="web parameter, or a range such as 0-3")
        p.add_argument("--b", help="comma list of integers for the hypermetric inequality")
        p.add_argument("--mode", default="reduced", choices=["reduced", "full", "formula"])
        p.add_argument("--x", help="point for membership: comma list or JSON file")
        p.add_argument("--k", type=float, help="dilation factor for the dilation membership test")
        p.add_argument("--test", default="met", choices=["met", "met01", "cos", "constant", "dilation"])
        p.add_argument("--suite", default="all", choices=["all", *sorted(SUITES)])
        p.add_argument("--nmax", type=int, help="largest cycle length in the circuits suite")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", default="json", choices=["json", "csv"])
        p.add_argument("--guard-n", type=int, help="raise the vertex-count limit of exhaustive steps")
        p.add_argument("--cycle-budget", type=int, default=DEFAULT_CYCLE_BUDGET)
        p.add_argument("--assume-k5-free", action="store_true", help="skip the K5-minor test")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    report = header(args)
    try:
        result, converged = COMMANDS[args.command][0](args)
    except ReportedFailure as exc:
        report.update(result=exc.report, converged=True)
        write_report(report, args)
        first = exc.report.get("first_failure")
        print(f"verification failed: {first['name'] if first else 'unknown check'}", file=sys.stderr)
        return exc.status
    except GuardExceeded as exc:
        flag = GUARD_FLAGS.get(exc.guard, "the matching guard flag")
        print(f"error: guard {exc.guard!r} exceeded: {exc}; raise it with {flag}", file=sys.stderr)
        return EXIT_GUARD
    except (InvalidInput, UndefinedRatio, InapplicableTheorem) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.update(result=result, converged=bool(converged))
    write_report(report, args)
    if not converged:
        print("warning: solver did not reach its convergence target", file=sys.stderr)
        return EXIT_UNCONVERGED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
