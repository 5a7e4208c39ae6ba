"""Command line interface: check, bracket, flow, leaf and report subcommands.

Exit codes: 0 success, 1 a check failed or the computation raised, 2 usage error.
Errors are written to stderr as a single JSON object.
"""
import argparse
import json
import sys

import numpy as np

from . import checks, leaves
from . import weinstein as W
from .errors import ParseError, ReductionError
from .scenarios import builtin_scenarios, get_scenario

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_json(text, what):
    """Inline JSON, or a file path prefixed with '@'."""
    try:
        if text.startswith("@"):
            with open(text[1:]) as fh:
                return json.load(fh)
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {what}: {exc}") from None


def _scenario(name):
    if name not in builtin_scenarios():
        raise UsageError(f"unknown scenario {name!r}; choose from {', '.join(builtin_scenarios())}")
    return get_scenario(name)


def _point(sc, text):
    if text is None:
        return sc.reference_point()
    doc = _load_json(text, "point")
    try:
        w = W.WeinsteinPoint.from_json(doc)
    except (KeyError, TypeError) as exc:
        raise UsageError(f'point must be {{"x": [...], "eta": [...], "lambda": [...]}} ({exc})') from None
    b, m = sc.manifold.base_dim, sc.algebra.dim
    if w.x.size != b or w.eta.size != b or w.lam.size != m:
        raise UsageError(f"{sc.name}: point needs x and eta of length {b} and lambda of length {m}")
    return w


def _observable(sc, text, flag):
    try:
        return W.ExprObservable(text, sc.manifold)
    except ParseError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def _emit(doc, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(doc, indent=2) + "\n")


# -- subcommands ------------------------------------------------------------------

def cmd_check(args):
    names = builtin_scenarios() if args.scenario == "all" else [args.scenario]
    docs, ok = [], True
    for name in names:
        _scenario(name)
        results, extra = checks.run_checks(name, seed=args.seed, n_oracle=args.n_oracle)
        passed = all(r.passed for r in results)
        ok &= passed
        doc = {"scenario": name, "status": "PASS" if passed else "FAIL", **extra,
               "results": [r.to_json() for r in results]}
        docs.append(doc)
    _emit(docs[0] if len(docs) == 1 else docs)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_bracket(args):
    sc = _scenario(args.scenario)
    M = sc.manifold
    w = _point(sc, args.point)
    f, g = _observable(sc, args.f, "--f"), _observable(sc, args.g, "--g")
    terms = W.bracket_terms(M, f, g, w)
    value = terms["canonical"] + terms["curvature"] + terms["vertical"]
    doc = {"scenario": sc.name, "f": f.expr.pretty(), "g": g.expr.pretty(), "point": w.to_json(),
           "value": value, "terms": terms}
    if not args.no_oracle:
        oracle = W.oracle_bracket(M, f, g, w)
        tol = 1e-6 * (1 + abs(oracle))
        doc.update(oracle=oracle, abs_diff=abs(value - oracle), matches_oracle=bool(abs(value - oracle) <= tol))
    _emit(doc)
    return EXIT_OK if doc.get("matches_oracle", True) else EXIT_FAIL


def cmd_flow(args):
    sc = _scenario(args.scenario)
    M = sc.manifold
    w0 = _point(sc, args.point)
    H = _observable(sc, args.h or sc.default_hamiltonian, "--h")
    if not args.dt > 0 or args.T < 0:
        raise UsageError("need --dt > 0 and --T >= 0")
    traj = W.integrate_flow(M, H, w0, args.T, args.dt, check=args.strict, every=args.every)
    text = traj.to_csv() if args.format == "csv" else traj.to_jsonl()
    energy = np.array([H(traj.point(i)) for i in range(len(traj))])
    inv = np.array([leaves.orbit_invariants(M.algebra, lam) for lam in traj.lam])
    summary = {"scenario": sc.name, "hamiltonian": H.expr.pretty(), "T": args.T, "dt": args.dt,
               "steps": int(round(args.T / args.dt)), "records": len(traj),
               "energy_drift": float(np.abs(energy - energy[0]).max()),
               "orbit_invariant_drift": float(np.abs(inv - inv[0]).max()),
               "final": traj.point(len(traj) - 1).to_json()}
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        summary["out"] = args.out
        _emit(summary)
    else:
        sys.stdout.write(text)
        _emit(summary, sys.stderr)
    return EXIT_OK


def cmd_leaf(args):
    sc = _scenario(args.scenario)
    if args.lam is None:
        lam = sc.reference_lambda
    else:
        lam = np.asarray(_load_json(args.lam, "lambda"), dtype=float)
        if lam.shape != (sc.algebra.dim,):
            raise UsageError(f"{sc.name}: lambda needs {sc.algebra.dim} entries")
    _emit({"scenario": sc.name, **leaves.leaf_report(sc.manifold, lam)})
    return EXIT_OK


def cmd_report(args):
    _scenario(args.scenario)
    doc = checks.report(args.scenario, seed=args.seed)
    _emit(doc)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


# -- parser -----------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="gauged-reduce", description="Singular cotangent reduction toolkit.")
    p.add_argument("--seed", type=int, default=None,
                   help=f"64-bit RNG seed (default {checks.DEFAULT_SEED}; env {checks.SEED_ENV} overrides)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("check", help="run invariant suites and the oracle battery")
    s.add_argument("scenario", help="scenario name or 'all'")
    s.add_argument("--n-oracle", type=int, default=100, help="oracle samples (default 100)")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("bracket", help="reduced bracket of two observables")
    s.add_argument("scenario")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--point", help="JSON point or @file (default: scenario reference point)")
    s.add_argument("--no-oracle", action="store_true", help="skip the upstairs comparison")
    s.set_defaults(func=cmd_bracket)

    s = sub.add_parser("flow", help="integrate a Hamiltonian flow with RK4")
    s.add_argument("scenario")
    s.add_argument("--h", help="Hamiltonian expression (default: scenario Hamiltonian)")
    s.add_argument("--point", help="JSON point or @file (default: scenario reference point)")
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--every", type=int, default=1, help="record every n-th step")
    s.add_argument("--out", help="trajectory file (default: stdout, summary to stderr)")
    s.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    s.add_argument("--strict", action="store_true", help="check invariance at every stage")
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("leaf", help="symplectic leaf report at lambda")
    s.add_argument("scenario")
    s.add_argument("--lambda", dest="lam", help="JSON list or @file (default: scenario reference)")
    s.set_defaults(func=cmd_leaf)

    s = sub.add_parser("report", help="reference values with provenance tags")
    s.add_argument("scenario")
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command in ("check", "report"):
            args.seed = checks.resolve_seed(args.seed)
        return args.func(args)
    except UsageError as exc:
        _emit({"error": "usage", "message": str(exc)}, sys.stderr)
        return EXIT_USAGE
    except ReductionError as exc:
        doc = {"error": type(exc).__name__, "message": str(exc)}
        for attr in ("scenario", "invariant", "position"):
            if hasattr(exc, attr):
                doc[attr] = getattr(exc, attr)
        _emit(doc, sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
