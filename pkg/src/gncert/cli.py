"""Command-line front end: ``gncert {solve,certify,radius,worst-case,suite}``.

Structured output (JSON) goes to ``--out`` or, when no path is given, to stdout;
in the latter case human-readable lines go to stderr so stdout stays parseable.

Exit codes: 0 success, 1 usage error, 2 solve did not converge, 3 h3 violated,
4 empirical radius below the certified one, 5 no worst-case cycle, 6 suite failure.
"""
import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import certify, problems, suite
from .errors import GNCertError, H3Violated, InsufficientData, RankDeficient
from .majorant import lipschitz_majorant, smale_majorant
from .solver import solve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2
EXIT_H3 = 3
EXIT_RADIUS = 4
EXIT_NO_CYCLE = 5
EXIT_SUITE = 6

SEED_ENV = "GN_CERTIFY_SEED"
CONVERGED_TOL = 1e-8
RADIUS_RTOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return suite.DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def parse_majorant(text):
    """``"lipschitz"``, ``"lipschitz:K=2"`` or ``"smale:gamma=1"`` -> ``(kind, params)``."""
    kind, _, rest = text.partition(":")
    kind = kind.strip()
    if kind not in ("lipschitz", "smale"):
        raise UsageError(f"unknown majorant kind {kind!r} (expected lipschitz or smale)")
    params = problems.parse_params([p for p in rest.split(",") if p]) if rest else {}
    allowed = {"lipschitz": {"K", "R"}, "smale": {"gamma"}}[kind]
    if set(params) - allowed:
        raise UsageError(f"{kind} majorant takes {sorted(allowed)}, got {sorted(params)}")
    return kind, params


def make_majorant(kind, params):
    if not params:
        return None
    if kind == "lipschitz":
        if "K" not in params:
            raise UsageError("lipschitz majorant needs K")
        return lipschitz_majorant(params["K"], params.get("R", math.inf))
    return smale_majorant(params["gamma"])


def parse_x0(text, problem):
    """Comma-separated vector, or ``auto:delta,seed`` for ``x* + delta d`` with a seeded unit ``d``."""
    if text.startswith("auto:"):
        if problem.x_star is None:
            raise UsageError("auto x0 needs a problem with known x*")
        parts = text[5:].split(",")
        try:
            delta = float(parts[0])
            seed = int(parts[1]) if len(parts) > 1 and parts[1] else 0
        except (ValueError, IndexError):
            raise UsageError(f"expected auto:delta,seed, got {text!r}") from None
        d = certify.random_direction(np.random.default_rng(seed), problem.n)
        return problem.x_star + delta * d
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"x0 must be comma-separated numbers or auto:delta,seed, got {text!r}") from None
    if x0.size != problem.n:
        raise UsageError(f"x0 has {x0.size} entries, problem {problem.name} has n={problem.n}")
    return x0


def build_problem(args):
    params = problems.parse_params(args.param)
    name = args.problem
    if name == "worst_case":
        # the worst case is parametrised by the majorant and beta
        if args.majorant:
            kind, mparams = parse_majorant(args.majorant)
            params.setdefault("kind", kind)
            for key, value in mparams.items():
                params.setdefault(key, value)
        if args.beta is not None:
            params.setdefault("beta", args.beta)
    try:
        return problems.build(name, **params)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{name}: {exc}") from None


def worst_case_majorant(problem):
    p = problem.params
    return lipschitz_majorant(p["K"]) if p["kind"] == "lipschitz" else smale_majorant(p["gamma"])


def resolve_certificate(args, problem, rng):
    if problem.name == "worst_case":
        return certify.build_certificate(problem, worst_case_majorant(problem))
    kind, params = parse_majorant(args.majorant or "lipschitz")
    return certify.build_certificate(problem, make_majorant(kind, params), kind=kind, rng=rng)


def emit(args, payload, human_lines=()):
    """JSON to ``--out`` (human lines to stdout) or JSON to stdout (human lines to stderr)."""
    text = certify.dumps(payload)
    if args.out:
        Path(args.out).write_text(text)
        for line in human_lines:
            print(line)
    else:
        for line in human_lines:
            print(line, file=sys.stderr)
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------

def cmd_solve(args):
    if args.x0 is None:
        raise UsageError("solve needs --x0")
    problem = build_problem(args)
    x0 = parse_x0(args.x0, problem)
    tr = solve(problem, x0, max_iters=args.max_iters, grad_tol=args.tol_grad)
    try:
        order = certify.fit_convergence_order(tr).order
    except InsufficientData:
        order = None
    summary = {
        "problem": problem.name,
        "status": tr.status.value,
        "iters": tr.n_iters,
        "final_error": tr.final_error,
        "fitted_order": order,
        "x": tr.x.tolist(),
    }
    if args.trace:
        trace_path = Path(args.trace)
    elif args.out:
        out = Path(args.out)
        trace_path = out.with_suffix(".csv") if out.suffix != ".csv" else out.with_suffix(".trace.csv")
    else:
        trace_path = None
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            tr.to_csv(fh)
    emit(args, summary, [f"{problem.name}: {tr.status.value} after {tr.n_iters} iterations"])
    at_solution = tr.final_error is None or tr.final_error < CONVERGED_TOL
    return EXIT_OK if tr.converged and at_solution else EXIT_NOT_CONVERGED


def certificate_table(cert):
    k, rd = cert.constants, cert.radii
    rows = [
        ("problem", cert.problem),
        ("majorant", f"{cert.majorant_dict()['kind']} {cert.majorant_dict()['params']} ({cert.constant_source})"),
        ("c", k.c), ("beta", k.beta), ("beta0", k.beta0), ("kappa", k.kappa),
        ("nu", rd.nu), ("rho", rd.rho), ("sigma", rd.sigma), ("r", rd.r),
        ("h3", rd.h3_satisfied), ("h4", rd.h4_satisfied),
    ]
    return [f"{name:>8}  {value:.12g}" if isinstance(value, float) else f"{name:>8}  {value}"
            for name, value in rows]


def cmd_certify(args):
    problem = build_problem(args)
    rng = np.random.default_rng(args.seed)
    cert = resolve_certificate(args, problem, rng)
    if cert.unconditional:
        check = certify.CheckResult(True, 0.0, 0)
    else:
        check = certify.verify_majorant_condition(problem, cert.majorant, kappa=cert.constants.kappa, rng=rng)
    payload = cert.to_dict(validation={"majorant_condition": check.to_dict()})
    emit(args, payload, certificate_table(cert))
    return EXIT_OK


def cmd_radius(args):
    problem = build_problem(args)
    rng = np.random.default_rng(args.seed)
    cert = resolve_certificate(args, problem, rng)
    t_max = args.t_max
    if problem.name == "worst_case":
        # beyond rho the worst case cycles or escapes; no need to scan far out
        t_max = min(t_max, 2 * cert.r)
    t_max = min(t_max, problem.kappa)
    emp = certify.empirical_radius(problem, directions=args.directions, t_max=t_max, rng=rng)
    theoretical = min(cert.r, t_max)
    payload = {
        "problem": problem.name,
        "theoretical_r": theoretical,
        "certified_r": cert.r,
        "t_max": t_max,
        "empirical_radius": emp.minimum,
        "per_direction": emp.per_direction,
        "ratio": emp.minimum / theoretical if theoretical > 0 else math.inf,
    }
    ok = emp.minimum >= theoretical * (1 - RADIUS_RTOL)
    emit(args, payload, [f"theoretical r = {theoretical:.12g}, empirical = {emp.minimum:.12g}, "
                         f"ratio = {payload['ratio']:.9g}"])
    return EXIT_OK if ok else EXIT_RADIUS


def cmd_worst_case(args):
    kind, params = parse_majorant(args.majorant or "lipschitz:K=1")
    if kind == "lipschitz":
        maj = lipschitz_majorant(params.get("K", 1.0))
    else:
        maj = smale_majorant(params.get("gamma", 1.0))
    beta = 1.0 if args.beta is None else args.beta
    if not beta > 0:
        raise UsageError("--beta must be positive")
    override = None
    if args.x0 is not None:
        try:
            override = float(args.x0)
        except ValueError:
            raise UsageError(f"worst-case --x0 must be a scalar, got {args.x0!r}") from None
    iters = 10 if args.max_iters is None else args.max_iters
    demo = certify.cycle_demo(maj, beta, x0=override, iters=iters)
    demo.update({"majorant": {"kind": maj.kind, "params": maj.params}, "beta": beta})
    lines = [f"rho = {demo['rho']:.15g}", "iterates: " + " ".join(f"{x:+.15g}" for x in demo["iterates"]),
             f"cycle: {demo['cycle']}"]
    emit(args, demo, lines)
    if demo["cycle"]:
        return EXIT_OK
    # demo mode: an explicit start inside the radius is expected to converge instead
    converged = override is not None and abs(demo["iterates"][-1]) < CONVERGED_TOL
    return EXIT_OK if converged else EXIT_NO_CYCLE


def cmd_suite(args):
    extra = [build_problem(args)] if args.problem else []
    report = suite.run_suite(seed=args.seed, extra_problems=extra)
    emit(args, report, suite.summary_lines(report))
    return EXIT_OK if report["pass"] else EXIT_SUITE


COMMANDS = {
    "solve": cmd_solve,
    "certify": cmd_certify,
    "radius": cmd_radius,
    "worst-case": cmd_worst_case,
    "suite": cmd_suite,
}


def build_parser():
    parser = _Parser(prog="gncert", description="Gauss-Newton local convergence certificates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, problem_required=True):
        p.add_argument("--problem", required=problem_required, help="registered problem name")
        p.add_argument("--param", action="append", default=[], metavar="K=V", help="problem parameter (repeatable)")
        p.add_argument("--majorant", help="kind[:k=v,...], e.g. lipschitz:K=2 or smale:gamma=1")
        p.add_argument("--beta", type=float, help="beta for the worst-case problem")
        p.add_argument("--x0", help="start: comma list or auto:delta,seed")
        p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default 42 or ${SEED_ENV})")
        p.add_argument("--out", help="write JSON here instead of stdout")
        p.add_argument("--tol-grad", type=float, default=None, help="gradient-norm stopping tolerance")
        p.add_argument("--max-iters", type=int, default=None, help="iteration cap")
        return p

    common(sub.add_parser("solve", help="run Gauss-Newton and write the trace")).add_argument(
        "--trace", help="trace CSV path (default: next to --out)")
    common(sub.add_parser("certify", help="build a convergence certificate"))
    rad = common(sub.add_parser("radius", help="compare certified and empirical radius"))
    rad.add_argument("--t-max", type=float, default=10.0, help="largest distance probed")
    rad.add_argument("--directions", type=int, default=8, help="random directions (n > 1)")
    common(sub.add_parser("worst-case", help="cycle demo on the worst-case scalar problem"), problem_required=False)
    common(sub.add_parser("suite", help="run the acceptance battery"), problem_required=False)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = default_seed()
        if args.max_iters is None and args.command != "worst-case":
            args.max_iters = 100
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gncert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except H3Violated as exc:
        print(f"gncert: h3 violated: sqrt2 c beta^2 D+f'(0) = {exc.product:.12g} >= 1", file=sys.stderr)
        return EXIT_H3
    except RankDeficient as exc:
        print(f"gncert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GNCertError as exc:
        print(f"gncert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
