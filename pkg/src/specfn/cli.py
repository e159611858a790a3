"""
Command-line front end.  Every command prints one JSON object on stdout.

Exit status: 0 on success, 1 for input errors (one-line JSON on stderr),
2 for numerical failures or a failing ``check`` suite.
"""
import argparse
import json
import os
import sys

import numpy as np

from . import calculus as calc
from .calculus import DividedDiffMode, EngineConfig
from .errors import DomainError, InputError, NumericalError, SpecFnError
from .linalg import jacobi_eigh, load_matrix
from .newton import SymPoly, lift_polynomial, power_sums
from .oracle import SUITES, run_suite


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _param(text):
    name, sep, value = text.partition("=")
    if not sep or not name.strip():
        raise InputError(f"--param expects name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise InputError(f"parameter {name.strip()!r} needs a numeric value") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--param", action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--tol", type=float, default=None,
                        help="coalescence tolerance for divided differences")
    common.add_argument("--quad-nodes", type=int, default=None)
    common.add_argument("--mode", choices=[m.value for m in DividedDiffMode], default="auto")

    p = _Parser(prog="specfn", description="Spectral functions of symmetric matrices")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help, f=False, m=False, d=False, n=False):
        sp = sub.add_parser(name, help=help, parents=[common])
        if f:
            sp.add_argument("-f", "--function", required=True)
        if m:
            sp.add_argument("-m", "--matrix", required=True)
        if d:
            sp.add_argument("-d", "--direction", required=True)
        if n:
            sp.add_argument("-n", "--order", type=int, required=True)
        return sp

    cmd("eval", "value F(X)", f=True, m=True)
    cmd("grad", "gradient of F at X", f=True, m=True)
    cmd("hess", "Hessian of F at X applied to a direction", f=True, m=True, d=True)
    cmd("dirderiv", "n-th directional derivative", f=True, m=True, d=True, n=True)
    lift = cmd("lift", "evaluate a symmetric polynomial at the power sums of X", m=True)
    lift.add_argument("-p", "--poly", required=True,
                      help="path or inline JSON list of {coeff, exponents} over e_1..e_d")
    cmd("spectrum", "eigenvalues and eigenvectors of X", m=True)
    chk = cmd("check", "run the property suites")
    chk.add_argument("--suite", action="append", choices=SUITES, default=None)
    chk.add_argument("--trials", type=int, default=None)
    chk.add_argument("--records", action="store_true", help="include per-case records")
    return p


def _config(args):
    kw = {"mode": DividedDiffMode(args.mode)}
    if args.tol is not None:
        kw["coalescence_tol"] = args.tol
    if args.quad_nodes is not None:
        kw["quad_nodes"] = args.quad_nodes
    return EngineConfig(**kw)


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SPECFN_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"SPECFN_SEED must be an integer, got {env!r}") from None


def _load(path):
    try:
        return load_matrix(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg}") from None


def _load_poly(text):
    if os.path.exists(text):
        with open(text) as fh:
            text = fh.read()
    try:
        return SymPoly.from_json(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"polynomial is not valid JSON: {exc.msg}") from None


def run(args):
    """Execute parsed arguments; returns ``(exit_code, result_dict)``."""
    cfg = _config(args)
    params = dict(_param(t) for t in args.param)
    out = {"command": args.command}
    if args.command == "check":
        seed = _seed(args)
        reports = [run_suite(s, seed, args.trials) for s in (args.suite or SUITES)]
        out["inputs"] = {"suites": [r.suite for r in reports], "seed": seed,
                         "trials": args.trials}
        out["suites"] = [r.to_dict() if args.records else r.summary() for r in reports]
        out["passed"] = all(r.passed for r in reports)
        return (0 if out["passed"] else 2), out

    X = _load(args.matrix)
    out["inputs"] = {"matrix": args.matrix}
    if getattr(args, "function", None) is not None:
        out["inputs"]["function"] = args.function
    if params:
        out["inputs"]["params"] = params
    s = jacobi_eigh(X)
    diag = calc.diagnostics(X, cfg, s)

    if args.command == "spectrum":
        out["eigenvalues"] = s.r.tolist()
        out["eigenvectors"] = s.flag.vectors().tolist()
    elif args.command == "lift":
        poly = _load_poly(args.poly)
        out["inputs"]["poly"] = json.loads(poly.to_json())
        out["value"] = lift_polynomial(poly, X)
        out["power_sums"] = power_sums(X).p.tolist()
    elif args.command == "eval":
        out["value"] = calc.eval_F(args.function, X, params, cfg, s)
    elif args.command == "grad":
        out["value"] = calc.gradient(args.function, X, params, cfg, s).tolist()
    else:
        xi = _load(args.direction)
        if xi.shape != X.shape:
            raise InputError("direction and matrix have different shapes")
        out["inputs"]["direction"] = args.direction
        if args.command == "hess":
            out["value"] = calc.hessian_apply(args.function, X, xi, params, cfg, s).tolist()
        else:
            out["inputs"]["order"] = args.order
            val, modes = calc.dirderiv(args.function, X, xi, args.order, params, cfg, s,
                                       return_modes=True)
            out["value"] = val
            if modes:
                diag["mode_used"].update({f"{i},{j}": m for (i, j), m in modes.items()})
    out["diagnostics"] = diag
    return 0, out


def _fail(code, exc):
    msg = {"error": type(exc).__name__, "message": str(exc).replace("\n", " ")}
    print(json.dumps(msg), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        code, out = run(args)
    except (InputError, DomainError) as exc:
        return _fail(1, exc)
    except NumericalError as exc:
        return _fail(2, exc)
    except SpecFnError as exc:
        return _fail(1, exc)
    print(json.dumps(out, default=_json_default))
    return code


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


if __name__ == "__main__":
    sys.exit(main())
