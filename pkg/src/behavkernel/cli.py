"""Command-line front end.

Exit codes: 0 success, 2 identification or numerical failure, 3 failed
certificate, 64 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import experiments
from .behavior import behavior_from_kernel
from .completion import complete_exact, complete_nuclear_norm
from .errors import BehavKernelError, DimensionError, DomainError, ParseError
from .kernel_ident import KernelRep, identify_exact, identify_noisy
from .lti import StateSpaceModel, check_pe_mosaic, check_sample_observability, simulate
from .numerics import ToleranceConfig
from .signals import Complexity, IrregularSignal, format_number, parse_csv, write_csv

EXIT_OK = 0
EXIT_FAIL = 2
EXIT_CERT = 3
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


# matrix files: one "# key=value, ..." header line followed by CSV rows


def format_matrix(M: np.ndarray, header: dict) -> str:
    head = "# " + ", ".join(f"{k}={_header_value(v)}" for k, v in header.items())
    rows = [",".join(format_number(x) for x in row) for row in np.atleast_2d(M)]
    return "\n".join([head] + rows) + "\n"


def _header_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def parse_matrix(text: str) -> tuple[np.ndarray, dict]:
    header: dict[str, str] = {}
    rows = []
    for line in text.splitlines():
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            for item in s[1:].split(","):
                if "=" in item:
                    k, v = item.split("=", 1)
                    header[k.strip()] = v.strip()
            continue
        try:
            rows.append([float(t) for t in s.split(",")])
        except ValueError:
            raise ParseError(f"non-numeric entry in matrix row {s!r}") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise ParseError("ragged matrix rows")
    if not rows and not header:
        raise ParseError("empty input")
    return np.array(rows, dtype=float), header


def _header_int(header: dict, key: str) -> int:
    try:
        return int(header[key])
    except (KeyError, ValueError):
        raise ParseError(f"header field {key!r} missing or not an integer") from None


def kernel_to_text(kernel: KernelRep) -> str:
    cx = kernel.complexity
    head = {"d": kernel.depth, "m": cx.m, "p": cx.p, "n": cx.n, "ell": cx.ell, "exact": kernel.exact}
    return format_matrix(kernel.R, head)


def kernel_from_text(text: str) -> KernelRep:
    R, h = parse_matrix(text)
    cx = Complexity(*(_header_int(h, k) for k in ("m", "p", "n", "ell")))
    d = _header_int(h, "d")
    exact = h.get("exact", "true").lower() != "false"
    if R.size == 0:
        R = np.zeros((0, cx.q * d))
    return KernelRep(R, d, cx, exact=exact)


def model_from_text(text: str) -> StateSpaceModel:
    """Model file: ``[[A, B], [C, D]]`` with a ``# n=, m=, p=`` header."""
    M, h = parse_matrix(text)
    n, m, p = (_header_int(h, k) for k in ("n", "m", "p"))
    if M.shape != (n + p, n + m):
        raise ParseError(f"model matrix has shape {M.shape}, expected {(n + p, n + m)}")
    return StateSpaceModel(M[:n, :n], M[:n, n:], M[n:, :n], M[n:, n:])


def model_to_text(model: StateSpaceModel) -> str:
    M = np.block([[model.A, model.B], [model.C, model.D]])
    return format_matrix(M, {"n": model.n, "m": model.m, "p": model.p})


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    Path(path).write_text(text)


def _complexity(args) -> Complexity:
    return Complexity(args.m, args.p, args.n, args.ell)


def _tolerances(args) -> ToleranceConfig:
    return ToleranceConfig(args.rank_tol, args.residual_tol, args.angle_tol)


def _signal(args, m: int) -> IrregularSignal:
    return parse_csv(_read(args.input), m=m)


def cmd_identify(args) -> int:
    cx = _complexity(args)
    w = _signal(args, cx.m)
    fn = identify_noisy if args.noisy else identify_exact
    out = fn(w, cx, d_max=args.dmax, budget=args.budget, cfg=_tolerances(args))
    if out.success:
        _write(args.out, kernel_to_text(out.kernel))
        print(f"success d={out.depth} rows={out.kernel.R.shape[0]}")
        return EXIT_OK
    Z = out.partial_annihilators
    head = {"status": "partial", "d": out.depth, "m": cx.m, "p": cx.p, "n": cx.n, "ell": cx.ell}
    _write(args.out, format_matrix(Z, head) if Z.size else "# " + ", ".join(f"{k}={v}" for k, v in head.items()))
    last = out.diagnostics[-1] if out.diagnostics else None
    found = last.rank if last else 0
    target = last.target if last else cx.kernel_rows(out.depth)
    sys.stderr.write(f"partial: {found} of {target} annihilators found up to depth {out.depth}\n")
    return EXIT_FAIL


def cmd_behavior(args) -> int:
    kernel = kernel_from_text(_read(args.kernel))
    basis = behavior_from_kernel(kernel, args.len, _tolerances(args))
    cx = kernel.complexity
    head = {"L": args.len, "d": kernel.depth, "m": cx.m, "p": cx.p, "n": cx.n, "ell": cx.ell, "exact": kernel.exact}
    _write(args.out, format_matrix(basis.P, head))
    return EXIT_OK


def cmd_complete(args) -> int:
    kernel = kernel_from_text(_read(args.kernel)) if args.kernel else None
    if args.method == "exact":
        if kernel is None:
            raise UsageError("--kernel is required for the exact method")
        w = _signal(args, kernel.complexity.m)
        res = complete_exact(w, kernel, _tolerances(args))
        if not res.unique:
            sys.stderr.write("warning: completion is not unique\n")
    else:
        m = kernel.complexity.m if kernel is not None else args.m
        w = _signal(args, m)
        res = complete_nuclear_norm(w, L=args.nn_depth)
        if not res.converged:
            sys.stderr.write("warning: nuclear-norm iterations did not converge\n")
    _write(args.out, write_csv(res.completed))
    return EXIT_OK


def cmd_check(args) -> int:
    cx = _complexity(args)
    cfg = _tolerances(args)
    if args.pe_mosaic:
        w = _signal(args, cx.m)
        u = np.where(w.given[:, : cx.m], w.u, np.nan)
        ok = check_pe_mosaic(u, cx, cfg=cfg)
        name = "input excitation"
    else:
        model = model_from_text(_read(args.sample_obs))
        ok = check_sample_observability(model, cfg, ell=cx.ell)
        name = "sample observability"
    print(f"{name}: {'pass' if ok else 'fail'}")
    return EXIT_OK if ok else EXIT_CERT


def _column(text: str) -> np.ndarray:
    M, _ = parse_matrix(text)
    return M.reshape(-1)


def cmd_simulate(args) -> int:
    model = model_from_text(_read(args.model))
    x0 = _column(_read(args.x0))
    u = None
    if args.u:
        u, _ = parse_matrix(_read(args.u))
        if model.m == 1:
            u = u.reshape(-1)
    elif model.m > 0:
        raise UsageError("--u is required for a model with inputs")
    w = simulate(model, x0, u, T=args.T)
    _write(args.out, write_csv(w))
    return EXIT_OK


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        cfg = json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid JSON in {path}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise UsageError("experiment config must be a JSON object")
    return cfg


def _check_keys(cfg: dict, allowed) -> None:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")


def cmd_experiment(args) -> int:
    cfg = _load_config(args.config)
    if args.name == "fig1":
        _check_keys(cfg, [f.name for f in fields(experiments.SweepConfig)])
        table = experiments.run_fig1_sweep(experiments.SweepConfig(**cfg))
    elif args.name == "table1":
        _check_keys(cfg, ["T_list", "seed", "nn_max_T"])
        table = experiments.run_completion_benchmark(**cfg)
    else:
        _check_keys(cfg, ["gamma_list", "seed", "T", "missing_fraction", "rank_rel_tol", "d_max", "nn_depth"])
        table = experiments.run_noisy_case_study(**cfg)
    csv_path, meta_path = table.write(args.out, args.name)
    print(f"wrote {csv_path} and {meta_path}")
    return EXIT_OK


def _add_complexity(p, required=True):
    for flag in ("m", "p", "n", "ell"):
        p.add_argument(f"--{flag}", type=int, required=required)


def _add_tolerances(p):
    d = ToleranceConfig()
    p.add_argument("--rank-tol", type=float, default=d.rank_rel_tol, help="relative rank threshold")
    p.add_argument("--residual-tol", type=float, default=d.residual_tol)
    p.add_argument("--angle-tol", type=float, default=d.angle_tol)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="behavkernel", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identify", help="kernel representation from a signal with missing samples")
    p.add_argument("--in", dest="input", required=True)
    _add_complexity(p)
    p.add_argument("--noisy", action="store_true", help="truncate blocks to the model rank")
    p.add_argument("--dmax", type=int)
    p.add_argument("--budget", type=int, default=3, help="max missing-row patterns merged per block")
    p.add_argument("--out", required=True)
    _add_tolerances(p)
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("behavior", help="basis of the length-L behavior")
    p.add_argument("--kernel", required=True)
    p.add_argument("--len", type=int, required=True)
    p.add_argument("--out", required=True)
    _add_tolerances(p)
    p.set_defaults(func=cmd_behavior)

    p = sub.add_parser("complete", help="fill missing samples")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kernel")
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=("exact", "nn"), default="exact")
    p.add_argument("--m", type=int, default=0, help="input count when no kernel is given")
    p.add_argument("--nn-depth", type=int, help="Hankel depth for the nuclear-norm method")
    _add_tolerances(p)
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("check", help="data and model certificates")
    p.add_argument("--in", dest="input", required=True)
    _add_complexity(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--pe-mosaic", action="store_true", help="test the input for excitation")
    group.add_argument("--sample-obs", metavar="MODEL", help="test a model file for sample observability")
    _add_tolerances(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("simulate", help="simulate a state-space model")
    p.add_argument("--model", required=True)
    p.add_argument("--x0", required=True)
    p.add_argument("--u")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a numerical study")
    p.add_argument("name", choices=("fig1", "table1", "table2"))
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_experiment)
    return parser


_USAGE_ERRORS = (UsageError, ParseError, DomainError, DimensionError, TypeError)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"behavkernel {args.command}: {exc}\n")
        return EXIT_USAGE
    except (BehavKernelError, ArithmeticError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"behavkernel {args.command}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
